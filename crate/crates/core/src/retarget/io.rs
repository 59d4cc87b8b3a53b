//! Command files: plain-text table, one command per line.
//!
//! ```text
//! # egonav commands v1
//! # dt <seconds>
//! # columns: window step v omega dt phase
//! # window <i> start <x> <y> <theta> prev <v> <omega> cost_total <c> cost_pos <c> cost_yaw <c> cost_smooth <c> iterations <n> converged <bool>
//! <i> <k> <v> <omega> <dt> <phase>
//! ```
//!
//! Every window header precedes its command lines. `phase` is `0`
//! (manipulation), `1` (navigation) or `-` when unknown. Numbers carry 17
//! significant digits so values survive a write/read cycle exactly.

use std::io::{BufRead, Write};

use super::{CostBreakdown, RetargetSolution};
use crate::error::{Error, Result};
use crate::phase::PhaseLabel;
use crate::se2::{Pose2, VelocityCommand};

pub const HEADER: &str = "# egonav commands v1";

#[derive(Debug, Clone, PartialEq)]
pub struct CommandFile {
    pub dt: f64,
    pub windows: Vec<RetargetSolution<f64>>,
    /// Phase of every command, in order, when known.
    pub phases: Vec<Option<PhaseLabel>>,
}

impl CommandFile {
    pub fn commands(&self) -> Vec<VelocityCommand<f64>> {
        self.windows.iter().flat_map(|w| w.cmds.iter().copied()).collect()
    }
}

fn num(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn write_commands<W: Write>(file: &CommandFile, mut out: W) -> Result<()> {
    writeln!(out, "{HEADER}")?;
    writeln!(out, "# dt {}", num(file.dt))?;
    writeln!(out, "# columns: window step v omega dt phase")?;
    let mut flat = 0;
    for (i, w) in file.windows.iter().enumerate() {
        writeln!(
            out,
            "# window {i} start {} {} {} prev {} {} cost_total {} cost_pos {} cost_yaw {} cost_smooth {} iterations {} converged {}",
            num(w.start.x),
            num(w.start.y),
            num(w.start.theta),
            num(w.prev_cmd.v),
            num(w.prev_cmd.omega),
            num(w.cost.total),
            num(w.cost.pos),
            num(w.cost.yaw),
            num(w.cost.smooth),
            w.iterations,
            w.converged
        )?;
        for (k, c) in w.cmds.iter().enumerate() {
            let phase = match file.phases.get(flat).copied().flatten() {
                Some(p) => p.as_u8().to_string(),
                None => "-".to_string(),
            };
            writeln!(out, "{i} {k} {} {} {} {phase}", num(c.v), num(c.omega), num(file.dt))?;
            flat += 1;
        }
    }
    Ok(())
}

fn parse_f64(tok: Option<&str>, line: usize, what: &str) -> Result<f64> {
    let tok = tok.ok_or_else(|| Error::Parse {
        line,
        message: format!("missing {what}"),
    })?;
    tok.parse().map_err(|_| Error::Parse {
        line,
        message: format!("invalid {what} `{tok}`"),
    })
}

fn expect_key<'a>(it: &mut impl Iterator<Item = &'a str>, key: &str, line: usize) -> Result<()> {
    match it.next() {
        Some(k) if k == key => Ok(()),
        other => Err(Error::Parse {
            line,
            message: format!("expected `{key}`, found {other:?}"),
        }),
    }
}

fn parse_window_header(rest: &str, line: usize) -> Result<RetargetSolution<f64>> {
    let mut it = rest.split_whitespace();
    // window index
    it.next();
    expect_key(&mut it, "start", line)?;
    let x = parse_f64(it.next(), line, "start x")?;
    let y = parse_f64(it.next(), line, "start y")?;
    let theta = parse_f64(it.next(), line, "start theta")?;
    expect_key(&mut it, "prev", line)?;
    let pv = parse_f64(it.next(), line, "prev v")?;
    let pw = parse_f64(it.next(), line, "prev omega")?;
    let mut cost = CostBreakdown::default();
    for (key, slot) in [
        ("cost_total", &mut cost.total),
        ("cost_pos", &mut cost.pos),
        ("cost_yaw", &mut cost.yaw),
        ("cost_smooth", &mut cost.smooth),
    ] {
        expect_key(&mut it, key, line)?;
        *slot = parse_f64(it.next(), line, key)?;
    }
    expect_key(&mut it, "iterations", line)?;
    let iterations = parse_f64(it.next(), line, "iterations")? as usize;
    expect_key(&mut it, "converged", line)?;
    let converged = match it.next() {
        Some("true") => true,
        Some("false") => false,
        other => {
            return Err(Error::Parse {
                line,
                message: format!("invalid converged flag {other:?}"),
            })
        }
    };
    Ok(RetargetSolution {
        start: Pose2 { x, y, theta },
        prev_cmd: VelocityCommand::new(pv, pw),
        cmds: Vec::new(),
        cost,
        iterations,
        converged,
    })
}

pub fn read_commands<R: BufRead>(reader: R) -> Result<CommandFile> {
    let mut dt = None;
    let mut windows: Vec<RetargetSolution<f64>> = Vec::new();
    let mut phases = Vec::new();
    let mut saw_header = false;
    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        if trimmed == HEADER {
            saw_header = true;
            continue;
        }
        if let Some(rest) = trimmed.strip_prefix("# dt ") {
            dt = Some(parse_f64(Some(rest.trim()), line_no, "dt")?);
            continue;
        }
        if let Some(rest) = trimmed.strip_prefix("# window ") {
            windows.push(parse_window_header(rest, line_no)?);
            continue;
        }
        if trimmed.starts_with('#') {
            continue;
        }
        let toks: Vec<&str> = trimmed.split_whitespace().collect();
        if toks.len() != 6 {
            return Err(Error::Parse {
                line: line_no,
                message: format!("expected 6 columns, found {}", toks.len()),
            });
        }
        let window: usize = toks[0].parse().map_err(|_| Error::Parse {
            line: line_no,
            message: format!("invalid window index `{}`", toks[0]),
        })?;
        if window + 1 != windows.len() {
            return Err(Error::Parse {
                line: line_no,
                message: format!("command for window {window} outside its header"),
            });
        }
        let v = parse_f64(Some(toks[2]), line_no, "v")?;
        let omega = parse_f64(Some(toks[3]), line_no, "omega")?;
        let phase = match toks[5] {
            "-" => None,
            "0" => Some(PhaseLabel::Manipulation),
            "1" => Some(PhaseLabel::Navigation),
            other => {
                return Err(Error::Parse {
                    line: line_no,
                    message: format!("invalid phase `{other}`"),
                })
            }
        };
        windows.last_mut().unwrap().cmds.push(VelocityCommand::new(v, omega));
        phases.push(phase);
    }
    if !saw_header {
        return Err(Error::Parse {
            line: 1,
            message: format!("missing `{HEADER}` header"),
        });
    }
    let dt = dt.ok_or_else(|| Error::Parse {
        line: 0,
        message: "missing `# dt` line".into(),
    })?;
    Ok(CommandFile { dt, windows, phases })
}
