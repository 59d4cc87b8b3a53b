//! Recording files: one JSON object per line, one frame per object.
//!
//! ```text
//! # fps: 30
//! # source: human
//! {"t":0.0e0,"head":{"p":[x,y,z],"q":[w,x,y,z]},"lh":{"p":[x,y,z],"c":0.9},"rh":{...}}
//! ```
//!
//! `t` and `head` are required, `lh` / `rh` are optional. Lines starting
//! with `#` carry metadata (`fps`, `source`) or comments; blank lines are
//! ignored. Numbers are written with 17 significant digits so a
//! serialize/parse cycle reproduces every finite `f64` exactly.

use std::fmt::Write as _;
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::se2::{project_to_ground, ForwardAxis, Pose2, Pose3, Quaternion};

/// Frame rate assumed when neither a header nor two frames are available.
pub const DEFAULT_FPS: f64 = 30.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Source {
    #[default]
    Human,
    Robot,
}

impl std::fmt::Display for Source {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Source::Human => f.write_str("human"),
            Source::Robot => f.write_str("robot"),
        }
    }
}

/// Tracked hand position with the tracker's confidence.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HandObservation {
    pub position: [f64; 3],
    pub confidence: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FrameRecord {
    pub t: f64,
    pub head: Pose3<f64>,
    pub left_hand: Option<HandObservation>,
    pub right_hand: Option<HandObservation>,
}

impl FrameRecord {
    pub fn hands(&self) -> impl Iterator<Item = &HandObservation> {
        self.left_hand.iter().chain(self.right_hand.iter())
    }
}

/// A single demonstration. Frames are strictly increasing in `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct Episode {
    pub frames: Vec<FrameRecord>,
    pub fps: f64,
    pub source: Source,
}

impl Episode {
    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    pub fn times(&self) -> Vec<f64> {
        self.frames.iter().map(|f| f.t).collect()
    }

    /// Ground-projected head pose of every frame.
    pub fn base_poses(&self, axis: ForwardAxis) -> Result<Vec<Pose2<f64>>> {
        self.frames
            .iter()
            .map(|f| project_to_ground(&f.head, axis))
            .collect()
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawHead {
    p: [f64; 3],
    q: [f64; 4],
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawHand {
    p: [f64; 3],
    c: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFrame {
    t: f64,
    head: RawHead,
    #[serde(default)]
    lh: Option<RawHand>,
    #[serde(default)]
    rh: Option<RawHand>,
}

impl From<RawHand> for HandObservation {
    fn from(h: RawHand) -> Self {
        HandObservation {
            position: h.p,
            confidence: h.c,
        }
    }
}

/// Parses a recording stream. Line numbers in errors are 1-based.
pub fn parse_recording<R: BufRead>(reader: R) -> Result<Episode> {
    let mut frames: Vec<FrameRecord> = Vec::new();
    let mut fps = None;
    let mut source = Source::Human;

    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        if let Some(meta) = trimmed.strip_prefix('#') {
            if let Some((key, value)) = meta.split_once(':') {
                let value = value.trim();
                match key.trim() {
                    "fps" => {
                        let v: f64 = value.parse().map_err(|_| Error::Parse {
                            line: line_no,
                            message: format!("invalid fps `{value}`"),
                        })?;
                        if !(v > 0.0 && v.is_finite()) {
                            return Err(Error::Schema {
                                line: line_no,
                                message: format!("fps must be positive, got {v}"),
                            });
                        }
                        fps = Some(v);
                    }
                    "source" => {
                        source = match value {
                            "human" => Source::Human,
                            "robot" => Source::Robot,
                            other => {
                                return Err(Error::Parse {
                                    line: line_no,
                                    message: format!("unknown source `{other}`"),
                                })
                            }
                        }
                    }
                    _ => {}
                }
            }
            continue;
        }

        let raw: RawFrame = serde_json::from_str(trimmed).map_err(|e| Error::Parse {
            line: line_no,
            message: e.to_string(),
        })?;
        let frame = frame_from_raw(raw).map_err(|e| Error::Parse {
            line: line_no,
            message: e.to_string(),
        })?;
        if let Some(prev) = frames.last() {
            if !(frame.t > prev.t) {
                return Err(Error::Schema {
                    line: line_no,
                    message: format!(
                        "timestamps must be strictly increasing ({} after {})",
                        frame.t, prev.t
                    ),
                });
            }
        }
        frames.push(frame);
    }

    if frames.is_empty() {
        return Err(Error::Schema {
            line: 0,
            message: "recording contains no frames".into(),
        });
    }
    let fps = fps.unwrap_or_else(|| estimate_fps(&frames));
    Ok(Episode {
        frames,
        fps,
        source,
    })
}

fn frame_from_raw(raw: RawFrame) -> Result<FrameRecord> {
    let [w, x, y, z] = raw.head.q;
    let head = Pose3::new(raw.head.p, Quaternion { w, x, y, z })?;
    Ok(FrameRecord {
        t: raw.t,
        head,
        left_hand: raw.lh.map(Into::into),
        right_hand: raw.rh.map(Into::into),
    })
}

fn estimate_fps(frames: &[FrameRecord]) -> f64 {
    match (frames.first(), frames.last()) {
        (Some(a), Some(b)) if frames.len() > 1 => (frames.len() - 1) as f64 / (b.t - a.t),
        _ => DEFAULT_FPS,
    }
}

fn num(v: f64) -> String {
    format!("{v:.16e}")
}

fn vec_json(v: &[f64]) -> String {
    let parts: Vec<String> = v.iter().map(|x| num(*x)).collect();
    format!("[{}]", parts.join(","))
}

/// One recording line, without the trailing newline.
pub fn frame_to_line(frame: &FrameRecord) -> String {
    let q = frame.head.orientation;
    let mut s = format!(
        "{{\"t\":{},\"head\":{{\"p\":{},\"q\":{}}}",
        num(frame.t),
        vec_json(&frame.head.position),
        vec_json(&[q.w, q.x, q.y, q.z])
    );
    for (key, hand) in [("lh", &frame.left_hand), ("rh", &frame.right_hand)] {
        if let Some(h) = hand {
            let _ = write!(
                s,
                ",\"{key}\":{{\"p\":{},\"c\":{}}}",
                vec_json(&h.position),
                num(h.confidence)
            );
        }
    }
    s.push('}');
    s
}

pub fn serialize_recording<W: Write>(ep: &Episode, mut out: W) -> Result<()> {
    writeln!(out, "# fps: {}", num(ep.fps))?;
    writeln!(out, "# source: {}", ep.source)?;
    for frame in &ep.frames {
        writeln!(out, "{}", frame_to_line(frame))?;
    }
    Ok(())
}

/// Drops every frame in which a present hand reports confidence below zero.
pub fn filter_confidence(ep: &Episode) -> Episode {
    Episode {
        frames: ep
            .frames
            .iter()
            .filter(|f| f.hands().all(|h| !(h.confidence < 0.0)))
            .cloned()
            .collect(),
        fps: ep.fps,
        source: ep.source,
    }
}
