use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use egonav::chunk::{modulate, subsample, upsample, write_chunk};
use egonav::phase::io::{read_phase_records, write_phase_records, PhaseRecord};
use egonav::retarget::io::{read_commands, write_commands, CommandFile};
use egonav::sim::{score_segmentation, simulate, synthesize, SimResult, SynthSpec};
use egonav::waypoints::{extract_waypoints, resample_in_time};
use egonav::{filter_confidence, parse_recording, retarget_track, segment, serialize_recording, Episode, PhaseLabel, PhaseTrack, Pose2};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::PipelineConfig;
use crate::{svg, Failure, Format, Summary};

/// Caps the number of worker threads used when several recordings are processed.
pub const THREADS_ENV: &str = "EMMA_RETARGET_THREADS";

pub const SIM_FILE: &str = "sim.json";
pub const COMMANDS_FILE: &str = "commands.txt";
pub const PHASES_FILE: &str = "phases.jsonl";
pub const TRUTH_FILE: &str = "recording.truth.jsonl";

#[derive(Debug, Clone, PartialEq)]
pub struct Context {
    pub config: PipelineConfig,
    pub format: Format,
    /// `--seed`, already folded into `config`; synth applies it to the spec.
    pub seed: Option<u64>,
}

impl Context {
    pub fn new(config: PipelineConfig, format: Format, seed: Option<u64>) -> Self {
        Self {
            config: config.with_seed(seed),
            format,
            seed,
        }
    }
}

/// Written by `simulate`, read by `report`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimArtifact {
    pub config: PipelineConfig,
    pub dt: f64,
    pub start: Pose2<f64>,
    pub desired: Vec<Pose2<f64>>,
    pub result: SimResult<f64>,
}

fn at(path: &Path, e: impl Into<Failure>) -> Failure {
    let mut f = e.into();
    f.message = format!("{}: {}", path.display(), f.message);
    f
}

fn open(path: &Path) -> Result<BufReader<File>, Failure> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| Failure::input(format!("cannot open {}: {e}", path.display())))
}

fn create(path: &Path) -> Result<BufWriter<File>, Failure> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Failure::input(format!("cannot create {}: {e}", dir.display())))?;
    }
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Failure::input(format!("cannot create {}: {e}", path.display())))
}

fn write_text(path: &Path, text: &str) -> Result<(), Failure> {
    let mut w = create(path)?;
    w.write_all(text.as_bytes())
        .and_then(|_| w.flush())
        .map_err(|e| Failure::input(format!("cannot write {}: {e}", path.display())))
}

fn finish(mut w: BufWriter<File>, path: &Path) -> Result<(), Failure> {
    w.flush()
        .map_err(|e| Failure::input(format!("cannot write {}: {e}", path.display())))
}

fn episode_name(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "episode".into())
}

fn load_recording(path: &Path) -> Result<Episode, Failure> {
    parse_recording(open(path)?).map_err(|e| at(path, e))
}

fn thread_pool() -> Result<rayon::ThreadPool, Failure> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Ok(v) = std::env::var(THREADS_ENV) {
        let n = v
            .trim()
            .parse::<usize>()
            .ok()
            .filter(|n| *n > 0)
            .ok_or_else(|| Failure::input(format!("{THREADS_ENV} must be a positive integer, got `{v}`")))?;
        builder = builder.num_threads(n);
    }
    builder.build().map_err(|e| Failure::input(e.to_string()))
}

/// Waypoints of `ep` retimed onto the control grid of period `dt`.
pub fn desired_track(ep: &Episode, cfg: &PipelineConfig, dt: f64) -> Result<Vec<Pose2<f64>>, Failure> {
    let axis = cfg.ingest.forward_axis;
    let track = extract_waypoints(ep, cfg.ingest.d_thresh, axis)?;
    let poses = ep.base_poses(axis)?;
    let samples = resample_in_time(&track, &poses, &ep.times(), dt)?;
    if samples.len() < 2 {
        return Err(Failure::input("recording is shorter than one control period"));
    }
    Ok(samples)
}

fn load_labels(phases: &Path, recording: &Path, frames: usize) -> Result<PhaseTrack, Failure> {
    let records = read_phase_records(open(phases)?).map_err(|e| at(phases, e))?;
    let name = episode_name(recording);
    let record = match records.iter().find(|r| r.episode == name) {
        Some(r) => r,
        None if records.len() == 1 => &records[0],
        None => {
            return Err(Failure::input(format!(
                "{}: no phase record for episode `{name}`",
                phases.display()
            )))
        }
    };
    if record.labels.len() != frames {
        return Err(Failure::input(format!(
            "{}: {} labels for {frames} frames",
            phases.display(),
            record.labels.len()
        )));
    }
    Ok(record.labels.clone())
}

fn nearest_frame(times: &[f64], t: f64) -> usize {
    let i = times.partition_point(|&x| x < t);
    if i == 0 {
        0
    } else if i == times.len() || t - times[i - 1] <= times[i] - t {
        i - 1
    } else {
        i
    }
}

pub fn cmd_synth(spec_path: &Path, out: &Path, ctx: &Context) -> Result<Summary, Failure> {
    let text = fs::read_to_string(spec_path)
        .map_err(|e| Failure::input(format!("cannot read spec {}: {e}", spec_path.display())))?;
    let mut spec: SynthSpec =
        toml::from_str(&text).map_err(|e| Failure::input(format!("{}: {e}", spec_path.display())))?;
    if let Some(seed) = ctx.seed {
        spec.seed = seed;
    }
    let (ep, truth) = synthesize(&spec).map_err(|e| at(spec_path, e))?;

    let mut w = create(out)?;
    serialize_recording(&ep, &mut w)?;
    finish(w, out)?;

    let name = episode_name(out);
    let truth_path = out.with_file_name(format!("{name}.truth.jsonl"));
    let record = PhaseRecord {
        episode: name,
        labels: truth.clone(),
        gmm: None,
        config: None,
        seed: Some(spec.seed),
    };
    let mut w = create(&truth_path)?;
    write_phase_records(&[record], &mut w)?;
    finish(w, &truth_path)?;

    let mut s = Summary::default();
    s.push("frames", ep.len());
    s.push("duration_s", ep.frames.last().map_or(0.0, |f| f.t));
    s.push("manipulation_frames", truth.count(PhaseLabel::Manipulation));
    s.push("recording", out.display().to_string());
    s.push("truth", truth_path.display().to_string());
    Ok(s)
}

fn segment_one(path: &Path, cfg: &PipelineConfig) -> Result<PhaseRecord, Failure> {
    let ep = filter_confidence(&load_recording(path)?);
    let seg = segment(&ep, &cfg.phase, cfg.seeds.segment).map_err(|e| at(path, e))?;
    Ok(PhaseRecord {
        episode: episode_name(path),
        labels: seg.phases,
        gmm: Some(seg.model),
        config: Some(cfg.phase),
        seed: Some(cfg.seeds.segment),
    })
}

pub fn cmd_segment(recordings: &[PathBuf], out: &Path, ctx: &Context) -> Result<Summary, Failure> {
    if recordings.is_empty() {
        return Err(Failure::input("no recordings given"));
    }
    let pool = thread_pool()?;
    let results: Vec<Result<PhaseRecord, Failure>> =
        pool.install(|| recordings.par_iter().map(|p| segment_one(p, &ctx.config)).collect());
    let records = results.into_iter().collect::<Result<Vec<_>, _>>()?;

    let mut w = create(out)?;
    write_phase_records(&records, &mut w)?;
    finish(w, out)?;

    let mut s = Summary::default();
    for r in &records {
        let prefix = if records.len() == 1 { String::new() } else { format!("{}.", r.episode) };
        s.push(format!("{prefix}frames"), r.labels.len());
        s.push(format!("{prefix}manipulation_frames"), r.labels.count(PhaseLabel::Manipulation));
        s.push(format!("{prefix}transitions"), r.labels.transitions());
    }
    s.push("phases", out.display().to_string());
    Ok(s)
}

pub fn cmd_retarget(recording: &Path, phases: Option<&Path>, out: &Path, ctx: &Context) -> Result<Summary, Failure> {
    let ep = filter_confidence(&load_recording(recording)?);
    let rcfg = ctx.config.effective_retarget();
    let samples = desired_track(&ep, &ctx.config, rcfg.dt).map_err(|e| at(recording, e))?;
    let labels = phases.map(|p| load_labels(p, recording, ep.len())).transpose()?;
    let windows = retarget_track(&samples, &rcfg).map_err(|e| at(recording, e))?;

    let times = ep.times();
    let t0 = times[0];
    let n_cmds: usize = windows.iter().map(|w| w.cmds.len()).sum();
    let cmd_phases = (0..n_cmds)
        .map(|k| {
            labels.as_ref().map(|l| {
                let t = t0 + (k + 1) as f64 * rcfg.dt;
                l.labels[nearest_frame(&times, t)]
            })
        })
        .collect();
    let file = CommandFile {
        dt: rcfg.dt,
        windows,
        phases: cmd_phases,
    };
    let mut w = create(out)?;
    write_commands(&file, &mut w)?;
    finish(w, out)?;

    let cmds = file.commands();
    let mean_abs_v = cmds.iter().map(|c| c.v.abs()).sum::<f64>() / cmds.len() as f64;
    let total: f64 = file.windows.iter().map(|w| w.cost.total).sum();
    let mut s = Summary::default();
    s.push("windows", file.windows.len());
    s.push("converged_windows", file.windows.iter().filter(|w| w.converged).count());
    s.push("commands", cmds.len());
    s.push("mean_abs_v", mean_abs_v);
    s.push("cost_total", total);
    s.push("commands_file", out.display().to_string());
    Ok(s)
}

pub fn cmd_simulate(commands: &Path, recording: &Path, out: &Path, ctx: &Context) -> Result<Summary, Failure> {
    let file = read_commands(open(commands)?).map_err(|e| at(commands, e))?;
    let ep = filter_confidence(&load_recording(recording)?);
    let mut rcfg = ctx.config.effective_retarget();
    rcfg.dt = file.dt;
    let samples = desired_track(&ep, &ctx.config, file.dt).map_err(|e| at(recording, e))?;
    let result = simulate(&samples[0], &file.windows, &samples[1..], &rcfg).map_err(|e| at(commands, e))?;

    let mut config = ctx.config.clone();
    config.retarget.dt = file.dt;
    let artifact = SimArtifact {
        config,
        dt: file.dt,
        start: samples[0],
        desired: samples[1..].to_vec(),
        result,
    };
    let mut text = serde_json::to_string_pretty(&artifact).map_err(|e| Failure::input(e.to_string()))?;
    text.push('\n');
    write_text(out, &text)?;

    let r = &artifact.result;
    let mut s = Summary::default();
    s.push("pos_rmse", r.pos_rmse);
    s.push("pos_max", r.pos_max);
    s.push("yaw_rmse", r.yaw_rmse);
    s.push("cost_total", r.cost_breakdown.total);
    s.push("max_cost_discrepancy", r.max_cost_discrepancy);
    s.push("sim", out.display().to_string());
    Ok(s)
}

fn required(dir: &Path, name: &str) -> Result<PathBuf, Failure> {
    let p = dir.join(name);
    if p.is_file() {
        Ok(p)
    } else {
        Err(Failure::input(format!("missing artifact {}", p.display())))
    }
}

pub fn cmd_report(artifacts: &Path, out_dir: &Path, _ctx: &Context) -> Result<Summary, Failure> {
    if !artifacts.is_dir() {
        return Err(Failure::input(format!("{} is not a directory", artifacts.display())));
    }
    let sim_path = required(artifacts, SIM_FILE)?;
    let commands_path = required(artifacts, COMMANDS_FILE)?;
    let sim: SimArtifact = serde_json::from_reader(open(&sim_path)?)
        .map_err(|e| Failure::input(format!("{}: {e}", sim_path.display())))?;
    let file = read_commands(open(&commands_path)?).map_err(|e| at(&commands_path, e))?;
    if file.commands().len() != sim.desired.len() {
        return Err(Failure::input(format!(
            "{} holds {} commands but {} has {} waypoints",
            commands_path.display(),
            file.commands().len(),
            sim_path.display(),
            sim.desired.len()
        )));
    }

    let read_track = |name: &str| -> Result<Option<PhaseTrack>, Failure> {
        let p = artifacts.join(name);
        if !p.is_file() {
            return Ok(None);
        }
        let records = read_phase_records(open(&p)?).map_err(|e| at(&p, e))?;
        Ok(records.into_iter().next().map(|r| r.labels))
    };
    let predicted = read_track(PHASES_FILE)?;
    let truth = read_track(TRUTH_FILE)?;

    let r = &sim.result;
    let cmds = file.commands();
    let mut s = Summary::default();
    s.push("pos_rmse", r.pos_rmse);
    s.push("pos_max", r.pos_max);
    s.push("yaw_rmse", r.yaw_rmse);
    s.push("cost_total", r.cost_breakdown.total);
    s.push("cost_pos", r.cost_breakdown.pos);
    s.push("cost_yaw", r.cost_breakdown.yaw);
    s.push("cost_smooth", r.cost_breakdown.smooth);
    s.push("max_cost_discrepancy", r.max_cost_discrepancy);
    s.push("windows", file.windows.len());
    s.push("converged_windows", file.windows.iter().filter(|w| w.converged).count());
    s.push("commands", cmds.len());
    s.push("mean_abs_v", cmds.iter().map(|c| c.v.abs()).sum::<f64>() / cmds.len().max(1) as f64);
    if let Some(p) = &predicted {
        s.push("frames", p.len());
        s.push("manipulation_frames", p.count(PhaseLabel::Manipulation));
        s.push("transitions", p.transitions());
        if let Some(t) = &truth {
            if let Ok(acc) = score_segmentation(p, t) {
                s.push("segmentation_accuracy", acc);
                s.push("truth_transitions", t.transitions());
            }
        }
    }
    for (k, v) in sim.config.parameters() {
        s.push(k, v);
    }

    let timeline: Vec<PhaseLabel> = match &predicted {
        Some(p) => p.labels.clone(),
        None => file.phases.iter().map(|p| p.unwrap_or(PhaseLabel::Navigation)).collect(),
    };
    let mut rollout = vec![sim.start];
    rollout.extend(r.poses.iter().copied());
    let mut desired = vec![sim.start];
    desired.extend(sim.desired.iter().copied());
    let window_totals: Vec<f64> = r.window_costs.iter().map(|c| c.total).collect();

    write_text(&out_dir.join("metrics.txt"), &s.render(Format::Text))?;
    write_text(&out_dir.join("metrics.json"), &s.render(Format::Json))?;
    write_text(&out_dir.join("trajectory.svg"), &svg::trajectory(&desired, &rollout))?;
    write_text(
        &out_dir.join("phases.svg"),
        &svg::phase_timeline(&timeline, truth.as_ref().map(|t| t.labels.as_slice())),
    )?;
    write_text(&out_dir.join("costs.svg"), &svg::cost_bars(&window_totals))?;
    Ok(s)
}

pub fn cmd_chunk(recording: &Path, phases: &Path, t0: usize, out: &Path, ctx: &Context) -> Result<Summary, Failure> {
    let ep = filter_confidence(&load_recording(recording)?);
    let labels = load_labels(phases, recording, ep.len())?;
    let c = &ctx.config.chunk;
    let raw = subsample(&ep, t0, c.nav_horizon, c.nav_step, &labels, ctx.config.ingest.forward_axis)
        .map_err(|e| at(recording, e))?;
    let up = upsample(&raw, c.target_len)?;
    let current = labels.labels[t0];
    let chunk = modulate(&up, current)?;
    let mut w = create(out)?;
    write_chunk(&chunk, &mut w)?;
    finish(w, out)?;

    let mut s = Summary::default();
    s.push("t0", t0);
    s.push("current_phase", current.as_u8());
    s.push("horizon", c.nav_horizon);
    s.push("step", c.nav_step);
    s.push("length", chunk.len());
    s.push("chunk", out.display().to_string());
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nearest_frame_ties_go_left() {
        let t = [0.0, 1.0, 2.0];
        assert_eq!(nearest_frame(&t, -1.0), 0);
        assert_eq!(nearest_frame(&t, 0.5), 0);
        assert_eq!(nearest_frame(&t, 0.6), 1);
        assert_eq!(nearest_frame(&t, 5.0), 2);
    }
}
