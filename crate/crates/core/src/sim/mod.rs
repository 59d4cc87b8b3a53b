//! Rollout scoring and synthetic episodes.

mod synth;

pub use synth::{synthesize, SegmentKind, SegmentSpec, SynthSpec, HAND_FREQUENCY, HEAD_HEIGHT};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::phase::PhaseTrack;
use crate::retarget::{cost, CostBreakdown, RetargetConfig, RetargetProblem, RetargetSolution};
use crate::scalar::Real;
use crate::se2::{rollout, wrap_angle, Pose2, VelocityCommand};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimResult<T> {
    /// Poses after each command; the start pose is not included.
    pub poses: Vec<Pose2<T>>,
    pub pos_rmse: T,
    pub pos_max: T,
    pub yaw_rmse: T,
    /// Objective recomputed per window and summed.
    pub cost_breakdown: CostBreakdown<T>,
    /// Recomputed objective of each window.
    pub window_costs: Vec<CostBreakdown<T>>,
    /// Largest |recomputed − reported| window total.
    pub max_cost_discrepancy: T,
}

/// Executes the commands of every window in sequence from `start` and
/// scores the rollout against `desired` (one pose per command).
pub fn simulate<T: Real>(
    start: &Pose2<T>,
    solutions: &[RetargetSolution<T>],
    desired: &[Pose2<T>],
    cfg: &RetargetConfig<T>,
) -> Result<SimResult<T>> {
    cfg.validate()?;
    let cmds: Vec<_> = solutions.iter().flat_map(|s| s.cmds.iter().copied()).collect();
    if cmds.len() != desired.len() {
        return Err(Error::invalid(format!(
            "{} commands for {} desired waypoints",
            cmds.len(),
            desired.len()
        )));
    }
    if cmds.is_empty() {
        return Err(Error::invalid("nothing to simulate"));
    }
    let poses = rollout(start, &cmds, cfg.dt)?;

    let n = T::lit(poses.len() as f64);
    let (mut sq, mut max, mut yaw_sq) = (T::zero(), T::zero(), T::zero());
    for (p, d) in poses.iter().zip(desired) {
        let e = p.distance(d);
        sq = sq + e * e;
        max = max.max(e);
        let ey = wrap_angle(p.theta - d.theta);
        yaw_sq = yaw_sq + ey * ey;
    }

    let mut offset = 0;
    let mut total = CostBreakdown::default();
    let mut window_costs = Vec::with_capacity(solutions.len());
    let mut discrepancy = T::zero();
    let mut window_start = *start;
    let mut prev_cmd = solutions.first().map_or(VelocityCommand::zero(), |s| s.prev_cmd);
    for sol in solutions {
        let k = sol.cmds.len();
        if k == 0 {
            continue;
        }
        let mut prob = RetargetProblem::new(window_start, desired[offset..offset + k].to_vec(), *cfg);
        prob.prev_cmd = prev_cmd;
        let c = cost(&sol.cmds, &prob)?;
        discrepancy = discrepancy.max((c.total - sol.cost.total).abs());
        total.total = total.total + c.total;
        total.pos = total.pos + c.pos;
        total.yaw = total.yaw + c.yaw;
        total.smooth = total.smooth + c.smooth;
        window_costs.push(c);
        offset += k;
        window_start = poses[offset - 1];
        prev_cmd = *sol.cmds.last().unwrap();
    }

    Ok(SimResult {
        poses,
        pos_rmse: (sq / n).sqrt(),
        pos_max: max,
        yaw_rmse: (yaw_sq / n).sqrt(),
        cost_breakdown: total,
        window_costs,
        max_cost_discrepancy: discrepancy,
    })
}

/// Fraction of frames whose labels agree.
pub fn score_segmentation(predicted: &PhaseTrack, truth: &PhaseTrack) -> Result<f64> {
    if predicted.len() != truth.len() {
        return Err(Error::invalid(format!(
            "predicted track has {} labels, truth has {}",
            predicted.len(),
            truth.len()
        )));
    }
    if truth.is_empty() {
        return Err(Error::invalid("cannot score empty tracks"));
    }
    let hits = predicted.labels.iter().zip(&truth.labels).filter(|(a, b)| a == b).count();
    Ok(hits as f64 / truth.len() as f64)
}
