use super::{solve, RetargetConfig, RetargetProblem, RetargetSolution};
use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::se2::{Pose2, VelocityCommand};

/// Retargets a waypoint sequence window by window.
///
/// The first waypoint is the start pose; the remaining ones are split into
/// consecutive windows of `cfg.window` steps (the last may be shorter). Each
/// window starts where the previous rollout ended and is smoothed against the
/// previous window's final command. The first window starts at rest.
pub fn retarget_track<T: Real>(waypoints: &[Pose2<T>], cfg: &RetargetConfig<T>) -> Result<Vec<RetargetSolution<T>>> {
    if waypoints.len() < 2 {
        return Err(Error::invalid("retargeting a track needs at least two waypoints"));
    }
    cfg.validate()?;
    let mut start = waypoints[0];
    let mut prev_cmd = VelocityCommand::zero();
    let mut out = Vec::new();
    for (index, window) in waypoints[1..].chunks(cfg.window).enumerate() {
        let mut window_cfg = *cfg;
        window_cfg.seed = cfg.seed.wrapping_add(index as u64);
        let mut prob = RetargetProblem::new(start, window.to_vec(), window_cfg);
        prob.prev_cmd = prev_cmd;
        let sol = solve(&prob, None).map_err(|e| Error::Window {
            index,
            source: Box::new(e),
        })?;
        start = sol.endpoint(cfg.dt);
        prev_cmd = *sol.cmds.last().unwrap();
        out.push(sol);
    }
    Ok(out)
}
