use super::{cost, CostBreakdown, RetargetProblem};
use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::se2::{step, wrap_angle, Pose2, VelocityCommand};

pub const MAX_HORIZON: usize = 4;
pub const MAX_GRID: usize = 15;

/// Exhaustive grid minimizer.
#[derive(Debug, Clone, PartialEq)]
pub struct BruteForce<T> {
    pub cmds: Vec<VelocityCommand<T>>,
    pub cost: CostBreakdown<T>,
    /// Number of complete command sequences scored.
    pub evaluations: u64,
}

fn axis<T: Real>(lo: T, hi: T, n: usize) -> Vec<T> {
    let last = T::lit((n - 1) as f64);
    (0..n)
        .map(|i| {
            if i == n - 1 {
                hi
            } else {
                lo + (hi - lo) * T::lit(i as f64) / last
            }
        })
        .collect()
}

struct Search<'a, T> {
    prob: &'a RetargetProblem<T>,
    grid: Vec<VelocityCommand<T>>,
    path: Vec<usize>,
    best_path: Vec<usize>,
    best: T,
    evaluations: u64,
}

impl<T: Real> Search<'_, T> {
    fn descend(&mut self, depth: usize, pose: Pose2<T>, prev: VelocityCommand<T>, acc: T) {
        if depth == self.prob.horizon() {
            self.evaluations += 1;
            if acc < self.best {
                self.best = acc;
                self.best_path.clone_from(&self.path);
            }
            return;
        }
        let cfg = &self.prob.config;
        let want = self.prob.desired[depth];
        for gi in 0..self.grid.len() {
            let cmd = self.grid[gi];
            let next = step(&pose, &cmd, cfg.dt);
            let (ex, ey) = (next.x - want.x, next.y - want.y);
            let eth = wrap_angle(next.theta - want.theta);
            let (dv, dw) = (cmd.v - prev.v, cmd.omega - prev.omega);
            let term = cfg.lambda_pos * (ex * ex + ey * ey)
                + cfg.lambda_yaw * eth * eth
                + cfg.lambda_smooth * (dv * dv + dw * dw);
            self.path.push(gi);
            self.descend(depth + 1, next, cmd, acc + term);
            self.path.pop();
        }
    }
}

/// Enumerates every sequence on a uniform `grid_per_axis × grid_per_axis`
/// command grid (bounds included) and returns the lowest-cost one.
pub fn brute_force<T: Real>(prob: &RetargetProblem<T>, grid_per_axis: usize) -> Result<BruteForce<T>> {
    prob.validate()?;
    let k = prob.horizon();
    if k > MAX_HORIZON || grid_per_axis > MAX_GRID {
        return Err(Error::invalid(format!(
            "brute force budget exceeded: horizon {k} (max {MAX_HORIZON}), grid {grid_per_axis} (max {MAX_GRID})"
        )));
    }
    if grid_per_axis < 2 {
        return Err(Error::invalid("grid must have at least two points per axis"));
    }
    let cfg = &prob.config;
    let vs = axis(cfg.v_min, cfg.v_max, grid_per_axis);
    let ws = axis(cfg.omega_min, cfg.omega_max, grid_per_axis);
    let grid: Vec<_> = vs
        .iter()
        .flat_map(|&v| ws.iter().map(move |&w| VelocityCommand::new(v, w)))
        .collect();

    let mut search = Search {
        prob,
        grid,
        path: Vec::with_capacity(k),
        best_path: Vec::new(),
        best: T::infinity(),
        evaluations: 0,
    };
    search.descend(0, prob.start, prob.prev_cmd, T::zero());
    if search.best_path.len() != k {
        return Err(Error::NumericalFailure {
            message: "no finite cost on the grid".into(),
            last_iterate: Vec::new(),
        });
    }
    let cmds: Vec<_> = search.best_path.iter().map(|&i| search.grid[i]).collect();
    let cost = cost(&cmds, prob)?;
    Ok(BruteForce {
        cmds,
        cost,
        evaluations: search.evaluations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::retarget::{solve, RetargetConfig};

    #[test]
    fn stationary_target_hits_origin() {
        let prob = RetargetProblem::new(Pose2::<f64>::identity(), vec![Pose2::identity()], RetargetConfig::default());
        let bf = brute_force(&prob, 5).unwrap();
        assert_eq!(bf.cmds, vec![VelocityCommand::zero()]);
        assert_eq!(bf.cost.total, 0.0);
    }

    #[test]
    fn counts_evaluations() {
        let prob = RetargetProblem::new(Pose2::identity(), vec![Pose2::new(0.1, 0.0, 0.2)], RetargetConfig::default());
        assert_eq!(brute_force(&prob, 3).unwrap().evaluations, 9);
        let prob2 = RetargetProblem::new(Pose2::identity(), vec![Pose2::new(0.1, 0.0, 0.2); 2], RetargetConfig::default());
        assert_eq!(brute_force(&prob2, 3).unwrap().evaluations, 81);
    }

    #[test]
    fn budget_is_enforced() {
        let prob = RetargetProblem::new(Pose2::<f64>::identity(), vec![Pose2::identity(); 5], RetargetConfig::default());
        assert!(brute_force(&prob, 3).is_err());
        let prob = RetargetProblem::new(Pose2::<f64>::identity(), vec![Pose2::identity(); 1], RetargetConfig::default());
        assert!(brute_force(&prob, 16).is_err());
        assert!(brute_force(&prob, 1).is_err());
    }

    #[test]
    fn grid_never_beats_solver() {
        let desired = vec![Pose2::new(0.12, 0.04, 0.5), Pose2::new(0.2, 0.1, 0.9)];
        let prob = RetargetProblem::new(Pose2::identity(), desired, RetargetConfig::default());
        let bf = brute_force(&prob, 9).unwrap();
        let sol = solve(&prob, None).unwrap();
        assert!(bf.cost.total >= sol.cost.total - 1e-9);
    }
}
