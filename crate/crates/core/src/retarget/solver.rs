use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{evaluate, gradient_into, CommandPartials, CostBreakdown, RetargetProblem, RetargetSolution};
use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::se2::{wrap_angle, VelocityCommand};

const ARMIJO_C: f64 = 1e-4;
const BACKTRACK: f64 = 0.5;
const MAX_HALVINGS: usize = 60;

/// Result of one projected-gradient run.
#[derive(Debug, Clone, PartialEq)]
pub struct Descent<T> {
    pub cmds: Vec<VelocityCommand<T>>,
    pub cost: CostBreakdown<T>,
    pub iterations: usize,
    pub converged: bool,
    /// Objective after the projected initialization and after every accepted step.
    pub trace: Vec<T>,
}

/// Initializations in solver order: zeros, waypoint inversion, then seeded
/// uniform draws from the box. All are inside the box.
pub fn initial_guesses<T: Real>(prob: &RetargetProblem<T>) -> Vec<Vec<VelocityCommand<T>>> {
    let cfg = &prob.config;
    let k = prob.horizon();
    let mut out = Vec::with_capacity(cfg.n_starts);
    out.push(vec![cfg.project(VelocityCommand::zero()); k]);

    if cfg.n_starts > 1 {
        let mut prev = prob.start;
        let inv = prob
            .desired
            .iter()
            .map(|want| {
                let (s, c) = prev.theta.sin_cos();
                let v = ((want.x - prev.x) * c + (want.y - prev.y) * s) / cfg.dt;
                let omega = wrap_angle(want.theta - prev.theta) / cfg.dt;
                prev = *want;
                cfg.project(VelocityCommand::new(v, omega))
            })
            .collect();
        out.push(inv);
    }

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    while out.len() < cfg.n_starts {
        let draw = (0..k)
            .map(|_| {
                let a = T::lit(rng.random::<f64>());
                let b = T::lit(rng.random::<f64>());
                VelocityCommand::new(
                    cfg.v_min + a * (cfg.v_max - cfg.v_min),
                    cfg.omega_min + b * (cfg.omega_max - cfg.omega_min),
                )
            })
            .collect();
        out.push(draw);
    }
    out
}

fn to_pairs<T: Real>(z: &[VelocityCommand<T>]) -> Vec<(f64, f64)> {
    z.iter().map(|c| (c.v.as_f64(), c.omega.as_f64())).collect()
}

/// Projected gradient descent from `init` with an Armijo backtracking search
/// along the projection arc `P(z − α g)`. The first trial step is the
/// Barzilai–Borwein length from the previous iteration.
pub fn descend<T: Real>(prob: &RetargetProblem<T>, init: &[VelocityCommand<T>]) -> Result<Descent<T>> {
    prob.validate()?;
    super::check_len(init, prob)?;
    let cfg = &prob.config;
    let n = init.len();

    let mut x: Vec<VelocityCommand<T>> = init.iter().map(|c| cfg.project(*c)).collect();
    let mut states = Vec::with_capacity(n + 1);
    let mut g = vec![CommandPartials::default(); n];
    let mut f = evaluate(&x, prob);
    if !f.total.is_finite() {
        return Err(Error::NumericalFailure {
            message: format!("objective is {} at the initial point", f.total),
            last_iterate: to_pairs(&x),
        });
    }
    gradient_into(&x, prob, &mut states, &mut g);

    let mut trace = vec![f.total];
    let mut alpha = T::one();
    let mut converged = false;
    let mut iterations = 0;
    let mut trial = vec![VelocityCommand::zero(); n];
    let mut g_new = vec![CommandPartials::default(); n];
    let c1 = T::lit(ARMIJO_C);
    let shrink = T::lit(BACKTRACK);
    let (alpha_lo, alpha_hi) = (T::lit(1e-12), T::lit(1e6));

    while iterations < cfg.max_iters {
        let pg2: T = x
            .iter()
            .zip(&g)
            .map(|(xi, gi)| {
                let p = cfg.project(VelocityCommand::new(xi.v - gi.dv, xi.omega - gi.domega));
                let (dv, dw) = (p.v - xi.v, p.omega - xi.omega);
                dv * dv + dw * dw
            })
            .sum();
        if pg2.sqrt() <= cfg.grad_tol {
            converged = true;
            break;
        }

        let mut step = alpha;
        let mut accepted = None;
        for _ in 0..MAX_HALVINGS {
            let mut slope = T::zero();
            for i in 0..n {
                trial[i] = cfg.project(VelocityCommand::new(
                    x[i].v - step * g[i].dv,
                    x[i].omega - step * g[i].domega,
                ));
                slope = slope + g[i].dv * (trial[i].v - x[i].v) + g[i].domega * (trial[i].omega - x[i].omega);
            }
            let f_trial = evaluate(&trial, prob);
            if !f_trial.total.is_finite() {
                return Err(Error::NumericalFailure {
                    message: format!("objective is {} during line search", f_trial.total),
                    last_iterate: to_pairs(&x),
                });
            }
            if f_trial.total <= f.total + c1 * slope {
                accepted = Some(f_trial);
                break;
            }
            step = step * shrink;
        }
        let Some(f_trial) = accepted else {
            // no decrease representable at this scale
            break;
        };

        gradient_into(&trial, prob, &mut states, &mut g_new);
        let (mut ss, mut sy) = (T::zero(), T::zero());
        for i in 0..n {
            let sv = trial[i].v - x[i].v;
            let sw = trial[i].omega - x[i].omega;
            ss = ss + sv * sv + sw * sw;
            sy = sy + sv * (g_new[i].dv - g[i].dv) + sw * (g_new[i].domega - g[i].domega);
        }
        alpha = if sy > T::zero() {
            (ss / sy).max(alpha_lo).min(alpha_hi)
        } else {
            (step * T::two()).min(alpha_hi)
        };

        std::mem::swap(&mut x, &mut trial);
        std::mem::swap(&mut g, &mut g_new);
        f = f_trial;
        trace.push(f.total);
        iterations += 1;
    }

    Ok(Descent {
        cmds: x,
        cost: f,
        iterations,
        converged,
        trace,
    })
}

/// Multi-start projected gradient descent; the lowest objective wins.
/// `init`, when given, is tried before the default initializations.
pub fn solve<T: Real>(prob: &RetargetProblem<T>, init: Option<&[VelocityCommand<T>]>) -> Result<RetargetSolution<T>> {
    prob.validate()?;
    let mut starts = Vec::new();
    if let Some(z) = init {
        super::check_len(z, prob)?;
        starts.push(z.to_vec());
    }
    starts.extend(initial_guesses(prob));

    let mut best: Option<Descent<T>> = None;
    for start in &starts {
        let d = descend(prob, start)?;
        if best.as_ref().is_none_or(|b| d.cost.total < b.cost.total) {
            best = Some(d);
        }
    }
    let best = best.expect("at least one initialization");
    Ok(RetargetSolution {
        start: prob.start,
        prev_cmd: prob.prev_cmd,
        cmds: best.cmds,
        cost: best.cost,
        iterations: best.iterations,
        converged: best.converged,
    })
}

/// Rolls out `cmds` from `start` and returns the planar RMSE against `desired`.
#[cfg(test)]
pub(crate) fn position_rmse(start: &crate::se2::Pose2<f64>, cmds: &[VelocityCommand<f64>], desired: &[crate::se2::Pose2<f64>], dt: f64) -> f64 {
    let poses = crate::se2::rollout(start, cmds, dt).unwrap();
    let sq: f64 = poses.iter().zip(desired).map(|(p, d)| p.distance(d).powi(2)).sum();
    (sq / desired.len() as f64).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::se2::Pose2;
    use crate::retarget::{cost, RetargetConfig};
    use crate::se2::rollout;

    #[test]
    fn stationary_target_returns_zeros() {
        let start = Pose2::new(1.0, 2.0, 0.5);
        let prob = RetargetProblem::new(start, vec![start; 6], RetargetConfig::default());
        let sol = solve(&prob, None).unwrap();
        assert!(sol.cmds.iter().all(|c| *c == VelocityCommand::zero()));
        assert_eq!(sol.cost.total, 0.0);
        assert!(sol.converged);
    }

    #[test]
    fn recovers_smooth_feasible_commands() {
        let z: Vec<_> = (0..12)
            .map(|k| VelocityCommand::new(0.05 * k as f64, 0.02 * k as f64))
            .collect();
        let desired = rollout(&Pose2::identity(), &z, 0.16).unwrap();
        let prob = RetargetProblem::new(Pose2::identity(), desired.clone(), RetargetConfig::default());
        let sol = solve(&prob, None).unwrap();
        let rmse = position_rmse(&prob.start, &sol.cmds, &desired, 0.16);
        assert!(rmse <= 1e-2, "{rmse}");
        assert!(sol.cmds.iter().all(|c| prob.config.contains(c)));
    }

    #[test]
    fn trace_is_monotone_and_beats_every_start() {
        let desired = vec![
            Pose2::new(0.1, 0.05, 0.4),
            Pose2::new(-0.2, 0.3, 2.9),
            Pose2::new(0.0, -0.4, -2.5),
        ];
        let prob = RetargetProblem::new(Pose2::identity(), desired, RetargetConfig::default());
        for start in initial_guesses(&prob) {
            let d = descend(&prob, &start).unwrap();
            assert!(d.trace.windows(2).all(|w| w[1] <= w[0]));
        }
        let sol = solve(&prob, None).unwrap();
        for start in initial_guesses(&prob) {
            assert!(sol.cost.total <= cost(&start, &prob).unwrap().total);
        }
        assert_eq!(solve(&prob, None).unwrap(), sol);
    }

    #[test]
    fn bounds_bind_when_target_is_too_far() {
        let desired: Vec<_> = (1..=5).map(|k| Pose2::new(0.5 * k as f64, 0.0, 0.0)).collect();
        let prob = RetargetProblem::new(Pose2::identity(), desired, RetargetConfig::default());
        let sol = solve(&prob, None).unwrap();
        assert!(sol.cmds.iter().all(|c| c.v <= 1.0 && c.v >= -1.0));
        assert!(sol.cmds[2..].iter().all(|c| c.v == 1.0));
    }

    #[test]
    fn explicit_init_is_considered() {
        let z = vec![VelocityCommand::new(0.4, -0.7); 4];
        let desired = rollout(&Pose2::identity(), &z, 0.16).unwrap();
        let cfg = RetargetConfig {
            n_starts: 1,
            max_iters: 0,
            ..Default::default()
        };
        let prob = RetargetProblem::new(Pose2::identity(), desired, cfg);
        let sol = solve(&prob, Some(&z)).unwrap();
        assert_eq!(sol.cmds, z);
    }

    #[test]
    fn f32_solve() {
        let start = Pose2::<f32>::identity();
        let desired: Vec<_> = (1..=4).map(|k| Pose2::new(0.1f32 * k as f32, 0.0, 0.0)).collect();
        let cfg = RetargetConfig::<f32> {
            grad_tol: 1e-3,
            ..Default::default()
        };
        let sol = solve(&RetargetProblem::new(start, desired, cfg), None).unwrap();
        assert!(sol.cmds.iter().all(|c| c.v > 0.3 && c.v < 1.0));
    }
}
