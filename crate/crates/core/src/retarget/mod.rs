//! Retargeting human waypoints to bounded differential-drive commands.
//!
//! For a command sequence `z = [(v_1, ω_1), …, (v_K, ω_K)]` rolled out from
//! `start` with the Euler model of [`crate::se2::step`], the objective is
//!
//! ```text
//! Σ_k  λ_pos ‖p_k(z) − p_k^d‖² + λ_yaw wrap(θ_k(z) − θ_k^d)²
//!    + λ_smooth ((v_k − v_{k−1})² + (ω_k − ω_{k−1})²)
//! ```
//!
//! with `(v_0, ω_0)` the command in force before the window, minimized over
//! the box `[v_min, v_max] × [ω_min, ω_max]`.

mod brute;
pub mod io;
mod solver;
mod track;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::se2::{step, wrap_angle, Pose2, VelocityCommand};

pub use brute::{brute_force, BruteForce};
pub use solver::{descend, initial_guesses, solve, Descent};
pub use track::retarget_track;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RetargetConfig<T> {
    pub lambda_pos: T,
    pub lambda_yaw: T,
    pub lambda_smooth: T,
    pub v_min: T,
    pub v_max: T,
    pub omega_min: T,
    pub omega_max: T,
    /// Integration step in seconds.
    pub dt: T,
    pub max_iters: usize,
    /// Convergence threshold on the projected-gradient norm.
    pub grad_tol: T,
    /// Number of initializations: zeros, waypoint inversion, then seeded random draws.
    pub n_starts: usize,
    /// Commands per optimization window when retargeting a track.
    pub window: usize,
    pub seed: u64,
}

/// Frames between navigation samples.
pub const NAV_STEP_FRAMES: usize = 8;
/// Seconds per robot control frame.
pub const CONTROL_PERIOD: f64 = 0.02;

impl<T: Real> Default for RetargetConfig<T> {
    fn default() -> Self {
        Self {
            lambda_pos: T::lit(32.0),
            lambda_yaw: T::lit(2.0),
            lambda_smooth: T::lit(1.0),
            v_min: T::lit(-1.0),
            v_max: T::lit(1.0),
            omega_min: -T::PI(),
            omega_max: T::PI(),
            dt: T::lit(CONTROL_PERIOD * NAV_STEP_FRAMES as f64),
            max_iters: 500,
            grad_tol: T::lit(1e-6),
            n_starts: 3,
            window: 10,
            seed: 0,
        }
    }
}

impl<T: Real> RetargetConfig<T> {
    pub fn validate(&self) -> Result<()> {
        if !(self.v_min < self.v_max) {
            return Err(Error::invalid(format!(
                "v_min ({}) must be below v_max ({})",
                self.v_min, self.v_max
            )));
        }
        if !(self.omega_min < self.omega_max) {
            return Err(Error::invalid(format!(
                "omega_min ({}) must be below omega_max ({})",
                self.omega_min, self.omega_max
            )));
        }
        if !(self.dt > T::zero()) {
            return Err(Error::invalid(format!("dt must be positive, got {}", self.dt)));
        }
        for (name, l) in [
            ("lambda_pos", self.lambda_pos),
            ("lambda_yaw", self.lambda_yaw),
            ("lambda_smooth", self.lambda_smooth),
        ] {
            if !(l >= T::zero() && l.is_finite()) {
                return Err(Error::invalid(format!("{name} must be >= 0, got {l}")));
            }
        }
        if self.n_starts == 0 {
            return Err(Error::invalid("n_starts must be at least 1"));
        }
        if self.window == 0 {
            return Err(Error::invalid("window must be at least 1"));
        }
        if !(self.grad_tol >= T::zero()) {
            return Err(Error::invalid("grad_tol must be >= 0"));
        }
        Ok(())
    }

    /// Clamps a command into the velocity box.
    pub fn project(&self, cmd: VelocityCommand<T>) -> VelocityCommand<T> {
        VelocityCommand {
            v: cmd.v.max(self.v_min).min(self.v_max),
            omega: cmd.omega.max(self.omega_min).min(self.omega_max),
        }
    }

    pub fn contains(&self, cmd: &VelocityCommand<T>) -> bool {
        cmd.v >= self.v_min && cmd.v <= self.v_max && cmd.omega >= self.omega_min && cmd.omega <= self.omega_max
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(deserialize = "T: Real + Deserialize<'de>"))]
pub struct RetargetProblem<T> {
    pub start: Pose2<T>,
    /// Desired poses after each of the K steps.
    pub desired: Vec<Pose2<T>>,
    pub config: RetargetConfig<T>,
    /// Command in force before the first step.
    pub prev_cmd: VelocityCommand<T>,
}

impl<T: Real> RetargetProblem<T> {
    /// Problem starting at rest. Desired headings are wrapped.
    pub fn new(start: Pose2<T>, desired: Vec<Pose2<T>>, config: RetargetConfig<T>) -> Self {
        Self {
            start,
            desired: desired
                .into_iter()
                .map(|p| Pose2::new(p.x, p.y, p.theta))
                .collect(),
            config,
            prev_cmd: VelocityCommand::zero(),
        }
    }

    pub fn horizon(&self) -> usize {
        self.desired.len()
    }

    pub fn validate(&self) -> Result<()> {
        self.config.validate()?;
        if self.desired.is_empty() {
            return Err(Error::invalid("retargeting needs at least one desired waypoint"));
        }
        Ok(())
    }
}

/// Objective value split into its three terms.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct CostBreakdown<T> {
    pub total: T,
    pub pos: T,
    pub yaw: T,
    pub smooth: T,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RetargetSolution<T> {
    pub start: Pose2<T>,
    pub prev_cmd: VelocityCommand<T>,
    pub cmds: Vec<VelocityCommand<T>>,
    pub cost: CostBreakdown<T>,
    pub iterations: usize,
    pub converged: bool,
}

impl<T: Real> RetargetSolution<T> {
    /// Pose reached after the last command.
    pub fn endpoint(&self, dt: T) -> Pose2<T> {
        self.cmds.iter().fold(self.start, |p, c| step(&p, c, dt))
    }
}

/// Partial derivatives of the objective with respect to one command.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct CommandPartials<T> {
    pub dv: T,
    pub domega: T,
}

fn check_len<T>(z: &[VelocityCommand<T>], prob: &RetargetProblem<T>) -> Result<()> {
    if z.len() != prob.desired.len() {
        return Err(Error::invalid(format!(
            "{} commands for {} desired waypoints",
            z.len(),
            prob.desired.len()
        )));
    }
    if z.is_empty() {
        return Err(Error::invalid("empty command sequence"));
    }
    Ok(())
}

/// Objective terms without length checks.
pub(crate) fn evaluate<T: Real>(z: &[VelocityCommand<T>], prob: &RetargetProblem<T>) -> CostBreakdown<T> {
    let cfg = &prob.config;
    let mut pose = prob.start;
    let mut prev = prob.prev_cmd;
    let (mut pos, mut yaw, mut smooth) = (T::zero(), T::zero(), T::zero());
    for (cmd, want) in z.iter().zip(&prob.desired) {
        pose = step(&pose, cmd, cfg.dt);
        let ex = pose.x - want.x;
        let ey = pose.y - want.y;
        let eth = wrap_angle(pose.theta - want.theta);
        pos = pos + ex * ex + ey * ey;
        yaw = yaw + eth * eth;
        let dv = cmd.v - prev.v;
        let dw = cmd.omega - prev.omega;
        smooth = smooth + dv * dv + dw * dw;
        prev = *cmd;
    }
    let pos = cfg.lambda_pos * pos;
    let yaw = cfg.lambda_yaw * yaw;
    let smooth = cfg.lambda_smooth * smooth;
    CostBreakdown {
        total: pos + yaw + smooth,
        pos,
        yaw,
        smooth,
    }
}

/// Evaluates the objective for `z`.
pub fn cost<T: Real>(z: &[VelocityCommand<T>], prob: &RetargetProblem<T>) -> Result<CostBreakdown<T>> {
    check_len(z, prob)?;
    Ok(evaluate(z, prob))
}

/// Gradient by a backward (adjoint) sweep through the Euler rollout. The
/// heading residual's wrap is differentiated as the identity.
pub(crate) fn gradient_into<T: Real>(
    z: &[VelocityCommand<T>],
    prob: &RetargetProblem<T>,
    states: &mut Vec<Pose2<T>>,
    grad: &mut [CommandPartials<T>],
) {
    let cfg = &prob.config;
    let dt = cfg.dt;
    let k_len = z.len();
    states.clear();
    states.push(prob.start);
    for cmd in z {
        let next = step(states.last().unwrap(), cmd, dt);
        states.push(next);
    }

    let two = T::two();
    let (wp, wy, ws) = (two * cfg.lambda_pos, two * cfg.lambda_yaw, two * cfg.lambda_smooth);
    let (mut ax, mut ay, mut ath) = (T::zero(), T::zero(), T::zero());
    for k in (1..=k_len).rev() {
        let s = &states[k];
        let want = &prob.desired[k - 1];
        ax = ax + wp * (s.x - want.x);
        ay = ay + wp * (s.y - want.y);
        ath = ath + wy * wrap_angle(s.theta - want.theta);

        let (sn, cs) = states[k - 1].theta.sin_cos();
        let v = z[k - 1].v;
        grad[k - 1] = CommandPartials {
            dv: (ax * cs + ay * sn) * dt,
            domega: ath * dt,
        };
        ath = ath + (ay * cs - ax * sn) * v * dt;
    }

    for k in 0..k_len {
        let prev = if k == 0 { prob.prev_cmd } else { z[k - 1] };
        let dv = ws * (z[k].v - prev.v);
        let dw = ws * (z[k].omega - prev.omega);
        grad[k].dv = grad[k].dv + dv;
        grad[k].domega = grad[k].domega + dw;
        if k > 0 {
            grad[k - 1].dv = grad[k - 1].dv - dv;
            grad[k - 1].domega = grad[k - 1].domega - dw;
        }
    }
}

/// Exact gradient of [`cost`] with respect to every command.
pub fn gradient<T: Real>(z: &[VelocityCommand<T>], prob: &RetargetProblem<T>) -> Result<Vec<CommandPartials<T>>> {
    check_len(z, prob)?;
    let mut grad = vec![CommandPartials::default(); z.len()];
    let mut states = Vec::with_capacity(z.len() + 1);
    gradient_into(z, prob, &mut states, &mut grad);
    Ok(grad)
}
