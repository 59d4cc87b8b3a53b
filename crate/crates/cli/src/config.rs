use std::path::Path;

use egonav::chunk::{CHUNK_LEN, MANIP_HORIZON, MANIP_STEP, NAV_HORIZON, NAV_STEP};
use egonav::waypoints::{DEFAULT_D_THRESH, DEFAULT_K_H};
use egonav::{ForwardAxis, PhaseConfig, RetargetConfig};
use serde::{Deserialize, Serialize};

use crate::Failure;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IngestConfig {
    pub d_thresh: f64,
    pub k_h: usize,
    pub forward_axis: ForwardAxis,
}

impl Default for IngestConfig {
    fn default() -> Self {
        Self {
            d_thresh: DEFAULT_D_THRESH,
            k_h: DEFAULT_K_H,
            forward_axis: ForwardAxis::PosX,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ChunkConfig {
    pub nav_horizon: usize,
    pub nav_step: usize,
    pub manip_horizon: usize,
    pub manip_step: usize,
    pub target_len: usize,
}

impl Default for ChunkConfig {
    fn default() -> Self {
        Self {
            nav_horizon: NAV_HORIZON,
            nav_step: NAV_STEP,
            manip_horizon: MANIP_HORIZON,
            manip_step: MANIP_STEP,
            target_len: CHUNK_LEN,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SeedConfig {
    /// Seed for the mixture initialization.
    pub segment: u64,
    /// Seed for the solver's random restarts; overrides `retarget.seed` when set.
    pub retarget: Option<u64>,
}

/// Everything the pipeline reads from `--config`. Every key is optional and
/// defaults to the reference settings; unknown keys are rejected.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub ingest: IngestConfig,
    pub phase: PhaseConfig,
    pub retarget: RetargetConfig<f64>,
    pub chunk: ChunkConfig,
    pub seeds: SeedConfig,
}

impl PipelineConfig {
    pub fn parse(text: &str) -> Result<Self, Failure> {
        let cfg: PipelineConfig = toml::from_str(text).map_err(|e| Failure::input(format!("config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Reads `path`, or returns the defaults when no path is given.
    pub fn load(path: Option<&Path>) -> Result<Self, Failure> {
        match path {
            None => Ok(Self::default()),
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .map_err(|e| Failure::input(format!("cannot read config {}: {e}", p.display())))?;
                Self::parse(&text)
            }
        }
    }

    pub fn validate(&self) -> Result<(), Failure> {
        self.phase.validate()?;
        self.effective_retarget().validate()?;
        let i = &self.ingest;
        if !(i.d_thresh >= 0.0 && i.d_thresh.is_finite()) {
            return Err(Failure::input(format!("ingest.d_thresh must be >= 0, got {}", i.d_thresh)));
        }
        if i.k_h == 0 {
            return Err(Failure::input("ingest.k_h must be at least 1"));
        }
        let c = &self.chunk;
        if c.nav_horizon == 0 || c.nav_step == 0 || c.manip_horizon == 0 || c.manip_step == 0 {
            return Err(Failure::input("chunk horizons and steps must be at least 1"));
        }
        if c.target_len < c.nav_horizon.max(c.manip_horizon) || c.target_len < 2 {
            return Err(Failure::input(format!(
                "chunk.target_len {} is shorter than the horizon",
                c.target_len
            )));
        }
        Ok(())
    }

    /// Applies a command-line seed to every seeded stage.
    pub fn with_seed(mut self, seed: Option<u64>) -> Self {
        if let Some(s) = seed {
            self.seeds.segment = s;
            self.seeds.retarget = Some(s);
        }
        self
    }

    pub fn effective_retarget(&self) -> RetargetConfig<f64> {
        let mut r = self.retarget;
        if let Some(s) = self.seeds.retarget {
            r.seed = s;
        }
        r
    }

    /// `(key, value)` pairs of every effective parameter, in a fixed order.
    pub fn parameters(&self) -> Vec<(String, String)> {
        let r = self.effective_retarget();
        let p = &self.phase;
        let c = &self.chunk;
        let i = &self.ingest;
        let f = |v: f64| format!("{v:?}");
        vec![
            ("ingest.d_thresh".into(), f(i.d_thresh)),
            ("ingest.k_h".into(), i.k_h.to_string()),
            ("ingest.forward_axis".into(), axis_name(i.forward_axis).into()),
            ("phase.tau_ratio".into(), f(p.tau_ratio)),
            ("phase.tau_head".into(), f(p.tau_head)),
            ("phase.tau_duration".into(), p.tau_duration.to_string()),
            ("phase.k_components".into(), p.k_components.to_string()),
            ("phase.tau_pdf".into(), f(p.tau_pdf)),
            ("phase.epsilon".into(), f(p.epsilon)),
            ("retarget.lambda_pos".into(), f(r.lambda_pos)),
            ("retarget.lambda_yaw".into(), f(r.lambda_yaw)),
            ("retarget.lambda_smooth".into(), f(r.lambda_smooth)),
            ("retarget.v_min".into(), f(r.v_min)),
            ("retarget.v_max".into(), f(r.v_max)),
            ("retarget.omega_min".into(), f(r.omega_min)),
            ("retarget.omega_max".into(), f(r.omega_max)),
            ("retarget.dt".into(), f(r.dt)),
            ("retarget.max_iters".into(), r.max_iters.to_string()),
            ("retarget.grad_tol".into(), f(r.grad_tol)),
            ("retarget.n_starts".into(), r.n_starts.to_string()),
            ("retarget.window".into(), r.window.to_string()),
            ("retarget.seed".into(), r.seed.to_string()),
            ("chunk.nav_horizon".into(), c.nav_horizon.to_string()),
            ("chunk.nav_step".into(), c.nav_step.to_string()),
            ("chunk.manip_horizon".into(), c.manip_horizon.to_string()),
            ("chunk.manip_step".into(), c.manip_step.to_string()),
            ("chunk.target_len".into(), c.target_len.to_string()),
            ("seeds.segment".into(), self.seeds.segment.to_string()),
        ]
    }
}

fn axis_name(a: ForwardAxis) -> &'static str {
    match a {
        ForwardAxis::PosX => "+x",
        ForwardAxis::NegX => "-x",
        ForwardAxis::PosY => "+y",
        ForwardAxis::NegY => "-y",
        ForwardAxis::PosZ => "+z",
        ForwardAxis::NegZ => "-z",
    }
}
