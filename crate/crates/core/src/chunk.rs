//! Action chunks: egocentric future waypoints sampled from an episode,
//! stretched to a fixed length and modulated by the current phase.

use std::io::Write;

use crate::error::{Error, Result};
use crate::phase::{PhaseLabel, PhaseTrack};
use crate::recording::Episode;
use crate::scalar::Real;
use crate::se2::{interpolate, to_frame, ForwardAxis, Pose2};

pub const NAV_HORIZON: usize = 10;
pub const NAV_STEP: usize = 8;
pub const MANIP_HORIZON: usize = 10;
pub const MANIP_STEP: usize = 4;
pub const CHUNK_LEN: usize = 100;

#[derive(Debug, Clone, PartialEq)]
pub struct ActionChunk<T> {
    pub waypoints: Vec<Pose2<T>>,
    pub phases: Vec<PhaseLabel>,
    pub horizon: usize,
    pub step: usize,
}

impl<T: Real> ActionChunk<T> {
    pub fn len(&self) -> usize {
        self.waypoints.len()
    }

    pub fn is_empty(&self) -> bool {
        self.waypoints.is_empty()
    }

    fn check(&self) -> Result<()> {
        if self.waypoints.len() != self.phases.len() {
            return Err(Error::invalid(format!(
                "chunk has {} waypoints but {} phases",
                self.waypoints.len(),
                self.phases.len()
            )));
        }
        Ok(())
    }
}

/// Ground poses at frames `t0 + step, …, t0 + horizon·step`, relative to the pose at `t0`.
pub fn subsample(
    ep: &Episode,
    t0: usize,
    horizon: usize,
    step: usize,
    phases: &PhaseTrack,
    axis: ForwardAxis,
) -> Result<ActionChunk<f64>> {
    if horizon == 0 || step == 0 {
        return Err(Error::invalid("horizon and step must be at least 1"));
    }
    if phases.len() != ep.len() {
        return Err(Error::invalid(format!(
            "phase track has {} labels for {} frames",
            phases.len(),
            ep.len()
        )));
    }
    let last = horizon
        .checked_mul(step)
        .and_then(|span| span.checked_add(t0))
        .filter(|&end| end < ep.len())
        .ok_or_else(|| {
            Error::invalid(format!(
                "chunk t0={t0} horizon={horizon} step={step} runs past {} frames",
                ep.len()
            ))
        })?;
    let origin = crate::se2::project_to_ground(&ep.frames[t0].head, axis)?;
    let mut waypoints = Vec::with_capacity(horizon);
    let mut labels = Vec::with_capacity(horizon);
    for frame in (t0 + step..=last).step_by(step) {
        let pose = crate::se2::project_to_ground(&ep.frames[frame].head, axis)?;
        waypoints.push(to_frame(&origin, &pose));
        labels.push(phases.labels[frame]);
    }
    Ok(ActionChunk {
        waypoints,
        phases: labels,
        horizon,
        step,
    })
}

/// Resamples a chunk to `target_len` points on a uniform parameter grid.
///
/// Output `i` sits at source parameter `i·(n−1)/(target_len−1)`; the grid is
/// computed in integers so the first and last outputs are the source
/// endpoints bit for bit. Phases come from the nearest source index.
pub fn upsample<T: Real>(chunk: &ActionChunk<T>, target_len: usize) -> Result<ActionChunk<T>> {
    chunk.check()?;
    let n = chunk.len();
    if n < 2 {
        return Err(Error::invalid("upsampling needs at least two waypoints"));
    }
    if target_len < n {
        return Err(Error::invalid(format!(
            "target length {target_len} is shorter than the chunk ({n})"
        )));
    }
    let denom = target_len - 1;
    let mut waypoints = Vec::with_capacity(target_len);
    let mut phases = Vec::with_capacity(target_len);
    for i in 0..target_len {
        let num = i * (n - 1);
        let (j, rem) = (num / denom, num % denom);
        if rem == 0 {
            waypoints.push(chunk.waypoints[j]);
            phases.push(chunk.phases[j]);
            continue;
        }
        let s = T::lit(rem as f64) / T::lit(denom as f64);
        waypoints.push(interpolate(&chunk.waypoints[j], &chunk.waypoints[j + 1], s));
        let nearest = if 2 * rem >= denom { j + 1 } else { j };
        phases.push(chunk.phases[nearest]);
    }
    Ok(ActionChunk {
        waypoints,
        phases,
        horizon: chunk.horizon,
        step: chunk.step,
    })
}

/// Phase-aware rewrite of a chunk.
///
/// During manipulation the chunk becomes a ramp from the null displacement to
/// the first navigation waypoint, labeled manipulation except for the final
/// point (navigation); without a navigation waypoint it is all zeros. During
/// navigation every manipulation-labeled waypoint is replaced by the latest
/// preceding navigation waypoint, or by zero if there is none. Applying the
/// same modulation twice gives the same chunk.
pub fn modulate<T: Real>(chunk: &ActionChunk<T>, current: PhaseLabel) -> Result<ActionChunk<T>> {
    chunk.check()?;
    let n = chunk.len();
    let zero = Pose2::identity();
    let mut out = chunk.clone();
    match current {
        PhaseLabel::Manipulation => {
            let first_nav = chunk.phases.iter().position(|p| *p == PhaseLabel::Navigation);
            match first_nav {
                None => out.waypoints.iter_mut().for_each(|w| *w = zero),
                Some(f) => {
                    let target = chunk.waypoints[f];
                    for i in 0..n {
                        out.waypoints[i] = if i + 1 == n {
                            target
                        } else {
                            interpolate(&zero, &target, T::lit(i as f64) / T::lit((n - 1) as f64))
                        };
                        out.phases[i] = if i + 1 == n {
                            PhaseLabel::Navigation
                        } else {
                            PhaseLabel::Manipulation
                        };
                    }
                }
            }
        }
        PhaseLabel::Navigation => {
            let mut hold = zero;
            for i in 0..n {
                if chunk.phases[i] == PhaseLabel::Navigation {
                    hold = chunk.waypoints[i];
                } else {
                    out.waypoints[i] = hold;
                }
            }
        }
    }
    Ok(out)
}

/// Writes `index x y theta phase` rows.
pub fn write_chunk<T: Real, W: Write>(chunk: &ActionChunk<T>, mut out: W) -> Result<()> {
    chunk.check()?;
    writeln!(out, "# index x y theta phase")?;
    for (i, (w, p)) in chunk.waypoints.iter().zip(&chunk.phases).enumerate() {
        writeln!(
            out,
            "{i} {:.16e} {:.16e} {:.16e} {}",
            w.x.as_f64(),
            w.y.as_f64(),
            w.theta.as_f64(),
            p.as_u8()
        )?;
    }
    Ok(())
}
