//! Unsupervised manipulation / navigation phase identification.
//!
//! Pipeline: finite-difference head and hand speeds, a candidate mask from
//! the hand-to-head speed ratio with short runs removed, a Gaussian mixture
//! over the planar head positions of the candidate frames, and a density
//! threshold that labels every frame.

pub mod gmm;
pub mod io;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::recording::Episode;

pub use gmm::{gmm_fit, gmm_pdf, responsibilities, GmmFit, GmmModel};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PhaseLabel {
    Manipulation = 0,
    Navigation = 1,
}

impl PhaseLabel {
    pub fn as_u8(self) -> u8 {
        self as u8
    }

    pub fn from_u8(v: u8) -> Option<Self> {
        match v {
            0 => Some(PhaseLabel::Manipulation),
            1 => Some(PhaseLabel::Navigation),
            _ => None,
        }
    }
}

impl Serialize for PhaseLabel {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_u8(self.as_u8())
    }
}

impl<'de> Deserialize<'de> for PhaseLabel {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let v = u8::deserialize(d)?;
        PhaseLabel::from_u8(v)
            .ok_or_else(|| serde::de::Error::custom(format!("phase label must be 0 or 1, got {v}")))
    }
}

/// Per-frame labels aligned with an episode.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PhaseTrack {
    pub labels: Vec<PhaseLabel>,
}

impl PhaseTrack {
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// Number of adjacent frame pairs whose labels differ.
    pub fn transitions(&self) -> usize {
        self.labels.windows(2).filter(|w| w[0] != w[1]).count()
    }

    pub fn count(&self, label: PhaseLabel) -> usize {
        self.labels.iter().filter(|l| **l == label).count()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PhaseConfig {
    /// Hand-to-head speed ratio a candidate frame must exceed.
    pub tau_ratio: f64,
    /// Head speed (m/s) a candidate frame must stay below.
    pub tau_head: f64,
    /// Minimum candidate run length, in frames.
    pub tau_duration: usize,
    pub k_components: usize,
    /// Density at or above which a frame is manipulation.
    pub tau_pdf: f64,
    /// Guard added to the head speed in the ratio denominator (m/s).
    pub epsilon: f64,
}

impl Default for PhaseConfig {
    fn default() -> Self {
        Self {
            tau_ratio: 2.0,
            tau_head: 0.4,
            tau_duration: 30,
            k_components: 2,
            tau_pdf: 1e-3,
            epsilon: 1e-6,
        }
    }
}

impl PhaseConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("tau_ratio", self.tau_ratio),
            ("tau_head", self.tau_head),
            ("tau_pdf", self.tau_pdf),
            ("epsilon", self.epsilon),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::invalid(format!("{name} must be positive, got {v}")));
            }
        }
        if self.tau_duration == 0 {
            return Err(Error::invalid("tau_duration must be at least one frame"));
        }
        if self.k_components == 0 {
            return Err(Error::invalid("k_components must be at least 1"));
        }
        Ok(())
    }
}

/// Head speed from planar displacement and hand speed from 3-D displacement,
/// both `‖Δp‖ / Δt` against the previous frame. Frame 0 copies frame 1. When
/// both hands are tracked the faster one is used; frames without a hand
/// tracked in both this and the previous frame get zero.
pub fn velocities(ep: &Episode) -> Result<(Vec<f64>, Vec<f64>)> {
    let n = ep.len();
    if n < 2 {
        return Err(Error::invalid("speed estimation needs at least two frames"));
    }
    let mut v_head = vec![0.0; n];
    let mut v_hand = vec![0.0; n];
    for i in 1..n {
        let (a, b) = (&ep.frames[i - 1], &ep.frames[i]);
        let dt = b.t - a.t;
        let hp = (b.head.position[0] - a.head.position[0])
            .hypot(b.head.position[1] - a.head.position[1]);
        v_head[i] = hp / dt;

        let pairs = [(a.left_hand, b.left_hand), (a.right_hand, b.right_hand)];
        v_hand[i] = pairs
            .iter()
            .filter_map(|pair| match pair {
                (Some(h0), Some(h1)) => {
                    let d: f64 = (0..3)
                        .map(|k| (h1.position[k] - h0.position[k]).powi(2))
                        .sum::<f64>()
                        .sqrt();
                    Some(d / dt)
                }
                _ => None,
            })
            .fold(0.0, f64::max);
    }
    v_head[0] = v_head[1];
    v_hand[0] = v_hand[1];
    Ok((v_head, v_hand))
}

/// Frames with `v_hand / (v_head + ε) > τ_ratio` and `v_head < τ_head`, with
/// every maximal run shorter than `τ_duration` cleared.
pub fn candidate_mask(v_head: &[f64], v_hand: &[f64], cfg: &PhaseConfig) -> Result<Vec<bool>> {
    if v_head.len() != v_hand.len() {
        return Err(Error::invalid(format!(
            "speed series differ in length ({} vs {})",
            v_head.len(),
            v_hand.len()
        )));
    }
    let mut mask: Vec<bool> = v_head
        .iter()
        .zip(v_hand)
        .map(|(&h, &p)| p / (h + cfg.epsilon) > cfg.tau_ratio && h < cfg.tau_head)
        .collect();

    let mut i = 0;
    while i < mask.len() {
        if !mask[i] {
            i += 1;
            continue;
        }
        let start = i;
        while i < mask.len() && mask[i] {
            i += 1;
        }
        if i - start < cfg.tau_duration {
            mask[start..i].iter_mut().for_each(|m| *m = false);
        }
    }
    Ok(mask)
}

/// Planar head positions of every frame.
pub fn head_points(ep: &Episode) -> Vec<gmm::Point2<f64>> {
    ep.frames
        .iter()
        .map(|f| [f.head.position[0], f.head.position[1]])
        .collect()
}

/// Manipulation iff the mixture density at the planar head position is at
/// least `τ_pdf`.
pub fn classify(ep: &Episode, model: &GmmModel<f64>, cfg: &PhaseConfig) -> PhaseTrack {
    PhaseTrack {
        labels: head_points(ep)
            .iter()
            .map(|p| {
                if gmm_pdf(model, p) >= cfg.tau_pdf {
                    PhaseLabel::Manipulation
                } else {
                    PhaseLabel::Navigation
                }
            })
            .collect(),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Segmentation {
    pub phases: PhaseTrack,
    pub model: GmmModel<f64>,
    pub mask: Vec<bool>,
    pub fit: GmmFit<f64>,
}

/// Full phase identification on a confidence-filtered episode.
pub fn segment(ep: &Episode, cfg: &PhaseConfig, seed: u64) -> Result<Segmentation> {
    cfg.validate()?;
    let (v_head, v_hand) = velocities(ep)?;
    let mask = candidate_mask(&v_head, &v_hand, cfg)?;
    let points: Vec<_> = head_points(ep)
        .into_iter()
        .zip(&mask)
        .filter_map(|(p, &m)| m.then_some(p))
        .collect();
    if points.is_empty() {
        return Err(Error::NoManipulationZones);
    }
    let fit = gmm_fit(&points, cfg.k_components, seed)?;
    let phases = classify(ep, &fit.model, cfg);
    Ok(Segmentation {
        phases,
        model: fit.model.clone(),
        mask,
        fit,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::recording::{FrameRecord, HandObservation, Source};
    use crate::se2::{Pose3, Quaternion};

    fn episode(head_x: impl Fn(usize) -> f64, hand: impl Fn(usize) -> Option<[f64; 3]>, n: usize) -> Episode {
        Episode {
            frames: (0..n)
                .map(|i| FrameRecord {
                    t: i as f64 / 30.0,
                    head: Pose3::new([head_x(i), 0.0, 1.6], Quaternion::identity()).unwrap(),
                    left_hand: None,
                    right_hand: hand(i).map(|p| HandObservation {
                        position: p,
                        confidence: 1.0,
                    }),
                })
                .collect(),
            fps: 30.0,
            source: Source::Human,
        }
    }

    #[test]
    fn head_speed_from_constant_walk() {
        let ep = episode(|i| 0.02 * i as f64, |_| None, 10);
        let (vh, vp) = velocities(&ep).unwrap();
        assert!(vh.iter().all(|v| (v - 0.6).abs() < 1e-9));
        assert!(vp.iter().all(|v| *v == 0.0));

        let still = episode(|_| 1.0, |_| None, 5);
        assert!(velocities(&still).unwrap().0.iter().all(|v| *v == 0.0));
        assert!(velocities(&episode(|_| 0.0, |_| None, 1)).is_err());
    }

    #[test]
    fn hand_speed_uses_faster_hand() {
        let mut ep = episode(|_| 0.0, |i| Some([0.01 * i as f64, 0.0, 1.0]), 3);
        for (i, f) in ep.frames.iter_mut().enumerate() {
            f.left_hand = Some(HandObservation {
                position: [0.0, 0.1 * i as f64, 1.0],
                confidence: 1.0,
            });
        }
        let (_, vp) = velocities(&ep).unwrap();
        assert!((vp[2] - 3.0).abs() < 1e-9);
    }

    #[test]
    fn mask_examples() {
        let cfg = PhaseConfig::default();
        let m = candidate_mask(&[0.1; 40], &[1.0; 40], &cfg).unwrap();
        assert!(m.iter().all(|b| *b));

        let mut vh = vec![1.0; 60];
        let mut vp = vec![0.0; 60];
        for i in 20..30 {
            vh[i] = 0.1;
            vp[i] = 1.0;
        }
        assert!(candidate_mask(&vh, &vp, &cfg).unwrap().iter().all(|b| !*b));

        let m = candidate_mask(&[0.5; 50], &[100.0; 50], &cfg).unwrap();
        assert!(m.iter().all(|b| !*b));

        assert!(candidate_mask(&[0.1; 3], &[1.0; 4], &cfg).is_err());
    }

    #[test]
    fn surviving_runs_meet_duration() {
        let cfg = PhaseConfig::default();
        let mut vh = vec![1.0; 200];
        let vp = vec![1.0; 200];
        for r in [5..20, 40..75, 100..129, 150..180] {
            for i in r {
                vh[i] = 0.1;
            }
        }
        let m = candidate_mask(&vh, &vp, &cfg).unwrap();
        assert_eq!(m.iter().filter(|b| **b).count(), 35 + 30);
        assert!(m[40] && m[74] && !m[100] && m[150]);
    }

    #[test]
    fn classify_near_and_far() {
        let model = GmmModel {
            weights: vec![1.0],
            means: vec![[0.0, 0.0]],
            covariances: vec![[[1e-4, 0.0], [0.0, 1e-4]]],
        };
        let ep = episode(|i| if i == 0 { 0.0 } else { 100.0 }, |_| None, 2);
        let labels = classify(&ep, &model, &PhaseConfig::default()).labels;
        assert_eq!(labels, vec![PhaseLabel::Manipulation, PhaseLabel::Navigation]);
    }

    #[test]
    fn density_equal_to_threshold_is_manipulation() {
        let model = GmmModel {
            weights: vec![1.0],
            means: vec![[0.0, 0.0]],
            covariances: vec![[[1.0, 0.0], [0.0, 1.0]]],
        };
        let ep = episode(|_| 0.0, |_| None, 1);
        let cfg = PhaseConfig {
            tau_pdf: gmm_pdf(&model, &[0.0, 0.0]),
            ..PhaseConfig::default()
        };
        assert_eq!(classify(&ep, &model, &cfg).labels, vec![PhaseLabel::Manipulation]);
    }

    #[test]
    fn handless_episode_has_no_zones() {
        let ep = episode(|i| 0.03 * i as f64, |_| None, 100);
        assert!(matches!(
            segment(&ep, &PhaseConfig::default(), 0),
            Err(Error::NoManipulationZones)
        ));
    }

    #[test]
    fn label_serde_is_numeric() {
        let t = PhaseTrack {
            labels: vec![PhaseLabel::Manipulation, PhaseLabel::Navigation],
        };
        assert_eq!(serde_json::to_string(&t).unwrap(), "[0,1]");
        assert!(serde_json::from_str::<PhaseTrack>("[2]").is_err());
    }
}
