use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::phase::{PhaseLabel, PhaseTrack};
use crate::recording::{Episode, FrameRecord, HandObservation, Source};
use crate::se2::{Pose2, Pose3, Quaternion};

/// Oscillation frequency of the active hand, Hz.
pub const HAND_FREQUENCY: f64 = 2.0;
pub const HEAD_HEIGHT: f64 = 1.6;

const LEFT_HAND: [f64; 3] = [0.25, 0.2, -0.45];
const RIGHT_HAND: [f64; 3] = [0.25, -0.2, -0.45];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SegmentKind {
    Straight,
    Arc,
    PauseAndManipulate,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SegmentSpec {
    pub kind: SegmentKind,
    /// Seconds.
    pub duration: f64,
    /// m/s; ignored while pausing.
    #[serde(default = "default_speed")]
    pub speed: f64,
    /// rad/s; arcs only.
    #[serde(default)]
    pub turn_rate: f64,
    /// Radius of the hand circle while manipulating, m.
    #[serde(default = "default_amplitude")]
    pub hand_amplitude: f64,
}

fn default_speed() -> f64 {
    1.0
}

fn default_amplitude() -> f64 {
    0.3
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SynthSpec {
    pub segments: Vec<SegmentSpec>,
    #[serde(default = "default_fps")]
    pub fps: f64,
    /// Std of the head jitter while pausing, m.
    #[serde(default)]
    pub noise_std: f64,
    #[serde(default)]
    pub seed: u64,
}

fn default_fps() -> f64 {
    30.0
}

impl SynthSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.fps > 0.0 && self.fps.is_finite()) {
            return Err(Error::invalid(format!("fps must be positive, got {}", self.fps)));
        }
        if !(self.noise_std >= 0.0 && self.noise_std.is_finite()) {
            return Err(Error::invalid(format!(
                "noise_std must be non-negative, got {}",
                self.noise_std
            )));
        }
        if self.segments.is_empty() {
            return Err(Error::invalid("spec has no segments"));
        }
        for (i, s) in self.segments.iter().enumerate() {
            if !(s.duration > 0.0 && s.duration.is_finite()) {
                return Err(Error::invalid(format!(
                    "segment {i}: duration must be positive, got {}",
                    s.duration
                )));
            }
            if (s.duration * self.fps).round() < 1.0 {
                return Err(Error::invalid(format!("segment {i}: shorter than one frame")));
            }
            for (name, v) in [
                ("speed", s.speed),
                ("turn_rate", s.turn_rate),
                ("hand_amplitude", s.hand_amplitude),
            ] {
                if !v.is_finite() {
                    return Err(Error::invalid(format!("segment {i}: {name} must be finite")));
                }
            }
            if s.hand_amplitude < 0.0 {
                return Err(Error::invalid(format!("segment {i}: hand_amplitude must be non-negative")));
            }
        }
        Ok(())
    }
}

impl SynthSpec {
    /// Walk with two manipulation stops: straight, pause, U-turn arc,
    /// straight, pause, straight. Durations and turn rate vary with `seed`
    /// within ranges that keep the walk at least 60 s long and the stops
    /// well apart.
    pub fn two_zone_walk(seed: u64) -> Self {
        use rand::Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_f1c5);
        let mut seg = |kind, lo: f64, hi: f64| SegmentSpec {
            kind,
            duration: rng.random_range(lo..hi),
            speed: 1.0,
            turn_rate: 0.0,
            hand_amplitude: 0.3,
        };
        let mut segments = vec![
            seg(SegmentKind::Straight, 12.0, 14.0),
            seg(SegmentKind::PauseAndManipulate, 9.0, 11.0),
            seg(SegmentKind::Arc, 5.0, 6.0),
            seg(SegmentKind::Straight, 12.0, 14.0),
            seg(SegmentKind::PauseAndManipulate, 9.0, 11.0),
            seg(SegmentKind::Straight, 12.0, 14.0),
        ];
        segments[2].turn_rate = rng.random_range(0.45..0.55);
        SynthSpec {
            segments,
            fps: 30.0,
            noise_std: 0.002,
            seed,
        }
    }
}

/// Pose after driving for `tau` seconds, integrated exactly.
fn advance(p: &Pose2<f64>, speed: f64, turn_rate: f64, tau: f64) -> Pose2<f64> {
    if turn_rate == 0.0 {
        let (s, c) = p.theta.sin_cos();
        return Pose2::new(p.x + speed * tau * c, p.y + speed * tau * s, p.theta);
    }
    let r = speed / turn_rate;
    let th = p.theta + turn_rate * tau;
    Pose2::new(
        p.x + r * (th.sin() - p.theta.sin()),
        p.y - r * (th.cos() - p.theta.cos()),
        th,
    )
}

fn offset(base: &Pose2<f64>, local: [f64; 3]) -> [f64; 3] {
    let (s, c) = base.theta.sin_cos();
    [
        base.x + c * local[0] - s * local[1],
        base.y + s * local[0] + c * local[1],
        HEAD_HEIGHT + local[2],
    ]
}

/// Generates a head/hand recording from piecewise motion segments together
/// with its ground-truth phase labels (pause segments are manipulation).
///
/// The head starts at the origin facing +x. Each segment contributes
/// `round(duration·fps)` frames at `1/fps, 2/fps, …` seconds after the
/// segment start. While pausing, the head position is jittered with
/// `noise_std` and the right hand circles in the forward/vertical plane at
/// [`HAND_FREQUENCY`]; otherwise both hands ride with the head.
pub fn synthesize(spec: &SynthSpec) -> Result<(Episode, PhaseTrack)> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let noise = Normal::new(0.0, spec.noise_std).map_err(|e| Error::invalid(e.to_string()))?;
    let mut frames = Vec::new();
    let mut labels = Vec::new();
    let mut base = Pose2::identity();
    for seg in &spec.segments {
        let n = (seg.duration * spec.fps).round() as usize;
        let pausing = seg.kind == SegmentKind::PauseAndManipulate;
        let turn_rate = if seg.kind == SegmentKind::Arc { seg.turn_rate } else { 0.0 };
        for j in 0..n {
            let index = frames.len();
            let tau = (j + 1) as f64 / spec.fps;
            let (head, right) = if pausing {
                let mut head = base;
                if spec.noise_std > 0.0 {
                    head.x += noise.sample(&mut rng);
                    head.y += noise.sample(&mut rng);
                }
                let phase = 2.0 * std::f64::consts::PI * HAND_FREQUENCY * tau;
                let a = seg.hand_amplitude;
                let local = [
                    RIGHT_HAND[0] + a * phase.cos(),
                    RIGHT_HAND[1],
                    RIGHT_HAND[2] + a * phase.sin(),
                ];
                (head, offset(&base, local))
            } else {
                let head = advance(&base, seg.speed, turn_rate, tau);
                (head, offset(&head, RIGHT_HAND))
            };
            frames.push(FrameRecord {
                t: (index + 1) as f64 / spec.fps,
                head: Pose3::new([head.x, head.y, HEAD_HEIGHT], Quaternion::from_yaw(head.theta))?,
                left_hand: Some(HandObservation {
                    position: offset(if pausing { &base } else { &head }, LEFT_HAND),
                    confidence: 1.0,
                }),
                right_hand: Some(HandObservation {
                    position: right,
                    confidence: 1.0,
                }),
            });
            labels.push(if pausing {
                PhaseLabel::Manipulation
            } else {
                PhaseLabel::Navigation
            });
        }
        if !pausing {
            base = advance(&base, seg.speed, turn_rate, n as f64 / spec.fps);
        }
    }
    Ok((
        Episode {
            frames,
            fps: spec.fps,
            source: Source::Human,
        },
        PhaseTrack { labels },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::recording::{parse_recording, serialize_recording};
    use crate::se2::ForwardAxis;

    fn seg(kind: SegmentKind, duration: f64) -> SegmentSpec {
        SegmentSpec {
            kind,
            duration,
            speed: 1.0,
            turn_rate: 0.0,
            hand_amplitude: 0.3,
        }
    }

    fn spec(segments: Vec<SegmentSpec>, noise_std: f64) -> SynthSpec {
        SynthSpec {
            segments,
            fps: 30.0,
            noise_std,
            seed: 3,
        }
    }

    #[test]
    fn straight_segment() {
        let (ep, truth) = synthesize(&spec(vec![seg(SegmentKind::Straight, 2.0)], 0.0)).unwrap();
        assert_eq!(ep.len(), 60);
        let last = ep.frames.last().unwrap().head.position;
        assert!((last[0] - 2.0).abs() < 1e-12 && last[1].abs() < 1e-12);
        assert!(truth.labels.iter().all(|l| *l == PhaseLabel::Navigation));
    }

    #[test]
    fn arcs_stay_on_circle() {
        let mut arc = seg(SegmentKind::Arc, 5.0);
        arc.speed = 0.8;
        arc.turn_rate = 0.5;
        let (ep, _) = synthesize(&spec(vec![arc], 0.0)).unwrap();
        let r = 0.8 / 0.5;
        for f in &ep.frames {
            let p = f.head.position;
            assert!(((p[0]).hypot(p[1] - r) - r).abs() < 1e-9);
        }
    }

    #[test]
    fn pauses_are_manipulation_and_deterministic() {
        let s = spec(
            vec![
                seg(SegmentKind::Straight, 1.0),
                seg(SegmentKind::PauseAndManipulate, 2.0),
                seg(SegmentKind::Straight, 1.0),
            ],
            0.002,
        );
        let (ep, truth) = synthesize(&s).unwrap();
        assert_eq!(truth.count(PhaseLabel::Manipulation), 60);
        assert_eq!(truth.transitions(), 2);
        assert_eq!(synthesize(&s).unwrap().0, ep);

        let mut buf = Vec::new();
        serialize_recording(&ep, &mut buf).unwrap();
        assert_eq!(parse_recording(buf.as_slice()).unwrap(), ep);
        assert!(ep.base_poses(ForwardAxis::PosX).is_ok());
    }

    #[test]
    fn two_zone_walk_is_long_enough() {
        for seed in 0..5 {
            let spec = SynthSpec::two_zone_walk(seed);
            let total: f64 = spec.segments.iter().map(|s| s.duration).sum();
            assert!(total >= 60.0);
            let (_, truth) = synthesize(&spec).unwrap();
            assert_eq!(truth.transitions(), 4);
        }
    }

    #[test]
    fn rejects_bad_specs() {
        assert!(synthesize(&spec(vec![seg(SegmentKind::Straight, 0.0)], 0.0)).is_err());
        assert!(synthesize(&spec(vec![], 0.0)).is_err());
        let mut s = spec(vec![seg(SegmentKind::Straight, 1.0)], 0.0);
        s.fps = 0.0;
        assert!(synthesize(&s).is_err());
    }
}
