//! Planar pose algebra and the differential-drive (unicycle) model.
//!
//! Headings are kept in `(-π, π]`. The dynamics are explicit Euler:
//!
//! ```text
//! x' = x + v cos(θ) dt
//! y' = y + v sin(θ) dt
//! θ' = wrap(θ + ω dt)
//! ```
//!
//! The optimizer, the simulator and the test oracles all integrate through
//! [`step`], so they agree bit for bit.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Planar pose `(x, y, θ)` in meters and radians.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Pose2<T> {
    pub x: T,
    pub y: T,
    pub theta: T,
}

impl<T: Real> Pose2<T> {
    /// Builds a pose, wrapping `theta` into `(-π, π]`.
    pub fn new(x: T, y: T, theta: T) -> Self {
        Self {
            x,
            y,
            theta: wrap_angle(theta),
        }
    }

    pub fn identity() -> Self {
        Self {
            x: T::zero(),
            y: T::zero(),
            theta: T::zero(),
        }
    }

    /// Euclidean distance between the planar positions.
    pub fn distance(&self, other: &Self) -> T {
        (self.x - other.x).hypot(self.y - other.y)
    }

    /// Norm of the planar position.
    pub fn norm(&self) -> T {
        self.x.hypot(self.y)
    }

    /// `self ∘ local`: maps a pose expressed in this frame into the parent frame.
    pub fn compose(&self, local: &Self) -> Self {
        let (s, c) = self.theta.sin_cos();
        Self {
            x: self.x + c * local.x - s * local.y,
            y: self.y + s * local.x + c * local.y,
            theta: wrap_angle(self.theta + local.theta),
        }
    }

    pub fn cast<U: Real>(&self) -> Pose2<U> {
        Pose2 {
            x: U::lit(self.x.as_f64()),
            y: U::lit(self.y.as_f64()),
            theta: U::lit(self.theta.as_f64()),
        }
    }
}

/// Differential-drive command: forward speed (m/s) and yaw rate (rad/s).
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct VelocityCommand<T> {
    pub v: T,
    pub omega: T,
}

impl<T: Real> VelocityCommand<T> {
    pub fn new(v: T, omega: T) -> Self {
        Self { v, omega }
    }

    pub fn zero() -> Self {
        Self::new(T::zero(), T::zero())
    }
}

/// Unit quaternion stored as `(w, x, y, z)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Quaternion<T> {
    pub w: T,
    pub x: T,
    pub y: T,
    pub z: T,
}

impl<T: Real> Quaternion<T> {
    pub fn identity() -> Self {
        Self {
            w: T::one(),
            x: T::zero(),
            y: T::zero(),
            z: T::zero(),
        }
    }

    /// Rotation by `angle` about the unit `axis`.
    pub fn from_axis_angle(axis: [T; 3], angle: T) -> Self {
        let half = angle / T::two();
        let (s, c) = half.sin_cos();
        Self {
            w: c,
            x: axis[0] * s,
            y: axis[1] * s,
            z: axis[2] * s,
        }
    }

    /// Pure yaw rotation about +Z.
    pub fn from_yaw(yaw: T) -> Self {
        Self::from_axis_angle([T::zero(), T::zero(), T::one()], yaw)
    }

    pub fn norm(&self) -> T {
        (self.w * self.w + self.x * self.x + self.y * self.y + self.z * self.z).sqrt()
    }

    pub fn normalized(&self) -> Self {
        let n = self.norm();
        Self {
            w: self.w / n,
            x: self.x / n,
            y: self.y / n,
            z: self.z / n,
        }
    }

    /// Rotates `v` by this quaternion.
    pub fn rotate(&self, v: [T; 3]) -> [T; 3] {
        // v' = v + 2w (u × v) + 2 u × (u × v)
        let u = [self.x, self.y, self.z];
        let t = cross(u, v).map(|c| c * T::two());
        let ut = cross(u, t);
        [
            v[0] + self.w * t[0] + ut[0],
            v[1] + self.w * t[1] + ut[1],
            v[2] + self.w * t[2] + ut[2],
        ]
    }
}

fn cross<T: Real>(a: [T; 3], b: [T; 3]) -> [T; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

/// 3-D pose: position in meters and a unit quaternion orientation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Pose3<T> {
    pub position: [T; 3],
    pub orientation: Quaternion<T>,
}

impl<T: Real> Pose3<T> {
    /// Quaternions further than this from unit norm are renormalized on construction.
    pub const NORM_TOLERANCE: f64 = 1e-9;

    /// Builds a pose; the quaternion must be finite and non-zero. It is stored
    /// verbatim when within [`Self::NORM_TOLERANCE`] of unit norm and
    /// renormalized otherwise.
    pub fn new(position: [T; 3], orientation: Quaternion<T>) -> Result<Self> {
        let n = orientation.norm();
        if !n.is_finite() || n <= T::lit(1e-12) {
            return Err(Error::invalid(format!(
                "quaternion norm must be finite and non-zero, got {n}"
            )));
        }
        let orientation = if (n - T::one()).abs() > T::lit(Self::NORM_TOLERANCE) {
            orientation.normalized()
        } else {
            orientation
        };
        Ok(Self {
            position,
            orientation,
        })
    }
}

/// Device axis whose ground projection defines the planar heading.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum ForwardAxis {
    #[default]
    #[serde(rename = "+x")]
    PosX,
    #[serde(rename = "-x")]
    NegX,
    #[serde(rename = "+y")]
    PosY,
    #[serde(rename = "-y")]
    NegY,
    #[serde(rename = "+z")]
    PosZ,
    #[serde(rename = "-z")]
    NegZ,
}

impl ForwardAxis {
    pub fn vector<T: Real>(self) -> [T; 3] {
        let (o, z) = (T::one(), T::zero());
        match self {
            ForwardAxis::PosX => [o, z, z],
            ForwardAxis::NegX => [-o, z, z],
            ForwardAxis::PosY => [z, o, z],
            ForwardAxis::NegY => [z, -o, z],
            ForwardAxis::PosZ => [z, z, o],
            ForwardAxis::NegZ => [z, z, -o],
        }
    }
}

/// Wraps an angle into `(-π, π]`. Non-finite input propagates as NaN.
pub fn wrap_angle<T: Real>(angle: T) -> T {
    let pi = T::PI();
    let two_pi = T::TAU();
    let mut r = angle % two_pi;
    if r > pi {
        r = r - two_pi;
    } else if r <= -pi {
        r = r + two_pi;
    }
    if r <= -pi {
        r = r + two_pi;
    }
    r
}

/// Checked [`wrap_angle`]: rejects non-finite input.
pub fn wrap<T: Real>(angle: T) -> Result<T> {
    if !angle.is_finite() {
        return Err(Error::invalid(format!("cannot wrap non-finite angle {angle}")));
    }
    Ok(wrap_angle(angle))
}

/// One explicit Euler step of the unicycle model.
#[inline]
pub fn step<T: Real>(pose: &Pose2<T>, cmd: &VelocityCommand<T>, dt: T) -> Pose2<T> {
    let (s, c) = pose.theta.sin_cos();
    Pose2 {
        x: pose.x + cmd.v * c * dt,
        y: pose.y + cmd.v * s * dt,
        theta: wrap_angle(pose.theta + cmd.omega * dt),
    }
}

/// Forward-integrates `cmds` from `start`; element `k` is the pose after `k + 1` steps.
pub fn rollout<T: Real>(
    start: &Pose2<T>,
    cmds: &[VelocityCommand<T>],
    dt: T,
) -> Result<Vec<Pose2<T>>> {
    if cmds.is_empty() {
        return Err(Error::invalid("rollout needs at least one command"));
    }
    if !(dt > T::zero()) {
        return Err(Error::invalid(format!("dt must be positive, got {dt}")));
    }
    let mut pose = *start;
    Ok(cmds
        .iter()
        .map(|cmd| {
            pose = step(&pose, cmd, dt);
            pose
        })
        .collect())
}

/// Expresses `target` in the coordinate frame of `reference`.
pub fn to_frame<T: Real>(reference: &Pose2<T>, target: &Pose2<T>) -> Pose2<T> {
    let (s, c) = reference.theta.sin_cos();
    let dx = target.x - reference.x;
    let dy = target.y - reference.y;
    Pose2 {
        x: c * dx + s * dy,
        y: -s * dx + c * dy,
        theta: wrap_angle(target.theta - reference.theta),
    }
}

/// Heading blend used for interpolation:
/// `atan2((1-s) sin a + s sin b, (1-s) cos a + s cos b)`.
///
/// `s = 0` and `s = 1` return the inputs unchanged. When the blended vector
/// vanishes (antipodal headings at the midpoint) the result turns from `a`
/// in the positive direction.
pub fn blend_heading<T: Real>(a: T, b: T, s: T) -> T {
    if s == T::zero() {
        return a;
    }
    if s == T::one() || a == b {
        return b;
    }
    let r = T::one() - s;
    let sy = r * a.sin() + s * b.sin();
    let cx = r * a.cos() + s * b.cos();
    if sy.hypot(cx) < T::lit(1e-12) {
        return wrap_angle(a + s * T::PI());
    }
    wrap_angle(sy.atan2(cx))
}

/// Pose interpolation: linear in position, [`blend_heading`] in yaw.
pub fn interpolate<T: Real>(a: &Pose2<T>, b: &Pose2<T>, s: T) -> Pose2<T> {
    if s == T::zero() {
        return *a;
    }
    if s == T::one() {
        return *b;
    }
    Pose2 {
        x: a.x + s * (b.x - a.x),
        y: a.y + s * (b.y - a.y),
        theta: blend_heading(a.theta, b.theta, s),
    }
}

/// Projects a 3-D head pose onto the ground plane. Heading is the `forward`
/// axis rotated into the world frame, with its vertical component dropped.
pub fn project_to_ground<T: Real>(head: &Pose3<T>, forward: ForwardAxis) -> Result<Pose2<T>> {
    let f = head.orientation.rotate(forward.vector());
    let norm = f[0].hypot(f[1]);
    if !(norm >= T::lit(1e-6)) {
        return Err(Error::DegenerateOrientation {
            norm: norm.as_f64(),
        });
    }
    Ok(Pose2 {
        x: head.position[0],
        y: head.position[1],
        theta: wrap_angle(f[1].atan2(f[0])),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn wrap_examples() {
        assert_eq!(wrap(0.0).unwrap(), 0.0);
        assert!(close(wrap(3.0 * PI / 2.0).unwrap(), -FRAC_PI_2, 1e-15));
        assert_eq!(wrap(-PI).unwrap(), PI);
        assert_eq!(wrap(PI).unwrap(), PI);
        assert!(wrap(f64::NAN).is_err());
        assert!(wrap(f64::INFINITY).is_err());
    }

    #[test]
    fn wrap_works_for_f32() {
        let r = wrap(3.0f32 * std::f32::consts::PI / 2.0).unwrap();
        assert!((r + std::f32::consts::FRAC_PI_2).abs() < 1e-6);
    }

    #[test]
    fn step_examples() {
        let dt = 0.16;
        let p = step(&Pose2::new(0.0, 0.0, 0.0), &VelocityCommand::new(1.0, 0.0), dt);
        assert_eq!(p, Pose2 { x: 0.16, y: 0.0, theta: 0.0 });

        let p = step(&Pose2::new(0.0, 0.0, FRAC_PI_2), &VelocityCommand::new(1.0, 0.0), dt);
        assert!(close(p.x, 0.0, 1e-16) && close(p.y, 0.16, 1e-16));
        assert_eq!(p.theta, FRAC_PI_2);

        let p = step(&Pose2::new(0.0, 0.0, 0.0), &VelocityCommand::new(0.0, PI), dt);
        assert_eq!((p.x, p.y), (0.0, 0.0));
        assert!(close(p.theta, 0.16 * PI, 1e-15));
    }

    #[test]
    fn rollout_examples() {
        let start = Pose2::new(0.0, 0.0, 0.0);
        let cmds = [VelocityCommand::new(1.0, 0.0); 2];
        let poses = rollout(&start, &cmds, 0.16).unwrap();
        assert_eq!(poses.len(), 2);
        assert!(close(poses[0].x, 0.16, 1e-15) && close(poses[1].x, 0.32, 1e-15));

        let zeros = [VelocityCommand::zero(); 5];
        let start = Pose2::new(1.0, -2.0, 0.3);
        assert!(rollout(&start, &zeros, 0.16).unwrap().iter().all(|p| *p == start));

        assert!(rollout::<f64>(&start, &[], 0.16).is_err());
    }

    #[test]
    fn rollout_quarter_turns_match_scalar_recursion() {
        // Hand-iterated recursion of the Euler update for (v, ω) = (1, π/2), dt = 0.16.
        let dt = 0.16;
        let (mut x, mut y, mut th) = (0.0f64, 0.0f64, 0.0f64);
        let mut expected = Vec::new();
        for _ in 0..4 {
            x += th.cos() * dt;
            y += th.sin() * dt;
            th += FRAC_PI_2 * dt;
            expected.push((x, y, th));
        }
        let cmds = [VelocityCommand::new(1.0, FRAC_PI_2); 4];
        let poses = rollout(&Pose2::identity(), &cmds, dt).unwrap();
        for (p, e) in poses.iter().zip(&expected) {
            assert!(close(p.x, e.0, 1e-15) && close(p.y, e.1, 1e-15) && close(p.theta, e.2, 1e-15));
        }
        // 4 × 0.16 × π/2 ≈ 1.005 rad, still inside (-π, π]
        assert!(close(poses[3].theta, 0.32 * PI, 1e-14));
    }

    #[test]
    fn to_frame_examples() {
        let t = Pose2::new(1.0, 2.0, FRAC_PI_4);
        assert_eq!(to_frame(&Pose2::identity(), &t), t);

        let r = to_frame(&Pose2::new(1.0, 0.0, FRAC_PI_2), &Pose2::new(1.0, 1.0, FRAC_PI_2));
        assert!(close(r.x, 1.0, 1e-15) && close(r.y, 0.0, 1e-15) && close(r.theta, 0.0, 1e-15));

        assert_eq!(to_frame(&t, &t), Pose2::identity());
    }

    #[test]
    fn project_to_ground_examples() {
        let head = Pose3::new([1.0, 2.0, 1.7], Quaternion::identity()).unwrap();
        assert_eq!(
            project_to_ground(&head, ForwardAxis::PosX).unwrap(),
            Pose2::new(1.0, 2.0, 0.0)
        );

        // yaw by π/2: q = (cos π/4, 0, 0, sin π/4), +X rotates to +Y
        let head = Pose3::new([0.0; 3], Quaternion::from_yaw(FRAC_PI_2)).unwrap();
        let p = project_to_ground(&head, ForwardAxis::PosX).unwrap();
        assert!(close(p.theta, FRAC_PI_2, 1e-15));

        // pitch by +π/2 about +Y sends +X straight down
        let down = Quaternion::from_axis_angle([0.0, 1.0, 0.0], FRAC_PI_2);
        let head = Pose3::new([0.0; 3], down).unwrap();
        assert!(matches!(
            project_to_ground(&head, ForwardAxis::PosX),
            Err(Error::DegenerateOrientation { .. })
        ));
        // the same orientation still has a well-defined heading for +Y
        let p = project_to_ground(&head, ForwardAxis::PosY).unwrap();
        assert!(close(p.theta, FRAC_PI_2, 1e-15));
    }

    #[test]
    fn blend_heading_midpoint_and_seam() {
        let m = blend_heading(0.0, FRAC_PI_2, 0.5);
        assert!(close(m, FRAC_PI_4, 1e-12));
        // blending across ±π takes the short way round
        let m = blend_heading(PI - 0.1, -PI + 0.1, 0.5);
        assert!(close(m.abs(), PI, 1e-12));
        // antipodal midpoint resolves toward positive rotation
        assert!(close(blend_heading(0.0, PI, 0.5), FRAC_PI_2, 1e-12));
        assert_eq!(blend_heading(0.3, 1.2, 0.0), 0.3);
        assert_eq!(blend_heading(0.3, 1.2, 1.0), 1.2);
    }

    #[test]
    fn pose3_renormalizes_off_unit_quaternions() {
        let q = Quaternion { w: 2.0, x: 0.0, y: 0.0, z: 0.0 };
        let p = Pose3::new([0.0; 3], q).unwrap();
        assert_eq!(p.orientation.w, 1.0);
        let zero = Quaternion { w: 0.0, x: 0.0, y: 0.0, z: 0.0 };
        assert!(Pose3::new([0.0; 3], zero).is_err());
    }
}
