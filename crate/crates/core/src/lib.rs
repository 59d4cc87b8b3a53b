//! Retargeting egocentric human recordings to differential-drive robot
//! navigation commands.
//!
//! The numeric core is generic over [`Real`] (`f32` or `f64`); the aliases
//! at the crate root fix the scalar for the common cases. Recording and
//! segmentation types are `f64` only.

// `!(x > 0)` style checks deliberately reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod chunk;
pub mod error;
pub mod norm;
pub mod phase;
pub mod recording;
pub mod retarget;
pub mod scalar;
pub mod se2;
pub mod sim;
pub mod waypoints;

pub use chunk::{modulate, subsample, upsample, write_chunk};
pub use error::{Error, Result};
pub use norm::{denormalize, fit_norm, normalize};
pub use phase::{segment, PhaseConfig, PhaseLabel, PhaseTrack, Segmentation};
pub use recording::{filter_confidence, parse_recording, serialize_recording, Episode, FrameRecord, Source};
pub use retarget::{brute_force, cost, gradient, retarget_track, solve, RetargetConfig, RetargetProblem};
pub use scalar::Real;
pub use se2::{project_to_ground, rollout, step, to_frame, wrap, wrap_angle, ForwardAxis, Pose2, Pose3, Quaternion, VelocityCommand};
pub use sim::{score_segmentation, simulate, synthesize, SynthSpec};
pub use waypoints::{egocentric_history, extract_waypoints, WaypointTrack};

pub type Pose2F64 = se2::Pose2<f64>;
pub type Pose2F32 = se2::Pose2<f32>;
pub type Pose3F64 = se2::Pose3<f64>;
pub type Pose3F32 = se2::Pose3<f32>;
pub type VelocityCommandF64 = se2::VelocityCommand<f64>;
pub type VelocityCommandF32 = se2::VelocityCommand<f32>;
pub type RetargetConfigF64 = retarget::RetargetConfig<f64>;
pub type RetargetConfigF32 = retarget::RetargetConfig<f32>;
pub type RetargetProblemF64 = retarget::RetargetProblem<f64>;
pub type RetargetProblemF32 = retarget::RetargetProblem<f32>;
pub type RetargetSolutionF64 = retarget::RetargetSolution<f64>;
pub type RetargetSolutionF32 = retarget::RetargetSolution<f32>;
pub type ActionChunkF64 = chunk::ActionChunk<f64>;
pub type ActionChunkF32 = chunk::ActionChunk<f32>;
pub type GmmModelF64 = phase::GmmModel<f64>;
pub type GmmModelF32 = phase::GmmModel<f32>;
pub type SimResultF64 = sim::SimResult<f64>;
pub type SimResultF32 = sim::SimResult<f32>;
pub type NormStatsF64 = norm::NormStats<f64>;
pub type NormStatsF32 = norm::NormStats<f32>;
