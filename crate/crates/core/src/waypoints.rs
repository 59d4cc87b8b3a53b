//! Displacement-triggered waypoint history.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::recording::Episode;
use crate::se2::{interpolate, to_frame, ForwardAxis, Pose2};

/// Default displacement threshold in meters.
pub const DEFAULT_D_THRESH: f64 = 0.25;
/// Default number of history waypoints kept for the egocentric view.
pub const DEFAULT_K_H: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Waypoint {
    pub frame: usize,
    pub t: f64,
    pub pose: Pose2<f64>,
}

/// Waypoints in frame order; consecutive planar displacement is at least `d_thresh`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WaypointTrack {
    pub waypoints: Vec<Waypoint>,
    pub d_thresh: f64,
    pub k_h: usize,
}

impl WaypointTrack {
    pub fn poses(&self) -> Vec<Pose2<f64>> {
        self.waypoints.iter().map(|w| w.pose).collect()
    }

    pub fn len(&self) -> usize {
        self.waypoints.len()
    }

    pub fn is_empty(&self) -> bool {
        self.waypoints.is_empty()
    }
}

/// Greedy extraction: the first frame is a waypoint, and a later frame
/// becomes one when its planar distance to the most recent waypoint is at
/// least `d_thresh`.
pub fn extract_waypoints(ep: &Episode, d_thresh: f64, axis: ForwardAxis) -> Result<WaypointTrack> {
    if ep.is_empty() {
        return Err(Error::invalid("cannot extract waypoints from an empty episode"));
    }
    if !(d_thresh >= 0.0) {
        return Err(Error::invalid(format!("d_thresh must be >= 0, got {d_thresh}")));
    }
    let poses = ep.base_poses(axis)?;
    let mut waypoints = vec![Waypoint {
        frame: 0,
        t: ep.frames[0].t,
        pose: poses[0],
    }];
    for (i, pose) in poses.iter().enumerate().skip(1) {
        let last = waypoints.last().unwrap();
        if pose.distance(&last.pose) >= d_thresh {
            waypoints.push(Waypoint {
                frame: i,
                t: ep.frames[i].t,
                pose: *pose,
            });
        }
    }
    Ok(WaypointTrack {
        waypoints,
        d_thresh,
        k_h: DEFAULT_K_H,
    })
}

/// The last `min(k_h, len)` waypoints expressed in the frame of `current`, oldest first.
pub fn egocentric_history(
    track: &WaypointTrack,
    current: &Pose2<f64>,
    k_h: usize,
) -> Result<Vec<Pose2<f64>>> {
    if k_h == 0 {
        return Err(Error::invalid("k_h must be at least 1"));
    }
    let skip = track.len().saturating_sub(k_h);
    Ok(track.waypoints[skip..]
        .iter()
        .map(|w| to_frame(current, &w.pose))
        .collect())
}

/// Samples the waypoint path at `t0 + k·dt` for `k = 0, 1, …` while the
/// sample time stays within the last frame time.
///
/// `poses` and `times` are the dense per-frame ground poses the track was
/// extracted from. Between consecutive waypoints the sample moves along the
/// chord joining them; its progress is the observed pose at that time
/// (linear between frames) projected onto the chord, clamped to `[0, 1]` and
/// never moving backwards. Heading is blended between the two waypoints.
/// After the last waypoint the path holds still.
pub fn resample_in_time(track: &WaypointTrack, poses: &[Pose2<f64>], times: &[f64], dt: f64) -> Result<Vec<Pose2<f64>>> {
    if track.is_empty() {
        return Err(Error::invalid("cannot resample an empty track"));
    }
    if poses.len() != times.len() || poses.is_empty() {
        return Err(Error::invalid(format!(
            "{} poses for {} timestamps",
            poses.len(),
            times.len()
        )));
    }
    if !(dt > 0.0) {
        return Err(Error::invalid(format!("dt must be positive, got {dt}")));
    }
    let wps = &track.waypoints;
    if wps.iter().any(|w| w.frame >= poses.len()) {
        return Err(Error::invalid("waypoint frame outside the pose sequence"));
    }
    let t0 = wps[0].t;
    let t_end = *times.last().unwrap();
    let steps = ((t_end - t0) / dt + 1e-9).floor().max(0.0) as usize;
    let mut out = Vec::with_capacity(steps + 1);
    let (mut seg, mut frame) = (0, 0);
    let mut progress = 0.0;
    for k in 0..=steps {
        let t = t0 + k as f64 * dt;
        while seg + 1 < wps.len() && wps[seg + 1].t <= t {
            seg += 1;
            progress = 0.0;
        }
        if seg + 1 >= wps.len() {
            out.push(wps[seg].pose);
            continue;
        }
        while frame + 1 < times.len() && times[frame + 1] <= t {
            frame += 1;
        }
        let here = if frame + 1 < times.len() {
            let u = ((t - times[frame]) / (times[frame + 1] - times[frame])).clamp(0.0, 1.0);
            let (p, q) = (&poses[frame], &poses[frame + 1]);
            (p.x + u * (q.x - p.x), p.y + u * (q.y - p.y))
        } else {
            (poses[frame].x, poses[frame].y)
        };
        let (a, b) = (&wps[seg].pose, &wps[seg + 1].pose);
        let (cx, cy) = (b.x - a.x, b.y - a.y);
        let len2 = cx * cx + cy * cy;
        let s = if len2 > 0.0 {
            ((here.0 - a.x) * cx + (here.1 - a.y) * cy) / len2
        } else {
            1.0
        };
        progress = s.clamp(progress, 1.0);
        out.push(interpolate(a, b, progress));
    }
    Ok(out)
}
