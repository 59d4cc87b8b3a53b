use egonav::chunk::{modulate, upsample, ActionChunk};
use egonav::phase::gmm::{gmm_fit, responsibilities};
use egonav::retarget::{cost, initial_guesses, solve, RetargetConfig, RetargetProblem};
use egonav::se2::{blend_heading, interpolate};
use egonav::{rollout, step, to_frame, wrap_angle, PhaseLabel, Pose2, VelocityCommand};
use proptest::prelude::*;
use std::f64::consts::PI;

fn pose() -> impl Strategy<Value = Pose2<f64>> {
    (-5.0..5.0f64, -5.0..5.0f64, -PI..PI).prop_map(|(x, y, t)| Pose2::new(x, y, t))
}

fn cmd() -> impl Strategy<Value = VelocityCommand<f64>> {
    (-1.0..1.0f64, -PI..PI).prop_map(|(v, w)| VelocityCommand::new(v, w))
}

fn label() -> impl Strategy<Value = PhaseLabel> {
    prop_oneof![Just(PhaseLabel::Manipulation), Just(PhaseLabel::Navigation)]
}

fn chunk(min: usize, max: usize) -> impl Strategy<Value = ActionChunk<f64>> {
    prop::collection::vec((pose(), label()), min..max).prop_map(|v| {
        let (waypoints, phases) = v.into_iter().unzip();
        ActionChunk {
            waypoints,
            phases,
            horizon: 10,
            step: 8,
        }
    })
}

proptest! {
    #[test]
    fn wrap_lands_in_half_open_interval(a in -1e4..1e4f64) {
        let w = wrap_angle(a);
        prop_assert!(w > -PI && w <= PI);
        let turns = (a - w) / (2.0 * PI);
        prop_assert!((turns - turns.round()).abs() < 1e-9);
    }

    #[test]
    fn frame_change_inverts_composition(r in pose(), t in pose()) {
        let local = to_frame(&r, &t);
        let back = r.compose(&local);
        prop_assert!(back.distance(&t) < 1e-9);
        prop_assert!(wrap_angle(back.theta - t.theta).abs() < 1e-9);
    }

    #[test]
    fn rollout_is_iterated_step(start in pose(), z in prop::collection::vec(cmd(), 1..20)) {
        let traj = rollout(&start, &z, 0.16).unwrap();
        prop_assert_eq!(traj.len(), z.len());
        let mut p = start;
        for (c, q) in z.iter().zip(&traj) {
            p = step(&p, c, 0.16);
            prop_assert_eq!(p, *q);
        }
    }

    #[test]
    fn blend_stays_between_close_headings(a in -PI..PI, d in -3.0..3.0f64, s in 0.0..1.0f64) {
        let b = wrap_angle(a + d);
        let m = blend_heading(a, b, s);
        prop_assert!(wrap_angle(m - a).abs() <= d.abs() + 1e-9);
        prop_assert!(wrap_angle(b - m).abs() <= d.abs() + 1e-9);
    }

    #[test]
    fn upsample_keeps_endpoints(c in chunk(2, 12), extra in 0usize..120) {
        let target = c.len() + extra;
        let u = upsample(&c, target).unwrap();
        prop_assert_eq!(u.len(), target);
        prop_assert_eq!(u.phases.len(), target);
        prop_assert_eq!(u.waypoints[0], c.waypoints[0]);
        prop_assert_eq!(u.waypoints[target - 1], *c.waypoints.last().unwrap());
    }

    // Holds once each output step spans at most half a source segment; on
    // coarser grids a step straddling two large same-direction turns can
    // exceed the largest single gap.
    #[test]
    fn upsample_yaw_continuity(c in chunk(2, 12), extra in 0usize..120) {
        let target = 2 * c.len() - 1 + extra;
        let u = upsample(&c, target).unwrap();
        let max_gap = c.waypoints.windows(2).map(|w| wrap_angle(w[1].theta - w[0].theta).abs()).fold(0.0, f64::max);
        for w in u.waypoints.windows(2) {
            prop_assert!(wrap_angle(w[1].theta - w[0].theta).abs() <= max_gap + 1e-9);
        }
    }

    #[test]
    fn upsample_is_monotone_on_collinear_input(xs in prop::collection::vec(0.0..1.0f64, 2..10), target in 10usize..200) {
        let mut acc = 0.0;
        let waypoints: Vec<_> = xs.iter().map(|d| { acc += d; Pose2::new(acc, 0.5 * acc, 0.4) }).collect();
        let n = waypoints.len();
        let c = ActionChunk { waypoints, phases: vec![PhaseLabel::Navigation; n], horizon: n, step: 8 };
        let u = upsample(&c, target.max(n)).unwrap();
        for w in u.waypoints.windows(2) {
            prop_assert!(w[1].x >= w[0].x && w[1].y >= w[0].y);
        }
    }

    #[test]
    fn modulation_is_idempotent(c in chunk(1, 40), nav in any::<bool>()) {
        let p = if nav { PhaseLabel::Navigation } else { PhaseLabel::Manipulation };
        let once = modulate(&c, p).unwrap();
        prop_assert_eq!(modulate(&once, p).unwrap(), once.clone());
        if !nav {
            let norms: Vec<f64> = once.waypoints.iter().map(|w| w.norm()).collect();
            prop_assert!(norms.windows(2).all(|w| w[1] >= w[0] - 1e-12));
        }
    }

    #[test]
    fn interpolation_hits_endpoints(a in pose(), b in pose()) {
        prop_assert_eq!(interpolate(&a, &b, 0.0), a);
        prop_assert_eq!(interpolate(&a, &b, 1.0), b);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn solve_respects_bounds_and_beats_starts(start in pose(), desired in prop::collection::vec(pose(), 1..6)) {
        let desired: Vec<_> = desired.iter().map(|d| Pose2::new(start.x + 0.2 * d.x, start.y + 0.2 * d.y, d.theta)).collect();
        let prob = RetargetProblem::new(start, desired, RetargetConfig::default());
        let sol = solve(&prob, None).unwrap();
        prop_assert!(sol.cmds.iter().all(|c| prob.config.contains(c)));
        for z in initial_guesses(&prob) {
            prop_assert!(sol.cost.total <= cost(&z, &prob).unwrap().total + 1e-12);
        }
    }

    #[test]
    fn responsibilities_are_distributions(pts in prop::collection::vec((-3.0..3.0f64, -3.0..3.0f64), 6..60), seed in 0u64..1000) {
        let pts: Vec<[f64; 2]> = pts.into_iter().map(|(x, y)| [x, y]).collect();
        let fit = gmm_fit(&pts, 2, seed).unwrap();
        let (r, _) = responsibilities(&fit.model, &pts);
        for row in &r {
            let s: f64 = row.iter().sum();
            prop_assert!((s - 1.0).abs() <= 1e-9);
        }
        for w in fit.log_likelihood.windows(2) {
            prop_assert!(w[1] - w[0] >= -1e-9, "{:?}", fit.log_likelihood);
        }
    }
}
