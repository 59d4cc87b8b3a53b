//! Objective and gradient checked against a naive reimplementation and
//! central finite differences.

use egonav::retarget::{cost, gradient, RetargetConfig, RetargetProblem};
use egonav::{Pose2, VelocityCommand};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

/// Straight transcription of the objective, no shared code with the library.
fn naive_cost(z: &[(f64, f64)], start: (f64, f64, f64), prev: (f64, f64), desired: &[(f64, f64, f64)], cfg: &RetargetConfig<f64>) -> f64 {
    let (mut x, mut y, mut th) = start;
    let mut total = 0.0;
    let mut last = prev;
    for (&(v, w), &(dx, dy, dth)) in z.iter().zip(desired) {
        x += v * th.cos() * cfg.dt;
        y += v * th.sin() * cfg.dt;
        th += w * cfg.dt;
        let mut e = (th - dth) % (2.0 * PI);
        if e > PI {
            e -= 2.0 * PI;
        } else if e <= -PI {
            e += 2.0 * PI;
        }
        total += cfg.lambda_pos * ((x - dx).powi(2) + (y - dy).powi(2));
        total += cfg.lambda_yaw * e * e;
        total += cfg.lambda_smooth * ((v - last.0).powi(2) + (w - last.1).powi(2));
        last = (v, w);
    }
    total
}

struct Case {
    prob: RetargetProblem<f64>,
    z: Vec<VelocityCommand<f64>>,
}

fn random_case(rng: &mut ChaCha8Rng, k: usize) -> Case {
    let cfg = RetargetConfig::default();
    let start = Pose2::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-3.0..3.0));
    let z: Vec<_> = (0..k)
        .map(|_| VelocityCommand::new(rng.random_range(-1.0..1.0), rng.random_range(-PI..PI)))
        .collect();
    let traj = egonav::rollout(&start, &z, cfg.dt).unwrap();
    // desired = perturbed rollout, heading residuals kept well inside (-π, π)
    let desired = traj
        .iter()
        .map(|p| Pose2::new(p.x + rng.random_range(-0.3..0.3), p.y + rng.random_range(-0.3..0.3), p.theta + rng.random_range(-2.0..2.0)))
        .collect();
    let mut prob = RetargetProblem::new(start, desired, cfg);
    prob.prev_cmd = VelocityCommand::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
    Case { prob, z }
}

fn naive(case: &Case, z: &[VelocityCommand<f64>]) -> f64 {
    let p = &case.prob;
    let zz: Vec<_> = z.iter().map(|c| (c.v, c.omega)).collect();
    let d: Vec<_> = p.desired.iter().map(|q| (q.x, q.y, q.theta)).collect();
    naive_cost(&zz, (p.start.x, p.start.y, p.start.theta), (p.prev_cmd.v, p.prev_cmd.omega), &d, &p.config)
}

#[test]
fn library_cost_matches_naive_transcription() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for k in [1, 3, 10, 25] {
        for _ in 0..20 {
            let case = random_case(&mut rng, k);
            let lib = cost(&case.z, &case.prob).unwrap().total;
            let ref_ = naive(&case, &case.z);
            assert!((lib - ref_).abs() <= 1e-10 * ref_.max(1.0), "{lib} vs {ref_}");
        }
    }
}

#[test]
fn analytic_gradient_matches_central_differences() {
    let h = 1e-6;
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for k in [3, 10] {
        for _ in 0..25 {
            let case = random_case(&mut rng, k);
            let g = gradient(&case.z, &case.prob).unwrap();
            for i in 0..k {
                for axis in 0..2 {
                    let mut plus = case.z.clone();
                    let mut minus = case.z.clone();
                    if axis == 0 {
                        plus[i].v += h;
                        minus[i].v -= h;
                    } else {
                        plus[i].omega += h;
                        minus[i].omega -= h;
                    }
                    let fd = (naive(&case, &plus) - naive(&case, &minus)) / (2.0 * h);
                    let a = if axis == 0 { g[i].dv } else { g[i].domega };
                    let rel = (a - fd).abs() / a.abs().max(fd.abs()).max(1.0);
                    assert!(rel <= 1e-5, "k={k} i={i} axis={axis}: {a} vs {fd}");
                }
            }
        }
    }
}

#[test]
fn f32_gradient_agrees_with_f64() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let case = random_case(&mut rng, 6);
    let g64 = gradient(&case.z, &case.prob).unwrap();
    let cfg32 = RetargetConfig::<f32>::default();
    let desired: Vec<_> = case.prob.desired.iter().map(|p| p.cast::<f32>()).collect();
    let mut prob32 = RetargetProblem::new(case.prob.start.cast::<f32>(), desired, cfg32);
    prob32.prev_cmd = VelocityCommand::new(case.prob.prev_cmd.v as f32, case.prob.prev_cmd.omega as f32);
    let z32: Vec<_> = case.z.iter().map(|c| VelocityCommand::new(c.v as f32, c.omega as f32)).collect();
    let g32 = gradient(&z32, &prob32).unwrap();
    for (a, b) in g64.iter().zip(&g32) {
        assert!((a.dv - b.dv as f64).abs() <= 1e-2 * a.dv.abs().max(1.0));
        assert!((a.domega - b.domega as f64).abs() <= 1e-2 * a.domega.abs().max(1.0));
    }
}
