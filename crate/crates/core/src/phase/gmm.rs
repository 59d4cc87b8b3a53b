//! Two-dimensional Gaussian mixture fitted by expectation–maximization.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

pub type Point2<T> = [T; 2];
/// Symmetric 2×2 matrix, row major.
pub type Mat2<T> = [[T; 2]; 2];

/// K-component bivariate mixture. Weights lie on the simplex and every
/// covariance is symmetric positive definite.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GmmModel<T> {
    pub weights: Vec<T>,
    pub means: Vec<Point2<T>>,
    pub covariances: Vec<Mat2<T>>,
}

/// EM stopping rule and regularization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EmSettings {
    pub max_iters: usize,
    /// Stop once the log-likelihood improves by less than this.
    pub tol: f64,
    /// Lower bound on every covariance eigenvalue.
    pub cov_floor: f64,
}

impl Default for EmSettings {
    fn default() -> Self {
        Self {
            max_iters: 200,
            tol: 1e-6,
            cov_floor: 1e-6,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GmmFit<T> {
    pub model: GmmModel<T>,
    /// Log-likelihood of the data under each successive model, starting with
    /// the initialization.
    pub log_likelihood: Vec<T>,
    /// Number of M-steps taken.
    pub iterations: usize,
    pub converged: bool,
}

impl<T: Real> GmmModel<T> {
    pub fn components(&self) -> usize {
        self.weights.len()
    }

    pub fn cast<U: Real>(&self) -> GmmModel<U> {
        let c = |v: T| U::lit(v.as_f64());
        GmmModel {
            weights: self.weights.iter().map(|&w| c(w)).collect(),
            means: self.means.iter().map(|m| [c(m[0]), c(m[1])]).collect(),
            covariances: self
                .covariances
                .iter()
                .map(|s| [[c(s[0][0]), c(s[0][1])], [c(s[1][0]), c(s[1][1])]])
                .collect(),
        }
    }

    /// Checks the simplex and SPD invariants.
    pub fn validate(&self) -> Result<()> {
        let k = self.weights.len();
        if k == 0 || self.means.len() != k || self.covariances.len() != k {
            return Err(Error::invalid("mixture component arrays disagree in length"));
        }
        let sum: T = self.weights.iter().copied().sum();
        if (sum - T::one()).abs() > T::lit(1e-9) || self.weights.iter().any(|w| *w < T::zero()) {
            return Err(Error::invalid(format!("mixture weights sum to {sum}")));
        }
        for s in &self.covariances {
            if s[0][1] != s[1][0] || min_eigenvalue(s) <= T::zero() {
                return Err(Error::invalid("covariance is not symmetric positive definite"));
            }
        }
        Ok(())
    }
}

pub fn min_eigenvalue<T: Real>(s: &Mat2<T>) -> T {
    let half_tr = (s[0][0] + s[1][1]) / T::two();
    let half_diff = (s[0][0] - s[1][1]) / T::two();
    half_tr - half_diff.hypot(s[0][1])
}

/// Log of the bivariate normal density.
pub fn log_normal_pdf<T: Real>(p: &Point2<T>, mean: &Point2<T>, cov: &Mat2<T>) -> T {
    let (a, b, c) = (cov[0][0], cov[0][1], cov[1][1]);
    let det = a * c - b * b;
    let dx = p[0] - mean[0];
    let dy = p[1] - mean[1];
    let maha = (dx * dx * c - T::two() * dx * dy * b + dy * dy * a) / det;
    let half = T::lit(0.5);
    -(T::TAU().ln()) - half * det.ln() - half * maha
}

/// Mixture density `Σ_k w_k N(p; μ_k, Σ_k)`.
pub fn gmm_pdf<T: Real>(model: &GmmModel<T>, p: &Point2<T>) -> T {
    model
        .weights
        .iter()
        .zip(model.means.iter().zip(&model.covariances))
        .map(|(&w, (m, s))| w * log_normal_pdf(p, m, s).exp())
        .sum()
}

fn log_sum_exp<T: Real>(xs: &[T]) -> T {
    let max = xs.iter().copied().fold(T::neg_infinity(), T::max);
    if max == T::neg_infinity() {
        return max;
    }
    max + xs.iter().map(|&x| (x - max).exp()).sum::<T>().ln()
}

/// E-step: per-point responsibilities (rows sum to one) and the total log-likelihood.
pub fn responsibilities<T: Real>(model: &GmmModel<T>, points: &[Point2<T>]) -> (Vec<Vec<T>>, T) {
    let k = model.components();
    let mut ll = T::zero();
    let mut out = Vec::with_capacity(points.len());
    let mut logs = vec![T::zero(); k];
    for p in points {
        for (j, l) in logs.iter_mut().enumerate() {
            *l = model.weights[j].ln() + log_normal_pdf(p, &model.means[j], &model.covariances[j]);
        }
        let lse = log_sum_exp(&logs);
        ll = ll + lse;
        out.push(logs.iter().map(|&l| (l - lse).exp()).collect());
    }
    (out, ll)
}

fn sample_covariance<T: Real>(points: &[Point2<T>]) -> Mat2<T> {
    let n = T::lit(points.len() as f64);
    let mx = points.iter().map(|p| p[0]).sum::<T>() / n;
    let my = points.iter().map(|p| p[1]).sum::<T>() / n;
    let mut s = [[T::zero(); 2]; 2];
    for p in points {
        let (dx, dy) = (p[0] - mx, p[1] - my);
        s[0][0] = s[0][0] + dx * dx;
        s[0][1] = s[0][1] + dx * dy;
        s[1][1] = s[1][1] + dy * dy;
    }
    s[0][0] = s[0][0] / n;
    s[0][1] = s[0][1] / n;
    s[1][1] = s[1][1] / n;
    s[1][0] = s[0][1];
    s
}

/// Raises every eigenvalue of `s` below `floor` to `floor`, keeping the
/// eigenvectors. This is the likelihood-maximizing covariance under the
/// constraint, so EM stays monotone.
fn apply_floor<T: Real>(s: Mat2<T>, floor: T) -> Mat2<T> {
    let (a, b, c) = (s[0][0], s[0][1], s[1][1]);
    let half_tr = (a + c) / T::two();
    let r = ((a - c) / T::two()).hypot(b);
    let (hi, lo) = (half_tr + r, half_tr - r);
    if lo >= floor {
        return s;
    }
    if hi <= floor {
        return [[floor, T::zero()], [T::zero(), floor]];
    }
    // unit eigenvector of the small eigenvalue
    let u = [b, lo - a];
    let w = [lo - c, b];
    let v = if u[0] * u[0] + u[1] * u[1] >= w[0] * w[0] + w[1] * w[1] { u } else { w };
    let norm = v[0].hypot(v[1]);
    let v = [v[0] / norm, v[1] / norm];
    let d = floor - lo;
    let off = b + d * v[0] * v[1];
    [[a + d * v[0] * v[0], off], [off, c + d * v[1] * v[1]]]
}

fn dist2<T: Real>(a: &Point2<T>, b: &Point2<T>) -> T {
    let dx = a[0] - b[0];
    let dy = a[1] - b[1];
    dx * dx + dy * dy
}

/// k-means++ seeding: first center uniform, then each next center drawn with
/// probability proportional to squared distance from the nearest chosen one.
fn kmeans_pp<T: Real>(points: &[Point2<T>], k: usize, rng: &mut ChaCha8Rng) -> Vec<Point2<T>> {
    let n = points.len();
    let mut centers = vec![points[rng.random_range(0..n)]];
    let mut d2: Vec<f64> = points.iter().map(|p| dist2(p, &centers[0]).as_f64()).collect();
    while centers.len() < k {
        let total: f64 = d2.iter().sum();
        let idx = if total > 0.0 {
            let target = rng.random::<f64>() * total;
            let mut acc = 0.0;
            d2.iter()
                .position(|&d| {
                    acc += d;
                    acc > target
                })
                .unwrap_or(n - 1)
        } else {
            rng.random_range(0..n)
        };
        let c = points[idx];
        for (d, p) in d2.iter_mut().zip(points) {
            *d = d.min(dist2(p, &c).as_f64());
        }
        centers.push(c);
    }
    centers
}

fn m_step<T: Real>(
    points: &[Point2<T>],
    resp: &[Vec<T>],
    prev: &GmmModel<T>,
    floor: T,
) -> GmmModel<T> {
    let k = prev.components();
    let n = T::lit(points.len() as f64);
    let mut model = prev.clone();
    for j in 0..k {
        let nk: T = resp.iter().map(|r| r[j]).sum();
        model.weights[j] = nk / n;
        if nk <= T::lit(1e-300) {
            // collapsed component: keep its shape, weight goes to ~0
            continue;
        }
        let mx = resp.iter().zip(points).map(|(r, p)| r[j] * p[0]).sum::<T>() / nk;
        let my = resp.iter().zip(points).map(|(r, p)| r[j] * p[1]).sum::<T>() / nk;
        let mut s = [[T::zero(); 2]; 2];
        for (r, p) in resp.iter().zip(points) {
            let (dx, dy) = (p[0] - mx, p[1] - my);
            s[0][0] = s[0][0] + r[j] * dx * dx;
            s[0][1] = s[0][1] + r[j] * dx * dy;
            s[1][1] = s[1][1] + r[j] * dy * dy;
        }
        s[0][0] = s[0][0] / nk;
        s[0][1] = s[0][1] / nk;
        s[1][1] = s[1][1] / nk;
        s[1][0] = s[0][1];
        model.means[j] = [mx, my];
        model.covariances[j] = apply_floor(s, floor);
    }
    // renormalize so rounding never leaves the simplex
    let total: T = model.weights.iter().copied().sum();
    for w in &mut model.weights {
        *w = *w / total;
    }
    model
}

/// Fits a `k`-component mixture with the default [`EmSettings`].
pub fn gmm_fit<T: Real>(points: &[Point2<T>], k: usize, seed: u64) -> Result<GmmFit<T>> {
    gmm_fit_with(points, k, seed, &EmSettings::default())
}

pub fn gmm_fit_with<T: Real>(
    points: &[Point2<T>],
    k: usize,
    seed: u64,
    settings: &EmSettings,
) -> Result<GmmFit<T>> {
    if k == 0 {
        return Err(Error::invalid("mixture needs at least one component"));
    }
    if points.len() < k {
        return Err(Error::invalid(format!(
            "{} points cannot support {k} mixture components",
            points.len()
        )));
    }
    if points.iter().any(|p| !(p[0].is_finite() && p[1].is_finite())) {
        return Err(Error::invalid("mixture input contains non-finite points"));
    }

    let floor = T::lit(settings.cov_floor);
    let tol = T::lit(settings.tol);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let centers = kmeans_pp(points, k, &mut rng);
    let global = apply_floor(sample_covariance(points), floor);
    let mut model = GmmModel {
        weights: vec![T::one() / T::lit(k as f64); k],
        means: centers,
        covariances: vec![global; k],
    };

    let mut history: Vec<T> = Vec::new();
    let mut iterations = 0;
    let mut converged = false;
    loop {
        let (resp, ll) = responsibilities(&model, points);
        if !ll.is_finite() {
            return Err(Error::NumericalFailure {
                message: format!("mixture log-likelihood became {ll}"),
                last_iterate: Vec::new(),
            });
        }
        if let Some(&prev) = history.last() {
            if ll - prev < tol {
                history.push(ll);
                converged = true;
                break;
            }
        }
        history.push(ll);
        if iterations == settings.max_iters {
            break;
        }
        model = m_step(points, &resp, &model, floor);
        iterations += 1;
    }

    Ok(GmmFit {
        model,
        log_likelihood: history,
        iterations,
        converged,
    })
}
