//! Per-source Z-score statistics.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::recording::Source;
use crate::scalar::Real;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormStats<T> {
    pub mean: Vec<T>,
    pub std: Vec<T>,
    pub source: Source,
    /// Dimensions whose sample variance was zero; their `std` is clamped to 1.
    pub degenerate: Vec<bool>,
}

/// Fits per-dimension mean and population standard deviation.
pub fn fit_norm<T: Real>(values: &[Vec<T>], source: Source) -> Result<NormStats<T>> {
    let first = values
        .first()
        .ok_or_else(|| Error::invalid("cannot fit normalization statistics on no values"))?;
    let dim = first.len();
    if values.iter().any(|v| v.len() != dim) {
        return Err(Error::invalid("all vectors must share one dimension"));
    }
    let n = T::lit(values.len() as f64);
    let mean: Vec<T> = (0..dim)
        .map(|d| values.iter().map(|v| v[d]).sum::<T>() / n)
        .collect();
    let mut std = Vec::with_capacity(dim);
    let mut degenerate = Vec::with_capacity(dim);
    for d in 0..dim {
        let var = values
            .iter()
            .map(|v| (v[d] - mean[d]) * (v[d] - mean[d]))
            .sum::<T>()
            / n;
        let s = var.sqrt();
        if s > T::zero() && s.is_finite() {
            std.push(s);
            degenerate.push(false);
        } else {
            std.push(T::one());
            degenerate.push(true);
        }
    }
    Ok(NormStats {
        mean,
        std,
        source,
        degenerate,
    })
}

pub fn normalize<T: Real>(x: &[T], stats: &NormStats<T>) -> Vec<T> {
    x.iter()
        .zip(stats.mean.iter().zip(&stats.std))
        .map(|(&v, (&m, &s))| (v - m) / s)
        .collect()
}

pub fn denormalize<T: Real>(x: &[T], stats: &NormStats<T>) -> Vec<T> {
    x.iter()
        .zip(stats.mean.iter().zip(&stats.std))
        .map(|(&v, (&m, &s))| v * s + m)
        .collect()
}
