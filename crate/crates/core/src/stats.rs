//! Monte Carlo summaries: means with standard errors, batch-means errors for
//! nonlinear statistics, total variation against exact laws and chi-square
//! uniformity tests.

use crate::numeric::csum;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};
use std::collections::BTreeMap;

/// Number of contiguous batches used for batch-means standard errors.
pub const DEFAULT_BATCHES: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub mean: f64,
    pub se: f64,
}

impl Estimate {
    /// Sample mean and its standard error (n - 1 denominator).
    pub fn from_values(xs: &[f64]) -> Self {
        let n = xs.len();
        if n == 0 {
            return Self { mean: f64::NAN, se: f64::NAN };
        }
        let mean = csum(xs.iter().copied()) / n as f64;
        if n == 1 {
            return Self { mean, se: f64::NAN };
        }
        let ss = csum(xs.iter().map(|x| (x - mean) * (x - mean)));
        Self {
            mean,
            se: (ss / (n - 1) as f64 / n as f64).sqrt(),
        }
    }

    /// `true` when `target` lies within `k` standard errors of the mean.
    pub fn covers(&self, target: f64, k: f64) -> bool {
        (self.mean - target).abs() <= k * self.se
    }
}

/// Standard error of a statistic by batch means: the sample is cut into
/// `batches` contiguous blocks, the statistic is evaluated on each, and the
/// spread of the block values is scaled to the full sample size.
pub fn batch_se<F>(values: &[f64], batches: usize, stat: F) -> f64
where
    F: Fn(&[f64]) -> f64,
{
    let batches = batches.max(2);
    if values.len() < 2 * batches {
        return f64::NAN;
    }
    let size = values.len() / batches;
    let per_batch: Vec<f64> = (0..batches)
        .map(|b| stat(&values[b * size..(b + 1) * size]))
        .collect();
    // Spread of size-`size` statistics, rescaled by sqrt(size / n) to the
    // full sample: sd_batch * sqrt(size/n) = sd_batch / sqrt(batches).
    let est = Estimate::from_values(&per_batch);
    est.se
}

/// Empirical frequencies of integer observations.
pub fn frequencies<I: IntoIterator<Item = u64>>(obs: I) -> (BTreeMap<u64, u64>, u64) {
    let mut counts = BTreeMap::new();
    let mut total = 0;
    for x in obs {
        *counts.entry(x).or_insert(0) += 1;
        total += 1;
    }
    (counts, total)
}

/// Total variation distance between empirical counts and an exact law given
/// as `(value, probability)` pairs.
pub fn total_variation(counts: &BTreeMap<u64, u64>, total: u64, exact: &[(u64, f64)]) -> f64 {
    let mut diff: BTreeMap<u64, f64> = BTreeMap::new();
    for (&k, &c) in counts {
        *diff.entry(k).or_insert(0.0) += c as f64 / total as f64;
    }
    for &(k, p) in exact {
        *diff.entry(k).or_insert(0.0) -= p;
    }
    0.5 * csum(diff.values().map(|d| d.abs()))
}

/// Chi-square statistic for uniformity of `rs` over `{1, ..., s}`.
///
/// When `s` is large relative to the number of observations, neighbouring
/// values are merged into bins with at least five expected hits each.
/// Returns `(statistic, degrees of freedom)`.
pub fn uniformity_chi_square(rs: &[u64], s: u64) -> (f64, u64) {
    let hits = rs.len() as u64;
    let bins = s.min((hits / 5).max(2)).max(1);
    if bins < 2 {
        return (0.0, 0);
    }
    let mut observed = vec![0u64; bins as usize];
    for &r in rs {
        let b = ((r - 1) * bins / s) as usize;
        observed[b] += 1;
    }
    let mut stat = 0.0;
    for (b, &o) in observed.iter().enumerate() {
        let b = b as u64;
        // values r-1 in [ceil(b s / bins), ceil((b+1) s / bins))
        let lo = (b * s).div_ceil(bins);
        let hi = ((b + 1) * s).div_ceil(bins);
        let expected = hits as f64 * (hi - lo) as f64 / s as f64;
        stat += (o as f64 - expected).powi(2) / expected;
    }
    (stat, bins - 1)
}

/// Upper-tail p-value of a chi-square statistic.
pub fn chi_square_p_value(stat: f64, dof: u64) -> f64 {
    if dof == 0 {
        return 1.0;
    }
    match ChiSquared::new(dof as f64) {
        Ok(d) => d.sf(stat),
        Err(_) => f64::NAN,
    }
}
