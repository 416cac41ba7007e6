//! Monte Carlo estimators built on the samplers.

use super::pgf::{survival_probabilities, yaglom_lambda};
use super::spine::{CouplingDraw, SpineSampler};
use super::evolve;
use crate::dist_core::DiscretePmf;
use crate::error::{domain, Error, Result};
use crate::metrics::EmpiricalSample;
use crate::rng::{try_replicate, StreamKey};
use crate::stats::Estimate;
use serde::{Deserialize, Serialize};

/// Rejection sampling of `Z_n | Z_n > 0` is refused below this survival
/// probability.
pub const DEFAULT_SURVIVAL_FLOOR: f64 = 1e-4;

/// Mean coupling gap with its standard error and the empirical tail
/// `beta -> P[|W - W^e| > beta]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapEstimate {
    pub reps: usize,
    pub mean: f64,
    pub se: f64,
    pub tail_curve: Vec<(f64, f64)>,
}

impl GapEstimate {
    pub fn from_draws(draws: &[CouplingDraw], betas: &[f64]) -> Self {
        let gaps: Vec<f64> = draws.iter().map(|d| d.gap).collect();
        let est = Estimate::from_values(&gaps);
        let mut sorted = gaps;
        sorted.sort_by(f64::total_cmp);
        let n = sorted.len() as f64;
        let tail_curve = betas
            .iter()
            .map(|&b| {
                let above = sorted.len() - sorted.partition_point(|&g| g <= b);
                (b, above as f64 / n)
            })
            .collect();
        Self {
            reps: draws.len(),
            mean: est.mean,
            se: est.se,
            tail_curve,
        }
    }
}

/// Forty log-spaced thresholds from `1e-4` up to `top`.
pub fn default_beta_grid(top: f64) -> Vec<f64> {
    let top = if top > 1e-4 { top } else { 1.0 };
    let (lo, hi) = (1e-4f64.ln(), top.ln());
    (0..40)
        .map(|i| (lo + (hi - lo) * i as f64 / 39.0).exp())
        .collect()
}

/// `reps` independent coupled pairs, replicate `i` on substream `i`.
pub fn coupling_draws(
    law: &DiscretePmf,
    n: u32,
    reps: usize,
    key: StreamKey,
) -> Result<Vec<CouplingDraw>> {
    let sampler = SpineSampler::new(law, n)?;
    sampler.lambda()?;
    try_replicate(key, reps, |_, rng| sampler.coupling(rng))
}

pub fn coupling_gap_estimate(
    law: &DiscretePmf,
    n: u32,
    reps: usize,
    key: StreamKey,
) -> Result<GapEstimate> {
    if reps < 2 {
        return Err(domain("coupling_gap_estimate", "requires reps >= 2"));
    }
    let draws = coupling_draws(law, n, reps, key)?;
    let top = draws.iter().map(|d| d.gap).fold(0.0, f64::max);
    Ok(GapEstimate::from_draws(&draws, &default_beta_grid(top)))
}

/// `reps` draws of `lambda Z_n` given `Z_n > 0`, by simulating and
/// discarding extinct runs.
pub fn conditional_zn_sample(
    law: &DiscretePmf,
    n: u32,
    reps: usize,
    key: StreamKey,
    floor: f64,
) -> Result<EmpiricalSample> {
    EmpiricalSample::new(conditional_zn_values(law, n, reps, key, floor)?)
}

/// As [`conditional_zn_sample`], but unsorted: draw `i` comes from
/// substream `i`.
pub fn conditional_zn_values(
    law: &DiscretePmf,
    n: u32,
    reps: usize,
    key: StreamKey,
    floor: f64,
) -> Result<Vec<f64>> {
    let survival = *survival_probabilities(law, n).last().expect("nonempty");
    if survival < floor {
        return Err(Error::SurvivalBelowFloor { survival, floor, n });
    }
    let lambda = yaglom_lambda(law, n)?;
    // misses this budget with probability about e^-50
    let budget = (50.0 / survival).ceil() as u64;
    try_replicate(key, reps, |_, rng| {
        for _ in 0..budget {
            let z = evolve(law, 1, n, rng)?;
            if z > 0 {
                return Ok(lambda * z as f64);
            }
        }
        Err(Error::ConditionalDrawFailed {
            level: n,
            attempts: budget,
        })
    })
}
