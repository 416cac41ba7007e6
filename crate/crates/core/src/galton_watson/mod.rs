//! Galton-Watson processes: plain simulation, exact generating-function
//! iteration, the size-biased spine tree and the coupling of the
//! conditioned generation size with its equilibrium version.
//!
//! Only population counts are tracked; no tree is ever stored.

mod estimate;
mod pgf;
mod spine;

pub use estimate::{
    conditional_zn_sample, conditional_zn_values, coupling_draws, coupling_gap_estimate, default_beta_grid, GapEstimate,
    DEFAULT_SURVIVAL_FLOOR,
};
pub use pgf::{pgf_iterate, survival_probabilities, yaglom_lambda, zn_pmf, PgfIterate, DEFAULT_FFT_CAP};
pub use spine::{
    rstar_sample, spine_sample, CouplingDraw, SpineDraw, SpineLevel, SpineSampler,
    DEFAULT_REJECTION_BUDGET,
};

use crate::dist_core::DiscretePmf;
use crate::error::{Error, Result};
use rand::Rng;

/// Any population above this aborts the replicate.
pub const POPULATION_CAP: u64 = 1_000_000_000;

/// Generation sizes `Z_0 = 1, Z_1, ..., Z_n`.
pub fn simulate_generations<R: Rng + ?Sized>(
    law: &DiscretePmf,
    n: u32,
    rng: &mut R,
) -> Result<Vec<u64>> {
    let mut sizes = Vec::with_capacity(n as usize + 1);
    let mut z = 1u64;
    sizes.push(z);
    for g in 1..=n {
        z = step(law, z, g, rng)?;
        sizes.push(z);
    }
    Ok(sizes)
}

fn step<R: Rng + ?Sized>(law: &DiscretePmf, z: u64, generation: u32, rng: &mut R) -> Result<u64> {
    if z == 0 {
        return Ok(0);
    }
    let next = law.sample_sum(z, rng);
    if next > POPULATION_CAP {
        return Err(Error::PopulationExplosion {
            population: next,
            cap: POPULATION_CAP,
            generation,
        });
    }
    Ok(next)
}

/// Size after `generations` steps of a process started from `start`
/// particles.
pub fn evolve<R: Rng + ?Sized>(
    law: &DiscretePmf,
    start: u64,
    generations: u32,
    rng: &mut R,
) -> Result<u64> {
    let mut z = start;
    for g in 1..=generations {
        if z == 0 {
            break;
        }
        z = step(law, z, g, rng)?;
    }
    Ok(z)
}
