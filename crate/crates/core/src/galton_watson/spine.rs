//! Size-biased spine tree and the `R_n^*` coupling.
//!
//! The spine `v_0, v_1, ..., v_n` is built by giving `v_{j-1}` a size-biased
//! number of children and picking `v_j` uniformly among them. Every sibling
//! of `v_j` founds an independent ordinary Galton-Watson process; for each
//! level we only tally how many generation-`n` particles descend from the
//! siblings to the left (`L_{n,j}`) and to the right (`R_{n,j}`) of `v_j`.
//!
//! With `A_{n,j} = {L_{n,j} = 0}` and `R'_{n,j}` drawn independently from
//! `L(R_{n,j} | L_{n,j} = 0)`,
//! `R_n^* = 1 + sum_j (R_{n,j} 1_{A_{n,j}} + R'_{n,j} 1_{A_{n,j}^c})`
//! has the law of `Z_n` given `Z_n > 0`, while `R_n - U` has the law of
//! `U S_n`, the equilibrium law. Scaling both by `lambda` couples `W` with
//! `W^e`.

use super::{evolve, pgf::yaglom_lambda};
use crate::dist_core::{size_bias, DiscretePmf};
use crate::error::{Error, Result};
use rand::Rng;
use serde::{Deserialize, Serialize};

/// Attempts allowed per level when drawing `R'_{n,j}` by rejection.
pub const DEFAULT_REJECTION_BUDGET: u64 = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpineLevel {
    /// Siblings of `v_j` (`X_j`).
    pub siblings: u64,
    pub left_siblings: u64,
    pub right_siblings: u64,
    /// Generation-`n` descendants of the right siblings.
    pub r_nj: u64,
    /// Generation-`n` descendants of the left siblings.
    pub l_nj: u64,
    /// `L_{n,j} = 0`.
    pub a_nj: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpineDraw {
    pub n: u32,
    /// Particles in generation `n`.
    pub s_n: u64,
    /// Particles weakly to the right of `v_n` (including `v_n`).
    pub r_n: u64,
    /// Particles strictly to the left of `v_n`.
    pub l_n: u64,
    /// Levels `j = 1..=n`, in order.
    pub levels: Vec<SpineLevel>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CouplingDraw {
    /// `lambda R_n^*`.
    pub w: f64,
    /// `lambda (R_n - U)`.
    pub w_e: f64,
    pub gap: f64,
    pub r_n: u64,
    pub r_n_star: u64,
}

/// Spine sampler with the size-biased law and `lambda` precomputed.
#[derive(Debug, Clone)]
pub struct SpineSampler {
    law: DiscretePmf,
    size_biased: DiscretePmf,
    n: u32,
    lambda: Option<f64>,
    budget: u64,
}

impl SpineSampler {
    pub fn new(law: &DiscretePmf, n: u32) -> Result<Self> {
        if n == 0 {
            return Err(crate::error::domain("spine_sample", "requires n >= 1"));
        }
        Ok(Self {
            law: law.clone(),
            size_biased: size_bias(law)?,
            n,
            lambda: yaglom_lambda(law, n).ok(),
            budget: DEFAULT_REJECTION_BUDGET,
        })
    }

    pub fn with_budget(mut self, budget: u64) -> Self {
        self.budget = budget.max(1);
        self
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn lambda(&self) -> Result<f64> {
        self.lambda.ok_or(Error::ExtinctionCertain { n: self.n })
    }

    /// Children of a spine particle, split around the uniformly chosen
    /// spine child: `(left, right)` sibling counts.
    fn sibling_split<R: Rng + ?Sized>(&self, rng: &mut R) -> (u64, u64) {
        let k = self.size_biased.sample(rng);
        let pos = rng.random_range(0..k);
        (pos, k - 1 - pos)
    }

    fn level<R: Rng + ?Sized>(&self, j: u32, rng: &mut R) -> Result<SpineLevel> {
        let (left, right) = self.sibling_split(rng);
        let depth = self.n - j;
        let l_nj = evolve(&self.law, left, depth, rng)?;
        let r_nj = evolve(&self.law, right, depth, rng)?;
        Ok(SpineLevel {
            siblings: left + right,
            left_siblings: left,
            right_siblings: right,
            r_nj,
            l_nj,
            a_nj: l_nj == 0,
        })
    }

    pub fn spine<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<SpineDraw> {
        let levels = (1..=self.n)
            .map(|j| self.level(j, rng))
            .collect::<Result<Vec<_>>>()?;
        let l_n: u64 = levels.iter().map(|l| l.l_nj).sum();
        let r_n = 1 + levels.iter().map(|l| l.r_nj).sum::<u64>();
        Ok(SpineDraw {
            n: self.n,
            s_n: l_n + r_n,
            r_n,
            l_n,
            levels,
        })
    }

    /// A draw of `R'_{n,j}`: fresh sibling configurations for level `j` are
    /// generated until the left siblings leave no descendants in generation
    /// `n`; the right siblings' count of that configuration is returned.
    pub fn conditional_right<R: Rng + ?Sized>(&self, j: u32, rng: &mut R) -> Result<u64> {
        let depth = self.n - j;
        for _ in 0..self.budget {
            let (left, right) = self.sibling_split(rng);
            if evolve(&self.law, left, depth, rng)? == 0 {
                return evolve(&self.law, right, depth, rng);
            }
        }
        Err(Error::ConditionalDrawFailed {
            level: j,
            attempts: self.budget,
        })
    }

    /// `R_n^*` built on top of a given spine draw.
    pub fn r_star<R: Rng + ?Sized>(&self, spine: &SpineDraw, rng: &mut R) -> Result<u64> {
        let mut total = 1u64;
        for (idx, level) in spine.levels.iter().enumerate() {
            total += if level.a_nj {
                level.r_nj
            } else {
                self.conditional_right(idx as u32 + 1, rng)?
            };
        }
        Ok(total)
    }

    pub fn coupling<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<CouplingDraw> {
        let lambda = self.lambda()?;
        let spine = self.spine(rng)?;
        let r_n_star = self.r_star(&spine, rng)?;
        let u: f64 = rng.random();
        let w = lambda * r_n_star as f64;
        let w_e = lambda * (spine.r_n as f64 - u);
        Ok(CouplingDraw {
            w,
            w_e,
            gap: (w - w_e).abs(),
            r_n: spine.r_n,
            r_n_star,
        })
    }
}

/// One spine draw.
pub fn spine_sample<R: Rng + ?Sized>(law: &DiscretePmf, n: u32, rng: &mut R) -> Result<SpineDraw> {
    SpineSampler::new(law, n)?.spine(rng)
}

/// One coupled pair `(W, W^e)` built from a single spine realisation.
pub fn rstar_sample<R: Rng + ?Sized>(
    law: &DiscretePmf,
    n: u32,
    rng: &mut R,
) -> Result<CouplingDraw> {
    SpineSampler::new(law, n)?.coupling(rng)
}
