//! Finite distributions on the nonnegative integers together with their
//! size-biased and equilibrium transforms.
//!
//! For a law `X` with mean `m > 0`:
//!
//! * the size-biased law puts mass `k p_k / m` on `k`;
//! * the equilibrium law has CDF `(1/m) \int_0^x P[X > y] dy` and equals
//!   `U X^s` in distribution, with `U ~ Uniform(0, 1)` independent of `X^s`.

mod laws;
mod piecewise;

pub use laws::{LawSpec, DEFAULT_TAIL_TOLERANCE};
pub use piecewise::PiecewiseLinear;

use crate::error::{Error, Result};
use crate::numeric::{csum, CompensatedSum};
use rand::Rng;
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};

/// Tolerance on the total mass of a pmf.
pub const MASS_TOLERANCE: f64 = 1e-12;

/// Probability mass function with finite support in `{0, 1, 2, ...}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawPmf", into = "RawPmf")]
pub struct DiscretePmf {
    support: Vec<u64>,
    probs: Vec<f64>,
    /// Running CDF at each support point, used for inverse-CDF sampling.
    cdf: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct RawPmf {
    support: Vec<u64>,
    probs: Vec<f64>,
}

impl TryFrom<RawPmf> for DiscretePmf {
    type Error = Error;
    fn try_from(raw: RawPmf) -> Result<Self> {
        DiscretePmf::new(raw.support, raw.probs)
    }
}

impl From<DiscretePmf> for RawPmf {
    fn from(p: DiscretePmf) -> Self {
        RawPmf {
            support: p.support,
            probs: p.probs,
        }
    }
}

impl DiscretePmf {
    /// Validated constructor: strictly increasing support, nonnegative
    /// probabilities summing to one within [`MASS_TOLERANCE`].
    pub fn new(support: Vec<u64>, probs: Vec<f64>) -> Result<Self> {
        if support.is_empty() {
            return Err(Error::InvalidPmf("empty support".into()));
        }
        if support.len() != probs.len() {
            return Err(Error::InvalidPmf(format!(
                "support has {} points but {} probabilities",
                support.len(),
                probs.len()
            )));
        }
        if let Some(w) = support.windows(2).find(|w| w[0] >= w[1]) {
            return Err(Error::InvalidPmf(format!(
                "support not strictly increasing at {} -> {}",
                w[0], w[1]
            )));
        }
        if let Some(p) = probs.iter().find(|p| !(p.is_finite() && **p >= 0.0)) {
            return Err(Error::InvalidPmf(format!("invalid probability {p}")));
        }
        let total = csum(probs.iter().copied());
        if (total - 1.0).abs() > MASS_TOLERANCE {
            return Err(Error::InvalidPmf(format!("probabilities sum to {total}")));
        }
        Ok(Self::from_parts_unchecked(support, probs))
    }

    /// Builds a pmf from unsorted `(value, weight)` pairs, merging duplicates,
    /// dropping zero weights and normalising the total weight to one.
    pub fn from_weights<I: IntoIterator<Item = (u64, f64)>>(pairs: I) -> Result<Self> {
        let mut pairs: Vec<(u64, f64)> = pairs.into_iter().collect();
        if let Some((_, w)) = pairs.iter().find(|(_, w)| !(w.is_finite() && *w >= 0.0)) {
            return Err(Error::InvalidPmf(format!("invalid weight {w}")));
        }
        pairs.sort_by_key(|&(k, _)| k);
        let mut support = Vec::with_capacity(pairs.len());
        let mut weights: Vec<f64> = Vec::with_capacity(pairs.len());
        for (k, w) in pairs {
            if w == 0.0 {
                continue;
            }
            if support.last() == Some(&k) {
                *weights.last_mut().expect("nonempty") += w;
            } else {
                support.push(k);
                weights.push(w);
            }
        }
        let total = csum(weights.iter().copied());
        if support.is_empty() || total <= 0.0 {
            return Err(Error::InvalidPmf("no positive weight".into()));
        }
        let probs = weights.into_iter().map(|w| w / total).collect();
        Ok(Self::from_parts_unchecked(support, probs))
    }

    /// Point mass at `k`.
    pub fn point(k: u64) -> Self {
        Self::from_parts_unchecked(vec![k], vec![1.0])
    }

    fn from_parts_unchecked(support: Vec<u64>, probs: Vec<f64>) -> Self {
        let mut acc = CompensatedSum::new();
        let cdf = probs
            .iter()
            .map(|&p| {
                acc.add(p);
                acc.value()
            })
            .collect();
        Self {
            support,
            probs,
            cdf,
        }
    }

    pub fn support(&self) -> &[u64] {
        &self.support
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn iter(&self) -> impl Iterator<Item = (u64, f64)> + '_ {
        self.support.iter().copied().zip(self.probs.iter().copied())
    }

    pub fn max_support(&self) -> u64 {
        *self.support.last().expect("support is nonempty")
    }

    /// `P[X = k]`.
    pub fn prob(&self, k: u64) -> f64 {
        match self.support.binary_search(&k) {
            Ok(i) => self.probs[i],
            Err(_) => 0.0,
        }
    }

    /// `E X^power`, compensated.
    pub fn raw_moment(&self, power: i32) -> f64 {
        csum(self.iter().map(|(k, p)| p * (k as f64).powi(power)))
    }

    pub fn mean(&self) -> f64 {
        self.raw_moment(1)
    }

    pub fn variance(&self) -> f64 {
        let m = self.mean();
        csum(self.iter().map(|(k, p)| p * (k as f64 - m).powi(2)))
    }

    /// `P[X >= k]`.
    pub fn tail_from(&self, k: u64) -> f64 {
        let i = self.support.partition_point(|&s| s < k);
        csum(self.probs[i..].iter().copied())
    }

    /// Inverse-CDF draw.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> u64 {
        if self.support.len() == 1 {
            return self.support[0];
        }
        let u: f64 = rng.random();
        let i = self.cdf.partition_point(|&c| c <= u);
        self.support[i.min(self.support.len() - 1)]
    }

    /// Sum of `count` independent draws.
    ///
    /// Large counts go through the multinomial vector of atom counts,
    /// drawn as a chain of binomials from the top atom down, so the cost is
    /// linear in the support size rather than in `count`.
    pub fn sample_sum<R: Rng + ?Sized>(&self, count: u64, rng: &mut R) -> u64 {
        if self.support.len() == 1 {
            return self.support[0].saturating_mul(count);
        }
        if count <= 4 * self.support.len() as u64 {
            return (0..count).map(|_| self.sample(rng)).sum();
        }
        let mut remaining = count;
        let mut total = 0u64;
        for i in (1..self.support.len()).rev() {
            if remaining == 0 {
                break;
            }
            // P[atom i | atom <= i]; the prefix sum avoids 1 - cdf cancellation
            let q = (self.probs[i] / self.cdf[i]).clamp(0.0, 1.0);
            let hits = Binomial::new(remaining, q).expect("q in [0, 1]").sample(rng);
            total = total.saturating_add(self.support[i].saturating_mul(hits));
            remaining -= hits;
        }
        total.saturating_add(self.support[0].saturating_mul(remaining))
    }

    /// Distribution of `X` scaled to a real-valued law with `E = 1`: returns
    /// the atoms `(k / m, p_k)`.
    pub fn normalized_atoms(&self) -> Result<Vec<(f64, f64)>> {
        let m = self.mean();
        if m <= 0.0 {
            return Err(Error::ZeroMean);
        }
        Ok(self.iter().map(|(k, p)| (k as f64 / m, p)).collect())
    }
}

/// Moment bundle feeding the branching-process constants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentSummary {
    /// `m = E Z`.
    pub mean_m: f64,
    /// `Var Z`.
    pub var_sigma2: f64,
    /// `E |Z|^3`.
    pub third_gamma: f64,
    /// `P[Z = 1] / P[Z >= 2]`.
    pub alpha: f64,
}

/// Mean, variance, third absolute moment and the ratio `P[Z=1]/P[Z>=2]`.
///
/// Fails with [`Error::AlphaUndefined`] when `P[Z >= 2] = 0`.
pub fn moments(pmf: &DiscretePmf) -> Result<MomentSummary> {
    let at_least_two = pmf.tail_from(2);
    if at_least_two <= 0.0 {
        return Err(Error::AlphaUndefined);
    }
    Ok(MomentSummary {
        mean_m: pmf.mean(),
        var_sigma2: pmf.variance(),
        third_gamma: pmf.raw_moment(3),
        alpha: pmf.prob(1) / at_least_two,
    })
}

/// Size-biased law: mass `k p_k / m` at every `k > 0`.
pub fn size_bias(pmf: &DiscretePmf) -> Result<DiscretePmf> {
    let m = pmf.mean();
    if m <= 0.0 {
        return Err(Error::ZeroMean);
    }
    let (support, weights): (Vec<u64>, Vec<f64>) = pmf
        .iter()
        .filter(|&(k, p)| k > 0 && p > 0.0)
        .map(|(k, p)| (k, k as f64 * p))
        .unzip();
    let total = csum(weights.iter().copied());
    let probs = weights.into_iter().map(|w| w / total).collect();
    Ok(DiscretePmf::from_parts_unchecked(support, probs))
}

/// Equilibrium law represented through its size-biased law: a draw is
/// `U * K` with `K` size-biased and `U` uniform on `(0, 1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct EquilibriumRep {
    sb_pmf: DiscretePmf,
    /// Mean of the base law.
    mean: f64,
    /// `P[X >= s_i]` for each support point of the base law.
    base_support: Vec<u64>,
    base_tails: Vec<f64>,
}

impl EquilibriumRep {
    pub fn new(pmf: &DiscretePmf) -> Result<Self> {
        let sb_pmf = size_bias(pmf)?;
        let mut tails = vec![0.0; pmf.support.len()];
        let mut acc = CompensatedSum::new();
        for i in (0..pmf.support.len()).rev() {
            acc.add(pmf.probs[i]);
            tails[i] = acc.value();
        }
        Ok(Self {
            sb_pmf,
            mean: pmf.mean(),
            base_support: pmf.support.clone(),
            base_tails: tails,
        })
    }

    pub fn size_biased(&self) -> &DiscretePmf {
        &self.sb_pmf
    }

    /// `P[X^e <= x] = (1/m) \int_0^x P[X > y] dy`, evaluated exactly on the
    /// step function `y -> P[X > y]`.
    pub fn cdf(&self, x: f64) -> f64 {
        if x <= 0.0 || x.is_nan() {
            return 0.0;
        }
        let last = *self.base_support.last().expect("nonempty");
        if x >= last as f64 {
            return 1.0;
        }
        let mut integral = CompensatedSum::new();
        let mut lo = 0.0;
        for (&s, &tail) in self.base_support.iter().zip(&self.base_tails) {
            let hi = s as f64;
            if hi <= lo {
                continue;
            }
            // on [lo, hi) the survival function equals P[X >= s]
            if x <= hi {
                integral.add((x - lo) * tail);
                break;
            }
            integral.add((hi - lo) * tail);
            lo = hi;
        }
        (integral.value() / self.mean).clamp(0.0, 1.0)
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let k = self.sb_pmf.sample(rng);
        let u: f64 = rng.random();
        u * k as f64
    }
}

/// Exact CDF of the equilibrium law of `pmf` at `x`.
pub fn equilibrium_cdf(pmf: &DiscretePmf, x: f64) -> Result<f64> {
    Ok(EquilibriumRep::new(pmf)?.cdf(x))
}

/// One draw of `X^e` as `U * X^s`.
pub fn sample_equilibrium<R: Rng + ?Sized>(pmf: &DiscretePmf, rng: &mut R) -> Result<f64> {
    Ok(EquilibriumRep::new(pmf)?.sample(rng))
}

/// `|E f(X) - f(0) - E X * E f'(X^e)|` with both sides computed in closed
/// form. The left side evaluates `f` at the atoms; the right side integrates
/// the piecewise-constant `f'` against the equilibrium CDF.
pub fn check_equilibrium_identity(pmf: &DiscretePmf, f: &PiecewiseLinear) -> Result<f64> {
    let eq = EquilibriumRep::new(pmf)?;
    let lhs = csum(pmf.iter().map(|(k, p)| p * f.eval(k as f64))) - f.eval(0.0);
    let mut expected_slope = CompensatedSum::new();
    for seg in f.segments() {
        let mass = eq.cdf(seg.end) - eq.cdf(seg.start);
        expected_slope.add(seg.slope * mass);
    }
    let rhs = pmf.mean() * expected_slope.value();
    Ok((lhs - rhs).abs())
}

/// Sample from `pmf` (convenience wrapper matching the other free functions).
pub fn sample<R: Rng + ?Sized>(pmf: &DiscretePmf, rng: &mut R) -> u64 {
    pmf.sample(rng)
}
