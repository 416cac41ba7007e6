//! Exact equilibrium law for `W = lambda sum_i X_i` with arbitrarily
//! dependent `X_i >= 0` given by a finite joint table.
//!
//! With `P[I = i] = lambda E X_i`, `X_i^s` size-biased and `W_i(x)` drawn
//! from the law of `lambda sum_{m<i} X_m` given `X_i = x`, the variable
//! `W_I(X_I^s) + lambda U X_I^s` has the equilibrium law of `W`. The same
//! holds with the suffix sum `sum_{m>i}` in place of the prefix.

use crate::dist_core::PiecewiseLinear;
use crate::error::{Error, Result};
use crate::numeric::{csum, CompensatedSum};
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// Largest `outcomes * n` table enumerated.
pub const ENUMERATION_CAP: usize = 1_000_000;

/// Finite joint law of `(X_1, ..., X_n)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JointLaw {
    n: usize,
    outcomes: Vec<(Vec<f64>, f64)>,
}

impl JointLaw {
    pub fn new(outcomes: Vec<(Vec<f64>, f64)>) -> Result<Self> {
        let n = outcomes
            .first()
            .map(|(x, _)| x.len())
            .ok_or_else(|| Error::InvalidJoint("no outcomes".into()))?;
        if n == 0 || outcomes.iter().any(|(x, _)| x.len() != n) {
            return Err(Error::InvalidJoint("outcome vectors must share a positive length".into()));
        }
        if outcomes
            .iter()
            .any(|(x, p)| !(p.is_finite() && *p >= 0.0) || x.iter().any(|v| !(v.is_finite() && *v >= 0.0)))
        {
            return Err(Error::InvalidJoint("entries and probabilities must be finite and >= 0".into()));
        }
        let total = csum(outcomes.iter().map(|(_, p)| *p));
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidJoint(format!("probabilities sum to {total}")));
        }
        let law = Self { n, outcomes };
        if !(law.total_mean() > 0.0) {
            return Err(Error::InvalidJoint("E sum X_i is zero".into()));
        }
        Ok(law)
    }

    /// Independent coordinates with the given marginals (product table).
    pub fn independent(marginals: &[Vec<(f64, f64)>]) -> Result<Self> {
        let mut table: Vec<(Vec<f64>, f64)> = vec![(Vec::new(), 1.0)];
        for marginal in marginals {
            table = table
                .into_iter()
                .flat_map(|(x, p)| {
                    marginal.iter().map(move |&(v, q)| {
                        let mut y = x.clone();
                        y.push(v);
                        (y, p * q)
                    })
                })
                .collect();
            if table.len() > ENUMERATION_CAP {
                return Err(Error::CapExceeded("product table".into()));
            }
        }
        Self::new(table)
    }

    /// Random table with `n` coordinates and `outcomes` rows; entries are
    /// small integers or uniform reals, some of them zero.
    pub fn random<R: Rng + ?Sized>(rng: &mut R, n: usize, outcomes: usize) -> Self {
        loop {
            let mut rows: Vec<(Vec<f64>, f64)> = (0..outcomes.max(1))
                .map(|_| {
                    let x = (0..n.max(1))
                        .map(|_| match rng.random_range(0..3) {
                            0 => 0.0,
                            1 => rng.random_range(1..4) as f64,
                            _ => rng.random_range(0.0..3.0),
                        })
                        .collect();
                    (x, rng.random_range(0.05..1.0))
                })
                .collect();
            let total: f64 = csum(rows.iter().map(|(_, p)| *p));
            for row in &mut rows {
                row.1 /= total;
            }
            if let Ok(law) = Self::new(rows) {
                return law;
            }
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn outcomes(&self) -> &[(Vec<f64>, f64)] {
        &self.outcomes
    }

    pub fn marginal_means(&self) -> Vec<f64> {
        (0..self.n)
            .map(|i| csum(self.outcomes.iter().map(|(x, p)| p * x[i])))
            .collect()
    }

    /// `E sum_i X_i`.
    pub fn total_mean(&self) -> f64 {
        csum(self.outcomes.iter().map(|(x, p)| p * csum(x.iter().copied())))
    }

    pub fn lambda(&self) -> f64 {
        1.0 / self.total_mean()
    }
}

/// Which partial sum conditions the equilibrium draw.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum PrefixDirection {
    /// `sum_{m < i} X_m`.
    #[default]
    Backward,
    /// `sum_{m > i} X_m`.
    Forward,
}

/// Law of `offset + width * U`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MixtureComponent {
    pub weight: f64,
    pub offset: f64,
    pub width: f64,
}

/// Finite mixture of uniform segments.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UniformMixture {
    pub components: Vec<MixtureComponent>,
}

impl UniformMixture {
    pub fn total_weight(&self) -> f64 {
        csum(self.components.iter().map(|c| c.weight))
    }

    pub fn cdf(&self, x: f64) -> f64 {
        csum(self.components.iter().map(|c| {
            let frac = if c.width > 0.0 {
                ((x - c.offset) / c.width).clamp(0.0, 1.0)
            } else if x >= c.offset {
                1.0
            } else {
                0.0
            };
            c.weight * frac
        }))
    }

    /// `E f'(W^e)`.
    pub fn mean_derivative(&self, f: &PiecewiseLinear) -> f64 {
        csum(
            self.components
                .iter()
                .map(|c| c.weight * f.mean_derivative_on(c.offset, c.width)),
        )
    }
}

/// Exact equilibrium mixture for `W = lambda sum_i X_i`.
pub fn thm3_equilibrium_exact(joint: &JointLaw, direction: PrefixDirection) -> Result<UniformMixture> {
    let n = joint.n();
    if joint.outcomes().len().saturating_mul(n) > ENUMERATION_CAP {
        return Err(Error::CapExceeded(format!(
            "{} outcomes x {n} indices exceeds {ENUMERATION_CAP}",
            joint.outcomes().len()
        )));
    }
    let lambda = joint.lambda();
    let means = joint.marginal_means();
    let mut components = Vec::new();
    for i in 0..n {
        if means[i] <= 0.0 {
            continue;
        }
        let p_index = lambda * means[i];
        // group outcomes by the value of X_i
        let mut groups: BTreeMap<u64, (f64, Vec<(f64, f64)>)> = BTreeMap::new();
        for (x, p) in joint.outcomes() {
            if x[i] <= 0.0 || *p <= 0.0 {
                continue;
            }
            let partial = match direction {
                PrefixDirection::Backward => csum(x[..i].iter().copied()),
                PrefixDirection::Forward => csum(x[i + 1..].iter().copied()),
            };
            let entry = groups.entry(x[i].to_bits()).or_insert((0.0, Vec::new()));
            entry.0 += p;
            entry.1.push((lambda * partial, *p));
        }
        for (bits, (p_value, conditional)) in groups {
            let value = f64::from_bits(bits);
            // P[X_i^s = value]
            let p_sb = value * p_value / means[i];
            for (offset, p) in conditional {
                components.push(MixtureComponent {
                    weight: p_index * p_sb * (p / p_value),
                    offset,
                    width: lambda * value,
                });
            }
        }
    }
    Ok(UniformMixture { components })
}

/// `|E f(W) - f(0) - E W * E f'(W^e)|` with `E W = 1`, both sides exact.
pub fn verify_thm3_identity(
    joint: &JointLaw,
    f: &PiecewiseLinear,
    direction: PrefixDirection,
) -> Result<f64> {
    let lambda = joint.lambda();
    let mut lhs = CompensatedSum::new();
    for (x, p) in joint.outcomes() {
        lhs.add(p * f.eval(lambda * csum(x.iter().copied())));
    }
    lhs.add(-f.eval(0.0));
    let mixture = thm3_equilibrium_exact(joint, direction)?;
    Ok((lhs.value() - mixture.mean_derivative(f)).abs())
}
