//! Exact Kolmogorov and Wasserstein distances from an empirical law to
//! Exp(1).

use crate::error::{domain, Error, Result};
use crate::numeric::CompensatedSum;
use serde::{Deserialize, Serialize};

/// Constant in `d_K <= 1.74 sqrt(d_W)` for laws compared with Exp(1).
pub const DK_FROM_DW_CONSTANT: f64 = 1.74;

/// Sorted nonnegative observations.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalSample {
    values: Vec<f64>,
}

impl EmpiricalSample {
    pub fn new(mut values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidSample("no observations".into()));
        }
        if let Some(v) = values.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
            return Err(Error::InvalidSample(format!("observation {v} is not a finite value >= 0")));
        }
        values.sort_by(f64::total_cmp);
        Ok(Self { values })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Empirical CDF (right-continuous).
    pub fn ecdf(&self, x: f64) -> f64 {
        self.values.partition_point(|&v| v <= x) as f64 / self.len() as f64
    }
}

#[inline]
fn exp_cdf(x: f64) -> f64 {
    -(-x).exp_m1()
}

/// `sup_x |F_n(x) - (1 - e^{-x})|`, attained at a jump of `F_n`.
pub fn dk_vs_exp(sample: &EmpiricalSample) -> f64 {
    let n = sample.len() as f64;
    sample
        .values
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let g = exp_cdf(x);
            let below = i as f64 / n;
            let at = (i + 1) as f64 / n;
            (at - g).abs().max((below - g).abs())
        })
        .fold(0.0, f64::max)
}

/// `\int_a^b |c - (1 - e^{-x})| dx` for `0 <= c <= 1`, `a <= b <= inf`.
fn segment_integral(c: f64, a: f64, b: f64) -> f64 {
    if b <= a {
        return 0.0;
    }
    let d = 1.0 - c;
    // signed integral of h(x) = e^{-x} - d over [lo, hi]
    let signed = |lo: f64, hi: f64| -> f64 {
        if hi.is_infinite() {
            // only reachable with d == 0
            return (-lo).exp();
        }
        -(-lo).exp() * (-(hi - lo)).exp_m1() - d * (hi - lo)
    };
    if d <= 0.0 {
        return signed(a, b);
    }
    let crossing = -d.ln();
    if crossing <= a {
        -signed(a, b)
    } else if crossing >= b {
        signed(a, b)
    } else {
        signed(a, crossing) - signed(crossing, b)
    }
}

/// `\int_0^inf |F_n(x) - (1 - e^{-x})| dx`, integrated exactly between
/// consecutive order statistics.
pub fn dw_vs_exp(sample: &EmpiricalSample) -> f64 {
    let n = sample.len() as f64;
    let mut acc = CompensatedSum::new();
    let mut prev = 0.0;
    for (i, &x) in sample.values.iter().enumerate() {
        acc.add(segment_integral(i as f64 / n, prev, x));
        prev = x;
    }
    acc.add((-prev).exp());
    acc.value()
}

/// `1.74 sqrt(d_W)`.
pub fn dk_from_dw_bound(dw: f64) -> Result<f64> {
    if !(dw >= 0.0) {
        return Err(domain("dk_from_dw_bound", format!("d_W = {dw} is negative")));
    }
    Ok(DK_FROM_DW_CONSTANT * dw.sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DistanceReport {
    pub dk: f64,
    pub dw: f64,
    pub dk_from_dw_bound: f64,
}

impl DistanceReport {
    /// Both distances plus the Kolmogorov bound implied by `d_W`.
    ///
    /// Fails if `d_K <= 1.74 sqrt(d_W)` does not hold: that inequality is a
    /// theorem for every law against Exp(1), so a violation means a bug.
    pub fn compute(sample: &EmpiricalSample) -> Result<Self> {
        let dk = dk_vs_exp(sample);
        let dw = dw_vs_exp(sample);
        let bound = dk_from_dw_bound(dw)?;
        if dk > bound {
            return Err(Error::InvalidSample(format!(
                "metric relation violated: d_K = {dk} > 1.74 sqrt(d_W) = {bound}"
            )));
        }
        Ok(Self {
            dk,
            dw,
            dk_from_dw_bound: bound,
        })
    }

    pub fn from_values(values: Vec<f64>) -> Result<Self> {
        Self::compute(&EmpiricalSample::new(values)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::StreamKey;
    use proptest::prelude::*;
    use rand::Rng;

    fn exp_sample(n: usize, seed: u64) -> EmpiricalSample {
        let mut rng = StreamKey::new(seed).substream(0);
        EmpiricalSample::new((0..n).map(|_| -(1.0 - rng.random::<f64>()).ln()).collect()).unwrap()
    }

    /// Midpoint Riemann sum of |F_n - G| on a fine grid whose cells never
    /// straddle a jump of F_n, plus the exact tail beyond the grid.
    fn riemann_dw(sample: &EmpiricalSample, steps_per_unit: usize) -> f64 {
        let mut knots = vec![0.0];
        knots.extend_from_slice(sample.values());
        let top = knots.last().copied().unwrap() + 40.0;
        knots.push(top);
        let mut total = 0.0;
        for w in knots.windows(2) {
            let (a, b) = (w[0], w[1]);
            if b <= a {
                continue;
            }
            let steps = ((b - a) * steps_per_unit as f64).ceil() as usize;
            let h = (b - a) / steps as f64;
            let level = sample.ecdf(0.5 * (a + b));
            total += (0..steps)
                .map(|i| (level - exp_cdf(a + (i as f64 + 0.5) * h)).abs() * h)
                .sum::<f64>();
        }
        total + (-top).exp()
    }

    #[test]
    fn point_mass_at_one() {
        let s = EmpiricalSample::new(vec![1.0]).unwrap();
        let e1 = (-1.0f64).exp();
        assert!((dk_vs_exp(&s) - (1.0 - e1)).abs() < 1e-15);
        assert!((dw_vs_exp(&s) - 2.0 * e1).abs() < 1e-15);
    }

    #[test]
    fn point_mass_at_zero() {
        let s = EmpiricalSample::new(vec![0.0]).unwrap();
        assert_eq!(dk_vs_exp(&s), 1.0);
        assert!((dw_vs_exp(&s) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn exp_self_distance_is_small() {
        let s = exp_sample(100_000, 11);
        assert!(dk_vs_exp(&s) < 0.01);
        assert!(dw_vs_exp(&s) < 0.02);
    }

    #[test]
    fn dk_bound_values() {
        assert_eq!(dk_from_dw_bound(0.0).unwrap(), 0.0);
        assert!((dk_from_dw_bound(1.0).unwrap() - 1.74).abs() < 1e-15);
        assert!((dk_from_dw_bound(0.7358).unwrap() - 1.4926).abs() < 1e-4);
        assert!(dk_from_dw_bound(-0.1).is_err());
    }

    #[test]
    fn rejects_bad_samples() {
        assert!(EmpiricalSample::new(vec![]).is_err());
        assert!(EmpiricalSample::new(vec![-1.0]).is_err());
        assert!(EmpiricalSample::new(vec![f64::NAN]).is_err());
    }

    #[test]
    fn dw_matches_riemann_oracle() {
        for (seed, n) in [(1u64, 1usize), (2, 3), (3, 10), (4, 25)] {
            let mut rng = StreamKey::new(seed).substream(0);
            let s = EmpiricalSample::new((0..n).map(|_| rng.random_range(0.0..4.0)).collect())
                .unwrap();
            let exact = dw_vs_exp(&s);
            let riemann = riemann_dw(&s, 200_000);
            assert!((exact - riemann).abs() < 1e-9, "n={n}: {exact} vs {riemann}");
        }
    }

    #[test]
    fn segment_integral_crossing_cases() {
        // c = 0.5: crossing at ln 2.
        let ln2 = 2f64.ln();
        let whole = segment_integral(0.5, 0.0, 2.0);
        let split = segment_integral(0.5, 0.0, ln2) + segment_integral(0.5, ln2, 2.0);
        assert!((whole - split).abs() < 1e-15);
        assert!(segment_integral(0.3, 1.0, 1.0) == 0.0);
    }

    proptest! {
        #[test]
        fn permutation_and_duplication_invariance(
            xs in prop::collection::vec(0.0f64..6.0, 1..40),
            k in 1usize..4,
        ) {
            let base = EmpiricalSample::new(xs.clone()).unwrap();
            let mut rev = xs.clone();
            rev.reverse();
            let rev = EmpiricalSample::new(rev).unwrap();
            let dup = EmpiricalSample::new(
                xs.iter().flat_map(|&x| std::iter::repeat_n(x, k)).collect(),
            ).unwrap();
            prop_assert_eq!(dk_vs_exp(&base), dk_vs_exp(&rev));
            prop_assert_eq!(dw_vs_exp(&base), dw_vs_exp(&rev));
            prop_assert!((dk_vs_exp(&base) - dk_vs_exp(&dup)).abs() < 1e-12);
            prop_assert!((dw_vs_exp(&base) - dw_vs_exp(&dup)).abs() < 1e-12);
        }

        #[test]
        fn metric_relation_holds(xs in prop::collection::vec(0.0f64..10.0, 1..200)) {
            let s = EmpiricalSample::new(xs).unwrap();
            let r = DistanceReport::compute(&s);
            prop_assert!(r.is_ok());
            let r = r.unwrap();
            prop_assert!(r.dk <= r.dk_from_dw_bound);
            prop_assert!((0.0..=1.0).contains(&r.dk));
        }
    }
}
