//! Generating-function iteration.

use crate::dist_core::DiscretePmf;
use crate::error::{Error, Result};
use crate::numeric::csum;
use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

/// Largest transform length tried when recovering the law of `Z_n`.
pub const DEFAULT_FFT_CAP: usize = 1 << 22;

/// Trailing mass dropped from a recovered pmf.
const TAIL_TRIM: f64 = 1e-14;

/// `P[Z_k > 0]` for `k = 0, ..., n`, via `s_{k+1} = 1 - f(1 - s_k)`.
///
/// `1 - f(1 - s)` is summed as `sum_j p_j (1 - (1 - s)^j)` with each term
/// formed through `expm1`/`ln_1p`, so tiny survival probabilities keep full
/// relative precision.
pub fn survival_probabilities(law: &DiscretePmf, n: u32) -> Vec<f64> {
    let mut out = Vec::with_capacity(n as usize + 1);
    let mut s = 1.0f64;
    out.push(s);
    for _ in 0..n {
        s = if s <= 0.0 {
            0.0
        } else {
            let log_q = (-s).ln_1p();
            csum(
                law.iter()
                    .filter(|&(k, _)| k > 0)
                    .map(|(k, p)| -p * (k as f64 * log_q).exp_m1()),
            )
            .clamp(0.0, 1.0)
        };
        out.push(s);
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PgfIterate {
    pub n: u32,
    /// `P[Z_n > 0]`.
    pub survival: f64,
    /// Law of `Z_n`, when requested.
    pub pmf: Option<DiscretePmf>,
}

/// Survival probability at generation `n` and, if `full_pmf_cap` is given,
/// the law of `Z_n` recovered by iterating the generating function on roots
/// of unity (transform length at most the cap).
pub fn pgf_iterate(law: &DiscretePmf, n: u32, full_pmf_cap: Option<usize>) -> Result<PgfIterate> {
    let survival = *survival_probabilities(law, n).last().expect("nonempty");
    let pmf = match full_pmf_cap {
        Some(cap) => Some(zn_pmf(law, n, cap)?),
        None => None,
    };
    Ok(PgfIterate { n, survival, pmf })
}

/// `lambda = P[Z_n > 0] / m^n = 1 / E(Z_n | Z_n > 0)`.
pub fn yaglom_lambda(law: &DiscretePmf, n: u32) -> Result<f64> {
    let survival = *survival_probabilities(law, n).last().expect("nonempty");
    if !(survival > 0.0) {
        return Err(Error::ExtinctionCertain { n });
    }
    let m = law.mean();
    let growth = m.powi(n as i32);
    if growth.is_finite() && growth > 0.0 {
        Ok(survival / growth)
    } else {
        Ok(survival * (-(n as f64) * m.ln()).exp())
    }
}

fn horner(coeffs: &[f64], z: Complex64) -> Complex64 {
    coeffs
        .iter()
        .rev()
        .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * z + c)
}

/// Law of `Z_n`: the n-fold composition of the offspring pgf is evaluated
/// at the `N`-th roots of unity and inverted with an FFT, doubling `N` until
/// the upper half of the recovered coefficients carries negligible mass.
pub fn zn_pmf(law: &DiscretePmf, n: u32, cap: usize) -> Result<DiscretePmf> {
    if n == 0 {
        return Ok(DiscretePmf::point(1));
    }
    let degree = law.max_support() as usize;
    let mut coeffs = vec![0.0; degree + 1];
    for (k, p) in law.iter() {
        coeffs[k as usize] = p;
    }
    let mut planner = FftPlanner::<f64>::new();
    let mut size = 1024usize;
    loop {
        if size > cap {
            return Err(Error::CapExceeded(format!(
                "law of Z_{n} needs a transform longer than {cap}"
            )));
        }
        let step = std::f64::consts::TAU / size as f64;
        let mut values: Vec<Complex64> = (0..size)
            .map(|k| {
                let mut z = Complex64::from_polar(1.0, step * k as f64);
                for _ in 0..n {
                    z = horner(&coeffs, z);
                }
                z
            })
            .collect();
        // coefficients c_j = (1/N) sum_k f_n(w^k) w^{-jk}
        planner.plan_fft_forward(size).process(&mut values);
        let probs: Vec<f64> = values
            .iter()
            .map(|v| {
                let p = v.re / size as f64;
                // transform roundoff sits near 1e-17
                if p < 1e-16 {
                    0.0
                } else {
                    p
                }
            })
            .collect();
        let upper = csum(probs[size / 2..].iter().copied());
        if upper < 1e-11 {
            return trimmed(&probs[..size / 2]);
        }
        size *= 2;
    }
}

fn trimmed(probs: &[f64]) -> Result<DiscretePmf> {
    let mut end = probs.len();
    let mut tail = 0.0;
    while end > 1 && tail + probs[end - 1] < TAIL_TRIM {
        tail += probs[end - 1];
        end -= 1;
    }
    DiscretePmf::from_weights(
        probs[..end]
            .iter()
            .enumerate()
            .filter(|(_, &p)| p > 0.0)
            .map(|(k, &p)| (k as u64, p)),
    )
}
