//! Closed-form error bounds for exponential approximation.
//!
//! Covers the coupling bounds `d_W <= 2 E|W^e - W|` and
//! `d_K <= 12 beta + 2 P[|W^e - W| > beta]`, the near-critical Galton-Watson
//! bound `C eta(m, n)` with its simplified upper bounds, the survival bound,
//! the occupation-time bound and the auxiliary logarithmic inequality used in
//! the subcritical estimate.

use crate::dist_core::{moments, DiscretePmf, MomentSummary};
use crate::error::{domain, Error, Result};
use crate::numeric::{csum, harmonic, CompensatedSum};
use serde::{Deserialize, Serialize};

/// Means with `|m - 1|` below this are treated as critical.
pub const NEAR_CRITICAL: f64 = 1e-9;

fn check_mean(m: f64, what: &'static str) -> Result<()> {
    if !(m > 0.0 && m.is_finite()) {
        return Err(domain(what, format!("mean m = {m} must be positive")));
    }
    Ok(())
}

/// `eta(m, n)`; at `|m - 1| < NEAR_CRITICAL` the limit `1/(2n) + H_n / n`.
pub fn eta(m: f64, n: u64) -> Result<f64> {
    check_mean(m, "eta")?;
    if n == 0 {
        return Err(domain("eta", "generation n must be positive"));
    }
    let nf = n as f64;
    if (m - 1.0).abs() < NEAR_CRITICAL {
        return Ok(eta_critical(n));
    }
    let log_m = m.ln();
    // one_minus_pow(k) = 1 - m^k, accurate near m = 1
    let one_minus_pow = |k: f64| -(k * log_m).exp_m1();
    if m > 1.0 {
        // Rescaled so nothing overflows for large n:
        //   (m-1)^2/m * sum_j m^{j-n} / ((1 - m^{-n}) (1 - m^{-j}))
        let d = m - 1.0;
        let first = d / (2.0 * (nf * log_m).exp_m1());
        let inv_tail = -(-nf * log_m).exp_m1();
        let series = csum((1..=n).map(|j| {
            let jf = j as f64;
            ((jf - nf) * log_m).exp() / (-(-jf * log_m).exp_m1())
        }));
        Ok(first + d * d / m * series / inv_tail)
    } else {
        let d = 1.0 - m;
        let denom = one_minus_pow(nf);
        let first = d / (2.0 * denom);
        let series = csum((1..=n).map(|j| {
            let jf = j as f64;
            (2.0 * jf * log_m).exp() / one_minus_pow(jf)
        }));
        Ok(first + d * d / (m * denom) * series)
    }
}

/// Critical limit of `eta`: `1/(2n) + H_n / n`.
pub fn eta_critical(n: u64) -> f64 {
    let nf = n as f64;
    0.5 / nf + harmonic(n) / nf
}

/// Supercritical simplification `6(m-1) + (6.5 + log n) / n`, valid for
/// `m > 1`, `n >= 1`.
pub fn eta_upper_super(m: f64, n: u64) -> Result<f64> {
    if !(m > 1.0 && m.is_finite()) {
        return Err(domain("eta_upper_super", format!("requires m > 1, got {m}")));
    }
    if n == 0 {
        return Err(domain("eta_upper_super", "requires n >= 1"));
    }
    let nf = n as f64;
    Ok(6.0 * (m - 1.0) + (6.5 + nf.ln()) / nf)
}

/// Subcritical simplification `(4.5 - log(1-m))(1-m) + (4.5 + log n) / n`,
/// valid for `1/2 <= m < 1`, `n >= 2`.
pub fn eta_upper_sub(m: f64, n: u64) -> Result<f64> {
    if !((0.5..1.0).contains(&m)) {
        return Err(domain("eta_upper_sub", format!("requires 1/2 <= m < 1, got {m}")));
    }
    if n < 2 {
        return Err(domain("eta_upper_sub", "requires n >= 2"));
    }
    let nf = n as f64;
    let d = 1.0 - m;
    Ok((4.5 - d.ln()) * d + (4.5 + nf.ln()) / nf)
}

/// The simplified bound that applies at `(m, n)`, if any.
pub fn eta_upper(m: f64, n: u64) -> Option<f64> {
    if m - 1.0 >= NEAR_CRITICAL {
        eta_upper_super(m, n).ok()
    } else if 1.0 - m >= NEAR_CRITICAL {
        eta_upper_sub(m, n).ok()
    } else {
        None
    }
}

/// `C = (2 + alpha)(2 + alpha + Var Z + E|Z|^3)`.
pub fn c_const(moments: &MomentSummary) -> Result<f64> {
    let a = moments.alpha;
    if !a.is_finite() || a < 0.0 {
        return Err(Error::AlphaUndefined);
    }
    Ok((2.0 + a) * (2.0 + a + moments.var_sigma2 + moments.third_gamma))
}

/// `(2 + alpha) m^n (1 - m) / (1 - m^n)`, an upper bound on `P[Z_n > 0]`.
pub fn survival_upper(moments: &MomentSummary, n: u64) -> Result<f64> {
    let m = moments.mean_m;
    check_mean(m, "survival_upper")?;
    if (m - 1.0).abs() < NEAR_CRITICAL {
        return Err(domain("survival_upper", "formula is singular at m = 1"));
    }
    if n == 0 {
        return Err(domain("survival_upper", "requires n >= 1"));
    }
    let nf = n as f64;
    let log_m = m.ln();
    let ratio = if m > 1.0 {
        // (m - 1) / (1 - m^{-n})
        (m - 1.0) / (-(-nf * log_m).exp_m1())
    } else {
        (1.0 - m) * (nf * log_m).exp() / (-(nf * log_m).exp_m1())
    };
    Ok((2.0 + moments.alpha) * ratio)
}

/// Input for the Galton-Watson Wasserstein bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GwBoundInput {
    pub moments: MomentSummary,
    pub n: u64,
}

impl GwBoundInput {
    pub fn from_law(law: &DiscretePmf, n: u64) -> Result<Self> {
        Ok(Self {
            moments: moments(law)?,
            n,
        })
    }
}

/// Analytic bound values for one `(law, n)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub eta: f64,
    pub c_const: f64,
    /// `C * eta`.
    pub dw_bound: f64,
    pub eta_upper: Option<f64>,
    pub survival_upper: Option<f64>,
}

/// Assembles `C`, `eta`, `C eta` and whichever simplified bounds apply.
pub fn gw_wasserstein_bound(input: &GwBoundInput) -> Result<BoundReport> {
    let m = input.moments.mean_m;
    let eta = eta(m, input.n)?;
    let c = c_const(&input.moments)?;
    Ok(BoundReport {
        eta,
        c_const: c,
        dw_bound: c * eta,
        eta_upper: eta_upper(m, input.n),
        survival_upper: survival_upper(&input.moments, input.n).ok(),
    })
}

/// `d_W <= 2 E|W^e - W|`.
pub fn thm1_dw_bound(coupling_gap: f64) -> Result<f64> {
    if !(coupling_gap >= 0.0) {
        return Err(domain("thm1_dw_bound", format!("gap {coupling_gap} is negative")));
    }
    Ok(2.0 * coupling_gap)
}

/// `d_K <= 12 beta + 2 P[|W^e - W| > beta]`.
pub fn thm1_dk_bound(beta: f64, tail_prob: f64) -> Result<f64> {
    if !(beta > 0.0) {
        return Err(domain("thm1_dk_bound", format!("beta = {beta} must be positive")));
    }
    if !(0.0..=1.0).contains(&tail_prob) {
        return Err(domain("thm1_dk_bound", format!("tail probability {tail_prob}")));
    }
    Ok(12.0 * beta + 2.0 * tail_prob)
}

/// Smallest `thm1_dk_bound` over a tail curve `(beta, P[gap > beta])`.
pub fn best_thm1_dk_bound(tail_curve: &[(f64, f64)]) -> Option<(f64, f64)> {
    tail_curve
        .iter()
        .filter_map(|&(b, t)| thm1_dk_bound(b, t).ok().map(|v| (b, v)))
        .min_by(|x, y| x.1.total_cmp(&y.1))
}

/// Kolmogorov bound `2.46 sqrt(E|X - X^e|)` for a unit-mean law.
pub fn intro_dk_bound(coupling_gap: f64) -> Result<f64> {
    if !(coupling_gap >= 0.0) {
        return Err(domain("intro_dk_bound", format!("gap {coupling_gap} is negative")));
    }
    Ok(2.46 * coupling_gap.sqrt())
}

/// Occupation-time bound
/// `2 lambda + 2 lambda^2 sum_i sum_{j = n-i+1}^n E X_i E X_j` with
/// `lambda = 1 / sum_i E X_i`, using suffix sums.
pub fn occupation_bound(means: &[f64]) -> Result<f64> {
    if means.iter().any(|x| !(x.is_finite() && *x >= 0.0)) {
        return Err(domain("occupation_bound", "means must be finite and nonnegative"));
    }
    let total = csum(means.iter().copied());
    if !(total > 0.0) {
        return Err(domain("occupation_bound", "all expected occupations are zero"));
    }
    let n = means.len();
    // suffix[k] = sum_{j >= k} means[j] (0-based)
    let mut suffix = vec![0.0; n + 1];
    let mut acc = CompensatedSum::new();
    for k in (0..n).rev() {
        acc.add(means[k]);
        suffix[k] = acc.value();
    }
    // 1-based j >= n - i + 1 is 0-based index n - i
    let double = csum((1..=n).map(|i| means[i - 1] * suffix[n - i]));
    let lambda = 1.0 / total;
    Ok(2.0 * lambda + 2.0 * lambda * lambda * double)
}

/// Margin `(1 + log b)/b + (1 + log c)/c - log(a)/a` of the logarithmic
/// inequality, for `a, b, c > 1` with `1/a <= 1/b + 1/c <= 1`.
pub fn lemma1_check(a: f64, b: f64, c: f64) -> Result<f64> {
    if !(a > 1.0 && b > 1.0 && c > 1.0) {
        return Err(domain("lemma1_check", format!("need a, b, c > 1; got ({a}, {b}, {c})")));
    }
    let s = 1.0 / b + 1.0 / c;
    if !(1.0 / a <= s && s <= 1.0) {
        return Err(Error::Hypothesis(format!(
            "(9) fails: 1/a = {}, 1/b + 1/c = {s}",
            1.0 / a
        )));
    }
    let g = |x: f64| (1.0 + x.ln()) / x;
    Ok(g(b) + g(c) - a.ln() / a)
}

/// `(m^n - 1)/(m - 1) - n`, nonnegative for `m > 1`.
pub fn geometric_sum_margin(m: f64, n: u64) -> f64 {
    let nf = n as f64;
    (nf * m.ln()).exp_m1() / (m - 1.0) - nf
}

/// `(1 - m + 1/n) - (1 - m)/(1 - m^n)`, nonnegative for `0 < m < 1`.
pub fn subcritical_ratio_margin(m: f64, n: u64) -> f64 {
    let nf = n as f64;
    (1.0 - m + 1.0 / nf) - (1.0 - m) / (-(nf * m.ln()).exp_m1())
}

/// Worst (smallest) value of `upper(m, n) - eta_fn(m, n)` over a grid, with
/// its location.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridCheck {
    pub worst_margin: f64,
    pub at_m: f64,
    pub at_n: u64,
    pub points: usize,
}

impl GridCheck {
    pub fn passes(&self, tol: f64) -> bool {
        self.worst_margin >= -tol
    }
}

pub fn grid_check<F>(m_grid: &[f64], n_grid: &[u64], margin: F) -> GridCheck
where
    F: Fn(f64, u64) -> f64,
{
    let mut worst = GridCheck {
        worst_margin: f64::INFINITY,
        at_m: f64::NAN,
        at_n: 0,
        points: 0,
    };
    for &m in m_grid {
        for &n in n_grid {
            let v = margin(m, n);
            worst.points += 1;
            if !(v >= worst.worst_margin) {
                worst.worst_margin = v;
                worst.at_m = m;
                worst.at_n = n;
            }
        }
    }
    worst
}

/// Roughly log-spaced integers from `lo` to `hi` inclusive, `per_decade`
/// points per factor of ten.
pub fn log_grid(lo: u64, hi: u64, per_decade: usize) -> Vec<u64> {
    let mut out = vec![lo];
    let step = 10f64.powf(1.0 / per_decade as f64);
    let mut x = lo as f64;
    while x < hi as f64 {
        x *= step;
        let k = (x.round() as u64).min(hi);
        if k > *out.last().expect("nonempty") {
            out.push(k);
        }
    }
    if *out.last().expect("nonempty") != hi {
        out.push(hi);
    }
    out
}
