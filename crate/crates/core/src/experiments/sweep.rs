use rand::Rng;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::report::{int, num};
use super::{ExperimentConfig, Table, Verdict};
use crate::bounds::{
    eta, eta_upper_sub, eta_upper_super, geometric_sum_margin, grid_check, lemma1_check, log_grid,
    occupation_bound, subcritical_ratio_margin, GridCheck,
};
use crate::error::Result;
use crate::rng::StreamKey;

pub(super) const COLUMNS: &[(&str, &str)] = &[
    ("check", "inequality being swept"),
    ("worst_margin", "smallest (right side - left side) over the grid; >= -1e-12 passes"),
    ("at_m", "m (or a, for the logarithmic inequality) at the worst point"),
    ("at_n", "n at the worst point (empty where not applicable)"),
    ("points", "grid points evaluated"),
];

const GRID_TOLERANCE: f64 = 1e-12;
const DEFAULT_M_POINTS: usize = 200;
const DEFAULT_N_MAX: u64 = 10_000;
const LEMMA1_TRIPLES: usize = 10_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NamedGridCheck {
    pub name: String,
    pub check: GridCheck,
}

/// The supercritical and subcritical simplified bounds on `eta`, and the
/// two elementary inequalities behind them, on `m_points` values of `m`
/// per side of 1 and a log grid of `n` up to `n_max`.
pub fn simplified_bound_checks(m_points: usize, n_max: u64) -> Result<Vec<NamedGridCheck>> {
    let n_grid = log_grid(1, n_max, 12);
    let n_sub: Vec<u64> = n_grid.iter().copied().filter(|&n| n >= 2).collect();
    let k = m_points as f64;
    // (1, 2] and [0.5, 1)
    let m_super: Vec<f64> = (1..=m_points).map(|i| 1.0 + i as f64 / k).collect();
    let m_sub: Vec<f64> = (0..m_points).map(|i| 0.5 + 0.5 * i as f64 / k).collect();
    let m_open: Vec<f64> = (1..=m_points).map(|i| i as f64 / (k + 1.0)).collect();

    let sup = |m: f64, n: u64| -> f64 {
        match (eta_upper_super(m, n), eta(m, n)) {
            (Ok(up), Ok(e)) => up - e,
            _ => f64::NEG_INFINITY,
        }
    };
    let sub = |m: f64, n: u64| -> f64 {
        match (eta_upper_sub(m, n), eta(m, n)) {
            (Ok(up), Ok(e)) => up - e,
            _ => f64::NEG_INFINITY,
        }
    };
    Ok(vec![
        NamedGridCheck {
            name: "eta <= 6(m-1) + (6.5 + log n)/n on m in (1,2]".into(),
            check: grid_check(&m_super, &n_grid, sup),
        },
        NamedGridCheck {
            name: "eta <= (4.5 - log(1-m))(1-m) + (4.5 + log n)/n on m in [0.5,1)".into(),
            check: grid_check(&m_sub, &n_sub, sub),
        },
        NamedGridCheck {
            // divided by n so the tolerance is relative to the size of the terms
            name: "(m^n - 1)/(m - 1) >= n on m in (1,2]".into(),
            check: grid_check(&m_super, &n_grid, |m, n| geometric_sum_margin(m, n) / n as f64),
        },
        NamedGridCheck {
            name: "(1-m)/(1-m^n) <= 1 - m + 1/n on m in (0,1)".into(),
            check: grid_check(&m_open, &n_grid, subcritical_ratio_margin),
        },
    ])
}

/// Smallest margin of the logarithmic inequality over `count` random
/// triples satisfying its hypothesis, with the `a` where it occurs.
pub fn lemma1_sweep(key: StreamKey, count: usize) -> (f64, f64) {
    let mut rng = key.substream(0);
    let mut worst = (f64::INFINITY, f64::NAN);
    let mut checked = 0;
    while checked < count {
        let b = 1.0 + rng.random::<f64>() * 50.0;
        let c = 1.0 + rng.random::<f64>() * 50.0;
        let a = 1.0 + rng.random::<f64>() * 100.0;
        if let Ok(margin) = lemma1_check(a, b, c) {
            if margin < worst.0 {
                worst = (margin, a);
            }
            checked += 1;
        }
    }
    worst
}

/// Direct double sum for the occupation-time bound.
pub fn occupation_bound_brute(means: &[f64]) -> f64 {
    let n = means.len();
    let lambda = 1.0 / means.iter().sum::<f64>();
    let mut double = 0.0;
    for i in 1..=n {
        for j in (n - i + 1)..=n {
            double += means[i - 1] * means[j - 1];
        }
    }
    2.0 * lambda + 2.0 * lambda * lambda * double
}

/// Largest gap between the suffix-sum occupation bound and the double sum
/// over `count` random mean vectors of length `len`.
pub(super) fn occupation_bound_discrepancy(key: StreamKey, count: usize, len: usize) -> Result<f64> {
    let mut rng = key.substream(0);
    let mut worst = 0.0f64;
    for _ in 0..count {
        let means: Vec<f64> = (0..len).map(|_| rng.random::<f64>()).collect();
        let fast = occupation_bound(&means)?;
        worst = worst.max((fast - occupation_bound_brute(&means)).abs());
    }
    Ok(worst)
}

pub(super) fn sweep_table(config: &ExperimentConfig) -> Result<Table> {
    let checks = simplified_bound_checks(
        config.m_points.unwrap_or(DEFAULT_M_POINTS),
        config.n_max.unwrap_or(DEFAULT_N_MAX),
    )?;
    let mut rows = Vec::new();
    let mut verdicts = Vec::new();
    for c in checks {
        rows.push(vec![
            Value::from(c.name.clone()),
            num(c.check.worst_margin),
            num(c.check.at_m),
            int(c.check.at_n),
            int(c.check.points as u64),
        ]);
        verdicts.push(Verdict::exact(c.name, -c.check.worst_margin, GRID_TOLERANCE));
    }
    let name = "log inequality (1+log b)/b + (1+log c)/c >= log(a)/a";
    let (margin, at_a) = lemma1_sweep(config.key(0)?, LEMMA1_TRIPLES);
    rows.push(vec![
        Value::from(name),
        num(margin),
        num(at_a),
        Value::Null,
        int(LEMMA1_TRIPLES as u64),
    ]);
    verdicts.push(Verdict::exact(name, -margin, 0.0));

    let name = "occupation bound suffix sums match the double sum";
    let worst = occupation_bound_discrepancy(config.key(1)?, 20, 200)?;
    rows.push(vec![Value::from(name), num(-worst), Value::Null, Value::Null, int(20)]);
    verdicts.push(Verdict::exact(name, worst, GRID_TOLERANCE));
    Ok((COLUMNS, rows, verdicts))
}
