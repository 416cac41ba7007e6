use serde_json::Value;

use super::report::{int, num};
use super::{distances_with_se, ExperimentConfig, Table, Verdict};
use crate::bounds::{occupation_bound, thm1_dw_bound};
use crate::error::Result;
use crate::markov_walk::{
    erdos_taylor_experiment, expected_occupations, return_prob_curve, OccupationCoupler,
};
use crate::rng::replicate;
use crate::stats::Estimate;

pub(super) const OCCUPATION_COLUMNS: &[(&str, &str)] = &[
    ("n", "path length"),
    ("reps", "coupled path pairs"),
    ("lambda", "1 / sum of expected occupations"),
    ("gap_hat", "mean of |W - W^e|"),
    ("gap_se", "standard error of gap_hat"),
    ("dw_hat", "Wasserstein distance of W = lambda * visits to Exp(1)"),
    ("se", "batch-means standard error of dw_hat"),
    ("dk_hat", "Kolmogorov distance of W to Exp(1)"),
    ("dk_se", "batch-means standard error of dk_hat"),
    ("bound", "2 lambda + 2 lambda^2 sum_i sum_{j>n-i} E X_i E X_j"),
    ("gap_bound", "2 * gap_hat"),
];

pub(super) const WALK_COLUMNS: &[(&str, &str)] = &[
    ("walk", "step law"),
    ("n", "number of steps"),
    ("reps", "paths (all grid points read off the same paths)"),
    ("mean_r", "mean number of returns to the origin by time n"),
    ("lambda_hat", "1 / mean_r"),
    ("dk_hat", "Kolmogorov distance of R / mean_r to Exp(1)"),
    ("dk_se", "batch-means standard error of dk_hat (batches use their own mean)"),
    ("dw_hat", "Wasserstein distance of R / mean_r to Exp(1)"),
    ("dw_se", "batch-means standard error of dw_hat"),
    ("inv_log_n", "1 / log n"),
    ("dw_log_n", "dw_hat * log n"),
    ("p_return", "estimated P[Z_n = 0] (aperiodic walks only, independent paths)"),
    ("p_return_se", "binomial standard error of p_return"),
    ("n_p_return", "n * p_return"),
];

pub(super) fn occupation_table(config: &ExperimentConfig) -> Result<Table> {
    let chain = config.chain()?;
    let reps = config.reps()?;
    let mut rows = Vec::new();
    let mut verdicts = Vec::new();
    for (slot, n) in config.grid()?.into_iter().enumerate() {
        let n_steps = n as usize;
        let coupler = OccupationCoupler::new(chain, n_steps)?;
        let bound = occupation_bound(&expected_occupations(chain, n_steps))?;
        let draws = replicate(config.key(slot as u64)?, reps, |_, rng| coupler.couple(rng));
        let gaps: Vec<f64> = draws.iter().map(|d| d.gap).collect();
        let gap = Estimate::from_values(&gaps);
        let w: Vec<f64> = draws.iter().map(|d| d.w).collect();
        let (dist, dk_se, dw_se) = distances_with_se(&w)?;
        let gap_bound = thm1_dw_bound(gap.mean)?;
        rows.push(vec![
            int(n),
            int(reps as u64),
            num(coupler.lambda()),
            num(gap.mean),
            num(gap.se),
            num(dist.dw),
            num(dw_se),
            num(dist.dk),
            num(dk_se),
            num(bound),
            num(gap_bound),
        ]);
        verdicts.push(Verdict::upper(
            format!("occupation n={n}: d_W <= occupation bound"),
            dist.dw,
            bound,
            dw_se,
        ));
        verdicts.push(Verdict::upper(
            format!("occupation n={n}: d_W <= 2 E|W - W^e|"),
            dist.dw,
            gap_bound,
            dw_se.hypot(2.0 * gap.se),
        ));
    }
    Ok((OCCUPATION_COLUMNS, rows, verdicts))
}

pub(super) fn walk_table(config: &ExperimentConfig) -> Result<Table> {
    let walk = config.walk()?;
    let reps = config.reps()?;
    let grid = config.grid()?;
    let et = erdos_taylor_experiment(walk, &grid, reps, config.key(0)?)?;
    let returns = if walk.aperiodic() {
        Some(return_prob_curve(walk, &grid, reps, config.key(1)?)?)
    } else {
        None
    };
    let label = Value::from(walk.to_string());
    let mut rows = Vec::new();
    for (i, row) in et.iter().enumerate() {
        let ret = returns.as_ref().map(|r| r[i]);
        rows.push(vec![
            label.clone(),
            int(row.n),
            int(reps as u64),
            num(row.mean_r),
            num(row.lambda_hat),
            num(row.dk),
            num(row.dk_se),
            num(row.dw),
            num(row.dw_se),
            num(row.inv_log_n),
            num(row.dw_log_n),
            ret.map_or(Value::Null, |r| num(r.p_hat)),
            ret.map_or(Value::Null, |r| num(r.se)),
            ret.map_or(Value::Null, |r| num(r.n_p_hat)),
        ]);
    }
    let mut verdicts = Vec::new();
    for pair in et.windows(2) {
        let (a, b) = (&pair[0], &pair[1]);
        verdicts.push(Verdict::upper(
            format!("walk2d: d_K does not increase from n={} to n={}", a.n, b.n),
            b.dk - a.dk,
            0.0,
            a.dk_se.hypot(b.dk_se),
        ));
    }
    if et.len() >= 2 {
        let scaled = et.iter().map(|r| r.dw_log_n);
        let hi = scaled.clone().fold(f64::NEG_INFINITY, f64::max);
        let lo = scaled.fold(f64::INFINITY, f64::min);
        verdicts.push(Verdict::exact(
            "walk2d: max/min of d_W log n along the grid < 3",
            hi / lo,
            3.0,
        ));
    }
    Ok((WALK_COLUMNS, rows, verdicts))
}
