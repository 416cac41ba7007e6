//! Desk-scale battery of every invariant the library promises.

use rand::Rng;
use serde_json::Value;

use super::report::opt;
use super::sweep::{lemma1_sweep, occupation_bound_discrepancy, simplified_bound_checks};
use super::{ExperimentConfig, ExperimentKind, RunReport, Table, Verdict};
use crate::bounds::{gw_wasserstein_bound, GwBoundInput};
use crate::dist_core::{
    check_equilibrium_identity, size_bias, DiscretePmf, EquilibriumRep, LawSpec, PiecewiseLinear,
};
use crate::error::Result;
use crate::galton_watson::{
    coupling_draws, spine_sample, survival_probabilities, yaglom_lambda, zn_pmf, DEFAULT_FFT_CAP,
};
use crate::markov_walk::{
    exact_origin_probs, occupation_draws, return_prob_curve, verify_thm3_identity,
    walk2d_returns, ChainSpec, JointLaw, PrefixDirection, Walk2DSpec,
};
use crate::metrics::{dk_vs_exp, dw_vs_exp, EmpiricalSample, DK_FROM_DW_CONSTANT};
use crate::rng::{replicate, try_replicate, with_threads, StreamKey};
use crate::stats::{frequencies, total_variation, Estimate};

pub(super) const COLUMNS: &[(&str, &str)] = &[
    ("check", "invariant under test"),
    ("status", "pass, inconclusive (within 3 SE of the threshold) or fail"),
    ("value", "measured quantity; the check is value <= threshold"),
    ("threshold", "tolerance or bound"),
    ("se", "standard error of value (Monte Carlo checks only)"),
    ("margin_se", "(threshold - value) / se"),
];

/// Runs the full battery with master seed `seed`.
pub fn verify_suite(seed: u64) -> Result<RunReport> {
    let mut config = ExperimentConfig::new(ExperimentKind::Verify);
    config.seed = Some(seed);
    super::run(&config)
}

pub(super) fn verify_table(seed: u64) -> Result<Table> {
    let keys = |slot: u64| {
        StreamKey::new(seed).with_namespace(ExperimentKind::Verify.namespace() << 32 | slot)
    };
    let mut v = Vec::new();
    equilibrium_checks(keys(0), keys(1), &mut v)?;
    thm3_check(keys(2), &mut v)?;
    bounds_checks(keys(3), keys(4), &mut v)?;
    metric_check(keys(5), &mut v)?;
    pgf_checks(&mut v)?;
    spine_checks(keys(6), keys(7), &mut v)?;
    occupation_checks(keys(8), keys(9), seed, &mut v)?;
    walk_checks(keys(10), keys(11), &mut v)?;
    determinism_check(keys(12), &mut v)?;
    let rows = v
        .iter()
        .map(|x| {
            vec![
                Value::from(x.check.clone()),
                Value::from(x.status.label().to_lowercase()),
                opt(x.value),
                opt(x.threshold),
                opt(x.se),
                opt(x.margin_se),
            ]
        })
        .collect();
    Ok((COLUMNS, rows, v))
}

fn random_pmf<R: Rng + ?Sized>(rng: &mut R) -> DiscretePmf {
    loop {
        let atoms = rng.random_range(1..8);
        let pairs: Vec<(u64, f64)> = (0..atoms)
            .map(|_| (rng.random_range(0..40), 0.01 + rng.random::<f64>()))
            .collect();
        if let Ok(pmf) = DiscretePmf::from_weights(pairs) {
            if pmf.mean() > 0.0 {
                return pmf;
            }
        }
    }
}

fn equilibrium_checks(key: StreamKey, sample_key: StreamKey, v: &mut Vec<Verdict>) -> Result<()> {
    let mut rng = key.substream(0);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let pmf = random_pmf(&mut rng);
        let pieces = rng.random_range(1..6);
        let f = PiecewiseLinear::random(&mut rng, pieces, 40.0);
        worst = worst.max(check_equilibrium_identity(&pmf, &f)?);
    }
    v.push(Verdict::exact(
        "E f(X) - f(0) = E X E f'(X^e) on 100 random laws",
        worst,
        1e-10,
    ));

    // sampler against the exact CDF; 1.95 / sqrt(n) is the KS 0.1% point
    let pmf = random_pmf(&mut sample_key.substream(u64::MAX));
    let rep = EquilibriumRep::new(&pmf)?;
    let draws = 100_000;
    let mut xs = replicate(sample_key, draws, |_, rng| rep.sample(rng));
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    let ks = xs
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let c = rep.cdf(x);
            (c - i as f64 / n).abs().max(((i + 1) as f64 / n - c).abs())
        })
        .fold(0.0, f64::max);
    v.push(Verdict::exact(
        "equilibrium sampler matches the equilibrium CDF (KS, 1e5 draws)",
        ks,
        1.95 / n.sqrt(),
    ));
    Ok(())
}

fn thm3_check(key: StreamKey, v: &mut Vec<Verdict>) -> Result<()> {
    let mut rng = key.substream(0);
    let mut worst = 0.0f64;
    for _ in 0..50 {
        let n = rng.random_range(1..=4);
        let outcomes = rng.random_range(1..=20);
        let joint = JointLaw::random(&mut rng, n, outcomes);
        let pieces = rng.random_range(1..5);
        let f = PiecewiseLinear::random(&mut rng, pieces, 3.0);
        for dir in [PrefixDirection::Backward, PrefixDirection::Forward] {
            worst = worst.max(verify_thm3_identity(&joint, &f, dir)?);
        }
    }
    v.push(Verdict::exact(
        "dependent-sum equilibrium mixture satisfies the identity on 50 joints",
        worst,
        1e-10,
    ));
    Ok(())
}

fn bounds_checks(lemma_key: StreamKey, occ_key: StreamKey, v: &mut Vec<Verdict>) -> Result<()> {
    for c in simplified_bound_checks(60, 2000)? {
        v.push(Verdict::exact(c.name, -c.check.worst_margin, 1e-12));
    }
    let (margin, _) = lemma1_sweep(lemma_key, 10_000);
    v.push(Verdict::exact(
        "log inequality margin nonnegative on 1e4 triples",
        -margin,
        0.0,
    ));
    v.push(Verdict::exact(
        "occupation bound suffix sums match the double sum",
        occupation_bound_discrepancy(occ_key, 20, 200)?,
        1e-12,
    ));
    Ok(())
}

fn metric_check(key: StreamKey, v: &mut Vec<Verdict>) -> Result<()> {
    let mut rng = key.substream(0);
    let mut worst = f64::NEG_INFINITY;
    for i in 0..200 {
        let len = rng.random_range(1..200);
        let scale = 0.1 + 3.0 * rng.random::<f64>();
        let values: Vec<f64> = match i % 3 {
            0 => (0..len).map(|_| -(1.0 - rng.random::<f64>()).ln() * scale).collect(),
            1 => (0..len).map(|_| rng.random_range(0..4) as f64 * scale).collect(),
            _ => (0..len).map(|_| rng.random::<f64>() * scale).collect(),
        };
        let s = EmpiricalSample::new(values)?;
        worst = worst.max(dk_vs_exp(&s) - DK_FROM_DW_CONSTANT * dw_vs_exp(&s).sqrt());
    }
    v.push(Verdict::exact(
        "d_K <= 1.74 sqrt(d_W) on 200 random samples",
        worst,
        0.0,
    ));
    Ok(())
}

fn pgf_checks(v: &mut Vec<Verdict>) -> Result<()> {
    // geometric offspring is linear fractional: Z_n | Z_n > 0 is geometric
    let (m, n) = (0.9f64, 10u32);
    let law = LawSpec::Geometric(m).build()?;
    let b = (1.0 - m.powi(-(n as i32))) / (1.0 - 1.0 / m);
    let lam = 1.0 / (1.0 + m.powi(n as i32) * b);
    let surv = lam * m.powi(n as i32);
    v.push(Verdict::exact(
        "generating-function lambda matches the linear-fractional closed form",
        (yaglom_lambda(&law, n)? - lam).abs(),
        1e-12,
    ));
    let pmf = zn_pmf(&law, n, DEFAULT_FFT_CAP)?;
    let worst = (1..200u64)
        .map(|k| (pmf.prob(k) - surv * lam * (1.0 - lam).powi(k as i32 - 1)).abs())
        .fold((pmf.prob(0) - (1.0 - surv)).abs(), f64::max);
    v.push(Verdict::exact(
        "FFT law of Z_n matches the linear-fractional closed form",
        worst,
        1e-12,
    ));
    Ok(())
}

fn spine_checks(key: StreamKey, coupling_key: StreamKey, v: &mut Vec<Verdict>) -> Result<()> {
    let law = LawSpec::Geometric(0.9).build()?;
    let n = 5;
    let reps = 50_000;
    let draws = try_replicate(key, reps, |_, rng| spine_sample(&law, n, rng))?;
    let zn = zn_pmf(&law, n, DEFAULT_FFT_CAP)?;
    let sb: Vec<(u64, f64)> = size_bias(&zn)?.iter().collect();
    let (counts, total) = frequencies(draws.iter().map(|d| d.s_n));
    v.push(Verdict::exact(
        "spine population S_n has the size-biased law of Z_n (TV, 5e4 draws)",
        total_variation(&counts, total, &sb),
        0.03,
    ));

    let survival = survival_probabilities(&law, n)[n as usize];
    let cond: Vec<(u64, f64)> = zn
        .iter()
        .filter(|&(k, _)| k > 0)
        .map(|(k, p)| (k, p / survival))
        .collect();
    let cd = coupling_draws(&law, n, reps, coupling_key)?;
    let (counts, total) = frequencies(cd.iter().map(|d| d.r_n_star));
    v.push(Verdict::exact(
        "R_n* has the law of Z_n given Z_n > 0 (TV, 5e4 draws)",
        total_variation(&counts, total, &cond),
        0.03,
    ));

    let w: Vec<f64> = cd.iter().map(|d| d.w).collect();
    let est = Estimate::from_values(&w);
    v.push(Verdict::matches("coupled W has mean 1", est.mean, 1.0, est.se));

    let gaps: Vec<f64> = cd.iter().map(|d| d.gap).collect();
    let gap = Estimate::from_values(&gaps);
    let bound = gw_wasserstein_bound(&GwBoundInput::from_law(&law, u64::from(n))?)?;
    v.push(Verdict::upper(
        "mean coupling gap <= C eta",
        gap.mean,
        bound.dw_bound,
        gap.se,
    ));
    Ok(())
}

fn occupation_checks(
    flip_key: StreamKey,
    chain_key: StreamKey,
    seed: u64,
    v: &mut Vec<Verdict>,
) -> Result<()> {
    let flip = ChainSpec::new(Vec::new(), vec![vec![0.0, 1.0], vec![1.0, 0.0]], 0)?;
    let draws = occupation_draws(&flip, 4, 20_000, flip_key)?;
    let gaps: Vec<f64> = draws.iter().map(|d| d.gap).collect();
    let est = Estimate::from_values(&gaps);
    v.push(Verdict::matches(
        "flip chain, n=4: E|W - W^e| = 1/2",
        est.mean,
        0.5,
        est.se,
    ));

    let chain = ChainSpec::random(&mut chain_key.substream(u64::MAX), 5);
    let mut config = ExperimentConfig::new(ExperimentKind::Occupation);
    config.chain = Some(chain);
    config.n = Some(50);
    config.reps = Some(20_000);
    config.seed = Some(seed);
    let (_, _, verdicts) = super::walks::occupation_table(&config)?;
    v.extend(verdicts);
    Ok(())
}

fn walk_checks(key: StreamKey, lazy_key: StreamKey, v: &mut Vec<Verdict>) -> Result<()> {
    let simple = Walk2DSpec::simple();
    let one_step = replicate(key, 1000, |_, rng| walk2d_returns(&simple, 1, rng));
    v.push(Verdict::exact(
        "simple walk never returns in one step",
        one_step.into_iter().max().unwrap_or(0) as f64,
        0.0,
    ));

    let lazy = Walk2DSpec::lazy(0.2)?;
    let grid = [4, 8, 16];
    let exact = exact_origin_probs(&lazy, 16)?;
    for row in return_prob_curve(&lazy, &grid, 50_000, lazy_key)? {
        v.push(Verdict::matches(
            format!("lazy walk P[Z_{}=0] matches the exact recursion", row.n),
            row.p_hat,
            exact[row.n as usize - 1],
            row.se,
        ));
    }
    Ok(())
}

fn determinism_check(key: StreamKey, v: &mut Vec<Verdict>) -> Result<()> {
    let law = LawSpec::Geometric(1.05).build()?;
    let run = |threads| with_threads(threads, || coupling_draws(&law, 10, 2000, key));
    let one = run(1)?;
    let many = run(4)?;
    let mismatches = one.iter().zip(&many).filter(|(a, b)| a != b).count();
    v.push(Verdict::exact(
        "coupled draws identical on 1 and 4 threads",
        mismatches as f64,
        0.0,
    ));
    Ok(())
}
