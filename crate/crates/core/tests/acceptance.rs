//! Acceptance gate: every criterion at its stated scale and tolerance.
//! Prints one PASS/FAIL line per criterion and exits nonzero on any failure.

use std::collections::BTreeMap;
use std::process::ExitCode;
use std::sync::Mutex;
use std::time::Instant;

use rand::Rng;
use serde_json::Value;
use stein_expo::bounds::occupation_bound;
use stein_expo::dist_core::{check_equilibrium_identity, size_bias, DiscretePmf, PiecewiseLinear};
use stein_expo::experiments::{
    lemma1_sweep, occupation_bound_brute, run, simplified_bound_checks, verify_suite,
    ExperimentConfig, ExperimentKind, RunReport,
};
use stein_expo::galton_watson::{survival_probabilities, zn_pmf, SpineSampler, DEFAULT_FFT_CAP};
use stein_expo::markov_walk::{
    exact_origin_probs, expected_occupations, verify_thm3_identity, ChainSpec, JointLaw,
    PrefixDirection, Walk2DSpec,
};
use stein_expo::metrics::{dk_vs_exp, dw_vs_exp, EmpiricalSample, DK_FROM_DW_CONSTANT};
use stein_expo::rng::{try_replicate, StreamKey};
use stein_expo::stats::{chi_square_p_value, frequencies, total_variation, uniformity_chi_square};
use stein_expo::LawSpec;

const SEED: u64 = 20_261_015;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

/// `(d_K, d_W)` of every Monte Carlo sample summarised in a report table.
static DISTANCES: Mutex<Vec<(f64, f64)>> = Mutex::new(Vec::new());

fn record(dk: f64, dw: f64) {
    DISTANCES.lock().unwrap().push((dk, dw));
}

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn col(report: &RunReport, row: usize, name: &str) -> f64 {
    let i = report
        .columns
        .iter()
        .position(|c| c == name)
        .unwrap_or_else(|| panic!("no column {name}"));
    report.rows[row][i].as_f64().unwrap_or(f64::NAN)
}

fn record_report(report: &RunReport, dk: &str, dw: &str) {
    for r in 0..report.rows.len() {
        record(col(report, r, dk), col(report, r, dw));
    }
}

fn random_pmf<R: Rng>(rng: &mut R) -> DiscretePmf {
    loop {
        let atoms = rng.random_range(1..10);
        let pairs: Vec<(u64, f64)> = (0..atoms)
            .map(|_| (rng.random_range(0..50), 0.01 + rng.random::<f64>()))
            .collect();
        if let Ok(p) = DiscretePmf::from_weights(pairs) {
            if p.mean() > 0.0 {
                return p;
            }
        }
    }
}

fn criterion_1() -> Outcome {
    let mut rng = StreamKey::new(SEED).with_namespace(101).substream(0);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let pmf = random_pmf(&mut rng);
        let pieces = rng.random_range(1..8);
        let f = PiecewiseLinear::random(&mut rng, pieces, 50.0);
        worst = worst.max(check_equilibrium_identity(&pmf, &f).map_err(err)?);
    }
    ensure(worst < 1e-10, || format!("max residual {worst:e}"))?;
    Ok(format!("100 laws, max residual {worst:.2e} < 1e-10"))
}

fn criterion_2() -> Outcome {
    let mut rng = StreamKey::new(SEED).with_namespace(102).substream(0);
    let mut worst = 0.0f64;
    for _ in 0..50 {
        let n = rng.random_range(1..=4);
        let outcomes = rng.random_range(1..=20);
        let joint = JointLaw::random(&mut rng, n, outcomes);
        let pieces = rng.random_range(1..6);
        let f = PiecewiseLinear::random(&mut rng, pieces, 3.0);
        worst = worst.max(verify_thm3_identity(&joint, &f, PrefixDirection::Backward).map_err(err)?);
    }
    ensure(worst < 1e-10, || format!("max residual {worst:e}"))?;
    Ok(format!("50 joint laws, max residual {worst:.2e} < 1e-10"))
}

fn criterion_3() -> Outcome {
    let mut notes = Vec::new();
    for (ci, law_name) in ["binary(0.5)", "geometric(0.9)"].into_iter().enumerate() {
        let law = law_name.parse::<LawSpec>().unwrap().build().map_err(err)?;
        for n in [5u32, 10] {
            let sampler = SpineSampler::new(&law, n).map_err(err)?;
            let key = StreamKey::new(SEED).with_namespace(103 << 16 | (ci as u64) << 8 | n as u64);
            let draws = try_replicate(key, 100_000, |_, rng| {
                let spine = sampler.spine(rng)?;
                let r_star = sampler.r_star(&spine, rng)?;
                Ok::<_, stein_expo::Error>((spine.s_n, spine.r_n, r_star))
            })
            .map_err(err)?;
            let zn = zn_pmf(&law, n, DEFAULT_FFT_CAP).map_err(err)?;
            let sb: Vec<(u64, f64)> = size_bias(&zn).map_err(err)?.iter().collect();
            let (counts, total) = frequencies(draws.iter().map(|d| d.0));
            let tv_s = total_variation(&counts, total, &sb);

            let survival = survival_probabilities(&law, n)[n as usize];
            let cond: Vec<(u64, f64)> = zn
                .iter()
                .filter(|&(k, _)| k > 0)
                .map(|(k, p)| (k, p / survival))
                .collect();
            let (counts, total) = frequencies(draws.iter().map(|d| d.2));
            let tv_r = total_variation(&counts, total, &cond);

            let mut by_s: BTreeMap<u64, Vec<u64>> = BTreeMap::new();
            for &(s, r, _) in &draws {
                by_s.entry(s).or_default().push(r);
            }
            let (mut stat, mut dof) = (0.0, 0);
            for (s, rs) in by_s.iter().filter(|(_, rs)| rs.len() >= 100) {
                let (x, d) = uniformity_chi_square(rs, *s);
                stat += x;
                dof += d;
            }
            let p = chi_square_p_value(stat, dof);
            ensure(tv_s < 0.01 && tv_r < 0.01 && p > 0.001, || {
                format!("{law_name} n={n}: TV(S_n)={tv_s:.4} TV(R*)={tv_r:.4} p={p:.4}")
            })?;
            notes.push(format!("{law_name}/n={n}: TV {tv_s:.4}, {tv_r:.4}; p={p:.3}"));
        }
    }
    Ok(notes.join("; "))
}

fn gw_config(kind: ExperimentKind, m: f64) -> ExperimentConfig {
    let mut c = ExperimentConfig::new(kind);
    c.law = Some(LawSpec::Geometric(m));
    c.n_grid = Some(vec![10, 20, 50]);
    c.reps = Some(100_000);
    c.seed = Some(SEED);
    c
}

fn criterion_4() -> Outcome {
    let mut notes = Vec::new();
    for m in [0.9, 0.95, 1.05] {
        let report = run(&gw_config(ExperimentKind::GwDw, m)).map_err(err)?;
        record_report(&report, "dk_hat", "dw_hat");
        for r in 0..report.rows.len() {
            let (n, dw, se, bound) = (
                col(&report, r, "n"),
                col(&report, r, "dw_hat"),
                col(&report, r, "se"),
                col(&report, r, "bound"),
            );
            ensure(dw <= bound + 3.0 * se, || {
                format!("m={m} n={n}: d_W {dw:.4} > C eta {bound:.4} + 3 SE ({se:.4})")
            })?;
            notes.push(format!("({m},{n}) {dw:.4}<={bound:.2}"));
        }
    }
    Ok(format!("d_W vs C eta: {}", notes.join(" ")))
}

fn criterion_5() -> Outcome {
    let mut worst_ratio = 0.0f64;
    for m in [0.9, 0.95, 1.05] {
        let report = run(&gw_config(ExperimentKind::GwCouple, m)).map_err(err)?;
        record_report(&report, "dk_hat", "dw_hat");
        for r in 0..report.rows.len() {
            let (n, dw, se, gap, gap_se) = (
                col(&report, r, "n"),
                col(&report, r, "dw_hat"),
                col(&report, r, "se"),
                col(&report, r, "gap_hat"),
                col(&report, r, "gap_se"),
            );
            let slack = 3.0 * se.hypot(2.0 * gap_se);
            ensure(dw <= 2.0 * gap + slack, || {
                format!("m={m} n={n}: d_W {dw:.4} > 2 gap {:.4} + 3 SE", 2.0 * gap)
            })?;
            worst_ratio = worst_ratio.max(dw / (2.0 * gap));
        }
    }
    // deterministic binary tree: W = 1, W^e uniform, gap = 1/2; d_W(1, Exp) = 2/e
    let law = DiscretePmf::point(2);
    let sampler = SpineSampler::new(&law, 6).map_err(err)?;
    let key = StreamKey::new(SEED).with_namespace(105);
    let gaps = try_replicate(key, 100_000, |_, rng| sampler.coupling(rng).map(|d| d.gap)).map_err(err)?;
    let mean = gaps.iter().sum::<f64>() / gaps.len() as f64;
    let sd = (gaps.iter().map(|g| (g - mean).powi(2)).sum::<f64>() / (gaps.len() - 1) as f64).sqrt();
    let se = sd / (gaps.len() as f64).sqrt();
    ensure((mean - 0.5).abs() <= 3.0 * se, || format!("binary gap {mean} vs 0.5 (se {se})"))?;
    let point = EmpiricalSample::new(vec![1.0]).map_err(err)?;
    let dw_point = dw_vs_exp(&point);
    let two_over_e = 2.0 / std::f64::consts::E;
    ensure((dw_point - two_over_e).abs() < 1e-15, || format!("point mass d_W {dw_point}"))?;
    ensure(dw_point <= 2.0 * 0.5, || "2/e > 1".into())?;
    Ok(format!(
        "max d_W / (2 gap) = {worst_ratio:.3}; binary gap {mean:.4} ± {se:.4}, d_W = 2/e = {dw_point:.4} <= 1"
    ))
}

fn criterion_6() -> Outcome {
    let mut notes = Vec::new();
    for c in simplified_bound_checks(200, 10_000).map_err(err)? {
        ensure(c.check.passes(1e-12), || {
            format!("{}: margin {:e} at m={} n={}", c.name, c.check.worst_margin, c.check.at_m, c.check.at_n)
        })?;
        notes.push(format!("{:.1e}", c.check.worst_margin));
    }
    Ok(format!("4 grids, worst margins [{}]", notes.join(", ")))
}

fn criterion_7() -> Outcome {
    let (margin, a) = lemma1_sweep(StreamKey::new(SEED).with_namespace(107), 10_000);
    ensure(margin >= 0.0, || format!("margin {margin} at a={a}"))?;
    Ok(format!("1e4 triples, min margin {margin:.4}"))
}

fn criterion_8() -> Outcome {
    let mut worst_brute = 0.0f64;
    let mut worst_margin = f64::INFINITY;
    for i in 0..20u64 {
        let chain = ChainSpec::random(&mut StreamKey::new(SEED).with_namespace(108).substream(i), 5);
        let means = expected_occupations(&chain, 50);
        let bound = occupation_bound(&means).map_err(err)?;
        worst_brute = worst_brute.max((bound - occupation_bound_brute(&means)).abs());
        let mut c = ExperimentConfig::new(ExperimentKind::Occupation);
        c.chain = Some(chain);
        c.n = Some(50);
        c.reps = Some(100_000);
        c.seed = Some(SEED + i);
        let report = run(&c).map_err(err)?;
        record_report(&report, "dk_hat", "dw_hat");
        let (dw, se, b) = (col(&report, 0, "dw_hat"), col(&report, 0, "se"), col(&report, 0, "bound"));
        ensure(dw <= b + 3.0 * se, || format!("chain {i}: d_W {dw:.4} > bound {b:.4} + 3 SE"))?;
        worst_margin = worst_margin.min(b - dw);
    }
    ensure(worst_brute <= 1e-12, || format!("bound vs brute force {worst_brute:e}"))?;
    Ok(format!(
        "20 chains, min (bound - d_W) = {worst_margin:.4}; |bound - brute| <= {worst_brute:.1e}"
    ))
}

fn criterion_9() -> Outcome {
    let mut c = ExperimentConfig::new(ExperimentKind::Walk2d);
    c.walk = Some(Walk2DSpec::simple());
    c.n_grid = Some(vec![1_000, 10_000, 100_000]);
    c.reps = Some(10_000);
    c.seed = Some(SEED);
    let report = run(&c).map_err(err)?;
    record_report(&report, "dk_hat", "dw_hat");
    let dk: Vec<f64> = (0..3).map(|r| col(&report, r, "dk_hat")).collect();
    let dk_se: Vec<f64> = (0..3).map(|r| col(&report, r, "dk_se")).collect();
    for i in 0..2 {
        ensure(dk[i + 1] <= dk[i] + 2.0 * dk_se[i].hypot(dk_se[i + 1]), || {
            format!("d_K rises {:.4} -> {:.4}", dk[i], dk[i + 1])
        })?;
    }
    let scaled: Vec<f64> = (0..3).map(|r| col(&report, r, "dw_log_n")).collect();
    let ratio = scaled.iter().cloned().fold(0.0, f64::max) / scaled.iter().cloned().fold(f64::INFINITY, f64::min);
    ensure(ratio < 3.0, || format!("d_W log n ratio {ratio:.3}"))?;
    Ok(format!(
        "d_K {:.4} > {:.4} > {:.4}; d_W log n in [{:.3}, {:.3}], ratio {ratio:.3} < 3",
        dk[0],
        dk[1],
        dk[2],
        scaled.iter().cloned().fold(f64::INFINITY, f64::min),
        scaled.iter().cloned().fold(0.0, f64::max)
    ))
}

fn criterion_10() -> Outcome {
    let mut c = ExperimentConfig::new(ExperimentKind::Walk2d);
    c.walk = Some(Walk2DSpec::lazy(0.2).map_err(err)?);
    c.n_grid = Some(vec![64, 128, 256, 512]);
    c.reps = Some(100_000);
    c.seed = Some(SEED);
    let report = run(&c).map_err(err)?;
    record_report(&report, "dk_hat", "dw_hat");
    let np: Vec<f64> = (0..4).map(|r| col(&report, r, "n_p_return")).collect();
    let hi = np.iter().cloned().fold(0.0, f64::max);
    let lo = np.iter().cloned().fold(f64::INFINITY, f64::min);
    ensure(lo > 0.0 && hi / lo < 2.0, || format!("n P band {np:?}"))?;
    let exact = exact_origin_probs(c.walk.as_ref().unwrap(), 128).map_err(err)?;
    let mut notes = Vec::new();
    for r in 0..2 {
        let n = col(&report, r, "n") as usize;
        let (p, se) = (col(&report, r, "p_return"), col(&report, r, "p_return_se"));
        let z = (p - exact[n - 1]) / se;
        ensure(z.abs() <= 3.0, || format!("n={n}: {p} vs exact {} ({z:.2} SE)", exact[n - 1]))?;
        notes.push(format!("n={n}: {z:+.2} SE"));
    }
    Ok(format!("n P in [{lo:.3}, {hi:.3}], ratio {:.3} < 2; DP {}", hi / lo, notes.join(", ")))
}

fn criterion_11() -> Outcome {
    // every sample summarised above, plus random ones of assorted shapes
    let mut rng = StreamKey::new(SEED).with_namespace(111).substream(0);
    for i in 0..500 {
        let len = rng.random_range(1..500);
        let scale = 0.05 + 4.0 * rng.random::<f64>();
        let values: Vec<f64> = match i % 4 {
            0 => (0..len).map(|_| -(1.0 - rng.random::<f64>()).ln() * scale).collect(),
            1 => (0..len).map(|_| rng.random_range(0..5) as f64 * scale).collect(),
            2 => (0..len).map(|_| rng.random::<f64>() * scale).collect(),
            _ => vec![scale; len],
        };
        let s = EmpiricalSample::new(values).map_err(err)?;
        record(dk_vs_exp(&s), dw_vs_exp(&s));
    }
    let all = DISTANCES.lock().unwrap();
    let worst = all
        .iter()
        .map(|&(dk, dw)| dk - DK_FROM_DW_CONSTANT * dw.sqrt())
        .fold(f64::NEG_INFINITY, f64::max);
    ensure(all.iter().all(|&(dk, dw)| dk <= DK_FROM_DW_CONSTANT * dw.sqrt()), || {
        format!("violated by {worst:e}")
    })?;
    Ok(format!("{} samples, max d_K - 1.74 sqrt(d_W) = {worst:.4}", all.len()))
}

fn criterion_12() -> Outcome {
    let mut configs = Vec::new();
    let mut c = gw_config(ExperimentKind::GwCouple, 1.05);
    c.reps = Some(5_000);
    configs.push(c);
    let mut c = gw_config(ExperimentKind::GwDw, 0.9);
    c.reps = Some(5_000);
    configs.push(c);
    let mut c = ExperimentConfig::new(ExperimentKind::Occupation);
    c.chain = Some(ChainSpec::random(&mut StreamKey::new(SEED).substream(0), 5));
    c.n = Some(50);
    c.reps = Some(5_000);
    c.seed = Some(SEED);
    configs.push(c);
    let mut c = ExperimentConfig::new(ExperimentKind::Walk2d);
    c.walk = Some(Walk2DSpec::lazy(0.2).map_err(err)?);
    c.n_grid = Some(vec![100, 1000]);
    c.reps = Some(2_000);
    c.seed = Some(SEED);
    configs.push(c);
    let mut c = ExperimentConfig::new(ExperimentKind::BoundsSweep);
    c.seed = Some(SEED);
    configs.push(c);
    let mut c = ExperimentConfig::new(ExperimentKind::Verify);
    c.seed = Some(SEED);
    configs.push(c);
    for mut c in configs {
        let mut outputs = Vec::new();
        for threads in [1, 2, 8] {
            c.threads = threads;
            let report = run(&c).map_err(err)?;
            outputs.push((report.to_json().map_err(err)?, report.to_csv_string().map_err(err)?));
        }
        ensure(outputs.windows(2).all(|w| w[0] == w[1]), || {
            format!("{} differs across thread counts", c.experiment)
        })?;
    }
    let a = verify_suite(SEED).map_err(err)?.to_json().map_err(err)?;
    let b = verify_suite(SEED).map_err(err)?.to_json().map_err(err)?;
    ensure(a == b, || "verify reruns differ".into())?;
    let parsed: Value = serde_json::from_str(&a).map_err(err)?;
    ensure(parsed.get("wall_time_secs").is_none(), || "timing leaked into report".into())?;
    Ok("6 experiment kinds byte-identical on 1, 2 and 8 threads".into())
}

fn main() -> ExitCode {
    let criteria: [Criterion; 12] = [
        ("equilibrium identity on random laws", criterion_1),
        ("dependent-sum equilibrium mixture is exact", criterion_2),
        ("spine laws and conditional uniformity", criterion_3),
        ("conditioned population within C eta", criterion_4),
        ("coupling bound and deterministic binary check", criterion_5),
        ("simplified bound grids", criterion_6),
        ("logarithmic inequality", criterion_7),
        ("occupation-time bound", criterion_8),
        ("return-count rate shape", criterion_9),
        ("return-probability band", criterion_10),
        ("metric relation", criterion_11),
        ("determinism across thread counts", criterion_12),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.into_iter().enumerate() {
        let start = Instant::now();
        let outcome = std::panic::catch_unwind(check)
            .unwrap_or_else(|_| Err("panicked".to_string()));
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS criterion {:>2} {name} [{secs:.1}s]: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL criterion {:>2} {name} [{secs:.1}s]: {detail}", i + 1);
            }
        }
    }
    println!("acceptance: {} of 12 criteria passed", 12 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
