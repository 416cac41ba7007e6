use criterion::{criterion_group, criterion_main, BatchSize, BenchmarkId, Criterion};
use std::hint::black_box;

use stein_expo::bounds::eta;
use stein_expo::galton_watson::{zn_pmf, SpineSampler, DEFAULT_FFT_CAP};
use stein_expo::markov_walk::{walk2d_returns, OccupationCoupler, Walk2DSpec};
use stein_expo::metrics::{dk_vs_exp, dw_vs_exp};
use stein_expo::{LawSpec, StreamKey};
use stein_expo_bench::{chain, exp_sample};

fn distances(c: &mut Criterion) {
    let mut group = c.benchmark_group("distance");
    for n in [1_000, 100_000] {
        let sample = exp_sample(n, 1);
        group.bench_with_input(BenchmarkId::new("dw_vs_exp", n), &sample, |b, s| {
            b.iter(|| dw_vs_exp(black_box(s)))
        });
        group.bench_with_input(BenchmarkId::new("dk_vs_exp", n), &sample, |b, s| {
            b.iter(|| dk_vs_exp(black_box(s)))
        });
    }
    group.finish();
}

fn branching(c: &mut Criterion) {
    let mut group = c.benchmark_group("branching");
    for (law, n) in [("geometric(0.9)", 20), ("geometric(1.05)", 50)] {
        let pmf = law.parse::<LawSpec>().unwrap().build().unwrap();
        let sampler = SpineSampler::new(&pmf, n).unwrap();
        let mut rng = StreamKey::new(2).substream(0);
        group.bench_function(BenchmarkId::new("coupling", format!("{law}/{n}")), |b| {
            b.iter(|| sampler.coupling(&mut rng).unwrap())
        });
        group.bench_function(BenchmarkId::new("zn_pmf", format!("{law}/{n}")), |b| {
            b.iter(|| zn_pmf(black_box(&pmf), n, DEFAULT_FFT_CAP).unwrap())
        });
    }
    group.finish();
}

fn walks(c: &mut Criterion) {
    let mut group = c.benchmark_group("walks");
    for (name, spec) in [
        ("simple", Walk2DSpec::simple()),
        ("lazy(0.2)", Walk2DSpec::lazy(0.2).unwrap()),
    ] {
        let mut rng = StreamKey::new(3).substream(0);
        group.bench_function(BenchmarkId::new("returns_1e4", name), |b| {
            b.iter(|| walk2d_returns(&spec, 10_000, &mut rng))
        });
    }
    let coupler = OccupationCoupler::new(&chain(5, 4), 50).unwrap();
    let mut rng = StreamKey::new(5).substream(0);
    group.bench_function("occupation_couple_5x50", |b| b.iter(|| coupler.couple(&mut rng)));
    group.finish();
}

fn bounds(c: &mut Criterion) {
    c.bench_function("eta/m=1.05,n=1e4", |b| {
        b.iter_batched(|| (1.05, 10_000u64), |(m, n)| eta(m, n).unwrap(), BatchSize::SmallInput)
    });
}

criterion_group!(benches, distances, branching, walks, bounds);
criterion_main!(benches);
