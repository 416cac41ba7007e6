//! Fixtures shared by the benchmarks.

use rand::Rng;
use stein_expo::markov_walk::ChainSpec;
use stein_expo::{EmpiricalSample, StreamKey};

/// `n` Exp(1) draws.
pub fn exp_sample(n: usize, seed: u64) -> EmpiricalSample {
    let mut rng = StreamKey::new(seed).substream(0);
    let values = (0..n).map(|_| -(1.0 - rng.random::<f64>()).ln()).collect();
    EmpiricalSample::new(values).expect("finite draws")
}

/// Random chain on `k` states.
pub fn chain(k: usize, seed: u64) -> ChainSpec {
    ChainSpec::random(&mut StreamKey::new(seed).substream(0), k)
}
