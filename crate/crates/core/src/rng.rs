//! Deterministic per-replicate random streams.
//!
//! Every replicate draws from its own ChaCha8 stream keyed by
//! `(master seed, replicate index)`, so results never depend on how
//! replicates are scheduled across threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

pub type SimRng = ChaCha8Rng;

/// Stream namespaces keep experiments that share a seed from reusing streams.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StreamKey {
    pub seed: u64,
    pub namespace: u64,
}

impl StreamKey {
    pub fn new(seed: u64) -> Self {
        Self { seed, namespace: 0 }
    }

    pub fn with_namespace(self, namespace: u64) -> Self {
        Self { namespace, ..self }
    }

    /// RNG for replicate `index`.
    pub fn substream(&self, index: u64) -> SimRng {
        let mut seed = [0u8; 32];
        seed[..8].copy_from_slice(&self.seed.to_le_bytes());
        seed[8..16].copy_from_slice(&self.namespace.to_le_bytes());
        seed[16..24].copy_from_slice(b"stein-ex");
        let mut rng = ChaCha8Rng::from_seed(seed);
        rng.set_stream(index);
        rng
    }
}

/// Runs `f` once per replicate, in parallel, returning results in index order.
pub fn replicate<T, F>(key: StreamKey, reps: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(u64, &mut SimRng) -> T + Sync + Send,
{
    (0..reps as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = key.substream(i);
            f(i, &mut rng)
        })
        .collect()
}

/// Fallible variant of [`replicate`]; the first error by index wins.
pub fn try_replicate<T, E, F>(key: StreamKey, reps: usize, f: F) -> Result<Vec<T>, E>
where
    T: Send,
    E: Send,
    F: Fn(u64, &mut SimRng) -> Result<T, E> + Sync + Send,
{
    let results: Vec<Result<T, E>> = replicate(key, reps, f);
    results.into_iter().collect()
}

/// Runs `op` inside a pool with `threads` workers (0 = rayon default).
pub fn with_threads<R: Send>(threads: usize, op: impl FnOnce() -> R + Send) -> R {
    if threads == 0 {
        return op();
    }
    match rayon::ThreadPoolBuilder::new().num_threads(threads).build() {
        Ok(pool) => pool.install(op),
        Err(_) => op(),
    }
}
