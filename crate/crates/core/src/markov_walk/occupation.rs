//! Occupation times of a designated state of a finite Markov chain.
//!
//! `W = lambda sum_{i=1}^n X_i` with `X_i` the indicator of being back in
//! the start state at time `i`. By the strong Markov property the
//! equilibrium version is `lambda sum_{i=1}^{n-I} X'_i + lambda U`, where
//! `P[I = i] = lambda E X_i` and `X'` is an independent copy of the path.

use crate::error::{Error, Result};
use crate::numeric::csum;
use crate::rng::{replicate, StreamKey};
use rand::Rng;
use serde::{Deserialize, Serialize};

/// Finite chain with a row-stochastic transition matrix and a start state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawChain", into = "RawChain")]
pub struct ChainSpec {
    states: Vec<String>,
    transition: Vec<Vec<f64>>,
    start: usize,
    cumulative: Vec<Vec<f64>>,
}

#[derive(Serialize, Deserialize)]
struct RawChain {
    #[serde(default)]
    states: Vec<String>,
    matrix: Vec<Vec<f64>>,
    start: usize,
}

impl TryFrom<RawChain> for ChainSpec {
    type Error = Error;
    fn try_from(raw: RawChain) -> Result<Self> {
        ChainSpec::new(raw.states, raw.matrix, raw.start)
    }
}

impl From<ChainSpec> for RawChain {
    fn from(c: ChainSpec) -> Self {
        RawChain {
            states: c.states,
            matrix: c.transition,
            start: c.start,
        }
    }
}

impl ChainSpec {
    /// `states` may be empty, in which case states are labelled by index.
    pub fn new(states: Vec<String>, transition: Vec<Vec<f64>>, start: usize) -> Result<Self> {
        let k = transition.len();
        if k == 0 {
            return Err(Error::InvalidChain("empty transition matrix".into()));
        }
        let states = if states.is_empty() {
            (0..k).map(|i| i.to_string()).collect()
        } else {
            states
        };
        if states.len() != k {
            return Err(Error::InvalidChain(format!("{} labels for {k} states", states.len())));
        }
        if start >= k {
            return Err(Error::InvalidChain(format!("start state {start} out of range")));
        }
        for (i, row) in transition.iter().enumerate() {
            if row.len() != k {
                return Err(Error::InvalidChain(format!("row {i} has {} entries", row.len())));
            }
            if row.iter().any(|p| !(p.is_finite() && *p >= 0.0)) {
                return Err(Error::InvalidChain(format!("row {i} has a negative entry")));
            }
            let s = csum(row.iter().copied());
            if (s - 1.0).abs() > 1e-12 {
                return Err(Error::InvalidChain(format!("row {i} sums to {s}")));
            }
        }
        let cumulative = transition
            .iter()
            .map(|row| {
                let mut acc = 0.0;
                row.iter()
                    .map(|p| {
                        acc += p;
                        acc
                    })
                    .collect()
            })
            .collect();
        Ok(Self {
            states,
            transition,
            start,
            cumulative,
        })
    }

    /// Chain with uniformly random rows (normalised i.i.d. uniforms).
    pub fn random<R: Rng + ?Sized>(rng: &mut R, k: usize) -> Self {
        let rows = (0..k)
            .map(|_| {
                let w: Vec<f64> = (0..k).map(|_| rng.random::<f64>() + 1e-3).collect();
                let s = csum(w.iter().copied());
                w.into_iter().map(|x| x / s).collect()
            })
            .collect();
        Self::new(Vec::new(), rows, 0).expect("normalised rows")
    }

    pub fn states(&self) -> &[String] {
        &self.states
    }

    pub fn start(&self) -> usize {
        self.start
    }

    pub fn len(&self) -> usize {
        self.transition.len()
    }

    pub fn is_empty(&self) -> bool {
        self.transition.is_empty()
    }

    fn next_state<R: Rng + ?Sized>(&self, state: usize, rng: &mut R) -> usize {
        let row = &self.cumulative[state];
        let u: f64 = rng.random();
        row.partition_point(|&c| c <= u).min(row.len() - 1)
    }

    /// Visits to the start state at times `1..=steps` of a fresh path.
    pub fn count_returns<R: Rng + ?Sized>(&self, steps: usize, rng: &mut R) -> u64 {
        let mut state = self.start;
        let mut visits = 0;
        for _ in 0..steps {
            state = self.next_state(state, rng);
            visits += u64::from(state == self.start);
        }
        visits
    }
}

/// `E X_i = P^i(start, start)` for `i = 1..=n`.
pub fn expected_occupations(chain: &ChainSpec, n: usize) -> Vec<f64> {
    let k = chain.len();
    let mut dist = vec![0.0; k];
    dist[chain.start] = 1.0;
    let mut out = Vec::with_capacity(n);
    for _ in 0..n {
        let mut next = vec![0.0; k];
        for (from, &mass) in dist.iter().enumerate() {
            if mass == 0.0 {
                continue;
            }
            for (to, &p) in chain.transition[from].iter().enumerate() {
                next[to] += mass * p;
            }
        }
        dist = next;
        out.push(dist[chain.start]);
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OccupationDraw {
    pub w: f64,
    pub w_e: f64,
    pub gap: f64,
    /// Visits on the `W` path.
    pub visits: u64,
    /// The index `I`.
    pub index: usize,
}

/// Precomputed `lambda` and index law for repeated coupled draws.
#[derive(Debug, Clone)]
pub struct OccupationCoupler {
    chain: ChainSpec,
    n: usize,
    means: Vec<f64>,
    lambda: f64,
    index_cdf: Vec<f64>,
}

impl OccupationCoupler {
    pub fn new(chain: &ChainSpec, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(crate::error::domain("occupation_couple", "requires n >= 1"));
        }
        let means = expected_occupations(chain, n);
        let total = csum(means.iter().copied());
        if !(total > 0.0) {
            return Err(crate::error::domain(
                "occupation_couple",
                "start state is never revisited",
            ));
        }
        let lambda = 1.0 / total;
        let mut acc = 0.0;
        let index_cdf = means
            .iter()
            .map(|m| {
                acc += lambda * m;
                acc
            })
            .collect();
        Ok(Self {
            chain: chain.clone(),
            n,
            means,
            lambda,
            index_cdf,
        })
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn means(&self) -> &[f64] {
        &self.means
    }

    pub fn couple<R: Rng + ?Sized>(&self, rng: &mut R) -> OccupationDraw {
        let visits = self.chain.count_returns(self.n, rng);
        let u: f64 = rng.random();
        // 1-based index I with P[I = i] = lambda E X_i
        let index = self.index_cdf.partition_point(|&c| c <= u).min(self.n - 1) + 1;
        let tail_visits = self.chain.count_returns(self.n - index, rng);
        let v: f64 = rng.random();
        let w = self.lambda * visits as f64;
        let w_e = self.lambda * (tail_visits as f64 + v);
        OccupationDraw {
            w,
            w_e,
            gap: (w - w_e).abs(),
            visits,
            index,
        }
    }
}

/// One coupled draw `(W, W^e)`.
pub fn occupation_couple<R: Rng + ?Sized>(
    chain: &ChainSpec,
    n: usize,
    rng: &mut R,
) -> Result<OccupationDraw> {
    Ok(OccupationCoupler::new(chain, n)?.couple(rng))
}

/// `reps` independent coupled draws on deterministic substreams.
pub fn occupation_draws(
    chain: &ChainSpec,
    n: usize,
    reps: usize,
    key: StreamKey,
) -> Result<Vec<OccupationDraw>> {
    let coupler = OccupationCoupler::new(chain, n)?;
    Ok(replicate(key, reps, |_, rng| coupler.couple(rng)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bounds::occupation_bound;
    use crate::metrics::DistanceReport;
    use crate::stats::{batch_se, Estimate};

    fn flip() -> ChainSpec {
        ChainSpec::new(Vec::new(), vec![vec![0.0, 1.0], vec![1.0, 0.0]], 0).unwrap()
    }

    #[test]
    fn expected_occupation_examples() {
        assert_eq!(expected_occupations(&flip(), 5), vec![0.0, 1.0, 0.0, 1.0, 0.0]);
        let single = ChainSpec::new(Vec::new(), vec![vec![1.0]], 0).unwrap();
        assert_eq!(expected_occupations(&single, 4), vec![1.0; 4]);
    }

    #[test]
    fn expected_occupations_match_simulation() {
        let mut rng = StreamKey::new(31).substream(0);
        let chain = ChainSpec::random(&mut rng, 5);
        let n = 8;
        let exact = expected_occupations(&chain, n);
        let paths: Vec<Vec<bool>> = replicate(StreamKey::new(32), 100_000, |_, rng| {
            let mut s = chain.start;
            (0..n)
                .map(|_| {
                    s = chain.next_state(s, rng);
                    s == chain.start
                })
                .collect()
        });
        for i in 0..n {
            let p = paths.iter().filter(|p| p[i]).count() as f64 / paths.len() as f64;
            let se = (exact[i] * (1.0 - exact[i]) / paths.len() as f64).sqrt();
            assert!((p - exact[i]).abs() <= 3.0 * se, "i={i}: {p} vs {}", exact[i]);
        }
    }

    #[test]
    fn single_state_chain_gives_uniform_equilibrium() {
        let single = ChainSpec::new(vec!["a".into()], vec![vec![1.0]], 0).unwrap();
        let draws = occupation_draws(&single, 10, 50_000, StreamKey::new(33)).unwrap();
        assert!(draws.iter().all(|d| d.w == 1.0));
        let we: Vec<f64> = draws.iter().map(|d| d.w_e).collect();
        let report = DistanceReport::from_values(we.clone()).unwrap();
        assert!(report.dk < 1.0);
        let mut sorted = we;
        sorted.sort_by(f64::total_cmp);
        for q in [0.1, 0.25, 0.5, 0.75, 0.9] {
            let emp = sorted.partition_point(|&x| x <= q) as f64 / sorted.len() as f64;
            assert!((emp - q).abs() < 0.01);
        }
    }

    #[test]
    fn flip_chain_gap_matches_enumeration() {
        // W = 1; I in {2, 4} equally likely; W^e = (1 + U)/2 or U/2: E gap = 1/2
        let draws = occupation_draws(&flip(), 4, 50_000, StreamKey::new(34)).unwrap();
        assert!(draws.iter().all(|d| d.w == 1.0 && (d.index == 2 || d.index == 4)));
        let gaps: Vec<f64> = draws.iter().map(|d| d.gap).collect();
        let est = Estimate::from_values(&gaps);
        assert!(est.covers(0.5, 3.0), "{est:?}");
    }

    #[test]
    fn equilibrium_relation_between_marginals() {
        let mut rng = StreamKey::new(35).substream(0);
        let chain = ChainSpec::random(&mut rng, 4);
        let draws = occupation_draws(&chain, 20, 100_000, StreamKey::new(36)).unwrap();
        let mut w: Vec<f64> = draws.iter().map(|d| d.w).collect();
        w.sort_by(f64::total_cmp);
        let n = w.len() as f64;
        for x in [0.25, 0.5, 1.0, 1.5, 2.0] {
            // P[W^e <= x] vs int_0^x P[W > y] dy (E W = 1)
            let ind: Vec<f64> = draws.iter().map(|d| f64::from(u8::from(d.w_e <= x))).collect();
            let lhs = Estimate::from_values(&ind);
            let integrand: Vec<f64> = draws.iter().map(|d| d.w.min(x)).collect();
            let rhs = Estimate::from_values(&integrand);
            let se = (lhs.se.powi(2) + rhs.se.powi(2)).sqrt();
            assert!((lhs.mean - rhs.mean).abs() <= 3.0 * se, "x={x}");
            let _ = n;
        }
    }

    #[test]
    fn corollary_bound_holds_for_random_chain() {
        let mut rng = StreamKey::new(37).substream(0);
        let chain = ChainSpec::random(&mut rng, 5);
        let n = 50;
        let draws = occupation_draws(&chain, n, 20_000, StreamKey::new(38)).unwrap();
        let w: Vec<f64> = draws.iter().map(|d| d.w).collect();
        let dw = DistanceReport::from_values(w.clone()).unwrap().dw;
        let se = batch_se(&w, 20, |b| DistanceReport::from_values(b.to_vec()).unwrap().dw);
        let bound = occupation_bound(&expected_occupations(&chain, n)).unwrap();
        assert!(dw <= bound + 3.0 * se);
    }

    #[test]
    fn chain_validation() {
        assert!(ChainSpec::new(Vec::new(), vec![], 0).is_err());
        assert!(ChainSpec::new(Vec::new(), vec![vec![0.5, 0.4], vec![0.0, 1.0]], 0).is_err());
        assert!(ChainSpec::new(Vec::new(), vec![vec![1.0]], 1).is_err());
        assert!(ChainSpec::new(vec!["a".into()], vec![vec![0.0, 1.0], vec![1.0, 0.0]], 0).is_err());
        let never = ChainSpec::new(Vec::new(), vec![vec![0.0, 1.0], vec![0.0, 1.0]], 0).unwrap();
        assert!(OccupationCoupler::new(&never, 5).is_err());
    }

    #[test]
    fn chain_json_round_trip() {
        let json = r#"{"states":["a","b"],"matrix":[[0.0,1.0],[0.5,0.5]],"start":1}"#;
        let chain: ChainSpec = serde_json::from_str(json).unwrap();
        assert_eq!(chain.start(), 1);
        assert_eq!(serde_json::to_string(&chain).unwrap(), json);
        assert!(serde_json::from_str::<ChainSpec>(r#"{"matrix":[[0.3]],"start":0}"#).is_err());
    }
}
