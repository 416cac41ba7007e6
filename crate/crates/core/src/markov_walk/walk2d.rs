//! Planar lattice walks: return counts, return probabilities and the
//! exponential limit of the number of returns.

use std::fmt;
use std::str::FromStr;

use crate::error::{domain, Error, Result};
use crate::metrics::{dk_vs_exp, dw_vs_exp, DistanceReport, EmpiricalSample};
use crate::numeric::csum;
use crate::rng::{replicate, StreamKey};
use crate::stats::{batch_se, DEFAULT_BATCHES};
use rand::Rng;
use serde::{Deserialize, Serialize};

const MEAN_TOLERANCE: f64 = 1e-12;
const DP_CELL_CAP: usize = 1 << 26;

#[derive(Debug, Clone, PartialEq)]
enum LawName {
    Simple,
    Lazy(f64),
    Explicit,
}

#[derive(Debug, Clone)]
enum StepSampler {
    /// `2^bits` equally likely steps, several steps per random word.
    Bits { bits: u32 },
    Uniform,
    Inverse { cdf: Vec<f64> },
}

/// Step law on `Z^2` with finite support and mean zero, plus the
/// irreducibility and aperiodicity flags asserted for it.
#[derive(Debug, Clone)]
pub struct Walk2DSpec {
    name: LawName,
    steps: Vec<(i64, i64)>,
    probs: Vec<f64>,
    irreducible: bool,
    aperiodic: bool,
    sampler: StepSampler,
}

impl PartialEq for Walk2DSpec {
    fn eq(&self, other: &Self) -> bool {
        self.name == other.name
            && self.steps == other.steps
            && self.probs == other.probs
            && self.irreducible == other.irreducible
            && self.aperiodic == other.aperiodic
    }
}

impl Walk2DSpec {
    /// Explicit step law. The mean is recomputed and must vanish.
    pub fn new(
        steps: Vec<((i64, i64), f64)>,
        irreducible: bool,
        aperiodic: bool,
    ) -> Result<Self> {
        Self::build(LawName::Explicit, steps, irreducible, aperiodic)
    }

    /// Nearest-neighbour walk, each direction with probability 1/4.
    pub fn simple() -> Self {
        let steps = [(1, 0), (-1, 0), (0, 1), (0, -1)].map(|s| (s, 0.25)).to_vec();
        Self::build(LawName::Simple, steps, true, false).expect("simple walk is valid")
    }

    /// Stays put with probability `stay`, otherwise a simple-walk step.
    pub fn lazy(stay: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&stay) {
            return Err(Error::InvalidWalk(format!("lazy: stay probability {stay} not in [0,1]")));
        }
        let move_p = (1.0 - stay) / 4.0;
        let steps = vec![
            ((0, 0), stay),
            ((1, 0), move_p),
            ((-1, 0), move_p),
            ((0, 1), move_p),
            ((0, -1), move_p),
        ];
        let moving = stay < 1.0;
        Self::build(LawName::Lazy(stay), steps, moving, stay > 0.0)
    }

    fn build(
        name: LawName,
        pairs: Vec<((i64, i64), f64)>,
        irreducible: bool,
        aperiodic: bool,
    ) -> Result<Self> {
        let pairs: Vec<_> = pairs.into_iter().filter(|&(_, p)| p != 0.0).collect();
        if pairs.is_empty() {
            return Err(Error::InvalidWalk("empty step law".into()));
        }
        if pairs.iter().any(|&(_, p)| !(p.is_finite() && p > 0.0)) {
            return Err(Error::InvalidWalk("probabilities must be nonnegative".into()));
        }
        let total = csum(pairs.iter().map(|&(_, p)| p));
        if (total - 1.0).abs() > MEAN_TOLERANCE {
            return Err(Error::InvalidWalk(format!("probabilities sum to {total}")));
        }
        let mx = csum(pairs.iter().map(|&((dx, _), p)| dx as f64 * p));
        let my = csum(pairs.iter().map(|&((_, dy), p)| dy as f64 * p));
        if mx.abs() > MEAN_TOLERANCE || my.abs() > MEAN_TOLERANCE {
            return Err(Error::InvalidWalk(format!("step mean ({mx}, {my}) is not zero")));
        }
        let (steps, probs): (Vec<_>, Vec<_>) = pairs.into_iter().unzip();
        let k = steps.len();
        let equal = probs.iter().all(|&p| (p - probs[0]).abs() <= 1e-15);
        let sampler = if equal && k.is_power_of_two() {
            StepSampler::Bits {
                bits: k.trailing_zeros(),
            }
        } else if equal {
            StepSampler::Uniform
        } else {
            let mut acc = 0.0;
            let cdf = probs
                .iter()
                .map(|p| {
                    acc += p;
                    acc
                })
                .collect();
            StepSampler::Inverse { cdf }
        };
        Ok(Self {
            name,
            steps,
            probs,
            irreducible,
            aperiodic,
            sampler,
        })
    }

    /// Overrides the asserted hypothesis flags.
    pub fn with_flags(mut self, irreducible: bool, aperiodic: bool) -> Self {
        self.irreducible = irreducible;
        self.aperiodic = aperiodic;
        self
    }

    pub fn steps(&self) -> impl Iterator<Item = ((i64, i64), f64)> + '_ {
        self.steps.iter().copied().zip(self.probs.iter().copied())
    }

    pub fn irreducible(&self) -> bool {
        self.irreducible
    }

    pub fn aperiodic(&self) -> bool {
        self.aperiodic
    }

    fn max_radius(&self) -> usize {
        self.steps
            .iter()
            .map(|&(dx, dy)| dx.unsigned_abs().max(dy.unsigned_abs()) as usize)
            .max()
            .unwrap_or(0)
    }

    /// Walks `n` steps from the origin, calling `visit(t, at_origin)` for
    /// `t = 1..=n`.
    fn walk<R: Rng + ?Sized>(&self, n: u64, rng: &mut R, mut visit: impl FnMut(u64, bool)) {
        let (mut x, mut y) = (0i64, 0i64);
        match &self.sampler {
            StepSampler::Bits { bits } => {
                let bits = *bits;
                let mask = (1u64 << bits) - 1;
                let per_word = 64u32.checked_div(bits).unwrap_or(u32::MAX);
                let mut word = 0u64;
                let mut left = 0u32;
                for t in 1..=n {
                    if left == 0 {
                        word = rng.random();
                        left = per_word;
                    }
                    let (dx, dy) = self.steps[(word & mask) as usize];
                    word = word.checked_shr(bits).unwrap_or(0);
                    left -= 1;
                    x += dx;
                    y += dy;
                    visit(t, x == 0 && y == 0);
                }
            }
            StepSampler::Uniform => {
                let k = self.steps.len();
                for t in 1..=n {
                    let (dx, dy) = self.steps[rng.random_range(0..k)];
                    x += dx;
                    y += dy;
                    visit(t, x == 0 && y == 0);
                }
            }
            StepSampler::Inverse { cdf } => {
                let last = cdf.len() - 1;
                for t in 1..=n {
                    let u: f64 = rng.random();
                    let (dx, dy) = self.steps[cdf.partition_point(|&c| c <= u).min(last)];
                    x += dx;
                    y += dy;
                    visit(t, x == 0 && y == 0);
                }
            }
        }
    }

    /// Return counts by each time in the ascending `grid`, from one path.
    pub fn returns_on_grid<R: Rng + ?Sized>(&self, grid: &[u64], rng: &mut R) -> Vec<u64> {
        let mut out = vec![0; grid.len()];
        let Some(&n_max) = grid.last() else {
            return out;
        };
        let mut count = 0u64;
        let mut slot = 0;
        self.walk(n_max, rng, |t, home| {
            count += u64::from(home);
            while slot < grid.len() && grid[slot] == t {
                out[slot] = count;
                slot += 1;
            }
        });
        out
    }

    /// Indicators of being at the origin at each time in the ascending `grid`.
    pub fn origin_on_grid<R: Rng + ?Sized>(&self, grid: &[u64], rng: &mut R) -> Vec<bool> {
        let mut out = vec![false; grid.len()];
        let Some(&n_max) = grid.last() else {
            return out;
        };
        let mut slot = 0;
        self.walk(n_max, rng, |t, home| {
            while slot < grid.len() && grid[slot] == t {
                out[slot] = home;
                slot += 1;
            }
        });
        out
    }
}

impl fmt::Display for Walk2DSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.name {
            LawName::Simple => write!(f, "simple"),
            LawName::Lazy(p) => write!(f, "lazy({p})"),
            LawName::Explicit => {
                write!(f, "steps:[")?;
                for (i, ((dx, dy), p)) in self.steps().enumerate() {
                    if i > 0 {
                        write!(f, ";")?;
                    }
                    write!(f, "{dx},{dy}:{p}")?;
                }
                write!(f, "]")
            }
        }
    }
}

impl FromStr for Walk2DSpec {
    type Err = Error;

    /// `simple`, `lazy(p)` or `steps:[dx,dy:p;...]`. Explicit laws carry no
    /// hypothesis flags until [`Walk2DSpec::with_flags`] sets them.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = |why: &str| Error::InvalidWalk(format!("cannot parse {s:?}: {why}"));
        if s == "simple" {
            return Ok(Self::simple());
        }
        if let Some(inner) = s.strip_prefix("lazy(").and_then(|r| r.strip_suffix(')')) {
            let p: f64 = inner.trim().parse().map_err(|_| bad("stay probability"))?;
            return Self::lazy(p);
        }
        let inner = s
            .strip_prefix("steps:[")
            .and_then(|r| r.strip_suffix(']'))
            .ok_or_else(|| bad("expected simple, lazy(p) or steps:[dx,dy:p;...]"))?;
        let mut pairs = Vec::new();
        for item in inner.split(';').filter(|t| !t.trim().is_empty()) {
            let (vec, p) = item.split_once(':').ok_or_else(|| bad("missing ':'"))?;
            let (dx, dy) = vec.split_once(',').ok_or_else(|| bad("missing ','"))?;
            let dx: i64 = dx.trim().parse().map_err(|_| bad("step coordinate"))?;
            let dy: i64 = dy.trim().parse().map_err(|_| bad("step coordinate"))?;
            let p: f64 = p.trim().parse().map_err(|_| bad("probability"))?;
            pairs.push(((dx, dy), p));
        }
        Self::new(pairs, false, false)
    }
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum RawWalk {
    Name(String),
    Full {
        law: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        irreducible: Option<bool>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        aperiodic: Option<bool>,
    },
}

impl Serialize for Walk2DSpec {
    fn serialize<S: serde::Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        RawWalk::Full {
            law: self.to_string(),
            irreducible: Some(self.irreducible),
            aperiodic: Some(self.aperiodic),
        }
        .serialize(ser)
    }
}

impl<'de> Deserialize<'de> for Walk2DSpec {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        let (law, irr, aper) = match RawWalk::deserialize(de)? {
            RawWalk::Name(law) => (law, None, None),
            RawWalk::Full {
                law,
                irreducible,
                aperiodic,
            } => (law, irreducible, aperiodic),
        };
        let spec: Walk2DSpec = law.parse().map_err(serde::de::Error::custom)?;
        let irreducible = irr.unwrap_or(spec.irreducible);
        let aperiodic = aper.unwrap_or(spec.aperiodic);
        Ok(spec.with_flags(irreducible, aperiodic))
    }
}

/// Returns to the origin at times `1..=n`.
pub fn walk2d_returns<R: Rng + ?Sized>(spec: &Walk2DSpec, n: u64, rng: &mut R) -> u64 {
    spec.returns_on_grid(&[n], rng)[0]
}

fn check_grid(grid: &[u64]) -> Result<()> {
    if grid.is_empty() || grid[0] == 0 || grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(domain("n_grid", "must be nonempty, positive and strictly ascending"));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReturnRow {
    pub n: u64,
    pub p_hat: f64,
    pub se: f64,
    pub n_p_hat: f64,
}

/// Monte Carlo `P[Z_n = 0]` along `n_grid`, all grid points read off the
/// same paths.
pub fn return_prob_curve(
    spec: &Walk2DSpec,
    n_grid: &[u64],
    reps: usize,
    key: StreamKey,
) -> Result<Vec<ReturnRow>> {
    if !spec.aperiodic {
        return Err(Error::Hypothesis(
            "the 1/n return-probability band requires an aperiodic walk".into(),
        ));
    }
    check_grid(n_grid)?;
    if reps < 2 {
        return Err(domain("return_prob_curve", "requires reps >= 2"));
    }
    let hits = replicate(key, reps, |_, rng| spec.origin_on_grid(n_grid, rng));
    Ok(n_grid
        .iter()
        .enumerate()
        .map(|(slot, &n)| {
            let k = hits.iter().filter(|h| h[slot]).count() as f64;
            let p_hat = k / reps as f64;
            let se = (p_hat * (1.0 - p_hat) / (reps as f64 - 1.0)).sqrt();
            ReturnRow {
                n,
                p_hat,
                se,
                n_p_hat: n as f64 * p_hat,
            }
        })
        .collect())
}

/// Exact `P[Z_t = 0]` for `t = 1..=n` by propagating the full law of `Z_t`.
pub fn exact_origin_probs(spec: &Walk2DSpec, n: usize) -> Result<Vec<f64>> {
    let r = spec.max_radius();
    let half = r * n;
    let side = 2 * half + 1;
    if side.saturating_mul(side) > DP_CELL_CAP {
        return Err(Error::CapExceeded(format!(
            "exact_origin_probs: {side}x{side} grid exceeds {DP_CELL_CAP} cells"
        )));
    }
    let mut cur = vec![0.0; side * side];
    let mut next = vec![0.0; side * side];
    cur[half * side + half] = 1.0;
    let mut out = Vec::with_capacity(n);
    for t in 0..n {
        // support of Z_t lies within radius r t of the origin
        let lo = half - r * t;
        let hi = half + r * t;
        next.iter_mut().for_each(|v| *v = 0.0);
        for i in lo..=hi {
            for j in lo..=hi {
                let mass = cur[i * side + j];
                if mass == 0.0 {
                    continue;
                }
                for (&(dx, dy), &p) in spec.steps.iter().zip(&spec.probs) {
                    let ii = (i as i64 + dx) as usize;
                    let jj = (j as i64 + dy) as usize;
                    next[ii * side + jj] += mass * p;
                }
            }
        }
        std::mem::swap(&mut cur, &mut next);
        out.push(cur[half * side + half]);
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErdosTaylorRow {
    pub n: u64,
    pub mean_r: f64,
    pub lambda_hat: f64,
    pub dk: f64,
    pub dk_se: f64,
    pub dw: f64,
    pub dw_se: f64,
    pub inv_log_n: f64,
    pub dw_log_n: f64,
}

/// Distance of `R / E R` to Exp(1) along `n_grid`, with `E R` replaced by
/// the sample mean. Grid points share paths, so neighbouring rows are
/// positively correlated.
pub fn erdos_taylor_experiment(
    spec: &Walk2DSpec,
    n_grid: &[u64],
    reps: usize,
    key: StreamKey,
) -> Result<Vec<ErdosTaylorRow>> {
    if reps < 1000 {
        return Err(domain("erdos_taylor_experiment", "requires reps >= 1000"));
    }
    check_grid(n_grid)?;
    let counts = replicate(key, reps, |_, rng| spec.returns_on_grid(n_grid, rng));
    n_grid
        .iter()
        .enumerate()
        .map(|(slot, &n)| {
            let r: Vec<f64> = counts.iter().map(|c| c[slot] as f64).collect();
            let mean_r = csum(r.iter().copied()) / r.len() as f64;
            if mean_r == 0.0 {
                return Err(domain(
                    "erdos_taylor_experiment",
                    format!("no returns observed by n={n}"),
                ));
            }
            let lambda_hat = 1.0 / mean_r;
            let w: Vec<f64> = r.iter().map(|x| x * lambda_hat).collect();
            let report = DistanceReport::from_values(w)?;
            // each batch normalises by its own mean so the plug-in error
            // shows up in the spread
            let rescaled = |b: &[f64], metric: fn(&EmpiricalSample) -> f64| {
                let m = csum(b.iter().copied()) / b.len() as f64;
                if m == 0.0 {
                    return f64::NAN;
                }
                EmpiricalSample::new(b.iter().map(|x| x / m).collect())
                    .map(|s| metric(&s))
                    .unwrap_or(f64::NAN)
            };
            let dk_se = batch_se(&r, DEFAULT_BATCHES, |b| rescaled(b, dk_vs_exp));
            let dw_se = batch_se(&r, DEFAULT_BATCHES, |b| rescaled(b, dw_vs_exp));
            let log_n = (n as f64).ln();
            Ok(ErdosTaylorRow {
                n,
                mean_r,
                lambda_hat,
                dk: report.dk,
                dk_se,
                dw: report.dw,
                dw_se,
                inv_log_n: 1.0 / log_n,
                dw_log_n: report.dw * log_n,
            })
        })
        .collect()
}
