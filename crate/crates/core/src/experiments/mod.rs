//! Batch experiments: a JSON config in, a deterministic [`RunReport`] out.
//!
//! Each experiment kind owns a fixed RNG namespace and each table row a
//! fixed sub-namespace, so the random numbers behind every row depend only
//! on the master seed.

mod gw;
mod report;
mod sweep;
mod verify;
mod walks;

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::dist_core::{DiscretePmf, LawSpec};
use crate::error::{Error, Result};
use crate::markov_walk::{ChainSpec, Walk2DSpec};
use crate::metrics::{dk_vs_exp, dw_vs_exp, DistanceReport, EmpiricalSample};
use crate::rng::{with_threads, StreamKey};
use crate::stats::{batch_se, DEFAULT_BATCHES};

pub use report::{RunReport, Status, Verdict, SE_MARGIN};
pub use sweep::{lemma1_sweep, occupation_bound_brute, simplified_bound_checks, NamedGridCheck};
pub use verify::verify_suite;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    GwBound,
    GwCouple,
    GwDw,
    Occupation,
    Walk2d,
    Verify,
    BoundsSweep,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 7] = [
        ExperimentKind::GwBound,
        ExperimentKind::GwCouple,
        ExperimentKind::GwDw,
        ExperimentKind::Occupation,
        ExperimentKind::Walk2d,
        ExperimentKind::Verify,
        ExperimentKind::BoundsSweep,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::GwBound => "gw-bound",
            ExperimentKind::GwCouple => "gw-couple",
            ExperimentKind::GwDw => "gw-dw",
            ExperimentKind::Occupation => "occupation",
            ExperimentKind::Walk2d => "walk2d",
            ExperimentKind::Verify => "verify",
            ExperimentKind::BoundsSweep => "bounds-sweep",
        }
    }

    fn namespace(self) -> u64 {
        match self {
            ExperimentKind::GwBound => 1,
            ExperimentKind::GwCouple => 2,
            ExperimentKind::GwDw => 3,
            ExperimentKind::Occupation => 4,
            ExperimentKind::Walk2d => 5,
            ExperimentKind::Verify => 6,
            ExperimentKind::BoundsSweep => 7,
        }
    }

    fn uses_reps(self) -> bool {
        matches!(
            self,
            ExperimentKind::GwCouple
                | ExperimentKind::GwDw
                | ExperimentKind::Occupation
                | ExperimentKind::Walk2d
        )
    }

    /// Column names and meanings of the CSV table.
    pub fn schema(self) -> &'static [(&'static str, &'static str)] {
        match self {
            ExperimentKind::GwBound => gw::BOUND_COLUMNS,
            ExperimentKind::GwCouple => gw::COUPLE_COLUMNS,
            ExperimentKind::GwDw => gw::DW_COLUMNS,
            ExperimentKind::Occupation => walks::OCCUPATION_COLUMNS,
            ExperimentKind::Walk2d => walks::WALK_COLUMNS,
            ExperimentKind::Verify => verify::COLUMNS,
            ExperimentKind::BoundsSweep => sweep::COLUMNS,
        }
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ExperimentKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown experiment kind {s:?}")))
    }
}

/// One experiment, as read from a JSON document.
///
/// Parallelism, output paths and the timing switch do not influence
/// results and are left out of the echo stored in reports.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub law: Option<LawSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chain: Option<ChainSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub walk: Option<Walk2DSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_grid: Option<Vec<u64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reps: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// bounds-sweep: number of `m` values per side of 1.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m_points: Option<usize>,
    /// bounds-sweep: largest `n` on the log grid.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_max: Option<u64>,
    #[serde(default, skip_serializing)]
    pub threads: usize,
    #[serde(default, skip_serializing)]
    pub out_csv: Option<PathBuf>,
    #[serde(default, skip_serializing)]
    pub out_json: Option<PathBuf>,
    #[serde(default, skip_serializing)]
    pub timing: bool,
}

fn field(name: &str, msg: impl fmt::Display) -> Error {
    Error::Config(format!("field `{name}`: {msg}"))
}

impl ExperimentConfig {
    pub fn new(experiment: ExperimentKind) -> Self {
        Self {
            experiment,
            law: None,
            chain: None,
            walk: None,
            n: None,
            n_grid: None,
            reps: None,
            seed: None,
            m_points: None,
            n_max: None,
            threads: 0,
            out_csv: None,
            out_json: None,
            timing: false,
        }
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::Config(format!("config: {e}")))
    }

    pub fn seed(&self) -> Result<u64> {
        self.seed.ok_or_else(|| field("seed", "required (there is no clock-based default)"))
    }

    fn reps(&self) -> Result<usize> {
        match self.reps {
            None => Err(field("reps", format!("required for {}", self.experiment))),
            Some(0) => Err(field("reps", "must be at least 1")),
            Some(r) => Ok(r),
        }
    }

    /// `n_grid`, or the single `n`.
    pub fn grid(&self) -> Result<Vec<u64>> {
        let grid = match (&self.n, &self.n_grid) {
            (Some(_), Some(_)) => return Err(field("n_grid", "give either `n` or `n_grid`, not both")),
            (Some(n), None) => vec![*n],
            (None, Some(g)) => g.clone(),
            (None, None) => {
                return Err(field("n", format!("`n` or `n_grid` required for {}", self.experiment)))
            }
        };
        if grid.is_empty() {
            return Err(field("n_grid", "must not be empty"));
        }
        if grid[0] == 0 {
            return Err(field("n", "must be at least 1"));
        }
        if grid.windows(2).any(|w| w[0] >= w[1]) {
            return Err(field("n_grid", "must be strictly ascending"));
        }
        Ok(grid)
    }

    fn law(&self) -> Result<DiscretePmf> {
        let spec = self
            .law
            .as_ref()
            .ok_or_else(|| field("law", format!("required for {}", self.experiment)))?;
        spec.build().map_err(|e| field("law", e))
    }

    fn chain(&self) -> Result<&ChainSpec> {
        self.chain
            .as_ref()
            .ok_or_else(|| field("chain", format!("required for {}", self.experiment)))
    }

    fn walk(&self) -> Result<&Walk2DSpec> {
        self.walk
            .as_ref()
            .ok_or_else(|| field("walk", format!("required for {}", self.experiment)))
    }

    /// Field-level checks that do not need any computation.
    pub fn validate(&self) -> Result<()> {
        self.seed()?;
        use ExperimentKind::*;
        if self.experiment.uses_reps() {
            self.reps()?;
        }
        match self.experiment {
            GwBound | GwCouple | GwDw => {
                self.law()?;
                let grid = self.grid()?;
                if *grid.last().expect("nonempty") > u64::from(u32::MAX) {
                    return Err(field("n", "too large"));
                }
            }
            Occupation => {
                self.chain()?;
                self.grid()?;
            }
            Walk2d => {
                self.walk()?;
                self.grid()?;
                if self.reps()? < 1000 {
                    return Err(field("reps", "walk2d needs at least 1000 paths"));
                }
            }
            BoundsSweep => {
                if self.m_points == Some(0) {
                    return Err(field("m_points", "must be at least 1"));
                }
                if matches!(self.n_max, Some(n) if n < 2) {
                    return Err(field("n_max", "must be at least 2"));
                }
            }
            Verify => {}
        }
        Ok(())
    }

    /// Stream key for table row `slot`.
    fn key(&self, slot: u64) -> Result<StreamKey> {
        Ok(StreamKey::new(self.seed()?).with_namespace(self.experiment.namespace() << 32 | slot))
    }
}

/// Runs one experiment. The report depends only on the config and seed.
pub fn run(config: &ExperimentConfig) -> Result<RunReport> {
    config.validate()?;
    let start = Instant::now();
    let (columns, rows, verdicts) = with_threads(config.threads, || dispatch(config))?;
    Ok(RunReport {
        version: crate::VERSION.to_string(),
        config: config.clone(),
        columns: columns.iter().map(|(c, _)| c.to_string()).collect(),
        rows,
        verdicts,
        wall_time_secs: config.timing.then(|| start.elapsed().as_secs_f64()),
    })
}

type Table = (
    &'static [(&'static str, &'static str)],
    Vec<Vec<serde_json::Value>>,
    Vec<Verdict>,
);

fn dispatch(config: &ExperimentConfig) -> Result<Table> {
    use ExperimentKind::*;
    match config.experiment {
        GwBound => gw::bound_table(config),
        GwCouple => gw::couple_table(config),
        GwDw => gw::dw_table(config),
        Occupation => walks::occupation_table(config),
        Walk2d => walks::walk_table(config),
        BoundsSweep => sweep::sweep_table(config),
        Verify => verify::verify_table(config.seed()?),
    }
}

/// Human-readable dump of every CSV column of every experiment kind.
pub fn schema_text() -> String {
    let mut out = String::new();
    for kind in ExperimentKind::ALL {
        out.push_str(&kind_schema_text(kind));
        out.push('\n');
    }
    out
}

pub fn kind_schema_text(kind: ExperimentKind) -> String {
    let mut out = format!("{kind}\n");
    for (name, doc) in kind.schema() {
        out.push_str(&format!("  {name:<18} {doc}\n"));
    }
    out
}

/// Distances of `values` to Exp(1) with batch-means standard errors.
/// `values` must be in replicate order so batches are contiguous in it.
pub(crate) fn distances_with_se(values: &[f64]) -> Result<(DistanceReport, f64, f64)> {
    let report = DistanceReport::from_values(values.to_vec())?;
    let stat = |metric: fn(&EmpiricalSample) -> f64| {
        move |b: &[f64]| {
            EmpiricalSample::new(b.to_vec())
                .map(|s| metric(&s))
                .unwrap_or(f64::NAN)
        }
    };
    let dk_se = batch_se(values, DEFAULT_BATCHES, stat(dk_vs_exp));
    let dw_se = batch_se(values, DEFAULT_BATCHES, stat(dw_vs_exp));
    Ok((report, dk_se, dw_se))
}

#[cfg(test)]
mod tests;
