use std::io::Write;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::ExperimentConfig;
use crate::error::Result;

/// Multiple of the standard error inside which a violated bound is
/// reported as inconclusive rather than failed.
pub const SE_MARGIN: f64 = 3.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Inconclusive,
    Fail,
}

impl Status {
    pub fn label(self) -> &'static str {
        match self {
            Status::Pass => "PASS",
            Status::Inconclusive => "INCONCLUSIVE",
            Status::Fail => "FAIL",
        }
    }
}

/// Outcome of one `value <= threshold` comparison.
///
/// Deterministic checks (`se` absent) pass or fail outright. Monte Carlo
/// checks pass when the estimate is at or below the threshold, are
/// inconclusive within [`SE_MARGIN`] standard errors above it, and fail
/// beyond. `margin_se` is `(threshold - value) / se`, so negative values
/// measure the violation in SE units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub check: String,
    pub status: Status,
    pub value: Option<f64>,
    pub threshold: Option<f64>,
    pub se: Option<f64>,
    pub margin_se: Option<f64>,
}

fn finite(x: f64) -> Option<f64> {
    x.is_finite().then_some(x)
}

impl Verdict {
    pub fn exact(check: impl Into<String>, value: f64, threshold: f64) -> Self {
        let status = if value <= threshold {
            Status::Pass
        } else {
            Status::Fail
        };
        Self {
            check: check.into(),
            status,
            value: finite(value),
            threshold: finite(threshold),
            se: None,
            margin_se: None,
        }
    }

    pub fn upper(check: impl Into<String>, value: f64, threshold: f64, se: f64) -> Self {
        let status = if value <= threshold {
            Status::Pass
        } else if value <= threshold + SE_MARGIN * se {
            Status::Inconclusive
        } else {
            Status::Fail
        };
        Self {
            check: check.into(),
            status,
            value: finite(value),
            threshold: finite(threshold),
            se: finite(se),
            margin_se: finite((threshold - value) / se),
        }
    }

    /// Two-sided agreement: `|estimate - target| <= 3 se` passes.
    pub fn matches(check: impl Into<String>, estimate: f64, target: f64, se: f64) -> Self {
        Self::upper(check, (estimate - target).abs(), SE_MARGIN * se, se)
    }

    pub fn failed(&self) -> bool {
        self.status == Status::Fail
    }
}

/// Result of one experiment run.
///
/// Everything except `wall_time_secs` is a pure function of the config and
/// seed. The timing field is present only when requested, so default
/// reports are byte-identical across reruns and thread counts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub version: String,
    pub config: ExperimentConfig,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Value>>,
    pub verdicts: Vec<Verdict>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wall_time_secs: Option<f64>,
}

impl RunReport {
    /// No verdict failed (inconclusive ones count as passing).
    pub fn passed(&self) -> bool {
        !self.verdicts.iter().any(Verdict::failed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Verdict> {
        self.verdicts.iter().filter(|v| v.failed())
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    /// Writes the row table as CSV with a header row. Missing cells are
    /// empty.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(&self.columns)?;
        for row in &self.rows {
            w.write_record(row.iter().map(cell_text))?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        Ok(String::from_utf8(buf).expect("csv output is utf-8"))
    }
}

fn cell_text(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

/// Table cell from a float; non-finite values become empty cells.
pub(crate) fn num(x: f64) -> Value {
    Value::from(x)
}

pub(crate) fn int(x: u64) -> Value {
    Value::from(x)
}

pub(crate) fn opt(x: Option<f64>) -> Value {
    x.map_or(Value::Null, num)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn verdict_rule() {
        assert_eq!(Verdict::upper("a", 1.0, 1.0, 0.1).status, Status::Pass);
        assert_eq!(Verdict::upper("a", 1.2, 1.0, 0.1).status, Status::Inconclusive);
        assert_eq!(Verdict::upper("a", 1.31, 1.0, 0.1).status, Status::Fail);
        let v = Verdict::upper("a", 1.2, 1.0, 0.1);
        assert!((v.margin_se.unwrap() + 2.0).abs() < 1e-12);
        assert_eq!(Verdict::exact("b", 2.0, 1.0).status, Status::Fail);
        assert_eq!(Verdict::matches("c", 1.02, 1.0, 0.01).status, Status::Pass);
        assert_eq!(Verdict::matches("c", 0.95, 1.0, 0.01).status, Status::Inconclusive);
        let v = Verdict::exact("d", f64::INFINITY, 1.0);
        assert!(v.failed() && v.value.is_none());
    }

    #[test]
    fn cells() {
        assert_eq!(cell_text(&num(f64::NAN)), "");
        assert_eq!(cell_text(&num(0.1)), "0.1");
        assert_eq!(cell_text(&int(100_000)), "100000");
        assert_eq!(cell_text(&Value::from("x,y")), "x,y");
    }
}
