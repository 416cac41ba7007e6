//! Named offspring and step laws, truncated to finite support.

use super::DiscretePmf;
use crate::error::{Error, Result};
use std::fmt;
use std::str::FromStr;

/// Truncation point for infinite-support laws: stop once the remaining tail
/// mass is below this.
pub const DEFAULT_TAIL_TOLERANCE: f64 = 1e-14;

/// Upper limit on the number of support points a truncated law may have.
const MAX_SUPPORT: u64 = 10_000_000;

/// Law description as accepted on the command line:
/// `poisson(m)`, `geometric(m)`, `binary(p)` or `pmf:[k:p,...]`.
#[derive(Debug, Clone, PartialEq)]
pub enum LawSpec {
    Poisson(f64),
    /// Geometric on `{0, 1, 2, ...}` with mean `m`.
    Geometric(f64),
    /// `P[0] = 1 - p`, `P[2] = p`.
    Binary(f64),
    Explicit(Vec<(u64, f64)>),
}

impl LawSpec {
    pub fn build(&self) -> Result<DiscretePmf> {
        self.build_with_tolerance(DEFAULT_TAIL_TOLERANCE)
    }

    pub fn build_with_tolerance(&self, tail_tol: f64) -> Result<DiscretePmf> {
        if !(tail_tol > 0.0 && tail_tol < 1.0) {
            return Err(Error::Config(format!("tail tolerance {tail_tol} not in (0,1)")));
        }
        match *self {
            LawSpec::Poisson(m) => poisson(m, tail_tol),
            LawSpec::Geometric(m) => geometric(m, tail_tol),
            LawSpec::Binary(p) => {
                if !(0.0..=1.0).contains(&p) {
                    return Err(Error::InvalidPmf(format!("binary({p}): p not in [0,1]")));
                }
                DiscretePmf::from_weights([(0, 1.0 - p), (2, p)])
            }
            LawSpec::Explicit(ref pairs) => {
                let mut pairs = pairs.clone();
                pairs.sort_by_key(|&(k, _)| k);
                let (support, probs) = pairs.into_iter().unzip();
                DiscretePmf::new(support, probs)
            }
        }
    }
}

fn poisson(m: f64, tail_tol: f64) -> Result<DiscretePmf> {
    if !(m > 0.0 && m.is_finite()) {
        return Err(Error::InvalidPmf(format!("poisson({m}): mean must be positive")));
    }
    let mut weights = Vec::new();
    let mut p = (-m).exp();
    let mut k = 0u64;
    loop {
        weights.push((k, p));
        let next = p * m / (k + 1) as f64;
        // For k + 1 > m the tail beyond k is at most next / (1 - m/(k+2));
        // the cube keeps the dropped third-moment mass below tolerance too.
        let ratio = m / (k + 2) as f64;
        let weight = ((k + 1) as f64).powi(3).max(1.0);
        if (k + 1) as f64 > m && ratio < 1.0 && weight * next / (1.0 - ratio) < tail_tol {
            break;
        }
        p = next;
        k += 1;
        if k > MAX_SUPPORT {
            return Err(Error::CapExceeded(format!("poisson({m}) support")));
        }
    }
    DiscretePmf::from_weights(weights)
}

fn geometric(m: f64, tail_tol: f64) -> Result<DiscretePmf> {
    if !(m > 0.0 && m.is_finite()) {
        return Err(Error::InvalidPmf(format!("geometric({m}): mean must be positive")));
    }
    let p = 1.0 / (1.0 + m);
    let q = m / (1.0 + m);
    // tail beyond k is q^(k+1)
    let last = ((tail_tol.ln() / q.ln()).ceil() as u64).saturating_sub(1);
    if last > MAX_SUPPORT {
        return Err(Error::CapExceeded(format!("geometric({m}) support")));
    }
    DiscretePmf::from_weights((0..=last).map(|k| (k, p * q.powi(k as i32))))
}

impl fmt::Display for LawSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LawSpec::Poisson(m) => write!(f, "poisson({m})"),
            LawSpec::Geometric(m) => write!(f, "geometric({m})"),
            LawSpec::Binary(p) => write!(f, "binary({p})"),
            LawSpec::Explicit(pairs) => {
                write!(f, "pmf:[")?;
                for (i, (k, p)) in pairs.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{k}:{p}")?;
                }
                write!(f, "]")
            }
        }
    }
}

fn parse_call<'a>(s: &'a str, name: &str) -> Option<&'a str> {
    s.strip_prefix(name)?
        .trim()
        .strip_prefix('(')?
        .strip_suffix(')')
        .map(str::trim)
}

fn parse_f64(s: &str, ctx: &str) -> Result<f64> {
    s.trim()
        .parse()
        .map_err(|_| Error::Config(format!("{ctx}: cannot parse number '{s}'")))
}

impl FromStr for LawSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if let Some(arg) = parse_call(s, "poisson") {
            return Ok(LawSpec::Poisson(parse_f64(arg, "poisson")?));
        }
        if let Some(arg) = parse_call(s, "geometric") {
            return Ok(LawSpec::Geometric(parse_f64(arg, "geometric")?));
        }
        if let Some(arg) = parse_call(s, "binary") {
            return Ok(LawSpec::Binary(parse_f64(arg, "binary")?));
        }
        if let Some(body) = s
            .strip_prefix("pmf:")
            .map(str::trim)
            .and_then(|b| b.strip_prefix('['))
            .and_then(|b| b.strip_suffix(']'))
        {
            let mut pairs = Vec::new();
            for item in body.split(',').map(str::trim).filter(|t| !t.is_empty()) {
                let (k, p) = item
                    .split_once(':')
                    .ok_or_else(|| Error::Config(format!("pmf entry '{item}' is not k:p")))?;
                let k = k
                    .trim()
                    .parse()
                    .map_err(|_| Error::Config(format!("pmf value '{k}' is not an integer")))?;
                pairs.push((k, parse_f64(p, "pmf")?));
            }
            return Ok(LawSpec::Explicit(pairs));
        }
        Err(Error::Config(format!(
            "unknown law '{s}'; expected poisson(m), geometric(m), binary(p) or pmf:[k:p,...]"
        )))
    }
}

impl serde::Serialize for LawSpec {
    fn serialize<S: serde::Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        ser.collect_str(self)
    }
}

impl<'de> serde::Deserialize<'de> for LawSpec {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(de)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}
