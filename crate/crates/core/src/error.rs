use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid pmf: {0}")]
    InvalidPmf(String),

    #[error("alpha undefined: P[Z1 >= 2] = 0")]
    AlphaUndefined,

    #[error("size-bias of zero distribution")]
    ZeroMean,

    #[error("{what}: argument out of domain ({detail})")]
    Domain { what: &'static str, detail: String },

    #[error("hypothesis {0} fails")]
    Hypothesis(String),

    #[error("extinction is certain by generation {n}")]
    ExtinctionCertain { n: u32 },

    #[error("conditional draw failed at level {level} after {attempts} attempts")]
    ConditionalDrawFailed { level: u32, attempts: u64 },

    #[error("population {population} exceeds cap {cap} at generation {generation}")]
    PopulationExplosion { population: u64, cap: u64, generation: u32 },

    #[error("cap exceeded: {0}")]
    CapExceeded(String),

    #[error(
        "survival probability {survival:e} at n={n} is below floor {floor:e}; \
         sample via the spine coupling (rstar_sample) instead"
    )]
    SurvivalBelowFloor { survival: f64, floor: f64, n: u32 },

    #[error("invalid chain: {0}")]
    InvalidChain(String),

    #[error("invalid joint law: {0}")]
    InvalidJoint(String),

    #[error("invalid walk: {0}")]
    InvalidWalk(String),

    #[error("{0}")]
    Config(String),

    #[error("empty or invalid sample: {0}")]
    InvalidSample(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// The inputs were unusable, as opposed to a failure while running.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::InvalidPmf(_)
                | Error::AlphaUndefined
                | Error::ZeroMean
                | Error::Domain { .. }
                | Error::Hypothesis(_)
                | Error::ExtinctionCertain { .. }
                | Error::SurvivalBelowFloor { .. }
                | Error::InvalidChain(_)
                | Error::InvalidJoint(_)
                | Error::InvalidWalk(_)
                | Error::Config(_)
                | Error::Json(_)
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn domain(what: &'static str, detail: impl Into<String>) -> Error {
    Error::Domain {
        what,
        detail: detail.into(),
    }
}
