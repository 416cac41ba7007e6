//! Exponential approximation through equilibrium couplings.
//!
//! The crate is organised by subsystem:
//!
//! * [`dist_core`]: finite laws on the nonnegative integers, moments and the
//!   size-bias and equilibrium transforms;
//! * [`metrics`]: exact Kolmogorov and Wasserstein distances to Exp(1);
//! * [`bounds`]: closed-form error bounds;
//! * [`galton_watson`]: branching-process simulation, generating-function
//!   iteration and the size-biased spine coupling;
//! * [`markov_walk`]: equilibrium couplings for dependent sums, Markov
//!   occupation times and planar random-walk returns;
//! * [`experiments`]: configuration, deterministic parallel execution and
//!   reporting for batch runs.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod dist_core;
pub mod error;
pub mod experiments;
pub mod galton_watson;
pub mod markov_walk;
pub mod metrics;
pub mod numeric;
pub mod rng;
pub mod stats;

pub use bounds::{BoundReport, GwBoundInput};
pub use dist_core::{DiscretePmf, EquilibriumRep, LawSpec, MomentSummary, PiecewiseLinear};
pub use error::{Error, Result};
pub use metrics::{DistanceReport, EmpiricalSample};
pub use rng::{SimRng, StreamKey};

/// Library version recorded in run reports.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
