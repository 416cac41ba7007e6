//! Equilibrium couplings for sums of dependent nonnegative variables,
//! Markov-chain occupation times and returns of planar random walks.

mod occupation;
mod thm3;
mod walk2d;

pub use occupation::{
    expected_occupations, occupation_couple, occupation_draws, ChainSpec, OccupationCoupler,
    OccupationDraw,
};
pub use thm3::{
    thm3_equilibrium_exact, verify_thm3_identity, JointLaw, MixtureComponent, PrefixDirection,
    UniformMixture, ENUMERATION_CAP,
};
pub use walk2d::{
    erdos_taylor_experiment, exact_origin_probs, return_prob_curve, walk2d_returns,
    ErdosTaylorRow, ReturnRow, Walk2DSpec,
};
