//! Discrete probability substrate: state spaces, joint priors, type priors,
//! value kernels, signaling schemes, and the Bayesian posterior computations
//! every mechanism consumes.
//!
//! All types are immutable after construction and all operations are pure.

mod kernel;
mod prior;
mod signal;
mod space;
mod type_prior;

pub use kernel::{expected_value, expected_value_given_state, SeparableValue, ValueKernel};
pub use prior::{JointPrior, PROB_TOL};
pub use signal::{
    joint_posterior, make_scheme, profile_normalizer, signal_profile_probability,
    validate_scheme, PosteriorOverProfiles, SchemeKind, SchemeValidation, Signal, SignalingScheme,
};
pub use space::StateSpace;
pub use type_prior::TypePrior;

/// Tolerance for aggregates derived by summing many probability atoms.
pub const AGGREGATE_TOL: f64 = 1e-8;
