use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("coordinate {coord} out of range for a space with {len} coordinates")]
    CoordinateOutOfRange { coord: usize, len: usize },

    #[error("bidder {bidder} out of range for {n} bidders")]
    BidderOutOfRange { bidder: usize, n: usize },

    #[error("probabilities sum to {sum}, expected 1 (tolerance {tol})")]
    NotNormalized { sum: f64, tol: f64 },

    #[error("negative probability {value} at index {index}")]
    NegativeProbability { value: f64, index: usize },

    #[error("shared state must be independent of bidder states: |{joint} - {product}| = {gap} at profile {profile:?}")]
    SharedStateNotIndependent {
        joint: f64,
        product: f64,
        gap: f64,
        profile: Vec<usize>,
    },

    #[error("signal profile is jointly inconsistent with the prior (zero normalizer)")]
    InconsistentSignals,

    #[error("signal for bidder {bidder} puts mass {mass} on state {state} which has zero prior mass")]
    SignalOutsidePriorSupport {
        bidder: usize,
        state: usize,
        mass: f64,
    },

    #[error("signal not in the support of bidder {bidder}'s scheme")]
    SignalNotInScheme { bidder: usize },

    #[error("pooling partition has an empty cell")]
    EmptyPartitionCell,

    #[error("pooling partition does not cover every state exactly once")]
    InvalidPartition,

    #[error("state {state} of bidder {bidder} has zero prior mass; cannot condition on it")]
    ZeroMassState { bidder: usize, state: usize },

    #[error("random scheme construction failed after {attempts} attempts (seed {seed})")]
    RandomSchemeFailed { attempts: usize, seed: u64 },

    #[error("value table for bidder {bidder} is not separable: entry (type {type_idx}, profile {profile}) is {actual}, factorization gives {expected}")]
    NotSeparable {
        bidder: usize,
        type_idx: usize,
        profile: usize,
        actual: f64,
        expected: f64,
    },

    #[error("negative or non-finite value {value} for bidder {bidder} (type {type_idx}, profile {profile})")]
    InvalidValue {
        bidder: usize,
        type_idx: usize,
        profile: usize,
        value: f64,
    },

    #[error("scenario is too large for exhaustive search: {detail}")]
    SizeGuard { detail: String },

    #[error("scenario file error at {location}: {message}")]
    Scenario { location: String, message: String },

    #[error("unknown mechanism identifier {0:?}")]
    UnknownMechanism(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
