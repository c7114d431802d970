//! Mechanism design engine for single-item auctions with strategically
//! reticent bidders: each bidder holds a misreportable type and a truthful
//! but concealable information variable revealed only through committed
//! signaling schemes. The crate models the information structure, runs the
//! expected and simulated meta transforms of classic base auctions, and
//! verifies incentive, rationality, and optimality properties.

pub mod error;
pub mod mechanisms;
pub mod meta;
pub mod model;
pub mod scenario;
pub mod verify;

pub use error::{Error, Result};
