//! Lower and upper bounds on the probability that a transaction confirmed
//! under the k-block rule of a Nakamoto-consensus chain is later discarded.
//!
//! The race between the adversary and the honest chain is split into three
//! phases, each with its own distribution:
//!
//! * [`lead`]: the adversary's pre-mining lead when the transaction arrives,
//! * [`confirmation`]: adversarial (or rigged) blocks mined while the target
//!   block is buried k deep,
//! * [`postconf`]: the chance of closing the remaining deficit afterwards.
//!
//! [`bounds`] combines them into the achievable (lower) and converse (upper)
//! discard probabilities, and [`sim`] is a Monte Carlo simulator of the same
//! processes used as an independent check of every analytic quantity.

pub mod bounds;
pub mod confirmation;
mod error;
pub mod lead;
pub mod params;
pub mod pmf;
pub mod postconf;
pub mod sim;

pub use bounds::{lower_bound, sweep, upper_bound, BoundOptions, BoundResult, SweepAxis, SweepRow, Theorem, Which};
pub use confirmation::{ConfPmf, ConfVariant, PmfVariant};
pub use error::{Condition, Error, Result};
pub use lead::{LeadPmf, LeadVariant};
pub use params::{DerivedParams, ProtocolParams, RegimeReport};
pub use pmf::Pmf;
pub use postconf::{PairedWalk, ThreeWayWalk};

/// Default truncation tolerance for every infinite-support distribution.
pub const DEFAULT_EPS: f64 = 1e-12;
