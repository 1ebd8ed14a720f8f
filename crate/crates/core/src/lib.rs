//! Correct-cascade probabilities for sequential observational learning over
//! an asymmetric binary channel.
//!
//! Agents observe all earlier actions plus a private signal of quality
//! `p1 = P(H | G)` or `p2 = P(L | B)`, and act on the Bayes-optimal
//! posterior. The crate provides:
//!
//! * [`model`], [`constant`], [`walk`]: the channel, the cascade constant
//!   and the absorbing walk of the sufficient statistic;
//! * [`analytic`]: series and closed-form cascade probabilities;
//! * [`sim`]: a seeded Monte-Carlo oracle for every analytic value;
//! * [`budget`]: allocation of a quality-improvement budget;
//! * [`sweep`]: grids of probabilities along `p2`.

pub mod analytic;
pub mod budget;
pub mod constant;
pub mod error;
pub mod model;
pub mod sim;
pub mod sweep;
pub mod walk;

pub use analytic::{pcc, CascadeProbabilities, PccMode};
pub use constant::{cascade_constant, CascadeConstant, Rationality};
pub use error::{CascadeError, Result};
pub use model::{validate_qualities, Action, Signal, SignalQualities, TruthState};
pub use walk::{Region, WalkState, WalkStatus};
