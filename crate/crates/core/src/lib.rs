//! Regime-switching risk models on a gate-level quantum simulator.

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod blocks;
pub mod credit;
pub mod derivative;
pub mod error;
pub mod harness;
pub mod markov;
pub mod par;
pub mod portfolio;
pub mod qae;
pub mod sim;
pub mod stats;

pub use error::{Error, Result};
pub use par::Execution;
