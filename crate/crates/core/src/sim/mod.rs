//! Dense statevector simulator.
//!
//! Qubit 0 is the least significant bit of a basis index; every integer
//! encoding in the crate follows this convention.

mod circuit;
mod decompose;
mod gate;
pub mod rng;
mod run;
mod state;

pub use circuit::{Circuit, Register};
pub use decompose::{decompose, two_qubit_gate_count};
pub use gate::{Control, Gate, Op};
pub use run::{execute, probabilities, run, run_with, statevector, statevector_with, RunOutcome};
pub use state::{sample_ones, sample_sparse, Sampler, StateVector, NORM_TOLERANCE};

#[cfg(test)]
mod tests;
