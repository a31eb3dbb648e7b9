//! Circuit fragments: Fourier arithmetic, comparators, state loaders and
//! the linear payoff rotation. Each builder appends to an existing circuit.

mod adder;
mod comparator;
mod fixed;
mod loader;
mod payoff;
mod qft;
mod weighted_sum;

pub use adder::{add_const, draper_add_const, grid_addend};
pub use comparator::{integer_comparator, prefix_comparator, ComparatorKind};
pub use fixed::FixedPointSpec;
pub use loader::{load_normal, normal_grid_probs, prepare_distribution};
pub use payoff::{linear_payoff_rotation, LinearAmplitudeSpec};
pub use qft::{iqft, qft};
pub use weighted_sum::weighted_sum;
