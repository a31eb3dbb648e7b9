use super::adder::draper_add_const;
use super::fixed::FixedPointSpec;
use super::qft::{iqft, qft};
use crate::error::{Error, Result};
use crate::sim::{Circuit, Control};

/// Adds Σ_k weights[k]·bit_k into `sum` (assumed to start at zero).
pub fn weighted_sum(c: &mut Circuit, inputs: &[usize], weights: &[u64], sum: &[usize]) -> Result<()> {
    if inputs.len() != weights.len() {
        return Err(Error::param(
            "weights",
            format!("{} weights for {} inputs", weights.len(), inputs.len()),
        ));
    }
    let total: u64 = weights.iter().sum();
    if sum.is_empty() || sum.len() > 62 || total >= 1u64 << sum.len() {
        return Err(Error::Overflow {
            value: total as f64,
            reason: format!("sum register of {} qubits", sum.len()),
        });
    }
    let fp = FixedPointSpec::integer(sum.len());
    qft(c, sum)?;
    for (&q, &w) in inputs.iter().zip(weights) {
        draper_add_const(c, sum, w as f64, &fp, &[Control::one(q)], false)?;
    }
    iqft(c, sum)
}
