use super::fixed::FixedPointSpec;
use super::qft::{iqft, qft};
use crate::error::{Error, Result};
use crate::sim::{Circuit, Control, Gate};
use std::f64::consts::PI;

/// Grid integer added by a constant adder, reduced modulo 2^n_total.
pub fn grid_addend(value: f64, fp: &FixedPointSpec, modular: bool) -> Result<u64> {
    if !value.is_finite() {
        return Err(Error::NonFiniteAngle(value));
    }
    if !modular {
        let (lo, hi) = fp.range();
        let limit = if fp.signed { lo.abs().max(hi) } else { hi };
        let q = fp.quantize(value);
        if q.abs() >= limit && !(fp.signed && q == lo) {
            return Err(Error::Overflow {
                value,
                reason: format!("constant exceeds the register range [{lo}, {hi})"),
            });
        }
    }
    Ok(fp.to_grid(value).rem_euclid(fp.modulus() as i64) as u64)
}

/// Draper constant adder acting on a register already in the Fourier basis.
/// One phase rotation per qubit; `controls` are attached to every rotation.
pub fn draper_add_const(
    c: &mut Circuit,
    qubits: &[usize],
    value: f64,
    fp: &FixedPointSpec,
    controls: &[Control],
    modular: bool,
) -> Result<()> {
    if qubits.len() != fp.n_total {
        return Err(Error::param(
            "qubits",
            format!("register has {} qubits, fixed-point spec {}", qubits.len(), fp.n_total),
        ));
    }
    let k = grid_addend(value, fp, modular)?;
    if k == 0 {
        return Ok(());
    }
    let m = fp.modulus() as f64;
    for (j, &q) in qubits.iter().enumerate() {
        let frac = ((k << j) % fp.modulus()) as f64 / m;
        if frac != 0.0 {
            c.apply_controlled(Gate::Phase(2.0 * PI * frac), q, controls)?;
        }
    }
    Ok(())
}

/// Computational-basis constant addition: QFT, Draper adder, inverse QFT.
pub fn add_const(
    c: &mut Circuit,
    qubits: &[usize],
    value: f64,
    fp: &FixedPointSpec,
    controls: &[Control],
    modular: bool,
) -> Result<()> {
    qft(c, qubits)?;
    draper_add_const(c, qubits, value, fp, controls, modular)?;
    iqft(c, qubits)
}
