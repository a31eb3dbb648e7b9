use crate::error::Result;
use crate::sim::{Circuit, Control, Gate};
use std::f64::consts::PI;

/// Exact QFT on `qubits` (qubits[0] least significant):
/// |x⟩ ↦ 2^{-n/2} Σ_y e^{2πi·xy/2^n} |y⟩.
pub fn qft(c: &mut Circuit, qubits: &[usize]) -> Result<()> {
    let n = qubits.len();
    for j in (0..n).rev() {
        c.h(qubits[j])?;
        for k in (0..j).rev() {
            let theta = PI / (1u64 << (j - k)) as f64;
            c.apply_controlled(Gate::Phase(theta), qubits[j], &[Control::one(qubits[k])])?;
        }
    }
    for i in 0..n / 2 {
        c.swap(qubits[i], qubits[n - 1 - i])?;
    }
    Ok(())
}

pub fn iqft(c: &mut Circuit, qubits: &[usize]) -> Result<()> {
    let mut f = Circuit::new(c.n_qubits());
    qft(&mut f, qubits)?;
    c.append(&f.inverse()?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::{statevector, StateVector};
    use num_complex::Complex64;

    #[test]
    fn matches_dft_matrix() {
        let n = 3;
        let dim = 1 << n;
        for x in 0..dim {
            let mut c = Circuit::new(n);
            for b in 0..n {
                if x >> b & 1 == 1 {
                    c.x(b).unwrap();
                }
            }
            qft(&mut c, &[0, 1, 2]).unwrap();
            let s = statevector(&c).unwrap();
            for y in 0..dim {
                let want = Complex64::from_polar(
                    1.0 / (dim as f64).sqrt(),
                    2.0 * PI * (x * y) as f64 / dim as f64,
                );
                assert!((s.amplitudes()[y] - want).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn single_qubit_is_h() {
        let mut a = Circuit::new(1);
        qft(&mut a, &[0]).unwrap();
        let mut b = Circuit::new(1);
        b.h(0).unwrap();
        assert!(statevector(&a).unwrap().max_abs_diff(&statevector(&b).unwrap()) < 1e-15);
    }

    #[test]
    fn zero_maps_to_uniform() {
        let mut c = Circuit::new(4);
        qft(&mut c, &[0, 1, 2, 3]).unwrap();
        let s = statevector(&c).unwrap();
        for a in s.amplitudes() {
            assert!((a - Complex64::new(0.25, 0.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn round_trip_random_state() {
        let amps: Vec<Complex64> = (0..16)
            .map(|i| Complex64::new((i as f64 * 0.37).sin(), (i as f64 * 1.3).cos()))
            .collect();
        let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        let start = StateVector::from_amplitudes(amps.iter().map(|a| a / norm).collect()).unwrap();
        let mut c = Circuit::new(4);
        qft(&mut c, &[0, 1, 2, 3]).unwrap();
        iqft(&mut c, &[0, 1, 2, 3]).unwrap();
        let mut s = start.clone();
        s.apply_unitary(&c).unwrap();
        assert!(s.fidelity(&start) > 1.0 - 1e-12);
    }
}
