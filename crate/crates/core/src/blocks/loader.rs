use crate::error::{Error, Result};
use crate::sim::{Circuit, Control, Gate};

/// Normal density at 0..2^n−1, normalised to a probability vector.
pub fn normal_grid_probs(n: usize, mean: f64, stddev: f64) -> Result<Vec<f64>> {
    if !(stddev > 0.0) || !stddev.is_finite() {
        return Err(Error::param("stddev", format!("{stddev} must be positive")));
    }
    if !mean.is_finite() {
        return Err(Error::param("mean", "not finite"));
    }
    let w: Vec<f64> = (0..1usize << n)
        .map(|k| {
            let d = (k as f64 - mean) / stddev;
            (-0.5 * d * d).exp()
        })
        .collect();
    let total: f64 = w.iter().sum();
    Ok(w.into_iter().map(|v| v / total).collect())
}

/// Exact state preparation Σ_k √p_k |k⟩ by a binary tree of
/// uniformly controlled RY rotations, most significant qubit first.
pub fn prepare_distribution(c: &mut Circuit, qubits: &[usize], probs: &[f64]) -> Result<()> {
    let n = qubits.len();
    if probs.len() != 1usize << n {
        return Err(Error::BinMismatch {
            got: probs.len(),
            expected: 1usize << n,
        });
    }
    if probs.iter().any(|p| !(*p >= 0.0) || !p.is_finite()) {
        return Err(Error::param("probs", "entries must be finite and non-negative"));
    }
    let total: f64 = probs.iter().sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(Error::NotNormalized { norm: total });
    }
    for level in (0..n).rev() {
        let block = 1usize << level;
        // prefixes fix the qubits above `level`
        for prefix in 0..1usize << (n - 1 - level) {
            let base = prefix << (level + 1);
            let p0: f64 = probs[base..base + block].iter().sum();
            let p1: f64 = probs[base + block..base + 2 * block].iter().sum();
            if p1 == 0.0 {
                continue;
            }
            let theta = 2.0 * p1.sqrt().atan2(p0.sqrt());
            let controls: Vec<Control> = (level + 1..n)
                .map(|j| Control::when(qubits[j], prefix >> (j - level - 1) & 1 == 1))
                .collect();
            c.apply_controlled(Gate::Ry(theta), qubits[level], &controls)?;
        }
    }
    Ok(())
}

/// Loads the discretised N(mean, stddev²) onto `qubits`.
pub fn load_normal(c: &mut Circuit, qubits: &[usize], mean: f64, stddev: f64) -> Result<Vec<f64>> {
    let probs = normal_grid_probs(qubits.len(), mean, stddev)?;
    prepare_distribution(c, qubits, &probs)?;
    Ok(probs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::statevector;

    fn loaded(n: usize, mean: f64, sd: f64) -> (Vec<f64>, Vec<f64>) {
        let mut c = Circuit::new(n);
        let q: Vec<usize> = (0..n).collect();
        let target = load_normal(&mut c, &q, mean, sd).unwrap();
        (statevector(&c).unwrap().probabilities(), target)
    }

    #[test]
    fn matches_target_kl() {
        let (got, want) = loaded(3, 3.5, 1.5);
        let kl: f64 = want
            .iter()
            .zip(&got)
            .map(|(p, q)| if *p > 0.0 { p * (p / q).ln() } else { 0.0 })
            .sum();
        assert!(kl.abs() < 1e-12);
        // frozen: pdf of N(3.5, 1.5²) at 0..7, normalised
        assert!((want[0] - 0.017_597_331_86).abs() < 1e-10, "{}", want[0]);
        for k in 0..8 {
            assert!((got[k] - got[7 - k]).abs() < 1e-12);
        }
    }

    #[test]
    fn flat_limit() {
        let (got, _) = loaded(3, 3.5, 1e6);
        for p in got {
            assert!((p - 0.125).abs() < 1e-6);
        }
    }

    #[test]
    fn rejects_bad_stddev() {
        assert!(normal_grid_probs(3, 0.0, 0.0).is_err());
        assert!(normal_grid_probs(3, 0.0, -1.0).is_err());
    }

    #[test]
    fn arbitrary_distribution_with_zeros() {
        let p = [0.0, 0.5, 0.0, 0.0, 0.25, 0.0, 0.125, 0.125];
        let mut c = Circuit::new(3);
        prepare_distribution(&mut c, &[0, 1, 2], &p).unwrap();
        let got = statevector(&c).unwrap().probabilities();
        for (a, b) in got.iter().zip(p) {
            assert!((a - b).abs() < 1e-12);
        }
    }
}
