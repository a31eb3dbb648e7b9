use crate::error::{Error, Result};
use crate::sim::{Circuit, Control, Gate};
use serde::{Deserialize, Serialize};

/// Comparator construction.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ComparatorKind {
    /// Carry chain of x + (2^n − t) with n−1 clean work qubits.
    #[default]
    Ripple,
    /// Disjoint multi-controlled X terms, no work qubits.
    Prefix,
}

fn check_threshold(n: usize, threshold: u64) -> Result<()> {
    if n == 0 || n > 62 {
        return Err(Error::param("register", format!("{n} qubits")));
    }
    if threshold > 1u64 << n {
        return Err(Error::param(
            "threshold",
            format!("{threshold} outside 0..={} for {n} qubits", 1u64 << n),
        ));
    }
    Ok(())
}

/// Flips `result` iff the register integer is ≥ `threshold`. `work` must
/// hold at least n−1 qubits in |0⟩; they are returned to |0⟩.
pub fn integer_comparator(
    c: &mut Circuit,
    qubits: &[usize],
    threshold: u64,
    result: usize,
    work: &[usize],
) -> Result<()> {
    let n = qubits.len();
    check_threshold(n, threshold)?;
    if threshold == 0 {
        return c.x(result);
    }
    if threshold == 1u64 << n {
        return Ok(());
    }
    if work.len() + 1 < n {
        return Err(Error::param(
            "work",
            format!("{} work qubits, {} needed", work.len(), n - 1),
        ));
    }
    let s = (1u64 << n) - threshold;
    let carry = |steps: &mut Circuit, i: usize, t: usize| -> Result<()> {
        let bit = s >> i & 1 == 1;
        if i == 0 {
            if bit {
                steps.cx(qubits[0], t)?;
            }
        } else if bit {
            // c_i = x_i OR c_{i-1}
            steps.apply_controlled(Gate::X, t, &[Control::zero(qubits[i]), Control::zero(work[i - 1])])?;
            steps.x(t)?;
        } else {
            steps.ccx(qubits[i], work[i - 1], t)?;
        }
        Ok(())
    };
    let mut chain = Circuit::new(c.n_qubits());
    for (i, &w) in work.iter().enumerate().take(n - 1) {
        carry(&mut chain, i, w)?;
    }
    c.append(&chain)?;
    carry(c, n - 1, result)?;
    c.append(&chain.inverse()?)
}

/// Ancilla-free comparator: `result` flips iff the register integer is
/// ≥ `threshold`, built from mutually exclusive multi-controlled X gates.
pub fn prefix_comparator(c: &mut Circuit, qubits: &[usize], threshold: u64, result: usize) -> Result<()> {
    let n = qubits.len();
    check_threshold(n, threshold)?;
    if threshold == 0 {
        return c.x(result);
    }
    if threshold == 1u64 << n {
        return Ok(());
    }
    let bit = |i: usize| threshold >> i & 1 == 1;
    let prefix = |i: usize| -> Vec<Control> {
        (i + 1..n).map(|j| Control::when(qubits[j], bit(j))).collect()
    };
    let ones = threshold.count_ones() as usize;
    let zeros = n - ones;
    if zeros < ones {
        // x ≥ t: some higher-equal prefix then x_i = 1 > t_i = 0, or x = t
        for i in (0..n).filter(|i| !bit(*i)) {
            let mut ctl = prefix(i);
            ctl.push(Control::one(qubits[i]));
            c.apply_controlled(Gate::X, result, &ctl)?;
        }
        let all: Vec<Control> = (0..n).map(|j| Control::when(qubits[j], bit(j))).collect();
        c.apply_controlled(Gate::X, result, &all)
    } else {
        // complement of x < t
        c.x(result)?;
        for i in (0..n).filter(|i| bit(*i)) {
            let mut ctl = prefix(i);
            ctl.push(Control::zero(qubits[i]));
            c.apply_controlled(Gate::X, result, &ctl)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::statevector;

    fn check(kind: ComparatorKind, n: usize) {
        for t in 0..=(1u64 << n) {
            for x in 0..1usize << n {
                let width = 2 * n;
                let mut c = Circuit::new(width);
                for b in 0..n {
                    if x >> b & 1 == 1 {
                        c.x(b).unwrap();
                    }
                }
                let reg: Vec<usize> = (0..n).collect();
                let work: Vec<usize> = (n + 1..width).collect();
                match kind {
                    ComparatorKind::Ripple => integer_comparator(&mut c, &reg, t, n, &work).unwrap(),
                    ComparatorKind::Prefix => prefix_comparator(&mut c, &reg, t, n).unwrap(),
                }
                let p = statevector(&c).unwrap().probabilities();
                let want = x | (usize::from(x as u64 >= t) << n);
                assert!((p[want] - 1.0).abs() < 1e-9, "{kind:?} n={n} x={x} t={t}");
            }
        }
    }

    #[test]
    fn ripple_complete() {
        for n in 1..=4 {
            check(ComparatorKind::Ripple, n);
        }
    }

    #[test]
    fn prefix_complete() {
        for n in 1..=4 {
            check(ComparatorKind::Prefix, n);
        }
    }

    #[test]
    fn examples_and_range() {
        check(ComparatorKind::Ripple, 3);
        let mut c = Circuit::new(6);
        assert!(integer_comparator(&mut c, &[0, 1, 2], 9, 3, &[4, 5]).is_err());
        assert!(integer_comparator(&mut c, &[0, 1, 2], 4, 3, &[4]).is_err());
    }
}
