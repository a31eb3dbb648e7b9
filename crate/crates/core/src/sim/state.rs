use super::circuit::Circuit;
use super::gate::{control_masks, Control, Gate, Op};
use crate::error::{Error, Result};
use crate::par::{chunked_sum, Execution};
use num_complex::Complex64;
use rand::Rng;
use std::collections::BTreeMap;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Norm tolerance checked after measurements and at the end of every run.
pub const NORM_TOLERANCE: f64 = 1e-10;

/// Below this many amplitudes the kernels never fan out to rayon.
const PAR_MIN_AMPS: usize = 1 << 14;
/// Pair blocks needed before parallelising over blocks instead of within one.
const PAR_MIN_BLOCKS: usize = 64;

/// Dense state of `n_qubits` qubits stored as 2^n complex amplitudes.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    n_qubits: usize,
    amps: Vec<Complex64>,
    exec: Execution,
}

impl StateVector {
    /// |0…0⟩.
    pub fn zero(n_qubits: usize) -> Self {
        let mut amps = vec![Complex64::new(0.0, 0.0); 1usize << n_qubits];
        amps[0] = Complex64::new(1.0, 0.0);
        StateVector {
            n_qubits,
            amps,
            exec: Execution::default(),
        }
    }

    /// Computational basis state |index⟩.
    pub fn basis(n_qubits: usize, index: usize) -> Result<Self> {
        if index >= 1usize << n_qubits {
            return Err(Error::param("index", format!("{index} out of range for {n_qubits} qubits")));
        }
        let mut s = Self::zero(n_qubits);
        s.amps[0] = Complex64::new(0.0, 0.0);
        s.amps[index] = Complex64::new(1.0, 0.0);
        Ok(s)
    }

    pub fn from_amplitudes(amps: Vec<Complex64>) -> Result<Self> {
        let len = amps.len();
        if !len.is_power_of_two() {
            return Err(Error::BadLength(len));
        }
        let s = StateVector {
            n_qubits: len.trailing_zeros() as usize,
            amps,
            exec: Execution::default(),
        };
        s.check_norm()?;
        Ok(s)
    }

    pub fn with_execution(mut self, exec: Execution) -> Self {
        self.exec = exec;
        self
    }

    pub fn set_execution(&mut self, exec: Execution) {
        self.exec = exec;
    }

    pub fn execution(&self) -> Execution {
        self.exec
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        chunked_sum(self.exec, &self.amps, |_, a| a.norm_sqr())
    }

    pub fn check_norm(&self) -> Result<()> {
        let n = self.norm_sqr();
        if (n - 1.0).abs() > NORM_TOLERANCE {
            return Err(Error::NotNormalized { norm: n.sqrt() });
        }
        Ok(())
    }

    /// |⟨self|other⟩|².
    pub fn fidelity(&self, other: &StateVector) -> f64 {
        self.amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum::<Complex64>()
            .norm_sqr()
    }

    /// Largest elementwise amplitude difference.
    pub fn max_abs_diff(&self, other: &StateVector) -> f64 {
        self.amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amps.iter().map(|a| a.norm_sqr()).collect()
    }

    /// Marginal distribution over `qubits`; bit `i` of the result index is
    /// the value of `qubits[i]`.
    pub fn marginal(&self, qubits: &[usize]) -> Result<Vec<f64>> {
        for &q in qubits {
            if q >= self.n_qubits {
                return Err(Error::QubitOutOfRange {
                    qubit: q,
                    n_qubits: self.n_qubits,
                });
            }
        }
        let mut out = vec![0.0; 1usize << qubits.len()];
        for (i, a) in self.amps.iter().enumerate() {
            let p = a.norm_sqr();
            if p == 0.0 {
                continue;
            }
            let k = qubits
                .iter()
                .enumerate()
                .fold(0usize, |k, (j, &q)| k | (((i >> q) & 1) << j));
            out[k] += p;
        }
        Ok(out)
    }

    /// Probability that `qubit` reads 1.
    pub fn prob_one(&self, qubit: usize) -> f64 {
        let bit = 1usize << qubit;
        chunked_sum(self.exec, &self.amps, |i, a| {
            if i & bit != 0 {
                a.norm_sqr()
            } else {
                0.0
            }
        })
    }

    /// Applies a (multi-)controlled single-qubit gate in place.
    pub fn apply_gate(&mut self, gate: Gate, target: usize, controls: &[Control]) {
        let (mask, want) = control_masks(controls);
        let par = self.exec.is_parallel() && self.amps.len() >= PAR_MIN_AMPS;
        match gate {
            Gate::Phase(theta) => {
                let bit = 1usize << target;
                let ph = Complex64::from_polar(1.0, theta);
                for_each_amp(&mut self.amps, mask | bit, want | bit, par, move |a| *a *= ph);
            }
            Gate::X => for_each_pair(&mut self.amps, target, mask, want, par, |a, b| {
                std::mem::swap(a, b)
            }),
            Gate::H | Gate::Ry(_) => {
                let m = gate.matrix();
                let (m00, m01, m10, m11) = (m[0][0].re, m[0][1].re, m[1][0].re, m[1][1].re);
                for_each_pair(&mut self.amps, target, mask, want, par, move |a, b| {
                    let (x, y) = (*a, *b);
                    *a = x * m00 + y * m01;
                    *b = x * m10 + y * m11;
                })
            }
        }
    }

    /// Projective measurement of `qubit`; collapses and renormalises.
    pub fn measure<R: Rng + ?Sized>(&mut self, qubit: usize, rng: &mut R) -> Result<bool> {
        let p1 = self.prob_one(qubit);
        let u: f64 = rng.random();
        let outcome = u < p1;
        let keep = if outcome { p1 } else { 1.0 - p1 };
        if keep <= 0.0 {
            return Err(Error::NotNormalized { norm: keep });
        }
        let scale = 1.0 / keep.sqrt();
        let bit = 1usize << qubit;
        let par = self.exec.is_parallel() && self.amps.len() >= PAR_MIN_AMPS;
        let collapse = move |(i, a): (usize, &mut Complex64)| {
            if ((i & bit) != 0) == outcome {
                *a *= scale;
            } else {
                *a = Complex64::new(0.0, 0.0);
            }
        };
        #[cfg(feature = "parallel")]
        if par {
            self.amps.par_iter_mut().enumerate().for_each(collapse);
            return Ok(outcome);
        }
        let _ = par;
        self.amps.iter_mut().enumerate().for_each(collapse);
        Ok(outcome)
    }

    /// Measures `qubit` and flips it back to |0⟩ if it read 1.
    pub fn reset<R: Rng + ?Sized>(&mut self, qubit: usize, rng: &mut R) -> Result<()> {
        if self.measure(qubit, rng)? {
            self.apply_gate(Gate::X, qubit, &[]);
        }
        Ok(())
    }

    /// Multinomial draw of `shots` basis-state outcomes.
    pub fn sample(&self, shots: u64, seed: u64) -> Result<BTreeMap<usize, u64>> {
        let mut rng = super::rng::seeded(seed);
        sample_sparse(&self.probabilities(), shots, &mut rng)
    }

    /// Applies every unitary op of `circuit`; fails on measurements.
    pub fn apply_unitary(&mut self, circuit: &Circuit) -> Result<()> {
        self.check_width(circuit)?;
        for op in circuit.ops() {
            match op {
                Op::Gate {
                    gate,
                    target,
                    controls,
                } => self.apply_gate(*gate, *target, controls),
                _ => return Err(Error::NonUnitary("circuit contains measurement or feedback")),
            }
        }
        Ok(())
    }

    pub(crate) fn check_width(&self, circuit: &Circuit) -> Result<()> {
        if circuit.n_qubits() > self.n_qubits {
            return Err(Error::QubitOutOfRange {
                qubit: circuit.n_qubits() - 1,
                n_qubits: self.n_qubits,
            });
        }
        Ok(())
    }
}

fn for_each_amp<F>(amps: &mut [Complex64], mask: usize, want: usize, par: bool, f: F)
where
    F: Fn(&mut Complex64) + Sync + Send,
{
    let body = |(i, a): (usize, &mut Complex64)| {
        if i & mask == want {
            f(a)
        }
    };
    #[cfg(feature = "parallel")]
    if par {
        amps.par_iter_mut().enumerate().for_each(body);
        return;
    }
    let _ = par;
    amps.iter_mut().enumerate().for_each(body);
}

/// Calls `f(a0, a1)` on every amplitude pair differing only in bit `target`
/// whose index satisfies the control mask.
fn for_each_pair<F>(amps: &mut [Complex64], target: usize, mask: usize, want: usize, par: bool, f: F)
where
    F: Fn(&mut Complex64, &mut Complex64) + Sync + Send,
{
    let half = 1usize << target;
    let block = half << 1;
    let body = |(ci, chunk): (usize, &mut [Complex64])| {
        let (lo, hi) = chunk.split_at_mut(half);
        let base = ci * block;
        for (j, (a, b)) in lo.iter_mut().zip(hi.iter_mut()).enumerate() {
            if (base + j) & mask == want {
                f(a, b);
            }
        }
    };
    #[cfg(feature = "parallel")]
    if par {
        if amps.len() / block >= PAR_MIN_BLOCKS {
            amps.par_chunks_mut(block).enumerate().for_each(body);
        } else {
            for (ci, chunk) in amps.chunks_mut(block).enumerate() {
                let (lo, hi) = chunk.split_at_mut(half);
                let base = ci * block;
                lo.par_iter_mut()
                    .zip(hi.par_iter_mut())
                    .enumerate()
                    .for_each(|(j, (a, b))| {
                        if (base + j) & mask == want {
                            f(a, b);
                        }
                    });
            }
        }
        return;
    }
    let _ = par;
    amps.chunks_mut(block).enumerate().for_each(body);
}

fn cumulative(probs: &[f64]) -> Vec<f64> {
    let mut acc = 0.0;
    probs
        .iter()
        .map(|p| {
            acc += p;
            acc
        })
        .collect()
}

/// Multinomial sampler over a fixed distribution. Building the cumulative
/// table once lets many independent runs share it.
#[derive(Clone, Debug)]
pub struct Sampler {
    cdf: Vec<f64>,
}

impl Sampler {
    pub fn new(probs: &[f64]) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::param("probabilities", "empty distribution"));
        }
        if probs.iter().any(|p| !p.is_finite() || *p < 0.0) {
            return Err(Error::param("probabilities", "entries must be finite and non-negative"));
        }
        let cdf = cumulative(probs);
        if *cdf.last().unwrap() <= 0.0 {
            return Err(Error::param("probabilities", "total mass is zero"));
        }
        Ok(Sampler { cdf })
    }

    pub fn bins(&self) -> usize {
        self.cdf.len()
    }

    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let total = *self.cdf.last().unwrap();
        let u = rng.random::<f64>() * total;
        self.cdf
            .partition_point(|&c| c <= u)
            .min(self.cdf.len() - 1)
    }

    pub fn counts<R: Rng + ?Sized>(&self, shots: u64, rng: &mut R) -> Result<Vec<u64>> {
        if shots == 0 {
            return Err(Error::ZeroShots);
        }
        let mut out = vec![0u64; self.cdf.len()];
        for _ in 0..shots {
            out[self.draw(rng)] += 1;
        }
        Ok(out)
    }

    pub fn counts_sparse<R: Rng + ?Sized>(&self, shots: u64, rng: &mut R) -> Result<BTreeMap<usize, u64>> {
        if shots == 0 {
            return Err(Error::ZeroShots);
        }
        let mut out = BTreeMap::new();
        for _ in 0..shots {
            *out.entry(self.draw(rng)).or_insert(0) += 1;
        }
        Ok(out)
    }
}

/// Draws `shots` outcomes from `probs` and returns counts per basis state.
pub fn sample_sparse<R: Rng + ?Sized>(probs: &[f64], shots: u64, rng: &mut R) -> Result<BTreeMap<usize, u64>> {
    if shots == 0 {
        return Err(Error::ZeroShots);
    }
    Sampler::new(probs)?.counts_sparse(shots, rng)
}

/// Number of ones in `shots` Bernoulli(`p`) trials.
pub fn sample_ones<R: Rng + ?Sized>(p: f64, shots: u64, rng: &mut R) -> Result<u64> {
    if shots == 0 {
        return Err(Error::ZeroShots);
    }
    Ok((0..shots).filter(|_| rng.random::<f64>() < p).count() as u64)
}
