//! Two-state regime-switching Markov chain: transition matrices, rotation
//! angles, the chain circuit and its classical path oracle.
//!
//! State 0 is the good regime and is encoded as |0⟩.

use crate::error::{Error, Result};
use crate::par::{map_indexed, Execution};
use crate::sim::{self, rng, Circuit, Control, Gate, Sampler};
use crate::stats::mean_stderr;
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// Chains up to this many qubits are sampled from the circuit statevector;
/// longer ones from the equivalent classical path process.
pub const MAX_SAMPLED_CIRCUIT_QUBITS: usize = 20;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TransitionMatrix {
    pub p_gb: f64,
    pub p_bg: f64,
}

fn check_prob(field: &str, p: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::param(field, format!("{p} not in [0, 1]")));
    }
    Ok(())
}

impl TransitionMatrix {
    pub fn new(p_gb: f64, p_bg: f64) -> Result<Self> {
        let tm = TransitionMatrix { p_gb, p_bg };
        tm.validate()?;
        Ok(tm)
    }

    pub fn validate(&self) -> Result<()> {
        check_prob("p_gb", self.p_gb)?;
        check_prob("p_bg", self.p_bg)
    }

    /// Row-stochastic matrix, rows indexed by the current state.
    pub fn matrix(&self) -> [[f64; 2]; 2] {
        [[1.0 - self.p_gb, self.p_gb], [self.p_bg, 1.0 - self.p_bg]]
    }

    /// (π_good, π_bad).
    pub fn steady_state(&self) -> Result<[f64; 2]> {
        let s = self.p_gb + self.p_bg;
        if s <= 0.0 {
            return Err(Error::param("p_gb", "p_gb + p_bg must be positive"));
        }
        Ok([self.p_bg / s, self.p_gb / s])
    }

    /// The same chain with the regime labels exchanged.
    pub fn swapped(&self) -> Self {
        TransitionMatrix {
            p_gb: self.p_bg,
            p_bg: self.p_gb,
        }
    }
}

/// Continuous-time generator of a two-state chain.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Generator {
    pub lambda: [[f64; 2]; 2],
}

impl Generator {
    pub fn new(lambda: [[f64; 2]; 2]) -> Result<Self> {
        let g = Generator { lambda };
        g.validate()?;
        Ok(g)
    }

    /// From the two switching intensities good→bad and bad→good.
    pub fn from_rates(to_bad: f64, to_good: f64) -> Result<Self> {
        Self::new([[-to_bad, to_bad], [to_good, -to_good]])
    }

    pub fn validate(&self) -> Result<()> {
        let l = &self.lambda;
        if l.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::param("lambda", "entries must be finite"));
        }
        if l[0][1] < 0.0 || l[1][0] < 0.0 {
            return Err(Error::param("lambda", "off-diagonal intensities must be non-negative"));
        }
        for row in l {
            if (row[0] + row[1]).abs() > 1e-12 {
                return Err(Error::param("lambda", "rows must sum to zero"));
            }
        }
        Ok(())
    }
}

/// exp(Λ·dt) in closed form: Π + e^{−(λ₀₁+λ₁₀)dt}(I − Π).
pub fn generator_to_transition(g: &Generator, dt: f64) -> Result<TransitionMatrix> {
    g.validate()?;
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(Error::param("dt", format!("{dt} must be positive")));
    }
    let (a, b) = (g.lambda[0][1], g.lambda[1][0]);
    let s = a + b;
    if s == 0.0 {
        return TransitionMatrix::new(0.0, 0.0);
    }
    let decay = -(-s * dt).exp_m1();
    TransitionMatrix::new(a / s * decay, b / s * decay)
}

/// RY angles of the chain circuit.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MarkovAngles {
    /// Steady-state preparation of the first qubit.
    pub theta0: f64,
    /// Applied when the previous regime is good.
    pub theta_stay: f64,
    /// Applied when the previous regime is bad.
    pub theta_switch: f64,
}

/// RY angle leaving probability `p_zero` on |0⟩.
pub fn ry_angle(p_zero: f64) -> f64 {
    2.0 * p_zero.clamp(0.0, 1.0).sqrt().acos()
}

pub fn compute_angles(tm: &TransitionMatrix) -> Result<MarkovAngles> {
    tm.validate()?;
    let pi = tm.steady_state()?;
    Ok(MarkovAngles {
        theta0: ry_angle(pi[0]),
        theta_stay: ry_angle(1.0 - tm.p_gb),
        theta_switch: ry_angle(tm.p_bg),
    })
}

/// Initial good-state probability plus one transition matrix per step.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChainSpec {
    pub p_good0: f64,
    pub steps: Vec<TransitionMatrix>,
}

impl ChainSpec {
    /// Time-homogeneous chain started from its steady state.
    pub fn homogeneous(tm: &TransitionMatrix, horizon: usize) -> Result<Self> {
        let spec = ChainSpec {
            p_good0: tm.steady_state()?[0],
            steps: vec![*tm; horizon],
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn horizon(&self) -> usize {
        self.steps.len()
    }

    pub fn n_qubits(&self) -> usize {
        self.steps.len() + 1
    }

    pub fn validate(&self) -> Result<()> {
        if self.steps.is_empty() {
            return Err(Error::param("T", "horizon must be at least 1"));
        }
        check_prob("p_good0", self.p_good0)?;
        self.steps.iter().try_for_each(TransitionMatrix::validate)
    }

    /// Probability of a path; bit t of `path` is the regime at time t.
    pub fn path_probability(&self, path: usize) -> f64 {
        let state = |t: usize| path >> t & 1;
        let mut p = if state(0) == 0 {
            self.p_good0
        } else {
            1.0 - self.p_good0
        };
        for (t, tm) in self.steps.iter().enumerate() {
            p *= tm.matrix()[state(t)][state(t + 1)];
        }
        p
    }

    /// Regime marginals (P(good), P(bad)) at every time 0..=T.
    pub fn marginals(&self) -> Vec<[f64; 2]> {
        let mut cur = [self.p_good0, 1.0 - self.p_good0];
        let mut out = vec![cur];
        for tm in &self.steps {
            let m = tm.matrix();
            cur = [
                cur[0] * m[0][0] + cur[1] * m[1][0],
                cur[0] * m[0][1] + cur[1] * m[1][1],
            ];
            out.push(cur);
        }
        out
    }

    /// Σ over paths of P(path)², by a transfer recursion on squared entries.
    pub fn sum_sq(&self) -> f64 {
        let mut cur = [self.p_good0.powi(2), (1.0 - self.p_good0).powi(2)];
        for tm in &self.steps {
            let m = tm.matrix();
            cur = [
                cur[0] * m[0][0].powi(2) + cur[1] * m[1][0].powi(2),
                cur[0] * m[0][1].powi(2) + cur[1] * m[1][1].powi(2),
            ];
        }
        cur[0] + cur[1]
    }

    /// Draws one path from the classical chain.
    pub fn sample_path<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let mut state = usize::from(rng.random::<f64>() >= self.p_good0);
        let mut path = state;
        for (t, tm) in self.steps.iter().enumerate() {
            let p_bad = tm.matrix()[state][1];
            state = usize::from(rng.random::<f64>() < p_bad);
            path |= state << (t + 1);
        }
        path
    }
}

/// Appends the chain to `qubits` (qubits[t] holds the regime at time t).
/// The optimized form uses one uncontrolled and one controlled RY per step;
/// the plain form uses a 0-controlled and a 1-controlled RY.
pub fn append_chain(c: &mut Circuit, qubits: &[usize], chain: &ChainSpec, optimized: bool) -> Result<()> {
    chain.validate()?;
    if qubits.len() != chain.n_qubits() {
        return Err(Error::param(
            "qubits",
            format!("{} qubits for a chain of {}", qubits.len(), chain.n_qubits()),
        ));
    }
    c.ry(qubits[0], ry_angle(chain.p_good0))?;
    for (t, tm) in chain.steps.iter().enumerate() {
        let stay = ry_angle(1.0 - tm.p_gb);
        let switch = ry_angle(tm.p_bg);
        let (prev, q) = (qubits[t], qubits[t + 1]);
        if optimized {
            c.ry(q, stay)?;
            c.apply_controlled(Gate::Ry(switch - stay), q, &[Control::one(prev)])?;
        } else {
            c.apply_controlled(Gate::Ry(stay), q, &[Control::zero(prev)])?;
            c.apply_controlled(Gate::Ry(switch), q, &[Control::one(prev)])?;
        }
    }
    Ok(())
}

/// Chain circuit on T+1 qubits held in register "mc".
pub fn build_chain_circuit(tm: &TransitionMatrix, horizon: usize, optimized: bool) -> Result<Circuit> {
    if horizon == 0 {
        return Err(Error::param("T", "horizon must be at least 1"));
    }
    build_chain_circuit_spec(&ChainSpec::homogeneous(tm, horizon)?, optimized)
}

pub fn build_chain_circuit_spec(chain: &ChainSpec, optimized: bool) -> Result<Circuit> {
    chain.validate()?;
    let mut c = Circuit::new(0);
    let reg = c.add_register("mc", chain.n_qubits())?;
    append_chain(&mut c, &reg.qubits(), chain, optimized)?;
    Ok(c)
}

/// P(path) = π(x₀)·Π A[x_t, x_{t+1}] over all 2^(T+1) paths.
pub fn exact_chain_distribution(tm: &TransitionMatrix, horizon: usize) -> Result<Vec<f64>> {
    if horizon == 0 {
        return Err(Error::param("T", "horizon must be at least 1"));
    }
    let pi = tm.steady_state()?;
    let a = tm.matrix();
    let m: Vec<Vec<f64>> = a.iter().map(|r| r.to_vec()).collect();
    path_distribution(&pi, &vec![m; horizon])
}

/// Path distribution of a general M-state chain. The path index is
/// Σ_t x_t·M^t.
pub fn path_distribution(initial: &[f64], steps: &[Vec<Vec<f64>>]) -> Result<Vec<f64>> {
    let m = initial.len();
    if m < 2 {
        return Err(Error::param("initial", "at least two states"));
    }
    for a in steps {
        if a.len() != m || a.iter().any(|r| r.len() != m) {
            return Err(Error::param("steps", "transition matrices must be M×M"));
        }
        for r in a {
            if (r.iter().sum::<f64>() - 1.0).abs() > 1e-12 || r.iter().any(|v| *v < 0.0) {
                return Err(Error::param("steps", "rows must be probability vectors"));
            }
        }
    }
    let mut dist = initial.to_vec();
    let mut stride = 1usize;
    for a in steps {
        let mut next = vec![0.0; dist.len() * m];
        for (idx, p) in dist.iter().enumerate() {
            let last = idx / stride % m;
            for (k, q) in a[last].iter().enumerate() {
                next[idx + k * stride * m] = p * q;
            }
        }
        stride *= m;
        dist = next;
    }
    Ok(dist)
}

/// Mean over runs of the per-bin mean squared deviation between the
/// empirical frequencies and `exact`.
pub fn mse(runs: &[Vec<u64>], exact: &[f64]) -> Result<f64> {
    if runs.is_empty() {
        return Err(Error::param("runs", "no histograms"));
    }
    let b = exact.len() as f64;
    let mut total = 0.0;
    for counts in runs {
        if counts.len() != exact.len() {
            return Err(Error::BinMismatch {
                got: counts.len(),
                expected: exact.len(),
            });
        }
        let s: u64 = counts.iter().sum();
        if s == 0 {
            return Err(Error::ZeroShots);
        }
        let sq: f64 = counts
            .iter()
            .zip(exact)
            .map(|(c, p)| (*c as f64 / s as f64 - p).powi(2))
            .sum();
        total += sq / b;
    }
    Ok(total / runs.len() as f64)
}

/// Per-run MSE from a sparse histogram, using Σ_b p(b)² for empty bins.
pub fn mse_sparse<F: Fn(usize) -> f64>(counts: &BTreeMap<usize, u64>, prob: F, sum_sq: f64, bins: usize) -> f64 {
    let s: u64 = counts.values().sum();
    let mut acc = sum_sq;
    for (&b, &c) in counts {
        let p = prob(b);
        acc += (c as f64 / s as f64 - p).powi(2) - p * p;
    }
    acc / bins as f64
}

/// E[MSE] for multinomial sampling: (1/(B·S))·Σ p(1−p).
pub fn expected_mse(sum_sq: f64, bins: usize, shots: u64) -> f64 {
    (1.0 - sum_sq) / (bins as f64 * shots as f64)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MseReport {
    pub mse: f64,
    pub stderr: f64,
    pub expected: f64,
    pub bins: usize,
    pub per_run: Vec<f64>,
}

/// N independent S-shot histograms of the chain, scored against the exact
/// path distribution. Iteration n draws from stream (seed, n).
pub fn mse_experiment(
    chain: &ChainSpec,
    shots: u64,
    iterations: usize,
    seed: u64,
    optimized: bool,
    exec: Execution,
) -> Result<MseReport> {
    chain.validate()?;
    if shots == 0 {
        return Err(Error::ZeroShots);
    }
    if iterations == 0 {
        return Err(Error::param("iterations", "must be at least 1"));
    }
    let bins = 1usize << chain.n_qubits();
    let sum_sq = chain.sum_sq();
    let per_run: Vec<f64> = if chain.n_qubits() <= MAX_SAMPLED_CIRCUIT_QUBITS {
        let circuit = build_chain_circuit_spec(chain, optimized)?;
        let probs = sim::statevector_with(&circuit, exec)?.probabilities();
        let exact: Vec<f64> = (0..bins).map(|b| chain.path_probability(b)).collect();
        let sq: f64 = exact.iter().map(|p| p * p).sum();
        let sampler = Sampler::new(&probs)?;
        let runs: Vec<Result<f64>> = map_indexed(exec, iterations, |n| {
            let mut r = rng::stream(seed, n as u64);
            let counts = sampler.counts_sparse(shots, &mut r)?;
            Ok(mse_sparse(&counts, |b| exact[b], sq, bins))
        });
        runs.into_iter().collect::<Result<_>>()?
    } else {
        map_indexed(exec, iterations, |n| {
            let mut r = rng::stream(seed, n as u64);
            let mut counts = BTreeMap::new();
            for _ in 0..shots {
                *counts.entry(chain.sample_path(&mut r)).or_insert(0u64) += 1;
            }
            mse_sparse(&counts, |b| chain.path_probability(b), sum_sq, bins)
        })
    };
    let (mean, stderr) = mean_stderr(&per_run);
    Ok(MseReport {
        mse: mean,
        stderr,
        expected: expected_mse(sum_sq, bins, shots),
        bins,
        per_run,
    })
}
