//! Amplitude estimation: Grover operator, iterative QAE, canonical QAE and
//! the single-ancilla semiclassical phase estimation circuit.

use crate::blocks::iqft;
use crate::error::{Error, Result};
use crate::par::{map_indexed, Execution};
use crate::sim::{self, rng, sample_ones, Circuit, Control, Gate, StateVector};
use crate::stats::clopper_pearson;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Largest register the statevector routines here will allocate.
pub const MAX_QAE_QUBITS: usize = 24;

/// State preparation A with the good states marked by `objective = 1`.
#[derive(Clone, Debug)]
pub struct AProblem {
    pub state_prep: Circuit,
    pub objective: usize,
}

impl AProblem {
    pub fn new(state_prep: Circuit, objective: usize) -> Result<Self> {
        if objective >= state_prep.n_qubits() {
            return Err(Error::QubitOutOfRange {
                qubit: objective,
                n_qubits: state_prep.n_qubits(),
            });
        }
        if !state_prep.is_unitary() {
            return Err(Error::NonUnitary("state preparation may not measure"));
        }
        Ok(AProblem { state_prep, objective })
    }

    /// A = RY(2 arcsin √a) on one qubit.
    pub fn bernoulli(a: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&a) {
            return Err(Error::param("a", "amplitude must lie in [0, 1]"));
        }
        let mut c = Circuit::new(1);
        c.ry(0, 2.0 * a.sqrt().asin())?;
        AProblem::new(c, 0)
    }

    pub fn n_qubits(&self) -> usize {
        self.state_prep.n_qubits()
    }

    /// Exact a = P(objective = 1) after A.
    pub fn amplitude(&self) -> Result<f64> {
        Ok(sim::statevector(&self.state_prep)?.prob_one(self.objective))
    }
}

/// Q = A·S₀·A†·S_ψ₀ as a circuit (S_ψ₀ applied first).
///
/// S_ψ₀ flips the sign of the bad states, so Q has eigenphases ±2θ_a with
/// no extra global phase; controlled powers then estimate θ_a directly.
pub fn grover_operator(problem: &AProblem) -> Result<Circuit> {
    let a = &problem.state_prep;
    if !a.is_unitary() {
        return Err(Error::NonUnitary("state preparation may not measure"));
    }
    let n = a.n_qubits();
    let mut q = Circuit::new(n);
    let obj = problem.objective;
    q.x(obj)?;
    q.phase(obj, PI)?;
    q.x(obj)?;
    q.append(&a.inverse()?)?;
    let target = n - 1;
    let zeros: Vec<Control> = (0..target).map(Control::zero).collect();
    q.x(target)?;
    q.apply_controlled(Gate::Phase(PI), target, &zeros)?;
    q.x(target)?;
    q.append(a)?;
    Ok(q)
}

/// A followed by k applications of Q.
pub fn amplified_circuit(problem: &AProblem, k: usize) -> Result<Circuit> {
    let q = grover_operator(problem)?;
    let mut c = problem.state_prep.clone();
    for _ in 0..k {
        c.append(&q)?;
    }
    Ok(c)
}

/// Objective probabilities P₁(Q^j A|0⟩), computed lazily for growing j.
struct Amplifier {
    q: Circuit,
    objective: usize,
    state: StateVector,
    k: usize,
    probs: Vec<f64>,
}

impl Amplifier {
    fn new(problem: &AProblem, exec: Execution) -> Result<Self> {
        if problem.n_qubits() > MAX_QAE_QUBITS {
            return Err(Error::QubitBudget {
                needed: problem.n_qubits(),
                limit: MAX_QAE_QUBITS,
            });
        }
        let state = sim::statevector_with(&problem.state_prep, exec)?;
        let p0 = state.prob_one(problem.objective);
        Ok(Amplifier {
            q: grover_operator(problem)?,
            objective: problem.objective,
            state,
            k: 0,
            probs: vec![p0],
        })
    }

    fn prob(&mut self, k: usize) -> Result<f64> {
        while self.k < k {
            self.state.apply_unitary(&self.q)?;
            self.k += 1;
            self.probs.push(self.state.prob_one(self.objective));
        }
        Ok(self.probs[k])
    }
}

/// Objective probability after Q^j for j = 0..=max_j.
pub fn rotation_profile(problem: &AProblem, max_j: usize) -> Result<Vec<f64>> {
    let mut amp = Amplifier::new(problem, Execution::default())?;
    (0..=max_j).map(|j| amp.prob(j)).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IQAEConfig {
    /// Target half-width of the amplitude interval.
    pub epsilon: f64,
    pub confidence: f64,
    pub shots_per_round: u64,
    pub max_rounds: usize,
    /// Optional cap on the Grover power k.
    #[serde(default)]
    pub max_k: Option<usize>,
}

impl Default for IQAEConfig {
    fn default() -> Self {
        IQAEConfig {
            epsilon: 0.1,
            confidence: 0.95,
            shots_per_round: 100,
            max_rounds: 100,
            max_k: None,
        }
    }
}

impl IQAEConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0 && self.epsilon < 0.5) {
            return Err(Error::param("epsilon", "must lie in (0, 0.5)"));
        }
        if !(self.confidence > 0.0 && self.confidence < 1.0) {
            return Err(Error::param("confidence", "must lie in (0, 1)"));
        }
        if self.shots_per_round == 0 {
            return Err(Error::ZeroShots);
        }
        if self.max_rounds == 0 {
            return Err(Error::param("max_rounds", "must be positive"));
        }
        Ok(())
    }

    /// Number of rounds the failure probability is split over.
    pub fn bonferroni_rounds(&self) -> usize {
        ((2.0 * PI / 8.0 / self.epsilon).ln() / 2f64.ln()).max(0.0) as usize + 1
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IQAEResult {
    pub estimate: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    /// Σ shots·k over all rounds.
    pub oracle_calls: u64,
    /// k used in each round.
    pub rounds: Vec<usize>,
    pub ones: Vec<u64>,
    /// False when max_rounds stopped the run before the target width.
    pub converged: bool,
}

impl IQAEResult {
    pub fn half_width(&self) -> f64 {
        0.5 * (self.ci_high - self.ci_low)
    }

    pub fn covers(&self, a: f64) -> bool {
        self.ci_low <= a && a <= self.ci_high
    }
}

/// Next power k such that the scaled θ interval lies in one half circle.
fn find_next_k(k: usize, upper: bool, theta: (f64, f64), max_k: Option<usize>) -> (usize, bool) {
    let (lo, hi) = theta;
    let old_scaling = 4 * k + 2;
    let mut max_scaling = (1.0 / (2.0 * (hi - lo))).min(1e9) as usize;
    if let Some(cap) = max_k {
        max_scaling = max_scaling.min(4 * cap + 2);
    }
    if max_scaling < 2 {
        return (k, upper);
    }
    let mut scaling = max_scaling - (max_scaling - 2) % 4;
    while scaling >= 2 * old_scaling {
        let s = scaling as f64;
        let t_lo = s * lo - (s * lo).floor();
        let t_hi = s * hi - (s * hi).floor();
        if t_lo <= t_hi && t_hi <= 0.5 {
            return ((scaling - 2) / 4, true);
        }
        if t_hi >= 0.5 && t_lo >= 0.5 && t_hi >= t_lo {
            return ((scaling - 2) / 4, false);
        }
        scaling -= 4;
    }
    (k, upper)
}

/// Iterative amplitude estimation with Clopper–Pearson rounds. θ is kept
/// in units of full turns on [0, 1/4] so that a = sin²(2πθ).
pub fn iqae(problem: &AProblem, config: &IQAEConfig, seed: u64) -> Result<IQAEResult> {
    iqae_with(problem, config, seed, Execution::default())
}

pub fn iqae_with(problem: &AProblem, config: &IQAEConfig, seed: u64, exec: Execution) -> Result<IQAEResult> {
    config.validate()?;
    let mut amp = Amplifier::new(problem, exec)?;
    let mut rng = rng::seeded(seed);
    let alpha = (1.0 - config.confidence) / config.bonferroni_rounds() as f64;
    let shots = config.shots_per_round;

    let mut theta = (0.0f64, 0.25f64);
    let mut a_int = (0.0f64, 1.0f64);
    let mut upper = true;
    let mut rounds: Vec<usize> = Vec::new();
    let mut ones: Vec<u64> = Vec::new();
    let mut calls = 0u64;
    let mut converged = true;

    while theta.1 - theta.0 > config.epsilon / PI {
        if rounds.len() == config.max_rounds {
            converged = false;
            break;
        }
        let prev = rounds.last().copied().unwrap_or(0);
        let (k, up) = find_next_k(prev, upper, theta, config.max_k);
        upper = up;
        let p = amp.prob(k)?;
        let n1 = sample_ones(p, shots, &mut rng)?;
        rounds.push(k);
        ones.push(n1);
        calls += shots * k as u64;

        // pool all trailing rounds that used this k
        let pooled = rounds.iter().rev().take_while(|&&r| r == k).count();
        let pooled_ones: u64 = ones.iter().rev().take(pooled).sum();
        let (p_lo, p_hi) = clopper_pearson(pooled_ones, shots * pooled as u64, alpha)?;

        let turn = |x: f64| (1.0 - 2.0 * x).clamp(-1.0, 1.0).acos() / (2.0 * PI);
        let (t_lo_i, t_hi_i) = if upper {
            (turn(p_lo), turn(p_hi))
        } else {
            (1.0 - turn(p_hi), 1.0 - turn(p_lo))
        };
        let scaling = (4 * k + 2) as f64;
        let t_lo = ((scaling * theta.0).floor() + t_lo_i) / scaling;
        let t_hi = ((scaling * theta.1).floor() + t_hi_i) / scaling;
        theta = (t_lo.max(theta.0), t_hi.min(theta.1));
        if theta.0 > theta.1 {
            theta = (theta.1, theta.0);
        }
        let amp_of = |t: f64| (2.0 * PI * t).sin().powi(2);
        a_int = (amp_of(theta.0).clamp(0.0, 1.0), amp_of(theta.1).clamp(0.0, 1.0));
    }

    Ok(IQAEResult {
        estimate: 0.5 * (a_int.0 + a_int.1),
        ci_low: a_int.0,
        ci_high: a_int.1,
        oracle_calls: calls,
        rounds,
        ones,
        converged,
    })
}

/// Independent runs seeded by `stream(seed, i)`.
pub fn iqae_batch(problem: &AProblem, config: &IQAEConfig, seed: u64, runs: usize, exec: Execution) -> Result<Vec<IQAEResult>> {
    let seeds: Vec<u64> = (0..runs)
        .map(|i| {
            use rand::Rng;
            rng::stream(seed, i as u64).random::<u64>()
        })
        .collect();
    map_indexed(exec, runs, |i| iqae_with(problem, config, seeds[i], Execution::Sequential))
        .into_iter()
        .collect()
}

/// Phase-estimation distribution of canonical QAE.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CanonicalQae {
    pub eval_qubits: usize,
    /// P(y) for y in 0..2^m.
    pub probabilities: Vec<f64>,
    /// sin²(πy/2^m).
    pub grid: Vec<f64>,
}

impl CanonicalQae {
    /// Grid value of the most probable outcome.
    pub fn estimate(&self) -> f64 {
        let y = self
            .probabilities
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .map(|(y, _)| y)
            .unwrap_or(0);
        self.grid[y]
    }

    /// Probability mass per distinct grid value, y and 2^m − y merged.
    pub fn grid_distribution(&self) -> Vec<(f64, f64)> {
        let m = self.probabilities.len();
        (0..=m / 2)
            .map(|y| {
                let mirror = (m - y) % m;
                let p = if mirror == y {
                    self.probabilities[y]
                } else {
                    self.probabilities[y] + self.probabilities[mirror]
                };
                (self.grid[y], p)
            })
            .collect()
    }
}

/// Textbook QAE with `eval_qubits` counting qubits and an inverse QFT.
pub fn canonical_qae(problem: &AProblem, eval_qubits: usize) -> Result<CanonicalQae> {
    if eval_qubits == 0 {
        return Err(Error::param("eval_qubits", "need at least one evaluation qubit"));
    }
    let n = problem.n_qubits();
    let total = n + eval_qubits;
    if total > MAX_QAE_QUBITS || eval_qubits > 16 {
        return Err(Error::QubitBudget {
            needed: total,
            limit: MAX_QAE_QUBITS,
        });
    }
    let map: Vec<usize> = (eval_qubits..total).collect();
    let eval: Vec<usize> = (0..eval_qubits).collect();
    let q = grover_operator(problem)?;
    let mut c = Circuit::new(total);
    c.append_mapped(&problem.state_prep, &map)?;
    for &e in &eval {
        c.h(e)?;
    }
    let mut wide_q = Circuit::new(total);
    wide_q.append_mapped(&q, &map)?;
    for (j, &e) in eval.iter().enumerate() {
        let cq = wide_q.controlled(&[Control::one(e)])?;
        for _ in 0..1usize << j {
            c.append(&cq)?;
        }
    }
    iqft(&mut c, &eval)?;
    let probabilities = sim::statevector(&c)?.marginal(&eval)?;
    let size = 1usize << eval_qubits;
    let grid = (0..size).map(|y| (PI * y as f64 / size as f64).sin().powi(2)).collect();
    Ok(CanonicalQae {
        eval_qubits,
        probabilities,
        grid,
    })
}

/// Bits of a semiclassical phase estimate.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct QpeOutcome {
    /// b₁ … bₙ with φ ≈ 0.b₁b₂…bₙ (most significant first).
    pub bits: Vec<bool>,
    pub phase: f64,
}

impl QpeOutcome {
    pub fn bit_string(&self) -> String {
        self.bits.iter().map(|&b| if b { '1' } else { '0' }).collect()
    }
}

pub const MAX_QPE_BITS: usize = 12;

/// Single-ancilla phase estimation of `unitary` on the state prepared by
/// `prep`. Bits are measured from the least significant one, each round
/// using U^(2^(k−1)) and classically controlled phase corrections, and the
/// ancilla is reset between rounds.
pub fn qcl_qpe_circuit(unitary: &Circuit, prep: &Circuit, n_bits: usize) -> Result<Circuit> {
    if n_bits == 0 || n_bits > MAX_QPE_BITS {
        return Err(Error::param("n_bits", format!("must lie in 1..={MAX_QPE_BITS}")));
    }
    if prep.n_qubits() > unitary.n_qubits() {
        return Err(Error::param("prep", "wider than the unitary"));
    }
    let n_sys = unitary.n_qubits();
    if n_sys + 1 > MAX_QAE_QUBITS {
        return Err(Error::QubitBudget {
            needed: n_sys + 1,
            limit: MAX_QAE_QUBITS,
        });
    }
    let anc = 0;
    let map: Vec<usize> = (1..=n_sys).collect();
    let mut c = Circuit::with_bits(n_sys + 1, n_bits);
    c.append_mapped(prep, &map)?;
    let mut wide_u = Circuit::new(n_sys + 1);
    wide_u.append_mapped(unitary, &map)?;
    let cu = wide_u.controlled(&[Control::one(anc)])?;
    for k in (1..=n_bits).rev() {
        c.h(anc)?;
        for _ in 0..1usize << (k - 1) {
            c.append(&cu)?;
        }
        for l in k + 1..=n_bits {
            let angle = -2.0 * PI / (1u64 << (l - k + 1)) as f64;
            c.classical(Gate::Phase(angle), anc, l - 1)?;
        }
        c.h(anc)?;
        c.measure(anc, k - 1)?;
        c.reset(anc)?;
    }
    Ok(c)
}

pub fn qcl_qpe(unitary: &Circuit, prep: &Circuit, n_bits: usize, seed: u64) -> Result<QpeOutcome> {
    let c = qcl_qpe_circuit(unitary, prep, n_bits)?;
    let out = sim::run(&c, seed)?;
    let bits = out.bits[..n_bits].to_vec();
    let phase = bits
        .iter()
        .enumerate()
        .filter(|(_, &b)| b)
        .map(|(i, _)| 0.5f64.powi(i as i32 + 1))
        .sum();
    Ok(QpeOutcome { bits, phase })
}

/// Amplitude estimate sin²(πφ) from semiclassical QPE of Q on A|0⟩.
pub fn qcl_amplitude(problem: &AProblem, n_bits: usize, seed: u64) -> Result<f64> {
    let q = grover_operator(problem)?;
    let out = qcl_qpe(&q, &problem.state_prep, n_bits, seed)?;
    Ok((PI * out.phase).sin().powi(2))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quarter_amplitude_one_step() {
        let p = rotation_profile(&AProblem::bernoulli(0.25).unwrap(), 1).unwrap();
        assert!((p[0] - 0.25).abs() < 1e-12);
        assert!((p[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn trivial_amplitudes() {
        for (a, want) in [(0.0, 0.0), (1.0, 1.0)] {
            for p in rotation_profile(&AProblem::bernoulli(a).unwrap(), 5).unwrap() {
                assert!((p - want).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn measuring_prep_rejected() {
        let mut c = Circuit::with_bits(1, 1);
        c.measure(0, 0).unwrap();
        assert!(AProblem::new(c, 0).is_err());
    }

    #[test]
    fn iqae_known_amplitude() {
        let cfg = IQAEConfig {
            epsilon: 0.01,
            ..IQAEConfig::default()
        };
        let r = iqae(&AProblem::bernoulli(0.25).unwrap(), &cfg, 11).unwrap();
        assert!(r.converged);
        assert!((r.estimate - 0.25).abs() <= 0.01);
        assert!(r.half_width() <= 0.01 + 1e-12);
        assert!(r.rounds.windows(2).all(|w| w[0] <= w[1]));
        assert!(r.ci_low <= r.estimate && r.estimate <= r.ci_high);
    }

    #[test]
    fn iqae_zero_amplitude() {
        let r = iqae(&AProblem::bernoulli(0.0).unwrap(), &IQAEConfig::default(), 3).unwrap();
        assert!(r.estimate < 0.1 && r.ci_low == 0.0);
    }

    #[test]
    fn iqae_k_cap_and_partial() {
        let cfg = IQAEConfig {
            epsilon: 0.005,
            max_k: Some(1),
            max_rounds: 4,
            ..IQAEConfig::default()
        };
        let r = iqae(&AProblem::bernoulli(0.3).unwrap(), &cfg, 5).unwrap();
        assert!(r.rounds.iter().all(|&k| k <= 1));
        assert!(!r.converged);
        assert_eq!(r.rounds.len(), 4);
    }

    #[test]
    fn canonical_on_grid() {
        let r = canonical_qae(&AProblem::bernoulli(0.5).unwrap(), 2).unwrap();
        // eigenphases ±π/2 split the mass between y = 1 and y = 3
        assert!((r.probabilities[1] + r.probabilities[3] - 1.0).abs() < 1e-10);
        let d = r.grid_distribution();
        assert!((d[1].0 - 0.5).abs() < 1e-12 && (d[1].1 - 1.0).abs() < 1e-10);
        assert!((r.estimate() - 0.5).abs() < 1e-12);
        let z = canonical_qae(&AProblem::bernoulli(0.0).unwrap(), 3).unwrap();
        assert!((z.probabilities[0] - 1.0).abs() < 1e-10);
    }

    #[test]
    fn canonical_off_grid_closest() {
        let a = 0.3;
        let r = canonical_qae(&AProblem::bernoulli(a).unwrap(), 4).unwrap();
        let closest = r
            .grid
            .iter()
            .cloned()
            .min_by(|x, y| (x - a).abs().total_cmp(&(y - a).abs()))
            .unwrap();
        assert!((r.estimate() - closest).abs() < 1e-12);
        let total: f64 = r.grid_distribution().iter().map(|p| p.1).sum();
        assert!((total - 1.0).abs() < 1e-10);
    }

    #[test]
    fn qcl_dyadic_phase() {
        let mut u = Circuit::new(1);
        u.phase(0, 2.0 * PI * 3.0 / 8.0).unwrap();
        let mut prep = Circuit::new(1);
        prep.x(0).unwrap();
        let out = qcl_qpe(&u, &prep, 3, 0).unwrap();
        assert_eq!(out.bit_string(), "011");
        let id = Circuit::new(1);
        assert_eq!(qcl_qpe(&id, &prep, 3, 1).unwrap().phase, 0.0);
        let mut half = Circuit::new(1);
        half.phase(0, PI).unwrap();
        assert_eq!(qcl_qpe(&half, &prep, 1, 2).unwrap().bits, vec![true]);
        assert!(qcl_qpe(&half, &prep, 0, 2).is_err());
    }

    #[test]
    fn qcl_matches_canonical_for_dyadic_phases() {
        let mut prep = Circuit::new(1);
        prep.x(0).unwrap();
        for m in 0..8u32 {
            let mut u = Circuit::new(1);
            u.phase(0, 2.0 * PI * m as f64 / 8.0).unwrap();
            for seed in 0..3 {
                let out = qcl_qpe(&u, &prep, 3, seed).unwrap();
                assert!((out.phase - m as f64 / 8.0).abs() < 1e-12);
            }
        }
    }
}
