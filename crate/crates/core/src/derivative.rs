//! European call pricing under regime-switching log-normal dynamics.
//!
//! The circuit accumulates log-price increments in the Fourier basis of a
//! fixed-point price register P, converts to price space with x ≈ 1 + ln x,
//! compares P against the strike and encodes the payoff in the objective
//! amplitude through a linear rotation.

use crate::blocks::{
    draper_add_const, grid_addend, iqft, linear_payoff_rotation, prefix_comparator, qft, FixedPointSpec,
    LinearAmplitudeSpec,
};
use crate::error::{Error, Result};
use crate::markov::{append_chain, ChainSpec, TransitionMatrix};
use crate::par::{map_indexed, Execution};
use crate::sim::{self, rng, sample_ones, Circuit, Control, StateVector};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Model parameters; two-element arrays are `[good, bad]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegimeGBMParams {
    pub r: [f64; 2],
    /// σ at step i is sigma_base + min(max(sigma_ramp·i·dt, 0), sigma_cap).
    pub sigma_base: [f64; 2],
    pub sigma_ramp: f64,
    pub sigma_cap: f64,
    pub s0: f64,
    pub strike: f64,
    pub t_steps: usize,
    pub dt: f64,
    pub transition: TransitionMatrix,
}

impl RegimeGBMParams {
    pub fn validate(&self) -> Result<()> {
        if self.t_steps == 0 || self.t_steps > 24 {
            return Err(Error::param("t_steps", format!("{} not in 1..=24", self.t_steps)));
        }
        if !(self.dt > 0.0) {
            return Err(Error::param("dt", "must be positive"));
        }
        if !(self.s0 > 0.0) {
            return Err(Error::param("s0", "must be positive"));
        }
        if !(self.strike > 0.0) {
            return Err(Error::param("strike", "must be positive"));
        }
        if self.sigma_base.iter().any(|s| !(*s >= 0.0)) || !self.sigma_ramp.is_finite() || !self.sigma_cap.is_finite() {
            return Err(Error::param("sigma_base", "volatility must be non-negative and finite"));
        }
        if self.r.iter().any(|r| !r.is_finite()) {
            return Err(Error::param("r", "rates must be finite"));
        }
        self.transition.validate()
    }

    pub fn sigma(&self, regime: usize, step: usize) -> f64 {
        let t = step as f64 * self.dt;
        self.sigma_base[regime] + (self.sigma_ramp * t).max(0.0).min(self.sigma_cap)
    }

    pub fn with_strike(&self, strike: f64) -> Self {
        RegimeGBMParams {
            strike,
            ..self.clone()
        }
    }

    fn regimes(&self, with_regimes: bool) -> usize {
        if with_regimes {
            2
        } else {
            1
        }
    }

    fn chain(&self) -> Result<ChainSpec> {
        ChainSpec::homogeneous(&self.transition, self.t_steps)
    }

    /// Time-averaged expected short rate; the quantum price is discounted
    /// with exp(−r̄·T·dt).
    pub fn mean_rate(&self, with_regimes: bool) -> Result<f64> {
        if !with_regimes {
            return Ok(self.r[0]);
        }
        let m = self.chain()?.marginals();
        let total: f64 = (1..=self.t_steps).map(|t| m[t][0] * self.r[0] + m[t][1] * self.r[1]).sum();
        Ok(total / self.t_steps as f64)
    }

    pub fn horizon(&self) -> f64 {
        self.t_steps as f64 * self.dt
    }
}

/// (ln S_gu, ln S_gd, ln S_bu, ln S_bd) for step `t_index`.
pub fn step_increments(params: &RegimeGBMParams, t_index: usize) -> Result<[f64; 4]> {
    if t_index >= params.t_steps {
        return Err(Error::param("t_index", format!("{t_index} ≥ {}", params.t_steps)));
    }
    let mut out = [0.0; 4];
    for regime in 0..2 {
        let s = params.sigma(regime, t_index);
        let drift = (params.r[regime] - 0.5 * s * s) * params.dt;
        let shock = s * params.dt.sqrt();
        out[2 * regime] = drift + shock;
        out[2 * regime + 1] = drift - shock;
    }
    Ok(out)
}

/// Fixed-point price register and payoff scaling.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PriceRegisterSpec {
    pub fp: FixedPointSpec,
    pub rescale_c: f64,
}

impl PriceRegisterSpec {
    /// Largest representable register value.
    pub fn p_max(&self) -> f64 {
        self.fp.range().1 - self.fp.resolution()
    }

    /// Highest payout the register can express for `strike`.
    pub fn f_max(&self, strike: f64) -> f64 {
        self.p_max() - strike
    }

    /// First register integer whose value exceeds `strike`.
    pub fn strike_threshold(&self, strike: f64) -> u64 {
        ((strike / self.fp.resolution()).floor() + 1.0).max(0.0) as u64
    }

    pub fn payoff_spec(&self, strike: f64) -> Result<LinearAmplitudeSpec> {
        let f_max = self.f_max(strike);
        if !(f_max > 0.0) {
            return Err(Error::param("strike", format!("{strike} leaves no payoff in the register")));
        }
        Ok(LinearAmplitudeSpec {
            slope: self.fp.resolution() / f_max,
            offset: -strike / f_max,
            domain: (0, self.fp.modulus() - 1),
            rescale_c: self.rescale_c,
        })
    }

    /// Unsigned register of `n_qubits` whose integer part covers every
    /// reachable price.
    pub fn sized(params: &RegimeGBMParams, n_qubits: usize, rescale_c: f64, with_regimes: bool) -> Result<Self> {
        let (_, hi) = log_price_bounds(params, with_regimes)?;
        let top = 1.0 + hi;
        let n_int = (top.log2().floor() as i64 + 1).max(1) as usize;
        if n_int >= n_qubits {
            return Err(Error::QubitBudget {
                needed: n_int + 1,
                limit: n_qubits,
            });
        }
        let spec = PriceRegisterSpec {
            fp: FixedPointSpec::new(n_qubits, n_qubits - n_int, false)?,
            rescale_c,
        };
        spec.check_covers(params, with_regimes)?;
        Ok(spec)
    }

    pub fn check_covers(&self, params: &RegimeGBMParams, with_regimes: bool) -> Result<()> {
        let (lo, hi) = log_price_bounds(params, with_regimes)?;
        let (rlo, rhi) = self.fp.range();
        for v in [1.0 + lo, 1.0 + hi] {
            if v < rlo || v >= rhi - self.fp.resolution() / 2.0 {
                return Err(Error::Overflow {
                    value: v,
                    reason: format!("price outside the register range [{rlo}, {rhi})"),
                });
            }
        }
        Ok(())
    }
}

/// Smallest and largest ln S_T over all paths.
fn log_price_bounds(params: &RegimeGBMParams, with_regimes: bool) -> Result<(f64, f64)> {
    params.validate()?;
    let mut lo = params.s0.ln();
    let mut hi = lo;
    for i in 0..params.t_steps {
        let inc = step_increments(params, i)?;
        let used = &inc[..2 * params.regimes(with_regimes)];
        lo += used.iter().cloned().fold(f64::INFINITY, f64::min);
        hi += used.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    }
    Ok((lo, hi))
}

/// Price register, Brownian register and (optionally) the Markov chain.
/// Registers: "mc" (T+1, with regimes), "b" (T), "p", "cmp", "obj".
#[derive(Clone, Debug)]
pub struct PriceCircuit {
    pub circuit: Circuit,
    pub p: Vec<usize>,
    pub cmp: usize,
    pub obj: usize,
}

/// Everything up to and including the inverse QFT of P.
pub fn build_price_circuit(params: &RegimeGBMParams, spec: &PriceRegisterSpec, with_regimes: bool) -> Result<PriceCircuit> {
    params.validate()?;
    spec.check_covers(params, with_regimes)?;
    let t = params.t_steps;
    let mut c = Circuit::new(0);
    let mc = if with_regimes {
        c.add_register("mc", t + 1)?.qubits()
    } else {
        Vec::new()
    };
    let b = c.add_register("b", t)?.qubits();
    let p = c.add_register("p", spec.fp.n_total)?.qubits();
    let cmp = c.add_register("cmp", 1)?.qubit(0);
    let obj = c.add_register("obj", 1)?.qubit(0);
    let fp = &spec.fp;

    if with_regimes {
        append_chain(&mut c, &mc, &params.chain()?, true)?;
    }
    for &q in &b {
        c.h(q)?;
    }
    qft(&mut c, &p)?;
    draper_add_const(&mut c, &p, params.s0.ln(), fp, &[], false)?;
    for (i, &bq) in b.iter().enumerate() {
        let inc = step_increments(params, i)?;
        for regime in 0..params.regimes(with_regimes) {
            for down in [false, true] {
                let mut ctl = vec![Control::when(bq, down)];
                if with_regimes {
                    ctl.insert(0, Control::when(mc[i + 1], regime == 1));
                }
                draper_add_const(&mut c, &p, inc[2 * regime + usize::from(down)], fp, &ctl, false)?;
            }
        }
    }
    draper_add_const(&mut c, &p, 1.0, fp, &[], false)?;
    iqft(&mut c, &p)?;
    Ok(PriceCircuit { circuit: c, p, cmp, obj })
}

/// Comparator and payoff rotation for one strike.
pub fn payoff_circuit(pc: &PriceCircuit, spec: &PriceRegisterSpec, strike: f64) -> Result<Circuit> {
    let mut c = Circuit::new(pc.circuit.n_qubits());
    let t = spec.strike_threshold(strike).min(spec.fp.modulus());
    prefix_comparator(&mut c, &pc.p, t, pc.cmp)?;
    linear_payoff_rotation(&mut c, &spec.payoff_spec(strike)?, &pc.p, pc.cmp, pc.obj)?;
    Ok(c)
}

/// Price = (2·f_max/(π·c))·(prob − ½ + c·π/4).
pub fn price_from_prob(prob: f64, f_max: f64, rescale_c: f64) -> f64 {
    2.0 * f_max / (PI * rescale_c) * (prob - 0.5 + rescale_c * PI / 4.0)
}

/// Enumerates Brownian and regime paths. `f` receives the path weight,
/// the regime-path discount factor and the per-step (regime, down) choices.
fn for_each_path<F: FnMut(f64, f64, &[(usize, bool)])>(params: &RegimeGBMParams, with_regimes: bool, mut f: F) -> Result<()> {
    params.validate()?;
    let t = params.t_steps;
    let chain = params.chain()?;
    let n_regime_paths = if with_regimes { 1usize << (t + 1) } else { 1 };
    let mut steps = vec![(0usize, false); t];
    for rp in 0..n_regime_paths {
        let pr = if with_regimes { chain.path_probability(rp) } else { 1.0 };
        if pr == 0.0 {
            continue;
        }
        let mut rate_sum = 0.0;
        for (i, s) in steps.iter_mut().enumerate() {
            s.0 = if with_regimes { rp >> (i + 1) & 1 } else { 0 };
            rate_sum += params.r[s.0];
        }
        let discount = (-rate_sum * params.dt).exp();
        for bp in 0..1usize << t {
            for (i, s) in steps.iter_mut().enumerate() {
                s.1 = bp >> i & 1 == 1;
            }
            f(pr / (1u64 << t) as f64, discount, &steps);
        }
    }
    Ok(())
}

/// Exact two-point-tree price with path-wise discounting.
pub fn exact_option_price(params: &RegimeGBMParams, with_regimes: bool) -> Result<f64> {
    let incs: Vec<[f64; 4]> = (0..params.t_steps).map(|i| step_increments(params, i)).collect::<Result<_>>()?;
    let mut total = 0.0;
    for_each_path(params, with_regimes, |w, disc, steps| {
        let x: f64 = steps
            .iter()
            .enumerate()
            .map(|(i, (r, d))| incs[i][2 * r + usize::from(*d)])
            .sum();
        total += w * disc * (params.s0 * x.exp() - params.strike).max(0.0);
    })?;
    Ok(total)
}

/// Classical P-register distribution with the circuit's per-constant
/// grid rounding and modular wrap.
pub fn grid_price_distribution(params: &RegimeGBMParams, spec: &PriceRegisterSpec, with_regimes: bool) -> Result<Vec<f64>> {
    let fp = &spec.fp;
    let m = fp.modulus();
    let g = |v: f64| grid_addend(v, fp, false);
    let incs: Vec<[u64; 4]> = (0..params.t_steps)
        .map(|i| {
            let inc = step_increments(params, i)?;
            Ok([g(inc[0])?, g(inc[1])?, g(inc[2])?, g(inc[3])?])
        })
        .collect::<Result<_>>()?;
    let base = (g(params.s0.ln())? + g(1.0)?) % m;
    let mut dist = vec![0.0; m as usize];
    for_each_path(params, with_regimes, |w, _, steps| {
        let mut x = base;
        for (i, (r, d)) in steps.iter().enumerate() {
            x = (x + incs[i][2 * r + usize::from(*d)]) % m;
        }
        dist[x as usize] += w;
    })?;
    Ok(dist)
}

/// Stepwise price references for one strike; consecutive differences
/// attribute the quantum-vs-exact gap.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PriceBreakdown {
    pub strike: f64,
    /// Path-wise discounted exact tree price.
    pub exact: f64,
    /// Exact payoff, expected-rate discount.
    pub mean_discount: f64,
    /// Payoff on 1 + ln S_T instead of S_T.
    pub taylor: f64,
    /// Payoff on the rounded register value.
    pub grid: f64,
    /// Recovered from the exact objective probability.
    pub quantum: f64,
    pub objective_prob: f64,
}

impl PriceBreakdown {
    pub fn discount_error(&self) -> f64 {
        self.mean_discount - self.exact
    }
    pub fn taylor_error(&self) -> f64 {
        self.taylor - self.mean_discount
    }
    pub fn grid_error(&self) -> f64 {
        self.grid - self.taylor
    }
    pub fn small_angle_error(&self) -> f64 {
        self.quantum - self.grid
    }
    pub fn total_error(&self) -> f64 {
        self.quantum - self.exact
    }
}

/// Shared P-register state for a batch of strikes.
pub struct PricingState {
    pub circuit: PriceCircuit,
    pub state: StateVector,
    pub spec: PriceRegisterSpec,
    pub discount: f64,
}

impl PricingState {
    pub fn new(params: &RegimeGBMParams, spec: &PriceRegisterSpec, with_regimes: bool, exec: Execution) -> Result<Self> {
        let circuit = build_price_circuit(params, spec, with_regimes)?;
        let state = sim::statevector_with(&circuit.circuit, exec)?;
        let discount = (-params.mean_rate(with_regimes)? * params.horizon()).exp();
        Ok(PricingState {
            circuit,
            state,
            spec: *spec,
            discount,
        })
    }

    /// P-register marginal.
    pub fn p_distribution(&self) -> Result<Vec<f64>> {
        self.state.marginal(&self.circuit.p)
    }

    /// Exact objective probability for `strike`.
    pub fn objective_prob(&self, strike: f64) -> Result<f64> {
        let mut s = self.state.clone();
        s.apply_unitary(&payoff_circuit(&self.circuit, &self.spec, strike)?)?;
        s.check_norm()?;
        Ok(s.prob_one(self.circuit.obj))
    }

    /// Discounted price recovered from an objective probability.
    pub fn price(&self, prob: f64, strike: f64) -> f64 {
        self.discount * price_from_prob(prob, self.spec.f_max(strike), self.spec.rescale_c)
    }
}

/// Σ_x P(x)·sin²(y(x) + π/4) over a P-register distribution.
pub fn closed_form_objective(dist: &[f64], spec: &PriceRegisterSpec, strike: f64) -> Result<f64> {
    let lin = spec.payoff_spec(strike)?;
    let t = spec.strike_threshold(strike);
    Ok(dist
        .iter()
        .enumerate()
        .map(|(x, p)| p * lin.objective_probability(x as u64, x as u64 >= t))
        .sum())
}

/// Full error breakdown for each strike, sharing one statevector.
pub fn price_breakdown(
    params: &RegimeGBMParams,
    spec: &PriceRegisterSpec,
    with_regimes: bool,
    strikes: &[f64],
    exec: Execution,
) -> Result<Vec<PriceBreakdown>> {
    let ps = PricingState::new(params, spec, with_regimes, exec)?;
    let incs: Vec<[f64; 4]> = (0..params.t_steps).map(|i| step_increments(params, i)).collect::<Result<_>>()?;
    let grid_dist = grid_price_distribution(params, spec, with_regimes)?;
    strikes
        .iter()
        .map(|&k| {
            let p = params.with_strike(k);
            let exact = exact_option_price(&p, with_regimes)?;
            let (mut plain, mut taylor) = (0.0, 0.0);
            for_each_path(&p, with_regimes, |w, _, steps| {
                let x: f64 = steps
                    .iter()
                    .enumerate()
                    .map(|(i, (r, d))| incs[i][2 * r + usize::from(*d)])
                    .sum::<f64>()
                    + p.s0.ln();
                plain += w * (x.exp() - k).max(0.0);
                taylor += w * (1.0 + x - k).max(0.0);
            })?;
            let t = spec.strike_threshold(k);
            let grid: f64 = grid_dist
                .iter()
                .enumerate()
                .filter(|(x, _)| *x as u64 >= t)
                .map(|(x, w)| w * (spec.fp.decode(x) - k))
                .sum();
            let prob = ps.objective_prob(k)?;
            Ok(PriceBreakdown {
                strike: k,
                exact,
                mean_discount: ps.discount * plain,
                taylor: ps.discount * taylor,
                grid: ps.discount * grid,
                quantum: ps.price(prob, k),
                objective_prob: prob,
            })
        })
        .collect()
}

/// Sampled-mode pricing MSE against the exact tree prices.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SampledPricing {
    pub strikes: Vec<f64>,
    pub exact: Vec<f64>,
    pub objective_probs: Vec<f64>,
    /// Mean sampled price per strike.
    pub mean_price: Vec<f64>,
    pub mse: f64,
    pub mse_stderr: f64,
}

/// N iterations of S-shot estimates of each strike's objective. Iteration
/// n uses stream (seed, n) and visits the strikes in order.
#[allow(clippy::too_many_arguments)]
pub fn sampled_pricing(
    params: &RegimeGBMParams,
    spec: &PriceRegisterSpec,
    with_regimes: bool,
    strikes: &[f64],
    shots: u64,
    iterations: usize,
    seed: u64,
    exec: Execution,
) -> Result<SampledPricing> {
    if shots == 0 {
        return Err(Error::ZeroShots);
    }
    if iterations == 0 || strikes.is_empty() {
        return Err(Error::param("iterations", "need at least one iteration and one strike"));
    }
    let ps = PricingState::new(params, spec, with_regimes, exec)?;
    let probs: Vec<f64> = strikes.iter().map(|k| ps.objective_prob(*k)).collect::<Result<_>>()?;
    let exact: Vec<f64> = strikes
        .iter()
        .map(|k| exact_option_price(&params.with_strike(*k), with_regimes))
        .collect::<Result<_>>()?;
    let runs: Vec<Result<Vec<f64>>> = map_indexed(exec, iterations, |n| {
        let mut r = rng::stream(seed, n as u64);
        strikes
            .iter()
            .zip(&probs)
            .map(|(k, p)| {
                let ones = sample_ones(*p, shots, &mut r)?;
                Ok(ps.price(ones as f64 / shots as f64, *k))
            })
            .collect()
    });
    let runs: Vec<Vec<f64>> = runs.into_iter().collect::<Result<_>>()?;
    let per_run: Vec<f64> = runs
        .iter()
        .map(|prices| {
            prices
                .iter()
                .zip(&exact)
                .map(|(a, b)| (a - b).powi(2))
                .sum::<f64>()
                / strikes.len() as f64
        })
        .collect();
    let (mse, mse_stderr) = crate::stats::mean_stderr(&per_run);
    let mean_price = (0..strikes.len())
        .map(|k| runs.iter().map(|r| r[k]).sum::<f64>() / iterations as f64)
        .collect();
    Ok(SampledPricing {
        strikes: strikes.to_vec(),
        exact,
        objective_probs: probs,
        mean_price,
        mse,
        mse_stderr,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(t_steps: usize) -> RegimeGBMParams {
        RegimeGBMParams {
            r: [0.2, 0.1],
            sigma_base: [0.2, 0.3],
            sigma_ramp: 1.2,
            sigma_cap: 0.1,
            s0: 1.0,
            strike: 1.0,
            t_steps,
            dt: 1.0 / 12.0,
            transition: TransitionMatrix {
                p_gb: 0.3,
                p_bg: 0.4,
            },
        }
    }

    #[test]
    fn increment_examples() {
        let mut p = params(1);
        p.sigma_base = [0.0, 0.0];
        p.sigma_cap = 0.0;
        p.r = [0.05, 0.05];
        for v in step_increments(&p, 0).unwrap() {
            assert!((v - 0.05 / 12.0).abs() < 1e-15);
        }
        p.sigma_base = [0.2, 0.2];
        p.r = [0.1, 0.1];
        p.dt = 1.0;
        let inc = step_increments(&p, 0).unwrap();
        assert!((inc[0] - 0.28).abs() < 1e-15 && (inc[1] + 0.12).abs() < 1e-15);
        let q = params(3);
        let inc = step_increments(&q, 2).unwrap();
        let (sg, sb) = (q.sigma(0, 2), q.sigma(1, 2));
        let want = (q.r[1] - q.r[0] - 0.5 * (sb * sb - sg * sg)) * q.dt + (sb - sg) * q.dt.sqrt();
        assert!((inc[2] - inc[0] - want).abs() < 1e-15);
        assert!(step_increments(&q, 3).is_err());
    }

    #[test]
    fn schedule() {
        let p = params(6);
        assert!((p.sigma(0, 0) - 0.2).abs() < 1e-15);
        assert!((p.sigma(0, 1) - 0.3).abs() < 1e-15);
        assert!((p.sigma(1, 5) - 0.4).abs() < 1e-15);
    }

    #[test]
    fn price_formula_points() {
        let (f, c) = (0.7, 0.05);
        assert!(price_from_prob(0.5 - c * PI / 4.0, f, c).abs() < 1e-15);
        assert!((price_from_prob(0.5 + c * PI / 4.0, f, c) - f).abs() < 1e-12);
        assert!((price_from_prob(0.5, f, c) - f / 2.0).abs() < 1e-12);
    }

    #[test]
    fn deterministic_limits() {
        let mut p = params(3);
        p.sigma_base = [0.0, 0.0];
        p.sigma_cap = 0.0;
        p.r = [0.0, 0.0];
        p.strike = 0.8;
        assert!((exact_option_price(&p, false).unwrap() - 0.2).abs() < 1e-14);
        // σ = 0 with drift 1/16 per step on a 1/16 grid: point mass
        p.r = [0.75, 0.75];
        let spec = PriceRegisterSpec {
            fp: FixedPointSpec::new(6, 4, false).unwrap(),
            rescale_c: 0.1,
        };
        let pc = build_price_circuit(&p, &spec, false).unwrap();
        let s = sim::statevector(&pc.circuit).unwrap();
        let dist = s.marginal(&pc.p).unwrap();
        let want = spec.fp.encode(1.0 + 3.0 / 16.0).unwrap();
        assert!((dist[want] - 1.0).abs() < 1e-10);
    }

    #[test]
    fn register_matches_enumeration() {
        for with_regimes in [false, true] {
            let p = params(2);
            let spec = PriceRegisterSpec::sized(&p, 6, 0.1, with_regimes).unwrap();
            let pc = build_price_circuit(&p, &spec, with_regimes).unwrap();
            let got = sim::statevector(&pc.circuit).unwrap().marginal(&pc.p).unwrap();
            let want = grid_price_distribution(&p, &spec, with_regimes).unwrap();
            for (a, b) in got.iter().zip(&want) {
                assert!((a - b).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn identical_regimes_collapse() {
        let mut p = params(2);
        p.r = [0.1, 0.1];
        p.sigma_base = [0.25, 0.25];
        let spec = PriceRegisterSpec::sized(&p, 6, 0.1, true).unwrap();
        let a = PricingState::new(&p, &spec, true, Execution::Sequential).unwrap();
        let b = PricingState::new(&p, &spec, false, Execution::Sequential).unwrap();
        let (da, db) = (a.p_distribution().unwrap(), b.p_distribution().unwrap());
        for (x, y) in da.iter().zip(&db) {
            assert!((x - y).abs() < 1e-9);
        }
    }

    #[test]
    fn objective_matches_closed_form_and_is_monotone() {
        let p = params(2);
        let spec = PriceRegisterSpec::sized(&p, 7, 0.2, true).unwrap();
        let ps = PricingState::new(&p, &spec, true, Execution::default()).unwrap();
        let dist = ps.p_distribution().unwrap();
        let mut last = f64::INFINITY;
        for k in [0.9, 0.95, 1.0, 1.05, 1.1] {
            let prob = ps.objective_prob(k).unwrap();
            assert!((prob - closed_form_objective(&dist, &spec, k).unwrap()).abs() < 1e-9);
            let price = ps.price(prob, k);
            assert!(price <= last + 1e-12);
            last = price;
        }
    }

    #[test]
    fn breakdown_telescopes() {
        let p = params(2);
        let spec = PriceRegisterSpec::sized(&p, 7, 0.05, true).unwrap();
        for b in price_breakdown(&p, &spec, true, &[0.95, 1.05], Execution::default()).unwrap() {
            let sum = b.discount_error() + b.taylor_error() + b.grid_error() + b.small_angle_error();
            assert!((sum - b.total_error()).abs() < 1e-12);
        }
    }

    #[test]
    fn overflow_detected() {
        let mut p = params(6);
        p.sigma_base = [1.0, 1.5];
        let tiny = PriceRegisterSpec {
            fp: FixedPointSpec::new(4, 3, false).unwrap(),
            rescale_c: 0.05,
        };
        assert!(build_price_circuit(&p, &tiny, true).is_err());
    }
}
