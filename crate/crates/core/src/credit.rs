//! Static-portfolio credit risk under a two-regime economy: Vasicek
//! conditional default probabilities, the A = C·S·U circuit and a classical
//! loss-distribution oracle.

use crate::blocks::{integer_comparator, normal_grid_probs, prepare_distribution, weighted_sum};
use crate::error::{Error, Result};
use crate::markov::ry_angle;
use crate::sim::{self, Circuit, Control, Gate};
use crate::stats::{norm_cdf, norm_ppf};
use serde::{Deserialize, Serialize};

/// Per-group parameters, indexed `[good, bad]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CreditGroupParams {
    pub p: [f64; 2],
    pub rho: [f64; 2],
    pub lgd: u64,
}

impl CreditGroupParams {
    pub fn validate(&self) -> Result<()> {
        for &p in &self.p {
            if !(p > 0.0 && p < 1.0) {
                return Err(Error::param("p", format!("{p} not in (0, 1)")));
            }
        }
        for &r in &self.rho {
            if !(0.0..1.0).contains(&r) {
                return Err(Error::param("rho", format!("{r} not in [0, 1)")));
            }
        }
        if self.lgd == 0 {
            return Err(Error::param("lgd", "loss given default must be at least 1"));
        }
        Ok(())
    }

    /// Same parameters in both regimes.
    pub fn single(p: f64, rho: f64, lgd: u64) -> Self {
        CreditGroupParams {
            p: [p, p],
            rho: [rho, rho],
            lgd,
        }
    }
}

/// Probability that the coming period is in the good regime.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegimePrior {
    pub p_good: f64,
}

impl RegimePrior {
    pub fn new(p_good: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p_good) {
            return Err(Error::param("p_good", format!("{p_good} not in [0, 1]")));
        }
        Ok(RegimePrior { p_good })
    }

    pub fn weights(&self) -> [f64; 2] {
        [self.p_good, 1.0 - self.p_good]
    }
}

/// Discretised latent factor: k ∈ 0..2^n_z is N(mean, stddev²)-weighted and
/// mapped to z = a_w·k + b_w.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LatentGrid {
    pub n_z: usize,
    pub a_w: f64,
    pub b_w: f64,
    pub mean: f64,
    pub stddev: f64,
}

impl LatentGrid {
    /// z = (k − mean)/stddev, i.e. the grid in standard-normal units.
    pub fn standard(n_z: usize, mean: f64, stddev: f64) -> Self {
        LatentGrid {
            n_z,
            a_w: 1.0 / stddev,
            b_w: -mean / stddev,
            mean,
            stddev,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_z == 0 || self.n_z > 12 {
            return Err(Error::param("n_z", format!("{} not in 1..=12", self.n_z)));
        }
        if !(self.stddev > 0.0) {
            return Err(Error::param("stddev", "must be positive"));
        }
        if !self.a_w.is_finite() || !self.b_w.is_finite() || self.a_w == 0.0 {
            return Err(Error::param("a_w", "affine map must be finite and non-degenerate"));
        }
        Ok(())
    }

    pub fn points(&self) -> Vec<f64> {
        (0..1usize << self.n_z)
            .map(|k| self.a_w * k as f64 + self.b_w)
            .collect()
    }

    pub fn weights(&self) -> Result<Vec<f64>> {
        normal_grid_probs(self.n_z, self.mean, self.stddev)
    }
}

impl Default for LatentGrid {
    fn default() -> Self {
        LatentGrid::standard(3, 3.5, 1.5)
    }
}

/// Φ((Φ⁻¹(p) − √ρ·z)/√(1−ρ)).
pub fn conditional_default_prob(p: f64, rho: f64, z: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::param("p", format!("{p} not in (0, 1)")));
    }
    if !(0.0..1.0).contains(&rho) {
        return Err(Error::param("rho", format!("{rho} not in [0, 1)")));
    }
    Ok(norm_cdf((norm_ppf(p) - rho.sqrt() * z) / (1.0 - rho).sqrt()))
}

fn regime_prob(group: &CreditGroupParams, regime: usize, z: f64, divisor: f64) -> Result<f64> {
    Ok(conditional_default_prob(group.p[regime], group.rho[regime], z)? / divisor)
}

/// Prior-weighted mixture of the two regime-conditional probabilities.
pub fn regime_mixed_default_prob(group: &CreditGroupParams, prior: &RegimePrior, z: f64) -> Result<f64> {
    let w = prior.weights();
    Ok(w[0] * conditional_default_prob(group.p[0], group.rho[0], z)?
        + w[1] * conditional_default_prob(group.p[1], group.rho[1], z)?)
}

/// How the default rotations θ(z) = 2·asin√p(z) are synthesised.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Linearization {
    /// Least squares over the grid, weighted by the latent distribution.
    #[default]
    LeastSquares,
    /// Tangent at the latent mean.
    Tangent,
    /// One multi-controlled rotation per grid point.
    Exact,
}

/// θ ≈ slope·z + intercept, with the worst grid residual.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ThetaFit {
    pub slope: f64,
    pub intercept: f64,
    pub max_residual: f64,
}

fn theta_mixed(group: &CreditGroupParams, prior: &RegimePrior, z: f64, divisor: f64) -> Result<f64> {
    let w = prior.weights();
    let mut p = 0.0;
    for (r, wr) in w.iter().enumerate() {
        if *wr > 0.0 {
            p += wr * regime_prob(group, r, z, divisor)?;
        }
    }
    Ok(2.0 * p.sqrt().asin())
}

/// First-order fit of θ(z) for the prior-mixed default probability.
pub fn linearize_theta(
    group: &CreditGroupParams,
    prior: &RegimePrior,
    grid: &LatentGrid,
    method: Linearization,
    divisor: f64,
) -> Result<ThetaFit> {
    grid.validate()?;
    let zs = grid.points();
    let thetas: Vec<f64> = zs
        .iter()
        .map(|z| theta_mixed(group, prior, *z, divisor))
        .collect::<Result<_>>()?;
    let (slope, intercept) = match method {
        Linearization::LeastSquares | Linearization::Exact => {
            let w = grid.weights()?;
            let zm: f64 = w.iter().zip(&zs).map(|(w, z)| w * z).sum();
            let tm: f64 = w.iter().zip(&thetas).map(|(w, t)| w * t).sum();
            let cov: f64 = (0..zs.len()).map(|i| w[i] * (zs[i] - zm) * (thetas[i] - tm)).sum();
            let var: f64 = (0..zs.len()).map(|i| w[i] * (zs[i] - zm).powi(2)).sum();
            let slope = if var > 0.0 { cov / var } else { 0.0 };
            (slope, tm - slope * zm)
        }
        Linearization::Tangent => {
            let z0 = grid.a_w * grid.mean + grid.b_w;
            let h = 1e-5;
            let d = (theta_mixed(group, prior, z0 + h, divisor)? - theta_mixed(group, prior, z0 - h, divisor)?)
                / (2.0 * h);
            (d, theta_mixed(group, prior, z0, divisor)? - d * z0)
        }
    };
    let max_residual = zs
        .iter()
        .zip(&thetas)
        .map(|(z, t)| (t - (slope * z + intercept)).abs())
        .fold(0.0, f64::max);
    Ok(ThetaFit {
        slope,
        intercept,
        max_residual,
    })
}

/// Complete static credit model.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CreditModel {
    pub groups: Vec<CreditGroupParams>,
    pub grid: LatentGrid,
    pub prior: RegimePrior,
    /// Conditional probabilities are divided by this (horizon to period).
    pub horizon_divisor: f64,
    pub linearization: Linearization,
}

impl CreditModel {
    pub fn validate(&self) -> Result<()> {
        if self.groups.is_empty() {
            return Err(Error::param("groups", "at least one group"));
        }
        self.groups.iter().try_for_each(CreditGroupParams::validate)?;
        self.grid.validate()?;
        RegimePrior::new(self.prior.p_good)?;
        if !(self.horizon_divisor >= 1.0) {
            return Err(Error::param("horizon_divisor", "must be at least 1"));
        }
        Ok(())
    }

    pub fn max_loss(&self) -> u64 {
        self.groups.iter().map(|g| g.lgd).sum()
    }

    fn sum_width(&self) -> usize {
        (u64::BITS - self.max_loss().leading_zeros()) as usize
    }

    /// Qubits used by the A operator.
    pub fn n_qubits(&self) -> usize {
        let s = self.sum_width();
        1 + self.grid.n_z + self.groups.len() + s + s.saturating_sub(1) + 1
    }

    /// Per-regime θ fits (prior pinned to each regime).
    pub fn regime_fits(&self) -> Result<Vec<[ThetaFit; 2]>> {
        let good = RegimePrior { p_good: 1.0 };
        let bad = RegimePrior { p_good: 0.0 };
        self.groups
            .iter()
            .map(|g| {
                Ok([
                    linearize_theta(g, &good, &self.grid, self.linearization, self.horizon_divisor)?,
                    linearize_theta(g, &bad, &self.grid, self.linearization, self.horizon_divisor)?,
                ])
            })
            .collect()
    }
}

/// A operator with its register layout.
#[derive(Clone, Debug)]
pub struct CreditCircuit {
    pub circuit: Circuit,
    pub objective: usize,
}

/// A = C·S·U: the objective flips iff the total loss is ≥ `threshold`.
pub fn build_a_operator(model: &CreditModel, threshold: u64) -> Result<CreditCircuit> {
    model.validate()?;
    let l_max = model.max_loss();
    if threshold > l_max {
        return Err(Error::param(
            "threshold",
            format!("{threshold} exceeds the maximum loss {l_max}"),
        ));
    }
    let s_width = model.sum_width();
    let mut c = Circuit::new(0);
    let regime = c.add_register("regime", 1)?.qubit(0);
    let z = c.add_register("z", model.grid.n_z)?.qubits();
    let x = c.add_register("x", model.groups.len())?.qubits();
    let s = c.add_register("s", s_width)?.qubits();
    let work = c.add_register("work", s_width.saturating_sub(1))?.qubits();
    let obj = c.add_register("obj", 1)?.qubit(0);

    // U: regime, latent factor, default rotations
    c.ry(regime, ry_angle(model.prior.p_good))?;
    prepare_distribution(&mut c, &z, &model.grid.weights()?)?;
    let pinned = [model.prior.p_good >= 1.0, model.prior.p_good <= 0.0];
    match model.linearization {
        Linearization::Exact => {
            let zs = model.grid.points();
            for (g, &xq) in model.groups.iter().zip(&x) {
                for r in 0..2 {
                    if pinned[1 - r] {
                        continue;
                    }
                    for (k, &zk) in zs.iter().enumerate() {
                        let theta = ry_angle(1.0 - regime_prob(g, r, zk, model.horizon_divisor)?);
                        let mut ctl: Vec<Control> = z
                            .iter()
                            .enumerate()
                            .map(|(j, &q)| Control::when(q, k >> j & 1 == 1))
                            .collect();
                        ctl.push(Control::when(regime, r == 1));
                        c.apply_controlled(Gate::Ry(theta), xq, &ctl)?;
                    }
                }
            }
        }
        _ => {
            for (fit, &xq) in model.regime_fits()?.iter().zip(&x) {
                for r in 0..2 {
                    if pinned[1 - r] {
                        continue;
                    }
                    let f = fit[r];
                    let rc = Control::when(regime, r == 1);
                    let base = f.intercept + f.slope * model.grid.b_w;
                    c.apply_controlled(Gate::Ry(base), xq, &[rc])?;
                    for (j, &q) in z.iter().enumerate() {
                        let theta = f.slope * model.grid.a_w * (1u64 << j) as f64;
                        c.apply_controlled(Gate::Ry(theta), xq, &[rc, Control::one(q)])?;
                    }
                }
            }
        }
    }
    // S and C
    let lgds: Vec<u64> = model.groups.iter().map(|g| g.lgd).collect();
    weighted_sum(&mut c, &x, &lgds, &s)?;
    integer_comparator(&mut c, &s, threshold, obj, &work)?;
    Ok(CreditCircuit {
        circuit: c,
        objective: obj,
    })
}

/// P(objective = 1) = P(L ≥ threshold) from the circuit statevector.
pub fn objective_probability(model: &CreditModel, threshold: u64) -> Result<f64> {
    let a = build_a_operator(model, threshold)?;
    Ok(sim::statevector(&a.circuit)?.prob_one(a.objective))
}

/// Exact loss distribution over 0..=L_max by enumerating regimes, grid
/// points and default patterns.
pub fn exact_loss_distribution(model: &CreditModel) -> Result<Vec<f64>> {
    model.validate()?;
    let zs = model.grid.points();
    let wz = model.grid.weights()?;
    let l_max = model.max_loss() as usize;
    let n = model.groups.len();
    if n > 20 {
        return Err(Error::param("groups", "too many groups to enumerate"));
    }
    let mut dist = vec![0.0; l_max + 1];
    for (r, wr) in model.prior.weights().iter().enumerate() {
        if *wr == 0.0 {
            continue;
        }
        for (zk, wk) in zs.iter().zip(&wz) {
            let ps: Vec<f64> = model
                .groups
                .iter()
                .map(|g| regime_prob(g, r, *zk, model.horizon_divisor))
                .collect::<Result<_>>()?;
            for pattern in 0..1usize << n {
                let mut prob = wr * wk;
                let mut loss = 0usize;
                for (g, p) in ps.iter().enumerate() {
                    if pattern >> g & 1 == 1 {
                        prob *= p;
                        loss += model.groups[g].lgd as usize;
                    } else {
                        prob *= 1.0 - p;
                    }
                }
                dist[loss] += prob;
            }
        }
    }
    Ok(dist)
}

pub fn cdf(dist: &[f64]) -> Vec<f64> {
    dist.iter()
        .scan(0.0, |acc, p| {
            *acc += p;
            Some(*acc)
        })
        .collect()
}

/// Outcome of a V@R bisection.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VarResult {
    pub var: u64,
    /// Number of distinct loss levels whose CDF was evaluated.
    pub evaluations: usize,
    /// Evaluated (level, CDF) pairs in call order.
    pub trace: Vec<(u64, f64)>,
    /// True when the evaluated CDF values were not monotone.
    pub inconsistent: bool,
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::param("alpha", format!("{alpha} not in [0, 1]")));
    }
    Ok(())
}

/// Smallest loss x in 0..=l_max with CDF(x) ≥ alpha, by bisection.
/// CDF(l_max) = 1 is assumed, so at most ⌈log₂(l_max+1)⌉ calls are made.
pub fn var_search<F>(alpha: f64, l_max: u64, mut cdf_at: F) -> Result<VarResult>
where
    F: FnMut(u64) -> Result<f64>,
{
    check_alpha(alpha)?;
    let mut trace = Vec::new();
    let (mut lo, mut hi) = (0u64, l_max);
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        let v = cdf_at(mid)?;
        trace.push((mid, v));
        if v >= alpha {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    Ok(finish(lo, trace))
}

/// Bisection where each comparison CDF(x) ≥ alpha is decided by a
/// majority over `votes` independent noisy evaluations `cdf_at(x, vote)`.
pub fn var_search_majority<F>(alpha: f64, l_max: u64, votes: usize, mut cdf_at: F) -> Result<VarResult>
where
    F: FnMut(u64, usize) -> Result<f64>,
{
    check_alpha(alpha)?;
    if votes.is_multiple_of(2) {
        return Err(Error::param("votes", "must be odd"));
    }
    let mut trace = Vec::new();
    let (mut lo, mut hi) = (0u64, l_max);
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        let mut above = 0;
        let mut sum = 0.0;
        for v in 0..votes {
            let e = cdf_at(mid, v)?;
            sum += e;
            if e >= alpha {
                above += 1;
            }
        }
        trace.push((mid, sum / votes as f64));
        if 2 * above > votes {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    Ok(finish(lo, trace))
}

fn finish(var: u64, trace: Vec<(u64, f64)>) -> VarResult {
    let mut sorted = trace.clone();
    sorted.sort_by_key(|t| t.0);
    let inconsistent = sorted.windows(2).any(|w| w[1].1 < w[0].1);
    VarResult {
        var,
        evaluations: trace.len(),
        trace,
        inconsistent,
    }
}

/// ⌈log₂(l_max + 1)⌉.
pub fn max_var_evaluations(l_max: u64) -> usize {
    (u64::BITS - l_max.leading_zeros()) as usize
}
