//! Dynamic bond portfolio under regime switching: closed-form Markowitz
//! weights, the growth mapping and the growth-register circuit whose sign
//! qubit carries α = P(total growth below the loss level).

use crate::blocks::{draper_add_const, grid_addend, iqft, qft, FixedPointSpec};
use crate::error::{Error, Result};
use crate::markov::{append_chain, ChainSpec, TransitionMatrix};
use crate::sim::{self, Circuit, Control};
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

/// Regime moments; arrays are `[good, bad]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegimeMoments {
    pub mu: [Vec<f64>; 2],
    pub sigma: [Vec<Vec<f64>>; 2],
    pub risk_aversion: f64,
    pub transition: TransitionMatrix,
}

/// Two-asset summary statistics for one regime.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AssetPairStats {
    pub mean: [f64; 2],
    pub sd: [f64; 2],
    pub rho: f64,
}

impl AssetPairStats {
    pub fn covariance(&self) -> Vec<Vec<f64>> {
        let c = self.sd[0] * self.sd[1] * self.rho;
        vec![vec![self.sd[0].powi(2), c], vec![c, self.sd[1].powi(2)]]
    }
}

impl RegimeMoments {
    pub fn from_pairs(good: &AssetPairStats, bad: &AssetPairStats, risk_aversion: f64, transition: TransitionMatrix) -> Self {
        RegimeMoments {
            mu: [good.mean.to_vec(), bad.mean.to_vec()],
            sigma: [good.covariance(), bad.covariance()],
            risk_aversion,
            transition,
        }
    }

    pub fn n_assets(&self) -> usize {
        self.mu[0].len()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.n_assets();
        if n == 0 || self.mu[1].len() != n {
            return Err(Error::param("mu", "mean vectors must have equal, non-zero length"));
        }
        for s in &self.sigma {
            if s.len() != n || s.iter().any(|r| r.len() != n) {
                return Err(Error::param("sigma", "covariance must be n×n"));
            }
            for (i, row) in s.iter().enumerate() {
                for (j, v) in row.iter().enumerate() {
                    if (v - s[j][i]).abs() > 1e-12 {
                        return Err(Error::param("sigma", "covariance must be symmetric"));
                    }
                }
            }
        }
        if !(self.risk_aversion > 0.0) {
            return Err(Error::param("risk_aversion", "must be positive"));
        }
        self.transition.validate()
    }

    /// The same model with regime labels exchanged.
    pub fn swapped(&self) -> Self {
        RegimeMoments {
            mu: [self.mu[1].clone(), self.mu[0].clone()],
            sigma: [self.sigma[1].clone(), self.sigma[0].clone()],
            risk_aversion: self.risk_aversion,
            transition: self.transition.swapped(),
        }
    }
}

/// Weights for each current regime and the budget multipliers ν.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MarkowitzWeights {
    /// Weights chosen when the current regime is good.
    pub w_good: Vec<f64>,
    /// Weights chosen when the current regime is bad.
    pub w_bad: Vec<f64>,
    pub nu: [f64; 2],
}

/// Per-regime solution (1/2λ)·Σ⁻¹(μ + ν·ι) and its ν.
fn regime_solution(mu: &[f64], sigma: &[Vec<f64>], lambda: f64) -> Result<(DVector<f64>, f64)> {
    let n = mu.len();
    let s = DMatrix::from_fn(n, n, |i, j| sigma[i][j]);
    let chol = s.cholesky().ok_or(Error::SingularCovariance)?;
    let mu = DVector::from_column_slice(mu);
    let ones = DVector::from_element(n, 1.0);
    let inv_mu = chol.solve(&mu);
    let inv_one = chol.solve(&ones);
    let nu = (2.0 * lambda - inv_one.dot(&mu)) / inv_one.dot(&ones);
    Ok(((inv_mu + inv_one * nu) / (2.0 * lambda), nu))
}

pub fn markowitz_weights(moments: &RegimeMoments) -> Result<MarkowitzWeights> {
    moments.validate()?;
    let lambda = moments.risk_aversion;
    let (a_g, nu_g) = regime_solution(&moments.mu[0], &moments.sigma[0], lambda)?;
    let (a_b, nu_b) = regime_solution(&moments.mu[1], &moments.sigma[1], lambda)?;
    let m = moments.transition.matrix();
    let mix = |from: usize| -> Vec<f64> { (&a_g * m[from][0] + &a_b * m[from][1]).iter().cloned().collect() };
    Ok(MarkowitzWeights {
        w_good: mix(0),
        w_bad: mix(1),
        nu: [nu_g, nu_b],
    })
}

/// Risk aversion λ at which the first asset's good-regime weight equals
/// `target`, found by bisection on log λ over [lo, hi].
pub fn calibrate_risk_aversion(moments: &RegimeMoments, target: f64, lo: f64, hi: f64) -> Result<f64> {
    let f = |lambda: f64| -> Result<f64> {
        let m = RegimeMoments {
            risk_aversion: lambda,
            ..moments.clone()
        };
        Ok(markowitz_weights(&m)?.w_good[0] - target)
    };
    let (mut a, mut b) = (lo.ln(), hi.ln());
    let (mut fa, fb) = (f(lo)?, f(hi)?);
    if fa * fb > 0.0 {
        return Err(Error::param("target", format!("weight {target} not bracketed by λ ∈ [{lo}, {hi}]")));
    }
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        let fm = f(m.exp())?;
        if (fm > 0.0) == (fa > 0.0) {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
        if b - a < 1e-14 {
            break;
        }
    }
    Ok((0.5 * (a + b)).exp())
}

/// Classical reduction of the V@R problem to a growth register.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GrowthMapping {
    pub g_good: f64,
    pub g_bad: f64,
    /// |g_good − g_bad|.
    pub rg: f64,
    /// Growth of the all-worst-regime path, min(g)·T.
    pub l_max: f64,
    /// Loss level relative to the worst case, L − L_max.
    pub l_prime: f64,
    /// True when the bad regime grows faster and the labels were swapped.
    pub swapped: bool,
    pub horizon: usize,
    pub fp: FixedPointSpec,
}

impl GrowthMapping {
    /// Regime (0 good, 1 bad) whose months add rg.
    pub fn growth_state(&self) -> usize {
        usize::from(self.swapped)
    }

    pub fn rg_grid(&self) -> Result<u64> {
        grid_addend(self.rg, &self.fp, false)
    }

    pub fn l_prime_grid(&self) -> Result<u64> {
        grid_addend(-self.l_prime, &self.fp, false)
    }
}

/// Register size: frac + ⌈log₂(rg·T) + 1⌉, at least frac + 1.
pub fn growth_register(rg: f64, horizon: usize, frac_bits: usize) -> Result<FixedPointSpec> {
    let span = rg * horizon as f64;
    let int_bits = if span > 0.0 {
        ((span.log2() + 1.0).ceil() as i64).max(1) as usize
    } else {
        1
    };
    FixedPointSpec::new(frac_bits + int_bits, frac_bits, true)
}

/// One-period expected growths g = wᵀμ and the shifted loss level.
pub fn growth_mapping(
    w_good: &[f64],
    w_bad: &[f64],
    moments: &RegimeMoments,
    horizon: usize,
    l_prime: f64,
    frac_bits: usize,
) -> Result<GrowthMapping> {
    moments.validate()?;
    if horizon == 0 {
        return Err(Error::param("T", "horizon must be at least 1"));
    }
    let dot = |w: &[f64], mu: &[f64]| -> Result<f64> {
        if w.len() != mu.len() {
            return Err(Error::param("weights", "length differs from the number of assets"));
        }
        Ok(w.iter().zip(mu).map(|(a, b)| a * b).sum())
    };
    let g_good = dot(w_good, &moments.mu[0])?;
    let g_bad = dot(w_bad, &moments.mu[1])?;
    let swapped = g_good < g_bad;
    let rg = (g_good - g_bad).abs();
    let fp = growth_register(rg, horizon, frac_bits)?;
    Ok(GrowthMapping {
        g_good,
        g_bad,
        rg,
        l_max: g_good.min(g_bad) * horizon as f64,
        l_prime,
        swapped,
        horizon,
        fp,
    })
}

/// Growth circuit with registers "mc" (T+1) and "g"; returns the sign qubit.
pub fn build_growth_circuit(mapping: &GrowthMapping, tm: &TransitionMatrix) -> Result<(Circuit, usize)> {
    let t = mapping.horizon;
    let chain = ChainSpec::homogeneous(tm, t)?;
    let mut c = Circuit::new(0);
    let mc = c.add_register("mc", t + 1)?.qubits();
    let g = c.add_register("g", mapping.fp.n_total)?.qubits();
    append_chain(&mut c, &mc, &chain, true)?;
    qft(&mut c, &g)?;
    let on_bad = mapping.growth_state() == 1;
    for &q in &mc[1..] {
        draper_add_const(&mut c, &g, mapping.rg, &mapping.fp, &[Control::when(q, on_bad)], false)?;
    }
    draper_add_const(&mut c, &g, -mapping.l_prime, &mapping.fp, &[], false)?;
    iqft(&mut c, &g)?;
    let sign = *g.last().expect("non-empty growth register");
    Ok((c, sign))
}

/// α from the circuit statevector.
pub fn circuit_alpha(mapping: &GrowthMapping, tm: &TransitionMatrix) -> Result<f64> {
    let (c, sign) = build_growth_circuit(mapping, tm)?;
    Ok(sim::statevector(&c)?.prob_one(sign))
}

/// Σ over regime paths of P(path)·[rg·#growth months − L′ < 0], with the
/// circuit's grid rounding and two's-complement wrap.
pub fn exact_alpha_oracle(mapping: &GrowthMapping, tm: &TransitionMatrix) -> Result<f64> {
    let t = mapping.horizon;
    if t > 24 {
        return Err(Error::param("T", "enumeration limited to 24 steps"));
    }
    let chain = ChainSpec::homogeneous(tm, t)?;
    let m = mapping.fp.modulus();
    let rg = mapping.rg_grid()?;
    let shift = mapping.l_prime_grid()?;
    let state = mapping.growth_state();
    let mut alpha = 0.0;
    for path in 0..1usize << (t + 1) {
        let months = (1..=t).filter(|i| path >> i & 1 == state).count() as u64;
        let g = (rg * months % m + shift) % m;
        if g >= m / 2 {
            alpha += chain.path_probability(path);
        }
    }
    Ok(alpha)
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn nber() -> RegimeMoments {
        RegimeMoments::from_pairs(
            &AssetPairStats {
                mean: [2.31, 3.23],
                sd: [0.42, 0.56],
                rho: 0.91,
            },
            &AssetPairStats {
                mean: [2.78, 4.33],
                sd: [0.62, 1.24],
                rho: 0.85,
            },
            1.0,
            TransitionMatrix {
                p_gb: 0.0097,
                p_bg: 0.11,
            },
        )
    }

    #[test]
    fn symmetric_assets_split_evenly() {
        let id = vec![vec![1.0, 0.0], vec![0.0, 1.0]];
        let m = RegimeMoments {
            mu: [vec![0.1, 0.1], vec![0.05, 0.05]],
            sigma: [id.clone(), id],
            risk_aversion: 2.0,
            transition: TransitionMatrix::new(0.2, 0.3).unwrap(),
        };
        let w = markowitz_weights(&m).unwrap();
        for v in w.w_good.iter().chain(&w.w_bad) {
            assert!((v - 0.5).abs() < 1e-12);
        }
    }

    #[test]
    fn single_regime_example() {
        let id = vec![vec![1.0, 0.0], vec![0.0, 1.0]];
        let m = RegimeMoments {
            mu: [vec![0.1, 0.2], vec![0.1, 0.2]],
            sigma: [id.clone(), id],
            risk_aversion: 1.0,
            transition: TransitionMatrix::new(0.0, 1.0).unwrap(),
        };
        let w = markowitz_weights(&m).unwrap();
        assert!((w.nu[0] - 0.85).abs() < 1e-12);
        assert!((w.w_good[0] - 0.475).abs() < 1e-12 && (w.w_good[1] - 0.525).abs() < 1e-12);
    }

    #[test]
    fn budget_and_calibration() {
        let m = nber();
        let w = markowitz_weights(&m).unwrap();
        assert!((w.w_good.iter().sum::<f64>() - 1.0).abs() < 1e-10);
        assert!((w.w_bad.iter().sum::<f64>() - 1.0).abs() < 1e-10);
        let lambda = calibrate_risk_aversion(&m, 0.81, 1e-3, 1e3).unwrap();
        let cal = markowitz_weights(&RegimeMoments {
            risk_aversion: lambda,
            ..m
        })
        .unwrap();
        assert!((cal.w_good[0] - 0.81).abs() < 1e-9);
    }

    #[test]
    fn singular_covariance_rejected() {
        let mut m = nber();
        m.sigma[0] = vec![vec![1.0, 1.0], vec![1.0, 1.0]];
        assert_eq!(markowitz_weights(&m).unwrap_err(), Error::SingularCovariance);
    }

    #[test]
    fn table_growths() {
        let g = growth_mapping(&[0.81, 0.19], &[1.3, -0.3], &nber(), 3, 0.023, 6).unwrap();
        assert!((g.g_good - 2.4848).abs() < 1e-12);
        assert!((g.g_bad - 2.315).abs() < 1e-12);
        assert!((g.rg - 0.1698).abs() < 1e-12);
        assert!((g.l_max - 6.945).abs() < 1e-12);
        assert!(!g.swapped);
        assert_eq!(g.fp.n_total, 7);
        let g6 = growth_mapping(&[0.81, 0.19], &[1.3, -0.3], &nber(), 6, 0.046, 6).unwrap();
        assert_eq!(g6.fp.n_total, 8);
    }

    #[test]
    fn frozen_alpha_values() {
        let m = nber();
        for (t, l, want) in [(3, 0.023, 0.064_188_554_72), (6, 0.046, 0.045_250_941_23)] {
            let g = growth_mapping(&[0.81, 0.19], &[1.3, -0.3], &m, t, l, 6).unwrap();
            let oracle = exact_alpha_oracle(&g, &m.transition).unwrap();
            assert!((oracle - want).abs() < 1e-9, "{oracle}");
            let circ = circuit_alpha(&g, &m.transition).unwrap();
            assert!((circ - oracle).abs() < 1e-9);
        }
    }

    #[test]
    fn swap_invariance() {
        let m = nber();
        let a = growth_mapping(&[0.81, 0.19], &[1.3, -0.3], &m, 4, 0.2, 5).unwrap();
        let s = m.swapped();
        let b = growth_mapping(&[1.3, -0.3], &[0.81, 0.19], &s, 4, 0.2, 5).unwrap();
        assert!(b.swapped);
        assert_eq!((a.rg, a.l_max), (b.rg, b.l_max));
        let (x, y) = (
            exact_alpha_oracle(&a, &m.transition).unwrap(),
            exact_alpha_oracle(&b, &s.transition).unwrap(),
        );
        assert!((x - y).abs() < 1e-12);
        assert!((circuit_alpha(&b, &s.transition).unwrap() - y).abs() < 1e-9);
    }

    #[test]
    fn degenerate_cases() {
        let m = nber();
        // rg = 0: α = 1 for L′ > 0, 0 at L′ = 0
        let g = growth_mapping(&[1.0, 0.0], &[0.0, 2.31 / 4.33], &m, 3, 0.1, 4).unwrap();
        assert!(g.rg.abs() < 1e-12);
        assert!((exact_alpha_oracle(&g, &m.transition).unwrap() - 1.0).abs() < 1e-12);
        let zero = GrowthMapping { l_prime: 0.0, ..g };
        assert!(exact_alpha_oracle(&zero, &m.transition).unwrap().abs() < 1e-12);
        // L′ below every reachable growth
        let g = growth_mapping(&[0.81, 0.19], &[1.3, -0.3], &m, 3, -0.3, 6).unwrap();
        assert!(circuit_alpha(&g, &m.transition).unwrap().abs() < 1e-9);
    }

    #[test]
    fn iid_limit_is_binomial() {
        // p_gb = 1 − p_bg: every month is good with probability p_bg
        let mut m = nber();
        m.transition = TransitionMatrix::new(0.35, 0.65).unwrap();
        let t = 5;
        let g = growth_mapping(&[0.81, 0.19], &[1.3, -0.3], &m, t, 0.4, 6).unwrap();
        let step = g.rg_grid().unwrap() as f64 / 64.0;
        let lp = (0.4f64 * 64.0).round() / 64.0;
        let p = 0.65f64;
        let mut want = 0.0;
        for k in 0..=t {
            if step * k as f64 - lp < 0.0 {
                let binom = (0..k).fold(1.0, |acc, i| acc * (t - i) as f64 / (i + 1) as f64);
                want += binom * p.powi(k as i32) * (1.0 - p).powi((t - k) as i32);
            }
        }
        assert!((exact_alpha_oracle(&g, &m.transition).unwrap() - want).abs() < 1e-12);
    }

    #[test]
    fn subtract_then_add_restores() {
        let m = nber();
        let g = growth_mapping(&[0.81, 0.19], &[1.3, -0.3], &m, 3, 0.023, 6).unwrap();
        let (c, _) = build_growth_circuit(&g, &m.transition).unwrap();
        let zero = GrowthMapping { l_prime: 0.0, ..g };
        let (base, _) = build_growth_circuit(&zero, &m.transition).unwrap();
        let mut undo = c.clone();
        let gq = c.register("g").unwrap().qubits();
        qft(&mut undo, &gq).unwrap();
        draper_add_const(&mut undo, &gq, g.l_prime, &g.fp, &[], false).unwrap();
        iqft(&mut undo, &gq).unwrap();
        let a = sim::statevector(&undo).unwrap();
        let b = sim::statevector(&base).unwrap();
        assert!(a.max_abs_diff(&b) < 1e-10);
    }
}
