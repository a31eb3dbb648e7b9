use super::config::*;
use crate::credit::{CreditGroupParams, CreditModel, LatentGrid, Linearization, RegimePrior};
use crate::derivative::RegimeGBMParams;
use crate::error::{Error, Result};
use crate::markov::TransitionMatrix;
use crate::portfolio::AssetPairStats;

const NAMES: &[&str] = &[
    "markov-1986",
    "markov-1854",
    "markov-synthetic",
    "credit-noswitch",
    "credit-regime",
    "credit-synthetic",
    "option-noswitch",
    "option-1986",
    "option-synthetic",
    "option-flat",
    "nber-portfolio",
    "nber-portfolio-t6",
];

const SEED: u64 = 20_240_601;

const TM_1986: TransitionMatrix = TransitionMatrix {
    p_gb: 0.0097,
    p_bg: 0.11,
};
const TM_1854: TransitionMatrix = TransitionMatrix {
    p_gb: 0.024,
    p_bg: 0.059,
};
const TM_SYNTH: TransitionMatrix = TransitionMatrix { p_gb: 0.3, p_bg: 0.4 };

pub fn preset_names() -> &'static [&'static str] {
    NAMES
}

fn wrap(name: &str, experiment: Experiment) -> ExperimentConfig {
    ExperimentConfig {
        id: name.to_string(),
        seed: SEED,
        exact: false,
        out: None,
        experiment,
    }
}

fn markov(name: &str, tm: TransitionMatrix, reference: [f64; 4]) -> ExperimentConfig {
    wrap(
        name,
        Experiment::MarkovMse(MarkovMseConfig {
            transition: tm,
            horizons: vec![3, 6, 12, 24],
            optimized: true,
            sampling: Sampling {
                shots: 1028,
                iterations: 64,
                bins: None,
            },
            reference_mse: reference.to_vec(),
        }),
    )
}

fn credit(name: &str, groups: Vec<CreditGroupParams>, p_good: f64, divisor: f64, reference: f64) -> ExperimentConfig {
    wrap(
        name,
        Experiment::CreditVar(CreditVarConfig {
            model: CreditModel {
                groups,
                grid: LatentGrid::default(),
                prior: RegimePrior { p_good },
                horizon_divisor: divisor,
                linearization: Linearization::LeastSquares,
            },
            alphas: vec![0.9, 0.95, 0.99],
            sampling: Sampling {
                shots: 1028,
                iterations: 64,
                bins: None,
            },
            reference_mse: Some(reference),
        }),
    )
}

fn regime_groups() -> Vec<CreditGroupParams> {
    vec![
        CreditGroupParams {
            p: [0.1, 0.15],
            rho: [0.1, 0.15],
            lgd: 1,
        },
        CreditGroupParams {
            p: [0.2, 0.25],
            rho: [0.05, 0.1],
            lgd: 2,
        },
    ]
}

#[allow(clippy::too_many_arguments)]
fn option(name: &str, r: [f64; 2], sigma: [f64; 2], ramp: f64, cap: f64, tm: TransitionMatrix, with_regimes: bool, reference: Option<f64>) -> ExperimentConfig {
    wrap(
        name,
        Experiment::PriceOption(PriceOptionConfig {
            model: RegimeGBMParams {
                r,
                sigma_base: sigma,
                sigma_ramp: ramp,
                sigma_cap: cap,
                s0: 1.0,
                strike: 1.0,
                t_steps: 6,
                dt: 1.0 / 12.0,
                transition: tm,
            },
            with_regimes,
            strikes: vec![0.9, 0.95, 1.0, 1.05, 1.1],
            price_qubits: 9,
            rescale_c: 0.05,
            sampling: Sampling {
                shots: 128,
                iterations: 100,
                bins: Some(5),
            },
            reference_mse: reference,
        }),
    )
}

fn portfolio(name: &str, horizon: usize, loss: f64, reference: PortfolioReference) -> ExperimentConfig {
    wrap(
        name,
        Experiment::PortfolioIqae(PortfolioIqaeConfig {
            good: AssetPairStats {
                mean: [2.31, 3.23],
                sd: [0.42, 0.56],
                rho: 0.91,
            },
            bad: AssetPairStats {
                mean: [2.78, 4.33],
                sd: [0.62, 1.24],
                rho: 0.85,
            },
            transition: TM_1986,
            risk_aversion: None,
            weights_good: vec![0.81, 0.19],
            weights_bad: vec![1.3, -0.3],
            horizon,
            loss_shortfall: loss,
            frac_bits: 6,
            epsilon: 0.1,
            confidence: 0.95,
            max_rounds: 100,
            // k = 1 was enough for the published runs
            max_k: Some(1),
            sampling: Sampling {
                shots: 100,
                iterations: 1,
                bins: None,
            },
            reference: Some(reference),
        }),
    )
}

/// Fully populated configuration for a named parameter set.
pub fn preset(name: &str) -> Result<ExperimentConfig> {
    let steady = |tm: TransitionMatrix| tm.steady_state().map(|s| s[0]);
    Ok(match name {
        "markov-1986" => markov(name, TM_1986, [2.8e-4, 5.8e-5, 9.6e-6, 2.0e-6]),
        "markov-1854" => markov(name, TM_1854, [4.1e-3, 1.0e-3, 1.4e-4, 1.2e-5]),
        "markov-synthetic" => markov(name, TM_SYNTH, [1.3e-5, 3.8e-6, 1.9e-7, 6.2e-8]),
        "credit-noswitch" => credit(
            name,
            vec![CreditGroupParams::single(0.15, 0.1, 1), CreditGroupParams::single(0.25, 0.05, 2)],
            1.0,
            1.0,
            2.1e-3,
        ),
        "credit-regime" => credit(name, regime_groups(), steady(TM_1986)?, 6.0, 2.6e-4),
        "credit-synthetic" => credit(name, regime_groups(), steady(TM_SYNTH)?, 6.0, 3.5e-3),
        "option-noswitch" => option(name, [0.1, 0.1], [0.2, 0.2], 1.2, 0.1, TM_1986, false, Some(2.1e-4)),
        "option-1986" => option(name, [0.2, 0.1], [0.2, 0.3], 1.2, 0.1, TM_1986, true, Some(1.5e-4)),
        "option-synthetic" => option(name, [0.2, 0.1], [0.2, 0.3], 1.2, 0.1, TM_SYNTH, true, Some(3.4e-4)),
        "option-flat" => option(name, [0.1, 0.1], [0.0, 0.0], 0.0, 0.0, TM_1986, false, None),
        "nber-portfolio" => portfolio(
            name,
            3,
            0.023,
            PortfolioReference {
                alpha: 0.064,
                estimate: 0.077,
                ci: 0.022,
                complexity: 1082.0,
            },
        ),
        "nber-portfolio-t6" => portfolio(
            name,
            6,
            0.046,
            PortfolioReference {
                alpha: 0.045,
                estimate: 0.060,
                ci: 0.019,
                complexity: 12932.0,
            },
        ),
        _ => {
            return Err(Error::param(
                "preset",
                format!("unknown preset `{name}`; known: {}", NAMES.join(", ")),
            ))
        }
    })
}
