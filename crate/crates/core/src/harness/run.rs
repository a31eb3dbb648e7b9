use super::config::*;
use super::table::ResultTable;
use crate::credit::{self, cdf, exact_loss_distribution, objective_probability, var_search};
use crate::derivative::{price_breakdown, sampled_pricing, step_increments, PriceRegisterSpec};
use crate::error::{Error, Result};
use crate::markov::{self, compute_angles, expected_mse, mse_experiment, ChainSpec, MAX_SAMPLED_CIRCUIT_QUBITS};
use crate::par::Execution;
use crate::portfolio::{
    build_growth_circuit, calibrate_risk_aversion, circuit_alpha, exact_alpha_oracle, growth_mapping, markowitz_weights,
    RegimeMoments,
};
use crate::qae::{amplified_circuit, iqae_batch, AProblem};
use crate::sim::{self, rng, sample_ones, two_qubit_gate_count};
use crate::stats::mean_stderr;
use serde_json::{json, Value};
use std::path::{Path, PathBuf};
use std::time::Instant;

/// Result rows plus every derived constant the circuits used.
#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentOutput {
    pub table: ResultTable,
    pub metadata: Value,
}

pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentOutput> {
    run_experiment_with(config, Execution::default())
}

pub fn run_experiment_with(config: &ExperimentConfig, exec: Execution) -> Result<ExperimentOutput> {
    config.validate()?;
    let mut table = ResultTable::default();
    let derived = match &config.experiment {
        Experiment::MarkovMse(c) => run_markov(config, c, exec, &mut table)?,
        Experiment::CreditVar(c) => run_credit(config, c, exec, &mut table)?,
        Experiment::PriceOption(c) => run_price(config, c, exec, &mut table)?,
        Experiment::PortfolioIqae(c) => run_portfolio(config, c, exec, &mut table)?,
    };
    let metadata = json!({
        "config": config,
        "kind": config.experiment.kind(),
        "version": env!("CARGO_PKG_VERSION"),
        "parallel": exec.is_parallel(),
        "derived": derived,
    });
    Ok(ExperimentOutput { table, metadata })
}

/// Writes `<path>` (CSV) and the sidecar `<stem>.meta.json`.
pub fn write_outputs(output: &ExperimentOutput, path: &Path) -> Result<(PathBuf, PathBuf)> {
    output.table.write_csv(path)?;
    let meta = path.with_extension("meta.json");
    let text = serde_json::to_string_pretty(&output.metadata).map_err(|e| Error::Io(e.to_string()))?;
    std::fs::write(&meta, text).map_err(|e| Error::Io(format!("{}: {e}", meta.display())))?;
    Ok((path.to_path_buf(), meta))
}

fn ms(t: Instant) -> f64 {
    t.elapsed().as_secs_f64() * 1e3
}

fn run_markov(cfg: &ExperimentConfig, c: &MarkovMseConfig, exec: Execution, table: &mut ResultTable) -> Result<Value> {
    let id = &cfg.id;
    let s = c.sampling;
    let angles = compute_angles(&c.transition)?;
    let mut per_t = Vec::new();
    for (i, &t) in c.horizons.iter().enumerate() {
        let chain = ChainSpec::homogeneous(&c.transition, t)?;
        let bins = 1usize << chain.n_qubits();
        let expected = expected_mse(chain.sum_sq(), bins, s.shots);
        let start = Instant::now();
        let fits = chain.n_qubits() <= MAX_SAMPLED_CIRCUIT_QUBITS;
        // exact mode has nothing to compare once the circuit is out of reach
        if cfg.exact && fits {
            let circ = markov::build_chain_circuit(&c.transition, t, c.optimized)?;
            let probs = sim::statevector_with(&circ, exec)?.probabilities();
            let dev = (0..bins).map(|b| (probs[b] - chain.path_probability(b)).abs()).fold(0.0, f64::max);
            table.push(id, format!("max_abs_dev_T{t}"), dev, None, ms(start))?;
        } else if !cfg.exact {
            let rep = mse_experiment(&chain, s.shots, s.iterations, cfg.seed, c.optimized, exec)?;
            table.push(id, format!("mse_T{t}"), rep.mse, Some(rep.stderr), ms(start))?;
        }
        table.push(id, format!("expected_mse_T{t}"), expected, None, 0.0)?;
        if let Some(r) = c.reference_mse.get(i) {
            table.push(id, format!("reference_mse_T{t}"), *r, None, 0.0)?;
        }
        per_t.push(json!({
            "horizon": t,
            "qubits": chain.n_qubits(),
            "bins": bins,
            "sum_sq": chain.sum_sq(),
            "source": if fits { "circuit" } else { "classical-paths" },
        }));
    }
    Ok(json!({
        "angles": angles,
        "steady_state": c.transition.steady_state()?,
        "horizons": per_t,
    }))
}

fn run_credit(cfg: &ExperimentConfig, c: &CreditVarConfig, exec: Execution, table: &mut ResultTable) -> Result<Value> {
    let id = &cfg.id;
    let model = &c.model;
    let s = c.sampling;
    let l_max = model.max_loss();
    let start = Instant::now();
    let dist = exact_loss_distribution(model)?;
    let oracle_cdf = cdf(&dist);
    // objective(x) = P(L ≥ x) for x = 1..=l_max
    let tail: Vec<f64> = (1..=l_max).map(|x| objective_probability(model, x)).collect::<Result<_>>()?;
    let oracle_tail: Vec<f64> = (1..=l_max as usize).map(|x| 1.0 - oracle_cdf[x - 1]).collect();
    let circuit_ms = ms(start);

    if cfg.exact {
        for (i, (q, o)) in tail.iter().zip(&oracle_tail).enumerate() {
            table.push(id, format!("tail_prob_L{}", i + 1), *q, None, circuit_ms)?;
            table.push(id, format!("oracle_tail_prob_L{}", i + 1), *o, None, 0.0)?;
        }
        let err = tail.iter().zip(&oracle_tail).map(|(a, b)| (a - b) * (a - b)).sum::<f64>() / tail.len() as f64;
        table.push(id, "mse", err, None, circuit_ms)?;
    } else {
        let start = Instant::now();
        let per_run: Vec<f64> = crate::par::map_indexed(exec, s.iterations, |n| {
            let mut r = rng::stream(cfg.seed, n as u64);
            let mut acc = 0.0;
            for (p, o) in tail.iter().zip(&oracle_tail) {
                let est = sample_ones(*p, s.shots, &mut r).map(|k| k as f64 / s.shots as f64).unwrap_or(f64::NAN);
                acc += (est - o) * (est - o);
            }
            acc / tail.len() as f64
        });
        let (m, se) = mean_stderr(&per_run);
        table.push(id, "mse", m, Some(se), ms(start))?;
    }
    if let Some(r) = c.reference_mse {
        table.push(id, "reference_mse", r, None, 0.0)?;
    }

    let mut searches = Vec::new();
    for (j, &alpha) in c.alphas.iter().enumerate() {
        let start = Instant::now();
        let oracle = oracle_cdf.iter().position(|&v| v >= alpha).unwrap_or(l_max as usize) as u64;
        let mut r = rng::stream(cfg.seed, (s.iterations + j) as u64);
        let res = var_search(alpha, l_max, |x| {
            let p = tail[x as usize];
            if cfg.exact {
                Ok(1.0 - p)
            } else {
                Ok(1.0 - sample_ones(p, s.shots, &mut r)? as f64 / s.shots as f64)
            }
        })?;
        table.push(id, format!("var_a{alpha}"), res.var as f64, None, ms(start))?;
        table.push(id, format!("oracle_var_a{alpha}"), oracle as f64, None, 0.0)?;
        table.push(id, format!("var_evaluations_a{alpha}"), res.evaluations as f64, None, 0.0)?;
        searches.push(json!({ "alpha": alpha, "trace": res.trace, "inconsistent": res.inconsistent }));
    }

    let fits = model.regime_fits()?;
    Ok(json!({
        "n_qubits": model.n_qubits(),
        "max_loss": l_max,
        "max_var_evaluations": credit::max_var_evaluations(l_max),
        "latent_points": model.grid.points(),
        "latent_weights": model.grid.weights()?,
        "prior_weights": model.prior.weights(),
        "theta_fits": fits,
        "loss_distribution": dist,
        "searches": searches,
    }))
}

fn run_price(cfg: &ExperimentConfig, c: &PriceOptionConfig, exec: Execution, table: &mut ResultTable) -> Result<Value> {
    let id = &cfg.id;
    let s = c.sampling;
    let spec = PriceRegisterSpec::sized(&c.model, c.price_qubits, c.rescale_c, c.with_regimes)?;
    if cfg.exact {
        let start = Instant::now();
        let rows = price_breakdown(&c.model, &spec, c.with_regimes, &c.strikes, exec)?;
        let t = ms(start);
        let mut worst: f64 = 0.0;
        for b in &rows {
            let k = b.strike;
            table.push(id, format!("price_K{k}"), b.quantum, None, t)?;
            table.push(id, format!("exact_price_K{k}"), b.exact, None, 0.0)?;
            table.push(id, format!("discount_error_K{k}"), b.discount_error(), None, 0.0)?;
            table.push(id, format!("taylor_error_K{k}"), b.taylor_error(), None, 0.0)?;
            table.push(id, format!("grid_error_K{k}"), b.grid_error(), None, 0.0)?;
            table.push(id, format!("small_angle_error_K{k}"), b.small_angle_error(), None, 0.0)?;
            table.push(id, format!("objective_prob_K{k}"), b.objective_prob, None, 0.0)?;
            worst = worst.max(b.total_error().abs());
        }
        table.push(id, "max_abs_error", worst, None, t)?;
    } else {
        let start = Instant::now();
        let sp = sampled_pricing(&c.model, &spec, c.with_regimes, &c.strikes, s.shots, s.iterations, cfg.seed, exec)?;
        let t = ms(start);
        for (i, k) in sp.strikes.iter().enumerate() {
            table.push(id, format!("price_K{k}"), sp.mean_price[i], None, t)?;
            table.push(id, format!("exact_price_K{k}"), sp.exact[i], None, 0.0)?;
        }
        table.push(id, "mse", sp.mse, Some(sp.mse_stderr), t)?;
    }
    if let Some(r) = c.reference_mse {
        table.push(id, "reference_mse", r, None, 0.0)?;
    }
    let increments: Vec<[f64; 4]> = (0..c.model.t_steps).map(|i| step_increments(&c.model, i)).collect::<Result<_>>()?;
    let strikes: Vec<Value> = c
        .strikes
        .iter()
        .map(|&k| {
            json!({
                "strike": k,
                "threshold": spec.strike_threshold(k),
                "f_max": spec.f_max(k),
                "payoff": spec.payoff_spec(k).ok(),
            })
        })
        .collect();
    Ok(json!({
        "register": spec,
        "p_max": spec.p_max(),
        "increments": increments,
        "mean_rate": c.model.mean_rate(c.with_regimes)?,
        "horizon": c.model.horizon(),
        "strikes": strikes,
    }))
}

fn run_portfolio(cfg: &ExperimentConfig, c: &PortfolioIqaeConfig, exec: Execution, table: &mut ResultTable) -> Result<Value> {
    let id = &cfg.id;
    let lambda = match c.risk_aversion {
        Some(l) => Some(l),
        None => {
            let m = RegimeMoments::from_pairs(&c.good, &c.bad, 1.0, c.transition);
            calibrate_risk_aversion(&m, c.weights_good[0], 1e-3, 1e3).ok()
        }
    };
    let moments = RegimeMoments::from_pairs(&c.good, &c.bad, lambda.unwrap_or(1.0), c.transition);
    let markowitz = markowitz_weights(&moments)?;
    let mapping = growth_mapping(&c.weights_good, &c.weights_bad, &moments, c.horizon, c.loss_shortfall, c.frac_bits)?;
    let (circuit, objective) = build_growth_circuit(&mapping, &c.transition)?;
    let problem = AProblem::new(circuit, objective)?;
    let amplified = amplified_circuit(&problem, 1)?;
    let gates_a = two_qubit_gate_count(&problem.state_prep);
    let gates_aq = two_qubit_gate_count(&amplified);

    let start = Instant::now();
    let oracle = exact_alpha_oracle(&mapping, &c.transition)?;
    table.push(id, "oracle_alpha", oracle, None, ms(start))?;
    if cfg.exact {
        let start = Instant::now();
        table.push(id, "circuit_alpha", circuit_alpha(&mapping, &c.transition)?, None, ms(start))?;
    } else {
        let start = Instant::now();
        let runs = iqae_batch(&problem, &c.iqae(), cfg.seed, c.sampling.iterations, exec)?;
        let t = ms(start);
        let col = |f: &dyn Fn(&crate::qae::IQAEResult) -> f64| -> (f64, Option<f64>) {
            let v: Vec<f64> = runs.iter().map(f).collect();
            let (m, se) = mean_stderr(&v);
            (m, (v.len() > 1).then_some(se))
        };
        let (est, est_se) = col(&|r| r.estimate);
        table.push(id, "estimate", est, est_se, t)?;
        let (lo, _) = col(&|r| r.ci_low);
        table.push(id, "ci_low", lo, None, 0.0)?;
        let (hi, _) = col(&|r| r.ci_high);
        table.push(id, "ci_high", hi, None, 0.0)?;
        let (hw, _) = col(&|r| r.half_width());
        table.push(id, "ci_half_width", hw, None, 0.0)?;
        let (calls, _) = col(&|r| r.oracle_calls as f64);
        table.push(id, "oracle_calls", calls, None, 0.0)?;
        let (rounds, _) = col(&|r| r.rounds.len() as f64);
        table.push(id, "rounds", rounds, None, 0.0)?;
        let (cover, cover_se) = col(&|r| f64::from(u8::from(r.covers(oracle))));
        table.push(id, "oracle_coverage", cover, cover_se, 0.0)?;
    }
    table.push(id, "two_qubit_gates_a", gates_a as f64, None, 0.0)?;
    table.push(id, "two_qubit_gates_aq", gates_aq as f64, None, 0.0)?;
    if let Some(r) = c.reference {
        table.push(id, "reference_alpha", r.alpha, None, 0.0)?;
        table.push(id, "reference_estimate", r.estimate, None, 0.0)?;
        table.push(id, "reference_ci", r.ci, None, 0.0)?;
        table.push(id, "reference_complexity", r.complexity, None, 0.0)?;
    }
    Ok(json!({
        "risk_aversion": lambda,
        "markowitz": markowitz,
        "mapping": mapping,
        "rg_grid": mapping.rg_grid()?,
        "l_prime_grid": mapping.l_prime_grid()?,
        "n_qubits": problem.n_qubits(),
        "objective_qubit": objective,
        "iqae": c.iqae(),
        "bonferroni_rounds": c.iqae().bonferroni_rounds(),
    }))
}

#[cfg(test)]
mod tests {
    use super::super::presets::{preset, preset_names};
    use super::*;

    #[test]
    fn every_preset_validates_and_round_trips() {
        for name in preset_names() {
            let c = preset(name).unwrap();
            c.validate().unwrap();
            let text = c.to_json();
            let back = ExperimentConfig::from_json(&text).unwrap();
            assert_eq!(back, c);
            assert_eq!(back.to_json(), text);
        }
        assert!(preset("nope").is_err());
    }

    #[test]
    fn bad_fields_are_named() {
        let mut c = preset("markov-1986").unwrap();
        c.experiment.sampling_mut().bins = Some(16);
        match c.validate() {
            Err(Error::InvalidParameter { field, .. }) => assert_eq!(field, "experiment.sampling.bins"),
            other => panic!("{other:?}"),
        }
        c.experiment.sampling_mut().bins = None;
        c.experiment.sampling_mut().shots = 0;
        assert!(matches!(c.validate(), Err(Error::InvalidParameter { field, .. }) if field == "experiment.sampling.shots"));
        let mut p = preset("option-1986").unwrap();
        if let Experiment::PriceOption(o) = &mut p.experiment {
            o.model.dt = -1.0;
        }
        assert!(matches!(p.validate(), Err(Error::InvalidParameter { field, .. }) if field == "experiment.model.dt"));
        let unknown = r#"{"id":"x","seed":1,"experiment":{"kind":"markov-mse","bogus":1}}"#;
        assert!(ExperimentConfig::from_json(unknown).is_err());
    }

    #[test]
    fn flat_volatility_prices_intrinsic() {
        let mut c = preset("option-flat").unwrap();
        c.exact = true;
        let out = run_experiment(&c).unwrap();
        let t = 0.5f64;
        for k in [0.9, 0.95, 1.0, 1.05, 1.1] {
            let intrinsic = (-0.1 * t).exp() * ((0.1 * t).exp() - k).max(0.0);
            let exact = out.table.value(&format!("exact_price_K{k}")).unwrap();
            assert!((exact - intrinsic).abs() < 1e-6);
            // the circuit adds only its Taylor, grid and small-angle terms
            let q = out.table.value(&format!("price_K{k}")).unwrap();
            let parts: f64 = ["taylor_error", "grid_error", "small_angle_error", "discount_error"]
                .iter()
                .map(|m| out.table.value(&format!("{m}_K{k}")).unwrap())
                .sum();
            assert!((q - exact - parts).abs() < 1e-12);
        }
    }

    #[test]
    fn reproducible_and_complete() {
        let mut c = preset("markov-synthetic").unwrap();
        if let Experiment::MarkovMse(m) = &mut c.experiment {
            m.horizons = vec![3];
            m.reference_mse.truncate(1);
        }
        c.experiment.sampling_mut().iterations = 8;
        let a = run_experiment(&c).unwrap();
        let b = run_experiment(&c).unwrap();
        assert!(a.table.same_results(&b.table));
        assert_eq!(a.metadata, b.metadata);
        let d = &a.metadata["derived"];
        for key in ["theta0", "theta_stay", "theta_switch"] {
            assert!(d["angles"][key].is_number());
        }
        let csv = a.table.to_csv().unwrap();
        assert!(csv.starts_with("config_id,metric,value,stderr,runtime_ms\n"));
        assert!(ResultTable::from_csv(&csv).unwrap().same_results(&a.table));
    }

    #[test]
    fn credit_and_portfolio_metadata() {
        let mut c = preset("credit-regime").unwrap();
        c.exact = true;
        let out = run_experiment(&c).unwrap();
        let d = &out.metadata["derived"];
        for key in ["theta_fits", "latent_points", "latent_weights", "prior_weights", "n_qubits"] {
            assert!(!d[key].is_null(), "{key}");
        }
        assert!(out.table.value("mse").unwrap() < 1e-3);
        let mut p = preset("nber-portfolio").unwrap();
        p.exact = true;
        let out = run_experiment(&p).unwrap();
        let (a, o) = (out.table.value("circuit_alpha").unwrap(), out.table.value("oracle_alpha").unwrap());
        assert!((a - o).abs() < 1e-9);
        let d = &out.metadata["derived"];
        for key in ["mapping", "rg_grid", "l_prime_grid", "markowitz"] {
            assert!(!d[key].is_null(), "{key}");
        }
    }
}
