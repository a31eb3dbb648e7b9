use qregime::qae::{iqae_batch, AProblem, IQAEConfig, IQAEResult};
use qregime::Execution;

/// Applications of A or A† across all shots: each round of k costs 2k+1.
fn queries(r: &IQAEResult, shots: u64) -> f64 {
    r.rounds.iter().map(|&k| (2 * k as u64 + 1) * shots).sum::<u64>() as f64
}

#[test]
fn oracle_cost_scales_like_inverse_epsilon() {
    let eps = [0.1, 0.05, 0.025];
    let mut mean_queries = Vec::new();
    for &e in &eps {
        let cfg = IQAEConfig {
            epsilon: e,
            ..IQAEConfig::default()
        };
        let mut total = 0.0;
        for a in [0.1, 0.3, 0.6] {
            let runs = iqae_batch(&AProblem::bernoulli(a).unwrap(), &cfg, 5, 40, Execution::default()).unwrap();
            total += runs.iter().map(|r| queries(r, cfg.shots_per_round)).sum::<f64>() / runs.len() as f64;
        }
        mean_queries.push(total / 3.0);
    }
    // least-squares slope of log(queries) against log(1/ε)
    let xs: Vec<f64> = eps.iter().map(|e| (1.0 / e).ln()).collect();
    let ys: Vec<f64> = mean_queries.iter().map(|q| q.ln()).collect();
    let (mx, my) = (xs.iter().sum::<f64>() / 3.0, ys.iter().sum::<f64>() / 3.0);
    let slope = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum::<f64>() / xs.iter().map(|x| (x - mx).powi(2)).sum::<f64>();
    println!("queries {mean_queries:?}, slope {slope:.2}");
    // O(1/ε): well below the classical 1/ε² and clearly growing
    assert!(slope > 0.5 && slope < 1.5, "slope {slope}");
}
