use crate::credit::CreditModel;
use crate::derivative::RegimeGBMParams;
use crate::error::{Error, Result};
use crate::markov::TransitionMatrix;
use crate::portfolio::AssetPairStats;
use crate::qae::IQAEConfig;
use serde::{Deserialize, Serialize};
use std::path::PathBuf;

/// One experiment per file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub id: String,
    pub seed: u64,
    /// Use statevector probabilities instead of sampling.
    #[serde(default)]
    pub exact: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    pub experiment: Experiment,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Experiment {
    MarkovMse(MarkovMseConfig),
    CreditVar(CreditVarConfig),
    PriceOption(PriceOptionConfig),
    PortfolioIqae(PortfolioIqaeConfig),
}

/// S shots per histogram, N independent repetitions, B bins.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sampling {
    pub shots: u64,
    pub iterations: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bins: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MarkovMseConfig {
    pub transition: TransitionMatrix,
    pub horizons: Vec<usize>,
    #[serde(default = "yes")]
    pub optimized: bool,
    pub sampling: Sampling,
    /// Published MSE per horizon, echoed for comparison only.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub reference_mse: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CreditVarConfig {
    pub model: CreditModel,
    pub alphas: Vec<f64>,
    pub sampling: Sampling,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reference_mse: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PriceOptionConfig {
    pub model: RegimeGBMParams,
    pub with_regimes: bool,
    pub strikes: Vec<f64>,
    pub price_qubits: usize,
    pub rescale_c: f64,
    pub sampling: Sampling,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reference_mse: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PortfolioReference {
    pub alpha: f64,
    pub estimate: f64,
    pub ci: f64,
    pub complexity: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PortfolioIqaeConfig {
    pub good: AssetPairStats,
    pub bad: AssetPairStats,
    pub transition: TransitionMatrix,
    /// λ; when absent it is calibrated to the first good-regime weight.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub risk_aversion: Option<f64>,
    pub weights_good: Vec<f64>,
    pub weights_bad: Vec<f64>,
    pub horizon: usize,
    /// L′ = L − L_max in growth units.
    pub loss_shortfall: f64,
    pub frac_bits: usize,
    pub epsilon: f64,
    pub confidence: f64,
    pub max_rounds: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_k: Option<usize>,
    /// shots per IQAE round; iterations = independent IQAE runs.
    pub sampling: Sampling,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reference: Option<PortfolioReference>,
}

impl PortfolioIqaeConfig {
    pub fn iqae(&self) -> IQAEConfig {
        IQAEConfig {
            epsilon: self.epsilon,
            confidence: self.confidence,
            shots_per_round: self.sampling.shots,
            max_rounds: self.max_rounds,
            max_k: self.max_k,
        }
    }
}

fn yes() -> bool {
    true
}

/// Re-labels a parameter error with its position in the config.
fn scoped<T>(prefix: &str, r: Result<T>) -> Result<T> {
    r.map_err(|e| match e {
        Error::InvalidParameter { field, reason } => Error::InvalidParameter {
            field: format!("{prefix}.{field}"),
            reason,
        },
        other => other,
    })
}

impl Experiment {
    pub fn kind(&self) -> &'static str {
        match self {
            Experiment::MarkovMse(_) => "markov-mse",
            Experiment::CreditVar(_) => "credit-var",
            Experiment::PriceOption(_) => "price-option",
            Experiment::PortfolioIqae(_) => "portfolio-iqae",
        }
    }

    pub fn sampling(&self) -> &Sampling {
        match self {
            Experiment::MarkovMse(c) => &c.sampling,
            Experiment::CreditVar(c) => &c.sampling,
            Experiment::PriceOption(c) => &c.sampling,
            Experiment::PortfolioIqae(c) => &c.sampling,
        }
    }

    pub fn sampling_mut(&mut self) -> &mut Sampling {
        match self {
            Experiment::MarkovMse(c) => &mut c.sampling,
            Experiment::CreditVar(c) => &mut c.sampling,
            Experiment::PriceOption(c) => &mut c.sampling,
            Experiment::PortfolioIqae(c) => &mut c.sampling,
        }
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::param("config", e.to_string()))
    }

    /// Canonical pretty-printed form.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<()> {
        if self.id.is_empty() {
            return Err(Error::param("id", "must not be empty"));
        }
        let s = self.experiment.sampling();
        if s.shots == 0 {
            return Err(Error::param("experiment.sampling.shots", "must be positive"));
        }
        if s.iterations == 0 {
            return Err(Error::param("experiment.sampling.iterations", "must be positive"));
        }
        match &self.experiment {
            Experiment::MarkovMse(c) => {
                scoped("experiment.transition", c.transition.validate())?;
                if c.horizons.is_empty() {
                    return Err(Error::param("experiment.horizons", "need at least one horizon"));
                }
                if let Some(&t) = c.horizons.iter().find(|&&t| t == 0 || t > 24) {
                    return Err(Error::param("experiment.horizons", format!("{t} not in 1..=24")));
                }
                if let Some(b) = s.bins {
                    if c.horizons.iter().any(|&t| b != 1usize << (t + 1)) {
                        return Err(Error::param("experiment.sampling.bins", "must equal 2^(T+1) for every horizon"));
                    }
                }
                if !c.reference_mse.is_empty() && c.reference_mse.len() != c.horizons.len() {
                    return Err(Error::param("experiment.reference_mse", "one value per horizon"));
                }
            }
            Experiment::CreditVar(c) => {
                scoped("experiment.model", c.model.validate())?;
                if let Some(a) = c.alphas.iter().find(|a| !(**a > 0.0 && **a < 1.0)) {
                    return Err(Error::param("experiment.alphas", format!("{a} not in (0, 1)")));
                }
                if let Some(b) = s.bins {
                    if b as u64 != c.model.max_loss() {
                        return Err(Error::param("experiment.sampling.bins", "must equal the number of loss thresholds"));
                    }
                }
            }
            Experiment::PriceOption(c) => {
                scoped("experiment.model", c.model.validate())?;
                if c.strikes.is_empty() || c.strikes.iter().any(|k| !(*k > 0.0)) {
                    return Err(Error::param("experiment.strikes", "need positive strikes"));
                }
                if !(c.rescale_c > 0.0 && c.rescale_c <= 1.0) {
                    return Err(Error::param("experiment.rescale_c", "must lie in (0, 1]"));
                }
                if c.price_qubits < 2 || c.price_qubits > 12 {
                    return Err(Error::param("experiment.price_qubits", "must lie in 2..=12"));
                }
                if let Some(b) = s.bins {
                    if b != c.strikes.len() {
                        return Err(Error::param("experiment.sampling.bins", "must equal the number of strikes"));
                    }
                }
            }
            Experiment::PortfolioIqae(c) => {
                scoped("experiment.transition", c.transition.validate())?;
                scoped("experiment", c.iqae().validate())?;
                if c.horizon == 0 || c.horizon > 12 {
                    return Err(Error::param("experiment.horizon", "must lie in 1..=12"));
                }
                if c.weights_good.len() != 2 || c.weights_bad.len() != 2 {
                    return Err(Error::param("experiment.weights_good", "two assets expected"));
                }
                if c.frac_bits == 0 || c.frac_bits > 10 {
                    return Err(Error::param("experiment.frac_bits", "must lie in 1..=10"));
                }
                if let Some(l) = c.risk_aversion {
                    if !(l > 0.0) {
                        return Err(Error::param("experiment.risk_aversion", "must be positive"));
                    }
                }
            }
        }
        Ok(())
    }
}
