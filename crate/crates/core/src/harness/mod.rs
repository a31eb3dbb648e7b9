//! Experiment configuration, presets, orchestration and table output.

mod config;
mod presets;
mod run;
mod table;

pub use config::{
    CreditVarConfig, Experiment, ExperimentConfig, MarkovMseConfig, PortfolioIqaeConfig, PortfolioReference,
    PriceOptionConfig, Sampling,
};
pub use presets::{preset, preset_names};
pub use run::{run_experiment, run_experiment_with, write_outputs, ExperimentOutput};
pub use table::{ResultRow, ResultTable};
