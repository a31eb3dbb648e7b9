use clap::{Args, Parser, Subcommand};
use qregime::harness::{preset, preset_names, run_experiment, write_outputs, ExperimentConfig};
use qregime::Error;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "qregime", version, about = "Regime-switching risk experiments on a statevector simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Markov chain histogram MSE.
    MarkovMse(RunArgs),
    /// Credit loss tail probabilities and value at risk.
    CreditVar(RunArgs),
    /// European call pricing with and without regimes.
    PriceOption(RunArgs),
    /// Dynamic portfolio shortfall probability via iterative QAE.
    PortfolioIqae(RunArgs),
    /// Named parameter sets.
    Preset {
        #[command(subcommand)]
        action: PresetAction,
    },
}

#[derive(Subcommand)]
enum PresetAction {
    List,
    Show { name: String },
}

#[derive(Args)]
struct RunArgs {
    /// JSON experiment file; defaults to the subcommand's reference preset.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Start from a named preset instead of a file.
    #[arg(long, conflicts_with = "config")]
    preset: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    shots: Option<u64>,
    #[arg(long)]
    iterations: Option<usize>,
    /// Statevector probabilities instead of sampling.
    #[arg(long)]
    exact: bool,
    /// CSV path; metadata goes next to it as <stem>.meta.json.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn load(kind: &str, default: &str, args: &RunArgs) -> Result<ExperimentConfig, Error> {
    let mut cfg = match (&args.config, &args.preset) {
        (Some(path), _) => ExperimentConfig::load(path)?,
        (None, Some(name)) => preset(name)?,
        (None, None) => preset(default)?,
    };
    if cfg.experiment.kind() != kind {
        return Err(Error::InvalidParameter {
            field: "experiment.kind".into(),
            reason: format!("`{}` given to the {kind} subcommand", cfg.experiment.kind()),
        });
    }
    if let Some(s) = args.seed {
        cfg.seed = s;
    }
    if let Some(s) = args.shots {
        cfg.experiment.sampling_mut().shots = s;
    }
    if let Some(n) = args.iterations {
        cfg.experiment.sampling_mut().iterations = n;
    }
    cfg.exact |= args.exact;
    if args.out.is_some() {
        cfg.out = args.out.clone();
    }
    Ok(cfg)
}

fn run(kind: &str, default: &str, args: &RunArgs) -> Result<(), Error> {
    let cfg = load(kind, default, args)?;
    let output = run_experiment(&cfg)?;
    match &cfg.out {
        Some(path) => {
            let (csv, meta) = write_outputs(&output, path)?;
            eprintln!("wrote {} and {}", csv.display(), meta.display());
        }
        None => print!("{}", output.table.to_csv()?),
    }
    Ok(())
}

fn execute(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::MarkovMse(a) => run("markov-mse", "markov-1986", &a),
        Command::CreditVar(a) => run("credit-var", "credit-regime", &a),
        Command::PriceOption(a) => run("price-option", "option-1986", &a),
        Command::PortfolioIqae(a) => run("portfolio-iqae", "nber-portfolio", &a),
        Command::Preset { action: PresetAction::List } => {
            for name in preset_names() {
                println!("{name}\t{}", preset(name)?.experiment.kind());
            }
            Ok(())
        }
        Command::Preset {
            action: PresetAction::Show { name },
        } => {
            println!("{}", preset(&name)?.to_json());
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let field = match &e {
                Error::InvalidParameter { field, .. } => Some(field.clone()),
                _ => None,
            };
            let body = serde_json::json!({ "error": { "kind": e.kind(), "field": field, "message": e.to_string() } });
            eprintln!("{body}");
            ExitCode::from(2)
        }
    }
}
