use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use uwb_nlos_cli::{
    cmd_classify, cmd_extract, cmd_fit, cmd_generate, cmd_report, CliError, RunConfig,
};

#[derive(Parser)]
#[command(
    name = "uwb-nlos",
    version,
    about = "LOS/NLOS classification of UWB impulse responses"
)]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Optional `key = value` configuration file; flags take precedence.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Seed for every random draw in the run.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Records generated per class.
    #[arg(long, global = true)]
    n_per_class: Option<usize>,
    /// Histogram bins per feature and class.
    #[arg(long, global = true)]
    bins: Option<usize>,
    /// Lower bound on every fitted density.
    #[arg(long, global = true)]
    floor: Option<f64>,
    /// First significant tap: |x| above this fraction of the peak.
    #[arg(long, global = true)]
    rel_eps: Option<f64>,
    /// Share of each class used for fitting with --holdout.
    #[arg(long, global = true)]
    train_fraction: Option<f64>,
    /// Fit on a stratified train split and report on the held-out part.
    #[arg(long, global = true)]
    holdout: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Write a synthetic LOS/NLOS dataset.
    Generate {
        #[arg(long, default_value = "dataset.csv")]
        out: PathBuf,
    },
    /// Write the feature table of a dataset.
    Extract {
        dataset: PathBuf,
        #[arg(long, default_value = "features.csv")]
        out: PathBuf,
        /// Report and skip records whose statistics are undefined.
        #[arg(long)]
        skip_degenerate: bool,
    },
    /// Fit densities and thresholds.
    Fit {
        dataset: PathBuf,
        #[arg(long, default_value = "model.json")]
        out: PathBuf,
    },
    /// Label every record of a dataset.
    Classify {
        model: PathBuf,
        dataset: PathBuf,
        /// Feature name, `+`-joined features, or `cov_mean`.
        #[arg(long)]
        selector: String,
        /// `ratio` or `hypothesis`.
        #[arg(long)]
        method: String,
        #[arg(long, default_value = "labels.csv")]
        out: PathBuf,
    },
    /// Accuracy table plus density exports.
    Report {
        model: PathBuf,
        dataset: PathBuf,
        #[arg(long, default_value = "report")]
        out: PathBuf,
    },
}

fn config(common: &Common) -> Result<RunConfig, CliError> {
    let mut cfg = RunConfig::default();
    if let Some(path) = &common.config {
        cfg.apply_file(path)?;
    }
    if let Some(v) = common.seed {
        cfg.seed = v;
    }
    if let Some(v) = common.n_per_class {
        cfg.n_per_class = v;
    }
    if let Some(v) = common.bins {
        cfg.bins = v;
    }
    if let Some(v) = common.floor {
        cfg.floor = v;
    }
    if let Some(v) = common.rel_eps {
        cfg.rel_eps = v;
    }
    if let Some(v) = common.train_fraction {
        cfg.train_fraction = v;
    }
    if common.holdout {
        cfg.in_sample = false;
    }
    Ok(cfg)
}

fn run(cli: Cli) -> Result<String, CliError> {
    let cfg = config(&cli.common)?;
    match cli.command {
        Command::Generate { out } => cmd_generate(&cfg, &out),
        Command::Extract {
            dataset,
            out,
            skip_degenerate,
        } => cmd_extract(&cfg, &dataset, &out, skip_degenerate),
        Command::Fit { dataset, out } => cmd_fit(&cfg, &dataset, &out),
        Command::Classify {
            model,
            dataset,
            selector,
            method,
            out,
        } => cmd_classify(&model, &dataset, &selector, &method, &out),
        Command::Report {
            model,
            dataset,
            out,
        } => cmd_report(&cfg, &model, &dataset, &out),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(msg) => {
            print!("{msg}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
