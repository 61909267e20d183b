//! Batch command-line front end for the ordinal delivery-frequency
//! modeling pipeline: synthetic data generation, model fitting, feature
//! selection, hyperparameter tuning, evaluation, and SHAP explanation.
//!
//! Every command is seeded and writes a manifest next to its outputs, so a
//! run is reproducible from the manifest alone. Exit codes: 0 on success,
//! 1 on errors, 2 on usage errors (from the argument parser), 3 when a fit
//! completed but did not converge (outputs are still written).

mod commands;
mod config;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("io error on `{path}`: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}: {message}")]
    Config { path: String, line: usize, message: String },
    #[error("{0}")]
    Invalid(String),
    #[error(transparent)]
    Data(#[from] ordfreq::data::DataError),
    #[error(transparent)]
    Probit(#[from] ordfreq::probit::ProbitError),
    #[error(transparent)]
    Tree(#[from] ordfreq::tree::TreeError),
    #[error(transparent)]
    Selection(#[from] ordfreq::selection::SelectionError),
    #[error(transparent)]
    Model(#[from] ordfreq::model::ModelError),
    #[error(transparent)]
    Eval(#[from] ordfreq::eval::EvalError),
    #[error(transparent)]
    Shap(#[from] ordfreq::shap::ShapError),
}

#[derive(Parser)]
#[command(name = "ordfreq", version, about = "Ordinal delivery-frequency modeling pipeline")]
struct Cli {
    /// Rayon thread count (0 = library default).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Flat key=value config file; flags override its entries.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Draw a synthetic dataset from an ordinal data-generating process.
    Generate {
        /// DGP spec file; the built-in household spec when omitted.
        #[arg(long)]
        spec: Option<PathBuf>,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        /// Output CSV (a `.schema` sidecar is written next to it).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Write the resolved spec to this path and exit without sampling.
        #[arg(long)]
        emit_spec: Option<PathBuf>,
    },
    /// Fit a model on a training CSV.
    Fit {
        /// Model family: probit | forest | gbm.
        #[arg(long)]
        model: String,
        #[arg(long)]
        train: PathBuf,
        /// Comma-separated feature columns (default: all).
        #[arg(long)]
        features: Option<String>,
        /// Hyperparameter overrides as a key=value file.
        #[arg(long)]
        params: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        /// Serialized model path.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Estimation-table path (probit only; default `<out>.report.txt`).
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Recursive feature elimination.
    Select {
        #[arg(long)]
        model: String,
        #[arg(long)]
        train: PathBuf,
        #[arg(long)]
        k: Option<usize>,
        #[arg(long)]
        target_count: Option<usize>,
        #[arg(long)]
        params: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Randomized hyperparameter search over the default bounded domain.
    Tune {
        #[arg(long)]
        model: String,
        #[arg(long)]
        train: PathBuf,
        #[arg(long)]
        k: Option<usize>,
        #[arg(long)]
        n_draws: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        /// Trial log CSV path.
        #[arg(long)]
        out_log: Option<PathBuf>,
        /// Best-hyperparameter file path (loadable by `fit --params`).
        #[arg(long)]
        out_params: Option<PathBuf>,
    },
    /// Evaluate fitted models on a held-out CSV.
    Evaluate {
        /// Comma-separated model files.
        #[arg(long)]
        models: String,
        #[arg(long)]
        test: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// SHAP importance and dependence tables for a fitted model.
    Explain {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        data: PathBuf,
        /// exact | sampled.
        #[arg(long)]
        method: Option<String>,
        #[arg(long)]
        n_permutations: Option<usize>,
        #[arg(long)]
        background_size: Option<usize>,
        /// Number of observations to explain (0 = all).
        #[arg(long)]
        obs_limit: Option<usize>,
        /// Also write per-class dependence tables for this feature.
        #[arg(long)]
        feature: Option<String>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(threads) = cli.threads {
        if threads > 0 {
            // ignore failure when a pool already exists (e.g. in tests)
            let _ = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global();
        }
    }
    let run_config = match config::RunConfig::load(cli.config.as_deref()) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };
    match commands::dispatch(cli.command, &run_config) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
