//! `tune`: randomized hyperparameter search over the family's default
//! bounded domain.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use ordfreq::selection::{randomized_search, trials_csv, HyperparamDomain, ModelFamily};

use crate::config::{default_out_dir, RunConfig};
use crate::manifest::{manifest_path_for, Manifest};
use crate::CliError;

#[allow(clippy::too_many_arguments)]
pub fn run(
    config: &RunConfig,
    model: &str,
    train: &Path,
    k: Option<usize>,
    n_draws: Option<usize>,
    seed: Option<u64>,
    out_log: Option<PathBuf>,
    out_params: Option<PathBuf>,
) -> Result<u8, CliError> {
    let family = super::parse_family(model)?;
    let k = config.resolve(k, "tune", "k", 10)?;
    let n_draws = config.resolve(n_draws, "tune", "n_draws", 20)?;
    let seed = config.resolve(seed, "tune", "seed", 0)?;
    let out_log = config
        .resolve_opt(out_log, "tune", "out_log")?
        .unwrap_or_else(|| default_out_dir().join("tune_trials.csv"));
    let out_params = config
        .resolve_opt(out_params, "tune", "out_params")?
        .unwrap_or_else(|| default_out_dir().join("best_params.txt"));

    let data = super::load_dataset_auto(train)?;
    let domain = match family {
        ModelFamily::Forest => HyperparamDomain::forest_default(data.n_features()),
        ModelFamily::Gbm => HyperparamDomain::gbm_default(),
        ModelFamily::OrderedProbit => {
            return Err(CliError::Invalid(
                "the probit family has no tunable hyperparameter domain; tune forest or gbm".into(),
            ))
        }
    };
    let result = randomized_search(family, &domain, n_draws, &data, k, seed)?;

    super::write_text(&out_log, &trials_csv(&result))?;
    let mut best = String::new();
    for (name, value) in result.best_assignment.iter() {
        let _ = writeln!(best, "{name} = {value}");
    }
    super::write_text(&out_params, &best)?;
    println!(
        "best of {n_draws} draws: trial {} with mean CV accuracy {:.4}",
        result.best_index, result.best_score
    );
    println!("trial log: {}", out_log.display());
    println!("best params: {}", out_params.display());

    let mut manifest = Manifest::new("tune", seed);
    manifest
        .setting("model", model)
        .setting("train", train.display())
        .setting("k", k)
        .setting("n_draws", n_draws)
        .setting("seed", seed)
        .setting("out_log", out_log.display())
        .setting("out_params", out_params.display());
    manifest.input(train)?;
    manifest.output(&out_log)?.output(&out_params)?;
    manifest.write(&manifest_path_for(&out_log))?;
    Ok(0)
}
