//! Command implementations.

mod evaluate;
mod explain;
mod fit;
mod generate;
mod select;
mod tune;

use std::path::{Path, PathBuf};

use ordfreq::data::{self, Dataset, FeatureSchema, LABEL_COLUMN};
use ordfreq::selection::ModelFamily;

use crate::config::RunConfig;
use crate::{CliError, Command};

pub fn dispatch(command: Command, config: &RunConfig) -> Result<u8, CliError> {
    match command {
        Command::Generate { spec, n, seed, out, emit_spec } => {
            generate::run(config, spec, n, seed, out, emit_spec)
        }
        Command::Fit { model, train, features, params, seed, out, report } => {
            fit::run(config, &model, &train, features, params, seed, out, report)
        }
        Command::Select { model, train, k, target_count, params, seed, out } => {
            select::run(config, &model, &train, k, target_count, params, seed, out)
        }
        Command::Tune { model, train, k, n_draws, seed, out_log, out_params } => {
            tune::run(config, &model, &train, k, n_draws, seed, out_log, out_params)
        }
        Command::Evaluate { models, test, seed, out_dir } => {
            evaluate::run(config, &models, &test, seed, out_dir)
        }
        Command::Explain {
            model,
            data,
            method,
            n_permutations,
            background_size,
            obs_limit,
            feature,
            seed,
            out_dir,
        } => explain::run(
            config,
            &model,
            &data,
            method,
            n_permutations,
            background_size,
            obs_limit,
            feature,
            seed,
            out_dir,
        ),
    }
}

/// Loads a dataset CSV. A `<path>.schema` sidecar supplies column kinds
/// when present; otherwise every feature column is treated as continuous.
pub fn load_dataset_auto(path: &Path) -> Result<Dataset, CliError> {
    let sidecar = schema_sidecar_path(path);
    let schema = if sidecar.exists() {
        data::read_schema_file(&sidecar)?
    } else {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Io { path: path.display().to_string(), source: e })?;
        let header = text.lines().next().unwrap_or("");
        let names: Vec<String> = header
            .trim_end_matches('\r')
            .split(',')
            .filter(|f| *f != LABEL_COLUMN)
            .map(str::to_string)
            .collect();
        FeatureSchema::all_continuous(&names)?
    };
    Ok(data::load_dataset(path, &schema)?)
}

pub fn schema_sidecar_path(csv: &Path) -> PathBuf {
    let mut name = csv.file_name().unwrap_or_default().to_os_string();
    name.push(".schema");
    csv.with_file_name(name)
}

pub fn parse_family(name: &str) -> Result<ModelFamily, CliError> {
    ModelFamily::parse(name)
        .ok_or_else(|| CliError::Invalid(format!("unknown model family `{name}` (probit | forest | gbm)")))
}

pub fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)
                .map_err(|e| CliError::Io { path: parent.display().to_string(), source: e })?;
        }
    }
    std::fs::write(path, text)
        .map_err(|e| CliError::Io { path: path.display().to_string(), source: e })
}
