//! `explain`: SHAP global importance and per-feature dependence tables for
//! a fitted model, on the probability scale.

use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rayon::prelude::*;

use ordfreq::model::AnyModel;
use ordfreq::seed;
use ordfreq::shap::{
    dependence_csv, dependence_table, global_importance, importance_csv, shap_exact, shap_sampled,
    ShapExplanation,
};
use ordfreq::NUM_CLASSES;

use crate::config::{default_out_dir, RunConfig};
use crate::manifest::Manifest;
use crate::CliError;

#[allow(clippy::too_many_arguments)]
pub fn run(
    config: &RunConfig,
    model_path: &Path,
    data_path: &Path,
    method: Option<String>,
    n_permutations: Option<usize>,
    background_size: Option<usize>,
    obs_limit: Option<usize>,
    feature: Option<String>,
    seed_arg: Option<u64>,
    out_dir: Option<PathBuf>,
) -> Result<u8, CliError> {
    let method = config.resolve(method, "explain", "method", "sampled".to_string())?;
    let n_permutations = config.resolve(n_permutations, "explain", "n_permutations", 100)?;
    let background_size = config.resolve(background_size, "explain", "background_size", 100)?;
    let obs_limit = config.resolve(obs_limit, "explain", "obs_limit", 50)?;
    let run_seed = config.resolve(seed_arg, "explain", "seed", 0)?;
    let out_dir = config.resolve_opt(out_dir, "explain", "out_dir")?.unwrap_or_else(default_out_dir);
    std::fs::create_dir_all(&out_dir)
        .map_err(|e| CliError::Io { path: out_dir.display().to_string(), source: e })?;

    let model_text = std::fs::read_to_string(model_path)
        .map_err(|e| CliError::Io { path: model_path.display().to_string(), source: e })?;
    let model = AnyModel::from_text(&model_text)?;
    let data = super::load_dataset_auto(data_path)?;

    // design matrix in the model's column order
    let indices = model.design_indices(&data)?;
    let design: Vec<Vec<f64>> = (0..data.n_rows())
        .map(|i| indices.iter().map(|&j| data.row(i)[j]).collect())
        .collect();

    // background: seeded draw without replacement from the dataset
    let mut row_ids: Vec<usize> = (0..design.len()).collect();
    row_ids.shuffle(&mut seed::rng_for(run_seed, "shap.background"));
    let background: Vec<Vec<f64>> = row_ids
        .iter()
        .take(background_size.max(1).min(design.len()))
        .map(|&i| design[i].clone())
        .collect();

    // observations to explain: seeded sample, reported in dataset order
    let mut obs: Vec<usize> = (0..design.len()).collect();
    if obs_limit > 0 && obs_limit < obs.len() {
        obs.shuffle(&mut seed::rng_for(run_seed, "shap.observations"));
        obs.truncate(obs_limit);
        obs.sort_unstable();
    }

    let predict = |x: &[f64]| -> Vec<f64> {
        model.predict_proba(x).expect("dimensions fixed by construction").to_vec()
    };

    let explanations: Result<Vec<ShapExplanation>, CliError> = match method.as_str() {
        "exact" => obs
            .par_iter()
            .map(|&i| shap_exact(&predict, &design[i], &background).map_err(CliError::from))
            .collect(),
        "sampled" => obs
            .iter()
            .enumerate()
            .collect::<Vec<_>>()
            .into_par_iter()
            .map(|(ord, &i)| {
                shap_sampled(
                    &predict,
                    &design[i],
                    &background,
                    n_permutations,
                    seed::derive_indexed(run_seed, "shap.observation", ord as u64),
                )
                .map_err(CliError::from)
            })
            .collect(),
        other => {
            return Err(CliError::Invalid(format!(
                "unknown method `{other}` (exact | sampled)"
            )))
        }
    };
    let explanations = explanations?;

    let feature_names: Vec<String> = model.feature_names().to_vec();
    let ranking = global_importance(&explanations)?;
    let importance_path = out_dir.join("importance.csv");
    super::write_text(&importance_path, &importance_csv(&ranking, &feature_names))?;
    println!(
        "explained {} observations (method {}, probability scale); importance written to {}",
        obs.len(),
        method,
        importance_path.display()
    );

    let mut outputs = vec![importance_path];
    if let Some(feature_name) = &feature {
        let j = feature_names
            .iter()
            .position(|n| n == feature_name)
            .ok_or_else(|| CliError::Invalid(format!("model has no feature `{feature_name}`")))?;
        // dependence tables pair each explained observation with its value
        let explained_rows: Vec<usize> = obs.clone();
        let subset = data.subset(&explained_rows).select_columns(&feature_names)?;
        for class in 0..NUM_CLASSES {
            let table = dependence_table(&explanations, j, class, &subset)?;
            let path = out_dir.join(format!("dependence_{feature_name}_class{class}.csv"));
            super::write_text(&path, &dependence_csv(&table, class))?;
            outputs.push(path);
        }
        println!("dependence tables for `{feature_name}` written ({NUM_CLASSES} classes)");
    }

    let mut manifest = Manifest::new("explain", run_seed);
    manifest
        .setting("model", model_path.display())
        .setting("data", data_path.display())
        .setting("method", &method)
        .setting("n_permutations", n_permutations)
        .setting("background_size", background.len())
        .setting("obs_limit", obs_limit)
        .setting("seed", run_seed)
        .setting("out_dir", out_dir.display());
    if let Some(f) = &feature {
        manifest.setting("feature", f);
    }
    manifest.input(model_path)?;
    manifest.input(data_path)?;
    for path in &outputs {
        manifest.output(path)?;
    }
    manifest.write(&out_dir.join("manifest_explain.json"))?;
    Ok(0)
}
