//! `select`: recursive feature elimination with a cross-validated
//! accuracy log.

use std::path::{Path, PathBuf};

use ordfreq::selection::{rfe, selection_csv, Assignment, ModelSpec};

use crate::config::{default_out_dir, parse_params_file, RunConfig};
use crate::manifest::{manifest_path_for, Manifest};
use crate::CliError;

#[allow(clippy::too_many_arguments)]
pub fn run(
    config: &RunConfig,
    model: &str,
    train: &Path,
    k: Option<usize>,
    target_count: Option<usize>,
    params: Option<PathBuf>,
    seed: Option<u64>,
    out: Option<PathBuf>,
) -> Result<u8, CliError> {
    let family = super::parse_family(model)?;
    let k = config.resolve(k, "select", "k", 10)?;
    let target_count = config.resolve_opt(target_count, "select", "target_count")?;
    let seed = config.resolve(seed, "select", "seed", 0)?;
    let out = config
        .resolve_opt(out, "select", "out")?
        .unwrap_or_else(|| default_out_dir().join("selection.csv"));

    let data = super::load_dataset_auto(train)?;
    let assignment = match &params {
        Some(path) => parse_params_file(path)?,
        None => Assignment::from_pairs(Vec::new()),
    };
    let spec = ModelSpec::from_assignment(family, &assignment);
    let result = rfe(&spec, &data, k, target_count, seed)?;

    super::write_text(&out, &selection_csv(&result))?;
    println!(
        "retained {} of {} features; log written to {}",
        result.retained_features.len(),
        data.n_features(),
        out.display()
    );
    for name in &result.retained_features {
        println!("  {name}");
    }

    let mut manifest = Manifest::new("select", seed);
    manifest
        .setting("model", model)
        .setting("train", train.display())
        .setting("k", k)
        .setting("seed", seed)
        .setting("out", out.display());
    if let Some(t) = target_count {
        manifest.setting("target_count", t);
    }
    if let Some(p) = &params {
        manifest.setting("params", p.display());
        manifest.input(p)?;
    }
    manifest.input(train)?;
    manifest.output(&out)?;
    manifest.write(&manifest_path_for(&out))?;
    Ok(0)
}
