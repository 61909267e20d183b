//! `fit`: estimate a model and serialize it (plus the estimation table for
//! the probit family).

use std::path::{Path, PathBuf};

use ordfreq::model::AnyModel;
use ordfreq::probit::{self, FitOptions};
use ordfreq::selection::{Assignment, ModelSpec};

use crate::config::{default_out_dir, parse_params_file, RunConfig};
use crate::manifest::{manifest_path_for, Manifest};
use crate::CliError;

#[allow(clippy::too_many_arguments)]
pub fn run(
    config: &RunConfig,
    model: &str,
    train: &Path,
    features: Option<String>,
    params: Option<PathBuf>,
    seed: Option<u64>,
    out: Option<PathBuf>,
    report: Option<PathBuf>,
) -> Result<u8, CliError> {
    let family = super::parse_family(model)?;
    let seed = config.resolve(seed, "fit", "seed", 0)?;
    let features = config.resolve_opt(features, "fit", "features")?;
    let params = config.resolve_opt(params, "fit", "params")?;
    let out = config
        .resolve_opt(out, "fit", "out")?
        .unwrap_or_else(|| default_out_dir().join(format!("{model}.model.txt")));

    let data = super::load_dataset_auto(train)?;
    let feature_names: Vec<String> = match &features {
        Some(list) => list.split(',').map(|s| s.trim().to_string()).collect(),
        None => data.schema().names(),
    };
    for name in &feature_names {
        data.column_index(name)?;
    }
    let design = data.select_columns(&feature_names)?;

    let assignment = match &params {
        Some(path) => parse_params_file(path)?,
        None => Assignment::from_pairs(Vec::new()),
    };
    let spec = ModelSpec::from_assignment(family, &assignment);

    let mut exit = 0u8;
    let fitted = match &spec {
        ModelSpec::Probit { max_iter, tolerance } => {
            let options = FitOptions { max_iter: *max_iter, tolerance: *tolerance, seed };
            let fit = probit::fit(&design, &feature_names, &options)?;
            let report_path = report.unwrap_or_else(|| {
                let mut name = out.file_name().unwrap_or_default().to_os_string();
                name.push(".report.txt");
                out.with_file_name(name)
            });
            super::write_text(&report_path, &probit::probit_table_report(&fit))?;
            println!("wrote estimation table to {}", report_path.display());
            if !fit.converged {
                eprintln!(
                    "fit did not converge after {} iterations (gradient tolerance {}); report flagged converged=false",
                    fit.iterations, tolerance
                );
                exit = 3;
            }
            AnyModel::Probit(fit)
        }
        _ => spec.fit(&design, seed)?,
    };

    super::write_text(&out, &fitted.to_text())?;
    println!("wrote {} model to {}", fitted.kind(), out.display());

    let mut manifest = Manifest::new("fit", seed);
    manifest
        .setting("model", model)
        .setting("train", train.display())
        .setting("features", feature_names.join(","))
        .setting("seed", seed)
        .setting("out", out.display());
    if let Some(p) = &params {
        manifest.setting("params", p.display());
        manifest.input(p)?;
    }
    manifest.input(train)?;
    manifest.output(&out)?;
    manifest.write(&manifest_path_for(&out))?;
    Ok(exit)
}
