//! `evaluate`: confusion matrices, precision/recall, and aggregate
//! class-share comparison for fitted models on held-out data.

use std::path::{Path, PathBuf};

use ordfreq::eval::{build_report, heatmap_csv, report_csv, report_json};
use ordfreq::model::AnyModel;

use crate::config::{default_out_dir, RunConfig};
use crate::manifest::Manifest;
use crate::CliError;

pub fn run(
    config: &RunConfig,
    models: &str,
    test: &Path,
    seed: Option<u64>,
    out_dir: Option<PathBuf>,
) -> Result<u8, CliError> {
    let seed = config.resolve(seed, "evaluate", "seed", 0)?;
    let out_dir = config.resolve_opt(out_dir, "evaluate", "out_dir")?.unwrap_or_else(default_out_dir);
    std::fs::create_dir_all(&out_dir)
        .map_err(|e| CliError::Io { path: out_dir.display().to_string(), source: e })?;

    let model_paths: Vec<PathBuf> =
        models.split(',').map(|s| PathBuf::from(s.trim())).collect();
    let mut loaded = Vec::with_capacity(model_paths.len());
    for path in &model_paths {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Io { path: path.display().to_string(), source: e })?;
        let id = path.file_stem().map_or_else(
            || path.display().to_string(),
            |s| s.to_string_lossy().into_owned(),
        );
        loaded.push((id, AnyModel::from_text(&text)?));
    }

    let data = super::load_dataset_auto(test)?;
    let dataset_id = test.display().to_string();
    let reports = build_report(&loaded, &data, &dataset_id, seed)?;

    let json_path = out_dir.join("report.json");
    super::write_text(&json_path, &report_json(&reports))?;
    let csv_path = out_dir.join("report.csv");
    super::write_text(&csv_path, &report_csv(&reports))?;
    let mut heatmap_paths = Vec::new();
    for report in &reports {
        let path = out_dir.join(format!("heatmap_{}.csv", report.metadata.model_id));
        super::write_text(&path, &heatmap_csv(&report.confusion))?;
        heatmap_paths.push(path);
    }

    for report in &reports {
        println!(
            "{}: accuracy {:.1}%, tv(argmax) {:.4}",
            report.metadata.model_id,
            report.accuracy * 100.0,
            report.tv_argmax
        );
    }
    println!("report written to {}", json_path.display());

    let mut manifest = Manifest::new("evaluate", seed);
    manifest
        .setting("models", models)
        .setting("test", test.display())
        .setting("seed", seed)
        .setting("out_dir", out_dir.display());
    for path in &model_paths {
        manifest.input(path)?;
    }
    manifest.input(test)?;
    manifest.output(&json_path)?.output(&csv_path)?;
    for path in &heatmap_paths {
        manifest.output(path)?;
    }
    manifest.write(&out_dir.join("manifest.json"))?;
    Ok(0)
}
