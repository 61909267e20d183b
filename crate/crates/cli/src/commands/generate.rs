//! `generate`: sample a synthetic dataset and print a class-share summary.

use std::path::PathBuf;

use ordfreq::data::{generate_synthetic, write_dataset, write_schema_file, SyntheticSpec};
use ordfreq::eval::aggregate_shares;

use crate::config::{default_out_dir, RunConfig};
use crate::manifest::{manifest_path_for, Manifest};
use crate::CliError;

#[allow(clippy::too_many_arguments)]
pub fn run(
    config: &RunConfig,
    spec_path: Option<PathBuf>,
    n: Option<usize>,
    seed: Option<u64>,
    out: Option<PathBuf>,
    emit_spec: Option<PathBuf>,
) -> Result<u8, CliError> {
    let spec_path = config.resolve_opt(spec_path, "generate", "spec")?;
    let n = config.resolve(n, "generate", "n", 1000)?;
    let seed = config.resolve(seed, "generate", "seed", 0)?;
    let out = config
        .resolve_opt(out, "generate", "out")?
        .unwrap_or_else(|| default_out_dir().join("synthetic.csv"));

    let spec = match &spec_path {
        Some(path) => SyntheticSpec::read_file(path)?,
        None => SyntheticSpec::household_default(),
    };
    if let Some(target) = emit_spec {
        spec.write_file(&target)?;
        println!("wrote spec to {}", target.display());
        return Ok(0);
    }

    let dataset = generate_synthetic(&spec, n, seed)?;
    write_dataset(&dataset, &out)?;
    let sidecar = super::schema_sidecar_path(&out);
    write_schema_file(dataset.schema(), &sidecar)?;

    let shares = aggregate_shares(dataset.labels())?;
    let mean: f64 =
        dataset.labels().iter().map(|l| l.value() as f64).sum::<f64>() / dataset.n_rows() as f64;
    let nonzero: Vec<f64> = dataset
        .labels()
        .iter()
        .filter(|l| l.value() > 0)
        .map(|l| l.value() as f64)
        .collect();
    println!("wrote {} rows to {}", dataset.n_rows(), out.display());
    println!("class shares:");
    for (c, share) in shares.iter().enumerate() {
        println!("  {c}: {:.1}%", share * 100.0);
    }
    println!("mean weekly deliveries: {mean:.2}");
    if !nonzero.is_empty() {
        println!(
            "mean among delivery-receiving households: {:.2}",
            nonzero.iter().sum::<f64>() / nonzero.len() as f64
        );
    }

    let mut manifest = Manifest::new("generate", seed);
    manifest
        .setting("n", n)
        .setting("seed", seed)
        .setting("out", out.display())
        .setting("spec", spec_path.as_ref().map_or("builtin:household".into(), |p| p.display().to_string()));
    if let Some(path) = &spec_path {
        manifest.input(path)?;
    }
    manifest.output(&out)?.output(&sidecar)?;
    manifest.write(&manifest_path_for(&out))?;
    Ok(0)
}
