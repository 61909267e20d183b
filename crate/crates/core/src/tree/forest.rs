//! Bagged random forest with majority voting.

use rayon::prelude::*;

use super::{fit_classification_tree, DecisionTree, GrowthControls, TreeError};
use crate::data::{Dataset, OrdinalLabel};
use crate::probit::argmax_label;
use crate::{seed, NUM_CLASSES};

/// Forest hyperparameters. `features_per_split = None` resolves to
/// `ceil(sqrt(p))` at fit time; `bootstrap = false` trains every tree on the
/// full sample (useful for degenerate-forest checks).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ForestHyperparams {
    pub n_trees: usize,
    pub max_depth: usize,
    pub min_samples_leaf: usize,
    pub features_per_split: Option<usize>,
    pub bootstrap_fraction: f64,
    pub bootstrap: bool,
}

impl Default for ForestHyperparams {
    fn default() -> Self {
        Self {
            n_trees: 200,
            max_depth: 12,
            min_samples_leaf: 5,
            features_per_split: None,
            bootstrap_fraction: 1.0,
            bootstrap: true,
        }
    }
}

impl ForestHyperparams {
    pub fn validate(&self, p: usize) -> Result<(), TreeError> {
        if self.n_trees == 0 {
            return Err(TreeError::BadHyperparams("n_trees must be >= 1".into()));
        }
        if self.max_depth == 0 {
            return Err(TreeError::BadHyperparams("max_depth must be >= 1".into()));
        }
        if self.min_samples_leaf == 0 {
            return Err(TreeError::BadHyperparams("min_samples_leaf must be >= 1".into()));
        }
        if let Some(m) = self.features_per_split {
            if m == 0 || m > p {
                return Err(TreeError::BadHyperparams(format!(
                    "features_per_split must lie in 1..={p}, got {m}"
                )));
            }
        }
        if !(self.bootstrap_fraction > 0.0 && self.bootstrap_fraction <= 1.0) {
            return Err(TreeError::BadHyperparams(format!(
                "bootstrap_fraction must lie in (0, 1], got {}",
                self.bootstrap_fraction
            )));
        }
        Ok(())
    }

    pub(crate) fn resolved_mtry(&self, p: usize) -> usize {
        self.features_per_split.unwrap_or_else(|| (p as f64).sqrt().ceil() as usize).clamp(1, p)
    }
}

/// A fitted forest: independent Gini trees over bootstrap resamples.
#[derive(Debug, Clone, PartialEq)]
pub struct RandomForestModel {
    pub trees: Vec<DecisionTree>,
    pub hyperparams: ForestHyperparams,
    pub seed: u64,
    pub feature_names: Vec<String>,
}

/// Fits the forest. Each tree owns a random stream derived from
/// `(seed, tree index)`, so parallel and serial builds agree bit for bit.
pub fn fit_random_forest(
    data: &Dataset,
    hyperparams: &ForestHyperparams,
    fit_seed: u64,
) -> Result<RandomForestModel, TreeError> {
    let p = data.n_features();
    hyperparams.validate(p)?;
    if data.n_rows() == 0 {
        return Err(TreeError::EmptyData);
    }
    let n = data.n_rows();
    let pool: Vec<usize> = (0..p).collect();
    let mtry = hyperparams.resolved_mtry(p);
    let controls = GrowthControls {
        max_depth: hyperparams.max_depth,
        min_samples_leaf: hyperparams.min_samples_leaf,
    };
    let sample_size = ((hyperparams.bootstrap_fraction * n as f64).round() as usize).max(1);

    let trees: Result<Vec<DecisionTree>, TreeError> = (0..hyperparams.n_trees)
        .into_par_iter()
        .map(|t| {
            let mut rng = seed::rng_indexed(fit_seed, "forest.tree", t as u64);
            let rows: Vec<usize> = if hyperparams.bootstrap {
                use rand::Rng;
                (0..sample_size).map(|_| rng.random_range(0..n)).collect()
            } else {
                (0..n).collect()
            };
            fit_classification_tree(data, &rows, controls, &pool, mtry, &mut rng)
        })
        .collect();

    Ok(RandomForestModel {
        trees: trees?,
        hyperparams: *hyperparams,
        seed: fit_seed,
        feature_names: data.schema().names(),
    })
}

/// Vote shares over classes: each tree votes its leaf argmax.
pub fn forest_predict_proba(
    model: &RandomForestModel,
    x: &[f64],
) -> Result<[f64; NUM_CLASSES], TreeError> {
    check_x(model, x)?;
    let mut votes = [0usize; NUM_CLASSES];
    for tree in &model.trees {
        votes[tree.predict(x)] += 1;
    }
    let total = model.trees.len() as f64;
    Ok(votes.map(|v| v as f64 / total))
}

/// Majority vote with ties toward the lowest class.
pub fn forest_predict(model: &RandomForestModel, x: &[f64]) -> Result<OrdinalLabel, TreeError> {
    Ok(argmax_label(&forest_predict_proba(model, x)?))
}

fn check_x(model: &RandomForestModel, x: &[f64]) -> Result<(), TreeError> {
    let expected = model.feature_names.len();
    if x.len() != expected {
        return Err(TreeError::DimensionMismatch { expected, found: x.len() });
    }
    Ok(())
}
