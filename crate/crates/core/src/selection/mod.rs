//! Model selection: stratified k-fold cross-validation, randomized
//! hyperparameter search over bounded domains, and recursive feature
//! elimination.

mod domain;
mod kfold;
mod rfe;
mod search;

pub use domain::{Assignment, HyperparamDomain, ModelFamily, ModelSpec, ParamRange, ParamValue};
pub use kfold::kfold_indices;
pub use rfe::{rfe, selection_csv, SelectionResult};
pub use search::{randomized_search, trials_csv, SearchResult, Trial};

use thiserror::Error;

use crate::data::{DataError, Dataset};
use crate::eval::confusion_matrix;
use crate::model::ModelError;
use crate::seed;

#[derive(Debug, Error)]
pub enum SelectionError {
    #[error("k must satisfy 2 <= k <= n (got k = {k}, n = {n})")]
    BadK { k: usize, n: usize },
    #[error("invalid domain: {0}")]
    BadDomain(String),
    #[error("n_draws must be >= 1")]
    NoDraws,
    #[error("target_count must satisfy 1 <= target <= p (got target = {target}, p = {p})")]
    BadTarget { target: usize, p: usize },
    #[error("feature elimination aborted after {} recorded steps: {message}", partial.cv_score_per_step.len())]
    RfeAborted { message: String, partial: SelectionResult },
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Data(#[from] DataError),
}

/// Accuracy of one validation fold; failed fits are reported, never
/// silently dropped.
#[derive(Debug, Clone, PartialEq)]
pub struct FoldOutcome {
    pub fold: usize,
    pub accuracy: Option<f64>,
    pub error: Option<String>,
}

/// Cross-validation summary. `mean_accuracy` averages the successful folds
/// and is NaN when every fold failed.
#[derive(Debug, Clone, PartialEq)]
pub struct CvResult {
    pub folds: Vec<FoldOutcome>,
    pub mean_accuracy: f64,
    pub n_failures: usize,
}

/// Stratified k-fold cross-validation of one model specification: train on
/// each fold's complement, score overall accuracy on the fold.
pub fn cross_validate(
    spec: &ModelSpec,
    data: &Dataset,
    k: usize,
    cv_seed: u64,
) -> Result<CvResult, SelectionError> {
    let folds = kfold_indices(data.labels(), k, seed::derive(cv_seed, "cv.folds"))?;
    let n = data.n_rows();
    let outcomes: Vec<FoldOutcome> = folds
        .iter()
        .enumerate()
        .map(|(f, validation)| {
            let in_validation: Vec<bool> = {
                let mut mask = vec![false; n];
                for &i in validation {
                    mask[i] = true;
                }
                mask
            };
            let train_idx: Vec<usize> = (0..n).filter(|&i| !in_validation[i]).collect();
            let train = data.subset(&train_idx);
            let validation_data = data.subset(validation);
            match spec.fit(&train, seed::derive_indexed(cv_seed, "cv.fold", f as u64)) {
                Ok(model) => match model.predict_dataset(&validation_data) {
                    Ok(preds) => {
                        let accuracy = confusion_matrix(validation_data.labels(), &preds)
                            .map(|m| m.overall_accuracy())
                            .map_err(|e| e.to_string());
                        match accuracy {
                            Ok(a) => FoldOutcome { fold: f, accuracy: Some(a), error: None },
                            Err(e) => FoldOutcome { fold: f, accuracy: None, error: Some(e) },
                        }
                    }
                    Err(e) => FoldOutcome { fold: f, accuracy: None, error: Some(e.to_string()) },
                },
                Err(e) => FoldOutcome { fold: f, accuracy: None, error: Some(e.to_string()) },
            }
        })
        .collect();

    let successes: Vec<f64> = outcomes.iter().filter_map(|o| o.accuracy).collect();
    let n_failures = outcomes.len() - successes.len();
    let mean_accuracy = if successes.is_empty() {
        f64::NAN
    } else {
        successes.iter().sum::<f64>() / successes.len() as f64
    };
    Ok(CvResult { folds: outcomes, mean_accuracy, n_failures })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::probit::tests::dataset_from;
    use crate::tree::forest::tests::blob_data;
    use crate::tree::ForestHyperparams;

    #[test]
    fn constant_labels_score_perfectly_with_forest() {
        let rows: Vec<Vec<f64>> = (0..40).map(|i| vec![i as f64]).collect();
        let data = dataset_from(rows, vec![3; 40]);
        let spec = ModelSpec::Forest(ForestHyperparams { n_trees: 3, ..Default::default() });
        let cv = cross_validate(&spec, &data, 5, 1).unwrap();
        assert_eq!(cv.n_failures, 0);
        assert_eq!(cv.mean_accuracy, 1.0);
        for fold in &cv.folds {
            assert_eq!(fold.accuracy, Some(1.0));
        }
    }

    #[test]
    fn separable_data_scores_high() {
        let data = blob_data(300, 90);
        let spec = ModelSpec::Forest(ForestHyperparams { n_trees: 30, ..Default::default() });
        let cv = cross_validate(&spec, &data, 10, 2).unwrap();
        assert_eq!(cv.n_failures, 0);
        assert!(cv.mean_accuracy >= 0.95, "mean accuracy {}", cv.mean_accuracy);
    }

    #[test]
    fn identical_seeds_give_identical_scores() {
        let data = blob_data(120, 91);
        let spec = ModelSpec::Forest(ForestHyperparams { n_trees: 8, ..Default::default() });
        let a = cross_validate(&spec, &data, 4, 7).unwrap();
        let b = cross_validate(&spec, &data, 4, 7).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn fold_failures_are_flagged_and_excluded() {
        // probit cannot fit folds whose training side has one distinct label
        let rows: Vec<Vec<f64>> = (0..12).map(|i| vec![i as f64]).collect();
        let data = dataset_from(rows, vec![2; 12]);
        let spec = ModelSpec::probit_default();
        let cv = cross_validate(&spec, &data, 3, 1).unwrap();
        assert_eq!(cv.n_failures, 3);
        assert!(cv.mean_accuracy.is_nan());
        for fold in &cv.folds {
            assert!(fold.error.is_some());
        }
    }
}
