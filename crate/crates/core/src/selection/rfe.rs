//! Recursive feature elimination.
//!
//! One feature leaves per step: fit the model on the surviving set, rank
//! features by importance (split gain for trees, |t-value| for the probit
//! model), drop the least important, and record the set's cross-validated
//! accuracy. With no target count the loop runs to a single feature and
//! retains the smallest set whose accuracy stays within one point of the
//! best.

use std::fmt::Write as _;

use super::{cross_validate, ModelSpec, SelectionError};
use crate::data::Dataset;
use crate::seed;

/// Tolerated accuracy drop when choosing the retained set automatically.
const AUTO_TOLERANCE: f64 = 0.01;

/// Elimination outcome.
#[derive(Debug, Clone, PartialEq)]
pub struct SelectionResult {
    /// Elimination order: first entry left first; the last entries are the
    /// retained features ranked ascending by final importance, so the very
    /// last is the most important.
    pub ranked_features: Vec<String>,
    pub retained_features: Vec<String>,
    /// `(feature count, mean CV accuracy)` per step, from the full set down
    /// to the stopping count.
    pub cv_score_per_step: Vec<(usize, f64)>,
}

/// Runs recursive feature elimination over `data`'s columns.
pub fn rfe(
    spec: &ModelSpec,
    data: &Dataset,
    k: usize,
    target_count: Option<usize>,
    rfe_seed: u64,
) -> Result<SelectionResult, SelectionError> {
    let p = data.n_features();
    let stop_count = target_count.unwrap_or(1);
    if stop_count < 1 || stop_count > p {
        return Err(SelectionError::BadTarget { target: stop_count, p });
    }
    let original_index: std::collections::HashMap<String, usize> = data
        .schema()
        .names()
        .into_iter()
        .enumerate()
        .map(|(i, n)| (n, i))
        .collect();

    let mut current: Vec<String> = data.schema().names();
    let mut eliminated: Vec<String> = Vec::new();
    let mut steps: Vec<(usize, f64)> = Vec::new();
    let mut step_sets: Vec<Vec<String>> = Vec::new();
    let mut step = 0u64;

    let abort = |message: String, eliminated: &[String], current: &[String], steps: &[(usize, f64)]| {
        SelectionError::RfeAborted {
            message,
            partial: SelectionResult {
                ranked_features: eliminated.iter().chain(current.iter()).cloned().collect(),
                retained_features: current.to_vec(),
                cv_score_per_step: steps.to_vec(),
            },
        }
    };

    loop {
        let view = data.select_columns(&current)?;
        let cv = cross_validate(spec, &view, k, seed::derive_indexed(rfe_seed, "rfe.cv", step))?;
        steps.push((current.len(), cv.mean_accuracy));
        step_sets.push(current.clone());
        if current.len() == stop_count {
            break;
        }
        let importance = spec
            .importance(&view, seed::derive_indexed(rfe_seed, "rfe.fit", step))
            .map_err(|e| abort(e.to_string(), &eliminated, &current, &steps))?;
        // least important leaves; ties drop the higher original index first
        let mut worst = 0;
        for j in 1..current.len() {
            let better = importance[j] < importance[worst]
                || (importance[j] == importance[worst]
                    && original_index[&current[j]] > original_index[&current[worst]]);
            if better {
                worst = j;
            }
        }
        eliminated.push(current.remove(worst));
        step += 1;
    }

    // final importance pass ranks the retained features
    let view = data.select_columns(&current)?;
    let mut retained_ranked: Vec<(String, f64)> = if current.len() == 1 {
        vec![(current[0].clone(), 0.0)]
    } else {
        let importance = spec
            .importance(&view, seed::derive(rfe_seed, "rfe.final"))
            .map_err(|e| abort(e.to_string(), &eliminated, &current, &steps))?;
        current.iter().cloned().zip(importance).collect()
    };
    retained_ranked.sort_by(|a, b| {
        a.1.total_cmp(&b.1)
            .then_with(|| original_index[&b.0].cmp(&original_index[&a.0]))
    });

    let retained_features = match target_count {
        Some(_) => current.clone(),
        None => {
            // smallest count whose accuracy is within tolerance of the best
            let best = steps.iter().map(|&(_, a)| a).fold(f64::NEG_INFINITY, f64::max);
            let pick = steps
                .iter()
                .zip(&step_sets)
                .filter(|((_, a), _)| *a >= best - AUTO_TOLERANCE)
                .min_by_key(|((count, _), _)| *count)
                .map(|(_, set)| set.clone())
                .unwrap_or_else(|| current.clone());
            pick
        }
    };

    let mut ranked_features = eliminated;
    ranked_features.extend(retained_ranked.into_iter().map(|(n, _)| n));
    Ok(SelectionResult { ranked_features, retained_features, cv_score_per_step: steps })
}

/// Elimination log as CSV: one row per step.
pub fn selection_csv(result: &SelectionResult) -> String {
    let mut out = String::from("feature_count,mean_cv_accuracy\n");
    for (count, accuracy) in &result.cv_score_per_step {
        let _ = writeln!(out, "{count},{accuracy}");
    }
    out.push_str("\nranked_features (least important first)\n");
    for name in &result.ranked_features {
        let _ = writeln!(out, "{name}");
    }
    out.push_str("\nretained_features\n");
    for name in &result.retained_features {
        let _ = writeln!(out, "{name}");
    }
    out
}
