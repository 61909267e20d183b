//! Randomized hyperparameter search over a bounded domain.

use std::fmt::Write as _;

use rayon::prelude::*;

use super::{cross_validate, Assignment, CvResult, HyperparamDomain, ModelFamily, ModelSpec, SelectionError};
use crate::data::Dataset;
use crate::seed;

/// One evaluated draw.
#[derive(Debug, Clone, PartialEq)]
pub struct Trial {
    pub index: usize,
    pub assignment: Assignment,
    pub cv: CvResult,
}

/// Search outcome: the argmax trial plus the full log.
#[derive(Debug, Clone, PartialEq)]
pub struct SearchResult {
    pub best_index: usize,
    pub best_assignment: Assignment,
    pub best_spec: ModelSpec,
    pub best_score: f64,
    pub trials: Vec<Trial>,
}

/// Draws `n_draws` independent uniform samples from the domain, scores each
/// by k-fold cross-validation, and returns the argmax of mean accuracy
/// (ties resolve to the earlier draw). Trials may evaluate concurrently;
/// the log is ordered by draw index either way.
pub fn randomized_search(
    family: ModelFamily,
    domain: &HyperparamDomain,
    n_draws: usize,
    data: &Dataset,
    k: usize,
    search_seed: u64,
) -> Result<SearchResult, SelectionError> {
    if n_draws == 0 {
        return Err(SelectionError::NoDraws);
    }
    // all draws come from one sequential stream so the trial list does not
    // depend on evaluation scheduling
    let mut draw_rng = seed::rng_for(search_seed, "search.draws");
    let assignments: Vec<Assignment> = (0..n_draws).map(|_| domain.sample(&mut draw_rng)).collect();

    let trials: Result<Vec<Trial>, SelectionError> = assignments
        .into_par_iter()
        .enumerate()
        .map(|(index, assignment)| {
            let spec = ModelSpec::from_assignment(family, &assignment);
            let cv =
                cross_validate(&spec, data, k, seed::derive_indexed(search_seed, "search.trial", index as u64))?;
            Ok(Trial { index, assignment, cv })
        })
        .collect();
    let trials = trials?;

    let mut best_index = 0;
    for trial in &trials {
        // NaN means every fold failed; such trials never win
        if trial.cv.mean_accuracy > trials[best_index].cv.mean_accuracy
            || trials[best_index].cv.mean_accuracy.is_nan() && !trial.cv.mean_accuracy.is_nan()
        {
            best_index = trial.index;
        }
    }
    let best_assignment = trials[best_index].assignment.clone();
    Ok(SearchResult {
        best_index,
        best_spec: ModelSpec::from_assignment(family, &best_assignment),
        best_assignment,
        best_score: trials[best_index].cv.mean_accuracy,
        trials,
    })
}

/// Trial log as CSV: one row per draw with the sampled values, mean
/// accuracy, and failed-fold count.
pub fn trials_csv(result: &SearchResult) -> String {
    let mut out = String::from("trial");
    for (name, _) in result.trials[0].assignment.iter() {
        let _ = write!(out, ",{name}");
    }
    out.push_str(",mean_accuracy,n_fold_failures,best\n");
    for trial in &result.trials {
        let _ = write!(out, "{}", trial.index);
        for (_, value) in trial.assignment.iter() {
            let _ = write!(out, ",{value}");
        }
        let _ = writeln!(
            out,
            ",{},{},{}",
            trial.cv.mean_accuracy,
            trial.cv.n_failures,
            trial.index == result.best_index
        );
    }
    out
}
