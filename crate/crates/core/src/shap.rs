//! Shapley-value explanations for any probability-predicting model.
//!
//! The value function is interventional: `v(S)` replaces out-of-coalition
//! features with background rows and averages the model's predicted
//! probabilities. Exact enumeration covers up to 15 features; beyond that a
//! permutation-sampling estimator with reported standard errors applies.
//! The explainer couples to a model only through a prediction closure, so
//! it never inspects tree or coefficient internals. Attributions are on the
//! probability scale, one set per outcome class.

use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rayon::prelude::*;
use thiserror::Error;

use crate::data::Dataset;
use crate::seed;

/// Hard cap for exact enumeration (2^15 coalitions).
pub const EXACT_FEATURE_CAP: usize = 15;

#[derive(Debug, Error)]
pub enum ShapError {
    #[error(
        "exact enumeration supports at most {EXACT_FEATURE_CAP} features (got {0}); use the sampled estimator"
    )]
    TooManyFeatures(usize),
    #[error("background set is empty")]
    EmptyBackground,
    #[error("n_permutations must be >= 1")]
    NoPermutations,
    #[error("explanations disagree on shape: {0}")]
    InconsistentShape(String),
    #[error("feature index {index} out of range (p = {p})")]
    BadFeature { index: usize, p: usize },
    #[error("class index {index} out of range ({n_outputs} model outputs)")]
    BadClass { index: usize, n_outputs: usize },
}

/// How an explanation was computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ShapMethod {
    Exact,
    Sampled { n_permutations: usize, seed: u64 },
}

/// Shapley values for one observation: per model output (class) and
/// feature, plus the base value (average background prediction).
#[derive(Debug, Clone, PartialEq)]
pub struct ShapExplanation {
    /// `values[c][j]` is the attribution of feature `j` to output `c`.
    pub values: Vec<Vec<f64>>,
    /// Average prediction over the background, per output.
    pub base_values: Vec<f64>,
    /// Model prediction at the explained point, per output.
    pub prediction: Vec<f64>,
    /// Per-output, per-feature sampling standard error (sampled method only).
    pub std_errors: Option<Vec<Vec<f64>>>,
    pub method: ShapMethod,
    pub background_size: usize,
}

impl ShapExplanation {
    pub fn n_features(&self) -> usize {
        self.values.first().map_or(0, Vec::len)
    }

    pub fn n_outputs(&self) -> usize {
        self.values.len()
    }
}

/// Mean model output over the background with coalition features taken
/// from `x`.
fn value_of_coalition<F>(predict: &F, x: &[f64], background: &[Vec<f64>], mask: u64) -> Vec<f64>
where
    F: Fn(&[f64]) -> Vec<f64>,
{
    let p = x.len();
    let mut totals: Option<Vec<f64>> = None;
    let mut composite = vec![0.0; p];
    for row in background {
        for j in 0..p {
            composite[j] = if mask >> j & 1 == 1 { x[j] } else { row[j] };
        }
        let out = predict(&composite);
        match &mut totals {
            None => totals = Some(out),
            Some(t) => {
                for (a, b) in t.iter_mut().zip(out) {
                    *a += b;
                }
            }
        }
    }
    let mut totals = totals.expect("background checked nonempty");
    let scale = 1.0 / background.len() as f64;
    for t in &mut totals {
        *t *= scale;
    }
    totals
}

/// Exact Shapley values by coalition enumeration (`p <= 15`):
/// `phi_j = sum over S excluding j of |S|!(p-|S|-1)!/p! (v(S+j) - v(S))`.
pub fn shap_exact<F>(
    predict: F,
    x: &[f64],
    background: &[Vec<f64>],
) -> Result<ShapExplanation, ShapError>
where
    F: Fn(&[f64]) -> Vec<f64> + Sync,
{
    let p = x.len();
    if p > EXACT_FEATURE_CAP {
        return Err(ShapError::TooManyFeatures(p));
    }
    if background.is_empty() {
        return Err(ShapError::EmptyBackground);
    }
    let n_masks = 1usize << p;
    let values: Vec<Vec<f64>> = (0..n_masks as u64)
        .into_par_iter()
        .map(|mask| value_of_coalition(&predict, x, background, mask))
        .collect();
    let n_outputs = values[0].len();

    let mut factorial = vec![1.0f64; p + 1];
    for i in 1..=p {
        factorial[i] = factorial[i - 1] * i as f64;
    }
    let weight: Vec<f64> =
        (0..p).map(|s| factorial[s] * factorial[p - s - 1] / factorial[p]).collect();

    let mut phi = vec![vec![0.0; p]; n_outputs];
    for mask in 0..n_masks as u64 {
        let size = mask.count_ones() as usize;
        for j in 0..p {
            if mask >> j & 1 == 1 {
                continue;
            }
            let with_j = (mask | (1 << j)) as usize;
            let w = weight[size];
            for c in 0..n_outputs {
                phi[c][j] += w * (values[with_j][c] - values[mask as usize][c]);
            }
        }
    }

    Ok(ShapExplanation {
        values: phi,
        base_values: values[0].clone(),
        prediction: values[n_masks - 1].clone(),
        std_errors: None,
        method: ShapMethod::Exact,
        background_size: background.len(),
    })
}

/// Permutation-sampling Shapley estimator: each sampled feature ordering
/// contributes one marginal-contribution observation per feature. The
/// estimate is the mean over orderings (unbiased for the exact value); the
/// standard error is the sample standard deviation divided by sqrt(n).
/// Deterministic per seed regardless of thread count.
pub fn shap_sampled<F>(
    predict: F,
    x: &[f64],
    background: &[Vec<f64>],
    n_permutations: usize,
    shap_seed: u64,
) -> Result<ShapExplanation, ShapError>
where
    F: Fn(&[f64]) -> Vec<f64> + Sync,
{
    if background.is_empty() {
        return Err(ShapError::EmptyBackground);
    }
    if n_permutations == 0 {
        return Err(ShapError::NoPermutations);
    }
    let p = x.len();
    let base = value_of_coalition(&predict, x, background, 0);
    let full_mask = if p >= 64 { u64::MAX } else { (1u64 << p) - 1 };
    let prediction = value_of_coalition(&predict, x, background, full_mask);
    let n_outputs = base.len();

    let samples: Vec<Vec<Vec<f64>>> = (0..n_permutations as u64)
        .into_par_iter()
        .map(|perm_index| {
            let mut order: Vec<usize> = (0..p).collect();
            order.shuffle(&mut seed::rng_indexed(shap_seed, "shap.permutation", perm_index));
            let mut mask = 0u64;
            let mut previous = base.clone();
            let mut contributions = vec![vec![0.0; p]; n_outputs];
            for &j in &order {
                mask |= 1 << j;
                let current = value_of_coalition(&predict, x, background, mask);
                for c in 0..n_outputs {
                    contributions[c][j] = current[c] - previous[c];
                }
                previous = current;
            }
            contributions
        })
        .collect();

    let n = n_permutations as f64;
    let mut mean = vec![vec![0.0; p]; n_outputs];
    for sample in &samples {
        for c in 0..n_outputs {
            for j in 0..p {
                mean[c][j] += sample[c][j];
            }
        }
    }
    for row in &mut mean {
        for v in row.iter_mut() {
            *v /= n;
        }
    }
    let mut std_errors = vec![vec![0.0; p]; n_outputs];
    if n_permutations > 1 {
        for sample in &samples {
            for c in 0..n_outputs {
                for j in 0..p {
                    let d = sample[c][j] - mean[c][j];
                    std_errors[c][j] += d * d;
                }
            }
        }
        for row in &mut std_errors {
            for v in row.iter_mut() {
                *v = (*v / (n - 1.0) / n).sqrt();
            }
        }
    }

    Ok(ShapExplanation {
        values: mean,
        base_values: base,
        prediction,
        std_errors: Some(std_errors),
        method: ShapMethod::Sampled { n_permutations, seed: shap_seed },
        background_size: background.len(),
    })
}

/// Per-feature global importance: `I_j = sum_i |phi_j^i|`, kept per class
/// with the overall figure as the sum across classes.
#[derive(Debug, Clone, PartialEq)]
pub struct ImportanceRanking {
    /// Sorted descending by total importance; ties ordered by feature index.
    pub entries: Vec<ImportanceEntry>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ImportanceEntry {
    pub feature: usize,
    pub per_class: Vec<f64>,
    pub total: f64,
}

/// Aggregates per-observation explanations into a global ranking.
pub fn global_importance(explanations: &[ShapExplanation]) -> Result<ImportanceRanking, ShapError> {
    let first = explanations.first().ok_or(ShapError::InconsistentShape("no explanations".into()))?;
    let p = first.n_features();
    let n_outputs = first.n_outputs();
    for e in explanations {
        if e.n_features() != p || e.n_outputs() != n_outputs {
            return Err(ShapError::InconsistentShape(format!(
                "expected {p} features x {n_outputs} outputs, found {} x {}",
                e.n_features(),
                e.n_outputs()
            )));
        }
    }
    let mut entries: Vec<ImportanceEntry> = (0..p)
        .map(|j| {
            let per_class: Vec<f64> = (0..n_outputs)
                .map(|c| explanations.iter().map(|e| e.values[c][j].abs()).sum())
                .collect();
            let total = per_class.iter().sum();
            ImportanceEntry { feature: j, per_class, total }
        })
        .collect();
    entries.sort_by(|a, b| b.total.total_cmp(&a.total).then(a.feature.cmp(&b.feature)));
    Ok(ImportanceRanking { entries })
}

/// Importance ranking as CSV: feature name, per-class importances, total,
/// rank.
pub fn importance_csv(ranking: &ImportanceRanking, feature_names: &[String]) -> String {
    let n_outputs = ranking.entries.first().map_or(0, |e| e.per_class.len());
    let mut out = String::from("feature");
    for c in 0..n_outputs {
        let _ = write!(out, ",importance_class_{c}");
    }
    out.push_str(",importance_total,rank\n");
    for (rank, entry) in ranking.entries.iter().enumerate() {
        let _ = write!(out, "{}", feature_names[entry.feature]);
        for v in &entry.per_class {
            let _ = write!(out, ",{v}");
        }
        let _ = writeln!(out, ",{},{}", entry.total, rank + 1);
    }
    out
}

/// One dependence-table row: observation id, feature value, attribution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DependencePoint {
    pub observation: usize,
    pub feature_value: f64,
    pub phi: f64,
}

/// Per-observation attributions of one feature for one class, paired with
/// the feature's values and sorted ascending by value (stable in the
/// observation id). Values come straight from the stored explanations; no
/// recomputation.
pub fn dependence_table(
    explanations: &[ShapExplanation],
    feature: usize,
    class: usize,
    data: &Dataset,
) -> Result<Vec<DependencePoint>, ShapError> {
    let first = explanations.first().ok_or(ShapError::InconsistentShape("no explanations".into()))?;
    if feature >= first.n_features() {
        return Err(ShapError::BadFeature { index: feature, p: first.n_features() });
    }
    if class >= first.n_outputs() {
        return Err(ShapError::BadClass { index: class, n_outputs: first.n_outputs() });
    }
    if explanations.len() != data.n_rows() {
        return Err(ShapError::InconsistentShape(format!(
            "{} explanations for {} dataset rows",
            explanations.len(),
            data.n_rows()
        )));
    }
    let mut points: Vec<DependencePoint> = explanations
        .iter()
        .enumerate()
        .map(|(i, e)| DependencePoint {
            observation: i,
            feature_value: data.row(i)[feature],
            phi: e.values[class][feature],
        })
        .collect();
    points.sort_by(|a, b| a.feature_value.total_cmp(&b.feature_value));
    Ok(points)
}

/// Dependence table as plot-ready CSV.
pub fn dependence_csv(points: &[DependencePoint], class: usize) -> String {
    let mut out = String::from("observation,feature_value,phi,class\n");
    for p in points {
        let _ = writeln!(out, "{},{},{},{class}", p.observation, p.feature_value, p.phi);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn single_output<F: Fn(&[f64]) -> f64 + Sync>(f: F) -> impl Fn(&[f64]) -> Vec<f64> + Sync {
        move |x: &[f64]| vec![f(x)]
    }

    #[test]
    fn linear_model_oracle() {
        // f(x) = x1 + 2 x2, background (0,0), x = (1,1): phi = (1, 2), phi0 = 0
        let predict = single_output(|x: &[f64]| x[0] + 2.0 * x[1]);
        let explanation = shap_exact(predict, &[1.0, 1.0], &[vec![0.0, 0.0]]).unwrap();
        assert!((explanation.values[0][0] - 1.0).abs() < 1e-12);
        assert!((explanation.values[0][1] - 2.0).abs() < 1e-12);
        assert!(explanation.base_values[0].abs() < 1e-12);
    }

    #[test]
    fn linearity_spot_check_general_background() {
        // for a linear model and single-row background b: phi_j = beta_j (x_j - b_j)
        let beta = [0.7, -1.3, 0.2];
        let b = [0.5, -1.0, 2.0];
        let predict =
            single_output(move |x: &[f64]| x.iter().zip(beta).map(|(v, w)| v * w).sum::<f64>());
        let x = [1.0, 2.0, -0.5];
        let explanation = shap_exact(predict, &x, &[b.to_vec()]).unwrap();
        for j in 0..3 {
            let want = beta[j] * (x[j] - b[j]);
            assert!((explanation.values[0][j] - want).abs() < 1e-12);
        }
    }

    #[test]
    fn dummy_player_gets_zero() {
        let predict = single_output(|x: &[f64]| x[0] * 3.0 + 1.0); // ignores x[1]
        let background = vec![vec![0.3, 9.0], vec![-1.0, 2.0]];
        let explanation = shap_exact(predict, &[1.0, 5.0], &background).unwrap();
        assert_eq!(explanation.values[0][1], 0.0);
    }

    #[test]
    fn symmetric_features_get_equal_values() {
        let predict = single_output(|x: &[f64]| x[0] + x[1]);
        let explanation = shap_exact(predict, &[1.0, 1.0], &[vec![0.0, 0.0]]).unwrap();
        assert!((explanation.values[0][0] - explanation.values[0][1]).abs() < 1e-10);
    }

    #[test]
    fn additivity_holds_for_exact() {
        use rand::Rng;
        let mut rng = seed::rng(55);
        for _ in 0..20 {
            let p = rng.random_range(1..6);
            let coefs: Vec<f64> = (0..p).map(|_| rng.random_range(-1.0..1.0)).collect();
            let pairs: Vec<f64> = (0..p).map(|_| rng.random_range(-0.5..0.5)).collect();
            let predict = {
                let coefs = coefs.clone();
                let pairs = pairs.clone();
                move |x: &[f64]| {
                    let linear: f64 = x.iter().zip(&coefs).map(|(v, c)| v * c).sum();
                    let inter: f64 =
                        x.windows(2).zip(&pairs).map(|(w, c)| w[0] * w[1] * c).sum();
                    vec![linear + inter, (linear - inter).tanh()]
                }
            };
            let x: Vec<f64> = (0..p).map(|_| rng.random_range(-2.0..2.0)).collect();
            let background: Vec<Vec<f64>> =
                (0..7).map(|_| (0..p).map(|_| rng.random_range(-2.0..2.0)).collect()).collect();
            let explanation = shap_exact(&predict, &x, &background).unwrap();
            for c in 0..2 {
                let reconstructed: f64 =
                    explanation.base_values[c] + explanation.values[c].iter().sum::<f64>();
                assert!(
                    (reconstructed - explanation.prediction[c]).abs() < 1e-6,
                    "class {c}: {reconstructed} vs {}",
                    explanation.prediction[c]
                );
            }
        }
    }

    #[test]
    fn constant_model_has_zero_attributions() {
        let predict = |_: &[f64]| vec![0.25, 0.75];
        let background = vec![vec![1.0, 2.0, 3.0]];
        let explanation = shap_sampled(predict, &[0.0, 0.0, 0.0], &background, 50, 3).unwrap();
        for row in &explanation.values {
            for &v in row {
                assert_eq!(v, 0.0);
            }
        }
        assert_eq!(explanation.base_values, vec![0.25, 0.75]);
    }

    #[test]
    fn sampled_is_deterministic_per_seed() {
        let predict = single_output(|x: &[f64]| (x[0] * x[1] - x[2]).sin());
        let background: Vec<Vec<f64>> = vec![vec![0.0, 0.5, 1.0], vec![1.0, -0.5, 0.0]];
        let x = [0.3, 0.7, -0.2];
        let a = shap_sampled(&predict, &x, &background, 100, 9).unwrap();
        let b = shap_sampled(&predict, &x, &background, 100, 9).unwrap();
        assert_eq!(a, b);
        let c = shap_sampled(&predict, &x, &background, 100, 10).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn sampled_agrees_with_exact_within_four_standard_errors() {
        use rand::Rng;
        let mut rng = seed::rng(77);
        let mut checked = 0;
        let mut within = 0;
        for _ in 0..10 {
            let p = rng.random_range(2..6);
            let coefs: Vec<f64> = (0..p).map(|_| rng.random_range(-1.0..1.0)).collect();
            let predict = {
                let coefs = coefs.clone();
                move |x: &[f64]| {
                    let s: f64 = x.iter().zip(&coefs).map(|(v, c)| v * c).sum();
                    vec![s.tanh(), (s * s).tanh()]
                }
            };
            let x: Vec<f64> = (0..p).map(|_| rng.random_range(-1.5..1.5)).collect();
            let background: Vec<Vec<f64>> =
                (0..5).map(|_| (0..p).map(|_| rng.random_range(-1.5..1.5)).collect()).collect();
            let exact = shap_exact(&predict, &x, &background).unwrap();
            let sampled = shap_sampled(&predict, &x, &background, 400, 1234).unwrap();
            let se = sampled.std_errors.as_ref().unwrap();
            for c in 0..2 {
                for j in 0..p {
                    checked += 1;
                    let tolerance = 4.0 * se[c][j].max(1e-12);
                    if (sampled.values[c][j] - exact.values[c][j]).abs() <= tolerance {
                        within += 1;
                    }
                }
            }
        }
        assert!(
            within as f64 >= 0.95 * checked as f64,
            "only {within}/{checked} within 4 standard errors"
        );
    }

    #[test]
    fn exact_cap_is_enforced() {
        let predict = single_output(|_: &[f64]| 0.0);
        let x = vec![0.0; 16];
        let background = vec![vec![0.0; 16]];
        assert!(matches!(
            shap_exact(predict, &x, &background),
            Err(ShapError::TooManyFeatures(16))
        ));
    }

    #[test]
    fn importance_examples() {
        let mk = |phi: Vec<f64>| ShapExplanation {
            values: vec![phi],
            base_values: vec![0.0],
            prediction: vec![0.0],
            std_errors: None,
            method: ShapMethod::Exact,
            background_size: 1,
        };
        // one feature, three observations: |0.5| + |-0.5| + |1.0| = 2.0
        let explanations = vec![mk(vec![0.5]), mk(vec![-0.5]), mk(vec![1.0])];
        let ranking = global_importance(&explanations).unwrap();
        assert_eq!(ranking.entries[0].total, 2.0);

        // all zeros
        let zeros = vec![mk(vec![0.0, 0.0]); 3];
        let ranking = global_importance(&zeros).unwrap();
        assert!(ranking.entries.iter().all(|e| e.total == 0.0));

        // homogeneity: doubling every phi doubles I and keeps the order
        let base = vec![mk(vec![0.2, -0.9]), mk(vec![0.4, 0.1])];
        let doubled: Vec<ShapExplanation> = base
            .iter()
            .map(|e| {
                let mut d = e.clone();
                for row in &mut d.values {
                    for v in row.iter_mut() {
                        *v *= 2.0;
                    }
                }
                d
            })
            .collect();
        let r1 = global_importance(&base).unwrap();
        let r2 = global_importance(&doubled).unwrap();
        for (a, b) in r1.entries.iter().zip(&r2.entries) {
            assert_eq!(a.feature, b.feature);
            assert!((b.total - 2.0 * a.total).abs() < 1e-12);
        }
    }

    #[test]
    fn dependence_table_contract() {
        use crate::probit::tests::dataset_from;
        let data = dataset_from(vec![vec![3.0], vec![1.0], vec![2.0]], vec![0, 1, 2]);
        let mk = |phi: f64| ShapExplanation {
            values: vec![vec![phi]],
            base_values: vec![0.0],
            prediction: vec![phi],
            std_errors: None,
            method: ShapMethod::Exact,
            background_size: 1,
        };
        let explanations = vec![mk(0.3), mk(0.1), mk(0.2)];
        let table = dependence_table(&explanations, 0, 0, &data).unwrap();
        assert_eq!(table.len(), 3);
        let values: Vec<f64> = table.iter().map(|p| p.feature_value).collect();
        assert_eq!(values, vec![1.0, 2.0, 3.0]);
        // round-trips against the stored explanation
        for point in &table {
            assert_eq!(point.phi, explanations[point.observation].values[0][0]);
        }
        assert!(dependence_table(&explanations, 1, 0, &data).is_err());
        assert!(dependence_table(&explanations, 0, 9, &data).is_err());
    }
}
