//! Gradient-boosted trees with a softmax cross-entropy objective.
//!
//! One regularized score tree per class per round, second-order leaf values
//! `-G/(H+lambda)` scaled by the learning rate, column subsampling per tree,
//! and a log-frequency base score. Trees within a round are grown from the
//! same score snapshot, so they may build concurrently without changing the
//! result; rounds are strictly sequential.

use rayon::prelude::*;

use super::{fit_score_tree, BoostControls, GradHess, GrowthControls, ScoreTree, TreeError};
use crate::data::{Dataset, OrdinalLabel};
use crate::numeric::KahanSum;
use crate::probit::argmax_label;
use crate::{seed, NUM_CLASSES};

/// Boosting hyperparameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GbmHyperparams {
    pub n_rounds: usize,
    pub learning_rate: f64,
    pub max_depth: usize,
    pub lambda_l2: f64,
    pub gamma_split: f64,
    pub column_subsample: f64,
    pub min_child_weight: f64,
}

impl Default for GbmHyperparams {
    fn default() -> Self {
        Self {
            n_rounds: 200,
            learning_rate: 0.1,
            max_depth: 4,
            lambda_l2: 1.0,
            gamma_split: 0.0,
            column_subsample: 0.8,
            min_child_weight: 1.0,
        }
    }
}

impl GbmHyperparams {
    pub fn validate(&self) -> Result<(), TreeError> {
        if self.n_rounds == 0 {
            return Err(TreeError::BadHyperparams("n_rounds must be >= 1".into()));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate <= 1.0) {
            return Err(TreeError::BadHyperparams(format!(
                "learning_rate must lie in (0, 1], got {}",
                self.learning_rate
            )));
        }
        if self.max_depth == 0 {
            return Err(TreeError::BadHyperparams("max_depth must be >= 1".into()));
        }
        if self.lambda_l2 < 0.0 || self.gamma_split < 0.0 || self.min_child_weight < 0.0 {
            return Err(TreeError::BadHyperparams(
                "lambda_l2, gamma_split, min_child_weight must be nonnegative".into(),
            ));
        }
        if !(self.column_subsample > 0.0 && self.column_subsample <= 1.0) {
            return Err(TreeError::BadHyperparams(format!(
                "column_subsample must lie in (0, 1], got {}",
                self.column_subsample
            )));
        }
        Ok(())
    }
}

/// A fitted boosted model: `n_rounds` rounds of six class trees over a
/// log-frequency base score.
#[derive(Debug, Clone, PartialEq)]
pub struct GradientBoostedModel {
    /// `rounds[r][c]` is the class-`c` tree of round `r`.
    pub rounds: Vec<Vec<ScoreTree>>,
    pub base_score: [f64; NUM_CLASSES],
    pub hyperparams: GbmHyperparams,
    pub seed: u64,
    pub feature_names: Vec<String>,
    /// Training cross-entropy: entry 0 is the base-score loss, entry `r+1`
    /// the loss after round `r`.
    pub train_loss: Vec<f64>,
}

/// Numerically stable softmax.
pub fn softmax(scores: &[f64; NUM_CLASSES]) -> [f64; NUM_CLASSES] {
    let max = scores.iter().fold(f64::NEG_INFINITY, |m, &s| m.max(s));
    let mut out = scores.map(|s| (s - max).exp());
    let total: f64 = out.iter().sum();
    for v in &mut out {
        *v /= total;
    }
    out
}

/// Per-class gradient and hessian of the softmax cross-entropy at the given
/// scores: `g_c = p_c - 1{y=c}`, `h_c = p_c (1 - p_c)`.
pub fn softmax_grad_hess(
    scores: &[f64; NUM_CLASSES],
    label: usize,
) -> ([f64; NUM_CLASSES], [f64; NUM_CLASSES]) {
    let p = softmax(scores);
    let mut grad = [0.0; NUM_CLASSES];
    let mut hess = [0.0; NUM_CLASSES];
    for c in 0..NUM_CLASSES {
        grad[c] = p[c] - if c == label { 1.0 } else { 0.0 };
        hess[c] = p[c] * (1.0 - p[c]);
    }
    (grad, hess)
}

/// Base score: log of training class frequencies, floored at 1e-6.
fn base_score(data: &Dataset) -> [f64; NUM_CLASSES] {
    let counts = data.class_counts();
    let n = data.n_rows() as f64;
    counts.map(|c| (c as f64 / n).max(1e-6).ln())
}

/// Fits the boosted model.
pub fn fit_gbm(
    data: &Dataset,
    hyperparams: &GbmHyperparams,
    fit_seed: u64,
) -> Result<GradientBoostedModel, TreeError> {
    hyperparams.validate()?;
    if data.n_rows() == 0 {
        return Err(TreeError::EmptyData);
    }
    let n = data.n_rows();
    let p = data.n_features();
    let base = base_score(data);
    let mut scores: Vec<[f64; NUM_CLASSES]> = vec![base; n];
    let labels: Vec<usize> = data.labels().iter().map(|l| l.value()).collect();
    let rows: Vec<usize> = (0..n).collect();
    let controls = GrowthControls {
        max_depth: hyperparams.max_depth,
        min_samples_leaf: 1,
    };
    let boost = BoostControls {
        lambda_l2: hyperparams.lambda_l2,
        gamma_split: hyperparams.gamma_split,
        min_child_weight: hyperparams.min_child_weight,
        learning_rate: hyperparams.learning_rate,
    };
    let n_columns = ((hyperparams.column_subsample * p as f64).round() as usize).clamp(1, p);

    let mut train_loss = Vec::with_capacity(hyperparams.n_rounds + 1);
    train_loss.push(cross_entropy(&scores, &labels));

    let mut model_rounds = Vec::with_capacity(hyperparams.n_rounds);
    for round in 0..hyperparams.n_rounds {
        // gradient statistics from the shared score snapshot
        let mut grad = vec![[0.0; NUM_CLASSES]; n];
        let mut hess = vec![[0.0; NUM_CLASSES]; n];
        for i in 0..n {
            let (g, h) = softmax_grad_hess(&scores[i], labels[i]);
            grad[i] = g;
            hess[i] = h;
        }
        let class_trees: Result<Vec<ScoreTree>, TreeError> = (0..NUM_CLASSES)
            .into_par_iter()
            .map(|class| {
                let g: Vec<f64> = grad.iter().map(|row| row[class]).collect();
                let h: Vec<f64> = hess.iter().map(|row| row[class]).collect();
                let mut rng =
                    seed::rng_indexed(fit_seed, "gbm.columns", (round * NUM_CLASSES + class) as u64);
                let pool = super::sample_features(&(0..p).collect::<Vec<_>>(), n_columns, &mut rng);
                fit_score_tree(
                    data,
                    &rows,
                    GradHess { grad: &g, hess: &h },
                    controls,
                    boost,
                    &pool,
                )
            })
            .collect();
        let class_trees = class_trees?;
        for (i, score_row) in scores.iter_mut().enumerate() {
            let x = data.row(i);
            for (c, tree) in class_trees.iter().enumerate() {
                score_row[c] += tree.leaf_for(x);
            }
        }
        train_loss.push(cross_entropy(&scores, &labels));
        model_rounds.push(class_trees);
    }

    Ok(GradientBoostedModel {
        rounds: model_rounds,
        base_score: base,
        hyperparams: *hyperparams,
        seed: fit_seed,
        feature_names: data.schema().names(),
        train_loss,
    })
}

fn cross_entropy(scores: &[[f64; NUM_CLASSES]], labels: &[usize]) -> f64 {
    let mut acc = KahanSum::new();
    for (score, &label) in scores.iter().zip(labels) {
        let p = softmax(score);
        acc.add(-(p[label].max(1e-300)).ln());
    }
    acc.value() / labels.len() as f64
}

/// Class probabilities using only the first `k` rounds (`k = 0` evaluates
/// the base score alone).
pub fn gbm_predict_proba_with_rounds(
    model: &GradientBoostedModel,
    x: &[f64],
    k: usize,
) -> Result<[f64; NUM_CLASSES], TreeError> {
    check_x(model, x)?;
    let mut scores = model.base_score;
    for round in model.rounds.iter().take(k) {
        for (c, tree) in round.iter().enumerate() {
            scores[c] += tree.leaf_for(x);
        }
    }
    Ok(softmax(&scores))
}

/// Softmax class probabilities over all rounds; sums to 1 within 1e-10.
pub fn gbm_predict_proba(
    model: &GradientBoostedModel,
    x: &[f64],
) -> Result<[f64; NUM_CLASSES], TreeError> {
    gbm_predict_proba_with_rounds(model, x, model.rounds.len())
}

/// Argmax prediction with ties toward the lowest class.
pub fn gbm_predict(model: &GradientBoostedModel, x: &[f64]) -> Result<OrdinalLabel, TreeError> {
    Ok(argmax_label(&gbm_predict_proba(model, x)?))
}

fn check_x(model: &GradientBoostedModel, x: &[f64]) -> Result<(), TreeError> {
    let expected = model.feature_names.len();
    if x.len() != expected {
        return Err(TreeError::DimensionMismatch { expected, found: x.len() });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tree::forest::tests::blob_data;

    #[test]
    fn gradient_at_uniform_probabilities() {
        let scores = [0.0; NUM_CLASSES];
        let (g, h) = softmax_grad_hess(&scores, 0);
        assert!((g[0] - (-5.0 / 6.0)).abs() < 1e-15);
        for c in 1..NUM_CLASSES {
            assert!((g[c] - 1.0 / 6.0).abs() < 1e-15);
        }
        for c in 0..NUM_CLASSES {
            assert!((h[c] - 5.0 / 36.0).abs() < 1e-15);
        }
    }

    #[test]
    fn grad_hess_match_finite_differences() {
        use rand::Rng;
        let mut rng = seed::rng(99);
        for _ in 0..50 {
            let mut scores = [0.0; NUM_CLASSES];
            for s in &mut scores {
                *s = rng.random_range(-3.0..3.0);
            }
            let label = rng.random_range(0..NUM_CLASSES);
            let loss = |s: &[f64; NUM_CLASSES]| -softmax(s)[label].ln();
            let (g, h) = softmax_grad_hess(&scores, label);
            let eps = 1e-5;
            for c in 0..NUM_CLASSES {
                let mut plus = scores;
                plus[c] += eps;
                let mut minus = scores;
                minus[c] -= eps;
                let fd_g = (loss(&plus) - loss(&minus)) / (2.0 * eps);
                let fd_h = (loss(&plus) - 2.0 * loss(&scores) + loss(&minus)) / (eps * eps);
                assert!((g[c] - fd_g).abs() < 1e-6, "grad class {c}");
                assert!((h[c] - fd_h).abs() < 1e-4, "hess class {c}");
            }
        }
    }

    #[test]
    fn base_score_only_reproduces_class_frequencies() {
        use crate::probit::tests::dataset_from;
        use rand::Rng;
        // every class present, so the 1e-6 floor never engages
        let mut rng = seed::rng(10);
        let n = 240;
        let rows: Vec<Vec<f64>> = (0..n).map(|_| vec![rng.random_range(-1.0..1.0)]).collect();
        let labels: Vec<usize> = (0..n).map(|i| if i < 60 { 0 } else { i % 6 }).collect();
        let data = dataset_from(rows, labels);
        let model = fit_gbm(&data, &GbmHyperparams { n_rounds: 3, ..Default::default() }, 1).unwrap();
        let probs = gbm_predict_proba_with_rounds(&model, data.row(0), 0).unwrap();
        let counts = data.class_counts();
        for c in 0..NUM_CLASSES {
            let freq = counts[c] as f64 / data.n_rows() as f64;
            assert!((probs[c] - freq).abs() < 1e-12, "class {c}: {} vs {freq}", probs[c]);
        }
    }

    #[test]
    fn softmax_symmetry_and_shift_invariance() {
        let equal = softmax(&[2.5; NUM_CLASSES]);
        for p in equal {
            assert!((p - 1.0 / 6.0).abs() < 1e-15);
        }
        let scores = [0.3, -1.0, 2.0, 0.0, 1.1, -0.4];
        let shifted = scores.map(|s| s + 123.0);
        let a = softmax(&scores);
        let b = softmax(&shifted);
        for (x, y) in a.iter().zip(b) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn training_loss_nonincreasing_and_blobs_fit() {
        let data = blob_data(500, 20);
        let hp = GbmHyperparams { n_rounds: 100, max_depth: 3, ..Default::default() };
        let model = fit_gbm(&data, &hp, 5).unwrap();
        for pair in model.train_loss.windows(2) {
            assert!(pair[1] <= pair[0] + 1e-12, "loss increased: {} -> {}", pair[0], pair[1]);
        }
        let correct = (0..data.n_rows())
            .filter(|&i| gbm_predict(&model, data.row(i)).unwrap().value() == data.labels()[i].value())
            .count();
        let accuracy = correct as f64 / data.n_rows() as f64;
        assert!(accuracy >= 0.98, "training accuracy {accuracy}");
    }

    #[test]
    fn determinism_per_seed() {
        let data = blob_data(120, 30);
        let hp = GbmHyperparams { n_rounds: 10, ..Default::default() };
        let a = fit_gbm(&data, &hp, 3).unwrap();
        let b = fit_gbm(&data, &hp, 3).unwrap();
        assert_eq!(a, b);
        let c = fit_gbm(&data, &hp, 4).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn proba_sums_to_one() {
        let data = blob_data(100, 40);
        let hp = GbmHyperparams { n_rounds: 5, ..Default::default() };
        let model = fit_gbm(&data, &hp, 2).unwrap();
        for i in 0..10 {
            let p = gbm_predict_proba(&model, data.row(i)).unwrap();
            assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn bad_hyperparams_rejected() {
        let data = blob_data(50, 50);
        for hp in [
            GbmHyperparams { n_rounds: 0, ..Default::default() },
            GbmHyperparams { learning_rate: 0.0, ..Default::default() },
            GbmHyperparams { learning_rate: 1.5, ..Default::default() },
            GbmHyperparams { column_subsample: 0.0, ..Default::default() },
            GbmHyperparams { lambda_l2: -1.0, ..Default::default() },
        ] {
            assert!(fit_gbm(&data, &hp, 0).is_err());
        }
    }
}
