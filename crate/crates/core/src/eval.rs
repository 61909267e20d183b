//! Confusion matrices, per-class precision/recall, overall accuracy, and
//! aggregate class-share comparison between predicted and observed
//! distributions.
//!
//! Undefined metrics stay visible: a class that is never predicted reports
//! `null` precision rather than a silent zero, so imbalance pathologies
//! (a model collapsing onto the majority class) show up in the report.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::data::{Dataset, OrdinalLabel};
use crate::model::{AnyModel, ModelError};
use crate::NUM_CLASSES;

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("prediction and truth vectors differ in length ({truth} vs {pred})")]
    LengthMismatch { truth: usize, pred: usize },
    #[error("empty input")]
    Empty,
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// 6x6 confusion counts, row = true class, column = predicted class.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub counts: [[u64; NUM_CLASSES]; NUM_CLASSES],
    pub n_total: u64,
}

/// Tallies a confusion matrix; order-independent in the pair sequence.
pub fn confusion_matrix(
    y_true: &[OrdinalLabel],
    y_pred: &[OrdinalLabel],
) -> Result<ConfusionMatrix, EvalError> {
    if y_true.is_empty() {
        return Err(EvalError::Empty);
    }
    if y_true.len() != y_pred.len() {
        return Err(EvalError::LengthMismatch { truth: y_true.len(), pred: y_pred.len() });
    }
    let mut counts = [[0u64; NUM_CLASSES]; NUM_CLASSES];
    for (t, p) in y_true.iter().zip(y_pred) {
        counts[t.value()][p.value()] += 1;
    }
    Ok(ConfusionMatrix { counts, n_total: y_true.len() as u64 })
}

impl ConfusionMatrix {
    pub fn row_sum(&self, class: usize) -> u64 {
        self.counts[class].iter().sum()
    }

    pub fn column_sum(&self, class: usize) -> u64 {
        (0..NUM_CLASSES).map(|r| self.counts[r][class]).sum()
    }

    pub fn trace(&self) -> u64 {
        (0..NUM_CLASSES).map(|c| self.counts[c][c]).sum()
    }

    /// `trace / n_total`.
    pub fn overall_accuracy(&self) -> f64 {
        self.trace() as f64 / self.n_total as f64
    }

    /// Row-normalized counts (recall heat map). Rows with no true
    /// observations are all zeros.
    pub fn recall_heatmap(&self) -> [[f64; NUM_CLASSES]; NUM_CLASSES] {
        let mut out = [[0.0; NUM_CLASSES]; NUM_CLASSES];
        for (r, row) in self.counts.iter().enumerate() {
            let total = self.row_sum(r);
            if total > 0 {
                for (c, &count) in row.iter().enumerate() {
                    out[r][c] = count as f64 / total as f64;
                }
            }
        }
        out
    }
}

/// Precision and recall for one class; `None` marks an undefined value
/// (empty denominator), never silently zeroed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassMetrics {
    pub class: usize,
    pub precision: Option<f64>,
    pub recall: Option<f64>,
}

/// Per-class precision (`diag / column sum`) and recall (`diag / row sum`).
pub fn precision_recall(matrix: &ConfusionMatrix) -> [ClassMetrics; NUM_CLASSES] {
    std::array::from_fn(|c| {
        let diag = matrix.counts[c][c] as f64;
        let col = matrix.column_sum(c);
        let row = matrix.row_sum(c);
        ClassMetrics {
            class: c,
            precision: (col > 0).then(|| diag / col as f64),
            recall: (row > 0).then(|| diag / row as f64),
        }
    })
}

/// Empirical class shares of a label vector.
pub fn aggregate_shares(labels: &[OrdinalLabel]) -> Result<[f64; NUM_CLASSES], EvalError> {
    if labels.is_empty() {
        return Err(EvalError::Empty);
    }
    let mut counts = [0.0; NUM_CLASSES];
    for l in labels {
        counts[l.value()] += 1.0;
    }
    let n = labels.len() as f64;
    Ok(counts.map(|c| c / n))
}

/// Total-variation distance between two share vectors: `0.5 * sum |a - b|`.
pub fn tv_distance(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    0.5 * a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum::<f64>()
}

/// Run identifiers carried by every report.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReportMetadata {
    pub model_id: String,
    pub dataset_id: String,
    pub seed: u64,
}

/// Full evaluation of one model on one test set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelEvaluation {
    pub model: String,
    pub accuracy: f64,
    pub per_class: Vec<ClassMetrics>,
    pub observed_shares: [f64; NUM_CLASSES],
    pub predicted_shares_argmax: [f64; NUM_CLASSES],
    pub predicted_shares_expected: Option<[f64; NUM_CLASSES]>,
    pub tv_argmax: f64,
    pub tv_expected: Option<f64>,
    /// Per-class `predicted - observed` share, in absolute points.
    pub share_delta_abs: [f64; NUM_CLASSES],
    /// Per-class relative delta `(predicted - observed) / observed`;
    /// `None` where the observed share is zero.
    pub share_delta_rel: [Option<f64>; NUM_CLASSES],
    pub confusion: ConfusionMatrix,
    pub recall_heatmap: [[f64; NUM_CLASSES]; NUM_CLASSES],
    pub metadata: ReportMetadata,
}

/// Evaluates each model on the held-out data. Every model's feature columns
/// are looked up by name in the test schema; a missing column is a schema
/// mismatch error.
pub fn build_report(
    models: &[(String, AnyModel)],
    test_data: &Dataset,
    dataset_id: &str,
    seed: u64,
) -> Result<Vec<ModelEvaluation>, EvalError> {
    let observed = aggregate_shares(test_data.labels())?;
    let mut reports = Vec::with_capacity(models.len());
    for (model_id, model) in models {
        let predictions = model.predict_dataset(test_data)?;
        let matrix = confusion_matrix(test_data.labels(), &predictions)?;
        let predicted_argmax = aggregate_shares(&predictions)?;
        let expected = model.expected_shares(test_data)?;
        let tv_argmax = tv_distance(&predicted_argmax, &observed);
        let share_delta_abs = std::array::from_fn(|c| predicted_argmax[c] - observed[c]);
        let share_delta_rel = std::array::from_fn(|c| {
            (observed[c] > 0.0).then(|| (predicted_argmax[c] - observed[c]) / observed[c])
        });
        reports.push(ModelEvaluation {
            model: model.kind().to_string(),
            accuracy: matrix.overall_accuracy(),
            per_class: precision_recall(&matrix).to_vec(),
            observed_shares: observed,
            predicted_shares_argmax: predicted_argmax,
            predicted_shares_expected: expected,
            tv_argmax,
            tv_expected: expected.map(|e| tv_distance(&e, &observed)),
            share_delta_abs,
            share_delta_rel,
            recall_heatmap: matrix.recall_heatmap(),
            confusion: matrix,
            metadata: ReportMetadata {
                model_id: model_id.clone(),
                dataset_id: dataset_id.to_string(),
                seed,
            },
        });
    }
    Ok(reports)
}

/// Report set as deterministic pretty JSON.
pub fn report_json(reports: &[ModelEvaluation]) -> String {
    serde_json::to_string_pretty(reports).expect("report serialization cannot fail")
}

/// Flat CSV table: one row per (model, class).
pub fn report_csv(reports: &[ModelEvaluation]) -> String {
    let mut out = String::from(
        "model,class,precision,recall,observed_share,predicted_share_argmax,predicted_share_expected,accuracy,tv_argmax,tv_expected\n",
    );
    let opt = |v: Option<f64>| v.map_or(String::from("undefined"), |x| x.to_string());
    for r in reports {
        for c in 0..NUM_CLASSES {
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{},{},{}\n",
                r.metadata.model_id,
                c,
                opt(r.per_class[c].precision),
                opt(r.per_class[c].recall),
                r.observed_shares[c],
                r.predicted_shares_argmax[c],
                opt(r.predicted_shares_expected.map(|e| e[c])),
                r.accuracy,
                r.tv_argmax,
                opt(r.tv_expected),
            ));
        }
    }
    out
}

/// Row-normalized recall heat map as CSV with class labels on both axes.
pub fn heatmap_csv(matrix: &ConfusionMatrix) -> String {
    let heat = matrix.recall_heatmap();
    let mut out = String::from("true\\pred,0,1,2,3,4,5\n");
    for (r, row) in heat.iter().enumerate() {
        let cells: Vec<String> = row.iter().map(f64::to_string).collect();
        out.push_str(&format!("{r},{}\n", cells.join(",")));
    }
    out
}
