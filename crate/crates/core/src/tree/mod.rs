//! From-scratch CART decision trees, a bagged random forest with majority
//! voting, and a second-order gradient-boosted classifier.
//!
//! Classification trees split on Gini impurity reduction; boosting trees on
//! the regularized second-order gain. Split thresholds are midpoints between
//! consecutive distinct sorted feature values, and gain ties resolve toward
//! the lower feature index and lower threshold, so tree structure is a pure
//! function of `(data, hyperparameters, seed)`.

pub(crate) mod forest;
mod gbm;
mod serialize;

pub use forest::{fit_random_forest, forest_predict, forest_predict_proba, ForestHyperparams, RandomForestModel};
pub use gbm::{
    fit_gbm, gbm_predict, gbm_predict_proba, gbm_predict_proba_with_rounds, softmax,
    softmax_grad_hess, GbmHyperparams, GradientBoostedModel,
};
pub use serialize::{load_model_text, model_to_text, TextModel};

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::data::Dataset;
use crate::NUM_CLASSES;

/// Errors raised by tree-ensemble operations.
#[derive(Debug, Error)]
pub enum TreeError {
    #[error("training data is empty")]
    EmptyData,
    #[error("invalid hyperparameters: {0}")]
    BadHyperparams(String),
    #[error("dimension mismatch: expected {expected} features, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("model text line {line}: {message}")]
    ParseModel { line: usize, message: String },
}

/// Tree node; `L` is the leaf payload (class distribution for
/// classification, a scalar score for boosting).
#[derive(Debug, Clone, PartialEq)]
pub enum Node<L> {
    Split { feature: usize, threshold: f64, gain: f64, left: usize, right: usize },
    Leaf(L),
}

/// Classification leaf: class distribution over the training rows it holds.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassLeaf {
    pub distribution: [f64; NUM_CLASSES],
    pub n_rows: usize,
}

/// A grown binary tree. Node 0 is the root; rows route left when
/// `x[feature] <= threshold`.
#[derive(Debug, Clone, PartialEq)]
pub struct Tree<L> {
    pub nodes: Vec<Node<L>>,
    pub max_depth: usize,
    pub min_samples_leaf: usize,
}

/// Gini-grown classification tree with class-distribution leaves.
pub type DecisionTree = Tree<ClassLeaf>;

/// Regularized score tree used by the boosted model.
pub type ScoreTree = Tree<f64>;

impl<L> Tree<L> {
    /// Routes a feature vector to its leaf payload.
    pub fn leaf_for(&self, x: &[f64]) -> &L {
        let mut id = 0;
        loop {
            match &self.nodes[id] {
                Node::Leaf(payload) => return payload,
                Node::Split { feature, threshold, left, right, .. } => {
                    id = if x[*feature] <= *threshold { *left } else { *right };
                }
            }
        }
    }

    /// Depth of the tree (0 for a bare leaf).
    pub fn depth(&self) -> usize {
        fn walk<L>(nodes: &[Node<L>], id: usize) -> usize {
            match &nodes[id] {
                Node::Leaf(_) => 0,
                Node::Split { left, right, .. } => 1 + walk(nodes, *left).max(walk(nodes, *right)),
            }
        }
        walk(&self.nodes, 0)
    }

    /// Adds each split's recorded gain to the per-feature totals.
    pub fn accumulate_importance(&self, totals: &mut [f64]) {
        for node in &self.nodes {
            if let Node::Split { feature, gain, .. } = node {
                totals[*feature] += gain.max(0.0);
            }
        }
    }

    pub fn n_leaves(&self) -> usize {
        self.nodes.iter().filter(|n| matches!(n, Node::Leaf(_))).count()
    }
}

impl DecisionTree {
    /// Majority class of the routed leaf, ties toward the lowest class.
    pub fn predict(&self, x: &[f64]) -> usize {
        let leaf = self.leaf_for(x);
        let mut best = 0;
        for c in 1..NUM_CLASSES {
            if leaf.distribution[c] > leaf.distribution[best] {
                best = c;
            }
        }
        best
    }
}

/// Depth / leaf-size controls shared by both tree kinds.
#[derive(Debug, Clone, Copy)]
pub struct GrowthControls {
    pub max_depth: usize,
    pub min_samples_leaf: usize,
}

/// Grows a Gini classification tree on `rows` (indices into `data`, repeats
/// allowed for bootstrap samples). At every split, `mtry` candidate features
/// are drawn without replacement from `feature_pool`; pass
/// `mtry >= feature_pool.len()` to consider them all.
pub fn fit_classification_tree(
    data: &Dataset,
    rows: &[usize],
    controls: GrowthControls,
    feature_pool: &[usize],
    mtry: usize,
    rng: &mut ChaCha8Rng,
) -> Result<DecisionTree, TreeError> {
    if rows.is_empty() {
        return Err(TreeError::EmptyData);
    }
    if feature_pool.is_empty() || controls.min_samples_leaf == 0 {
        return Err(TreeError::BadHyperparams(
            "feature pool empty or min_samples_leaf = 0".into(),
        ));
    }
    let mut grower = GiniGrower {
        data,
        controls,
        feature_pool,
        mtry: mtry.min(feature_pool.len()).max(1),
        rng,
        nodes: Vec::new(),
    };
    grower.build(rows.to_vec(), 0);
    Ok(Tree {
        nodes: grower.nodes,
        max_depth: controls.max_depth,
        min_samples_leaf: controls.min_samples_leaf,
    })
}

struct GiniGrower<'a> {
    data: &'a Dataset,
    controls: GrowthControls,
    feature_pool: &'a [usize],
    mtry: usize,
    rng: &'a mut ChaCha8Rng,
    nodes: Vec<Node<ClassLeaf>>,
}

impl GiniGrower<'_> {
    fn build(&mut self, rows: Vec<usize>, depth: usize) -> usize {
        let counts = class_counts(self.data, &rows);
        let pure = counts.iter().filter(|&&c| c > 0).count() <= 1;
        let min_leaf = self.controls.min_samples_leaf;
        if pure || depth >= self.controls.max_depth || rows.len() < 2 * min_leaf {
            return self.push_leaf(&counts, rows.len());
        }
        let candidates = sample_features(self.feature_pool, self.mtry, self.rng);
        let Some(split) = best_gini_split(self.data, &rows, &counts, &candidates, min_leaf) else {
            return self.push_leaf(&counts, rows.len());
        };
        let (left_rows, right_rows) = partition_rows(self.data, rows, split.feature, split.threshold);
        let id = self.nodes.len();
        self.nodes.push(Node::Split {
            feature: split.feature,
            threshold: split.threshold,
            gain: split.gain,
            left: 0,
            right: 0,
        });
        let left = self.build(left_rows, depth + 1);
        let right = self.build(right_rows, depth + 1);
        if let Node::Split { left: l, right: r, .. } = &mut self.nodes[id] {
            *l = left;
            *r = right;
        }
        id
    }

    fn push_leaf(&mut self, counts: &[usize; NUM_CLASSES], n: usize) -> usize {
        let total = n as f64;
        let distribution = counts.map(|c| c as f64 / total);
        self.nodes.push(Node::Leaf(ClassLeaf { distribution, n_rows: n }));
        self.nodes.len() - 1
    }
}

fn class_counts(data: &Dataset, rows: &[usize]) -> [usize; NUM_CLASSES] {
    let mut counts = [0usize; NUM_CLASSES];
    for &i in rows {
        counts[data.labels()[i].value()] += 1;
    }
    counts
}

#[derive(Debug, Clone, Copy)]
struct CandidateSplit {
    feature: usize,
    threshold: f64,
    gain: f64,
}

/// Best Gini split over the candidate features: maximizes the count-weighted
/// impurity reduction `sum_L^2/n_L + sum_R^2/n_R - sum_P^2/n_P` (an
/// equivalent form of `n_P I_P - n_L I_L - n_R I_R`). Candidates are scanned
/// in ascending (feature, threshold) order and accepted on strictly greater
/// gain, which realizes the tie-break rule. Impure nodes split even at zero
/// gain (an XOR-style node has no positive-gain split yet must not stall).
fn best_gini_split(
    data: &Dataset,
    rows: &[usize],
    parent_counts: &[usize; NUM_CLASSES],
    candidates: &[usize],
    min_leaf: usize,
) -> Option<CandidateSplit> {
    let n = rows.len();
    let parent_sq: f64 = parent_counts.iter().map(|&c| (c * c) as f64).sum();
    let parent_term = parent_sq / n as f64;
    let mut best: Option<CandidateSplit> = None;
    let mut scratch: Vec<(f64, usize)> = Vec::with_capacity(n);

    for &feature in candidates {
        scratch.clear();
        scratch.extend(rows.iter().map(|&i| (data.row(i)[feature], data.labels()[i].value())));
        scratch.sort_by(|a, b| a.0.total_cmp(&b.0));

        let mut left_counts = [0usize; NUM_CLASSES];
        let mut left_sq = 0.0f64;
        for i in 0..n - 1 {
            let (value, label) = scratch[i];
            // moving row i to the left updates sum of squared counts
            left_sq += (2 * left_counts[label] + 1) as f64;
            left_counts[label] += 1;
            let next_value = scratch[i + 1].0;
            if value == next_value {
                continue;
            }
            let n_left = i + 1;
            let n_right = n - n_left;
            if n_left < min_leaf || n_right < min_leaf {
                continue;
            }
            let right_sq = sq_minus(parent_counts, &left_counts);
            let gain = left_sq / n_left as f64 + right_sq / n_right as f64 - parent_term;
            let threshold = value + 0.5 * (next_value - value);
            if best.as_ref().is_none_or(|b| gain > b.gain) {
                best = Some(CandidateSplit { feature, threshold, gain });
            }
        }
    }
    best
}

fn sq_minus(parent: &[usize; NUM_CLASSES], left: &[usize; NUM_CLASSES]) -> f64 {
    parent.iter().zip(left).map(|(&p, &l)| ((p - l) * (p - l)) as f64).sum()
}

fn partition_rows(
    data: &Dataset,
    rows: Vec<usize>,
    feature: usize,
    threshold: f64,
) -> (Vec<usize>, Vec<usize>) {
    rows.into_iter().partition(|&i| data.row(i)[feature] <= threshold)
}

/// Draws `mtry` distinct features from the pool, returned in ascending
/// index order so the scan's tie-break is stable.
fn sample_features(pool: &[usize], mtry: usize, rng: &mut ChaCha8Rng) -> Vec<usize> {
    if mtry >= pool.len() {
        return pool.to_vec();
    }
    let mut scratch = pool.to_vec();
    for k in 0..mtry {
        let j = rng.random_range(k..scratch.len());
        scratch.swap(k, j);
    }
    scratch.truncate(mtry);
    scratch.sort_unstable();
    scratch
}

/// Second-order statistics for one boosting tree: per-row gradient and
/// hessian of the softmax cross-entropy for a single class.
#[derive(Debug, Clone, Copy)]
pub struct GradHess<'a> {
    pub grad: &'a [f64],
    pub hess: &'a [f64],
}

/// Regularization controls for boosting splits.
#[derive(Debug, Clone, Copy)]
pub struct BoostControls {
    pub lambda_l2: f64,
    pub gamma_split: f64,
    pub min_child_weight: f64,
    pub learning_rate: f64,
}

/// Grows one regularized score tree on the given gradient statistics.
/// Splits maximize `0.5 [G_L^2/(H_L+l) + G_R^2/(H_R+l) - G^2/(H+l)] - g`;
/// nonpositive gains prune to a leaf. Leaf value is `-G/(H+l)` scaled by
/// the learning rate.
pub fn fit_score_tree(
    data: &Dataset,
    rows: &[usize],
    stats: GradHess<'_>,
    controls: GrowthControls,
    boost: BoostControls,
    feature_pool: &[usize],
) -> Result<ScoreTree, TreeError> {
    if rows.is_empty() {
        return Err(TreeError::EmptyData);
    }
    if feature_pool.is_empty() || controls.min_samples_leaf == 0 {
        return Err(TreeError::BadHyperparams(
            "feature pool empty or min_samples_leaf = 0".into(),
        ));
    }
    let mut grower = BoostGrower { data, stats, controls, boost, feature_pool, nodes: Vec::new() };
    grower.build(rows.to_vec(), 0);
    Ok(Tree {
        nodes: grower.nodes,
        max_depth: controls.max_depth,
        min_samples_leaf: controls.min_samples_leaf,
    })
}

struct BoostGrower<'a> {
    data: &'a Dataset,
    stats: GradHess<'a>,
    controls: GrowthControls,
    boost: BoostControls,
    feature_pool: &'a [usize],
    nodes: Vec<Node<f64>>,
}

impl BoostGrower<'_> {
    fn build(&mut self, rows: Vec<usize>, depth: usize) -> usize {
        let (g_sum, h_sum) = self.sums(&rows);
        if depth >= self.controls.max_depth || rows.len() < 2 * self.controls.min_samples_leaf {
            return self.push_leaf(g_sum, h_sum);
        }
        let Some(split) = self.best_split(&rows, g_sum, h_sum) else {
            return self.push_leaf(g_sum, h_sum);
        };
        let (left_rows, right_rows) = partition_rows(self.data, rows, split.feature, split.threshold);
        let id = self.nodes.len();
        self.nodes.push(Node::Split {
            feature: split.feature,
            threshold: split.threshold,
            gain: split.gain,
            left: 0,
            right: 0,
        });
        let left = self.build(left_rows, depth + 1);
        let right = self.build(right_rows, depth + 1);
        if let Node::Split { left: l, right: r, .. } = &mut self.nodes[id] {
            *l = left;
            *r = right;
        }
        id
    }

    fn sums(&self, rows: &[usize]) -> (f64, f64) {
        let mut g = 0.0;
        let mut h = 0.0;
        for &i in rows {
            g += self.stats.grad[i];
            h += self.stats.hess[i];
        }
        (g, h)
    }

    fn push_leaf(&mut self, g: f64, h: f64) -> usize {
        let value = -g / (h + self.boost.lambda_l2) * self.boost.learning_rate;
        self.nodes.push(Node::Leaf(value));
        self.nodes.len() - 1
    }

    fn best_split(&self, rows: &[usize], g_sum: f64, h_sum: f64) -> Option<CandidateSplit> {
        let n = rows.len();
        let lambda = self.boost.lambda_l2;
        let min_leaf = self.controls.min_samples_leaf;
        let min_child = self.boost.min_child_weight;
        let parent_term = g_sum * g_sum / (h_sum + lambda);
        let mut best: Option<CandidateSplit> = None;
        let mut scratch: Vec<(f64, f64, f64)> = Vec::with_capacity(n);

        for &feature in self.feature_pool {
            scratch.clear();
            scratch.extend(
                rows.iter()
                    .map(|&i| (self.data.row(i)[feature], self.stats.grad[i], self.stats.hess[i])),
            );
            scratch.sort_by(|a, b| a.0.total_cmp(&b.0));
            let mut g_left = 0.0;
            let mut h_left = 0.0;
            for i in 0..n - 1 {
                let (value, g, h) = scratch[i];
                g_left += g;
                h_left += h;
                let next_value = scratch[i + 1].0;
                if value == next_value {
                    continue;
                }
                let n_left = i + 1;
                let n_right = n - n_left;
                if n_left < min_leaf || n_right < min_leaf {
                    continue;
                }
                let g_right = g_sum - g_left;
                let h_right = h_sum - h_left;
                if h_left < min_child || h_right < min_child {
                    continue;
                }
                let gain = 0.5
                    * (g_left * g_left / (h_left + lambda) + g_right * g_right / (h_right + lambda)
                        - parent_term)
                    - self.boost.gamma_split;
                if gain > 0.0 && best.as_ref().is_none_or(|b| gain > b.gain) {
                    best = Some(CandidateSplit {
                        feature,
                        threshold: value + 0.5 * (next_value - value),
                        gain,
                    });
                }
            }
        }
        best
    }
}
