//! Ordinal delivery-frequency modeling toolkit.
//!
//! Implements and compares an ordered probit model against random-forest and
//! gradient-boosted-tree classifiers on 6-class ordinal outcomes (0 to 5+
//! weekly home deliveries): maximum-likelihood estimation with fit statistics,
//! from-scratch tree ensembles, recursive feature elimination, randomized
//! hyperparameter search, Shapley-value explanations, and a confusion-matrix /
//! aggregate-distribution evaluation harness. Synthetic data comes from a
//! known ordinal data-generating process so every estimator can be validated
//! against ground truth.
//!
//! All randomness flows from explicit seeds through [`seed`], so results are
//! reproducible bit-for-bit regardless of thread count.

pub mod data;
pub mod eval;
pub mod model;
pub mod numeric;
pub mod probit;
pub mod seed;
pub mod selection;
pub mod shap;
pub mod tree;

/// Number of ordinal outcome classes (0..=5 weekly deliveries, 5 meaning "5 or more").
pub const NUM_CLASSES: usize = 6;

/// Number of threshold parameters separating the ordinal classes.
pub const NUM_THRESHOLDS: usize = 5;
