//! Hyperparameter domains, sampled assignments, and the model
//! specification used throughout selection.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::SelectionError;
use crate::data::Dataset;
use crate::model::{AnyModel, ModelError};
use crate::probit::{self, FitOptions};
use crate::tree::{fit_gbm, fit_random_forest, ForestHyperparams, GbmHyperparams};

/// Model family under selection.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelFamily {
    OrderedProbit,
    Forest,
    Gbm,
}

impl ModelFamily {
    pub fn as_str(self) -> &'static str {
        match self {
            ModelFamily::OrderedProbit => "probit",
            ModelFamily::Forest => "forest",
            ModelFamily::Gbm => "gbm",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "probit" => Some(ModelFamily::OrderedProbit),
            "forest" => Some(ModelFamily::Forest),
            "gbm" => Some(ModelFamily::Gbm),
            _ => None,
        }
    }
}

/// One bounded hyperparameter range.
#[derive(Debug, Clone, PartialEq)]
pub enum ParamRange {
    /// Integers drawn uniformly from `lo..=hi`.
    Int(i64, i64),
    /// Reals drawn uniformly from `[lo, hi)`.
    Real(f64, f64),
    /// Uniform choice over a finite set.
    Categorical(Vec<String>),
}

impl ParamRange {
    fn validate(&self) -> Result<(), SelectionError> {
        let ok = match self {
            ParamRange::Int(lo, hi) => lo <= hi,
            ParamRange::Real(lo, hi) => lo.is_finite() && hi.is_finite() && lo <= hi,
            ParamRange::Categorical(options) => !options.is_empty(),
        };
        if ok {
            Ok(())
        } else {
            Err(SelectionError::BadDomain(format!("empty or inverted range: {self:?}")))
        }
    }

    fn sample(&self, rng: &mut ChaCha8Rng) -> ParamValue {
        match self {
            ParamRange::Int(lo, hi) => ParamValue::Int(rng.random_range(*lo..=*hi)),
            ParamRange::Real(lo, hi) => {
                if lo == hi {
                    ParamValue::Real(*lo)
                } else {
                    ParamValue::Real(rng.random_range(*lo..*hi))
                }
            }
            ParamRange::Categorical(options) => {
                ParamValue::Categorical(options[rng.random_range(0..options.len())].clone())
            }
        }
    }
}

/// A sampled hyperparameter value.
#[derive(Debug, Clone, PartialEq)]
pub enum ParamValue {
    Int(i64),
    Real(f64),
    Categorical(String),
}

impl std::fmt::Display for ParamValue {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ParamValue::Int(v) => write!(f, "{v}"),
            ParamValue::Real(v) => write!(f, "{v}"),
            ParamValue::Categorical(v) => write!(f, "{v}"),
        }
    }
}

/// Bounded domain per hyperparameter, in a fixed declaration order.
#[derive(Debug, Clone, PartialEq)]
pub struct HyperparamDomain {
    params: Vec<(String, ParamRange)>,
}

impl HyperparamDomain {
    pub fn new(params: Vec<(String, ParamRange)>) -> Result<Self, SelectionError> {
        if params.is_empty() {
            return Err(SelectionError::BadDomain("domain declares no parameters".into()));
        }
        for (name, range) in &params {
            if name.is_empty() {
                return Err(SelectionError::BadDomain("empty parameter name".into()));
            }
            range.validate()?;
        }
        Ok(Self { params })
    }

    pub fn names(&self) -> Vec<&str> {
        self.params.iter().map(|(n, _)| n.as_str()).collect()
    }

    /// Default forest tuning domain for `p` features.
    pub fn forest_default(p: usize) -> Self {
        Self::new(vec![
            ("n_trees".into(), ParamRange::Int(50, 500)),
            ("max_depth".into(), ParamRange::Int(3, 20)),
            ("min_samples_leaf".into(), ParamRange::Int(1, 20)),
            ("features_per_split".into(), ParamRange::Int(1, p.max(1) as i64)),
        ])
        .expect("static domain is valid")
    }

    /// Default boosted-tree tuning domain.
    pub fn gbm_default() -> Self {
        Self::new(vec![
            ("n_rounds".into(), ParamRange::Int(50, 500)),
            ("learning_rate".into(), ParamRange::Real(0.01, 0.3)),
            ("max_depth".into(), ParamRange::Int(2, 8)),
            ("lambda_l2".into(), ParamRange::Real(0.1, 10.0)),
            ("column_subsample".into(), ParamRange::Real(0.5, 1.0)),
        ])
        .expect("static domain is valid")
    }

    /// One independent uniform draw per parameter, in declaration order.
    pub fn sample(&self, rng: &mut ChaCha8Rng) -> Assignment {
        Assignment {
            values: self.params.iter().map(|(n, r)| (n.clone(), r.sample(rng))).collect(),
        }
    }
}

/// A concrete draw from a domain.
#[derive(Debug, Clone, PartialEq)]
pub struct Assignment {
    values: Vec<(String, ParamValue)>,
}

impl Assignment {
    /// Builds an assignment from explicit pairs (e.g. a parsed params file).
    pub fn from_pairs(values: Vec<(String, ParamValue)>) -> Self {
        Self { values }
    }

    pub fn get(&self, name: &str) -> Option<&ParamValue> {
        self.values.iter().find(|(n, _)| n == name).map(|(_, v)| v)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &ParamValue)> {
        self.values.iter().map(|(n, v)| (n.as_str(), v))
    }

    fn get_usize(&self, name: &str) -> Option<usize> {
        match self.get(name)? {
            ParamValue::Int(v) => Some((*v).max(0) as usize),
            _ => None,
        }
    }

    fn get_f64(&self, name: &str) -> Option<f64> {
        match self.get(name)? {
            ParamValue::Real(v) => Some(*v),
            ParamValue::Int(v) => Some(*v as f64),
            _ => None,
        }
    }
}

/// A fittable model configuration: family plus hyperparameters.
#[derive(Debug, Clone, PartialEq)]
pub enum ModelSpec {
    Probit { max_iter: usize, tolerance: f64 },
    Forest(ForestHyperparams),
    Gbm(GbmHyperparams),
}

impl ModelSpec {
    pub fn probit_default() -> Self {
        let opts = FitOptions::default();
        ModelSpec::Probit { max_iter: opts.max_iter, tolerance: opts.tolerance }
    }

    pub fn family(&self) -> ModelFamily {
        match self {
            ModelSpec::Probit { .. } => ModelFamily::OrderedProbit,
            ModelSpec::Forest(_) => ModelFamily::Forest,
            ModelSpec::Gbm(_) => ModelFamily::Gbm,
        }
    }

    /// Builds a spec from family defaults overridden by an assignment's
    /// values.
    pub fn from_assignment(family: ModelFamily, assignment: &Assignment) -> Self {
        match family {
            ModelFamily::OrderedProbit => {
                let defaults = FitOptions::default();
                ModelSpec::Probit {
                    max_iter: assignment.get_usize("max_iter").unwrap_or(defaults.max_iter),
                    tolerance: assignment.get_f64("tolerance").unwrap_or(defaults.tolerance),
                }
            }
            ModelFamily::Forest => {
                let d = ForestHyperparams::default();
                ModelSpec::Forest(ForestHyperparams {
                    n_trees: assignment.get_usize("n_trees").unwrap_or(d.n_trees),
                    max_depth: assignment.get_usize("max_depth").unwrap_or(d.max_depth),
                    min_samples_leaf: assignment
                        .get_usize("min_samples_leaf")
                        .unwrap_or(d.min_samples_leaf),
                    features_per_split: assignment
                        .get_usize("features_per_split")
                        .map_or(d.features_per_split, Some),
                    bootstrap_fraction: assignment
                        .get_f64("bootstrap_fraction")
                        .unwrap_or(d.bootstrap_fraction),
                    bootstrap: d.bootstrap,
                })
            }
            ModelFamily::Gbm => {
                let d = GbmHyperparams::default();
                ModelSpec::Gbm(GbmHyperparams {
                    n_rounds: assignment.get_usize("n_rounds").unwrap_or(d.n_rounds),
                    learning_rate: assignment.get_f64("learning_rate").unwrap_or(d.learning_rate),
                    max_depth: assignment.get_usize("max_depth").unwrap_or(d.max_depth),
                    lambda_l2: assignment.get_f64("lambda_l2").unwrap_or(d.lambda_l2),
                    gamma_split: assignment.get_f64("gamma_split").unwrap_or(d.gamma_split),
                    column_subsample: assignment
                        .get_f64("column_subsample")
                        .unwrap_or(d.column_subsample),
                    min_child_weight: assignment
                        .get_f64("min_child_weight")
                        .unwrap_or(d.min_child_weight),
                })
            }
        }
    }

    /// Fits on every column of `data`.
    pub fn fit(&self, data: &Dataset, fit_seed: u64) -> Result<AnyModel, ModelError> {
        match self {
            ModelSpec::Probit { max_iter, tolerance } => {
                let options =
                    FitOptions { max_iter: *max_iter, tolerance: *tolerance, seed: fit_seed };
                Ok(AnyModel::Probit(probit::fit(data, &data.schema().names(), &options)?))
            }
            ModelSpec::Forest(hp) => Ok(AnyModel::Forest(fit_random_forest(data, hp, fit_seed)?)),
            ModelSpec::Gbm(hp) => Ok(AnyModel::Gbm(fit_gbm(data, hp, fit_seed)?)),
        }
    }

    /// Per-feature importance over `data`'s columns: total split gain for
    /// tree models, |t-value| (or |coefficient| when the covariance is
    /// unavailable) for the probit model.
    pub fn importance(&self, data: &Dataset, fit_seed: u64) -> Result<Vec<f64>, ModelError> {
        let model = self.fit(data, fit_seed)?;
        let p = data.n_features();
        let mut totals = vec![0.0; p];
        match &model {
            AnyModel::Probit(fit) => {
                for k in 0..p {
                    totals[k] = match &fit.t_values {
                        Some(t) if t[k].is_finite() => t[k].abs(),
                        _ => fit.params.beta()[k].abs(),
                    };
                }
            }
            AnyModel::Forest(forest) => {
                for tree in &forest.trees {
                    tree.accumulate_importance(&mut totals);
                }
            }
            AnyModel::Gbm(gbm) => {
                for round in &gbm.rounds {
                    for tree in round {
                        tree.accumulate_importance(&mut totals);
                    }
                }
            }
        }
        Ok(totals)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seed;

    #[test]
    fn sampling_respects_bounds_and_is_deterministic() {
        let domain = HyperparamDomain::gbm_default();
        let mut rng = seed::rng(3);
        for _ in 0..200 {
            let a = domain.sample(&mut rng);
            match a.get("learning_rate").unwrap() {
                ParamValue::Real(v) => assert!((0.01..0.3).contains(v)),
                _ => panic!("wrong kind"),
            }
            match a.get("max_depth").unwrap() {
                ParamValue::Int(v) => assert!((2..=8).contains(v)),
                _ => panic!("wrong kind"),
            }
        }
        let a1 = domain.sample(&mut seed::rng(9));
        let a2 = domain.sample(&mut seed::rng(9));
        assert_eq!(a1, a2);
    }

    #[test]
    fn assignment_builds_specs() {
        let domain = HyperparamDomain::forest_default(6);
        let assignment = domain.sample(&mut seed::rng(4));
        let spec = ModelSpec::from_assignment(ModelFamily::Forest, &assignment);
        match spec {
            ModelSpec::Forest(hp) => {
                assert!((50..=500).contains(&hp.n_trees));
                assert!((1..=6).contains(&hp.features_per_split.unwrap()));
            }
            _ => panic!("wrong family"),
        }
    }

    #[test]
    fn invalid_domains_rejected() {
        assert!(HyperparamDomain::new(vec![]).is_err());
        assert!(HyperparamDomain::new(vec![("x".into(), ParamRange::Int(5, 2))]).is_err());
        assert!(
            HyperparamDomain::new(vec![("x".into(), ParamRange::Categorical(vec![]))]).is_err()
        );
    }
}
