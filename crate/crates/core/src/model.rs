//! A fitted model of any family behind one prediction interface.
//!
//! Evaluation, selection, and explanation couple to models through this
//! wrapper: hard class predictions, class probabilities, and the feature
//! names needed to align a dataset's columns with the model's design.

use thiserror::Error;

use crate::data::{DataError, Dataset, OrdinalLabel};
use crate::probit::{self, OrderedProbitFit, ProbitError};
use crate::tree::{
    forest_predict_proba, gbm_predict_proba, GradientBoostedModel, RandomForestModel, TextModel,
    TreeError,
};
use crate::NUM_CLASSES;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error(transparent)]
    Probit(#[from] ProbitError),
    #[error(transparent)]
    Tree(#[from] TreeError),
    #[error(transparent)]
    Data(#[from] DataError),
    #[error("model text does not start with a recognized header")]
    UnknownFormat,
}

/// A fitted ordered probit, random forest, or gradient-boosted model.
#[derive(Debug, Clone)]
pub enum AnyModel {
    Probit(OrderedProbitFit),
    Forest(RandomForestModel),
    Gbm(GradientBoostedModel),
}

impl AnyModel {
    pub fn kind(&self) -> &'static str {
        match self {
            AnyModel::Probit(_) => "probit",
            AnyModel::Forest(_) => "forest",
            AnyModel::Gbm(_) => "gbm",
        }
    }

    pub fn feature_names(&self) -> &[String] {
        match self {
            AnyModel::Probit(m) => &m.feature_names,
            AnyModel::Forest(m) => &m.feature_names,
            AnyModel::Gbm(m) => &m.feature_names,
        }
    }

    /// Class probabilities for a feature vector in the model's own column
    /// order. Forest probabilities are vote shares.
    pub fn predict_proba(&self, x: &[f64]) -> Result<[f64; NUM_CLASSES], ModelError> {
        match self {
            AnyModel::Probit(m) => Ok(probit::class_probabilities(&m.params, x)?),
            AnyModel::Forest(m) => Ok(forest_predict_proba(m, x)?),
            AnyModel::Gbm(m) => Ok(gbm_predict_proba(m, x)?),
        }
    }

    /// Hard class prediction (argmax of probabilities, ties toward the
    /// lowest class).
    pub fn predict(&self, x: &[f64]) -> Result<OrdinalLabel, ModelError> {
        Ok(probit::argmax_label(&self.predict_proba(x)?))
    }

    /// Maps the model's feature names onto a dataset's columns.
    pub fn design_indices(&self, data: &Dataset) -> Result<Vec<usize>, ModelError> {
        self.feature_names()
            .iter()
            .map(|name| data.column_index(name).map_err(ModelError::from))
            .collect()
    }

    /// Hard predictions for every dataset row.
    pub fn predict_dataset(&self, data: &Dataset) -> Result<Vec<OrdinalLabel>, ModelError> {
        let indices = self.design_indices(data)?;
        let mut x = vec![0.0; indices.len()];
        (0..data.n_rows())
            .map(|i| {
                gather(data.row(i), &indices, &mut x);
                self.predict(&x)
            })
            .collect()
    }

    /// Mean predicted probability per class over a dataset (expected
    /// aggregate shares). All three families supply probabilities.
    pub fn expected_shares(
        &self,
        data: &Dataset,
    ) -> Result<Option<[f64; NUM_CLASSES]>, ModelError> {
        let indices = self.design_indices(data)?;
        let mut acc = [crate::numeric::KahanSum::new(); NUM_CLASSES];
        let mut x = vec![0.0; indices.len()];
        for i in 0..data.n_rows() {
            gather(data.row(i), &indices, &mut x);
            let probs = self.predict_proba(&x)?;
            for (a, p) in acc.iter_mut().zip(probs) {
                a.add(p);
            }
        }
        let n = data.n_rows() as f64;
        Ok(Some(acc.map(|a| a.value() / n)))
    }

    /// Serializes to the family's text format.
    pub fn to_text(&self) -> String {
        match self {
            AnyModel::Probit(m) => probit::probit_dump(m),
            AnyModel::Forest(m) => crate::tree::model_to_text(&TextModel::Forest(m.clone())),
            AnyModel::Gbm(m) => crate::tree::model_to_text(&TextModel::Gbm(m.clone())),
        }
    }

    /// Loads any model family, dispatching on the first line.
    pub fn from_text(text: &str) -> Result<Self, ModelError> {
        let first = text.lines().next().unwrap_or("").trim();
        if first.starts_with("model = probit") || first == "model=probit" {
            return Ok(AnyModel::Probit(probit::parse_probit_dump(text)?));
        }
        if first == "model forest" || first == "model gbm" {
            return Ok(match crate::tree::load_model_text(text)? {
                TextModel::Forest(m) => AnyModel::Forest(m),
                TextModel::Gbm(m) => AnyModel::Gbm(m),
            });
        }
        Err(ModelError::UnknownFormat)
    }
}

fn gather(row: &[f64], indices: &[usize], out: &mut [f64]) {
    for (slot, &j) in out.iter_mut().zip(indices) {
        *slot = row[j];
    }
}
