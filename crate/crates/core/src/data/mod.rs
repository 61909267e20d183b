//! Dataset schema, loading, transforms, and train/test splitting.
//!
//! A [`Dataset`] is an immutable feature matrix plus ordinal labels in
//! `0..=5` (weekly home deliveries, 5 meaning "5 or more"). Columns carry a
//! declared kind (continuous, count, binary, percentage) and a category
//! (socioeconomic, trip, land use) mirroring household travel-survey
//! variable taxonomies.

mod io;
mod synthetic;

pub use io::{load_dataset, read_schema_file, write_dataset, write_schema_file, LABEL_COLUMN};
pub use synthetic::{
    generate_synthetic, FeatureDistribution, SyntheticColumn, SyntheticSpec, STRUCTURAL_ZERO_COLUMN,
};

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use thiserror::Error;

use crate::{seed, NUM_CLASSES};

/// Errors raised by dataset construction, loading, and transforms.
#[derive(Debug, Error)]
pub enum DataError {
    #[error("column name must be nonempty")]
    EmptyColumnName,
    #[error("duplicate column `{0}`")]
    DuplicateColumn(String),
    #[error("missing column `{0}`")]
    MissingColumn(String),
    #[error("unexpected column `{0}`")]
    UnexpectedColumn(String),
    #[error("unknown column `{0}`")]
    UnknownColumn(String),
    #[error("row {row}, column `{column}`: cannot parse `{value}` as a number")]
    Parse { row: usize, column: String, value: String },
    #[error("row {row}: label outside 0..5 (got {value})")]
    LabelOutOfRange { row: usize, value: i64 },
    #[error("row {row}, column `{column}`: non-finite value")]
    NonFinite { row: usize, column: String },
    #[error("row {row}, column `{column}`: binary column holds {value}, expected 0 or 1")]
    BinaryViolation { row: usize, column: String, value: f64 },
    #[error("row {row}, column `{column}`: percentage column holds {value}, outside [0, 1]")]
    PercentageViolation { row: usize, column: String, value: f64 },
    #[error("row {row}: expected {expected} feature values, found {found}")]
    WidthMismatch { row: usize, expected: usize, found: usize },
    #[error("dataset must contain at least {required} rows, found {found}")]
    TooFewRows { required: usize, found: usize },
    #[error("train fraction must lie strictly between 0 and 1, got {0}")]
    BadFraction(f64),
    #[error("row {row}, column `{column}`: log1p requires nonnegative input, got {value}")]
    NegativeLog1p { row: usize, column: String, value: f64 },
    #[error("dataset has no rows")]
    Empty,
    #[error("io error on `{path}`: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}: {message}")]
    SpecParse { path: String, line: usize, message: String },
    #[error("invalid synthetic spec: {0}")]
    SpecInvalid(String),
}

/// Measurement kind of a feature column.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ColumnKind {
    Continuous,
    Count,
    Binary,
    Percentage,
}

impl ColumnKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ColumnKind::Continuous => "continuous",
            ColumnKind::Count => "count",
            ColumnKind::Binary => "binary",
            ColumnKind::Percentage => "percentage",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "continuous" => Some(ColumnKind::Continuous),
            "count" => Some(ColumnKind::Count),
            "binary" => Some(ColumnKind::Binary),
            "percentage" => Some(ColumnKind::Percentage),
            _ => None,
        }
    }
}

/// Substantive grouping of a feature column.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ColumnCategory {
    Socioeconomic,
    Trip,
    LandUse,
}

impl ColumnCategory {
    pub fn as_str(self) -> &'static str {
        match self {
            ColumnCategory::Socioeconomic => "socioeconomic",
            ColumnCategory::Trip => "trip",
            ColumnCategory::LandUse => "land_use",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "socioeconomic" => Some(ColumnCategory::Socioeconomic),
            "trip" => Some(ColumnCategory::Trip),
            "land_use" => Some(ColumnCategory::LandUse),
            _ => None,
        }
    }
}

/// One feature column declaration.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ColumnDef {
    pub name: String,
    pub kind: ColumnKind,
    pub category: ColumnCategory,
}

impl ColumnDef {
    pub fn new(name: impl Into<String>, kind: ColumnKind, category: ColumnCategory) -> Self {
        Self { name: name.into(), kind, category }
    }
}

/// Ordered list of feature columns plus the set of log-transformed names.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FeatureSchema {
    columns: Vec<ColumnDef>,
    log_transformed: BTreeSet<String>,
}

impl FeatureSchema {
    pub fn new(columns: Vec<ColumnDef>) -> Result<Self, DataError> {
        let mut seen = BTreeSet::new();
        for col in &columns {
            if col.name.is_empty() {
                return Err(DataError::EmptyColumnName);
            }
            if !seen.insert(col.name.clone()) {
                return Err(DataError::DuplicateColumn(col.name.clone()));
            }
        }
        Ok(Self { columns, log_transformed: BTreeSet::new() })
    }

    /// All columns continuous; used when only names are known (e.g. a CSV
    /// header without a schema sidecar).
    pub fn all_continuous(names: &[String]) -> Result<Self, DataError> {
        Self::new(
            names
                .iter()
                .map(|n| ColumnDef::new(n.clone(), ColumnKind::Continuous, ColumnCategory::Socioeconomic))
                .collect(),
        )
    }

    pub fn columns(&self) -> &[ColumnDef] {
        &self.columns
    }

    pub fn len(&self) -> usize {
        self.columns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.columns.is_empty()
    }

    pub fn names(&self) -> Vec<String> {
        self.columns.iter().map(|c| c.name.clone()).collect()
    }

    pub fn log_transformed(&self) -> &BTreeSet<String> {
        &self.log_transformed
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c.name == name)
    }

    /// Records that a column holds log-transformed values.
    pub fn mark_log_transformed(&mut self, name: &str) {
        self.log_transformed.insert(name.to_string());
    }
}

/// Ordinal outcome in `0..=5`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct OrdinalLabel(u8);

impl OrdinalLabel {
    pub fn new(value: i64) -> Result<Self, DataError> {
        if (0..NUM_CLASSES as i64).contains(&value) {
            Ok(Self(value as u8))
        } else {
            Err(DataError::LabelOutOfRange { row: 0, value })
        }
    }

    pub fn value(self) -> usize {
        usize::from(self.0)
    }
}

/// Immutable feature matrix with ordinal labels.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    schema: FeatureSchema,
    values: Vec<f64>, // row-major, n_rows x schema.len()
    labels: Vec<OrdinalLabel>,
}

impl Dataset {
    /// Builds a dataset, validating every schema invariant (finite values,
    /// binary columns in {0,1}, percentage columns in [0,1], row width).
    pub fn new(
        schema: FeatureSchema,
        rows: Vec<Vec<f64>>,
        labels: Vec<OrdinalLabel>,
    ) -> Result<Self, DataError> {
        if rows.is_empty() {
            return Err(DataError::Empty);
        }
        if rows.len() != labels.len() {
            return Err(DataError::WidthMismatch {
                row: 0,
                expected: rows.len(),
                found: labels.len(),
            });
        }
        let p = schema.len();
        let mut values = Vec::with_capacity(rows.len() * p);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != p {
                return Err(DataError::WidthMismatch { row: i + 1, expected: p, found: row.len() });
            }
            for (col, &v) in schema.columns().iter().zip(row) {
                validate_cell(i + 1, col, v)?;
                values.push(v);
            }
        }
        Ok(Self { schema, values, labels })
    }

    pub(crate) fn from_parts_unchecked(
        schema: FeatureSchema,
        values: Vec<f64>,
        labels: Vec<OrdinalLabel>,
    ) -> Self {
        debug_assert_eq!(values.len(), labels.len() * schema.len());
        Self { schema, values, labels }
    }

    pub fn schema(&self) -> &FeatureSchema {
        &self.schema
    }

    pub fn n_rows(&self) -> usize {
        self.labels.len()
    }

    pub fn n_features(&self) -> usize {
        self.schema.len()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let p = self.schema.len();
        &self.values[i * p..(i + 1) * p]
    }

    pub fn labels(&self) -> &[OrdinalLabel] {
        &self.labels
    }

    /// Per-class label counts.
    pub fn class_counts(&self) -> [usize; NUM_CLASSES] {
        let mut counts = [0usize; NUM_CLASSES];
        for l in &self.labels {
            counts[l.value()] += 1;
        }
        counts
    }

    pub fn column_index(&self, name: &str) -> Result<usize, DataError> {
        self.schema.column_index(name).ok_or_else(|| DataError::UnknownColumn(name.to_string()))
    }

    /// Row subset, preserving the given index order.
    pub fn subset(&self, indices: &[usize]) -> Dataset {
        let p = self.schema.len();
        let mut values = Vec::with_capacity(indices.len() * p);
        let mut labels = Vec::with_capacity(indices.len());
        for &i in indices {
            values.extend_from_slice(self.row(i));
            labels.push(self.labels[i]);
        }
        Dataset::from_parts_unchecked(self.schema.clone(), values, labels)
    }

    /// Column subset by name, preserving the given name order.
    pub fn select_columns(&self, names: &[String]) -> Result<Dataset, DataError> {
        let indices: Vec<usize> =
            names.iter().map(|n| self.column_index(n)).collect::<Result<_, _>>()?;
        let columns = indices.iter().map(|&j| self.schema.columns()[j].clone()).collect();
        let mut schema = FeatureSchema::new(columns)?;
        schema.log_transformed = self
            .schema
            .log_transformed
            .iter()
            .filter(|n| names.contains(n))
            .cloned()
            .collect();
        let mut values = Vec::with_capacity(self.n_rows() * indices.len());
        for i in 0..self.n_rows() {
            let row = self.row(i);
            values.extend(indices.iter().map(|&j| row[j]));
        }
        Ok(Dataset::from_parts_unchecked(schema, values, self.labels.clone()))
    }
}

fn validate_cell(row: usize, col: &ColumnDef, v: f64) -> Result<(), DataError> {
    if !v.is_finite() {
        return Err(DataError::NonFinite { row, column: col.name.clone() });
    }
    match col.kind {
        ColumnKind::Binary if v != 0.0 && v != 1.0 => {
            Err(DataError::BinaryViolation { row, column: col.name.clone(), value: v })
        }
        ColumnKind::Percentage if !(0.0..=1.0).contains(&v) => {
            Err(DataError::PercentageViolation { row, column: col.name.clone(), value: v })
        }
        _ => Ok(()),
    }
}

/// Column transform for [`transform_features`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Transform {
    Log1p,
    Identity,
}

/// Applies per-column transforms, returning a new dataset. `log1p` requires
/// nonnegative inputs, marks the column as log-transformed, and relaxes its
/// kind to continuous.
pub fn transform_features(
    dataset: &Dataset,
    spec: &[(String, Transform)],
) -> Result<Dataset, DataError> {
    let mut schema = dataset.schema.clone();
    let mut values = dataset.values.clone();
    let p = schema.len();
    for (name, transform) in spec {
        let j = dataset.column_index(name)?;
        match transform {
            Transform::Identity => {}
            Transform::Log1p => {
                for i in 0..dataset.n_rows() {
                    let v = values[i * p + j];
                    if v < 0.0 {
                        return Err(DataError::NegativeLog1p {
                            row: i + 1,
                            column: name.clone(),
                            value: v,
                        });
                    }
                    values[i * p + j] = v.ln_1p();
                }
                schema.columns[j].kind = ColumnKind::Continuous;
                schema.log_transformed.insert(name.clone());
            }
        }
    }
    Ok(Dataset::from_parts_unchecked(schema, values, dataset.labels.clone()))
}

/// Splits rows into disjoint train/test sets. The permutation is uniform and
/// deterministic per seed; the train size is `n * fraction` rounded half-up.
pub fn split_train_test(
    dataset: &Dataset,
    train_fraction: f64,
    split_seed: u64,
) -> Result<(Dataset, Dataset), DataError> {
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(DataError::BadFraction(train_fraction));
    }
    let n = dataset.n_rows();
    if n < 2 {
        return Err(DataError::TooFewRows { required: 2, found: n });
    }
    let train_size = (n as f64 * train_fraction + 0.5).floor() as usize;
    let mut indices: Vec<usize> = (0..n).collect();
    indices.shuffle(&mut seed::rng_for(split_seed, "split"));
    let (mut train_idx, mut test_idx) = (indices[..train_size].to_vec(), indices[train_size..].to_vec());
    train_idx.sort_unstable();
    test_idx.sort_unstable();
    Ok((dataset.subset(&train_idx), dataset.subset(&test_idx)))
}
