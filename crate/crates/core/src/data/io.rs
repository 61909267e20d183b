//! CSV dataset I/O and the schema sidecar format.
//!
//! Dataset files are UTF-8, comma-separated, first row a header naming every
//! schema column plus one label column `deliveries` holding integers 0-5.
//! Values are written in shortest round-trip form, so write-then-load
//! reproduces a dataset bit for bit.

use std::fmt::Write as _;
use std::path::Path;

use super::{ColumnDef, DataError, Dataset, FeatureSchema, OrdinalLabel};
use crate::NUM_CLASSES;

/// Name of the label column in dataset CSV files.
pub const LABEL_COLUMN: &str = "deliveries";

fn io_err(path: &Path, source: std::io::Error) -> DataError {
    DataError::Io { path: path.display().to_string(), source }
}

/// Loads a dataset CSV against a schema. The header must contain exactly the
/// schema columns plus `deliveries`, in any order; every violation is
/// reported with its row and column.
pub fn load_dataset(path: impl AsRef<Path>, schema: &FeatureSchema) -> Result<Dataset, DataError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    parse_dataset(&text, schema)
}

pub(crate) fn parse_dataset(text: &str, schema: &FeatureSchema) -> Result<Dataset, DataError> {
    let mut lines = text.lines();
    let header_line = lines.next().ok_or(DataError::Empty)?;
    let header: Vec<&str> = header_line.trim_end_matches('\r').split(',').collect();

    // map each schema column to its header position
    let mut positions = vec![None; schema.len()];
    let mut label_pos = None;
    for (idx, field) in header.iter().enumerate() {
        if *field == LABEL_COLUMN {
            if label_pos.is_some() {
                return Err(DataError::DuplicateColumn(LABEL_COLUMN.into()));
            }
            label_pos = Some(idx);
        } else if let Some(j) = schema.column_index(field) {
            if positions[j].is_some() {
                return Err(DataError::DuplicateColumn((*field).to_string()));
            }
            positions[j] = Some(idx);
        } else {
            return Err(DataError::UnexpectedColumn((*field).to_string()));
        }
    }
    let label_pos = label_pos.ok_or_else(|| DataError::MissingColumn(LABEL_COLUMN.into()))?;
    let positions: Vec<usize> = positions
        .into_iter()
        .enumerate()
        .map(|(j, p)| p.ok_or_else(|| DataError::MissingColumn(schema.columns()[j].name.clone())))
        .collect::<Result<_, _>>()?;

    let mut rows = Vec::new();
    let mut labels = Vec::new();
    for (i, line) in lines.enumerate() {
        let row_no = i + 1;
        let line = line.trim_end_matches('\r');
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != header.len() {
            return Err(DataError::WidthMismatch {
                row: row_no,
                expected: header.len(),
                found: fields.len(),
            });
        }
        let mut row = Vec::with_capacity(schema.len());
        for (j, &pos) in positions.iter().enumerate() {
            let field = fields[pos];
            let value: f64 = field.parse().map_err(|_| DataError::Parse {
                row: row_no,
                column: schema.columns()[j].name.clone(),
                value: field.to_string(),
            })?;
            row.push(value);
        }
        let label_field = fields[label_pos];
        let label: i64 = label_field.parse().map_err(|_| DataError::Parse {
            row: row_no,
            column: LABEL_COLUMN.into(),
            value: label_field.to_string(),
        })?;
        if !(0..NUM_CLASSES as i64).contains(&label) {
            return Err(DataError::LabelOutOfRange { row: row_no, value: label });
        }
        rows.push(row);
        labels.push(OrdinalLabel::new(label).expect("range checked"));
    }
    Dataset::new(schema.clone(), rows, labels)
}

/// Writes a dataset to CSV in the canonical column order (schema columns,
/// then `deliveries`).
pub fn write_dataset(dataset: &Dataset, path: impl AsRef<Path>) -> Result<(), DataError> {
    let path = path.as_ref();
    std::fs::write(path, dataset_to_csv(dataset)).map_err(|e| io_err(path, e))
}

pub(crate) fn dataset_to_csv(dataset: &Dataset) -> String {
    let mut out = String::new();
    let names = dataset.schema().names();
    out.push_str(&names.join(","));
    out.push(',');
    out.push_str(LABEL_COLUMN);
    out.push('\n');
    for i in 0..dataset.n_rows() {
        for v in dataset.row(i) {
            let _ = write!(out, "{v},");
        }
        let _ = writeln!(out, "{}", dataset.labels()[i].value());
    }
    out
}

/// Writes a schema sidecar: one `name kind category [log]` line per column,
/// `#` comments allowed.
pub fn write_schema_file(schema: &FeatureSchema, path: impl AsRef<Path>) -> Result<(), DataError> {
    let path = path.as_ref();
    let mut out = String::from("# column kind category [log]\n");
    for col in schema.columns() {
        let _ = write!(out, "{} {} {}", col.name, col.kind.as_str(), col.category.as_str());
        if schema.log_transformed().contains(&col.name) {
            out.push_str(" log");
        }
        out.push('\n');
    }
    std::fs::write(path, out).map_err(|e| io_err(path, e))
}

/// Reads a schema sidecar written by [`write_schema_file`].
pub fn read_schema_file(path: impl AsRef<Path>) -> Result<FeatureSchema, DataError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    let mut columns = Vec::new();
    let mut log_names = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let parts: Vec<&str> = line.split_whitespace().collect();
        let err = |message: String| DataError::SpecParse {
            path: path.display().to_string(),
            line: i + 1,
            message,
        };
        if parts.len() < 3 || parts.len() > 4 {
            return Err(err("expected `name kind category [log]`".into()));
        }
        let kind = super::ColumnKind::parse(parts[1])
            .ok_or_else(|| err(format!("unknown column kind `{}`", parts[1])))?;
        let category = super::ColumnCategory::parse(parts[2])
            .ok_or_else(|| err(format!("unknown column category `{}`", parts[2])))?;
        if parts.len() == 4 {
            if parts[3] != "log" {
                return Err(err(format!("unknown flag `{}`", parts[3])));
            }
            log_names.push(parts[0].to_string());
        }
        columns.push(ColumnDef::new(parts[0], kind, category));
    }
    let mut schema = FeatureSchema::new(columns)?;
    for name in log_names {
        schema.mark_log_transformed(&name);
    }
    Ok(schema)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{ColumnCategory, ColumnKind};

    fn hh_size_schema() -> FeatureSchema {
        FeatureSchema::new(vec![ColumnDef::new(
            "HH_size",
            ColumnKind::Count,
            ColumnCategory::Socioeconomic,
        )])
        .unwrap()
    }

    #[test]
    fn loads_minimal_file() {
        let data = parse_dataset("HH_size,deliveries\n2,1\n1,0\n", &hh_size_schema()).unwrap();
        assert_eq!(data.n_rows(), 2);
        assert_eq!(data.n_features(), 1);
        assert_eq!(data.row(0), &[2.0]);
        assert_eq!(data.labels()[1].value(), 0);
    }

    #[test]
    fn label_out_of_range_names_row() {
        let err = parse_dataset("HH_size,deliveries\n2,7\n", &hh_size_schema()).unwrap_err();
        match err {
            DataError::LabelOutOfRange { row, value } => {
                assert_eq!(row, 1);
                assert_eq!(value, 7);
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn parse_error_names_row_and_column() {
        let err = parse_dataset("HH_size,deliveries\n2,1\nabc,0\n", &hh_size_schema()).unwrap_err();
        match err {
            DataError::Parse { row, column, value } => {
                assert_eq!(row, 2);
                assert_eq!(column, "HH_size");
                assert_eq!(value, "abc");
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn missing_and_unexpected_columns() {
        assert!(matches!(
            parse_dataset("deliveries\n1\n", &hh_size_schema()),
            Err(DataError::MissingColumn(name)) if name == "HH_size"
        ));
        assert!(matches!(
            parse_dataset("HH_size,bogus,deliveries\n1,2,3\n", &hh_size_schema()),
            Err(DataError::UnexpectedColumn(name)) if name == "bogus"
        ));
    }

    #[test]
    fn header_order_is_free() {
        let data = parse_dataset("deliveries,HH_size\n1,2\n", &hh_size_schema()).unwrap();
        assert_eq!(data.row(0), &[2.0]);
        assert_eq!(data.labels()[0].value(), 1);
    }

    #[test]
    fn non_finite_rejected_at_load() {
        let err = parse_dataset("HH_size,deliveries\nNaN,0\n", &hh_size_schema()).unwrap_err();
        assert!(matches!(err, DataError::NonFinite { row: 1, .. }));
    }

    #[test]
    fn csv_round_trip_is_exact() {
        let schema = FeatureSchema::new(vec![
            ColumnDef::new("a", ColumnKind::Continuous, ColumnCategory::Trip),
            ColumnDef::new("b", ColumnKind::Continuous, ColumnCategory::LandUse),
        ])
        .unwrap();
        let data = Dataset::new(
            schema.clone(),
            vec![vec![0.1, -3.25e-7], vec![1.0 / 3.0, 12345.678901234567]],
            vec![OrdinalLabel::new(2).unwrap(), OrdinalLabel::new(5).unwrap()],
        )
        .unwrap();
        let text = dataset_to_csv(&data);
        let back = parse_dataset(&text, &schema).unwrap();
        assert_eq!(back, data);
    }

    #[test]
    fn schema_sidecar_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("schema.txt");
        let mut schema = FeatureSchema::new(vec![
            ColumnDef::new("age_log", ColumnKind::Continuous, ColumnCategory::Socioeconomic),
            ColumnDef::new("rented", ColumnKind::Binary, ColumnCategory::Socioeconomic),
            ColumnDef::new("male_share", ColumnKind::Percentage, ColumnCategory::Socioeconomic),
        ])
        .unwrap();
        schema.mark_log_transformed("age_log");
        write_schema_file(&schema, &path).unwrap();
        let back = read_schema_file(&path).unwrap();
        assert_eq!(back, schema);
    }
}
