//! CSV dataset ingestion: rectangular numeric CSV with a header row,
//! comma-separated, dot decimals.
//!
//! Labels are remapped to dense `0..C-1` by first appearance; the mapping
//! (original token per new index) is returned alongside the data.

use std::path::Path;

use eprune_core::data::Dataset;
use eprune_core::matrix::Matrix;

use crate::error::CliError;

#[derive(Debug, thiserror::Error)]
pub enum CsvError {
    #[error("cannot open {path}: {source}")]
    Open {
        path: String,
        source: std::io::Error,
    },
    #[error("row {row} has {got} columns, expected {expected}")]
    RaggedRow { row: usize, expected: usize, got: usize },
    #[error("row {row}, column {column:?}: not a number: {value:?}")]
    NonNumeric {
        row: usize,
        column: String,
        value: String,
    },
    #[error("label column {0:?} not found in header")]
    UnknownLabelColumn(String),
    #[error("label {0:?} does not appear in the training data")]
    UnseenLabel(String),
    #[error("file has a header but no data rows")]
    Empty,
    #[error("csv parse error: {0}")]
    Parse(#[from] csv::Error),
    #[error("invalid dataset: {0}")]
    Dataset(String),
}

impl From<CsvError> for CliError {
    fn from(e: CsvError) -> Self {
        match &e {
            CsvError::Open { source, .. } if source.kind() == std::io::ErrorKind::NotFound => {
                CliError::MissingFile(e.to_string())
            }
            _ => CliError::Other(e.to_string()),
        }
    }
}

/// Raw parse: feature rows plus the label column's original tokens.
pub struct ParsedCsv {
    pub feature_names: Vec<String>,
    pub rows: Vec<Vec<f64>>,
    pub raw_labels: Vec<String>,
}

pub fn parse_csv(path: &Path, label_column: &str) -> Result<ParsedCsv, CsvError> {
    let file = std::fs::File::open(path).map_err(|source| CsvError::Open {
        path: path.display().to_string(),
        source,
    })?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_reader(file);
    let header: Vec<String> = reader
        .headers()?
        .iter()
        .map(|h| h.trim().to_string())
        .collect();
    let label_idx = header
        .iter()
        .position(|h| h == label_column)
        .ok_or_else(|| CsvError::UnknownLabelColumn(label_column.to_string()))?;
    let feature_names: Vec<String> = header
        .iter()
        .enumerate()
        .filter(|(i, _)| *i != label_idx)
        .map(|(_, h)| h.clone())
        .collect();

    let mut rows = Vec::new();
    let mut raw_labels = Vec::new();
    for (r, record) in reader.records().enumerate() {
        let record = record?;
        if record.len() != header.len() {
            return Err(CsvError::RaggedRow {
                row: r + 2, // 1-based, after the header line
                expected: header.len(),
                got: record.len(),
            });
        }
        let mut features = Vec::with_capacity(header.len() - 1);
        for (c, cell) in record.iter().enumerate() {
            let cell = cell.trim();
            if c == label_idx {
                raw_labels.push(cell.to_string());
                continue;
            }
            let value: f64 = cell.parse().map_err(|_| CsvError::NonNumeric {
                row: r + 2,
                column: header[c].clone(),
                value: cell.to_string(),
            })?;
            features.push(value);
        }
        rows.push(features);
    }
    if rows.is_empty() {
        return Err(CsvError::Empty);
    }
    Ok(ParsedCsv {
        feature_names,
        rows,
        raw_labels,
    })
}

/// Remaps raw label tokens through `mapping` (first-appearance order),
/// extending it when `extend` is set.
fn remap_labels(
    raw: &[String],
    mapping: &mut Vec<String>,
    extend: bool,
) -> Result<Vec<usize>, CsvError> {
    let mut labels = Vec::with_capacity(raw.len());
    for token in raw {
        let idx = match mapping.iter().position(|m| m == token) {
            Some(idx) => idx,
            None if extend => {
                mapping.push(token.clone());
                mapping.len() - 1
            }
            None => return Err(CsvError::UnseenLabel(token.clone())),
        };
        labels.push(idx);
    }
    Ok(labels)
}

fn build_dataset(rows: Vec<Vec<f64>>, labels: Vec<usize>, classes: usize) -> Result<Dataset, CsvError> {
    let dim = rows[0].len();
    let mut data = Vec::with_capacity(rows.len() * dim);
    for row in &rows {
        data.extend_from_slice(row);
    }
    Dataset::new(Matrix::from_vec(rows.len(), dim, data), labels, classes)
        .map_err(|e| CsvError::Dataset(e.to_string()))
}

/// A dataset plus the emitted label mapping (original token per class
/// index).
pub struct LoadedCsv {
    pub dataset: Dataset,
    pub label_map: Vec<String>,
}

/// Loads one CSV file as a dataset; labels remapped by first appearance.
pub fn load_csv(path: &Path, label_column: &str) -> Result<LoadedCsv, CsvError> {
    let parsed = parse_csv(path, label_column)?;
    let mut mapping = Vec::new();
    let labels = remap_labels(&parsed.raw_labels, &mut mapping, true)?;
    let classes = mapping.len().max(2);
    let dataset = build_dataset(parsed.rows, labels, classes)?;
    Ok(LoadedCsv {
        dataset,
        label_map: mapping,
    })
}

/// Loads a train/test pair with one shared label mapping (the training
/// file defines it; unseen test labels are an error).
pub fn load_csv_pair(
    train_path: &Path,
    test_path: &Path,
    label_column: &str,
) -> Result<(LoadedCsv, Dataset), CsvError> {
    let train = parse_csv(train_path, label_column)?;
    let test = parse_csv(test_path, label_column)?;
    let mut mapping = Vec::new();
    let train_labels = remap_labels(&train.raw_labels, &mut mapping, true)?;
    let test_labels = remap_labels(&test.raw_labels, &mut mapping, false)?;
    let classes = mapping.len().max(2);
    let train_ds = build_dataset(train.rows, train_labels, classes)?;
    let test_ds = build_dataset(test.rows, test_labels, classes)?;
    Ok((
        LoadedCsv {
            dataset: train_ds,
            label_map: mapping,
        },
        test_ds,
    ))
}

/// Writes a dataset back out in the same schema (`f0..fN` + label column
/// holding the mapped token).
pub fn save_csv(
    path: &Path,
    dataset: &Dataset,
    label_map: &[String],
    label_column: &str,
) -> Result<(), CsvError> {
    let mut writer = csv::Writer::from_path(path).map_err(CsvError::Parse)?;
    let mut header: Vec<String> = (0..dataset.dim()).map(|i| format!("f{i}")).collect();
    header.push(label_column.to_string());
    writer.write_record(&header)?;
    for (i, &label) in dataset.labels().iter().enumerate() {
        let mut record: Vec<String> = dataset
            .features()
            .row(i)
            .iter()
            .map(|v| format!("{v}"))
            .collect();
        record.push(label_map[label].clone());
        writer.write_record(&record)?;
    }
    writer.flush().map_err(|e| CsvError::Open {
        path: path.display().to_string(),
        source: e,
    })?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn write_file(dir: &tempfile::TempDir, name: &str, content: &str) -> std::path::PathBuf {
        let path = dir.path().join(name);
        let mut f = std::fs::File::create(&path).unwrap();
        f.write_all(content.as_bytes()).unwrap();
        path
    }

    #[test]
    fn labels_remap_by_first_appearance() {
        let dir = tempfile::tempdir().unwrap();
        let path = write_file(&dir, "d.csv", "a,b,y\n1,2,7\n3,4,7\n5,6,9\n");
        let loaded = load_csv(&path, "y").unwrap();
        assert_eq!(loaded.dataset.class_count(), 2);
        assert_eq!(loaded.dataset.labels(), &[0, 0, 1]);
        assert_eq!(loaded.label_map, vec!["7".to_string(), "9".to_string()]);
        assert_eq!(loaded.dataset.features().row(2), &[5.0, 6.0]);
    }

    #[test]
    fn distinct_errors_for_bad_inputs() {
        let dir = tempfile::tempdir().unwrap();
        let ragged = write_file(&dir, "r.csv", "a,b,y\n1,2,0\n1,2\n");
        assert!(matches!(
            load_csv(&ragged, "y"),
            Err(CsvError::RaggedRow { row: 3, .. })
        ));
        let non_numeric = write_file(&dir, "n.csv", "a,b,y\n1,x,0\n");
        assert!(matches!(
            load_csv(&non_numeric, "y"),
            Err(CsvError::NonNumeric { .. })
        ));
        let ok = write_file(&dir, "o.csv", "a,b,y\n1,2,0\n");
        assert!(matches!(
            load_csv(&ok, "label"),
            Err(CsvError::UnknownLabelColumn(_))
        ));
        assert!(matches!(
            load_csv(&dir.path().join("missing.csv"), "y"),
            Err(CsvError::Open { .. })
        ));
    }

    #[test]
    fn write_then_load_round_trips() {
        let dir = tempfile::tempdir().unwrap();
        let path = write_file(&dir, "d.csv", "a,b,y\n1.5,-2,3\n0,4.25,5\n1,1,3\n");
        let loaded = load_csv(&path, "y").unwrap();
        let out = dir.path().join("out.csv");
        save_csv(&out, &loaded.dataset, &loaded.label_map, "y").unwrap();
        let back = load_csv(&out, "y").unwrap();
        assert_eq!(back.dataset, loaded.dataset);
        assert_eq!(back.label_map, loaded.label_map);
    }

    #[test]
    fn pair_shares_one_mapping() {
        let dir = tempfile::tempdir().unwrap();
        let train = write_file(&dir, "train.csv", "a,y\n1,9\n2,7\n3,9\n");
        let test = write_file(&dir, "test.csv", "a,y\n4,7\n5,9\n");
        let (loaded, test_ds) = load_csv_pair(&train, &test, "y").unwrap();
        assert_eq!(loaded.dataset.labels(), &[0, 1, 0]);
        assert_eq!(test_ds.labels(), &[1, 0]);
        let bad_test = write_file(&dir, "bad.csv", "a,y\n4,1\n");
        assert!(matches!(
            load_csv_pair(&train, &bad_test, "y"),
            Err(CsvError::UnseenLabel(_))
        ));
    }
}
