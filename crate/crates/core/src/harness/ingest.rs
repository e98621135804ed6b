//! CSV ingestion and the dataset manifest.

use std::collections::BTreeSet;
use std::io::Read;
use std::path::{Path, PathBuf};

use ndarray::Array2;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::config::{DatasetSchema, LabelColumn};
use crate::data::Dataset;
use crate::error::{MtsError, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct LoadedDataset {
    pub dataset: Dataset,
    /// `class_names[c]` is the label string mapped to class `c`.
    pub class_names: Vec<String>,
}

/// Reads a numeric CSV. Rows and columns in errors are 1-based and count
/// the header line.
pub fn load_csv(path: &Path, schema: &DatasetSchema) -> Result<LoadedDataset> {
    let file = std::fs::File::open(path).map_err(|e| MtsError::io(path, e))?;
    read_csv(file, schema)
}

pub fn read_csv<R: Read>(reader: R, schema: &DatasetSchema) -> Result<LoadedDataset> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(schema.header)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let offset = usize::from(schema.header) + 1;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut raw_labels: Vec<String> = Vec::new();
    let mut width = None;
    for (r, record) in rdr.records().enumerate() {
        let line = r + offset;
        let record = record.map_err(|e| MtsError::Ingestion {
            row: line,
            column: 0,
            message: e.to_string(),
        })?;
        if record.iter().all(str::is_empty) {
            continue;
        }
        let n = record.len();
        if *width.get_or_insert(n) != n {
            return Err(MtsError::Ingestion {
                row: line,
                column: 0,
                message: format!("expected {} fields, found {n}", width.unwrap_or(0)),
            });
        }
        let label_at = match schema.label_column {
            LabelColumn::First => 0,
            LabelColumn::Last => n - 1,
            LabelColumn::Index(i) if i < n => i,
            LabelColumn::Index(i) => {
                return Err(MtsError::Ingestion {
                    row: line,
                    column: i + 1,
                    message: format!("label column {i} missing from a {n}-field row"),
                })
            }
        };
        let mut features = Vec::with_capacity(n - 1);
        for (c, cell) in record.iter().enumerate() {
            if c == label_at {
                continue;
            }
            let v: f64 = cell.parse().map_err(|_| MtsError::Ingestion {
                row: line,
                column: c + 1,
                message: format!("cannot parse {cell:?} as a number"),
            })?;
            if !v.is_finite() {
                return Err(MtsError::Ingestion {
                    row: line,
                    column: c + 1,
                    message: format!("non-finite value {cell:?}"),
                });
            }
            features.push(v);
        }
        rows.push(features);
        raw_labels.push(record[label_at].to_string());
    }
    if rows.is_empty() {
        return Err(MtsError::Ingestion {
            row: offset,
            column: 0,
            message: "no data rows".into(),
        });
    }
    let class_names = match &schema.class_names {
        Some(names) => names.clone(),
        None => infer_classes(&raw_labels),
    };
    let mut labels = Vec::with_capacity(raw_labels.len());
    for (r, raw) in raw_labels.iter().enumerate() {
        let class = class_names
            .iter()
            .position(|n| n == raw)
            .ok_or_else(|| MtsError::Ingestion {
                row: r + offset,
                column: 0,
                message: format!("label {raw:?} not in the class mapping"),
            })?;
        labels.push(class);
    }
    let d = rows[0].len();
    let x = Array2::from_shape_vec((rows.len(), d), rows.into_iter().flatten().collect())
        .map_err(|e| MtsError::Shape(e.to_string()))?;
    let num_classes = class_names.len().max(2);
    Ok(LoadedDataset {
        dataset: Dataset::new(x, labels, num_classes)?,
        class_names,
    })
}

fn infer_classes(raw: &[String]) -> Vec<String> {
    let distinct: BTreeSet<&String> = raw.iter().collect();
    let mut names: Vec<String> = distinct.into_iter().cloned().collect();
    if names.iter().all(|n| n.parse::<f64>().is_ok()) {
        names.sort_by(|a, b| a.parse::<f64>().unwrap().total_cmp(&b.parse::<f64>().unwrap()));
    }
    names
}

pub fn sha256_file(path: &Path) -> Result<String> {
    let bytes = std::fs::read(path).map_err(|e| MtsError::io(path, e))?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub name: String,
    pub file: String,
    pub num_classes: usize,
    pub instances: usize,
    pub attributes: usize,
    #[serde(default)]
    pub schema: DatasetSchema,
    /// Recorded on first ingestion.
    #[serde(default)]
    pub sha256: Option<String>,
    #[serde(default)]
    pub source: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub version: u32,
    pub datasets: Vec<ManifestEntry>,
}

impl Manifest {
    pub fn load(path: &Path) -> Result<Manifest> {
        let text = std::fs::read_to_string(path).map_err(|e| MtsError::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| MtsError::Serialization(format!("{}: {e}", path.display())))
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let mut text = serde_json::to_string_pretty(self).map_err(|e| MtsError::Serialization(e.to_string()))?;
        text.push('\n');
        std::fs::write(path, text).map_err(|e| MtsError::io(path, e))
    }

    pub fn entry(&self, name: &str) -> Option<&ManifestEntry> {
        self.datasets.iter().find(|e| e.name == name)
    }
}

impl ManifestEntry {
    pub fn path(&self, data_dir: &Path) -> PathBuf {
        data_dir.join(&self.file)
    }

    /// Loads the file, checks its shape against the entry, and verifies
    /// the checksum. A missing checksum is filled in; the return flag says
    /// whether that happened.
    pub fn ingest(&mut self, data_dir: &Path) -> Result<(LoadedDataset, bool)> {
        let path = self.path(data_dir);
        let digest = sha256_file(&path)?;
        let recorded = match &self.sha256 {
            Some(expected) if *expected != digest => {
                return Err(MtsError::Input(format!(
                    "{}: checksum {digest} does not match recorded {expected}",
                    path.display()
                )));
            }
            Some(_) => false,
            None => {
                self.sha256 = Some(digest);
                true
            }
        };
        let loaded = load_csv(&path, &self.schema)?;
        let ds = &loaded.dataset;
        if ds.len() != self.instances || ds.dim() != self.attributes || ds.num_classes() != self.num_classes {
            return Err(MtsError::Input(format!(
                "{}: found {} x {} with {} classes, manifest expects {} x {} with {}",
                self.name,
                ds.len(),
                ds.dim(),
                ds.num_classes(),
                self.instances,
                self.attributes,
                self.num_classes
            )));
        }
        Ok((loaded, recorded))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_label_last() {
        let text = "a,b,label\n1,2,x\n3,4,y\n5,6.5,x\n";
        let d = read_csv(text.as_bytes(), &DatasetSchema::default()).unwrap();
        assert_eq!(d.dataset.len(), 3);
        assert_eq!(d.dataset.dim(), 2);
        assert_eq!(d.class_names, vec!["x", "y"]);
        assert_eq!(d.dataset.labels(), &[0, 1, 0]);
        assert_eq!(d.dataset.features()[[2, 1]], 6.5);
    }

    #[test]
    fn numeric_labels_sort_numerically() {
        let text = "1,10\n2,9\n3,2\n";
        let schema = DatasetSchema {
            header: false,
            ..DatasetSchema::default()
        };
        let d = read_csv(text.as_bytes(), &schema).unwrap();
        assert_eq!(d.class_names, vec!["2", "9", "10"]);
        assert_eq!(d.dataset.labels(), &[2, 1, 0]);
    }

    #[test]
    fn label_first_with_mapping() {
        let schema = DatasetSchema {
            label_column: LabelColumn::First,
            header: false,
            class_names: Some(vec!["good".into(), "bad".into()]),
        };
        let d = read_csv("bad,1,2\ngood,3,4\n".as_bytes(), &schema).unwrap();
        assert_eq!(d.dataset.labels(), &[1, 0]);
        let err = read_csv("bad,1,2\nugly,3,4\n".as_bytes(), &schema).unwrap_err();
        match err {
            MtsError::Ingestion { row, message, .. } => {
                assert_eq!(row, 2);
                assert!(message.contains("ugly"));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn bad_cell_reports_position() {
        let err = read_csv("a,b,y\n1,2,0\n1,zz,1\n".as_bytes(), &DatasetSchema::default()).unwrap_err();
        match err {
            MtsError::Ingestion { row, column, .. } => assert_eq!((row, column), (3, 2)),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn checksum_recorded_then_verified() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("t.csv"), "a,y\n1,0\n2,1\n").unwrap();
        let mut entry = ManifestEntry {
            name: "t".into(),
            file: "t.csv".into(),
            num_classes: 2,
            instances: 2,
            attributes: 1,
            schema: DatasetSchema::default(),
            sha256: None,
            source: String::new(),
        };
        assert!(entry.ingest(dir.path()).unwrap().1);
        assert!(!entry.ingest(dir.path()).unwrap().1);
        std::fs::write(dir.path().join("t.csv"), "a,y\n1,0\n3,1\n").unwrap();
        assert!(entry.ingest(dir.path()).is_err());
    }
}
