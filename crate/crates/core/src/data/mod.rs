//! Flow-record ingestion and dataset preparation.
//!
//! The pipeline is `ingest` (CSV → [`RawTable`]) → `preprocess` (drop
//! identifier columns, parse, impute, deduplicate, encode labels, scale)
//! → `downsample` (per-class cap) → `split` (stratified train/test).

mod balance;
mod cache;
mod ingest;
pub(crate) mod preprocess;
mod scale;
pub mod schema;

use std::collections::BTreeMap;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use balance::{downsample, split, stratified_folds, stratified_holdout, SplitPair};
pub use cache::{read_cache, write_cache, CACHE_MAGIC, CACHE_VERSION};
pub use ingest::{ingest, parse_csv, RawTable};
pub use preprocess::{preprocess, Imputation, PreprocessOptions};
pub use scale::{ColumnRange, MinMaxScaler};
pub use schema::DatasetKind;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageCount {
    pub stage: String,
    pub rows: usize,
}

/// Everything done to a dataset since its source files were read.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub kind: Option<DatasetKind>,
    pub sources: Vec<PathBuf>,
    pub dropped_columns: Vec<String>,
    pub imputation: Option<String>,
    /// Missing cells filled, per column.
    pub imputed_counts: BTreeMap<String, usize>,
    pub scaler_params: Vec<ColumnRange>,
    /// Class id → class name.
    pub label_map: Vec<String>,
    pub row_counts: Vec<StageCount>,
    pub log: Vec<String>,
}

impl Provenance {
    pub fn stage(&mut self, stage: impl Into<String>, rows: usize) {
        self.row_counts.push(StageCount {
            stage: stage.into(),
            rows,
        });
    }

    pub fn note(&mut self, line: impl Into<String>) {
        self.log.push(line.into());
    }
}

/// Numeric feature matrix with dense integer labels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    n_rows: usize,
    n_features: usize,
    /// Row-major, `n_rows * n_features`.
    values: Vec<f64>,
    labels: Vec<usize>,
    feature_names: Vec<String>,
    class_names: Vec<String>,
    pub provenance: Provenance,
}

impl Dataset {
    pub fn new(
        values: Vec<f64>,
        labels: Vec<usize>,
        feature_names: Vec<String>,
        class_names: Vec<String>,
    ) -> Result<Self> {
        let n_rows = labels.len();
        let n_features = feature_names.len();
        if values.len() != n_rows * n_features {
            return Err(Error::Usage(format!(
                "feature matrix has {} values, expected {n_rows} rows x {n_features} features",
                values.len()
            )));
        }
        if let Some(bad) = labels.iter().find(|&&l| l >= class_names.len()) {
            return Err(Error::Usage(format!(
                "label {bad} out of range for {} classes",
                class_names.len()
            )));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::Data(format!("non-finite feature value {v}")));
        }
        Ok(Dataset {
            n_rows,
            n_features,
            values,
            labels,
            feature_names,
            class_names,
            provenance: Provenance::default(),
        })
    }

    /// Build from per-row vectors; feature names default to `f0, f1, ...`
    /// and class names to the class ids.
    pub fn from_rows(rows: &[Vec<f64>], labels: Vec<usize>) -> Result<Self> {
        let d = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != d) {
            return Err(Error::Usage("rows have different lengths".into()));
        }
        if rows.len() != labels.len() {
            return Err(Error::Usage(format!(
                "{} rows but {} labels",
                rows.len(),
                labels.len()
            )));
        }
        let n_classes = labels.iter().max().map_or(0, |m| m + 1);
        Dataset::new(
            rows.concat(),
            labels,
            (0..d).map(|j| format!("f{j}")).collect(),
            (0..n_classes).map(|c| c.to_string()).collect(),
        )
    }

    pub fn with_names(mut self, feature_names: Vec<String>, class_names: Vec<String>) -> Result<Self> {
        if feature_names.len() != self.n_features {
            return Err(Error::Usage("feature name count mismatch".into()));
        }
        if self.labels.iter().any(|&l| l >= class_names.len()) {
            return Err(Error::Usage("class name count too small".into()));
        }
        self.feature_names = feature_names;
        self.class_names = class_names;
        Ok(self)
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    pub fn n_classes(&self) -> usize {
        self.class_names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.n_rows == 0
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.n_features..(i + 1) * self.n_features]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> + '_ {
        // chunks_exact(0) panics, and a zero-width dataset still has rows
        (0..self.n_rows).map(move |i| self.row(i))
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn value(&self, row: usize, feature: usize) -> f64 {
        self.values[row * self.n_features + feature]
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn class_names(&self) -> &[String] {
        &self.class_names
    }

    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.n_classes()];
        for &l in &self.labels {
            counts[l] += 1;
        }
        counts
    }

    /// Row indices per class, in ascending order.
    pub fn class_rows(&self) -> Vec<Vec<usize>> {
        let mut by_class = vec![Vec::new(); self.n_classes()];
        for (i, &l) in self.labels.iter().enumerate() {
            by_class[l].push(i);
        }
        by_class
    }

    /// The given rows, in the given order. Class names are kept even if a
    /// class ends up empty.
    pub fn subset(&self, rows: &[usize]) -> Dataset {
        let mut values = Vec::with_capacity(rows.len() * self.n_features);
        for &r in rows {
            values.extend_from_slice(self.row(r));
        }
        Dataset {
            n_rows: rows.len(),
            n_features: self.n_features,
            values,
            labels: rows.iter().map(|&r| self.labels[r]).collect(),
            feature_names: self.feature_names.clone(),
            class_names: self.class_names.clone(),
            provenance: self.provenance.clone(),
        }
    }

    /// Keep only the listed feature columns, in the given order.
    pub fn select_columns(&self, columns: &[usize]) -> Result<Dataset> {
        if let Some(&c) = columns.iter().find(|&&c| c >= self.n_features) {
            return Err(Error::Usage(format!(
                "column {c} out of range for {} features",
                self.n_features
            )));
        }
        let mut values = Vec::with_capacity(self.n_rows * columns.len());
        for row in self.rows() {
            values.extend(columns.iter().map(|&c| row[c]));
        }
        Ok(Dataset {
            n_rows: self.n_rows,
            n_features: columns.len(),
            values,
            labels: self.labels.clone(),
            feature_names: columns.iter().map(|&c| self.feature_names[c].clone()).collect(),
            class_names: self.class_names.clone(),
            provenance: self.provenance.clone(),
        })
    }

    pub(crate) fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }
}
