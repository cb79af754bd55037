use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::classifiers::ClassifierSpec;
use crate::data::{DatasetKind, PreprocessOptions};
use crate::error::{Error, Result};
use crate::evo::EvoConfig;
use crate::select::{fs_evo_config, CostWeights, FitnessOptions};

pub const CONFIG_SCHEMA_VERSION: u32 = 1;

/// One dataset: CSV exports of a known layout, or a prepared cache file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetSpec {
    pub name: String,
    #[serde(default = "generic_kind")]
    pub kind: DatasetKind,
    #[serde(default)]
    pub paths: Vec<PathBuf>,
    /// Output of `prep`; used instead of `paths` when set.
    #[serde(default)]
    pub cache: Option<PathBuf>,
}

fn generic_kind() -> DatasetKind {
    DatasetKind::Generic
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema_version: u32,
    pub datasets: Vec<DatasetSpec>,
    /// Rows kept per class after balancing; `None` cuts every class to
    /// the minority count.
    pub n_per_label: Option<usize>,
    pub split_ratio: f64,
    pub split_seed: u64,
    /// Seed for downsampling and classifier training.
    pub seed: u64,
    pub classifiers: Vec<ClassifierSpec>,
    /// Which feature-selection settings to run for every classifier.
    pub fs_flags: Vec<bool>,
    pub weights: CostWeights,
    pub evo: EvoConfig,
    pub fitness: FitnessOptions,
    pub preprocess: PreprocessOptions,
    /// Fit the scaler on the training split only.
    pub strict_scaling: bool,
    pub output_dir: PathBuf,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            schema_version: CONFIG_SCHEMA_VERSION,
            datasets: Vec::new(),
            n_per_label: Some(1000),
            split_ratio: 0.8,
            split_seed: 0,
            seed: 0,
            classifiers: vec![
                ClassifierSpec::svm(),
                ClassifierSpec::random_forest(),
                ClassifierSpec::cart(),
                ClassifierSpec::knn(),
            ],
            fs_flags: vec![false, true],
            weights: CostWeights::default(),
            evo: fs_evo_config(20, 1000, 0),
            fitness: FitnessOptions::default(),
            preprocess: PreprocessOptions::default(),
            strict_scaling: false,
            output_dir: PathBuf::from("results"),
        }
    }
}

fn field(name: &str, e: Error) -> Error {
    let msg = match e {
        Error::Config(m) | Error::Usage(m) => m,
        other => other.to_string(),
    };
    Error::Config(format!("field `{name}`: {msg}"))
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(format!("invalid experiment config: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Hex SHA-256 of the compact JSON serialization.
    pub fn digest(&self) -> Result<String> {
        let bytes = serde_json::to_vec(self)?;
        Ok(hex::encode(Sha256::digest(&bytes)))
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema_version != CONFIG_SCHEMA_VERSION {
            return Err(Error::Config(format!(
                "field `schema_version`: expected {CONFIG_SCHEMA_VERSION}, got {}",
                self.schema_version
            )));
        }
        if self.datasets.is_empty() {
            return Err(Error::Config("field `datasets`: at least one dataset is required".into()));
        }
        for (i, d) in self.datasets.iter().enumerate() {
            if d.name.trim().is_empty() {
                return Err(Error::Config(format!("field `datasets[{i}].name`: must not be empty")));
            }
            if d.cache.is_none() && d.paths.is_empty() {
                return Err(Error::Config(format!(
                    "field `datasets[{i}]`: give either `paths` or `cache`"
                )));
            }
            if self.datasets[..i].iter().any(|o| o.name == d.name) {
                return Err(Error::Config(format!("field `datasets[{i}].name`: duplicate name {:?}", d.name)));
            }
        }
        if self.n_per_label == Some(0) {
            return Err(Error::Config("field `n_per_label`: must be positive".into()));
        }
        if !(self.split_ratio > 0.0 && self.split_ratio < 1.0) {
            return Err(Error::Config(format!(
                "field `split_ratio`: must be in (0, 1), got {}",
                self.split_ratio
            )));
        }
        if self.classifiers.is_empty() {
            return Err(Error::Config("field `classifiers`: at least one classifier is required".into()));
        }
        for (i, c) in self.classifiers.iter().enumerate() {
            c.validate().map_err(|e| field(&format!("classifiers[{i}]"), e))?;
        }
        if self.fs_flags.is_empty() {
            return Err(Error::Config("field `fs_flags`: at least one flag is required".into()));
        }
        if self.fs_flags.contains(&true) {
            self.weights.validate().map_err(|e| field("weights", e))?;
            self.evo.validate().map_err(|e| field("evo", e))?;
            self.fitness.validate().map_err(|e| field("fitness", e))?;
        }
        if let crate::data::Imputation::KNearest { k: 0 } = self.preprocess.imputation {
            return Err(Error::Config("field `preprocess.imputation.k`: must be positive".into()));
        }
        Ok(())
    }
}
