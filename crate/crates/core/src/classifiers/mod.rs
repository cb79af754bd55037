//! Reference classifiers behind one train/predict contract.
//!
//! Every tie (nearest-neighbor distance, vote, split quality, decision
//! value) resolves to the lowest index or class id, and all randomness is
//! drawn from seeded substreams, so `(spec, data, seed)` fully determines
//! the trained model and its predictions.

mod cart;
mod forest;
mod knn;
pub mod svm;

use std::fs;
use std::path::Path;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::rng::derive_seed;

pub use cart::{Tree, TreeNode, TreeSplit};
pub use forest::Forest;
pub use knn::KnnModel;
pub use svm::{smo_solve, KernelMatrix, SmoSolution, SvmModel};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TreeParams {
    /// `None` grows until the other stopping rules apply.
    pub max_depth: Option<usize>,
    pub min_samples_split: usize,
    pub min_samples_leaf: usize,
    /// Features examined per split; `None` means all.
    pub max_features: Option<usize>,
}

impl Default for TreeParams {
    fn default() -> Self {
        TreeParams {
            max_depth: None,
            min_samples_split: 2,
            min_samples_leaf: 1,
            max_features: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ForestParams {
    pub n_trees: usize,
    pub tree: TreeParams,
    pub bootstrap: bool,
    /// Features examined per split; `None` means `ceil(sqrt(d))`.
    pub feature_subsample: Option<usize>,
    pub seed: u64,
}

impl Default for ForestParams {
    fn default() -> Self {
        ForestParams {
            n_trees: 100,
            tree: TreeParams::default(),
            bootstrap: true,
            feature_subsample: None,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SvmParams {
    pub c: f64,
    /// RBF width; `None` means `1 / d`.
    pub gamma: Option<f64>,
    pub tolerance: f64,
    /// Cap on full sweeps over the training set; `None` means `10 * n`.
    pub max_passes: Option<usize>,
}

impl Default for SvmParams {
    fn default() -> Self {
        SvmParams {
            c: 1.0,
            gamma: None,
            tolerance: 1e-3,
            max_passes: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "algorithm", rename_all = "snake_case")]
pub enum ClassifierSpec {
    Knn { k: usize },
    Cart(TreeParams),
    RandomForest(ForestParams),
    Svm(SvmParams),
}

impl ClassifierSpec {
    pub fn knn() -> Self {
        ClassifierSpec::Knn { k: 5 }
    }

    pub fn cart() -> Self {
        ClassifierSpec::Cart(TreeParams::default())
    }

    pub fn random_forest() -> Self {
        ClassifierSpec::RandomForest(ForestParams::default())
    }

    pub fn svm() -> Self {
        ClassifierSpec::Svm(SvmParams::default())
    }

    /// Short display name, as used in result tables.
    pub fn name(&self) -> &'static str {
        match self {
            ClassifierSpec::Knn { .. } => "KNN",
            ClassifierSpec::Cart(_) => "D_Tree",
            ClassifierSpec::RandomForest(_) => "RF",
            ClassifierSpec::Svm(_) => "SVM",
        }
    }

    /// Parse `knn`, `cart`/`dtree`, `rf`, `svm` into a default spec.
    pub fn from_name(name: &str) -> Result<Self> {
        match name.trim().to_ascii_lowercase().replace(['_', '-'], "").as_str() {
            "knn" => Ok(Self::knn()),
            "cart" | "dtree" | "decisiontree" => Ok(Self::cart()),
            "rf" | "randomforest" => Ok(Self::random_forest()),
            "svm" | "svmrbf" => Ok(Self::svm()),
            other => Err(Error::Usage(format!(
                "unknown classifier {other:?} (expected knn, cart, rf or svm)"
            ))),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let tree = |t: &TreeParams| -> Result<()> {
            if t.min_samples_split < 2 {
                return Err(Error::Config("min_samples_split must be at least 2".into()));
            }
            if t.min_samples_leaf < 1 {
                return Err(Error::Config("min_samples_leaf must be at least 1".into()));
            }
            if t.max_features == Some(0) {
                return Err(Error::Config("max_features must be positive".into()));
            }
            Ok(())
        };
        match self {
            ClassifierSpec::Knn { k } if *k == 0 => Err(Error::Config("KNN k must be positive".into())),
            ClassifierSpec::Knn { .. } => Ok(()),
            ClassifierSpec::Cart(t) => tree(t),
            ClassifierSpec::RandomForest(f) => {
                if f.n_trees == 0 {
                    return Err(Error::Config("n_trees must be positive".into()));
                }
                if f.feature_subsample == Some(0) {
                    return Err(Error::Config("feature_subsample must be positive".into()));
                }
                tree(&f.tree)
            }
            ClassifierSpec::Svm(s) => {
                if !(s.c > 0.0 && s.c.is_finite()) {
                    return Err(Error::Config(format!("SVM c must be > 0, got {}", s.c)));
                }
                if let Some(g) = s.gamma {
                    if !(g > 0.0 && g.is_finite()) {
                        return Err(Error::Config(format!("SVM gamma must be > 0, got {g}")));
                    }
                }
                if s.tolerance.is_nan() || s.tolerance < 0.0 {
                    return Err(Error::Config("SVM tolerance must be non-negative".into()));
                }
                if s.max_passes == Some(0) {
                    return Err(Error::Config("SVM max_passes must be positive".into()));
                }
                Ok(())
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "algorithm", rename_all = "snake_case")]
pub enum ModelState {
    Knn(KnnModel),
    Cart(Tree),
    RandomForest(Forest),
    Svm(SvmModel),
}

/// A trained classifier. Immutable; prediction is read-only.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Model {
    pub state: ModelState,
    pub n_features: usize,
    pub n_classes: usize,
    /// Seconds spent in [`train`].
    pub train_time: f64,
    /// False when the SVM solver hit its sweep cap before satisfying KKT.
    pub converged: bool,
}

pub fn train(spec: &ClassifierSpec, data: &Dataset, seed: u64) -> Result<Model> {
    spec.validate()?;
    if data.is_empty() {
        return Err(Error::Usage("cannot train on an empty dataset".into()));
    }
    let start = Instant::now();
    let mut converged = true;
    let state = match spec {
        ClassifierSpec::Knn { k } => ModelState::Knn(KnnModel::fit(data, *k)),
        ClassifierSpec::Cart(params) => {
            ModelState::Cart(Tree::fit(data, params, derive_seed(seed, &[0xca27])))
        }
        ClassifierSpec::RandomForest(params) => {
            ModelState::RandomForest(Forest::fit(data, params, derive_seed(params.seed, &[seed])))
        }
        ClassifierSpec::Svm(params) => {
            let m = SvmModel::fit(data, params, seed);
            converged = m.converged;
            ModelState::Svm(m)
        }
    };
    Ok(Model {
        state,
        n_features: data.n_features(),
        n_classes: data.n_classes(),
        train_time: start.elapsed().as_secs_f64(),
        converged,
    })
}

impl Model {
    fn check_width(&self, width: usize) -> Result<()> {
        if width != self.n_features {
            return Err(Error::Usage(format!(
                "model trained on {} features, got {width}",
                self.n_features
            )));
        }
        Ok(())
    }

    pub fn predict_row(&self, x: &[f64]) -> Result<usize> {
        self.check_width(x.len())?;
        Ok(self.predict_unchecked(x))
    }

    fn predict_unchecked(&self, x: &[f64]) -> usize {
        match &self.state {
            ModelState::Knn(m) => m.predict(x),
            ModelState::Cart(t) => t.predict(x),
            ModelState::RandomForest(f) => f.predict(x),
            ModelState::Svm(s) => s.predict(x),
        }
    }

    /// One label per row of a row-major matrix with `width` columns.
    pub fn predict(&self, features: &[f64], width: usize) -> Result<Vec<usize>> {
        use rayon::prelude::*;
        self.check_width(width)?;
        if width == 0 {
            return Err(Error::Usage("zero-width feature matrix".into()));
        }
        if !features.len().is_multiple_of(width) {
            return Err(Error::Usage("feature matrix is not rectangular".into()));
        }
        Ok(features
            .par_chunks(width)
            .map(|row| self.predict_unchecked(row))
            .collect())
    }

    pub fn predict_dataset(&self, data: &Dataset) -> Result<Vec<usize>> {
        self.predict(data.values(), data.n_features())
    }

    /// Predictions plus the wall-clock seconds the batch took.
    pub fn predict_timed(&self, data: &Dataset) -> Result<(Vec<usize>, f64)> {
        let start = Instant::now();
        let labels = self.predict_dataset(data)?;
        Ok((labels, start.elapsed().as_secs_f64()))
    }
}

pub const MODEL_FORMAT: &str = "evofs-model";
pub const MODEL_FORMAT_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct ModelFile {
    format: String,
    version: u32,
    model: Model,
}

/// Versioned JSON document; floats round-trip exactly.
pub fn model_to_json(model: &Model) -> Result<String> {
    Ok(serde_json::to_string(&ModelFile {
        format: MODEL_FORMAT.into(),
        version: MODEL_FORMAT_VERSION,
        model: model.clone(),
    })?)
}

pub fn model_from_json(json: &str) -> Result<Model> {
    let file: ModelFile = serde_json::from_str(json)?;
    if file.format != MODEL_FORMAT || file.version != MODEL_FORMAT_VERSION {
        return Err(Error::Data(format!(
            "unsupported model file {} v{}",
            file.format, file.version
        )));
    }
    Ok(file.model)
}

pub fn save_model(model: &Model, path: &Path) -> Result<()> {
    fs::write(path, model_to_json(model)?).map_err(|e| Error::io(path, e))
}

pub fn load_model(path: &Path) -> Result<Model> {
    let json = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    model_from_json(&json)
}

/// Index of the largest count; ties go to the lowest index.
pub(crate) fn argmax_count(counts: &[usize]) -> usize {
    let mut best = 0;
    for (i, &c) in counts.iter().enumerate() {
        if c > counts[best] {
            best = i;
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_points() -> Dataset {
        Dataset::from_rows(&[vec![0.0], vec![10.0]], vec![0, 1]).unwrap()
    }

    #[test]
    fn empty_dataset_rejected() {
        let ds = Dataset::from_rows(&[], vec![]).unwrap();
        assert!(matches!(train(&ClassifierSpec::knn(), &ds, 0), Err(Error::Usage(_))));
    }

    #[test]
    fn width_mismatch_rejected() {
        let m = train(&ClassifierSpec::Knn { k: 1 }, &two_points(), 0).unwrap();
        assert!(matches!(m.predict(&[1.0, 2.0], 2), Err(Error::Usage(_))));
        assert_eq!(m.predict(&[1.0], 1).unwrap(), vec![0]);
    }

    #[test]
    fn invalid_hyperparameters() {
        assert!(ClassifierSpec::Knn { k: 0 }.validate().is_err());
        assert!(ClassifierSpec::Svm(SvmParams { c: 0.0, ..Default::default() }).validate().is_err());
        let t = TreeParams { min_samples_split: 1, ..Default::default() };
        assert!(ClassifierSpec::Cart(t).validate().is_err());
    }

    #[test]
    fn spec_json_shape() {
        let s: ClassifierSpec = serde_json::from_str(r#"{"algorithm":"knn","k":3}"#).unwrap();
        assert_eq!(s, ClassifierSpec::Knn { k: 3 });
        let s: ClassifierSpec = serde_json::from_str(r#"{"algorithm":"random_forest","n_trees":7}"#).unwrap();
        match s {
            ClassifierSpec::RandomForest(f) => {
                assert_eq!(f.n_trees, 7);
                assert!(f.bootstrap);
            }
            _ => panic!(),
        }
    }

    #[test]
    fn names() {
        assert_eq!(ClassifierSpec::from_name("D_Tree").unwrap().name(), "D_Tree");
        assert!(ClassifierSpec::from_name("mlp").is_err());
    }

    #[test]
    fn model_file_round_trip_preserves_predictions() {
        let rows: Vec<Vec<f64>> = (0..40).map(|i| vec![(i as f64 * 0.37).sin(), (i as f64 * 0.11).cos()]).collect();
        let labels: Vec<usize> = (0..40).map(|i| (i * 7 % 3) as usize).collect();
        let ds = Dataset::from_rows(&rows, labels).unwrap();
        for spec in [
            ClassifierSpec::Knn { k: 3 },
            ClassifierSpec::cart(),
            ClassifierSpec::RandomForest(ForestParams { n_trees: 5, ..Default::default() }),
            ClassifierSpec::Svm(SvmParams { gamma: Some(2.0), ..Default::default() }),
        ] {
            let m = train(&spec, &ds, 4).unwrap();
            let back = model_from_json(&model_to_json(&m).unwrap()).unwrap();
            assert_eq!(back, m, "{}", spec.name());
            assert_eq!(back.predict_dataset(&ds).unwrap(), m.predict_dataset(&ds).unwrap());
        }
    }
}
