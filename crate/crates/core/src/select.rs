//! Wrapper feature selection on top of the optimizer.
//!
//! A particle is a point in `[0, 1]^d`; [`binarize`] turns it into a
//! feature mask, and the mask is scored by training the chosen classifier
//! on an inner split of the training data:
//!
//! ```text
//! cost = w1·(1 − accuracy) + w2·FPR + w3·FNR + w4·(selected / d)
//! ```
//!
//! FPR and FNR are macro one-vs-rest averages.

use std::collections::HashMap;
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use crate::classifiers::{train, ClassifierSpec};
use crate::data::{stratified_folds, stratified_holdout, Dataset};
use crate::error::{Error, Result};
use crate::evo::{optimize, Bounds, EvoConfig, OptResult};
use crate::metrics::{confusion_matrix, scores, ConfusionMatrix, Metrics};

pub const SELECT_THRESHOLD: f64 = 0.5;

/// Random-walk step scale used by [`fs_evo_config`].
pub const FS_STABLE_STEP_SCALE: f64 = 0.5;

/// Optimizer settings for mask search: the default neighborhood, with a
/// random-walk step large enough to carry a coordinate across the
/// selection threshold.
pub fn fs_evo_config(n_particles: usize, max_fes: usize, seed: u64) -> EvoConfig {
    EvoConfig {
        stable_step_scale: FS_STABLE_STEP_SCALE,
        ..EvoConfig::new(n_particles, max_fes, seed)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FeatureMask {
    bits: Vec<bool>,
    count: usize,
}

impl FeatureMask {
    /// Errors on an empty or all-zero mask.
    pub fn new(bits: Vec<bool>) -> Result<Self> {
        let count = bits.iter().filter(|&&b| b).count();
        if count == 0 {
            return Err(Error::Usage("feature mask selects no features".into()));
        }
        Ok(FeatureMask { bits, count })
    }

    /// Mask with exactly the listed columns set.
    pub fn from_indices(d: usize, indices: &[usize]) -> Result<Self> {
        let mut bits = vec![false; d];
        for &i in indices {
            if i >= d {
                return Err(Error::Usage(format!("feature index {i} out of range for {d} features")));
            }
            bits[i] = true;
        }
        Self::new(bits)
    }

    pub fn all(d: usize) -> Result<Self> {
        Self::new(vec![true; d])
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn indices(&self) -> Vec<usize> {
        (0..self.bits.len()).filter(|&i| self.bits[i]).collect()
    }

    pub fn is_subset_of(&self, other: &FeatureMask) -> bool {
        self.bits.len() == other.bits.len() && self.bits.iter().zip(&other.bits).all(|(a, b)| !a || *b)
    }
}

impl Serialize for FeatureMask {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let v: Vec<u8> = self.bits.iter().map(|&b| b as u8).collect();
        v.serialize(s)
    }
}

impl<'de> Deserialize<'de> for FeatureMask {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let v = Vec::<u8>::deserialize(d)?;
        if v.iter().any(|&b| b > 1) {
            return Err(serde::de::Error::custom("mask entries must be 0 or 1"));
        }
        FeatureMask::new(v.into_iter().map(|b| b == 1).collect()).map_err(serde::de::Error::custom)
    }
}

/// Threshold a position at 0.5 (inclusive). An all-zero result is rescued
/// by setting the bit of the largest coordinate, ties to the lowest index.
pub fn binarize(position: &[f64]) -> FeatureMask {
    let mut bits: Vec<bool> = position.iter().map(|&p| p >= SELECT_THRESHOLD).collect();
    let mut count = bits.iter().filter(|&&b| b).count();
    if count == 0 && !bits.is_empty() {
        let mut best = 0;
        for (i, &p) in position.iter().enumerate() {
            if p > position[best] {
                best = i;
            }
        }
        bits[best] = true;
        count = 1;
    }
    FeatureMask { bits, count }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CostWeights {
    pub w1: f64,
    pub w2: f64,
    pub w3: f64,
    #[serde(default)]
    pub w4: f64,
}

impl Default for CostWeights {
    fn default() -> Self {
        CostWeights { w1: 1.0, w2: 0.0, w3: 0.0, w4: 0.0 }
    }
}

impl CostWeights {
    pub fn new(w1: f64, w2: f64, w3: f64, w4: f64) -> Result<Self> {
        let w = CostWeights { w1, w2, w3, w4 };
        w.validate()?;
        Ok(w)
    }

    pub fn validate(&self) -> Result<()> {
        let all = [self.w1, self.w2, self.w3, self.w4];
        if all.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::Config(format!("cost weights must be finite and non-negative, got {all:?}")));
        }
        if self.w1 + self.w2 + self.w3 <= 0.0 {
            return Err(Error::Config("at least one of w1, w2, w3 must be positive".into()));
        }
        Ok(())
    }

    pub fn cost(&self, metrics: &Metrics, selected: usize, total: usize) -> f64 {
        self.w1 * (1.0 - metrics.accuracy)
            + self.w2 * metrics.fpr_macro
            + self.w3 * metrics.fnr_macro
            + self.w4 * (selected as f64 / total as f64)
    }
}

/// How a candidate mask is scored on the training data.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "protocol", rename_all = "snake_case")]
pub enum FitnessProtocol {
    /// Train on `train_ratio` of each class, validate on the rest.
    Holdout { train_ratio: f64 },
    /// Confusion matrices pooled over stratified folds.
    KFold { folds: usize },
}

impl Default for FitnessProtocol {
    fn default() -> Self {
        FitnessProtocol::Holdout { train_ratio: 0.75 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct FitnessOptions {
    pub protocol: FitnessProtocol,
    /// Seed for the inner split and classifier training; independent of
    /// the optimizer seed.
    pub inner_seed: u64,
}

impl FitnessOptions {
    pub fn validate(&self) -> Result<()> {
        match self.protocol {
            FitnessProtocol::Holdout { train_ratio } if !(train_ratio > 0.0 && train_ratio < 1.0) => {
                Err(Error::Config(format!("holdout train_ratio must be in (0, 1), got {train_ratio}")))
            }
            FitnessProtocol::KFold { folds } if folds < 2 => {
                Err(Error::Config(format!("k-fold fitness needs at least 2 folds, got {folds}")))
            }
            _ => Ok(()),
        }
    }
}

/// Inner splits are fixed once, so every mask is scored on the same rows.
/// Scores are memoized by mask.
pub struct FitnessEvaluator<'a> {
    data: &'a Dataset,
    spec: ClassifierSpec,
    weights: CostWeights,
    seed: u64,
    splits: Vec<(Vec<usize>, Vec<usize>)>,
    cache: Mutex<HashMap<Vec<bool>, (f64, Metrics)>>,
}

impl<'a> FitnessEvaluator<'a> {
    pub fn new(
        data: &'a Dataset,
        spec: &ClassifierSpec,
        weights: CostWeights,
        options: &FitnessOptions,
    ) -> Result<Self> {
        spec.validate()?;
        weights.validate()?;
        options.validate()?;
        if data.class_counts().iter().filter(|&&c| c > 0).count() < 2 {
            return Err(Error::Data("feature selection needs at least 2 classes".into()));
        }
        let splits = match options.protocol {
            FitnessProtocol::Holdout { train_ratio } => {
                vec![stratified_holdout(data, train_ratio, options.inner_seed)?]
            }
            FitnessProtocol::KFold { folds } => {
                let parts = stratified_folds(data, folds, options.inner_seed)?;
                (0..folds)
                    .map(|k| {
                        let train: Vec<usize> = parts
                            .iter()
                            .enumerate()
                            .filter(|(j, _)| *j != k)
                            .flat_map(|(_, p)| p.iter().copied())
                            .collect::<std::collections::BTreeSet<_>>()
                            .into_iter()
                            .collect();
                        (train, parts[k].clone())
                    })
                    .collect()
            }
        };
        Ok(FitnessEvaluator {
            data,
            spec: spec.clone(),
            weights,
            seed: options.inner_seed,
            splits,
            cache: Mutex::new(HashMap::new()),
        })
    }

    pub fn n_features(&self) -> usize {
        self.data.n_features()
    }

    pub fn cache_len(&self) -> usize {
        self.cache.lock().map(|c| c.len()).unwrap_or(0)
    }

    /// Cost and inner metrics for one mask.
    pub fn score(&self, mask: &FeatureMask) -> Result<(f64, Metrics)> {
        if mask.len() != self.data.n_features() {
            return Err(Error::Usage(format!(
                "mask has {} bits, dataset has {} features",
                mask.len(),
                self.data.n_features()
            )));
        }
        if let Some(hit) = self.cache.lock().ok().and_then(|c| c.get(mask.bits()).cloned()) {
            return Ok(hit);
        }
        let columns = mask.indices();
        let mut pooled = ConfusionMatrix::zeros(self.data.n_classes());
        for (train_rows, valid_rows) in &self.splits {
            let inner_train = self.data.subset(train_rows).select_columns(&columns)?;
            let inner_valid = self.data.subset(valid_rows).select_columns(&columns)?;
            let model = train(&self.spec, &inner_train, self.seed)?;
            let predicted = model.predict_dataset(&inner_valid)?;
            pooled.add(&confusion_matrix(inner_valid.labels(), &predicted, self.data.n_classes())?)?;
        }
        let metrics = scores(&pooled)?;
        let cost = self.weights.cost(&metrics, mask.count(), mask.len());
        if let Ok(mut c) = self.cache.lock() {
            c.insert(mask.bits().to_vec(), (cost, metrics.clone()));
        }
        Ok((cost, metrics))
    }
}

/// One-shot scoring of a single mask.
pub fn fs_cost(
    mask: &FeatureMask,
    train: &Dataset,
    spec: &ClassifierSpec,
    weights: CostWeights,
    options: &FitnessOptions,
) -> Result<(f64, Metrics)> {
    FitnessEvaluator::new(train, spec, weights, options)?.score(mask)
}

#[derive(Debug, Clone, PartialEq)]
pub struct FsResult {
    pub mask: FeatureMask,
    pub cost: f64,
    pub inner_metrics: Metrics,
    pub opt: OptResult,
    pub selected_names: Vec<String>,
    pub weights: CostWeights,
    pub seed: u64,
}

#[derive(Serialize)]
struct FsReport<'a> {
    mask: &'a FeatureMask,
    selected_names: &'a [String],
    cost: f64,
    weights: &'a CostWeights,
    seed: u64,
    evaluations_used: usize,
    inner_metrics: &'a Metrics,
}

impl FsResult {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&FsReport {
            mask: &self.mask,
            selected_names: &self.selected_names,
            cost: self.cost,
            weights: &self.weights,
            seed: self.seed,
            evaluations_used: self.opt.evaluations_used,
            inner_metrics: &self.inner_metrics,
        })?)
    }
}

/// Search `[0, 1]^d` for the mask with the lowest cost, using the default
/// fitness options (stratified 75/25 holdout, inner seed 0).
pub fn select_features(
    train: &Dataset,
    spec: &ClassifierSpec,
    weights: CostWeights,
    config: &EvoConfig,
) -> Result<FsResult> {
    select_features_with(train, spec, weights, config, &FitnessOptions::default())
}

pub fn select_features_with(
    train: &Dataset,
    spec: &ClassifierSpec,
    weights: CostWeights,
    config: &EvoConfig,
    options: &FitnessOptions,
) -> Result<FsResult> {
    config.validate()?;
    let eval = FitnessEvaluator::new(train, spec, weights, options)?;
    let d = train.n_features();
    if d == 0 {
        return Err(Error::Data("dataset has no features to select".into()));
    }
    let bounds = Bounds::uniform(d, 0.0, 1.0)?;
    let failure: Mutex<Option<Error>> = Mutex::new(None);
    let opt = optimize(
        |x| match eval.score(&binarize(x)) {
            Ok((cost, _)) => cost,
            Err(e) => {
                if let Ok(mut f) = failure.lock() {
                    f.get_or_insert(e);
                }
                f64::NAN
            }
        },
        &bounds,
        config,
    )?;
    if let Some(e) = failure.into_inner().ok().flatten() {
        return Err(e);
    }
    let mask = binarize(&opt.best_position);
    let (cost, inner_metrics) = eval.score(&mask)?;
    let selected_names = mask
        .indices()
        .into_iter()
        .map(|i| train.feature_names()[i].clone())
        .collect();
    Ok(FsResult {
        mask,
        cost,
        inner_metrics,
        opt,
        selected_names,
        weights,
        seed: config.seed,
    })
}

/// Every nonempty mask over `d` features, in increasing bit-pattern order.
pub fn all_masks(d: usize) -> impl Iterator<Item = FeatureMask> {
    assert!(d < 32, "exhaustive enumeration limited to d < 32");
    (1u32..(1u32 << d)).map(move |m| {
        let bits: Vec<bool> = (0..d).map(|j| m >> j & 1 == 1).collect();
        let count = m.count_ones() as usize;
        FeatureMask { bits, count }
    })
}

/// Lowest cost over all nonempty masks; ties keep the first in
/// [`all_masks`] order.
pub fn exhaustive_best(eval: &FitnessEvaluator<'_>) -> Result<(FeatureMask, f64)> {
    use rayon::prelude::*;
    let masks: Vec<FeatureMask> = all_masks(eval.n_features()).collect();
    let costs: Vec<f64> = masks
        .par_iter()
        .map(|m| eval.score(m).map(|(c, _)| c))
        .collect::<Result<_>>()?;
    let mut best = 0;
    for (i, &c) in costs.iter().enumerate() {
        if c < costs[best] {
            best = i;
        }
    }
    Ok((masks[best].clone(), costs[best]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::ConfusionMatrix;

    fn bits(m: &FeatureMask) -> Vec<u8> {
        m.bits().iter().map(|&b| b as u8).collect()
    }

    #[test]
    fn binarize_examples() {
        assert_eq!(bits(&binarize(&[0.7, 0.2, 0.5])), [1, 0, 1]);
        assert_eq!(bits(&binarize(&[0.1, 0.2])), [0, 1]);
        assert_eq!(bits(&binarize(&[1.0, 1.0])), [1, 1]);
        assert_eq!(bits(&binarize(&[0.3, 0.3, 0.1])), [1, 0, 0]);
    }

    fn metrics_from(counts: Vec<Vec<u64>>) -> Metrics {
        scores(&ConfusionMatrix { n_classes: counts.len(), counts }).unwrap()
    }

    #[test]
    fn cost_substitution() {
        let w = CostWeights::default();
        let m = Metrics { accuracy: 0.9, fpr_macro: 0.1, fnr_macro: 0.1, ..metrics_from(vec![vec![1, 0], vec![0, 1]]) };
        assert!((w.cost(&m, 1, 2) - 0.1).abs() < 1e-15);

        let all_wrong = metrics_from(vec![vec![0, 5], vec![5, 0]]);
        let w = CostWeights::new(1.0, 1.0, 1.0, 0.0).unwrap();
        assert_eq!(w.cost(&all_wrong, 2, 2), 3.0);

        let perfect = metrics_from(vec![vec![5, 0], vec![0, 5]]);
        assert_eq!(w.cost(&perfect, 2, 2), 0.0);
    }

    #[test]
    fn weights_validated() {
        assert!(CostWeights::new(0.0, 0.0, 0.0, 1.0).is_err());
        assert!(CostWeights::new(-1.0, 1.0, 0.0, 0.0).is_err());
        assert!(CostWeights::new(0.0, 0.0, 1.0, 0.0).is_ok());
    }

    fn planted(n: usize) -> Dataset {
        let rows: Vec<Vec<f64>> = (0..n)
            .map(|i| {
                let t = i as f64;
                vec![(t * 0.61).sin().abs(), (t * 1.37).cos().abs(), (t * 0.11).fract(), (t * 2.9).sin().abs()]
            })
            .collect();
        let labels = rows.iter().map(|r| (r[0] > 0.5) as usize).collect();
        Dataset::from_rows(&rows, labels).unwrap()
    }

    #[test]
    fn mask_cache_and_mismatch() {
        let ds = planted(60);
        let ev = FitnessEvaluator::new(&ds, &ClassifierSpec::cart(), CostWeights::default(), &FitnessOptions::default()).unwrap();
        let m = FeatureMask::from_indices(4, &[0]).unwrap();
        let a = ev.score(&m).unwrap();
        let b = ev.score(&m).unwrap();
        assert_eq!(a, b);
        assert_eq!(ev.cache_len(), 1);
        assert!(ev.score(&FeatureMask::all(3).unwrap()).is_err());
    }

    #[test]
    fn single_sample_class_rejected() {
        let ds = Dataset::from_rows(&[vec![0.0], vec![1.0], vec![0.5]], vec![0, 0, 1]).unwrap();
        let err = fs_cost(&FeatureMask::all(1).unwrap(), &ds, &ClassifierSpec::knn(), CostWeights::default(), &FitnessOptions::default());
        assert!(matches!(err, Err(Error::Stratification { .. })));
    }

    #[test]
    fn one_feature_is_degenerate() {
        let ds = Dataset::from_rows(
            &(0..20).map(|i| vec![i as f64 / 20.0]).collect::<Vec<_>>(),
            (0..20).map(|i| (i >= 10) as usize).collect(),
        )
        .unwrap();
        let r = select_features(&ds, &ClassifierSpec::cart(), CostWeights::default(), &EvoConfig::new(4, 20, 3)).unwrap();
        assert_eq!(bits(&r.mask), [1]);
    }

    #[test]
    fn kfold_pools_every_row() {
        let ds = planted(45);
        let opts = FitnessOptions { protocol: FitnessProtocol::KFold { folds: 3 }, inner_seed: 1 };
        let (_, m) = fs_cost(&FeatureMask::all(4).unwrap(), &ds, &ClassifierSpec::cart(), CostWeights::default(), &opts).unwrap();
        let total: u64 = m.per_class.iter().map(|s| s.tp + s.fn_).sum();
        assert_eq!(total, 45);
    }

    #[test]
    fn selection_reports_consistent_cost() {
        let ds = planted(80);
        let w = CostWeights::new(1.0, 0.5, 0.5, 0.01).unwrap();
        let r = select_features(&ds, &ClassifierSpec::cart(), w, &EvoConfig::new(6, 60, 9)).unwrap();
        assert_eq!(r.cost, w.cost(&r.inner_metrics, r.mask.count(), 4));
        assert!(r.mask.count() >= 1);
        let json: serde_json::Value = serde_json::from_str(&r.to_json().unwrap()).unwrap();
        assert_eq!(json["mask"].as_array().unwrap().len(), 4);
        assert_eq!(json["evaluations_used"], r.opt.evaluations_used);
    }

    #[test]
    fn mask_json_round_trip() {
        let m = FeatureMask::from_indices(5, &[1, 4]).unwrap();
        let s = serde_json::to_string(&m).unwrap();
        assert_eq!(s, "[0,1,0,0,1]");
        assert_eq!(serde_json::from_str::<FeatureMask>(&s).unwrap(), m);
        assert!(serde_json::from_str::<FeatureMask>("[0,0]").is_err());
    }
}
