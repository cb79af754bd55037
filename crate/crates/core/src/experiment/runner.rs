use std::time::{Instant, SystemTime, UNIX_EPOCH};

use rayon::prelude::*;

use super::config::{DatasetSpec, ExperimentConfig};
use super::report::{CellError, CellTiming, DatasetSummary, ExperimentReport, ReportBody, RunRecord};
use crate::classifiers::{train, ClassifierSpec};
use crate::data::{downsample, ingest, preprocess, read_cache, split, Dataset, MinMaxScaler, PreprocessOptions, SplitPair};
use crate::error::{Error, Result};
use crate::metrics::{confusion_matrix, scores};
use crate::select::select_features_with;

/// Cleaned and balanced, but not yet scaled: ingest, preprocess without
/// scaling, then downsample. A cache file is loaded as is.
pub fn load_balanced(
    spec: &DatasetSpec,
    options: &PreprocessOptions,
    n_per_label: Option<usize>,
    seed: u64,
) -> Result<Dataset> {
    if let Some(path) = &spec.cache {
        return read_cache(path);
    }
    let raw = ingest(&spec.paths, spec.kind)?;
    let unscaled = PreprocessOptions {
        scale: false,
        ..options.clone()
    };
    let clean = preprocess(&raw, spec.kind, &unscaled)?;
    downsample(&clean, n_per_label, seed)
}

/// Stratified split with min-max scaling. A dataset that already carries
/// scaler parameters is only split. Otherwise the scaler is fit on the
/// whole dataset, or on the training part alone when `strict` is set
/// (test values outside the training range are clipped).
pub fn scaled_split(ds: &Dataset, ratio: f64, seed: u64, strict: bool) -> Result<SplitPair> {
    if !ds.provenance.scaler_params.is_empty() {
        return split(ds, ratio, seed);
    }
    if strict {
        let mut pair = split(ds, ratio, seed)?;
        let (scaler, train) = MinMaxScaler::fit_transform(&pair.train);
        pair.test = scaler.transform(&pair.test)?;
        pair.train = train;
        pair.train.provenance.note("scaler fit on the training split");
        pair.test.provenance.note("scaled with the training split's ranges");
        Ok(pair)
    } else {
        let (_, scaled) = MinMaxScaler::fit_transform(ds);
        split(&scaled, ratio, seed)
    }
}

pub(crate) fn prepare(spec: &DatasetSpec, cfg: &ExperimentConfig) -> Result<SplitPair> {
    let ds = load_balanced(spec, &cfg.preprocess, cfg.n_per_label, cfg.seed)?;
    scaled_split(&ds, cfg.split_ratio, cfg.split_seed, cfg.strict_scaling)
}

fn summary(spec: &DatasetSpec, pair: &SplitPair) -> DatasetSummary {
    DatasetSummary {
        name: spec.name.clone(),
        kind: spec.kind.to_string(),
        n_features: pair.train.n_features(),
        class_names: pair.train.class_names().to_vec(),
        train_rows: pair.train.n_rows(),
        test_rows: pair.test.n_rows(),
        train_class_counts: pair.train.class_counts(),
        test_class_counts: pair.test.class_counts(),
    }
}

/// Train (optionally after feature selection) and score one cell.
pub fn run_cell(
    dataset: &str,
    pair: &SplitPair,
    spec: &ClassifierSpec,
    fs: bool,
    cfg: &ExperimentConfig,
    digest: &str,
) -> Result<(RunRecord, CellTiming)> {
    let fs_start = Instant::now();
    let (train_set, test_set, selection) = if fs {
        let r = select_features_with(&pair.train, spec, cfg.weights, &cfg.evo, &cfg.fitness)?;
        let cols = r.mask.indices();
        (pair.train.select_columns(&cols)?, pair.test.select_columns(&cols)?, Some(r))
    } else {
        (pair.train.clone(), pair.test.clone(), None)
    };
    let fs_time = if fs { fs_start.elapsed().as_secs_f64() } else { 0.0 };

    let model = train(spec, &train_set, cfg.seed)?;
    let (predicted, test_time) = model.predict_timed(&test_set)?;
    let cm = confusion_matrix(test_set.labels(), &predicted, test_set.n_classes())?;
    let m = scores(&cm)?;
    let record = RunRecord {
        dataset: dataset.to_string(),
        model: spec.name().to_string(),
        fs_applied: fs,
        selected_feature_count: train_set.n_features(),
        selected_features: train_set.feature_names().to_vec(),
        fs_cost: selection.as_ref().map(|r| r.cost),
        fs_evaluations: selection.as_ref().map(|r| r.opt.evaluations_used),
        accuracy: m.accuracy,
        precision: m.precision_macro,
        recall: m.recall_macro,
        f1: m.f1_macro,
        fpr: m.fpr_macro,
        fnr: m.fnr_macro,
        confusion_matrix: cm,
        converged: model.converged,
        seed: cfg.seed,
        config_digest: digest.to_string(),
    };
    let timing = CellTiming {
        dataset: dataset.to_string(),
        model: record.model.clone(),
        fs_applied: fs,
        fs_time,
        train_time: model.train_time,
        test_time,
    };
    Ok((record, timing))
}

fn cell_error(dataset: &str, spec: &ClassifierSpec, fs: bool, e: &Error) -> CellError {
    CellError {
        dataset: dataset.to_string(),
        model: spec.name().to_string(),
        fs_applied: fs,
        kind: e.kind().to_string(),
        message: e.to_string(),
        exit_code: e.exit_code(),
    }
}

/// Run the full grid: every dataset × classifier × feature-selection flag.
///
/// Each dataset is prepared once and shared by its cells. A failure is
/// recorded against the affected cells and the others still run. Cells
/// execute in parallel on the current rayon pool; records keep grid order.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    cfg.validate()?;
    let digest = cfg.digest()?;
    let prepared: Vec<Result<SplitPair>> = cfg.datasets.par_iter().map(|d| prepare(d, cfg)).collect();

    let cells: Vec<(usize, &ClassifierSpec, bool)> = (0..cfg.datasets.len())
        .flat_map(|d| {
            cfg.classifiers
                .iter()
                .flat_map(move |c| cfg.fs_flags.iter().map(move |&f| (d, c, f)))
        })
        .collect();
    let outcomes: Vec<Result<(RunRecord, CellTiming)>> = cells
        .par_iter()
        .map(|&(d, spec, fs)| {
            let name = &cfg.datasets[d].name;
            match &prepared[d] {
                Ok(pair) => run_cell(name, pair, spec, fs, cfg, &digest),
                Err(e) => Err(Error::Data(format!("dataset {name:?} could not be prepared: {e}"))),
            }
        })
        .collect();

    let mut body = ReportBody {
        config_digest: digest.clone(),
        datasets: Vec::new(),
        records: Vec::new(),
        errors: Vec::new(),
    };
    for (spec, p) in cfg.datasets.iter().zip(&prepared) {
        if let Ok(pair) = p {
            body.datasets.push(summary(spec, pair));
        }
    }
    let mut timings = Vec::new();
    for (&(d, spec, fs), outcome) in cells.iter().zip(outcomes) {
        match outcome {
            Ok((record, timing)) => {
                body.records.push(record);
                timings.push(timing);
            }
            Err(e) => {
                let e = match &prepared[d] {
                    Err(orig) => orig,
                    Ok(_) => &e,
                };
                body.errors.push(cell_error(&cfg.datasets[d].name, spec, fs, e));
            }
        }
    }
    Ok(ExperimentReport {
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        timestamp: SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map_or(0, |d| d.as_secs()),
        timings,
        body,
    })
}
