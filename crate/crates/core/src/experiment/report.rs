use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::{scores, ConfusionMatrix};

/// One cell of the grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub dataset: String,
    pub model: String,
    pub fs_applied: bool,
    pub selected_feature_count: usize,
    pub selected_features: Vec<String>,
    /// Inner-split cost of the selected mask.
    pub fs_cost: Option<f64>,
    pub fs_evaluations: Option<usize>,
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub fpr: f64,
    pub fnr: f64,
    pub confusion_matrix: ConfusionMatrix,
    pub converged: bool,
    pub seed: u64,
    pub config_digest: String,
}

impl RunRecord {
    /// Recompute the scores from the stored confusion matrix.
    pub fn is_consistent(&self) -> bool {
        let Ok(m) = scores(&self.confusion_matrix) else {
            return false;
        };
        m.accuracy == self.accuracy
            && m.precision_macro == self.precision
            && m.recall_macro == self.recall
            && m.f1_macro == self.f1
            && m.fpr_macro == self.fpr
            && m.fnr_macro == self.fnr
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellError {
    pub dataset: String,
    pub model: String,
    pub fs_applied: bool,
    pub kind: String,
    pub message: String,
    pub exit_code: i32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetSummary {
    pub name: String,
    pub kind: String,
    pub n_features: usize,
    pub class_names: Vec<String>,
    pub train_rows: usize,
    pub test_rows: usize,
    pub train_class_counts: Vec<usize>,
    pub test_class_counts: Vec<usize>,
}

/// Wall-clock seconds; kept apart from the deterministic body.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellTiming {
    pub dataset: String,
    pub model: String,
    pub fs_applied: bool,
    pub fs_time: f64,
    pub train_time: f64,
    pub test_time: f64,
}

/// Everything that is a pure function of the config and the inputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportBody {
    pub config_digest: String,
    pub datasets: Vec<DatasetSummary>,
    pub records: Vec<RunRecord>,
    pub errors: Vec<CellError>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub tool_version: String,
    /// Seconds since the Unix epoch.
    pub timestamp: u64,
    pub timings: Vec<CellTiming>,
    pub body: ReportBody,
}

pub const REPORT_FILE: &str = "report.json";
pub const TABLE_FILE: &str = "results.csv";

impl ExperimentReport {
    pub fn body_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.body)?)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    fn timing(&self, r: &RunRecord) -> Option<&CellTiming> {
        self.timings
            .iter()
            .find(|t| t.dataset == r.dataset && t.model == r.model && t.fs_applied == r.fs_applied)
    }

    /// Results table: one row per record, model names suffixed with `EVO`
    /// when feature selection was applied.
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let csv_err = |e: csv::Error| Error::Internal(format!("csv: {e}"));
        w.write_record([
            "Dataset",
            "Model",
            "Features",
            "Accuracy",
            "Precision",
            "Recall",
            "F1-score",
            "Training Time",
            "Testing Time",
        ])
        .map_err(csv_err)?;
        for r in &self.body.records {
            let model = if r.fs_applied { format!("{}EVO", r.model) } else { r.model.clone() };
            let (train, test) = self.timing(r).map_or((0.0, 0.0), |t| (t.train_time, t.test_time));
            w.write_record([
                r.dataset.clone(),
                model,
                r.selected_feature_count.to_string(),
                format!("{:.4}", r.accuracy),
                format!("{:.4}", r.precision),
                format!("{:.4}", r.recall),
                format!("{:.4}", r.f1),
                format!("{train:.6}"),
                format!("{test:.6}"),
            ])
            .map_err(csv_err)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Internal(format!("csv: {e}")))?;
        String::from_utf8(bytes).map_err(|e| Error::Internal(e.to_string()))
    }

    /// Write `report.json` and `results.csv` into `dir`, each atomically.
    pub fn write(&self, dir: &Path) -> Result<(PathBuf, PathBuf)> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let report = dir.join(REPORT_FILE);
        let table = dir.join(TABLE_FILE);
        write_atomic(&report, self.to_json()?.as_bytes())?;
        write_atomic(&table, self.to_csv()?.as_bytes())?;
        Ok((report, table))
    }
}

/// Write through a temporary file in the same directory, then rename.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| Error::io(dir, e))?;
    tmp.write_all(bytes).map_err(|e| Error::io(path, e))?;
    tmp.flush().map_err(|e| Error::io(path, e))?;
    tmp.persist(path).map_err(|e| Error::io(path, e.error))?;
    Ok(())
}

pub fn read_report(path: &Path) -> Result<ExperimentReport> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(serde_json::from_str(&text)?)
}
