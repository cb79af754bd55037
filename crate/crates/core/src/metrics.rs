//! Confusion matrices and the scores derived from them.
//!
//! Multiclass aggregates are one-vs-rest per class, then averaged
//! (unweighted macro by default). Every ratio with a zero denominator is
//! defined as 0.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Rows are true classes, columns predicted classes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub n_classes: usize,
    pub counts: Vec<Vec<u64>>,
}

impl ConfusionMatrix {
    pub fn zeros(n_classes: usize) -> Self {
        ConfusionMatrix {
            n_classes,
            counts: vec![vec![0; n_classes]; n_classes],
        }
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    pub fn trace(&self) -> u64 {
        (0..self.n_classes).map(|c| self.counts[c][c]).sum()
    }

    /// Number of samples whose true class is `class`.
    pub fn support(&self, class: usize) -> u64 {
        self.counts[class].iter().sum()
    }

    pub fn predicted(&self, class: usize) -> u64 {
        self.counts.iter().map(|row| row[class]).sum()
    }

    /// Element-wise sum, used to pool folds.
    pub fn add(&mut self, other: &ConfusionMatrix) -> Result<()> {
        if other.n_classes != self.n_classes {
            return Err(Error::Usage(format!(
                "cannot add {}-class and {}-class confusion matrices",
                self.n_classes, other.n_classes
            )));
        }
        for (r, o) in self.counts.iter_mut().zip(&other.counts) {
            for (a, b) in r.iter_mut().zip(o) {
                *a += b;
            }
        }
        Ok(())
    }

    /// Plot-ready CSV grid: header `true\pred,<names>`, one row per true class.
    pub fn to_csv(&self, class_names: &[String]) -> String {
        let name = |c: usize| {
            class_names
                .get(c)
                .cloned()
                .unwrap_or_else(|| c.to_string())
        };
        let mut out = String::from("true\\pred");
        for c in 0..self.n_classes {
            let _ = write!(out, ",{}", csv_field(&name(c)));
        }
        out.push('\n');
        for (t, row) in self.counts.iter().enumerate() {
            out.push_str(&csv_field(&name(t)));
            for v in row {
                let _ = write!(out, ",{v}");
            }
            out.push('\n');
        }
        out
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

pub fn confusion_matrix(y_true: &[usize], y_pred: &[usize], n_classes: usize) -> Result<ConfusionMatrix> {
    if y_true.len() != y_pred.len() {
        return Err(Error::Usage(format!(
            "label vectors differ in length: {} true vs {} predicted",
            y_true.len(),
            y_pred.len()
        )));
    }
    let mut cm = ConfusionMatrix::zeros(n_classes);
    for (&t, &p) in y_true.iter().zip(y_pred) {
        if t >= n_classes || p >= n_classes {
            return Err(Error::Usage(format!(
                "label out of range for {n_classes} classes: true {t}, predicted {p}"
            )));
        }
        cm.counts[t][p] += 1;
    }
    Ok(cm)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Averaging {
    #[default]
    Macro,
    /// Classes weighted by their true support.
    Weighted,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassScores {
    pub tp: u64,
    pub tn: u64,
    pub fp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub fpr: f64,
    pub fnr: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub accuracy: f64,
    pub precision_macro: f64,
    pub recall_macro: f64,
    pub f1_macro: f64,
    pub fpr_macro: f64,
    pub fnr_macro: f64,
    pub averaging: Averaging,
    pub per_class: Vec<ClassScores>,
    /// Seconds.
    pub train_time: f64,
    pub test_time: f64,
}

impl Metrics {
    pub fn with_timings(mut self, train_time: f64, test_time: f64) -> Self {
        self.train_time = train_time;
        self.test_time = test_time;
        self
    }
}

fn ratio(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// `2pr / (p + r)`, 0 when both are 0.
pub fn f1_score(precision: f64, recall: f64) -> f64 {
    let den = precision + recall;
    if den > 0.0 {
        2.0 * precision * recall / den
    } else {
        0.0
    }
}

pub fn class_scores(cm: &ConfusionMatrix, class: usize) -> ClassScores {
    let total = cm.total();
    let tp = cm.counts[class][class];
    let fn_ = cm.support(class) - tp;
    let fp = cm.predicted(class) - tp;
    let tn = total - tp - fn_ - fp;
    let precision = ratio(tp, tp + fp);
    let recall = ratio(tp, tp + fn_);
    ClassScores {
        tp,
        tn,
        fp,
        fn_,
        precision,
        recall,
        f1: f1_score(precision, recall),
        fpr: ratio(fp, fp + tn),
        fnr: ratio(fn_, fn_ + tp),
    }
}

pub fn scores(cm: &ConfusionMatrix) -> Result<Metrics> {
    scores_with(cm, Averaging::Macro)
}

pub fn scores_with(cm: &ConfusionMatrix, averaging: Averaging) -> Result<Metrics> {
    let total = cm.total();
    if total == 0 {
        return Err(Error::Metrics("confusion matrix has no samples".into()));
    }
    let per_class: Vec<ClassScores> = (0..cm.n_classes).map(|c| class_scores(cm, c)).collect();
    let weights: Vec<f64> = match averaging {
        Averaging::Macro => vec![1.0 / cm.n_classes as f64; cm.n_classes],
        Averaging::Weighted => (0..cm.n_classes)
            .map(|c| cm.support(c) as f64 / total as f64)
            .collect(),
    };
    let avg = |f: fn(&ClassScores) -> f64| -> f64 {
        per_class.iter().zip(&weights).map(|(s, w)| w * f(s)).sum()
    };
    Ok(Metrics {
        accuracy: cm.trace() as f64 / total as f64,
        precision_macro: avg(|s| s.precision),
        recall_macro: avg(|s| s.recall),
        f1_macro: avg(|s| s.f1),
        fpr_macro: avg(|s| s.fpr),
        fnr_macro: avg(|s| s.fnr),
        averaging,
        per_class,
        train_time: 0.0,
        test_time: 0.0,
    })
}
