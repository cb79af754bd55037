use serde::{Deserialize, Serialize};

use super::Dataset;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColumnRange {
    pub column: String,
    pub min: f64,
    pub max: f64,
}

/// Per-column min-max scaling to `[0, 1]`. Constant columns map to 0;
/// values outside the fitted range are clipped.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinMaxScaler {
    pub ranges: Vec<ColumnRange>,
}

impl MinMaxScaler {
    pub fn fit(ds: &Dataset) -> Self {
        let d = ds.n_features();
        let mut lo = vec![f64::INFINITY; d];
        let mut hi = vec![f64::NEG_INFINITY; d];
        for row in ds.rows() {
            for j in 0..d {
                lo[j] = lo[j].min(row[j]);
                hi[j] = hi[j].max(row[j]);
            }
        }
        let ranges = ds
            .feature_names()
            .iter()
            .enumerate()
            .map(|(j, name)| ColumnRange {
                column: name.clone(),
                min: if lo[j].is_finite() { lo[j] } else { 0.0 },
                max: if hi[j].is_finite() { hi[j] } else { 0.0 },
            })
            .collect();
        MinMaxScaler { ranges }
    }

    pub fn scale_value(range: &ColumnRange, v: f64) -> f64 {
        let span = range.max - range.min;
        if span > 0.0 {
            ((v - range.min) / span).clamp(0.0, 1.0)
        } else {
            0.0
        }
    }

    pub fn transform(&self, ds: &Dataset) -> Result<Dataset> {
        if self.ranges.len() != ds.n_features() {
            return Err(Error::Usage(format!(
                "scaler fitted on {} columns applied to {}",
                self.ranges.len(),
                ds.n_features()
            )));
        }
        let mut out = ds.clone();
        let d = ds.n_features();
        for (k, v) in out.values_mut().iter_mut().enumerate() {
            *v = Self::scale_value(&self.ranges[k % d], *v);
        }
        out.provenance.scaler_params = self.ranges.clone();
        Ok(out)
    }

    pub fn fit_transform(ds: &Dataset) -> (Self, Dataset) {
        let s = Self::fit(ds);
        let out = s.transform(ds).expect("fitted on the same width");
        (s, out)
    }
}
