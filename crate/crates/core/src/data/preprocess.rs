use std::collections::{BTreeMap, HashMap, HashSet};

use serde::{Deserialize, Serialize};

use super::ingest::RawTable;
use super::scale::MinMaxScaler;
use super::schema::{column_key, DatasetKind, LABEL_COLUMN};
use super::{Dataset, Provenance};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "method")]
pub enum Imputation {
    /// Per-column median of observed values.
    Median,
    /// Mean of the `k` nearest rows (Euclidean over co-observed, range
    /// normalised columns) that observe the column.
    KNearest { k: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PreprocessOptions {
    pub imputation: Imputation,
    /// Min-max scale at the end. Pipelines that scale after balancing
    /// turn this off and use [`MinMaxScaler`] themselves.
    pub scale: bool,
    /// Dropped in addition to the kind's identifier columns.
    pub drop_columns: Vec<String>,
}

impl Default for PreprocessOptions {
    fn default() -> Self {
        PreprocessOptions {
            imputation: Imputation::Median,
            scale: true,
            drop_columns: Vec::new(),
        }
    }
}

pub(crate) fn parse_cell(cell: &str) -> Cell {
    let t = cell.trim();
    if t.is_empty() {
        return Cell::Missing;
    }
    match t.to_ascii_lowercase().as_str() {
        "nan" | "inf" | "+inf" | "-inf" | "infinity" | "+infinity" | "-infinity" => {
            return Cell::Missing
        }
        _ => {}
    }
    match t.parse::<f64>() {
        Ok(v) if v.is_finite() => Cell::Value(v),
        Ok(_) => Cell::Missing,
        Err(_) => Cell::Text,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum Cell {
    Value(f64),
    Missing,
    Text,
}

fn median(values: &mut [f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    values.sort_by(f64::total_cmp);
    let n = values.len();
    Some(if n % 2 == 1 {
        values[n / 2]
    } else {
        (values[n / 2 - 1] + values[n / 2]) / 2.0
    })
}

/// Turn a raw table into a clean numeric dataset.
///
/// Steps, each recorded in the provenance: drop identifier columns, parse
/// numbers (`Infinity`, `NaN` and empty cells become missing), impute,
/// drop exact duplicate rows, encode labels by first appearance, and
/// optionally min-max scale.
pub fn preprocess(raw: &RawTable, kind: DatasetKind, options: &PreprocessOptions) -> Result<Dataset> {
    let origin = raw.sources.first().cloned().unwrap_or_default();
    let mut prov = Provenance {
        kind: Some(kind),
        sources: raw.sources.clone(),
        ..Default::default()
    };
    prov.stage("ingested", raw.n_rows());

    let label_col = raw.column_index(LABEL_COLUMN).ok_or_else(|| Error::Schema {
        path: origin.clone(),
        message: "no Label column".into(),
    })?;

    let drop_keys: HashSet<String> = kind
        .drop_list()
        .iter()
        .map(|c| column_key(c))
        .chain(options.drop_columns.iter().map(|c| column_key(c)))
        .collect();
    let mut feature_cols = Vec::new();
    for (j, name) in raw.columns.iter().enumerate() {
        if j == label_col {
            continue;
        }
        if drop_keys.contains(&column_key(name)) {
            prov.dropped_columns.push(name.clone());
        } else {
            feature_cols.push(j);
        }
    }
    if !prov.dropped_columns.is_empty() {
        prov.note(format!("dropped identifier columns: {}", prov.dropped_columns.join(", ")));
    }

    // labels first, so rows without one never reach imputation
    let mut keep_rows = Vec::with_capacity(raw.n_rows());
    let mut unlabeled = 0;
    for (i, row) in raw.rows.iter().enumerate() {
        if row[label_col].trim().is_empty() {
            unlabeled += 1;
        } else {
            keep_rows.push(i);
        }
    }
    if unlabeled > 0 {
        prov.note(format!("dropped {unlabeled} rows with an empty label"));
    }

    let n = keep_rows.len();
    let d = feature_cols.len();
    let mut cells: Vec<Option<f64>> = vec![None; n * d];
    let mut text_counts = vec![0usize; d];
    let mut numeric_counts = vec![0usize; d];
    for (r, &i) in keep_rows.iter().enumerate() {
        for (c, &j) in feature_cols.iter().enumerate() {
            match parse_cell(&raw.rows[i][j]) {
                Cell::Value(v) => {
                    cells[r * d + c] = Some(v);
                    numeric_counts[c] += 1;
                }
                Cell::Missing => {}
                Cell::Text => text_counts[c] += 1,
            }
        }
    }
    for c in 0..d {
        if text_counts[c] > 0 && numeric_counts[c] == 0 {
            return Err(Error::Schema {
                path: origin,
                message: format!(
                    "column {:?} is non-numeric and not an identifier column",
                    raw.columns[feature_cols[c]]
                ),
            });
        }
        if text_counts[c] > 0 {
            prov.note(format!(
                "column {:?}: {} unparseable cells treated as missing",
                raw.columns[feature_cols[c]], text_counts[c]
            ));
        }
    }

    let names: Vec<String> = feature_cols.iter().map(|&j| raw.columns[j].clone()).collect();
    let values = impute(&cells, n, d, &names, options.imputation, &mut prov);

    // labels: trimmed, case-insensitive, ids by first appearance
    let mut label_ids: HashMap<String, usize> = HashMap::new();
    let mut class_names: Vec<String> = Vec::new();
    let mut labels = Vec::with_capacity(n);
    for &i in &keep_rows {
        let raw_label = raw.rows[i][label_col].trim();
        let id = *label_ids
            .entry(raw_label.to_uppercase())
            .or_insert_with(|| {
                class_names.push(raw_label.to_string());
                class_names.len() - 1
            });
        labels.push(id);
    }

    // exact duplicates, including the label
    let mut seen: HashSet<(Vec<u64>, usize)> = HashSet::with_capacity(n);
    let mut unique_values = Vec::with_capacity(values.len());
    let mut unique_labels = Vec::with_capacity(n);
    for r in 0..n {
        let row = &values[r * d..(r + 1) * d];
        let key = (row.iter().map(|v| v.to_bits()).collect::<Vec<_>>(), labels[r]);
        if seen.insert(key) {
            unique_values.extend_from_slice(row);
            unique_labels.push(labels[r]);
        }
    }
    let dups = n - unique_labels.len();
    prov.note(format!("removed {dups} duplicate rows"));
    prov.stage("deduplicated", unique_labels.len());

    if unique_labels.is_empty() {
        return Err(Error::Data("no rows left after cleaning".into()));
    }

    prov.label_map = class_names.clone();
    let mut ds = Dataset::new(unique_values, unique_labels, names, class_names)?;
    if options.scale {
        let (scaler, scaled) = MinMaxScaler::fit_transform(&ds);
        ds = scaled;
        prov.scaler_params = scaler.ranges;
        prov.note("min-max scaled every feature column to [0, 1]");
    }
    ds.provenance = prov;
    Ok(ds)
}

fn impute(
    cells: &[Option<f64>],
    n: usize,
    d: usize,
    names: &[String],
    method: Imputation,
    prov: &mut Provenance,
) -> Vec<f64> {
    let mut counts: BTreeMap<String, usize> = BTreeMap::new();
    let medians: Vec<f64> = (0..d)
        .map(|c| {
            let mut observed: Vec<f64> = (0..n).filter_map(|r| cells[r * d + c]).collect();
            median(&mut observed).unwrap_or(0.0)
        })
        .collect();

    let mut values: Vec<f64> = cells
        .iter()
        .enumerate()
        .map(|(k, v)| v.unwrap_or(medians[k % d]))
        .collect();

    let missing_rows: Vec<usize> = (0..n)
        .filter(|&r| (0..d).any(|c| cells[r * d + c].is_none()))
        .collect();

    if let Imputation::KNearest { k } = method {
        let k = k.max(1);
        // observed ranges for distance normalisation
        let ranges: Vec<(f64, f64)> = (0..d)
            .map(|c| {
                (0..n).filter_map(|r| cells[r * d + c]).fold(
                    (f64::INFINITY, f64::NEG_INFINITY),
                    |(lo, hi), v| (lo.min(v), hi.max(v)),
                )
            })
            .collect();
        let norm = |c: usize, v: f64| {
            let (lo, hi) = ranges[c];
            if hi > lo {
                (v - lo) / (hi - lo)
            } else {
                0.0
            }
        };
        for &r in &missing_rows {
            let mut dists: Vec<(f64, usize)> = (0..n)
                .filter(|&o| o != r)
                .filter_map(|o| {
                    let mut sum = 0.0;
                    let mut shared = 0;
                    for c in 0..d {
                        if let (Some(a), Some(b)) = (cells[r * d + c], cells[o * d + c]) {
                            let diff = norm(c, a) - norm(c, b);
                            sum += diff * diff;
                            shared += 1;
                        }
                    }
                    (shared > 0).then(|| ((sum / shared as f64).sqrt(), o))
                })
                .collect();
            dists.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
            for c in 0..d {
                if cells[r * d + c].is_some() {
                    continue;
                }
                let donors: Vec<f64> = dists
                    .iter()
                    .filter_map(|&(_, o)| cells[o * d + c])
                    .take(k)
                    .collect();
                if !donors.is_empty() {
                    values[r * d + c] = donors.iter().sum::<f64>() / donors.len() as f64;
                }
            }
        }
        prov.imputation = Some(format!("k-nearest rows (k={k})"));
    } else {
        prov.imputation = Some("column median".into());
    }

    for c in 0..d {
        let filled = (0..n).filter(|&r| cells[r * d + c].is_none()).count();
        if filled > 0 {
            counts.insert(names[c].clone(), filled);
        }
    }
    let total: usize = counts.values().sum();
    prov.note(format!(
        "imputed {total} missing cells in {} rows by {}",
        missing_rows.len(),
        prov.imputation.as_deref().unwrap_or("median")
    ));
    prov.imputed_counts = counts;
    values
}
