use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::data::preprocess::{parse_cell, Cell};
use crate::data::schema::{column_key, LABEL_COLUMN};
use crate::data::RawTable;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColumnStats {
    pub name: String,
    pub numeric: usize,
    /// Empty, NaN or infinite cells.
    pub missing: usize,
    pub text: usize,
    pub min: Option<f64>,
    pub max: Option<f64>,
    pub mean: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Description {
    pub kind: String,
    pub rows: usize,
    pub columns: usize,
    /// Raw label spelling → row count.
    pub class_counts: BTreeMap<String, usize>,
    pub column_stats: Vec<ColumnStats>,
}

/// Exploratory summary of a raw table, before any cleaning.
pub fn describe(raw: &RawTable) -> Description {
    let label = raw.column_index(LABEL_COLUMN);
    let mut class_counts = BTreeMap::new();
    if let Some(l) = label {
        for row in &raw.rows {
            *class_counts.entry(row[l].trim().to_string()).or_insert(0) += 1;
        }
    }
    let column_stats = raw
        .columns
        .iter()
        .enumerate()
        .filter(|(_, name)| column_key(name) != column_key(LABEL_COLUMN))
        .map(|(j, name)| {
            let mut s = ColumnStats {
                name: name.clone(),
                numeric: 0,
                missing: 0,
                text: 0,
                min: None,
                max: None,
                mean: None,
            };
            let mut sum = 0.0;
            for row in &raw.rows {
                match parse_cell(&row[j]) {
                    Cell::Value(v) => {
                        s.numeric += 1;
                        sum += v;
                        s.min = Some(s.min.map_or(v, |m: f64| m.min(v)));
                        s.max = Some(s.max.map_or(v, |m: f64| m.max(v)));
                    }
                    Cell::Missing => s.missing += 1,
                    Cell::Text => s.text += 1,
                }
            }
            if s.numeric > 0 {
                s.mean = Some(sum / s.numeric as f64);
            }
            s
        })
        .collect();
    Description {
        kind: raw.kind.to_string(),
        rows: raw.n_rows(),
        columns: raw.columns.len(),
        class_counts,
        column_stats,
    }
}
