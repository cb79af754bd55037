//! Synthetic data for examples, tests and benchmarks.

use std::io::Write;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::data::{Dataset, DatasetKind};
use crate::error::{Error, Result};
use crate::rng::substream;

/// Number of label-bearing columns in [`planted_rule`] data.
pub const PLANTED_INFORMATIVE: usize = 3;

/// `n` rows: three informative columns followed by `n_noise` uniform noise
/// columns. The label is the majority vote of `x_j > 0.5` over the
/// informative columns, flipped with probability `label_noise`.
pub fn planted_rule(n: usize, n_noise: usize, label_noise: f64, seed: u64) -> Result<Dataset> {
    let mut rng = substream(seed, &[0x9a]);
    let d = PLANTED_INFORMATIVE + n_noise;
    let mut rows = Vec::with_capacity(n);
    let mut labels = Vec::with_capacity(n);
    for _ in 0..n {
        let row: Vec<f64> = (0..d).map(|_| rng.random::<f64>()).collect();
        let votes = row[..PLANTED_INFORMATIVE].iter().filter(|&&v| v > 0.5).count();
        let mut label = (votes * 2 > PLANTED_INFORMATIVE) as usize;
        if rng.random::<f64>() < label_noise {
            label = 1 - label;
        }
        rows.push(row);
        labels.push(label);
    }
    let names = (0..d)
        .map(|j| if j < PLANTED_INFORMATIVE { format!("signal{j}") } else { format!("noise{}", j - PLANTED_INFORMATIVE) })
        .collect();
    Dataset::from_rows(&rows, labels)?.with_names(names, vec!["negative".into(), "positive".into()])
}

/// Gaussian clusters in `[0, 1]^d`, one per class, centered on random
/// points and clipped to the unit box.
pub fn blobs(n_per_class: usize, n_classes: usize, d: usize, spread: f64, seed: u64) -> Result<Dataset> {
    let mut rng = substream(seed, &[0xb1]);
    let centers: Vec<Vec<f64>> = (0..n_classes)
        .map(|_| (0..d).map(|_| rng.random_range(0.15..0.85)).collect())
        .collect();
    let mut rows = Vec::new();
    let mut labels = Vec::new();
    for (c, center) in centers.iter().enumerate() {
        for _ in 0..n_per_class {
            rows.push(center.iter().map(|&m| (m + spread * gaussian(&mut rng)).clamp(0.0, 1.0)).collect());
            labels.push(c);
        }
    }
    Dataset::from_rows(&rows, labels)
}

fn gaussian<R: Rng>(rng: &mut R) -> f64 {
    let u1: f64 = rng.random::<f64>().max(f64::MIN_POSITIVE);
    let u2: f64 = rng.random();
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

pub const DDOS_LABELS: &[&str] = &["BENIGN", "DrDoS_DNS", "DrDoS_LDAP", "Syn", "UDP-lag"];
pub const IDS2018_LABELS: &[&str] = &["Benign", "DDoS attacks-LOIC-HTTP", "DoS attacks-Hulk", "Bot"];

/// Write a CICFlowMeter-style CSV in the layout of `kind` with
/// `rows_per_class` rows for each entry of `labels`.
///
/// Numeric columns follow class-dependent log-normal scales so classes are
/// separable. Identifier columns hold IP/timestamp strings, a few rate
/// cells are `NaN`/`Infinity`/empty and some rows are exact duplicates.
pub fn write_flow_csv(
    path: &Path,
    kind: DatasetKind,
    labels: &[&str],
    rows_per_class: usize,
    seed: u64,
) -> Result<()> {
    if kind == DatasetKind::Generic {
        return Err(Error::Usage("flow CSVs need a CIC dataset kind".into()));
    }
    let mut rng = substream(seed, &[0xc5]);
    let header: Vec<String> = kind
        .registry()
        .iter()
        .map(|c| {
            let base = c.strip_suffix(".1").unwrap_or(c);
            if kind == DatasetKind::CicDdos2019 && *c != "Unnamed: 0" && *c != "Flow ID" {
                format!(" {base}")
            } else {
                base.to_string()
            }
        })
        .collect();
    let text_cols = ["flow id", "source ip", "destination ip", "src ip", "dst ip", "timestamp", "simillarhttp"];
    let d = header.len();
    let profiles: Vec<Vec<f64>> = labels
        .iter()
        .map(|_| (0..d).map(|_| rng.random_range(0.0..3.0)).collect())
        .collect();

    let mut records: Vec<Vec<String>> = Vec::new();
    let mut serial = 0u64;
    for (c, label) in labels.iter().enumerate() {
        for _ in 0..rows_per_class {
            let mut rec = Vec::with_capacity(d);
            for (j, name) in header.iter().enumerate() {
                let key = name.trim().to_ascii_lowercase();
                let cell = if key == "label" {
                    label.to_string()
                } else if key == "unnamed: 0" {
                    serial.to_string()
                } else if text_cols.contains(&key.as_str()) {
                    match key.as_str() {
                        "timestamp" => format!("2018-02-1{} 10:{:02}:{:02}", c % 10, rng.random_range(0..60), rng.random_range(0..60)),
                        "flow id" => format!("192.168.{}.{}-{}", c, rng.random_range(0..255), serial),
                        "simillarhttp" => "0".into(),
                        _ => format!("10.0.{}.{}", c, rng.random_range(1..255)),
                    }
                } else if key.ends_with("bytes/s") && rng.random::<f64>() < 0.02 {
                    ["NaN", "Infinity", ""][rng.random_range(0..3)].to_string()
                } else {
                    let v = (profiles[c][j] + 1.2 * gaussian(&mut rng)).exp() - 1.0;
                    format!("{}", v.max(0.0).round())
                };
                rec.push(cell);
            }
            serial += 1;
            records.push(rec);
        }
    }
    let n_dupes = records.len() / 50;
    for i in 0..n_dupes {
        let dup = records[i * 37 % records.len()].clone();
        records.push(dup);
    }
    records.shuffle(&mut rng);

    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = csv::Writer::from_writer(std::io::BufWriter::new(file));
    let io = |e: csv::Error| Error::io(path, std::io::Error::other(e));
    w.write_record(&header).map_err(io)?;
    for r in &records {
        w.write_record(r).map_err(io)?;
    }
    w.into_inner()
        .map_err(|e| Error::io(path, std::io::Error::other(e.to_string())))?
        .flush()
        .map_err(|e| Error::io(path, e))?;
    Ok(())
}
