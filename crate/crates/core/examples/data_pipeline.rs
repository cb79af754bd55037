//! From CICFlowMeter CSV exports to a balanced, scaled train/test split.
//!
//! Writes a synthetic export in the CIC-DDoS2019 layout (or reads real
//! files if paths are given), then runs ingest, describe, preprocess,
//! downsample, scale, split and the binary cache round trip.
//!
//! ```text
//! cargo run --release --example data_pipeline
//! cargo run --release --example data_pipeline -- cic-ddos2019 path/to/*.csv
//! ```

use std::path::PathBuf;

use evofs::data::{downsample, ingest, preprocess, read_cache, split, write_cache, DatasetKind, MinMaxScaler, PreprocessOptions};
use evofs::experiment::describe;
use evofs::synth::{write_flow_csv, DDOS_LABELS};

fn main() -> evofs::Result<()> {
    let dir = tempfile::tempdir().map_err(|e| evofs::Error::io(std::env::temp_dir(), e))?;
    let args: Vec<String> = std::env::args().skip(1).collect();
    let (kind, paths) = if args.len() >= 2 {
        (args[0].parse()?, args[1..].iter().map(PathBuf::from).collect())
    } else {
        let a = dir.path().join("flows_a.csv");
        let b = dir.path().join("flows_b.csv");
        write_flow_csv(&a, DatasetKind::CicDdos2019, DDOS_LABELS, 600, 1)?;
        write_flow_csv(&b, DatasetKind::CicDdos2019, &DDOS_LABELS[..3], 300, 2)?;
        (DatasetKind::CicDdos2019, vec![a, b])
    };

    let raw = ingest(&paths, kind)?;
    let summary = describe(&raw);
    println!("{} rows x {} columns", summary.rows, summary.columns);
    println!("labels: {:?}", summary.class_counts);
    let with_missing: Vec<_> = summary.column_stats.iter().filter(|c| c.missing > 0).map(|c| (&c.name, c.missing)).collect();
    println!("columns with missing cells: {with_missing:?}");

    let clean = preprocess(&raw, kind, &PreprocessOptions { scale: false, ..Default::default() })?;
    println!("\nafter cleaning: {} rows, {} features", clean.n_rows(), clean.n_features());
    println!("dropped: {:?}", clean.provenance.dropped_columns);
    println!("class counts: {:?}", clean.class_counts());

    let balanced = downsample(&clean, Some(400), 0)?;
    println!("balanced (cap 400): {:?}", balanced.class_counts());
    let (_, scaled) = MinMaxScaler::fit_transform(&balanced);

    let pair = split(&scaled, 0.8, 0)?;
    println!("train {:?}\ntest  {:?}", pair.train.class_counts(), pair.test.class_counts());

    let cache = dir.path().join("prepared.evofs");
    write_cache(&scaled, &cache)?;
    let back = read_cache(&cache)?;
    assert_eq!(back, scaled);
    println!("\ncache round trip ok ({} bytes)", std::fs::metadata(&cache).map(|m| m.len()).unwrap_or(0));
    for stage in &back.provenance.row_counts {
        println!("  {:<12} {}", stage.stage, stage.rows);
    }
    Ok(())
}
