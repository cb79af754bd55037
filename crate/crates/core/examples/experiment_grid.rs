//! The before/after feature-selection grid over two datasets and four
//! classifiers, on synthetic exports of both CIC layouts.
//!
//! ```text
//! cargo run --release --example experiment_grid
//! ```

use evofs::classifiers::{ClassifierSpec, ForestParams};
use evofs::data::DatasetKind;
use evofs::experiment::{run_experiment, DatasetSpec, ExperimentConfig};
use evofs::select::fs_evo_config;
use evofs::synth::{write_flow_csv, DDOS_LABELS, IDS2018_LABELS};

fn main() -> evofs::Result<()> {
    let dir = tempfile::tempdir().map_err(|e| evofs::Error::io(std::env::temp_dir(), e))?;
    let ddos = dir.path().join("ddos.csv");
    let ids = dir.path().join("ids2018.csv");
    write_flow_csv(&ddos, DatasetKind::CicDdos2019, DDOS_LABELS, 200, 1)?;
    write_flow_csv(&ids, DatasetKind::CseCicIds2018, IDS2018_LABELS, 200, 2)?;

    let config = ExperimentConfig {
        datasets: vec![
            DatasetSpec { name: "CIC-DDoS2019 (synthetic)".into(), kind: DatasetKind::CicDdos2019, paths: vec![ddos], cache: None },
            DatasetSpec { name: "CSE-CIC-IDS2018 (synthetic)".into(), kind: DatasetKind::CseCicIds2018, paths: vec![ids], cache: None },
        ],
        n_per_label: Some(150),
        classifiers: vec![
            ClassifierSpec::svm(),
            ClassifierSpec::RandomForest(ForestParams { n_trees: 25, ..Default::default() }),
            ClassifierSpec::cart(),
            ClassifierSpec::knn(),
        ],
        evo: fs_evo_config(10, 200, 0),
        output_dir: dir.path().join("results"),
        ..Default::default()
    };
    config.validate()?;
    println!("config digest {}", config.digest()?);

    let report = run_experiment(&config)?;
    print!("{}", report.to_csv()?);
    for e in &report.body.errors {
        println!("failed: {} {} fs={} ({})", e.dataset, e.model, e.fs_applied, e.message);
    }
    for t in &report.timings {
        println!("{} {} fs={} selection {:.2}s", t.dataset, t.model, t.fs_applied, t.fs_time);
    }
    let (json, table) = report.write(&config.output_dir)?;
    println!("\nwrote {} and {}", json.display(), table.display());
    Ok(())
}
