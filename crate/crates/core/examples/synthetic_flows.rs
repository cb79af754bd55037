//! Write synthetic CICFlowMeter-style exports for trying the `evofs` CLI
//! without the real datasets.
//!
//! ```text
//! cargo run --example synthetic_flows -- out_dir [rows_per_class]
//! ```

use std::path::PathBuf;

use evofs::data::DatasetKind;
use evofs::synth::{write_flow_csv, DDOS_LABELS, IDS2018_LABELS};

fn main() -> evofs::Result<()> {
    let mut args = std::env::args().skip(1);
    let dir = PathBuf::from(args.next().unwrap_or_else(|| "synthetic_flows".into()));
    let rows: usize = args.next().map_or(Ok(500), |s| s.parse()).map_err(|e| evofs::Error::Usage(format!("rows_per_class: {e}")))?;
    std::fs::create_dir_all(&dir).map_err(|e| evofs::Error::io(&dir, e))?;

    let files = [
        ("ddos_day1.csv", DatasetKind::CicDdos2019, DDOS_LABELS, 1),
        ("ddos_day2.csv", DatasetKind::CicDdos2019, &DDOS_LABELS[..3], 2),
        ("ids2018_wed.csv", DatasetKind::CseCicIds2018, IDS2018_LABELS, 3),
    ];
    for (name, kind, labels, seed) in files {
        let path = dir.join(name);
        write_flow_csv(&path, kind, labels, rows, seed)?;
        println!("{} ({kind}, {} classes x {rows} rows)", path.display(), labels.len());
    }
    Ok(())
}
