//! Confusion matrices and macro-averaged scores.
//!
//! ```text
//! cargo run --example metrics
//! ```

use evofs::metrics::{confusion_matrix, f1_score, scores, scores_with, Averaging, ConfusionMatrix};

fn main() -> evofs::Result<()> {
    // binary: rows are true classes
    let binary = ConfusionMatrix { n_classes: 2, counts: vec![vec![40, 5], vec![5, 50]] };
    let m = scores(&binary)?;
    println!("binary: accuracy {:.4}, positive-class precision {:.6}", m.accuracy, m.per_class[1].precision);

    let y_true = [0, 0, 1, 1, 2, 2, 2, 0, 1, 2];
    let y_pred = [0, 1, 1, 1, 2, 0, 2, 0, 2, 2];
    let cm = confusion_matrix(&y_true, &y_pred, 3)?;
    print!("\n{}", cm.to_csv(&["benign".into(), "syn".into(), "udp".into()]));
    for avg in [Averaging::Macro, Averaging::Weighted] {
        let m = scores_with(&cm, avg)?;
        println!(
            "{avg:?}: precision {:.4} recall {:.4} f1 {:.4} fpr {:.4} fnr {:.4}",
            m.precision_macro, m.recall_macro, m.f1_macro, m.fpr_macro, m.fnr_macro
        );
    }

    println!("\nf1 from precision 0.9895 and recall 0.98941: {:.5}", f1_score(0.9895, 0.98941));
    Ok(())
}
