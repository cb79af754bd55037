//! The four classifiers behind one train/predict contract.
//!
//! ```text
//! cargo run --release --example classifiers
//! ```

use evofs::classifiers::{model_from_json, model_to_json, train, ClassifierSpec, ForestParams, SvmParams, TreeParams};
use evofs::data::split;
use evofs::metrics::{confusion_matrix, scores};
use evofs::synth::blobs;

fn main() -> evofs::Result<()> {
    let data = blobs(150, 4, 6, 0.12, 11)?;
    let pair = split(&data, 0.8, 0)?;
    println!("{} train rows, {} test rows, {} classes\n", pair.train.n_rows(), pair.test.n_rows(), data.n_classes());

    let specs = [
        ClassifierSpec::Knn { k: 5 },
        ClassifierSpec::Cart(TreeParams { max_depth: Some(8), ..Default::default() }),
        ClassifierSpec::RandomForest(ForestParams { n_trees: 50, ..Default::default() }),
        ClassifierSpec::Svm(SvmParams { c: 10.0, ..Default::default() }),
    ];
    println!("{:<7} {:>8} {:>9} {:>7} {:>7} {:>10} {:>10}", "model", "accuracy", "precision", "recall", "f1", "train s", "test s");
    for spec in &specs {
        let model = train(spec, &pair.train, 0)?;
        let (predicted, test_time) = model.predict_timed(&pair.test)?;
        let cm = confusion_matrix(pair.test.labels(), &predicted, data.n_classes())?;
        let m = scores(&cm)?;
        println!(
            "{:<7} {:>8.4} {:>9.4} {:>7.4} {:>7.4} {:>10.5} {:>10.5}",
            spec.name(),
            m.accuracy,
            m.precision_macro,
            m.recall_macro,
            m.f1_macro,
            model.train_time,
            test_time
        );
        if !model.converged {
            println!("        (solver hit its sweep cap)");
        }
    }

    // models serialize to versioned JSON and reload with identical predictions
    let tree = train(&ClassifierSpec::cart(), &pair.train, 0)?;
    let restored = model_from_json(&model_to_json(&tree)?)?;
    assert_eq!(tree.predict_dataset(&pair.test)?, restored.predict_dataset(&pair.test)?);
    println!("\nCART reloaded from JSON, predictions unchanged");
    Ok(())
}
