//! Wrapper feature selection on a dataset with a planted rule.
//!
//! Three columns decide the label, five are noise. The optimizer searches
//! masks, and the result is compared against brute force over all 255
//! nonempty masks.
//!
//! ```text
//! cargo run --release --example feature_selection
//! ```

use evofs::classifiers::ClassifierSpec;
use evofs::select::{exhaustive_best, fs_evo_config, select_features_with, CostWeights, FitnessEvaluator, FitnessOptions};
use evofs::synth::planted_rule;

fn main() -> evofs::Result<()> {
    let data = planted_rule(600, 5, 0.0, 1)?;
    println!("features: {:?}", data.feature_names());

    let spec = ClassifierSpec::Knn { k: 3 };
    let weights = CostWeights::default();
    let fitness = FitnessOptions::default();

    let evaluator = FitnessEvaluator::new(&data, &spec, weights, &fitness)?;
    let (best_mask, best_cost) = exhaustive_best(&evaluator)?;
    println!("exhaustive best: {:?} cost {best_cost:.4}", best_mask.indices());

    for seed in 0..5 {
        let r = select_features_with(&data, &spec, weights, &fs_evo_config(20, 1500, seed), &fitness)?;
        println!(
            "seed {seed}: {:?} cost {:.4} accuracy {:.4} ({} evaluations)",
            r.selected_names, r.cost, r.inner_metrics.accuracy, r.opt.evaluations_used
        );
    }

    // cost terms beyond accuracy, plus a small penalty on subset size
    let weights = CostWeights::new(1.0, 0.5, 0.5, 0.05)?;
    let r = select_features_with(&data, &ClassifierSpec::cart(), weights, &fs_evo_config(20, 1500, 3), &fitness)?;
    println!("\nwith FPR/FNR and size terms (CART):\n{}", r.to_json()?);
    Ok(())
}
