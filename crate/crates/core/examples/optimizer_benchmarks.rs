//! Energy valley optimizer on the standard test functions.
//!
//! ```text
//! cargo run --release --example optimizer_benchmarks
//! ```

use evofs::evo::{optimize, Bounds, EvoConfig};
use evofs::experiment::{bench, median};
use evofs::functions::TestFunction;

fn main() -> evofs::Result<()> {
    println!("function    dims  median best_nel  (10 seeds, 30 particles, 5000 evaluations)");
    for function in [TestFunction::Sphere, TestFunction::Rastrigin, TestFunction::Rosenbrock] {
        for dims in [2, 10] {
            let finals: Vec<f64> = (0..10)
                .map(|seed| bench(function, dims, &EvoConfig::new(30, 5000, seed)).map(|r| r.summary.best_nel))
                .collect::<evofs::Result<_>>()?;
            println!("{:<11} {dims:>4}  {:>15.3e}", function.name(), median(&finals).unwrap());
        }
    }

    // convergence of one run, every 20th generation
    let run = bench(TestFunction::Sphere, 10, &EvoConfig::new(30, 5000, 7))?;
    println!("\nsphere d=10 seed 7:");
    for (generation, best) in run.result.history.iter().enumerate().step_by(20) {
        println!("  generation {generation:>3}: {best:.3e}");
    }
    println!("  ({} evaluations, {:.3}s)", run.summary.evaluations_used, run.summary.elapsed_seconds);

    // any closure over a box works as an objective
    let shifted = |x: &[f64]| (x[0] - 1.5).powi(2) + (x[1] + 0.5).powi(2) + 3.0;
    let bounds = Bounds::new(vec![-4.0, -4.0], vec![4.0, 4.0])?;
    let r = optimize(shifted, &bounds, &EvoConfig::new(20, 2000, 1))?;
    println!(
        "\nshifted bowl: best {:.6} at ({:.4}, {:.4})",
        r.best_nel, r.best_position[0], r.best_position[1]
    );
    Ok(())
}
