use std::fmt::Write as _;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evo::{optimize, Bounds, EvoConfig, OptResult};
use crate::functions::TestFunction;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchSummary {
    pub function: String,
    pub dims: usize,
    pub config: EvoConfig,
    pub best_nel: f64,
    pub best_position: Vec<f64>,
    pub evaluations_used: usize,
    pub non_finite_evaluations: usize,
    pub generations: usize,
    pub elapsed_seconds: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchRun {
    pub summary: BenchSummary,
    pub result: OptResult,
}

impl BenchRun {
    /// `iteration,best_nel`, iteration 0 being the initial population.
    pub fn history_csv(&self) -> String {
        let mut out = String::from("iteration,best_nel\n");
        for (i, v) in self.result.history.iter().enumerate() {
            let _ = writeln!(out, "{i},{v:e}");
        }
        out
    }

    pub fn summary_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.summary)?)
    }
}

/// Minimize a named test function over its standard box in `dims`
/// dimensions.
pub fn bench(function: TestFunction, dims: usize, config: &EvoConfig) -> Result<BenchRun> {
    if dims == 0 {
        return Err(Error::Usage("dims must be at least 1".into()));
    }
    let (lo, hi) = function.domain();
    let bounds = Bounds::uniform(dims, lo, hi)?;
    let start = Instant::now();
    let result = optimize(|x| function.eval(x), &bounds, config)?;
    let summary = BenchSummary {
        function: function.name().to_string(),
        dims,
        config: config.clone(),
        best_nel: result.best_nel,
        best_position: result.best_position.clone(),
        evaluations_used: result.evaluations_used,
        non_finite_evaluations: result.non_finite_evaluations,
        generations: result.history.len() - 1,
        elapsed_seconds: start.elapsed().as_secs_f64(),
    };
    Ok(BenchRun { summary, result })
}

/// Middle value (mean of the two middle values for even lengths).
pub fn median(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    Some(if n % 2 == 1 { v[n / 2] } else { (v[n / 2 - 1] + v[n / 2]) / 2.0 })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn history_csv_shape() {
        let run = bench(TestFunction::Sphere, 2, &EvoConfig::new(6, 60, 1)).unwrap();
        let csv = run.history_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "iteration,best_nel");
        assert_eq!(lines.len(), run.result.history.len() + 1);
        assert!(lines[1].starts_with("0,"));
        assert_eq!(run.summary.generations + 1, run.result.history.len());
    }

    #[test]
    fn zero_dims_rejected() {
        assert!(matches!(bench(TestFunction::Sphere, 0, &EvoConfig::default()), Err(Error::Usage(_))));
    }

    #[test]
    fn median_even_odd() {
        assert_eq!(median(&[3.0, 1.0, 2.0]), Some(2.0));
        assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]), Some(2.5));
        assert_eq!(median(&[]), None);
    }
}
