//! Standard test functions for optimizer benchmarking.

use std::f64::consts::PI;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::Error;

/// Sum of squares; minimum 0 at the origin.
pub fn sphere(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum()
}

/// Highly multimodal; minimum 0 at the origin.
pub fn rastrigin(x: &[f64]) -> f64 {
    10.0 * x.len() as f64
        + x.iter()
            .map(|v| v * v - 10.0 * (2.0 * PI * v).cos())
            .sum::<f64>()
}

/// Curved valley; minimum 0 at (1, ..., 1).
pub fn rosenbrock(x: &[f64]) -> f64 {
    x.windows(2)
        .map(|w| 100.0 * (w[1] - w[0] * w[0]).powi(2) + (1.0 - w[0]).powi(2))
        .sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TestFunction {
    Sphere,
    Rastrigin,
    Rosenbrock,
}

impl TestFunction {
    pub fn eval(self, x: &[f64]) -> f64 {
        match self {
            TestFunction::Sphere => sphere(x),
            TestFunction::Rastrigin => rastrigin(x),
            TestFunction::Rosenbrock => rosenbrock(x),
        }
    }

    /// Conventional search box.
    pub fn domain(self) -> (f64, f64) {
        match self {
            TestFunction::Sphere => (-5.0, 5.0),
            TestFunction::Rastrigin => (-5.12, 5.12),
            TestFunction::Rosenbrock => (-2.048, 2.048),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            TestFunction::Sphere => "sphere",
            TestFunction::Rastrigin => "rastrigin",
            TestFunction::Rosenbrock => "rosenbrock",
        }
    }
}

impl FromStr for TestFunction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "sphere" => Ok(TestFunction::Sphere),
            "rastrigin" => Ok(TestFunction::Rastrigin),
            "rosenbrock" => Ok(TestFunction::Rosenbrock),
            other => Err(Error::Usage(format!(
                "unknown test function {other:?} (expected sphere, rastrigin or rosenbrock)"
            ))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn known_minima() {
        assert_eq!(sphere(&[0.0; 4]), 0.0);
        assert_eq!(rastrigin(&[0.0; 4]), 0.0);
        assert_eq!(rosenbrock(&[1.0; 4]), 0.0);
        assert_eq!(sphere(&[1.0, 2.0]), 5.0);
    }

    #[test]
    fn parse_names() {
        assert_eq!("Sphere".parse::<TestFunction>().unwrap(), TestFunction::Sphere);
        assert!(matches!("ackley".parse::<TestFunction>(), Err(Error::Usage(_))));
    }
}
