//! RBF-kernel soft-margin SVM trained by sequential minimal optimization.
//!
//! Binary machines solve the dual
//!
//! ```text
//! max  Σα − ½ ΣΣ αᵢαⱼ yᵢyⱼ K(xᵢ, xⱼ)   s.t.  0 ≤ α ≤ C,  Σ αᵢyᵢ = 0
//! ```
//!
//! with an error cache, the max-|Eᵢ − Eⱼ| second-choice heuristic and a
//! randomly rotated fallback scan. Training stops after a sweep with no
//! update, or when the sweep cap is hit (the model is then flagged as not
//! converged). Multiclass uses one-vs-rest; the largest decision value
//! wins, ties to the lowest class id.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::SvmParams;
use crate::data::Dataset;
use crate::rng::{substream, StreamRng};

/// Precompute the full Gram matrix up to this many rows.
const DENSE_KERNEL_LIMIT: usize = 3000;

pub fn rbf(a: &[f64], b: &[f64], gamma: f64) -> f64 {
    let d2: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
    (-gamma * d2).exp()
}

/// Kernel values over a training set, dense when small enough.
pub struct KernelMatrix<'a> {
    rows: &'a [f64],
    width: usize,
    n: usize,
    gamma: f64,
    dense: Option<Vec<f64>>,
}

impl<'a> KernelMatrix<'a> {
    pub fn new(rows: &'a [f64], width: usize, gamma: f64) -> Self {
        let n = rows.len().checked_div(width).unwrap_or(0);
        let mut k = KernelMatrix {
            rows,
            width,
            n,
            gamma,
            dense: None,
        };
        if n <= DENSE_KERNEL_LIMIT {
            let dense: Vec<f64> = (0..n * n)
                .into_par_iter()
                .map(|ij| k.compute(ij / n, ij % n))
                .collect();
            k.dense = Some(dense);
        }
        k
    }

    fn row(&self, i: usize) -> &[f64] {
        &self.rows[i * self.width..(i + 1) * self.width]
    }

    fn compute(&self, i: usize, j: usize) -> f64 {
        rbf(self.row(i), self.row(j), self.gamma)
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        match &self.dense {
            Some(m) => m[i * self.n + j],
            None => self.compute(i, j),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SmoSolution {
    pub alphas: Vec<f64>,
    pub bias: f64,
    pub sweeps: usize,
    pub converged: bool,
}

struct Smo<'k, 'a> {
    kernel: &'k KernelMatrix<'a>,
    y: &'k [f64],
    c: f64,
    alphas: Vec<f64>,
    errors: Vec<f64>,
    bias: f64,
}

impl Smo<'_, '_> {
    fn take_step(&mut self, i: usize, j: usize) -> bool {
        if i == j {
            return false;
        }
        let (yi, yj) = (self.y[i], self.y[j]);
        let (ai, aj) = (self.alphas[i], self.alphas[j]);
        let (ei, ej) = (self.errors[i], self.errors[j]);
        let c = self.c;
        let (lo, hi) = if yi != yj {
            ((aj - ai).max(0.0), (c + aj - ai).min(c))
        } else {
            ((ai + aj - c).max(0.0), (ai + aj).min(c))
        };
        if hi - lo < 1e-12 {
            return false;
        }
        let kii = self.kernel.get(i, i);
        let kjj = self.kernel.get(j, j);
        let kij = self.kernel.get(i, j);
        let eta = 2.0 * kij - kii - kjj;
        if eta >= 0.0 {
            return false;
        }
        let aj_new = (aj - yj * (ei - ej) / eta).clamp(lo, hi);
        if (aj_new - aj).abs() < 1e-8 * (aj_new + aj + 1e-8) {
            return false;
        }
        let ai_new = (ai + yi * yj * (aj - aj_new)).clamp(0.0, c);
        let dai = ai_new - ai;
        let daj = aj_new - aj;

        let b1 = self.bias - ei - yi * dai * kii - yj * daj * kij;
        let b2 = self.bias - ej - yi * dai * kij - yj * daj * kjj;
        let b_new = if ai_new > 0.0 && ai_new < c {
            b1
        } else if aj_new > 0.0 && aj_new < c {
            b2
        } else {
            (b1 + b2) / 2.0
        };
        let db = b_new - self.bias;

        for k in 0..self.errors.len() {
            self.errors[k] +=
                yi * dai * self.kernel.get(i, k) + yj * daj * self.kernel.get(j, k) + db;
        }
        self.alphas[i] = ai_new;
        self.alphas[j] = aj_new;
        self.bias = b_new;
        true
    }

    fn examine(&mut self, i: usize, tol: f64, rng: &mut StreamRng) -> bool {
        let r = self.y[i] * self.errors[i];
        let violates = (r < -tol && self.alphas[i] < self.c) || (r > tol && self.alphas[i] > 0.0);
        if !violates {
            return false;
        }
        let n = self.alphas.len();
        let ei = self.errors[i];
        let mut best = None;
        let mut gap = -1.0;
        for j in 0..n {
            if j != i {
                let g = (ei - self.errors[j]).abs();
                if g > gap {
                    gap = g;
                    best = Some(j);
                }
            }
        }
        if let Some(j) = best {
            if self.take_step(i, j) {
                return true;
            }
        }
        let offset = rng.random_range(0..n);
        (0..n).any(|s| {
            let j = (offset + s) % n;
            Some(j) != best && self.take_step(i, j)
        })
    }
}

/// Solve one binary dual problem. Labels must be ±1.
pub fn smo_solve(
    kernel: &KernelMatrix<'_>,
    y: &[f64],
    c: f64,
    tolerance: f64,
    max_sweeps: usize,
    rng: &mut StreamRng,
) -> SmoSolution {
    let mut smo = Smo {
        kernel,
        y,
        c,
        alphas: vec![0.0; y.len()],
        errors: y.iter().map(|v| -v).collect(),
        bias: 0.0,
    };
    let mut sweeps = 0;
    let mut converged = false;
    while sweeps < max_sweeps {
        sweeps += 1;
        let mut changed = 0;
        for i in 0..y.len() {
            if smo.examine(i, tolerance, rng) {
                changed += 1;
            }
        }
        if changed == 0 {
            converged = true;
            break;
        }
    }
    SmoSolution {
        alphas: smo.alphas,
        bias: smo.bias,
        sweeps,
        converged,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinaryMachine {
    /// `(support vector index, αᵢ·yᵢ)`.
    pub coef: Vec<(usize, f64)>,
    pub bias: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvmModel {
    pub gamma: f64,
    pub n_features: usize,
    /// Union of support vectors, row-major.
    pub vectors: Vec<f64>,
    /// One machine per class; `None` when the class had no positive or no
    /// negative training rows.
    pub machines: Vec<Option<BinaryMachine>>,
    /// Predicted when no machine exists.
    pub fallback_class: usize,
    pub converged: bool,
}

impl SvmModel {
    pub fn fit(data: &Dataset, params: &SvmParams, seed: u64) -> SvmModel {
        let n = data.n_rows();
        let d = data.n_features();
        let gamma = params.gamma.unwrap_or(1.0 / d.max(1) as f64);
        let max_sweeps = params.max_passes.unwrap_or(10 * n).max(1);
        let kernel = KernelMatrix::new(data.values(), d, gamma);
        let counts = data.class_counts();
        let fallback_class = super::argmax_count(&counts);

        let solved: Vec<Option<SmoSolution>> = (0..data.n_classes())
            .into_par_iter()
            .map(|class| {
                if counts[class] == 0 || counts[class] == n {
                    return None;
                }
                let y: Vec<f64> = data
                    .labels()
                    .iter()
                    .map(|&l| if l == class { 1.0 } else { -1.0 })
                    .collect();
                let mut rng = substream(seed, &[class as u64]);
                Some(smo_solve(&kernel, &y, params.c, params.tolerance, max_sweeps, &mut rng))
            })
            .collect();

        let mut used = vec![usize::MAX; n];
        let mut vectors = Vec::new();
        let mut n_vectors = 0;
        let mut converged = true;
        let machines = solved
            .into_iter()
            .enumerate()
            .map(|(class, sol)| {
                let sol = sol?;
                converged &= sol.converged;
                let coef = sol
                    .alphas
                    .iter()
                    .enumerate()
                    .filter(|(_, &a)| a > 0.0)
                    .map(|(i, &a)| {
                        if used[i] == usize::MAX {
                            used[i] = n_vectors;
                            n_vectors += 1;
                            vectors.extend_from_slice(data.row(i));
                        }
                        let y = if data.labels()[i] == class { 1.0 } else { -1.0 };
                        (used[i], a * y)
                    })
                    .collect();
                Some(BinaryMachine {
                    coef,
                    bias: sol.bias,
                })
            })
            .collect();

        SvmModel {
            gamma,
            n_features: d,
            vectors,
            machines,
            fallback_class,
            converged,
        }
    }

    pub fn decision_values(&self, x: &[f64]) -> Vec<Option<f64>> {
        let d = self.n_features;
        let k: Vec<f64> = self
            .vectors
            .chunks_exact(d.max(1))
            .map(|sv| rbf(sv, x, self.gamma))
            .collect();
        self.machines
            .iter()
            .map(|m| {
                m.as_ref()
                    .map(|m| m.coef.iter().map(|&(s, w)| w * k[s]).sum::<f64>() + m.bias)
            })
            .collect()
    }

    pub fn predict(&self, x: &[f64]) -> usize {
        let mut best: Option<(usize, f64)> = None;
        for (class, v) in self.decision_values(x).into_iter().enumerate() {
            if let Some(v) = v {
                if best.is_none_or(|(_, b)| v > b) {
                    best = Some((class, v));
                }
            }
        }
        best.map_or(self.fallback_class, |(c, _)| c)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn xor() -> Dataset {
        Dataset::from_rows(
            &[vec![0.0, 0.0], vec![1.0, 1.0], vec![0.0, 1.0], vec![1.0, 0.0]],
            vec![0, 0, 1, 1],
        )
        .unwrap()
    }

    #[test]
    fn xor_corners_separated() {
        let ds = xor();
        let params = SvmParams { c: 10.0, gamma: Some(1.0), ..Default::default() };
        let m = SvmModel::fit(&ds, &params, 0);
        assert!(m.converged);
        for (i, row) in ds.rows().enumerate() {
            assert_eq!(m.predict(row), ds.labels()[i]);
        }
    }

    #[test]
    fn duals_in_box() {
        let rows: Vec<Vec<f64>> = (0..30).map(|i| vec![(i as f64 * 0.9).sin(), (i as f64 * 0.4).cos()]).collect();
        let ds = Dataset::from_rows(&rows, (0..30).map(|i| (i % 3) as usize).collect()).unwrap();
        let k = KernelMatrix::new(ds.values(), 2, 3.0);
        let y: Vec<f64> = ds.labels().iter().map(|&l| if l == 0 { 1.0 } else { -1.0 }).collect();
        let sol = smo_solve(&k, &y, 0.5, 1e-3, 1000, &mut substream(1, &[]));
        assert!(sol.alphas.iter().all(|&a| (0.0..=0.5).contains(&a)));
        let balance: f64 = sol.alphas.iter().zip(&y).map(|(a, y)| a * y).sum();
        assert!(balance.abs() < 1e-9);
    }

    #[test]
    fn single_class_falls_back() {
        let ds = Dataset::from_rows(&[vec![0.0], vec![1.0]], vec![0, 0]).unwrap();
        let m = SvmModel::fit(&ds, &SvmParams::default(), 0);
        assert_eq!(m.predict(&[0.5]), 0);
    }

    #[test]
    fn sweep_cap_flags_non_convergence() {
        let rows: Vec<Vec<f64>> = (0..40).map(|i| vec![(i as f64 * 0.37).sin()]).collect();
        let ds = Dataset::from_rows(&rows, (0..40).map(|i| (i % 2) as usize).collect()).unwrap();
        let params = SvmParams { c: 100.0, gamma: Some(50.0), max_passes: Some(1), ..Default::default() };
        let m = SvmModel::fit(&ds, &params, 0);
        assert!(!m.converged);
    }
}
