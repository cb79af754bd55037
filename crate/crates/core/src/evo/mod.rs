//! Energy valley optimizer.
//!
//! Particles are real vectors inside a box; their fitness is the neutron
//! enrichment level (NEL), lower is more stable. Each generation computes
//! the population centroid and energy barrier (mean NEL), lets every
//! particle emit decay candidates, evaluates them, and keeps the best
//! `n_particles` of the union of old and new particles.

mod decay;
mod population;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::substream;

pub use decay::{
    beta_decay_centroid, beta_decay_neighbor, copy_dimensions, generate_candidates, stable_walk,
    Decay, DIVISION_GUARD,
};
pub use population::{
    merge_truncate, neighborhood, population_statistics, stability_level, Neighborhood,
    PopulationStats,
};

/// Per-dimension box constraints.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bounds {
    lo: Vec<f64>,
    hi: Vec<f64>,
}

impl Bounds {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        if lo.is_empty() {
            return Err(Error::Config("bounds need at least one dimension".into()));
        }
        if lo.len() != hi.len() {
            return Err(Error::Config(format!(
                "bounds dimension mismatch: {} lower vs {} upper",
                lo.len(),
                hi.len()
            )));
        }
        for (d, (l, h)) in lo.iter().zip(&hi).enumerate() {
            if !(l.is_finite() && h.is_finite() && l < h) {
                return Err(Error::Config(format!(
                    "bounds dimension {d}: need finite lo < hi, got [{l}, {h}]"
                )));
            }
        }
        Ok(Bounds { lo, hi })
    }

    /// The same `[lo, hi]` interval in every one of `dims` dimensions.
    pub fn uniform(dims: usize, lo: f64, hi: f64) -> Result<Self> {
        Bounds::new(vec![lo; dims], vec![hi; dims])
    }

    pub fn dims(&self) -> usize {
        self.lo.len()
    }

    pub fn lo(&self) -> &[f64] {
        &self.lo
    }

    pub fn hi(&self) -> &[f64] {
        &self.hi
    }

    pub fn clamp(&self, x: &mut [f64]) {
        for ((v, l), h) in x.iter_mut().zip(&self.lo).zip(&self.hi) {
            *v = v.clamp(*l, *h);
        }
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dims()
            && x
                .iter()
                .zip(&self.lo)
                .zip(&self.hi)
                .all(|((v, l), h)| *l <= *v && *v <= *h)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EvoConfig {
    pub n_particles: usize,
    /// Budget of objective evaluations.
    pub max_fes: usize,
    pub k_neighbors: usize,
    pub seed: u64,
    /// Fraction of the box width used by the stable-particle random walk.
    pub stable_step_scale: f64,
}

impl Default for EvoConfig {
    fn default() -> Self {
        EvoConfig::new(20, 1000, 0)
    }
}

impl EvoConfig {
    /// Config with the default neighborhood size `max(2, ceil(sqrt(n)))`
    /// (capped at `n - 1`) and step scale 0.1.
    pub fn new(n_particles: usize, max_fes: usize, seed: u64) -> Self {
        EvoConfig {
            n_particles,
            max_fes,
            k_neighbors: default_k(n_particles),
            seed,
            stable_step_scale: 0.1,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_particles < 2 {
            return Err(Error::Config(format!(
                "n_particles must be at least 2, got {}",
                self.n_particles
            )));
        }
        if self.max_fes < self.n_particles {
            return Err(Error::Config(format!(
                "max_fes ({}) is smaller than n_particles ({})",
                self.max_fes, self.n_particles
            )));
        }
        if self.k_neighbors == 0 || self.k_neighbors >= self.n_particles {
            return Err(Error::Config(format!(
                "k_neighbors must be in [1, {}), got {}",
                self.n_particles, self.k_neighbors
            )));
        }
        if !(self.stable_step_scale > 0.0 && self.stable_step_scale <= 1.0) {
            return Err(Error::Config(format!(
                "stable_step_scale must be in (0, 1], got {}",
                self.stable_step_scale
            )));
        }
        Ok(())
    }
}

fn default_k(n_particles: usize) -> usize {
    let k = ((n_particles as f64).sqrt().ceil() as usize).max(2);
    k.min(n_particles.saturating_sub(1)).max(1)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Particle {
    pub position: Vec<f64>,
    pub nel: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptResult {
    pub best_position: Vec<f64>,
    pub best_nel: f64,
    /// Best fitness after initialization and after every generation.
    pub history: Vec<f64>,
    pub evaluations_used: usize,
    /// Objective calls that returned NaN or an infinity.
    pub non_finite_evaluations: usize,
}

fn evaluate<F>(objective: &F, x: &[f64], non_finite: &mut usize) -> f64
where
    F: Fn(&[f64]) -> f64,
{
    let v = objective(x);
    if v.is_finite() {
        v
    } else {
        *non_finite += 1;
        f64::INFINITY
    }
}

fn evaluate_all<F>(objective: &F, positions: Vec<Vec<f64>>) -> (Vec<Particle>, usize)
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    let scored: Vec<(Particle, usize)> = positions
        .into_par_iter()
        .map(|position| {
            let mut bad = 0;
            let nel = evaluate(objective, &position, &mut bad);
            (Particle { position, nel }, bad)
        })
        .collect();
    let bad = scored.iter().map(|(_, b)| b).sum();
    (scored.into_iter().map(|(p, _)| p).collect(), bad)
}

fn sort_by_nel(pop: &mut [Particle]) {
    pop.sort_by(|a, b| a.nel.total_cmp(&b.nel));
}

/// Draw and evaluate the initial population, sorted by NEL (stable, so
/// equal fitness keeps draw order).
pub fn initialize_population<F>(
    config: &EvoConfig,
    bounds: &Bounds,
    objective: &F,
) -> Result<Vec<Particle>>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    initialize_counted(config, bounds, objective).map(|(p, _)| p)
}

fn initialize_counted<F>(
    config: &EvoConfig,
    bounds: &Bounds,
    objective: &F,
) -> Result<(Vec<Particle>, usize)>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    config.validate()?;
    let positions: Vec<Vec<f64>> = (0..config.n_particles)
        .map(|i| {
            let mut rng = substream(config.seed, &[0, i as u64]);
            bounds
                .lo()
                .iter()
                .zip(bounds.hi())
                .map(|(&l, &h)| rand::Rng::random_range(&mut rng, l..=h))
                .collect()
        })
        .collect();
    let (mut pop, bad) = evaluate_all(objective, positions);
    sort_by_nel(&mut pop);
    Ok((pop, bad))
}

/// Minimise `objective` over `bounds` until the evaluation budget is spent.
///
/// A generation is always completed once started, so the budget can be
/// overshot by at most one generation (two candidates per particle).
pub fn optimize<F>(objective: F, bounds: &Bounds, config: &EvoConfig) -> Result<OptResult>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    let (mut pop, mut non_finite) = initialize_counted(config, bounds, &objective)?;
    let mut evaluations = pop.len();
    let mut best = pop[0].clone();
    let mut history = vec![best.nel];

    let mut generation: u64 = 0;
    while evaluations < config.max_fes {
        generation += 1;
        let stats = population_statistics(&pop)?;
        let positions: Vec<Vec<f64>> = (0..pop.len())
            .into_par_iter()
            .map(|i| {
                let mut rng = substream(config.seed, &[generation, i as u64]);
                let hood = neighborhood(&pop, i, config.k_neighbors)?;
                Ok(generate_candidates(
                    &pop,
                    i,
                    &stats,
                    &hood.centroid,
                    bounds,
                    config.stable_step_scale,
                    &mut rng,
                )
                .into_iter()
                .map(|(_, x)| x)
                .collect::<Vec<_>>())
            })
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .flatten()
            .collect();

        evaluations += positions.len();
        let (fresh, bad) = evaluate_all(&objective, positions);
        non_finite += bad;
        pop = merge_truncate(pop, fresh, config.n_particles);

        if pop[0].nel < best.nel {
            best = pop[0].clone();
        }
        history.push(best.nel);
    }

    Ok(OptResult {
        best_position: best.position,
        best_nel: best.nel,
        history,
        evaluations_used: evaluations,
        non_finite_evaluations: non_finite,
    })
}
