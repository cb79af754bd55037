//! Decay-inspired position updates.
//!
//! Unstable particles (NEL above the energy barrier) emit two candidates:
//! alpha + gamma decay when their stability level beats a random bound,
//! otherwise the two beta decays. Stable particles take a bounded random
//! walk.

use rand::seq::index;
use rand::Rng;

use super::{stability_level, Bounds, Particle, PopulationStats};

/// Lower bound on the stability level used as a divisor.
pub const DIVISION_GUARD: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Decay {
    Alpha,
    Gamma,
    BetaCentroid,
    BetaNeighbor,
    StableWalk,
}

/// `x` with the coordinates listed in `dims` replaced by those of `source`.
pub fn copy_dimensions(x: &[f64], source: &[f64], dims: &[usize]) -> Vec<f64> {
    let mut out = x.to_vec();
    for &d in dims {
        out[d] = source[d];
    }
    out
}

/// `x + (tau1 ⊙ best - tau2 ⊙ centroid) / max(sl, guard)`.
pub fn beta_decay_centroid(
    x: &[f64],
    best: &[f64],
    centroid: &[f64],
    tau1: &[f64],
    tau2: &[f64],
    sl: f64,
) -> Vec<f64> {
    let div = sl.max(DIVISION_GUARD);
    (0..x.len())
        .map(|d| x[d] + (tau1[d] * best[d] - tau2[d] * centroid[d]) / div)
        .collect()
}

/// `x + tau3 ⊙ best - tau4 ⊙ neighbors`.
pub fn beta_decay_neighbor(
    x: &[f64],
    best: &[f64],
    neighbors: &[f64],
    tau3: &[f64],
    tau4: &[f64],
) -> Vec<f64> {
    (0..x.len())
        .map(|d| x[d] + tau3[d] * best[d] - tau4[d] * neighbors[d])
        .collect()
}

/// `x + tau ⊙ (hi - lo) · scale · sign`, with `signs` in {-1, +1}.
pub fn stable_walk(x: &[f64], bounds: &Bounds, tau: &[f64], signs: &[f64], scale: f64) -> Vec<f64> {
    (0..x.len())
        .map(|d| x[d] + tau[d] * (bounds.hi()[d] - bounds.lo()[d]) * scale * signs[d])
        .collect()
}

fn uniform_vec<R: Rng + ?Sized>(rng: &mut R, dims: usize) -> Vec<f64> {
    (0..dims).map(|_| rng.random::<f64>()).collect()
}

fn random_subset<R: Rng + ?Sized>(rng: &mut R, dims: usize) -> Vec<usize> {
    let size = rng.random_range(1..=dims);
    index::sample(rng, dims, size).into_vec()
}

/// Candidate positions emitted by particle `i`, already clamped to `bounds`.
pub fn generate_candidates<R: Rng + ?Sized>(
    population: &[Particle],
    i: usize,
    stats: &PopulationStats,
    x_ng: &[f64],
    bounds: &Bounds,
    stable_step_scale: f64,
    rng: &mut R,
) -> Vec<(Decay, Vec<f64>)> {
    let me = &population[i];
    let x = &me.position;
    let best = &population[stats.best_index].position;
    let dims = x.len();

    let mut out = if me.nel > stats.eb {
        let sl = stability_level(me.nel, stats);
        let stability_bound: f64 = rng.random();
        if sl > stability_bound {
            let a = random_subset(rng, dims);
            let g = random_subset(rng, dims);
            vec![
                (Decay::Alpha, copy_dimensions(x, best, &a)),
                (Decay::Gamma, copy_dimensions(x, x_ng, &g)),
            ]
        } else {
            let t1 = uniform_vec(rng, dims);
            let t2 = uniform_vec(rng, dims);
            let t3 = uniform_vec(rng, dims);
            let t4 = uniform_vec(rng, dims);
            vec![
                (
                    Decay::BetaCentroid,
                    beta_decay_centroid(x, best, &stats.x_cp, &t1, &t2, sl),
                ),
                (
                    Decay::BetaNeighbor,
                    beta_decay_neighbor(x, best, x_ng, &t3, &t4),
                ),
            ]
        }
    } else {
        let tau = uniform_vec(rng, dims);
        let signs: Vec<f64> = (0..dims)
            .map(|_| if rng.random::<bool>() { 1.0 } else { -1.0 })
            .collect();
        vec![(
            Decay::StableWalk,
            stable_walk(x, bounds, &tau, &signs, stable_step_scale),
        )]
    };

    for (_, c) in &mut out {
        bounds.clamp(c);
    }
    out
}
