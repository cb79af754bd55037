use serde::{Deserialize, Serialize};

use super::Particle;
use crate::error::{Error, Result};

/// Population-level quantities shared by every particle's update.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PopulationStats {
    /// Coordinate-wise centroid of all particles.
    pub x_cp: Vec<f64>,
    /// Energy barrier: mean NEL of the population.
    pub eb: f64,
    pub best_index: usize,
    pub best_nel: f64,
    pub worst_nel: f64,
}

pub fn population_statistics(population: &[Particle]) -> Result<PopulationStats> {
    let first = population
        .first()
        .ok_or_else(|| Error::Usage("population statistics of an empty population".into()))?;
    let n = population.len() as f64;
    let dims = first.position.len();

    let mut x_cp = vec![0.0; dims];
    for p in population {
        for (c, v) in x_cp.iter_mut().zip(&p.position) {
            *c += v;
        }
    }
    x_cp.iter_mut().for_each(|c| *c /= n);

    let eb = population.iter().map(|p| p.nel).sum::<f64>() / n;

    let mut best_index = 0;
    let mut worst_nel = first.nel;
    for (i, p) in population.iter().enumerate() {
        if p.nel < population[best_index].nel {
            best_index = i;
        }
        if p.nel > worst_nel {
            worst_nel = p.nel;
        }
    }

    Ok(PopulationStats {
        x_cp,
        eb,
        best_index,
        best_nel: population[best_index].nel,
        worst_nel,
    })
}

/// Normalised position of `nel` between the best (0) and worst (1) NEL.
pub fn stability_level(nel: f64, stats: &PopulationStats) -> f64 {
    let span = stats.worst_nel - stats.best_nel;
    if span.is_nan() || span <= 0.0 || !span.is_finite() {
        return 0.0;
    }
    let sl = (nel - stats.best_nel) / span;
    if sl.is_nan() {
        0.0
    } else {
        sl.clamp(0.0, 1.0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Neighborhood {
    pub indices: Vec<usize>,
    /// Centroid of the neighbors (X_NG).
    pub centroid: Vec<f64>,
}

/// The `k` particles closest to particle `i` (excluding itself) by
/// Euclidean distance, ties broken by lower index.
pub fn neighborhood(population: &[Particle], i: usize, k: usize) -> Result<Neighborhood> {
    if i >= population.len() {
        return Err(Error::Usage(format!(
            "particle index {i} out of range for population of {}",
            population.len()
        )));
    }
    if k == 0 || k >= population.len() {
        return Err(Error::Usage(format!(
            "neighborhood size {k} must be in [1, {})",
            population.len()
        )));
    }
    let me = &population[i].position;
    let mut dist: Vec<(f64, usize)> = population
        .iter()
        .enumerate()
        .filter(|(j, _)| *j != i)
        .map(|(j, p)| {
            let d2: f64 = p
                .position
                .iter()
                .zip(me)
                .map(|(a, b)| (a - b) * (a - b))
                .sum();
            (d2, j)
        })
        .collect();
    dist.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let indices: Vec<usize> = dist.iter().take(k).map(|&(_, j)| j).collect();

    let mut centroid = vec![0.0; me.len()];
    for &j in &indices {
        for (c, v) in centroid.iter_mut().zip(&population[j].position) {
            *c += v;
        }
    }
    centroid.iter_mut().for_each(|c| *c /= k as f64);
    Ok(Neighborhood { indices, centroid })
}

/// Union of `old` and `fresh` sorted by NEL, truncated to `n`.
///
/// The sort is stable with `old` first, so on equal NEL older particles
/// win, then lower index.
pub fn merge_truncate(old: Vec<Particle>, fresh: Vec<Particle>, n: usize) -> Vec<Particle> {
    let mut all = old;
    all.extend(fresh);
    all.sort_by(|a, b| a.nel.total_cmp(&b.nel));
    all.truncate(n);
    all
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(position: &[f64], nel: f64) -> Particle {
        Particle {
            position: position.to_vec(),
            nel,
        }
    }

    #[test]
    fn stats_arithmetic_mean() {
        let s = population_statistics(&[p(&[0.0, 0.0], 1.0), p(&[2.0, 2.0], 3.0)]).unwrap();
        assert_eq!(s.x_cp, vec![1.0, 1.0]);
        assert_eq!(s.eb, 2.0);
        assert_eq!(s.best_index, 0);
        assert_eq!(s.worst_nel, 3.0);
    }

    #[test]
    fn stats_singleton() {
        let s = population_statistics(&[p(&[5.0], 7.0)]).unwrap();
        assert_eq!(s.x_cp, vec![5.0]);
        assert_eq!(s.eb, 7.0);
        assert_eq!(s.best_nel, 7.0);
        assert_eq!(s.worst_nel, 7.0);
    }

    #[test]
    fn stats_tie_break_lowest_index() {
        let s = population_statistics(&[p(&[1.0], 4.0), p(&[2.0], 4.0)]).unwrap();
        assert_eq!(s.best_index, 0);
    }

    #[test]
    fn stats_empty_is_usage_error() {
        assert!(matches!(population_statistics(&[]), Err(Error::Usage(_))));
    }

    #[test]
    fn stability_level_endpoints() {
        let s = population_statistics(&[p(&[0.0], 1.0), p(&[1.0], 3.0)]).unwrap();
        assert_eq!(stability_level(3.0, &s), 1.0);
        assert_eq!(stability_level(1.0, &s), 0.0);
        assert_eq!(stability_level(2.0, &s), 0.5);
        let flat = population_statistics(&[p(&[0.0], 2.0), p(&[1.0], 2.0)]).unwrap();
        assert_eq!(stability_level(2.0, &flat), 0.0);
    }

    #[test]
    fn nearest_neighbors() {
        let pop = [p(&[0.0], 0.0), p(&[1.0], 0.0), p(&[10.0], 0.0)];
        let h = neighborhood(&pop, 0, 1).unwrap();
        assert_eq!(h.indices, vec![1]);
        assert_eq!(h.centroid, vec![1.0]);
        let h = neighborhood(&pop, 0, 2).unwrap();
        assert_eq!(h.centroid, vec![5.5]);
    }

    #[test]
    fn coincident_particle_is_a_neighbor_not_self() {
        let pop = [p(&[3.0, 3.0], 0.0), p(&[3.0, 3.0], 1.0)];
        let h = neighborhood(&pop, 0, 1).unwrap();
        assert_eq!(h.indices, vec![1]);
        assert_eq!(h.centroid, vec![3.0, 3.0]);
    }

    #[test]
    fn neighborhood_too_large() {
        let pop = [p(&[0.0], 0.0), p(&[1.0], 0.0)];
        assert!(matches!(neighborhood(&pop, 0, 2), Err(Error::Usage(_))));
    }

    #[test]
    fn merge_sorts_and_truncates() {
        let old = vec![p(&[0.0], 1.0), p(&[1.0], 3.0)];
        let fresh = vec![p(&[2.0], 2.0), p(&[3.0], 0.5)];
        let kept: Vec<f64> = merge_truncate(old, fresh, 2).iter().map(|q| q.nel).collect();
        assert_eq!(kept, vec![0.5, 1.0]);
    }

    #[test]
    fn merge_elitism_keeps_old_when_new_is_worse() {
        let old = vec![p(&[0.0], 1.0), p(&[1.0], 3.0)];
        let fresh = vec![p(&[2.0], 5.0), p(&[3.0], 4.0)];
        assert_eq!(merge_truncate(old.clone(), fresh, 2), old);
    }

    #[test]
    fn merge_ties_prefer_old() {
        let old = vec![p(&[0.0], 1.0), p(&[1.0], 2.0)];
        let fresh = vec![p(&[9.0], 1.0)];
        let kept = merge_truncate(old, fresh, 2);
        assert_eq!(kept[0].position, vec![0.0]);
        assert_eq!(kept[1].position, vec![9.0]);
    }
}
