use serde::{Deserialize, Serialize};

use super::argmax_count;
use crate::data::Dataset;

/// Stores the training set verbatim; predicts by majority over the `k`
/// nearest rows (Euclidean).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KnnModel {
    pub k: usize,
    pub n_features: usize,
    pub n_classes: usize,
    pub rows: Vec<f64>,
    pub labels: Vec<usize>,
}

impl KnnModel {
    pub fn fit(data: &Dataset, k: usize) -> Self {
        KnnModel {
            k,
            n_features: data.n_features(),
            n_classes: data.n_classes(),
            rows: data.values().to_vec(),
            labels: data.labels().to_vec(),
        }
    }

    pub fn predict(&self, x: &[f64]) -> usize {
        let n = self.labels.len();
        let k = self.k.min(n);
        let d = self.n_features;
        let mut dist: Vec<(f64, usize)> = (0..n)
            .map(|i| {
                let row = &self.rows[i * d..(i + 1) * d];
                let s: f64 = row.iter().zip(x).map(|(a, b)| (a - b) * (a - b)).sum();
                (s, i)
            })
            .collect();
        let cmp = |a: &(f64, usize), b: &(f64, usize)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
        if k < n {
            dist.select_nth_unstable_by(k - 1, cmp);
        }
        let mut votes = vec![0usize; self.n_classes];
        for &(_, i) in &dist[..k] {
            votes[self.labels[i]] += 1;
        }
        argmax_count(&votes)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nearest_point() {
        let ds = Dataset::from_rows(&[vec![0.0], vec![10.0]], vec![0, 1]).unwrap();
        assert_eq!(KnnModel::fit(&ds, 1).predict(&[1.0]), 0);
        assert_eq!(KnnModel::fit(&ds, 1).predict(&[6.0]), 1);
    }

    #[test]
    fn equidistant_majority() {
        let ds = Dataset::from_rows(&[vec![1.0, 0.0], vec![0.0, 1.0], vec![-1.0, 0.0]], vec![0, 0, 1]).unwrap();
        assert_eq!(KnnModel::fit(&ds, 3).predict(&[0.0, 0.0]), 0);
    }

    #[test]
    fn distance_tie_prefers_lower_training_index() {
        let ds = Dataset::from_rows(&[vec![1.0], vec![-1.0]], vec![1, 0]).unwrap();
        assert_eq!(KnnModel::fit(&ds, 1).predict(&[0.0]), 1);
    }

    #[test]
    fn vote_tie_prefers_lowest_class() {
        let ds = Dataset::from_rows(&[vec![1.0], vec![-1.0]], vec![1, 0]).unwrap();
        assert_eq!(KnnModel::fit(&ds, 2).predict(&[0.0]), 0);
    }

    #[test]
    fn k_larger_than_training_set() {
        let ds = Dataset::from_rows(&[vec![1.0], vec![2.0], vec![3.0]], vec![1, 1, 0]).unwrap();
        assert_eq!(KnnModel::fit(&ds, 10).predict(&[3.0]), 1);
    }
}
