use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{argmax_count, ForestParams, Tree, TreeParams};
use crate::data::Dataset;
use crate::rng::{derive_seed, substream};

/// Bagged CART trees; majority vote, ties to the lowest class id.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Forest {
    pub n_classes: usize,
    pub trees: Vec<Tree>,
}

impl Forest {
    pub fn fit(data: &Dataset, params: &ForestParams, seed: u64) -> Forest {
        let n = data.n_rows();
        let d = data.n_features();
        let subsample = params
            .feature_subsample
            .unwrap_or_else(|| ((d as f64).sqrt().ceil() as usize).max(1));
        let tree_params = TreeParams {
            max_features: Some(subsample),
            ..params.tree.clone()
        };
        let trees = (0..params.n_trees)
            .into_par_iter()
            .map(|t| {
                let rows: Vec<usize> = if params.bootstrap {
                    let mut rng = substream(seed, &[t as u64, 0]);
                    let mut rows: Vec<usize> = (0..n).map(|_| rng.random_range(0..n)).collect();
                    rows.sort_unstable();
                    rows
                } else {
                    (0..n).collect()
                };
                Tree::fit_rows(data, rows, &tree_params, derive_seed(seed, &[t as u64, 1]))
            })
            .collect();
        Forest {
            n_classes: data.n_classes(),
            trees,
        }
    }

    pub fn predict(&self, x: &[f64]) -> usize {
        let mut votes = vec![0usize; self.n_classes];
        for t in &self.trees {
            votes[t.predict(x)] += 1;
        }
        argmax_count(&votes)
    }
}
