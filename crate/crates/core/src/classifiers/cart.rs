//! CART with Gini impurity.
//!
//! Thresholds sit at midpoints between consecutive distinct values and a
//! row goes left when `x[feature] <= threshold`. Candidate splits are
//! scanned feature by feature in ascending order, thresholds ascending,
//! and only a strictly better weighted impurity replaces the incumbent.

use rand::seq::index;
use serde::{Deserialize, Serialize};

use super::{argmax_count, TreeParams};
use crate::data::Dataset;
use crate::rng::{substream, StreamRng};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeSplit {
    pub feature: usize,
    pub threshold: f64,
    pub left: usize,
    pub right: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeNode {
    pub impurity: f64,
    pub n_samples: usize,
    /// Majority class of the training rows reaching this node.
    pub prediction: usize,
    pub split: Option<TreeSplit>,
}

/// Flat node arena; node 0 is the root.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    pub nodes: Vec<TreeNode>,
}

pub(crate) fn gini(counts: &[usize], n: usize) -> f64 {
    if n == 0 {
        return 0.0;
    }
    let n = n as f64;
    1.0 - counts.iter().map(|&c| (c as f64 / n).powi(2)).sum::<f64>()
}

struct Builder<'a> {
    data: &'a Dataset,
    params: &'a TreeParams,
    rng: StreamRng,
    nodes: Vec<TreeNode>,
}

struct Candidate {
    feature: usize,
    threshold: f64,
    score: f64,
}

impl Builder<'_> {
    fn counts(&self, rows: &[usize]) -> Vec<usize> {
        let mut c = vec![0; self.data.n_classes()];
        for &r in rows {
            c[self.data.labels()[r]] += 1;
        }
        c
    }

    fn features_to_scan(&mut self) -> Vec<usize> {
        let d = self.data.n_features();
        match self.params.max_features {
            Some(m) if m < d => {
                let mut f = index::sample(&mut self.rng, d, m).into_vec();
                f.sort_unstable();
                f
            }
            _ => (0..d).collect(),
        }
    }

    fn best_split(&mut self, rows: &[usize], parent: &[usize]) -> Option<Candidate> {
        let n = rows.len();
        let min_leaf = self.params.min_samples_leaf;
        let n_classes = self.data.n_classes();
        let mut best: Option<Candidate> = None;
        let mut sorted = rows.to_vec();
        for f in self.features_to_scan() {
            let data = self.data;
            sorted.sort_by(|&a, &b| data.value(a, f).total_cmp(&data.value(b, f)).then(a.cmp(&b)));
            let mut left = vec![0usize; n_classes];
            let mut right = parent.to_vec();
            for pos in 0..n - 1 {
                let lbl = data.labels()[sorted[pos]];
                left[lbl] += 1;
                right[lbl] -= 1;
                let n_left = pos + 1;
                let n_right = n - n_left;
                let v = data.value(sorted[pos], f);
                let next = data.value(sorted[pos + 1], f);
                if v == next || n_left < min_leaf || n_right < min_leaf {
                    continue;
                }
                let score = (n_left as f64 * gini(&left, n_left)
                    + n_right as f64 * gini(&right, n_right))
                    / n as f64;
                if best.as_ref().is_none_or(|b| score < b.score) {
                    let mut threshold = v + (next - v) / 2.0;
                    if threshold >= next {
                        threshold = v;
                    }
                    best = Some(Candidate {
                        feature: f,
                        threshold,
                        score,
                    });
                }
            }
        }
        best
    }

    fn grow(&mut self, rows: Vec<usize>, depth: usize) -> usize {
        let counts = self.counts(&rows);
        let n = rows.len();
        let impurity = gini(&counts, n);
        let id = self.nodes.len();
        self.nodes.push(TreeNode {
            impurity,
            n_samples: n,
            prediction: argmax_count(&counts),
            split: None,
        });

        let stop = impurity <= 0.0
            || n < self.params.min_samples_split
            || self.params.max_depth.is_some_and(|m| depth >= m);
        if stop {
            return id;
        }
        let Some(c) = self.best_split(&rows, &counts) else {
            return id;
        };
        let (l, r): (Vec<usize>, Vec<usize>) = rows
            .iter()
            .partition(|&&row| self.data.value(row, c.feature) <= c.threshold);
        let left = self.grow(l, depth + 1);
        let right = self.grow(r, depth + 1);
        self.nodes[id].split = Some(TreeSplit {
            feature: c.feature,
            threshold: c.threshold,
            left,
            right,
        });
        id
    }
}

impl Tree {
    pub fn fit(data: &Dataset, params: &TreeParams, seed: u64) -> Tree {
        Tree::fit_rows(data, (0..data.n_rows()).collect(), params, seed)
    }

    /// Fit on a multiset of row indices (duplicates allowed, as in a
    /// bootstrap sample).
    pub fn fit_rows(data: &Dataset, rows: Vec<usize>, params: &TreeParams, seed: u64) -> Tree {
        let mut b = Builder {
            data,
            params,
            rng: substream(seed, &[]),
            nodes: Vec::new(),
        };
        b.grow(rows, 0);
        Tree { nodes: b.nodes }
    }

    pub fn predict(&self, x: &[f64]) -> usize {
        let mut node = &self.nodes[0];
        while let Some(s) = &node.split {
            node = if x[s.feature] <= s.threshold {
                &self.nodes[s.left]
            } else {
                &self.nodes[s.right]
            };
        }
        node.prediction
    }

    pub fn depth(&self) -> usize {
        fn walk(t: &Tree, i: usize) -> usize {
            match &t.nodes[i].split {
                None => 0,
                Some(s) => 1 + walk(t, s.left).max(walk(t, s.right)),
            }
        }
        walk(self, 0)
    }

    pub fn n_leaves(&self) -> usize {
        self.nodes.iter().filter(|n| n.split.is_none()).count()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn one_d(xs: &[f64], labels: &[usize]) -> Dataset {
        Dataset::from_rows(&xs.iter().map(|&x| vec![x]).collect::<Vec<_>>(), labels.to_vec()).unwrap()
    }

    #[test]
    fn single_threshold_separates() {
        let xs: Vec<f64> = (0..10).map(|i| i as f64).collect();
        let labels: Vec<usize> = xs.iter().map(|&x| usize::from(x >= 5.0)).collect();
        let ds = one_d(&xs, &labels);
        let params = TreeParams { max_depth: Some(1), ..Default::default() };
        let t = Tree::fit(&ds, &params, 0);
        assert_eq!(t.nodes[0].split.as_ref().unwrap().threshold, 4.5);
        for (x, l) in xs.iter().zip(&labels) {
            assert_eq!(t.predict(&[*x]), *l);
        }
    }

    #[test]
    fn leaf_only_tree_predicts_majority() {
        let ds = one_d(&[1.0, 2.0, 3.0], &[0, 0, 1]);
        let t = Tree::fit(&ds, &TreeParams { max_depth: Some(0), ..Default::default() }, 0);
        assert_eq!(t.nodes.len(), 1);
        assert_eq!(t.predict(&[3.0]), 0);
    }

    #[test]
    fn min_samples_leaf_respected() {
        let ds = one_d(&[0.0, 1.0, 2.0, 3.0, 4.0, 5.0], &[0, 1, 1, 1, 1, 1]);
        let t = Tree::fit(&ds, &TreeParams { min_samples_leaf: 2, ..Default::default() }, 0);
        assert!(t.nodes.iter().all(|n| n.n_samples >= 2));
    }

    #[test]
    fn constant_features_give_a_leaf() {
        let ds = one_d(&[1.0, 1.0, 1.0], &[0, 1, 1]);
        let t = Tree::fit(&ds, &TreeParams::default(), 0);
        assert_eq!(t.nodes.len(), 1);
        assert_eq!(t.predict(&[1.0]), 1);
    }

    #[test]
    fn xor_needs_a_zero_gain_first_split() {
        let ds = Dataset::from_rows(
            &[vec![0.0, 0.0], vec![1.0, 1.0], vec![0.0, 1.0], vec![1.0, 0.0]],
            vec![0, 0, 1, 1],
        )
        .unwrap();
        let t = Tree::fit(&ds, &TreeParams::default(), 0);
        for (i, row) in ds.rows().enumerate() {
            assert_eq!(t.predict(row), ds.labels()[i]);
        }
    }

    #[test]
    fn gini_values() {
        assert_eq!(gini(&[5, 0], 5), 0.0);
        assert!((gini(&[1, 1], 2) - 0.5).abs() < 1e-15);
    }
}
