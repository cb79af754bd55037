use rand::seq::{index, SliceRandom};
use serde::{Deserialize, Serialize};

use super::Dataset;
use crate::error::{Error, Result};
use crate::rng::substream;

/// Keep at most `cap` rows per class, sampled without replacement, then
/// shuffle. With `cap = None` every class is cut to the minority count.
pub fn downsample(ds: &Dataset, cap: Option<usize>, seed: u64) -> Result<Dataset> {
    if ds.is_empty() {
        return Err(Error::Usage("cannot downsample an empty dataset".into()));
    }
    let by_class = ds.class_rows();
    let cap = cap.unwrap_or_else(|| {
        by_class
            .iter()
            .map(Vec::len)
            .filter(|&n| n > 0)
            .min()
            .unwrap_or(0)
    });
    let mut keep = Vec::new();
    for (c, rows) in by_class.iter().enumerate() {
        let take = rows.len().min(cap);
        let mut rng = substream(seed, &[c as u64]);
        let mut picked: Vec<usize> = index::sample(&mut rng, rows.len(), take)
            .into_iter()
            .map(|k| rows[k])
            .collect();
        picked.sort_unstable();
        keep.extend(picked);
    }
    keep.shuffle(&mut substream(seed, &[u64::MAX]));

    let mut out = ds.subset(&keep);
    let counts = out.class_counts();
    out.provenance.note(format!(
        "downsampled to at most {cap} rows per class (seed {seed}): {:?}",
        counts
    ));
    out.provenance.stage("downsampled", out.n_rows());
    Ok(out)
}

fn check_ratio(ratio: f64) -> Result<()> {
    if !(ratio > 0.0 && ratio < 1.0) {
        return Err(Error::Usage(format!("split ratio must be in (0, 1), got {ratio}")));
    }
    Ok(())
}

/// Stratified two-way partition of row indices.
///
/// Per class: seeded shuffle, then `floor(ratio * count)` rows (at least
/// one, at most `count - 1`) go to the first part. Both parts are returned
/// in ascending row order.
pub fn stratified_holdout(ds: &Dataset, ratio: f64, seed: u64) -> Result<(Vec<usize>, Vec<usize>)> {
    check_ratio(ratio)?;
    let mut first = Vec::new();
    let mut second = Vec::new();
    for (c, rows) in ds.class_rows().iter().enumerate() {
        if rows.is_empty() {
            continue;
        }
        if rows.len() < 2 {
            return Err(Error::Stratification {
                class: ds.class_names()[c].clone(),
                count: rows.len(),
            });
        }
        let mut shuffled = rows.clone();
        shuffled.shuffle(&mut substream(seed, &[c as u64]));
        let n_first = ((ratio * rows.len() as f64 + 1e-9).floor() as usize).clamp(1, rows.len() - 1);
        first.extend_from_slice(&shuffled[..n_first]);
        second.extend_from_slice(&shuffled[n_first..]);
    }
    first.sort_unstable();
    second.sort_unstable();
    Ok((first, second))
}

/// `k` stratified folds of row indices; class rows are dealt round-robin
/// after a seeded shuffle.
pub fn stratified_folds(ds: &Dataset, k: usize, seed: u64) -> Result<Vec<Vec<usize>>> {
    if k < 2 {
        return Err(Error::Usage(format!("need at least 2 folds, got {k}")));
    }
    let mut folds = vec![Vec::new(); k];
    let mut next = 0;
    for (c, rows) in ds.class_rows().iter().enumerate() {
        if rows.is_empty() {
            continue;
        }
        if rows.len() < 2 {
            return Err(Error::Stratification {
                class: ds.class_names()[c].clone(),
                count: rows.len(),
            });
        }
        let mut shuffled = rows.clone();
        shuffled.shuffle(&mut substream(seed, &[c as u64]));
        for r in shuffled {
            folds[next % k].push(r);
            next += 1;
        }
    }
    for f in &mut folds {
        f.sort_unstable();
    }
    Ok(folds)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitPair {
    pub train: Dataset,
    pub test: Dataset,
    pub ratio: f64,
    pub seed: u64,
    /// Row indices into the split dataset.
    pub train_rows: Vec<usize>,
    pub test_rows: Vec<usize>,
}

/// Stratified train/test split.
pub fn split(ds: &Dataset, ratio: f64, seed: u64) -> Result<SplitPair> {
    let (train_rows, test_rows) = stratified_holdout(ds, ratio, seed)?;
    let mut train = ds.subset(&train_rows);
    let mut test = ds.subset(&test_rows);
    train.provenance.stage("train", train.n_rows());
    test.provenance.stage("test", test.n_rows());
    Ok(SplitPair {
        train,
        test,
        ratio,
        seed,
        train_rows,
        test_rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn labeled(counts: &[usize]) -> Dataset {
        let mut rows = Vec::new();
        let mut labels = Vec::new();
        for (c, &n) in counts.iter().enumerate() {
            for i in 0..n {
                rows.push(vec![i as f64, c as f64]);
                labels.push(c);
            }
        }
        Dataset::from_rows(&rows, labels).unwrap()
    }

    #[test]
    fn cap_per_class() {
        let ds = labeled(&[5000, 1200, 900]);
        let out = downsample(&ds, Some(1000), 1).unwrap();
        assert_eq!(out.class_counts(), vec![1000, 1000, 900]);
    }

    #[test]
    fn auto_cap_balances() {
        let ds = labeled(&[50, 7, 12]);
        assert_eq!(downsample(&ds, None, 3).unwrap().class_counts(), vec![7, 7, 7]);
    }

    #[test]
    fn balanced_input_kept_up_to_order() {
        let ds = labeled(&[10, 10]);
        let out = downsample(&ds, None, 9).unwrap();
        let mut a: Vec<Vec<u64>> = ds.rows().map(|r| r.iter().map(|v| v.to_bits()).collect()).collect();
        let mut b: Vec<Vec<u64>> = out.rows().map(|r| r.iter().map(|v| v.to_bits()).collect()).collect();
        a.sort();
        b.sort();
        assert_eq!(a, b);
    }

    #[test]
    fn single_class_split() {
        let ds = labeled(&[10]);
        let s = split(&ds, 0.8, 0).unwrap();
        assert_eq!((s.train.n_rows(), s.test.n_rows()), (8, 2));
    }

    #[test]
    fn per_class_floor() {
        let ds = labeled(&[5, 5]);
        let s = split(&ds, 0.8, 0).unwrap();
        assert_eq!(s.train.class_counts(), vec![4, 4]);
        assert_eq!(s.test.class_counts(), vec![1, 1]);
    }

    #[test]
    fn split_is_deterministic_and_disjoint() {
        let ds = labeled(&[30, 17]);
        let a = split(&ds, 0.7, 5).unwrap();
        let b = split(&ds, 0.7, 5).unwrap();
        assert_eq!(a.train_rows, b.train_rows);
        assert!(a.train_rows.iter().all(|r| !a.test_rows.contains(r)));
        assert_eq!(a.train_rows.len() + a.test_rows.len(), ds.n_rows());
    }

    #[test]
    fn singleton_class_rejected() {
        let ds = labeled(&[4, 1]);
        assert!(matches!(split(&ds, 0.8, 0), Err(Error::Stratification { count: 1, .. })));
    }

    #[test]
    fn test_part_never_empty() {
        let ds = labeled(&[2, 3]);
        let s = split(&ds, 0.99, 0).unwrap();
        assert_eq!(s.test.class_counts(), vec![1, 1]);
        let s = split(&ds, 0.01, 0).unwrap();
        assert_eq!(s.train.class_counts(), vec![1, 1]);
    }

    #[test]
    fn folds_cover_everything_once() {
        let ds = labeled(&[10, 7]);
        let folds = stratified_folds(&ds, 3, 2).unwrap();
        let mut all: Vec<usize> = folds.concat();
        all.sort_unstable();
        assert_eq!(all, (0..17).collect::<Vec<_>>());
        for f in &folds {
            assert!(f.len() >= 5);
        }
    }
}
