//! Stratified k-fold index generation.

use rand::seq::SliceRandom;

use super::SelectionError;
use crate::data::OrdinalLabel;
use crate::{seed, NUM_CLASSES};

/// Splits `0..n` into `k` disjoint validation folds, stratified by class.
///
/// Within each class, shuffled members are dealt consecutively around the
/// fold cycle; the dealing position carries over between classes, so both
/// the per-class counts and the total fold sizes differ by at most one.
/// Deterministic per seed. Fold contents are sorted ascending.
pub fn kfold_indices(
    labels: &[OrdinalLabel],
    k: usize,
    fold_seed: u64,
) -> Result<Vec<Vec<usize>>, SelectionError> {
    let n = labels.len();
    if k < 2 || k > n {
        return Err(SelectionError::BadK { k, n });
    }
    let mut rng = seed::rng_for(fold_seed, "kfold");
    let mut folds = vec![Vec::new(); k];
    let mut position = 0usize;
    for class in 0..NUM_CLASSES {
        let mut members: Vec<usize> =
            (0..n).filter(|&i| labels[i].value() == class).collect();
        members.shuffle(&mut rng);
        for &row in &members {
            folds[position % k].push(row);
            position += 1;
        }
    }
    for fold in &mut folds {
        fold.sort_unstable();
    }
    Ok(folds)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    fn mk_labels(values: &[usize]) -> Vec<OrdinalLabel> {
        values.iter().map(|&v| OrdinalLabel::new(v as i64).unwrap()).collect()
    }

    #[test]
    fn leave_one_out_degenerate_case() {
        let labels = mk_labels(&[0, 1, 2, 3, 4, 5, 0, 1, 2, 3]);
        let folds = kfold_indices(&labels, 10, 0).unwrap();
        assert_eq!(folds.len(), 10);
        assert!(folds.iter().all(|f| f.len() == 1));
    }

    #[test]
    fn perfect_stratification_arithmetic() {
        let mut values = vec![0usize; 30];
        values.extend(vec![1usize; 30]);
        let labels = mk_labels(&values);
        let folds = kfold_indices(&labels, 10, 3).unwrap();
        for fold in &folds {
            assert_eq!(fold.len(), 6);
            let zeros = fold.iter().filter(|&&i| labels[i].value() == 0).count();
            assert_eq!(zeros, 3, "every fold holds exactly 3 of each class");
        }
    }

    #[test]
    fn partition_property_over_random_cases() {
        let mut rng = seed::rng(77);
        for _ in 0..100 {
            let n = rng.random_range(6..120);
            let k = rng.random_range(2..=n.min(12));
            let values: Vec<usize> = (0..n).map(|_| rng.random_range(0..6)).collect();
            let labels = mk_labels(&values);
            let folds = kfold_indices(&labels, k, rng.random()).unwrap();
            let mut all: Vec<usize> = folds.concat();
            all.sort_unstable();
            let want: Vec<usize> = (0..n).collect();
            assert_eq!(all, want, "folds must partition 0..n");

            let sizes: Vec<usize> = folds.iter().map(Vec::len).collect();
            let (lo, hi) = (sizes.iter().min().unwrap(), sizes.iter().max().unwrap());
            assert!(hi - lo <= 1, "fold sizes differ by more than one: {sizes:?}");

            for class in 0..6 {
                let counts: Vec<usize> = folds
                    .iter()
                    .map(|f| f.iter().filter(|&&i| labels[i].value() == class).count())
                    .collect();
                let (lo, hi) = (counts.iter().min().unwrap(), counts.iter().max().unwrap());
                assert!(hi - lo <= 1, "class {class} counts spread: {counts:?}");
            }
        }
    }

    #[test]
    fn deterministic_per_seed() {
        let labels = mk_labels(&[0, 1, 2, 0, 1, 2, 0, 1, 2, 3, 4, 5]);
        assert_eq!(kfold_indices(&labels, 3, 5).unwrap(), kfold_indices(&labels, 3, 5).unwrap());
        assert_ne!(kfold_indices(&labels, 3, 5).unwrap(), kfold_indices(&labels, 3, 6).unwrap());
    }

    #[test]
    fn k_bounds_enforced() {
        let labels = mk_labels(&[0, 1, 2]);
        assert!(matches!(kfold_indices(&labels, 1, 0), Err(SelectionError::BadK { .. })));
        assert!(matches!(kfold_indices(&labels, 4, 0), Err(SelectionError::BadK { .. })));
    }
}
