//! Seeded stratified train/test splitting.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::rng;

/// Splits row indices so each class keeps its proportion within one row.
/// Returns `(train_indices, test_indices)`, each sorted ascending; the split
/// is disjoint, exhaustive and deterministic per seed.
pub fn stratified_split<L: Ord + Clone>(
    labels: &[L],
    test_fraction: f64,
    seed: u64,
) -> Result<(Vec<usize>, Vec<usize>)> {
    if !(0.0..=1.0).contains(&test_fraction) {
        return Err(Error::Split(format!(
            "test fraction must be in [0,1], got {test_fraction}"
        )));
    }
    let mut by_class: BTreeMap<L, Vec<usize>> = BTreeMap::new();
    for (i, l) in labels.iter().enumerate() {
        by_class.entry(l.clone()).or_default().push(i);
    }
    for (_, members) in by_class.iter() {
        if members.len() < 2 {
            return Err(Error::Split(format!(
                "every class needs >= 2 rows, one has {}",
                members.len()
            )));
        }
    }

    let mut rng = rng::seeded(seed, rng::stream::SPLIT);
    let mut train = Vec::new();
    let mut test = Vec::new();
    for (_, mut members) in by_class {
        // Partial Fisher-Yates: the first n_test slots become the test set.
        let n_test = (test_fraction * members.len() as f64).round() as usize;
        let n_test = n_test.min(members.len());
        for k in 0..n_test {
            let j = k + (rand::Rng::random_range(&mut rng, 0..(members.len() - k) as u64)) as usize;
            members.swap(k, j);
        }
        test.extend_from_slice(&members[..n_test]);
        train.extend_from_slice(&members[n_test..]);
    }
    train.sort_unstable();
    test.sort_unstable();
    Ok((train, test))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn labels(n_a: usize, n_b: usize) -> Vec<u8> {
        let mut v = vec![0u8; n_a];
        v.extend(vec![1u8; n_b]);
        v
    }

    #[test]
    fn proportions_preserved_within_one_row() {
        let l = labels(100, 10);
        let (train, test) = stratified_split(&l, 0.3, 1).unwrap();
        assert_eq!(train.len() + test.len(), 110);
        let test_a = test.iter().filter(|&&i| l[i] == 0).count();
        let test_b = test.iter().filter(|&&i| l[i] == 1).count();
        assert_eq!(test_a, 30);
        assert_eq!(test_b, 3);
    }

    #[test]
    fn zero_fraction_gives_empty_test() {
        let l = labels(10, 10);
        let (train, test) = stratified_split(&l, 0.0, 1).unwrap();
        assert!(test.is_empty());
        assert_eq!(train.len(), 20);
    }

    #[test]
    fn split_is_deterministic_per_seed() {
        let l = labels(50, 20);
        let a = stratified_split(&l, 0.25, 9).unwrap();
        let b = stratified_split(&l, 0.25, 9).unwrap();
        let c = stratified_split(&l, 0.25, 10).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn split_is_disjoint_and_exhaustive() {
        let l = labels(31, 17);
        let (train, test) = stratified_split(&l, 0.4, 3).unwrap();
        let mut all: Vec<usize> = train.iter().chain(test.iter()).cloned().collect();
        all.sort_unstable();
        assert_eq!(all, (0..48).collect::<Vec<_>>());
    }

    #[test]
    fn tiny_class_is_rejected() {
        let mut l = labels(10, 0);
        l.push(1);
        assert!(matches!(
            stratified_split(&l, 0.3, 1),
            Err(Error::Split(_))
        ));
    }
}
