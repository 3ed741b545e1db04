use crate::error::{Error, Result};

pub const MAX_ACCURACY_CLUSTERS: usize = 8;

/// Largest fraction of points on which `labels` agrees with `reference`
/// after relabelling `labels` by some permutation.
pub fn accuracy(labels: &[usize], reference: &[usize]) -> Result<f64> {
    if labels.len() != reference.len() {
        return Err(Error::DimensionMismatch {
            expected: reference.len(),
            got: labels.len(),
        });
    }
    if labels.is_empty() {
        return Err(Error::InvalidParameter("accuracy of empty labelings".into()));
    }
    let k = labels.iter().chain(reference).max().unwrap() + 1;
    if k > MAX_ACCURACY_CLUSTERS {
        return Err(Error::TooManyClusters {
            k,
            max: MAX_ACCURACY_CLUSTERS,
        });
    }
    let mut confusion = vec![0usize; k * k];
    for (&a, &b) in labels.iter().zip(reference) {
        confusion[a * k + b] += 1;
    }
    let mut perm: Vec<usize> = (0..k).collect();
    let mut best = 0;
    permute(&mut perm, 0, &mut |p| {
        let hits: usize = (0..k).map(|a| confusion[a * k + p[a]]).sum();
        best = best.max(hits);
    });
    Ok(best as f64 / labels.len() as f64)
}

fn permute(p: &mut Vec<usize>, start: usize, f: &mut impl FnMut(&[usize])) {
    if start == p.len() {
        f(p);
        return;
    }
    for i in start..p.len() {
        p.swap(start, i);
        permute(p, start + 1, f);
        p.swap(start, i);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::Rng;

    #[test]
    fn examples() {
        let a = [0, 0, 1, 1, 2];
        assert_eq!(accuracy(&a, &a).unwrap(), 1.0);
        assert_eq!(accuracy(&[1, 1, 0, 0], &[0, 0, 1, 1]).unwrap(), 1.0);
        assert_eq!(accuracy(&[0, 1, 0, 1], &[0, 0, 1, 1]).unwrap(), 0.5);
        assert!(matches!(accuracy(&[9, 0], &[0, 0]), Err(Error::TooManyClusters { k: 10, .. })));
        assert!(accuracy(&[0], &[0, 1]).is_err());
    }

    #[test]
    fn random_binary_labels_score_one_half() {
        let mut rng = crate::rng::stream(21, 0);
        let n = 10_000;
        let reference: Vec<usize> = (0..n).map(|i| i % 2).collect();
        let random: Vec<usize> = (0..n).map(|_| rng.random_range(0..2)).collect();
        let acc = accuracy(&random, &reference).unwrap();
        assert!((0.5..=0.515).contains(&acc), "{acc}");
    }

    proptest! {
        #[test]
        fn symmetric_and_permutation_invariant(
            pairs in proptest::collection::vec((0usize..4, 0usize..4), 1..60),
            shift in 0usize..4,
        ) {
            let a: Vec<usize> = pairs.iter().map(|p| p.0).collect();
            let b: Vec<usize> = pairs.iter().map(|p| p.1).collect();
            let relabeled: Vec<usize> = a.iter().map(|&x| (x + shift) % 4).collect();
            let base = accuracy(&a, &b).unwrap();
            prop_assert_eq!(base, accuracy(&b, &a).unwrap());
            prop_assert_eq!(base, accuracy(&relabeled, &b).unwrap());
        }
    }
}
