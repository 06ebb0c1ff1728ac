use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::graph::LabelAssignment;
use crate::{Error, Result, RngState};

/// Absolute train/valid/test sizes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(from = "[usize; 3]", into = "[usize; 3]")]
pub struct SplitCounts {
    pub train: usize,
    pub valid: usize,
    pub test: usize,
}

impl SplitCounts {
    pub const fn new(train: usize, valid: usize, test: usize) -> Self {
        Self { train, valid, test }
    }

    pub fn total(&self) -> usize {
        self.train + self.valid + self.test
    }
}

impl From<[usize; 3]> for SplitCounts {
    fn from(c: [usize; 3]) -> Self {
        Self::new(c[0], c[1], c[2])
    }
}

impl From<SplitCounts> for [usize; 3] {
    fn from(c: SplitCounts) -> Self {
        [c.train, c.valid, c.test]
    }
}

/// Stratified train/valid/test draw with exact set sizes.
///
/// Each set, in order, takes `floor(size * n_c / n)` nodes from class `c`
/// (capped by what is left of the class); the remaining slots go one at a
/// time to classes visited in a seeded random order. Within a class, nodes
/// are taken from a seeded shuffle. Sets are returned sorted.
pub fn make_split(truth: &[usize], counts: SplitCounts, rng: RngState) -> Result<LabelAssignment> {
    let n = truth.len();
    if counts.total() > n {
        return Err(Error::InvalidInput(format!(
            "split sizes {}/{}/{} exceed {n} samples",
            counts.train, counts.valid, counts.test
        )));
    }
    let num_classes = truth.iter().max().map_or(0, |&m| m + 1);
    let mut rng = rng.fork(crate::rng::streams::SPLIT).rng();
    let mut pools: Vec<Vec<usize>> = vec![Vec::new(); num_classes];
    for (i, &y) in truth.iter().enumerate() {
        pools[y].push(i);
    }
    let class_sizes: Vec<usize> = pools.iter().map(Vec::len).collect();
    for pool in &mut pools {
        pool.shuffle(&mut rng);
    }

    let mut sets: Vec<Vec<usize>> = Vec::with_capacity(3);
    for size in [counts.train, counts.valid, counts.test] {
        let mut quota: Vec<usize> = (0..num_classes)
            .map(|c| (size * class_sizes[c] / n).min(pools[c].len()))
            .collect();
        let mut remaining = size - quota.iter().sum::<usize>();
        let mut order: Vec<usize> = (0..num_classes).collect();
        order.shuffle(&mut rng);
        while remaining > 0 {
            for &c in &order {
                if remaining > 0 && quota[c] < pools[c].len() {
                    quota[c] += 1;
                    remaining -= 1;
                }
            }
        }
        let mut set = Vec::with_capacity(size);
        for (c, &q) in quota.iter().enumerate() {
            let keep = pools[c].len() - q;
            set.extend(pools[c].drain(keep..));
        }
        set.sort_unstable();
        sets.push(set);
    }
    let test = sets.pop().unwrap_or_default();
    let valid = sets.pop().unwrap_or_default();
    let train = sets.pop().unwrap_or_default();
    LabelAssignment::from_truth(truth, train, valid, test)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn everything_train() {
        let truth = vec![0, 1, 1, 2, 0];
        let s = make_split(&truth, SplitCounts::new(5, 0, 0), RngState::new(1)).unwrap();
        assert_eq!(s.train(), &[0, 1, 2, 3, 4]);
        assert!(s.valid().is_empty() && s.test().is_empty());
    }

    #[test]
    fn iris_like_stratification() {
        let truth: Vec<usize> = (0..150).map(|i| i / 50).collect();
        let s = make_split(&truth, SplitCounts::new(50, 50, 50), RngState::new(4)).unwrap();
        for set in [s.train(), s.valid(), s.test()] {
            assert_eq!(set.len(), 50);
            let mut per_class = [0usize; 3];
            for &i in set {
                per_class[truth[i]] += 1;
            }
            per_class.sort_unstable();
            assert!(per_class[0] >= 16 && per_class[2] <= 17, "{per_class:?}");
        }
    }

    #[test]
    fn oversized_request_rejected() {
        assert!(make_split(&[0, 1, 0], SplitCounts::new(2, 1, 1), RngState::new(0)).is_err());
    }

    #[test]
    fn uneven_classes_still_exact() {
        let mut truth = vec![0; 95];
        truth.extend([1; 5]);
        let s = make_split(&truth, SplitCounts::new(10, 10, 80), RngState::new(9)).unwrap();
        assert_eq!(
            (s.train().len(), s.valid().len(), s.test().len()),
            (10, 10, 80)
        );
    }

    proptest! {
        #[test]
        fn disjoint_exact_reproducible(
            truth in proptest::collection::vec(0usize..4, 1..120),
            a in 0.0f64..1.0, b in 0.0f64..1.0, seed in any::<u64>()
        ) {
            let n = truth.len();
            let train = ((n as f64) * a * 0.5) as usize;
            let valid = (((n - train) as f64) * b * 0.5) as usize;
            let test = n - train - valid;
            let counts = SplitCounts::new(train, valid, test);
            let s = make_split(&truth, counts, RngState::new(seed)).unwrap();
            prop_assert_eq!(s.train().len(), train);
            prop_assert_eq!(s.valid().len(), valid);
            prop_assert_eq!(s.test().len(), test);
            let mut all: Vec<usize> = s.train().iter().chain(s.valid()).chain(s.test()).copied().collect();
            all.sort_unstable();
            prop_assert_eq!(all, (0..n).collect::<Vec<_>>());
            prop_assert_eq!(make_split(&truth, counts, RngState::new(seed)).unwrap(), s);
        }
    }
}
