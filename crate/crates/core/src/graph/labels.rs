use std::collections::BTreeSet;

use crate::{Error, Result};

/// Partial labels plus a train/valid/test split.
///
/// Labels are stored only for train and valid nodes; test labels stay with
/// the caller so nothing downstream can read them by accident.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelAssignment {
    n: usize,
    labels: Vec<Option<usize>>,
    train: Vec<usize>,
    valid: Vec<usize>,
    test: Vec<usize>,
}

impl LabelAssignment {
    pub fn new(
        n: usize,
        labels: Vec<Option<usize>>,
        train: Vec<usize>,
        valid: Vec<usize>,
        test: Vec<usize>,
    ) -> Result<Self> {
        if labels.len() != n {
            return Err(Error::DimensionMismatch {
                context: "label vector length",
                expected: n,
                found: labels.len(),
            });
        }
        let mut seen = vec![false; n];
        for &i in train.iter().chain(&valid).chain(&test) {
            if i >= n {
                return Err(Error::IndexOutOfRange { index: i, n });
            }
            if seen[i] {
                return Err(Error::InvalidInput(format!(
                    "node {i} appears in more than one split set"
                )));
            }
            seen[i] = true;
        }
        if let Some(&i) = train.iter().find(|&&i| labels[i].is_none()) {
            return Err(Error::InvalidInput(format!("train node {i} has no label")));
        }
        Ok(Self {
            n,
            labels,
            train,
            valid,
            test,
        })
    }

    /// Keeps the labels of train and valid nodes from a complete label vector.
    pub fn from_truth(
        truth: &[usize],
        train: Vec<usize>,
        valid: Vec<usize>,
        test: Vec<usize>,
    ) -> Result<Self> {
        let n = truth.len();
        let mut labels = vec![None; n];
        for &i in train.iter().chain(&valid) {
            if i >= n {
                return Err(Error::IndexOutOfRange { index: i, n });
            }
            labels[i] = Some(truth[i]);
        }
        Self::new(n, labels, train, valid, test)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn label(&self, i: usize) -> Option<usize> {
        self.labels.get(i).copied().flatten()
    }

    pub fn train(&self) -> &[usize] {
        &self.train
    }

    pub fn valid(&self) -> &[usize] {
        &self.valid
    }

    pub fn test(&self) -> &[usize] {
        &self.test
    }

    /// `(node, label)` for every train node.
    pub fn train_labels(&self) -> Vec<(usize, usize)> {
        self.train
            .iter()
            .map(|&i| (i, self.labels[i].expect("train nodes are labelled")))
            .collect()
    }

    /// `(node, label)` for labelled valid nodes.
    pub fn valid_labels(&self) -> Vec<(usize, usize)> {
        self.valid
            .iter()
            .filter_map(|&i| self.labels[i].map(|y| (i, y)))
            .collect()
    }

    /// Distinct label ids present on train and valid nodes, ascending.
    pub fn classes(&self) -> Vec<usize> {
        let set: BTreeSet<usize> = self.labels.iter().flatten().copied().collect();
        set.into_iter().collect()
    }
}
