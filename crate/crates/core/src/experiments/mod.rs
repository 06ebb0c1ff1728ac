//! Metrics, the k-nn classifier baseline and the manifest-driven experiment
//! runner.

mod manifest;
mod plot;
mod runner;

pub use manifest::{ExperimentConfig, ExperimentKind, Manifest, ModelSection};
pub use plot::{write_line_plot, PlotSeries};
pub use runner::{
    execute, run_experiment, write_outputs, CellReport, MetricSummary, RunRecord, RunReport,
    Timings,
};

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::matrix::squared_distance;
use crate::{EdgeSet, Error, FeatureMatrix, Result};

/// Fraction of `subset` nodes where `pred` equals `truth`.
pub fn accuracy(pred: &[usize], truth: &[usize], subset: &[usize]) -> Result<f64> {
    if subset.is_empty() {
        return Err(Error::InvalidInput("accuracy over an empty subset".into()));
    }
    if pred.len() != truth.len() {
        return Err(Error::DimensionMismatch {
            context: "predictions vs labels",
            expected: truth.len(),
            found: pred.len(),
        });
    }
    let mut correct = 0usize;
    for &i in subset {
        if i >= truth.len() {
            return Err(Error::IndexOutOfRange {
                index: i,
                n: truth.len(),
            });
        }
        correct += usize::from(pred[i] == truth[i]);
    }
    Ok(correct as f64 / subset.len() as f64)
}

/// Pair counts of a constructed graph against a ground-truth graph, over all
/// `n(n-1)/2` unordered node pairs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AdjacencyConfusion {
    pub n: usize,
    /// Absent in both.
    pub tn: usize,
    /// In the truth, missed by the construction.
    #[serde(rename = "fn")]
    pub fn_: usize,
    /// Created, absent from the truth.
    pub fp: usize,
    /// In both.
    pub tp: usize,
}

impl AdjacencyConfusion {
    pub fn total(&self) -> usize {
        self.tn + self.fn_ + self.fp + self.tp
    }

    /// `tp / (tp + fn)`; `None` if the truth has no edges.
    pub fn hit_rate(&self) -> Option<f64> {
        ratio(self.tp, self.tp + self.fn_)
    }

    /// `tn / (tn + fp)`: share of ground-truth non-edges left out of the
    /// constructed graph. `None` if the truth is complete.
    pub fn removal_rate(&self) -> Option<f64> {
        ratio(self.tn, self.tn + self.fp)
    }

    /// Share of all pairs without a constructed edge.
    pub fn sparsity(&self) -> f64 {
        ratio(self.tn + self.fn_, self.total()).unwrap_or(1.0)
    }
}

fn ratio(num: usize, den: usize) -> Option<f64> {
    (den > 0).then(|| num as f64 / den as f64)
}

/// Classifies every unordered pair of `0..n`. Edges touching a node `>= n`
/// are an error.
pub fn adjacency_confusion(
    constructed: &EdgeSet,
    truth: &EdgeSet,
    n: usize,
) -> Result<AdjacencyConfusion> {
    for set in [constructed, truth] {
        if let Some(m) = set.max_index() {
            if m >= n {
                return Err(Error::IndexOutOfRange { index: m, n });
            }
        }
    }
    let tp = constructed.intersection(truth).len();
    let fp = constructed.len() - tp;
    let fn_ = truth.len() - tp;
    let total = n * n.saturating_sub(1) / 2;
    Ok(AdjacencyConfusion {
        n,
        tn: total - tp - fp - fn_,
        fn_,
        fp,
        tp,
    })
}

/// Majority vote among the `k` nearest train rows. Equal distances go to the
/// lower train index, equal votes to the lower class id.
pub fn knn_classify(
    x_train: &FeatureMatrix,
    y_train: &[usize],
    x_query: &FeatureMatrix,
    k: usize,
) -> Result<Vec<usize>> {
    if y_train.len() != x_train.n() {
        return Err(Error::DimensionMismatch {
            context: "train labels vs train rows",
            expected: x_train.n(),
            found: y_train.len(),
        });
    }
    if x_query.d() != x_train.d() {
        return Err(Error::DimensionMismatch {
            context: "query width vs train width",
            expected: x_train.d(),
            found: x_query.d(),
        });
    }
    if k == 0 || k > x_train.n() {
        return Err(Error::InvalidInput(format!(
            "k must be in 1..={}, got {k}",
            x_train.n()
        )));
    }
    let num_classes = y_train.iter().max().map_or(0, |&m| m + 1);
    let mut order: Vec<(f64, usize)> = Vec::with_capacity(x_train.n());
    let mut votes = vec![0usize; num_classes];
    let mut out = Vec::with_capacity(x_query.n());
    for q in 0..x_query.n() {
        order.clear();
        order.extend(
            (0..x_train.n()).map(|j| (squared_distance(x_query.row(q), x_train.row(j)), j)),
        );
        order.select_nth_unstable_by(k - 1, |a, b| {
            a.0.partial_cmp(&b.0)
                .unwrap_or(Ordering::Equal)
                .then(a.1.cmp(&b.1))
        });
        votes.iter_mut().for_each(|v| *v = 0);
        for &(_, j) in &order[..k] {
            votes[y_train[j]] += 1;
        }
        let best = votes
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(&a.0)))
            .map_or(0, |(c, _)| c);
        out.push(best);
    }
    Ok(out)
}
