//! Renormalized propagation operator `D~^{-1/2} (A + I) D~^{-1/2}` and
//! K-step feature smoothing.

use ndarray::{Array2, ArrayView2};

use crate::sparse::spmm_view;
use crate::{Error, FeatureMatrix, Result, SparseAdjacency};

/// `A_bar = S (A + I) S` with `S = diag(d~^{-1/2})`, applied without ever
/// materializing scaled entries or powers.
#[derive(Debug, Clone)]
pub struct NormalizedAdjacency {
    base: SparseAdjacency,
    scale: Vec<f64>,
}

impl NormalizedAdjacency {
    pub fn n(&self) -> usize {
        self.base.n()
    }

    /// `A + I`.
    pub fn base(&self) -> &SparseAdjacency {
        &self.base
    }

    /// Per-node `d~_i^{-1/2}`.
    pub fn scale(&self) -> &[f64] {
        &self.scale
    }

    /// Entry `A_bar[i, j]`.
    pub fn entry(&self, i: usize, j: usize) -> f64 {
        self.scale[i] * self.base.weight(i, j) * self.scale[j]
    }

    /// `A_bar h` for any dense `h` with `n` rows.
    pub fn apply(&self, h: ArrayView2<'_, f64>) -> Result<Array2<f64>> {
        if h.nrows() != self.n() {
            return Err(Error::DimensionMismatch {
                context: "propagation (nodes vs matrix rows)",
                expected: self.n(),
                found: h.nrows(),
            });
        }
        let mut scaled = h.to_owned();
        for (mut row, &s) in scaled.rows_mut().into_iter().zip(&self.scale) {
            row *= s;
        }
        let mut out = spmm_view(&self.base, scaled.view())?;
        for (mut row, &s) in out.rows_mut().into_iter().zip(&self.scale) {
            row *= s;
        }
        Ok(out)
    }

    pub fn to_dense(&self) -> Array2<f64> {
        let mut dense = self.base.to_dense();
        for ((i, j), v) in dense.indexed_iter_mut() {
            *v *= self.scale[i] * self.scale[j];
        }
        dense
    }
}

/// Adds unit self-loops and computes the symmetric degree scaling.
pub fn normalize(adj: &SparseAdjacency) -> NormalizedAdjacency {
    let base = adj.with_self_loops(1.0);
    let scale = (0..base.n()).map(|i| base.degree(i).powf(-0.5)).collect();
    NormalizedAdjacency { base, scale }
}

/// `A_bar^k h` by `k` successive sparse applications.
pub fn smooth_view(
    adj: &NormalizedAdjacency,
    h: ArrayView2<'_, f64>,
    k: usize,
) -> Result<Array2<f64>> {
    let mut current = h.to_owned();
    if current.nrows() != adj.n() {
        return Err(Error::DimensionMismatch {
            context: "smoothing (nodes vs feature rows)",
            expected: adj.n(),
            found: current.nrows(),
        });
    }
    for _ in 0..k {
        current = adj.apply(current.view())?;
    }
    Ok(current)
}

pub fn smooth(adj: &NormalizedAdjacency, x: &FeatureMatrix, k: usize) -> Result<FeatureMatrix> {
    FeatureMatrix::new(smooth_view(adj, x.view(), k)?)
}
