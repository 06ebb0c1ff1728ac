//! Undirected edge sets and symmetric CSR adjacency.

use std::collections::BTreeSet;

use ndarray::{Array2, ArrayView2};

use crate::{Error, FeatureMatrix, Result};

/// Unordered node pairs `{i, j}` with `i != j`, stored once as `(min, max)`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct EdgeSet {
    edges: BTreeSet<(usize, usize)>,
}

impl EdgeSet {
    pub fn new() -> Self {
        Self::default()
    }

    /// Inserts `{i, j}`; self-pairs are ignored. Returns whether the pair was new.
    pub fn insert(&mut self, i: usize, j: usize) -> bool {
        if i == j {
            return false;
        }
        self.edges.insert(ordered(i, j))
    }

    pub fn remove(&mut self, i: usize, j: usize) -> bool {
        self.edges.remove(&ordered(i, j))
    }

    pub fn contains(&self, i: usize, j: usize) -> bool {
        i != j && self.edges.contains(&ordered(i, j))
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    /// Pairs in ascending `(i, j)` order with `i < j`.
    pub fn iter(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.edges.iter().copied()
    }

    /// Largest node index referenced, if any.
    pub fn max_index(&self) -> Option<usize> {
        self.edges.iter().map(|&(_, j)| j).max()
    }

    pub fn union(&self, other: &EdgeSet) -> EdgeSet {
        EdgeSet {
            edges: self.edges.union(&other.edges).copied().collect(),
        }
    }

    pub fn difference(&self, other: &EdgeSet) -> EdgeSet {
        EdgeSet {
            edges: self.edges.difference(&other.edges).copied().collect(),
        }
    }

    pub fn intersection(&self, other: &EdgeSet) -> EdgeSet {
        EdgeSet {
            edges: self.edges.intersection(&other.edges).copied().collect(),
        }
    }

    pub fn extend_from(&mut self, other: &EdgeSet) {
        self.edges.extend(other.edges.iter().copied());
    }
}

impl FromIterator<(usize, usize)> for EdgeSet {
    fn from_iter<T: IntoIterator<Item = (usize, usize)>>(iter: T) -> Self {
        let mut set = EdgeSet::new();
        for (i, j) in iter {
            set.insert(i, j);
        }
        set
    }
}

fn ordered(i: usize, j: usize) -> (usize, usize) {
    if i < j {
        (i, j)
    } else {
        (j, i)
    }
}

/// Symmetric weighted adjacency in compressed-row form.
///
/// Row `i` holds the sorted neighbor indices of node `i` with one weight per
/// entry; `j` is in row `i` iff `i` is in row `j`, with equal weights.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseAdjacency {
    n: usize,
    offsets: Vec<usize>,
    cols: Vec<usize>,
    weights: Vec<f64>,
}

impl SparseAdjacency {
    /// Graph with `n` nodes and no edges.
    pub fn empty(n: usize) -> Self {
        Self {
            n,
            offsets: vec![0; n + 1],
            cols: Vec::new(),
            weights: Vec::new(),
        }
    }

    /// Unit-weight adjacency over `n` nodes.
    pub fn from_edge_set(n: usize, edges: &EdgeSet) -> Result<Self> {
        if let Some(max) = edges.max_index() {
            if max >= n {
                return Err(Error::IndexOutOfRange { index: max, n });
            }
        }
        let mut degree = vec![0usize; n];
        for (i, j) in edges.iter() {
            degree[i] += 1;
            degree[j] += 1;
        }
        let mut offsets = vec![0usize; n + 1];
        for i in 0..n {
            offsets[i + 1] = offsets[i] + degree[i];
        }
        let mut cursor = offsets[..n].to_vec();
        let mut cols = vec![0usize; offsets[n]];
        // Ascending (i, j) iteration fills every row in sorted order: row r first
        // receives all j < r (as the second element), then all j > r.
        for (i, j) in edges.iter() {
            cols[cursor[i]] = j;
            cursor[i] += 1;
            cols[cursor[j]] = i;
            cursor[j] += 1;
        }
        let weights = vec![1.0; cols.len()];
        Ok(Self {
            n,
            offsets,
            cols,
            weights,
        })
    }

    /// Builds from explicit `(i, j, w)` entries, each listed once per
    /// direction. Rejects asymmetric input, duplicates, negative or non-finite
    /// weights, and out-of-range indices. Diagonal entries are allowed.
    pub fn from_triplets(n: usize, mut entries: Vec<(usize, usize, f64)>) -> Result<Self> {
        for &(i, j, w) in &entries {
            if i >= n || j >= n {
                return Err(Error::IndexOutOfRange { index: i.max(j), n });
            }
            if !(w.is_finite() && w >= 0.0) {
                return Err(Error::InvalidInput(format!(
                    "edge ({i}, {j}) has invalid weight {w}"
                )));
            }
        }
        entries.sort_by_key(|a| (a.0, a.1));
        if let Some(w) = entries
            .windows(2)
            .find(|w| (w[0].0, w[0].1) == (w[1].0, w[1].1))
        {
            return Err(Error::InvalidInput(format!(
                "duplicate entry ({}, {})",
                w[0].0, w[0].1
            )));
        }
        let mut offsets = vec![0usize; n + 1];
        for &(i, _, _) in &entries {
            offsets[i + 1] += 1;
        }
        for i in 0..n {
            offsets[i + 1] += offsets[i];
        }
        let adj = Self {
            n,
            offsets,
            cols: entries.iter().map(|e| e.1).collect(),
            weights: entries.iter().map(|e| e.2).collect(),
        };
        if !adj.is_symmetric() {
            return Err(Error::InvalidInput(
                "adjacency entries are not symmetric".into(),
            ));
        }
        Ok(adj)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Stored entries, counting both directions and any diagonal entries.
    pub fn nnz(&self) -> usize {
        self.cols.len()
    }

    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.cols[self.offsets[i]..self.offsets[i + 1]]
    }

    pub fn row_weights(&self, i: usize) -> &[f64] {
        &self.weights[self.offsets[i]..self.offsets[i + 1]]
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.neighbors(i)
            .iter()
            .copied()
            .zip(self.row_weights(i).iter().copied())
    }

    /// Weight of entry `(i, j)`, or 0 when absent.
    pub fn weight(&self, i: usize, j: usize) -> f64 {
        match self.neighbors(i).binary_search(&j) {
            Ok(pos) => self.row_weights(i)[pos],
            Err(_) => 0.0,
        }
    }

    /// Weighted degree `sum_j A_ij`.
    pub fn degree(&self, i: usize) -> f64 {
        self.row_weights(i).iter().sum()
    }

    pub fn has_self_loops(&self) -> bool {
        (0..self.n).any(|i| self.neighbors(i).binary_search(&i).is_ok())
    }

    /// Number of undirected off-diagonal edges.
    pub fn edge_count(&self) -> usize {
        let off_diagonal = (0..self.n)
            .map(|i| self.neighbors(i).iter().filter(|&&j| j != i).count())
            .sum::<usize>();
        off_diagonal / 2
    }

    /// Checks symmetry of structure and weights, sortedness and index range.
    pub fn is_symmetric(&self) -> bool {
        (0..self.n).all(|i| {
            let row = self.neighbors(i);
            row.windows(2).all(|w| w[0] < w[1])
                && self.row(i).all(|(j, w)| {
                    j < self.n
                        && match self.neighbors(j).binary_search(&i) {
                            Ok(pos) => self.row_weights(j)[pos] == w,
                            Err(_) => false,
                        }
                })
        })
    }

    /// Off-diagonal structure as an edge set (weights dropped).
    pub fn to_edge_set(&self) -> EdgeSet {
        let mut set = EdgeSet::new();
        for i in 0..self.n {
            for &j in self.neighbors(i) {
                if i < j {
                    set.insert(i, j);
                }
            }
        }
        set
    }

    /// Copy with `weight` added on every diagonal entry (`A + w I`).
    pub fn with_self_loops(&self, weight: f64) -> SparseAdjacency {
        let mut entries = Vec::with_capacity(self.nnz() + self.n);
        for i in 0..self.n {
            let mut placed = false;
            for (j, w) in self.row(i) {
                if j == i {
                    entries.push((i, j, w + weight));
                    placed = true;
                } else {
                    if j > i && !placed {
                        entries.push((i, i, weight));
                        placed = true;
                    }
                    entries.push((i, j, w));
                }
            }
            if !placed {
                entries.push((i, i, weight));
            }
        }
        let mut offsets = vec![0usize; self.n + 1];
        for &(i, _, _) in &entries {
            offsets[i + 1] += 1;
        }
        for i in 0..self.n {
            offsets[i + 1] += offsets[i];
        }
        SparseAdjacency {
            n: self.n,
            offsets,
            cols: entries.iter().map(|e| e.1).collect(),
            weights: entries.iter().map(|e| e.2).collect(),
        }
    }

    pub fn to_dense(&self) -> Array2<f64> {
        let mut dense = Array2::zeros((self.n, self.n));
        for i in 0..self.n {
            for (j, w) in self.row(i) {
                dense[[i, j]] = w;
            }
        }
        dense
    }
}

/// Sparse-dense product `A X` for any dense right-hand side with `n` rows.
pub fn spmm_view(adj: &SparseAdjacency, x: ArrayView2<'_, f64>) -> Result<Array2<f64>> {
    if x.nrows() != adj.n() {
        return Err(Error::DimensionMismatch {
            context: "spmm (adjacency n vs matrix rows)",
            expected: adj.n(),
            found: x.nrows(),
        });
    }
    let mut out = Array2::zeros(x.raw_dim());
    for (i, mut out_row) in out.rows_mut().into_iter().enumerate() {
        for (j, w) in adj.row(i) {
            out_row.scaled_add(w, &x.row(j));
        }
    }
    Ok(out)
}

/// `Y[i] = sum_{j in N(i)} w_ij x[j]`.
pub fn spmm(adj: &SparseAdjacency, x: &FeatureMatrix) -> Result<FeatureMatrix> {
    FeatureMatrix::new(spmm_view(adj, x.view())?)
}
