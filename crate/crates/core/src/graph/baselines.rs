//! Distance-based comparison graphs: symmetric k-nn and the epsilon graph
//! with epsilon defaulted to the longest Euclidean MST edge.

use crate::matrix::euclidean;
use crate::{EdgeSet, Error, FeatureMatrix, Result};

/// `round(ln n)`, at least 1 and at most `n - 1`.
pub fn default_knn_k(n: usize) -> usize {
    let k = (n as f64).ln().round() as usize;
    k.max(1).min(n.saturating_sub(1).max(1))
}

/// Symmetric k-nn graph: `{i, j}` whenever either endpoint lists the other
/// among its `k` nearest (ties broken by lower index).
pub fn knn_graph(x: &FeatureMatrix, k: usize) -> Result<EdgeSet> {
    let n = x.n();
    if k == 0 || k >= n {
        return Err(Error::InvalidInput(format!(
            "k-nn graph needs 1 <= k < n, got k={k}, n={n}"
        )));
    }
    let mut edges = EdgeSet::new();
    let mut candidates: Vec<(f64, usize)> = Vec::with_capacity(n - 1);
    for i in 0..n {
        candidates.clear();
        candidates.extend(
            (0..n)
                .filter(|&j| j != i)
                .map(|j| (euclidean(x.row(i), x.row(j)), j)),
        );
        candidates.select_nth_unstable_by(k - 1, |a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        for &(_, j) in &candidates[..k] {
            edges.insert(i, j);
        }
    }
    Ok(edges)
}

/// An MST edge `(i, j, length)`.
pub type MstEdge = (usize, usize, f64);

/// Euclidean minimum spanning tree by dense Prim, O(n^2) time, O(n) memory.
/// Edges are returned in the order they join the tree, starting from node 0.
pub fn euclidean_mst(x: &FeatureMatrix) -> Vec<MstEdge> {
    let n = x.n();
    let mut in_tree = vec![false; n];
    let mut best = vec![f64::INFINITY; n];
    let mut parent = vec![usize::MAX; n];
    let mut edges = Vec::with_capacity(n.saturating_sub(1));
    let mut current = 0;
    in_tree[0] = true;
    for _ in 1..n {
        let mut next = usize::MAX;
        let mut next_dist = f64::INFINITY;
        for j in 0..n {
            if in_tree[j] {
                continue;
            }
            let dist = euclidean(x.row(current), x.row(j));
            if dist < best[j] {
                best[j] = dist;
                parent[j] = current;
            }
            if best[j] < next_dist {
                next_dist = best[j];
                next = j;
            }
        }
        in_tree[next] = true;
        edges.push((parent[next], next, next_dist));
        current = next;
    }
    edges
}

/// Length of the longest MST edge; 0 for a single point.
pub fn default_epsilon(x: &FeatureMatrix) -> f64 {
    euclidean_mst(x).iter().map(|e| e.2).fold(0.0, f64::max)
}

/// `{i, j}` whenever `||x_i - x_j|| <= eps`.
pub fn epsilon_graph(x: &FeatureMatrix, eps: Option<f64>) -> Result<EdgeSet> {
    let n = x.n();
    if n < 2 {
        return Err(Error::InvalidInput(
            "epsilon graph needs at least 2 points".into(),
        ));
    }
    let eps = match eps {
        Some(e) if !(e >= 0.0) => {
            return Err(Error::InvalidInput(format!(
                "epsilon must be >= 0, got {e}"
            )))
        }
        Some(e) => e,
        None => default_epsilon(x),
    };
    let mut edges = EdgeSet::new();
    for i in 0..n {
        for j in i + 1..n {
            if euclidean(x.row(i), x.row(j)) <= eps {
                edges.insert(i, j);
            }
        }
    }
    Ok(edges)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line(xs: &[f64]) -> FeatureMatrix {
        FeatureMatrix::from_rows(&xs.iter().map(|&v| vec![v]).collect::<Vec<_>>()).unwrap()
    }

    #[test]
    fn knn_collinear_example() {
        let e = knn_graph(&line(&[0.0, 1.0, 10.0]), 1).unwrap();
        assert_eq!(e.iter().collect::<Vec<_>>(), vec![(0, 1), (1, 2)]);
    }

    #[test]
    fn knn_full_k_is_complete() {
        let x = line(&[0.0, 1.0, 3.0, 7.0, 8.0]);
        assert_eq!(knn_graph(&x, 4).unwrap().len(), 10);
        assert!(knn_graph(&x, 5).is_err());
        assert!(knn_graph(&x, 0).is_err());
    }

    #[test]
    fn knn_ties_prefer_lower_index() {
        // Node 1 is equidistant from 0 and 2.
        let e = knn_graph(&line(&[0.0, 1.0, 2.0, 50.0]), 1).unwrap();
        assert!(e.contains(0, 1) && e.contains(1, 2) && e.contains(2, 3));
        assert_eq!(e.len(), 3);
    }

    #[test]
    fn default_k_rounds_natural_log() {
        assert_eq!(default_knn_k(2), 1);
        assert_eq!(default_knn_k(100), 5); // ln 100 = 4.605
        assert_eq!(default_knn_k(2708), 8); // ln 2708 = 7.904
    }

    #[test]
    fn epsilon_two_points() {
        let e = epsilon_graph(&line(&[0.0, 4.0]), None).unwrap();
        assert_eq!(e.iter().collect::<Vec<_>>(), vec![(0, 1)]);
    }

    #[test]
    fn epsilon_hand_mst() {
        let x = line(&[0.0, 1.0, 3.0]);
        let mut lengths: Vec<f64> = euclidean_mst(&x).iter().map(|e| e.2).collect();
        lengths.sort_by(f64::total_cmp);
        assert_eq!(lengths, vec![1.0, 2.0]);
        let e = epsilon_graph(&x, None).unwrap();
        assert_eq!(e.iter().collect::<Vec<_>>(), vec![(0, 1), (1, 2)]);
        assert!(epsilon_graph(&x, Some(-1.0)).is_err());
        assert!(epsilon_graph(&line(&[1.0]), None).is_err());
    }

    #[test]
    fn duplicate_points_get_zero_length_edges() {
        let x = line(&[2.0, 2.0, 5.0]);
        let e = knn_graph(&x, 1).unwrap();
        assert!(e.contains(0, 1));
        let eps = epsilon_graph(&x, Some(0.0)).unwrap();
        assert_eq!(eps.iter().collect::<Vec<_>>(), vec![(0, 1)]);
    }
}
