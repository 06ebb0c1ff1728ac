//! Brute-force oracles and random instances shared by the integration and
//! acceptance tests.
#![allow(dead_code)]

use ndarray::{Array1, Array2};
use pagraph::classifiers::{LayerGrad, ModelParams};
use pagraph::graph::LabelAssignment;
use pagraph::{EdgeSet, FeatureMatrix, SparseAdjacency};
use rand::seq::SliceRandom;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_matrix(rng: &mut impl Rng, n: usize, d: usize) -> Array2<f64> {
    Array2::from_shape_fn((n, d), |_| rng.random_range(-1.0..1.0))
}

pub fn random_features(rng: &mut impl Rng, n: usize, d: usize) -> FeatureMatrix {
    FeatureMatrix::new(random_matrix(rng, n, d)).unwrap()
}

/// Erdos-Renyi edge set over `n` nodes.
pub fn random_edges(rng: &mut impl Rng, n: usize, p: f64) -> EdgeSet {
    let mut e = EdgeSet::new();
    for i in 0..n {
        for j in i + 1..n {
            if rng.random_bool(p) {
                e.insert(i, j);
            }
        }
    }
    e
}

pub fn random_graph(rng: &mut impl Rng, n: usize, p: f64) -> SparseAdjacency {
    SparseAdjacency::from_edge_set(n, &random_edges(rng, n, p)).unwrap()
}

/// Random labels over `classes` classes with a random train/valid/test split.
pub fn random_labels(
    rng: &mut impl Rng,
    n: usize,
    classes: usize,
    train: usize,
    valid: usize,
) -> (Vec<usize>, LabelAssignment) {
    let truth: Vec<usize> = (0..n)
        .map(|i| {
            if i < classes {
                i
            } else {
                rng.random_range(0..classes)
            }
        })
        .collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let mut tr = order[..train].to_vec();
    let mut va = order[train..train + valid].to_vec();
    let mut te = order[train + valid..].to_vec();
    tr.sort_unstable();
    va.sort_unstable();
    te.sort_unstable();
    let labels = LabelAssignment::from_truth(&truth, tr, va, te).unwrap();
    (truth, labels)
}

/// `D^{-1/2} (A + I) D^{-1/2}` built densely.
pub fn dense_normalized(adj: &SparseAdjacency) -> Array2<f64> {
    let n = adj.n();
    let mut a = adj.to_dense();
    for i in 0..n {
        a[[i, i]] += 1.0;
    }
    let d: Vec<f64> = (0..n).map(|i| a.row(i).sum()).collect();
    Array2::from_shape_fn((n, n), |(i, j)| a[[i, j]] / (d[i] * d[j]).sqrt())
}

pub fn dense_power(m: &Array2<f64>, k: usize) -> Array2<f64> {
    let mut out = Array2::eye(m.nrows());
    for _ in 0..k {
        out = out.dot(m);
    }
    out
}

pub fn max_abs_diff(a: &Array2<f64>, b: &Array2<f64>) -> f64 {
    assert_eq!(a.dim(), b.dim());
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

/// Symmetric k-nn graph by sorting every distance row.
pub fn brute_knn(x: &FeatureMatrix, k: usize) -> EdgeSet {
    let n = x.n();
    let mut e = EdgeSet::new();
    for i in 0..n {
        let mut d: Vec<(f64, usize)> = (0..n)
            .filter(|&j| j != i)
            .map(|j| {
                let diff = &x.row(i) - &x.row(j);
                (diff.dot(&diff).sqrt(), j)
            })
            .collect();
        d.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));
        for &(_, j) in &d[..k] {
            e.insert(i, j);
        }
    }
    e
}

pub fn brute_epsilon(x: &FeatureMatrix, eps: f64) -> EdgeSet {
    let n = x.n();
    let mut e = EdgeSet::new();
    for i in 0..n {
        for j in i + 1..n {
            let diff = &x.row(i) - &x.row(j);
            if diff.dot(&diff).sqrt() <= eps {
                e.insert(i, j);
            }
        }
    }
    e
}

pub fn is_connected(n: usize, edges: &EdgeSet) -> bool {
    if n == 0 {
        return true;
    }
    let mut adj = vec![Vec::new(); n];
    for (i, j) in edges.iter() {
        adj[i].push(j);
        adj[j].push(i);
    }
    let mut seen = vec![false; n];
    let mut stack = vec![0];
    seen[0] = true;
    while let Some(u) = stack.pop() {
        for &v in &adj[u] {
            if !seen[v] {
                seen[v] = true;
                stack.push(v);
            }
        }
    }
    seen.into_iter().all(|s| s)
}

/// Connected components as sorted node lists.
pub fn components(n: usize, edges: &EdgeSet) -> Vec<Vec<usize>> {
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    for (i, j) in edges.iter() {
        let (a, b) = (find(&mut parent, i), find(&mut parent, j));
        parent[a] = b;
    }
    let mut groups: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
    for i in 0..n {
        let r = find(&mut parent, i);
        groups.entry(r).or_default().push(i);
    }
    groups.into_values().collect()
}

/// `(tn, fn, fp, tp)` by checking every pair.
pub fn brute_confusion(
    constructed: &EdgeSet,
    truth: &EdgeSet,
    n: usize,
) -> (usize, usize, usize, usize) {
    let (mut tn, mut fn_, mut fp, mut tp) = (0, 0, 0, 0);
    for i in 0..n {
        for j in i + 1..n {
            match (constructed.contains(i, j), truth.contains(i, j)) {
                (false, false) => tn += 1,
                (false, true) => fn_ += 1,
                (true, false) => fp += 1,
                (true, true) => tp += 1,
            }
        }
    }
    (tn, fn_, fp, tp)
}

/// Replaces zero-initialized biases with small random values. With zero
/// biases a node whose inputs are all dead ReLUs has a pre-activation of
/// exactly 0, where the loss has a kink and finite differences are invalid.
pub fn jitter_biases(params: &mut ModelParams, rng: &mut impl Rng) {
    for layer in &mut params.layers {
        if let Some(b) = &mut layer.bias {
            b.mapv_inplace(|_| rng.random_range(-0.1..0.1));
        }
    }
}

/// Largest relative error between `grads` and central differences of
/// `loss` at `params`, with `|a - b| / max(1, |a|, |b|)`.
pub fn gradient_check(
    params: &ModelParams,
    grads: &[LayerGrad],
    eps: f64,
    loss: impl Fn(&ModelParams) -> f64,
) -> f64 {
    let mut worst = 0.0f64;
    let rel = |a: f64, b: f64| (a - b).abs() / 1f64.max(a.abs()).max(b.abs());
    for (l, layer) in params.layers.iter().enumerate() {
        for idx in 0..layer.weight.len() {
            let (r, c) = (idx / layer.weight.ncols(), idx % layer.weight.ncols());
            let mut plus = params.clone();
            plus.layers[l].weight[[r, c]] += eps;
            let mut minus = params.clone();
            minus.layers[l].weight[[r, c]] -= eps;
            let numeric = (loss(&plus) - loss(&minus)) / (2.0 * eps);
            worst = worst.max(rel(numeric, grads[l].weight[[r, c]]));
        }
        if let Some(b) = &layer.bias {
            for k in 0..b.len() {
                let mut plus = params.clone();
                plus.layers[l].bias.as_mut().unwrap()[k] += eps;
                let mut minus = params.clone();
                minus.layers[l].bias.as_mut().unwrap()[k] -= eps;
                let numeric = (loss(&plus) - loss(&minus)) / (2.0 * eps);
                worst = worst.max(rel(numeric, grads[l].bias.as_ref().unwrap()[k]));
            }
        }
    }
    worst
}

/// Reference logits computed densely: SGC `A^K X W + b`, GCN layer by layer.
pub fn dense_logits(params: &ModelParams, x: &Array2<f64>, adj: &SparseAdjacency) -> Array2<f64> {
    let a = dense_normalized(adj);
    match params.kind {
        pagraph::classifiers::ModelKind::Sgc => {
            let layer = &params.layers[0];
            let mut z = dense_power(&a, params.k_layers).dot(x).dot(&layer.weight);
            if let Some(b) = &layer.bias {
                z += b;
            }
            z
        }
        pagraph::classifiers::ModelKind::Gcn => {
            let mut h = x.clone();
            let last = params.layers.len() - 1;
            for (l, layer) in params.layers.iter().enumerate() {
                let mut z = a.dot(&h).dot(&layer.weight);
                if let Some(b) = &layer.bias {
                    z += b;
                }
                h = if l < last { z.mapv(|v| v.max(0.0)) } else { z };
            }
            h
        }
    }
}

pub fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

pub fn column(v: &[f64]) -> Array1<f64> {
    Array1::from(v.to_vec())
}
