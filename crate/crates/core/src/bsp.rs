//! Binary space-partitioning trees whose leaves partition the node set.
//!
//! Both tree kinds split a subset `S` at the lower median `c` of the
//! projections `x^T u` and send `x^T u <= c` to the left child. They differ
//! only in the direction `u`:
//!
//! * principal-axis (PA) trees use the first principal component of `S`,
//!   found by power iteration on the covariance of the centred points;
//! * random-projection (RP) trees draw `u` uniformly from the unit sphere.
//!
//! Recursion stops once `|S| <= leaf_size`. Two degenerate cases would stall
//! the median rule and are handled by a balanced split of the sorted order:
//! all points identical (no direction exists), and ties at the median that
//! leave the right child empty.

use ndarray::{Array1, ArrayView1};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::rng::streams;
use crate::{Error, FeatureMatrix, Result, RngState};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TreeKind {
    #[serde(alias = "pa")]
    PrincipalAxis,
    #[serde(alias = "rp")]
    RandomProjection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TreeConfig {
    /// Maximum number of points in a leaf (`n0`).
    pub leaf_size: usize,
    pub kind: TreeKind,
    /// Direction stream for RP trees; PA trees only use it for the
    /// perturbed power-iteration start.
    pub seed: RngState,
    pub power_iters: usize,
    pub power_tol: f64,
}

impl Default for TreeConfig {
    fn default() -> Self {
        Self {
            leaf_size: 20,
            kind: TreeKind::PrincipalAxis,
            seed: RngState::default(),
            power_iters: 100,
            power_tol: 1e-9,
        }
    }
}

impl TreeConfig {
    pub fn principal_axis(leaf_size: usize) -> Self {
        Self {
            leaf_size,
            ..Self::default()
        }
    }

    pub fn random_projection(leaf_size: usize, seed: RngState) -> Self {
        Self {
            leaf_size,
            kind: TreeKind::RandomProjection,
            seed,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.leaf_size == 0 {
            return Err(Error::Config("leaf_size (n0) must be at least 1".into()));
        }
        if self.power_iters == 0 || !(self.power_tol > 0.0) {
            return Err(Error::Config(
                "power_iters must be >= 1 and power_tol > 0".into(),
            ));
        }
        Ok(())
    }
}

/// How an internal node divided its points.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SplitRule {
    /// `x^T u <= c` with `c` the lower median projection.
    Median,
    /// Median ties emptied the right side; split the (projection, index)
    /// order in half instead.
    TieFallback,
    /// All points identical; split the index order in half.
    ZeroVariance,
}

#[derive(Debug, Clone)]
enum Node {
    Leaf(Vec<usize>),
    Split {
        direction: Vec<f64>,
        threshold: f64,
        rule: SplitRule,
        left: usize,
        right: usize,
    },
}

/// View of one internal node, with the points routed to each side.
#[derive(Debug, Clone)]
pub struct SplitView<'a> {
    pub direction: &'a [f64],
    pub threshold: f64,
    pub rule: SplitRule,
    pub left: Vec<usize>,
    pub right: Vec<usize>,
}

#[derive(Debug, Clone)]
pub struct PartitionTree {
    n: usize,
    nodes: Vec<Node>,
    root: usize,
    config: TreeConfig,
}

impl PartitionTree {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn config(&self) -> &TreeConfig {
        &self.config
    }

    /// Leaf index lists in left-to-right order, each sorted ascending.
    pub fn leaves(&self) -> Vec<Vec<usize>> {
        let mut out = Vec::new();
        self.collect_leaves(self.root, &mut out);
        out
    }

    fn collect_leaves(&self, id: usize, out: &mut Vec<Vec<usize>>) {
        match &self.nodes[id] {
            Node::Leaf(points) => out.push(points.clone()),
            Node::Split { left, right, .. } => {
                self.collect_leaves(*left, out);
                self.collect_leaves(*right, out);
            }
        }
    }

    fn points_under(&self, id: usize) -> Vec<usize> {
        let mut leaves = Vec::new();
        self.collect_leaves(id, &mut leaves);
        let mut points: Vec<usize> = leaves.into_iter().flatten().collect();
        points.sort_unstable();
        points
    }

    pub fn leaf_count(&self) -> usize {
        self.nodes
            .iter()
            .filter(|node| matches!(node, Node::Leaf(_)))
            .count()
    }

    /// Longest root-to-leaf path, counted in edges.
    pub fn depth(&self) -> usize {
        fn walk(nodes: &[Node], id: usize) -> usize {
            match &nodes[id] {
                Node::Leaf(_) => 0,
                Node::Split { left, right, .. } => 1 + walk(nodes, *left).max(walk(nodes, *right)),
            }
        }
        walk(&self.nodes, self.root)
    }

    /// Internal nodes in pre-order.
    pub fn splits(&self) -> Vec<SplitView<'_>> {
        let mut out = Vec::new();
        let mut stack = vec![self.root];
        while let Some(id) = stack.pop() {
            if let Node::Split {
                direction,
                threshold,
                rule,
                left,
                right,
            } = &self.nodes[id]
            {
                out.push(SplitView {
                    direction,
                    threshold: *threshold,
                    rule: *rule,
                    left: self.points_under(*left),
                    right: self.points_under(*right),
                });
                stack.push(*right);
                stack.push(*left);
            }
        }
        out
    }
}

/// Builds a PA- or RP-tree depending on `cfg.kind`.
pub fn build_tree(x: &FeatureMatrix, cfg: &TreeConfig) -> Result<PartitionTree> {
    cfg.validate()?;
    let mut builder = Builder {
        x,
        cfg,
        nodes: Vec::new(),
        rng: cfg.seed.fork(streams::TREE).rng(),
        retry: cfg.seed.fork(streams::POWER_RETRY).rng(),
    };
    let all: Vec<usize> = (0..x.n()).collect();
    let root = builder.grow(all);
    Ok(PartitionTree {
        n: x.n(),
        nodes: builder.nodes,
        root,
        config: cfg.clone(),
    })
}

pub fn build_pa_tree(x: &FeatureMatrix, cfg: &TreeConfig) -> Result<PartitionTree> {
    if cfg.kind != TreeKind::PrincipalAxis {
        return Err(Error::Config(
            "build_pa_tree needs a principal-axis config".into(),
        ));
    }
    build_tree(x, cfg)
}

pub fn build_rp_tree(x: &FeatureMatrix, cfg: &TreeConfig) -> Result<PartitionTree> {
    if cfg.kind != TreeKind::RandomProjection {
        return Err(Error::Config(
            "build_rp_tree needs a random-projection config".into(),
        ));
    }
    build_tree(x, cfg)
}

/// `count` trees with seeds forked from `cfg.seed`, built in parallel.
pub fn build_forest(
    x: &FeatureMatrix,
    cfg: &TreeConfig,
    count: usize,
) -> Result<Vec<PartitionTree>> {
    if count == 0 {
        return Err(Error::Config("forest needs at least one tree".into()));
    }
    if count == 1 {
        return Ok(vec![build_tree(x, cfg)?]);
    }
    (0..count)
        .into_par_iter()
        .map(|t| {
            let tree_cfg = TreeConfig {
                seed: cfg.seed.fork(t as u64),
                ..cfg.clone()
            };
            build_tree(x, &tree_cfg)
        })
        .collect()
}

struct Builder<'a> {
    x: &'a FeatureMatrix,
    cfg: &'a TreeConfig,
    nodes: Vec<Node>,
    rng: ChaCha8Rng,
    retry: ChaCha8Rng,
}

impl Builder<'_> {
    fn grow(&mut self, mut points: Vec<usize>) -> usize {
        if points.len() <= self.cfg.leaf_size {
            points.sort_unstable();
            self.nodes.push(Node::Leaf(points));
            return self.nodes.len() - 1;
        }

        let (direction, threshold, rule, left, right) = match self.direction(&points) {
            None => {
                points.sort_unstable();
                let right = points.split_off(points.len().div_ceil(2));
                (
                    vec![0.0; self.x.d()],
                    0.0,
                    SplitRule::ZeroVariance,
                    points,
                    right,
                )
            }
            Some(u) => {
                let mut projected: Vec<(f64, usize)> = points
                    .iter()
                    .map(|&i| (project(self.x.row(i), &u), i))
                    .collect();
                projected.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
                let half = projected.len().div_ceil(2);
                let threshold = projected[half - 1].0;
                let (left, right): (Vec<_>, Vec<_>) =
                    projected.iter().partition(|(p, _)| *p <= threshold);
                if right.is_empty() {
                    let left = projected[..half].iter().map(|&(_, i)| i).collect();
                    let right = projected[half..].iter().map(|&(_, i)| i).collect();
                    (u, threshold, SplitRule::TieFallback, left, right)
                } else {
                    let left = left.into_iter().map(|(_, i)| i).collect();
                    let right = right.into_iter().map(|(_, i)| i).collect();
                    (u, threshold, SplitRule::Median, left, right)
                }
            }
        };

        let left = self.grow(left);
        let right = self.grow(right);
        self.nodes.push(Node::Split {
            direction,
            threshold,
            rule,
            left,
            right,
        });
        self.nodes.len() - 1
    }

    fn direction(&mut self, points: &[usize]) -> Option<Vec<f64>> {
        let first = self.x.row(points[0]);
        if points.iter().all(|&i| self.x.row(i) == first) {
            return None;
        }
        match self.cfg.kind {
            TreeKind::RandomProjection => Some(random_unit_vector(self.x.d(), &mut self.rng)),
            TreeKind::PrincipalAxis => {
                let retry_start = perturbed_ones(self.x.d(), &mut self.retry);
                Some(principal_axis(
                    self.x,
                    points,
                    self.cfg.power_iters,
                    self.cfg.power_tol,
                    &retry_start,
                ))
            }
        }
    }
}

fn project(row: ArrayView1<'_, f64>, u: &[f64]) -> f64 {
    row.iter().zip(u).map(|(a, b)| a * b).sum()
}

fn random_unit_vector(d: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..d).map(|_| rng.sample(StandardNormal)).collect();
        let norm = v.iter().map(|a| a * a).sum::<f64>().sqrt();
        if norm > 1e-12 {
            return v.into_iter().map(|a| a / norm).collect();
        }
    }
}

fn perturbed_ones(d: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    (0..d)
        .map(|_| 1.0 + rng.sample::<f64, _>(StandardNormal))
        .collect()
}

/// Centered point subset, used as a matrix-free covariance operator.
pub struct SubsetCovariance {
    centered: Vec<Array1<f64>>,
}

impl SubsetCovariance {
    pub fn new(x: &FeatureMatrix, points: &[usize]) -> Self {
        let m = points.len() as f64;
        let mut mean = Array1::<f64>::zeros(x.d());
        for &i in points {
            mean += &x.row(i);
        }
        mean /= m;
        let centered = points.iter().map(|&i| &x.row(i) - &mean).collect();
        Self { centered }
    }

    pub fn dim(&self) -> usize {
        self.centered.first().map_or(0, |r| r.len())
    }

    /// `Cov v = (1/m) sum_i (x_i - mean) ((x_i - mean)^T v)`.
    pub fn apply(&self, v: &Array1<f64>) -> Array1<f64> {
        let mut out = Array1::zeros(v.len());
        for row in &self.centered {
            out.scaled_add(row.dot(v), row);
        }
        out / self.centered.len() as f64
    }

    pub fn to_dense(&self) -> ndarray::Array2<f64> {
        let d = self.dim();
        let mut c = ndarray::Array2::zeros((d, d));
        for row in &self.centered {
            for a in 0..d {
                for b in 0..d {
                    c[[a, b]] += row[a] * row[b];
                }
            }
        }
        c / self.centered.len() as f64
    }
}

/// Dominant eigenpair of a symmetric PSD operator by power iteration from
/// `start`. Returns the unit vector and its Rayleigh quotient.
pub fn power_iteration(
    apply: impl Fn(&Array1<f64>) -> Array1<f64>,
    start: &[f64],
    max_iters: usize,
    tol: f64,
) -> (Array1<f64>, f64) {
    let mut v = Array1::from(start.to_vec());
    let norm = v.dot(&v).sqrt();
    if norm > 0.0 {
        v /= norm;
    }
    for _ in 0..max_iters {
        let w = apply(&v);
        let w_norm = w.dot(&w).sqrt();
        if w_norm <= f64::MIN_POSITIVE {
            break;
        }
        let next = w / w_norm;
        let delta = (&next - &v).mapv(f64::abs).fold(0.0f64, |a, &b| a.max(b));
        v = next;
        if delta < tol {
            break;
        }
    }
    let lambda = v.dot(&apply(&v));
    (v, lambda)
}

/// First principal component of the rows `points`, sign-fixed so the
/// largest-magnitude component is positive.
///
/// Power iteration starts from the normalized all-ones vector. A second run
/// from a seeded perturbation of it catches the case where the ones vector
/// is orthogonal to the top eigenvector; the larger Rayleigh quotient wins.
fn principal_axis(
    x: &FeatureMatrix,
    points: &[usize],
    max_iters: usize,
    tol: f64,
    retry_start: &[f64],
) -> Vec<f64> {
    let d = x.d();
    if d == 1 {
        return vec![1.0];
    }
    let cov = SubsetCovariance::new(x, points);
    let ones = vec![1.0; d];
    let (mut best, best_lambda) = power_iteration(|v| cov.apply(v), &ones, max_iters, tol);
    let (alt, alt_lambda) = power_iteration(|v| cov.apply(v), retry_start, max_iters, tol);
    if alt_lambda > best_lambda * (1.0 + 1e-9) {
        best = alt;
    }
    let pivot = best
        .iter()
        .copied()
        .max_by(|a, b| a.abs().total_cmp(&b.abs()))
        .unwrap_or(1.0);
    if pivot < 0.0 {
        best.mapv_inplace(|a| -a);
    }
    best.to_vec()
}
