//! Adjacency construction: leaf co-membership edges from partition trees,
//! supervised penalty/intrinsic edges from training labels, and their fusion
//! `(E_pa ∪ E_intrinsic) \ E_penalty`.

mod baselines;
mod labels;

pub use baselines::{
    default_epsilon, default_knn_k, epsilon_graph, euclidean_mst, knn_graph, MstEdge,
};
pub use labels::LabelAssignment;

use serde::{Deserialize, Serialize};

use crate::bsp::{build_forest, PartitionTree, TreeConfig, TreeKind};
use crate::{EdgeSet, Error, FeatureMatrix, Result, RngState, SparseAdjacency};

/// Which adjacency to build.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GraphVariant {
    /// `(A_pa + A_i) - A_p`
    Full,
    /// `A_i`
    IntrinsicOnly,
    /// `A_pa - A_p`
    PaMinusPenalty,
    /// `A_pa`
    PaOnly,
    Knn,
    Epsilon,
}

impl GraphVariant {
    pub const ABLATION: [GraphVariant; 4] = [
        GraphVariant::Full,
        GraphVariant::IntrinsicOnly,
        GraphVariant::PaMinusPenalty,
        GraphVariant::PaOnly,
    ];

    pub fn uses_labels(self) -> bool {
        matches!(
            self,
            GraphVariant::Full | GraphVariant::IntrinsicOnly | GraphVariant::PaMinusPenalty
        )
    }

    pub fn uses_trees(self) -> bool {
        matches!(
            self,
            GraphVariant::Full | GraphVariant::PaMinusPenalty | GraphVariant::PaOnly
        )
    }

    pub fn name(self) -> &'static str {
        match self {
            GraphVariant::Full => "full",
            GraphVariant::IntrinsicOnly => "intrinsic_only",
            GraphVariant::PaMinusPenalty => "pa_minus_penalty",
            GraphVariant::PaOnly => "pa_only",
            GraphVariant::Knn => "knn",
            GraphVariant::Epsilon => "epsilon",
        }
    }
}

impl std::str::FromStr for GraphVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        [
            GraphVariant::Full,
            GraphVariant::IntrinsicOnly,
            GraphVariant::PaMinusPenalty,
            GraphVariant::PaOnly,
            GraphVariant::Knn,
            GraphVariant::Epsilon,
        ]
        .into_iter()
        .find(|v| v.name() == s)
        .ok_or_else(|| Error::Config(format!("unknown graph variant '{s}'")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GraphRecipe {
    pub variant: GraphVariant,
    pub tree: TreeConfig,
    /// Number of trees whose leaf edges are unioned. Must be 1 for PA trees.
    pub forest_size: usize,
    /// k for the k-nn variant; `round(ln n)` when absent.
    pub knn_k: Option<usize>,
    /// Radius for the epsilon variant; longest MST edge when absent.
    pub epsilon: Option<f64>,
}

impl Default for GraphRecipe {
    fn default() -> Self {
        Self {
            variant: GraphVariant::Full,
            tree: TreeConfig::default(),
            forest_size: 1,
            knn_k: None,
            epsilon: None,
        }
    }
}

impl GraphRecipe {
    pub fn new(variant: GraphVariant) -> Self {
        Self {
            variant,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.tree.validate()?;
        if self.forest_size == 0 {
            return Err(Error::Config("forest_size must be at least 1".into()));
        }
        if self.tree.kind == TreeKind::PrincipalAxis && self.forest_size != 1 {
            return Err(Error::Config(format!(
                "PA trees are deterministic; forest_size must be 1, got {}",
                self.forest_size
            )));
        }
        Ok(())
    }
}

/// Union over trees of the cliques on each leaf.
pub fn pa_tree_graph(trees: &[PartitionTree]) -> EdgeSet {
    let mut edges = EdgeSet::new();
    for tree in trees {
        for leaf in tree.leaves() {
            for (a, &i) in leaf.iter().enumerate() {
                for &j in &leaf[a + 1..] {
                    edges.insert(i, j);
                }
            }
        }
    }
    edges
}

/// Pairs of train nodes with different labels.
pub fn penalty_graph(labels: &LabelAssignment) -> EdgeSet {
    labelled_pairs(labels, |a, b| a != b)
}

/// Pairs of train nodes sharing a label.
pub fn intrinsic_graph(labels: &LabelAssignment) -> EdgeSet {
    labelled_pairs(labels, |a, b| a == b)
}

fn labelled_pairs(labels: &LabelAssignment, keep: impl Fn(usize, usize) -> bool) -> EdgeSet {
    let train = labels.train_labels();
    let mut edges = EdgeSet::new();
    for (a, &(i, yi)) in train.iter().enumerate() {
        for &(j, yj) in &train[a + 1..] {
            if keep(yi, yj) {
                edges.insert(i, j);
            }
        }
    }
    edges
}

/// `(pa ∪ intrinsic) \ penalty`, with set semantics.
pub fn fuse(pa: &EdgeSet, intrinsic: &EdgeSet, penalty: &EdgeSet) -> EdgeSet {
    pa.union(intrinsic).difference(penalty)
}

/// The component edge sets behind one constructed graph.
#[derive(Debug, Clone, Default)]
pub struct GraphParts {
    pub tree_edges: EdgeSet,
    pub intrinsic: EdgeSet,
    pub penalty: EdgeSet,
    pub edges: EdgeSet,
}

/// Builds the edge sets for `recipe`. `rng` seeds the trees (it replaces
/// `recipe.tree.seed`), so one recipe can be reused across runs.
pub fn build_graph_parts(
    x: &FeatureMatrix,
    labels: &LabelAssignment,
    recipe: &GraphRecipe,
    rng: RngState,
) -> Result<GraphParts> {
    recipe.validate()?;
    if labels.n() != x.n() {
        return Err(Error::DimensionMismatch {
            context: "labels vs feature rows",
            expected: x.n(),
            found: labels.n(),
        });
    }
    if recipe.variant.uses_labels() && labels.train().is_empty() {
        return Err(Error::EmptyTrainSet(format!(
            "graph variant '{}' needs labelled training nodes",
            recipe.variant.name()
        )));
    }

    let mut parts = GraphParts::default();
    if recipe.variant.uses_trees() {
        let tree_cfg = TreeConfig {
            seed: rng,
            ..recipe.tree.clone()
        };
        let trees = build_forest(x, &tree_cfg, recipe.forest_size)?;
        parts.tree_edges = pa_tree_graph(&trees);
    }
    if recipe.variant.uses_labels() {
        parts.intrinsic = intrinsic_graph(labels);
        parts.penalty = penalty_graph(labels);
    }
    parts.edges = match recipe.variant {
        GraphVariant::Full => fuse(&parts.tree_edges, &parts.intrinsic, &parts.penalty),
        GraphVariant::IntrinsicOnly => parts.intrinsic.clone(),
        GraphVariant::PaMinusPenalty => parts.tree_edges.difference(&parts.penalty),
        GraphVariant::PaOnly => parts.tree_edges.clone(),
        GraphVariant::Knn => {
            let k = recipe.knn_k.unwrap_or_else(|| default_knn_k(x.n()));
            knn_graph(x, k)?
        }
        GraphVariant::Epsilon => epsilon_graph(x, recipe.epsilon)?,
    };
    Ok(parts)
}

pub fn build_graph(
    x: &FeatureMatrix,
    labels: &LabelAssignment,
    recipe: &GraphRecipe,
    rng: RngState,
) -> Result<SparseAdjacency> {
    let parts = build_graph_parts(x, labels, recipe, rng)?;
    SparseAdjacency::from_edge_set(x.n(), &parts.edges)
}
