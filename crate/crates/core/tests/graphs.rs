mod common;

use std::collections::BTreeMap;

use common::*;
use pagraph::bsp::{build_tree, TreeConfig};
use pagraph::data::{make_split, make_synthetic, SplitCounts, SyntheticKind};
use pagraph::graph::{
    build_graph, build_graph_parts, default_epsilon, default_knn_k, epsilon_graph, euclidean_mst,
    fuse, intrinsic_graph, knn_graph, pa_tree_graph, penalty_graph, GraphRecipe, GraphVariant,
    LabelAssignment,
};
use pagraph::{EdgeSet, FeatureMatrix, RngState};
use rand::Rng;

fn class_counts(labels: &LabelAssignment) -> Vec<usize> {
    let mut counts: BTreeMap<usize, usize> = BTreeMap::new();
    for (_, y) in labels.train_labels() {
        *counts.entry(y).or_default() += 1;
    }
    counts.into_values().collect()
}

#[test]
fn supervised_edge_counts_follow_class_sizes() {
    for seed in 0..10 {
        let mut r = rng(seed);
        let (_, labels) = random_labels(&mut r, 60, 4, 25, 5);
        let counts = class_counts(&labels);
        let l: usize = counts.iter().sum();
        let sq: usize = counts.iter().map(|c| c * c).sum();
        assert_eq!(penalty_graph(&labels).len(), (l * l - sq) / 2);
        let same: usize = counts.iter().map(|c| c * (c - 1) / 2).sum();
        assert_eq!(intrinsic_graph(&labels).len(), same);
        // Only train labels contribute.
        let train = labels.train();
        for (i, j) in intrinsic_graph(&labels)
            .iter()
            .chain(penalty_graph(&labels).iter())
        {
            assert!(train.binary_search(&i).is_ok() && train.binary_search(&j).is_ok());
        }
    }
}

#[test]
fn fuse_matches_exhaustive_set_algebra() {
    for seed in 0..20 {
        let mut r = rng(50 + seed);
        let n = 30;
        let pa = random_edges(&mut r, n, 0.2);
        let intr = random_edges(&mut r, n, 0.1);
        let pen = random_edges(&mut r, n, 0.15);
        let fused = fuse(&pa, &intr, &pen);
        for i in 0..n {
            for j in i + 1..n {
                let want = (pa.contains(i, j) || intr.contains(i, j)) && !pen.contains(i, j);
                assert_eq!(fused.contains(i, j), want);
            }
        }
    }
}

#[test]
fn full_graph_on_blobs_respects_supervision() {
    let data = make_synthetic(
        SyntheticKind::Blobs { classes: 3 },
        300,
        1.0,
        RngState::new(4),
    )
    .unwrap();
    let labels = make_split(&data.truth, SplitCounts::new(50, 50, 200), RngState::new(4)).unwrap();
    let parts = build_graph_parts(
        &data.features,
        &labels,
        &GraphRecipe::new(GraphVariant::Full),
        RngState::new(1),
    )
    .unwrap();
    for i in 0..300 {
        for j in i + 1..300 {
            if parts.penalty.contains(i, j) {
                assert!(!parts.edges.contains(i, j));
            }
            if parts.intrinsic.contains(i, j) {
                assert!(parts.edges.contains(i, j));
            }
        }
    }
    assert!(!parts.penalty.is_empty() && !parts.intrinsic.is_empty());
}

#[test]
fn pa_only_is_a_union_of_small_cliques() {
    let mut r = rng(7);
    let x = random_features(&mut r, 250, 3);
    let n0 = 20;
    let labels =
        LabelAssignment::from_truth(&vec![0; 250], vec![0], vec![], (1..250).collect()).unwrap();
    let mut recipe = GraphRecipe::new(GraphVariant::PaOnly);
    recipe.tree = TreeConfig::principal_axis(n0);
    let adj = build_graph(&x, &labels, &recipe, RngState::new(0)).unwrap();
    let edges = adj.to_edge_set();
    for comp in components(250, &edges) {
        assert!(comp.len() <= n0);
        for (a, &i) in comp.iter().enumerate() {
            for &j in &comp[a + 1..] {
                assert!(edges.contains(i, j));
            }
        }
    }
    assert!(adj.is_symmetric() && !adj.has_self_loops());
}

#[test]
fn full_without_labelled_pairs_equals_pa_only() {
    let mut r = rng(8);
    let x = random_features(&mut r, 15, 2);
    let labels = LabelAssignment::from_truth(&[1; 15], vec![3], vec![], vec![]).unwrap();
    let full = build_graph(
        &x,
        &labels,
        &GraphRecipe::new(GraphVariant::Full),
        RngState::new(0),
    )
    .unwrap();
    let pa = build_graph(
        &x,
        &labels,
        &GraphRecipe::new(GraphVariant::PaOnly),
        RngState::new(0),
    )
    .unwrap();
    assert_eq!(full, pa);
    assert_eq!(pa.edge_count(), 15 * 14 / 2);
}

#[test]
fn rp_forest_union_example() {
    // Two trees over four points whose leaves are {0,1},{2,3} and {0,2},{1,3}.
    let x = FeatureMatrix::from_rows(&[
        vec![0.0, 0.0],
        vec![0.0, 1.0],
        vec![1.0, 0.0],
        vec![1.0, 1.0],
    ])
    .unwrap();
    let mut vertical = None;
    let mut horizontal = None;
    for seed in 0..200 {
        let tree = build_tree(&x, &TreeConfig::random_projection(2, RngState::new(seed))).unwrap();
        match tree.leaves().as_slice() {
            [a, b] if a.len() == 2 && b.len() == 2 => {
                let mut key = vec![a.clone(), b.clone()];
                key.sort();
                if key == vec![vec![0, 1], vec![2, 3]] {
                    vertical.get_or_insert(tree);
                } else if key == vec![vec![0, 2], vec![1, 3]] {
                    horizontal.get_or_insert(tree);
                }
            }
            _ => {}
        }
    }
    let trees = vec![
        vertical.expect("some seed splits on x"),
        horizontal.expect("some seed splits on y"),
    ];
    let want: EdgeSet = [(0, 1), (2, 3), (0, 2), (1, 3)].into_iter().collect();
    assert_eq!(pa_tree_graph(&trees), want);
}

#[test]
fn knn_matches_brute_force_sort() {
    for seed in 0..10 {
        let mut r = rng(200 + seed);
        let n = r.random_range(5..=200);
        let d = r.random_range(1..=5);
        let x = random_features(&mut r, n, d);
        let k = if seed == 0 { 4 } else { default_knn_k(n) };
        let got = knn_graph(&x, k).unwrap();
        assert_eq!(got, brute_knn(&x, k));
        let adj = pagraph::SparseAdjacency::from_edge_set(n, &got).unwrap();
        assert!((0..n).all(|i| adj.neighbors(i).len() >= k));
    }
    let x = FeatureMatrix::from_rows(&[vec![0.0], vec![1.0], vec![10.0]]).unwrap();
    let want: EdgeSet = [(0, 1), (1, 2)].into_iter().collect();
    assert_eq!(knn_graph(&x, 1).unwrap(), want);
    assert_eq!(knn_graph(&x, 2).unwrap().len(), 3);
}

#[test]
fn default_epsilon_contains_the_mst() {
    for seed in 0..15 {
        let mut r = rng(300 + seed);
        let n = r.random_range(2..=150);
        let d = r.random_range(1..=4);
        let x = random_features(&mut r, n, d);
        let eps = default_epsilon(&x);
        let g = epsilon_graph(&x, None).unwrap();
        assert_eq!(g, brute_epsilon(&x, eps));
        for (i, j, _) in euclidean_mst(&x) {
            assert!(g.contains(i, j));
        }
        assert!(is_connected(n, &g));
    }
    let x = FeatureMatrix::from_rows(&[vec![0.0], vec![1.0], vec![3.0]]).unwrap();
    assert_eq!(default_epsilon(&x), 2.0);
    let want: EdgeSet = [(0, 1), (1, 2)].into_iter().collect();
    assert_eq!(epsilon_graph(&x, None).unwrap(), want);
}

#[test]
fn supervised_variants_need_train_labels() {
    let mut r = rng(9);
    let x = random_features(&mut r, 10, 2);
    let labels = LabelAssignment::from_truth(&[0; 10], vec![], vec![], (0..10).collect()).unwrap();
    for v in [
        GraphVariant::Full,
        GraphVariant::IntrinsicOnly,
        GraphVariant::PaMinusPenalty,
    ] {
        assert!(build_graph(&x, &labels, &GraphRecipe::new(v), RngState::new(0)).is_err());
    }
    assert!(build_graph(
        &x,
        &labels,
        &GraphRecipe::new(GraphVariant::PaOnly),
        RngState::new(0)
    )
    .is_ok());
}
