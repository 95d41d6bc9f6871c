//! Helpers shared by the integration tests.
#![allow(dead_code)]

use nactree::kendall::KendallSample;
use nactree::{LeafSet, TreeStructure};

pub fn labels(d: usize) -> Vec<String> {
    TreeStructure::default_labels(d)
}

/// Every subset of `set` with at least `min` elements.
pub fn subsets(set: LeafSet, min: usize) -> Vec<LeafSet> {
    let members: Vec<usize> = set.iter().collect();
    (0u64..1 << members.len())
        .map(|mask| members.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, &l)| l).collect::<LeafSet>())
        .filter(|s| s.len() >= min)
        .collect()
}

/// Counterexamples found by exhaustive enumeration to: the lca equivalence
/// under restriction, the restriction identity for lca, and the
/// two-children characterization of lca.
pub fn lca_counterexamples(tree: &TreeStructure) -> usize {
    let all = tree.leaves();
    let mut bad = 0;
    let lca_in = |t: &TreeStructure, s: LeafSet| t.lca(s).expect("lca of a subset");
    // lca(A) is A's parent-most node: B meets two children of lca(B).
    for b in subsets(all, 2) {
        let top = lca_in(tree, b);
        for a in tree.branching_nodes() {
            let meets = tree.children(a).into_iter().filter(|c| !c.is_disjoint(b)).count();
            let rhs = b.is_subset(a) && meets >= 2;
            if (top == a) != rhs {
                bad += 1;
            }
        }
    }
    for c in subsets(all, 2) {
        let restricted = tree.induce(c).expect("induce on a nonempty subset");
        let inside = subsets(c, 2);
        let outer: Vec<LeafSet> = inside.iter().map(|&t| lca_in(tree, t)).collect();
        let inner: Vec<LeafSet> = inside.iter().map(|&t| lca_in(&restricted, t)).collect();
        for k in 0..inside.len() {
            if inner[k] != outer[k].intersection(c) {
                bad += 1;
            }
        }
        for i in 0..inside.len() {
            for j in i + 1..inside.len() {
                if (outer[i] == outer[j]) != (inner[i] == inner[j]) {
                    bad += 1;
                }
            }
        }
    }
    bad
}

/// Whether every branching node is the union of the pairs whose lca it is.
pub fn pairs_rebuild_nodes(tree: &TreeStructure) -> bool {
    let leaves: Vec<usize> = tree.leaves().iter().collect();
    tree.branching_nodes().into_iter().all(|node| {
        let mut union = LeafSet::default();
        for (x, &i) in leaves.iter().enumerate() {
            for &j in &leaves[x + 1..] {
                let pair: LeafSet = [i, j].into_iter().collect();
                if tree.lca(pair).unwrap() == node {
                    union = union.union(pair);
                }
            }
        }
        union == node
    })
}

/// The integral over [0, 1] of |K_a - K_b| computed on the merged jump grid.
pub fn merged_grid_integral(a: &KendallSample, b: &KendallSample) -> f64 {
    let (va, vb) = (a.sorted_values(), b.sorted_values());
    let mut grid: Vec<f64> = va.iter().chain(&vb).copied().chain([0.0, 1.0]).collect();
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    let cdf = |v: &[f64], t: f64| v.partition_point(|&w| w <= t) as f64 / v.len() as f64;
    grid.windows(2).map(|w| (cdf(&va, w[0]) - cdf(&vb, w[0])).abs() * (w[1] - w[0])).sum()
}

/// Kolmogorov distance between the empirical law of `values` and `cdf`.
pub fn ks_distance(values: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len() as f64;
    let mut worst: f64 = 0.0;
    let mut i = 0;
    while i < v.len() {
        let mut j = i;
        while j < v.len() && v[j] == v[i] {
            j += 1;
        }
        let f = cdf(v[i]);
        worst = worst.max((f - i as f64 / n).abs()).max((f - j as f64 / n).abs());
        i = j;
    }
    worst
}

pub fn uniform_cdf(u: f64) -> f64 {
    u.clamp(0.0, 1.0)
}
