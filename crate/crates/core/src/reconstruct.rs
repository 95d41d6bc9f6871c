//! Assembly of a tree from its trivariate structures, and the estimation
//! pipeline built on top of it.
//!
//! Every branching node is the union of the leaf pairs whose lowest common
//! ancestor it is. Each pair sees `d - 2` trivariate trees; two pairs with a
//! common lca leaf-set in any of them belong to the same node, and the
//! transitive closure of that relation recovers the node classes.

use std::collections::{BTreeMap, HashMap};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::rng::substream_seed;
use crate::tree::{validate, LeafSet, TreeStructure, TripleKey, TripleShape, Violation};
use crate::triad::{triple_test, TripleDecision, TripleReport};

/// One trivariate shape per triple of `leaves`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TripleSet {
    labels: Vec<String>,
    leaves: LeafSet,
    shapes: BTreeMap<TripleKey, TripleShape>,
}

impl TripleSet {
    /// A triple set over the leaves `0..labels.len()`.
    pub fn new(labels: Vec<String>, shapes: BTreeMap<TripleKey, TripleShape>) -> TripleSet {
        let leaves = LeafSet::first(labels.len());
        TripleSet { labels, leaves, shapes }
    }

    /// The triple set induced by `tree`.
    pub fn from_tree(tree: &TreeStructure) -> Result<TripleSet> {
        Ok(TripleSet {
            labels: tree.labels().to_vec(),
            leaves: tree.leaves(),
            shapes: tree.triple_shapes()?,
        })
    }

    /// Builds the set from trivariate trees, reading off each tree's shape.
    pub fn from_trees(labels: Vec<String>, trees: &BTreeMap<TripleKey, TreeStructure>) -> Result<TripleSet> {
        let shapes = trees
            .iter()
            .map(|(&key, tree)| {
                if tree.leaves() != key.leaf_set() {
                    return Err(Error::Domain(format!("tree {tree} does not span the triple {key}")));
                }
                Ok((key, tree.triple_shape(key)?))
            })
            .collect::<Result<_>>()?;
        Ok(TripleSet::new(labels, shapes))
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn leaves(&self) -> LeafSet {
        self.leaves
    }

    pub fn shapes(&self) -> &BTreeMap<TripleKey, TripleShape> {
        &self.shapes
    }

    pub fn get(&self, key: TripleKey) -> Option<TripleShape> {
        self.shapes.get(&key).copied()
    }

    pub fn insert(&mut self, key: TripleKey, shape: TripleShape) {
        self.shapes.insert(key, shape);
    }

    fn check_complete(&self) -> Result<()> {
        if self.leaves.len() < 3 {
            return Err(Error::IncompleteTripleSet(format!("need at least 3 leaves, got {}", self.leaves.len())));
        }
        for key in TripleKey::all(self.leaves) {
            match self.shapes.get(&key) {
                None => return Err(Error::IncompleteTripleSet(format!("triple {key} is missing"))),
                Some(&TripleShape::Inner(a, b)) if a == b || !key.leaf_set().contains(a) || !key.leaf_set().contains(b) => {
                    return Err(Error::IncompleteTripleSet(format!("triple {key} has an inner pair outside it")))
                }
                _ => {}
            }
        }
        let expected = TripleKey::all(self.leaves).len();
        if self.shapes.len() != expected {
            return Err(Error::IncompleteTripleSet(format!(
                "expected {expected} triples, got {}",
                self.shapes.len()
            )));
        }
        Ok(())
    }
}

/// For each leaf pair `(i, j)`, `i < j`, the lca leaf-sets from the `d - 2`
/// triples containing it, ordered by the third leaf.
pub type PairLcaTable = BTreeMap<(usize, usize), Vec<LeafSet>>;

pub fn pair_lca_table(ts: &TripleSet) -> Result<PairLcaTable> {
    ts.check_complete()?;
    let leaves: Vec<usize> = ts.leaves.iter().collect();
    let mut table = PairLcaTable::new();
    for (x, &i) in leaves.iter().enumerate() {
        for &j in &leaves[x + 1..] {
            let entries = leaves
                .iter()
                .filter(|&&k| k != i && k != j)
                .map(|&k| {
                    let key = TripleKey::new(i, j, k).expect("distinct leaves");
                    ts.shapes[&key].pair_lca(key, i, j)
                })
                .collect();
            table.insert((i, j), entries);
        }
    }
    Ok(table)
}

/// Classes of the transitive closure of "share an identical lca leaf-set".
/// Classes are ordered by their first pair; pairs inside a class are sorted.
pub fn pair_classes(table: &PairLcaTable) -> Vec<Vec<(usize, usize)>> {
    let pairs: Vec<(usize, usize)> = table.keys().copied().collect();
    let mut parent: Vec<usize> = (0..pairs.len()).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    let mut owner: HashMap<LeafSet, usize> = HashMap::new();
    for (idx, pair) in pairs.iter().enumerate() {
        for set in &table[pair] {
            match owner.get(set) {
                Some(&other) => {
                    let (a, b) = (find(&mut parent, idx), find(&mut parent, other));
                    if a != b {
                        parent[a.max(b)] = a.min(b);
                    }
                }
                None => {
                    owner.insert(*set, idx);
                }
            }
        }
    }
    let mut classes: BTreeMap<usize, Vec<(usize, usize)>> = BTreeMap::new();
    for (idx, &pair) in pairs.iter().enumerate() {
        let root = find(&mut parent, idx);
        classes.entry(root).or_default().push(pair);
    }
    classes.into_values().collect()
}

/// One node per class (the union of its pairs), plus the root and all
/// singletons; duplicates merged. Nodes come out sorted.
pub fn assemble(classes: &[Vec<(usize, usize)>], leaves: LeafSet) -> Vec<LeafSet> {
    let mut nodes: Vec<LeafSet> = classes
        .iter()
        .map(|class| {
            class
                .iter()
                .fold(LeafSet::EMPTY, |acc, &(i, j)| acc.union(LeafSet::singleton(i)).union(LeafSet::singleton(j)))
        })
        .collect();
    nodes.push(leaves);
    nodes.extend(leaves.iter().map(LeafSet::singleton));
    nodes.sort();
    nodes.dedup();
    nodes
}

/// Why a triple set does not come from any tree.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Fault {
    /// The assembled node family is not a tree.
    Invalid(Violation),
    /// The assembled tree induces a different shape on some triple.
    Inconsistent { triple: TripleKey, given: TripleShape, induced: TripleShape },
}

impl Fault {
    pub fn describe(&self, labels: &[String]) -> String {
        match self {
            Fault::Invalid(v) => format!("assembled nodes are not a tree: {v}"),
            Fault::Inconsistent { triple, given, induced } => format!(
                "the assembled tree induces {} on {}, but the triple set has {}",
                crate::triad::shape_text(*induced, *triple, labels),
                triple,
                crate::triad::shape_text(*given, *triple, labels),
            ),
        }
    }
}

/// Outcome of assembling a triple set.
#[derive(Debug, Clone, PartialEq)]
pub enum Assembly {
    Valid(TreeStructure),
    Faulty(Fault),
}

/// Assembles the triple set and checks the result.
///
/// The set is faulty when the assembled node family is not a tree, or when
/// the tree it forms does not induce the given triple set back.
pub fn detect_faulty(ts: &TripleSet) -> Result<Assembly> {
    let table = pair_lca_table(ts)?;
    let nodes = assemble(&pair_classes(&table), ts.leaves);
    if let Err(v) = validate(&nodes, ts.leaves) {
        return Ok(Assembly::Faulty(Fault::Invalid(v)));
    }
    let tree = TreeStructure::new(ts.labels.clone(), ts.leaves, &nodes)?;
    for (&key, &given) in &ts.shapes {
        let induced = tree.triple_shape(key)?;
        if induced != given {
            return Ok(Assembly::Faulty(Fault::Inconsistent { triple: key, given, induced }));
        }
    }
    Ok(Assembly::Valid(tree))
}

/// Recovers the tree whose triple set is `ts`.
pub fn recover(ts: &TripleSet) -> Result<TreeStructure> {
    match detect_faulty(ts)? {
        Assembly::Valid(tree) => Ok(tree),
        Assembly::Faulty(fault) => Err(Error::Faulty(fault.describe(&ts.labels))),
    }
}

/// Result of [`estimate_structure`].
#[derive(Debug, Clone, PartialEq)]
pub struct Estimate {
    pub tree: TreeStructure,
    pub decisions: Vec<TripleDecision>,
    /// The threshold whose triple set was accepted.
    pub alpha: f64,
    pub alpha0: f64,
    /// Thresholds tried before `alpha`, each with the reason it failed.
    pub faulty: Vec<(f64, Fault)>,
}

/// The threshold sequence swept by [`estimate_structure`]: `alpha0`, the
/// p-values below it in decreasing order, then zero.
pub fn thresholds(alpha0: f64, p_values: impl IntoIterator<Item = f64>) -> Vec<f64> {
    let mut out: Vec<f64> = p_values.into_iter().filter(|&p| p < alpha0).collect();
    out.push(alpha0);
    out.push(0.0);
    out.sort_by(|a, b| b.total_cmp(a));
    out.dedup();
    out
}

/// Triple set adopted at level `alpha`.
pub fn triple_set_at(labels: &[String], decisions: &[TripleDecision], alpha: f64) -> TripleSet {
    let shapes = decisions.iter().map(|d| (d.triple, d.decide(alpha))).collect();
    TripleSet::new(labels.to_vec(), shapes)
}

/// Tests every triple once, then lowers the level from `alpha0` through the
/// observed p-values until the adopted triple set assembles into a tree.
/// At level zero every triple is a fan, which always assembles.
pub fn estimate_structure(data: &Dataset, alpha0: f64, bootstrap: usize, seed: u64) -> Result<Estimate> {
    if !(0.0..=1.0).contains(&alpha0) {
        return Err(Error::Domain(format!("alpha must lie in [0, 1], got {alpha0}")));
    }
    let d = data.d();
    if d < 3 {
        return Err(Error::Domain(format!("need at least 3 columns, got {d}")));
    }
    if d > crate::tree::MAX_LEAVES {
        return Err(Error::Domain(format!("at most {} columns are supported", crate::tree::MAX_LEAVES)));
    }
    let keys = TripleKey::all(LeafSet::first(d));
    let decisions = keys
        .par_iter()
        .enumerate()
        .map(|(t, &key)| {
            let [a, b, c] = key.leaves();
            let cols = data.columns();
            triple_test(&cols[a], &cols[b], &cols[c], key, bootstrap, substream_seed(seed, t as u64))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut faulty = Vec::new();
    for alpha in thresholds(alpha0, decisions.iter().map(|d| d.p_value)) {
        let ts = triple_set_at(data.labels(), &decisions, alpha);
        match detect_faulty(&ts)? {
            Assembly::Valid(tree) => return Ok(Estimate { tree, decisions, alpha, alpha0, faulty }),
            Assembly::Faulty(fault) => faulty.push((alpha, fault)),
        }
    }
    unreachable!("the all-fan triple set always assembles")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FaultyThreshold {
    pub alpha: f64,
    pub reason: String,
}

/// Serializable diagnostics of an estimate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub alpha0: f64,
    pub chosen_alpha: f64,
    pub faulty_thresholds: Vec<FaultyThreshold>,
    pub triples: Vec<TripleReport>,
}

impl Estimate {
    pub fn diagnostics(&self) -> Diagnostics {
        let labels = self.tree.labels();
        Diagnostics {
            alpha0: self.alpha0,
            chosen_alpha: self.alpha,
            faulty_thresholds: self
                .faulty
                .iter()
                .map(|(alpha, fault)| FaultyThreshold { alpha: *alpha, reason: fault.describe(labels) })
                .collect(),
            triples: self.decisions.iter().map(|d| d.report(labels)).collect(),
        }
    }
}
