//! Rooted tree structures on a finite leaf set.
//!
//! A tree is a laminar family of leaf subsets containing the full leaf set
//! and every singleton. Nodes are identified by the leaves below them, so
//! two trees are equal exactly when they have the same node sets; internal
//! labels carry no meaning.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest supported number of leaves.
pub const MAX_LEAVES: usize = 64;

/// A set of leaf indices, stored as a bitmask.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct LeafSet(u64);

impl LeafSet {
    pub const EMPTY: LeafSet = LeafSet(0);

    pub fn singleton(leaf: usize) -> LeafSet {
        assert!(leaf < MAX_LEAVES, "leaf index {leaf} out of range");
        LeafSet(1 << leaf)
    }

    /// The set `{0, 1, ..., d - 1}`.
    pub fn first(d: usize) -> LeafSet {
        assert!(d <= MAX_LEAVES, "at most {MAX_LEAVES} leaves are supported");
        if d == MAX_LEAVES {
            LeafSet(u64::MAX)
        } else {
            LeafSet((1u64 << d) - 1)
        }
    }

    pub fn from_bits(bits: u64) -> LeafSet {
        LeafSet(bits)
    }

    pub fn bits(self) -> u64 {
        self.0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn contains(self, leaf: usize) -> bool {
        leaf < MAX_LEAVES && self.0 & (1 << leaf) != 0
    }

    pub fn is_subset(self, other: LeafSet) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn intersection(self, other: LeafSet) -> LeafSet {
        LeafSet(self.0 & other.0)
    }

    pub fn union(self, other: LeafSet) -> LeafSet {
        LeafSet(self.0 | other.0)
    }

    pub fn is_disjoint(self, other: LeafSet) -> bool {
        self.0 & other.0 == 0
    }

    pub fn insert(&mut self, leaf: usize) {
        *self = self.union(LeafSet::singleton(leaf));
    }

    pub fn min_leaf(self) -> Option<usize> {
        (self.0 != 0).then(|| self.0.trailing_zeros() as usize)
    }

    pub fn iter(self) -> impl Iterator<Item = usize> {
        let mut bits = self.0;
        std::iter::from_fn(move || {
            if bits == 0 {
                return None;
            }
            let leaf = bits.trailing_zeros() as usize;
            bits &= bits - 1;
            Some(leaf)
        })
    }
}

impl FromIterator<usize> for LeafSet {
    fn from_iter<I: IntoIterator<Item = usize>>(iter: I) -> Self {
        iter.into_iter().fold(LeafSet::EMPTY, |acc, leaf| acc.union(LeafSet::singleton(leaf)))
    }
}

impl fmt::Debug for LeafSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

impl fmt::Display for LeafSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, leaf) in self.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{leaf}")?;
        }
        write!(f, "}}")
    }
}

/// The first clause of the tree definition that a node family violates.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    EmptyNode,
    OutsideLeafSet { node: LeafSet },
    /// Clause (i): the full leaf set is not a node.
    MissingRoot,
    /// Clause (ii): a singleton is missing.
    MissingLeaf { leaf: usize },
    /// Clause (iii): two nodes overlap without nesting.
    NotLaminar { first: LeafSet, second: LeafSet },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::EmptyNode => write!(f, "a node is empty"),
            Violation::OutsideLeafSet { node } => {
                write!(f, "node {node} is not contained in the leaf set")
            }
            Violation::MissingRoot => write!(f, "clause (i): the root is not a node"),
            Violation::MissingLeaf { leaf } => {
                write!(f, "clause (ii): singleton {{{leaf}}} is not a node")
            }
            Violation::NotLaminar { first, second } => write!(
                f,
                "clause (iii): nodes {first} and {second} overlap without nesting"
            ),
        }
    }
}

/// Checks that `nodes` is a rooted tree structure on `leaves`.
pub fn validate(nodes: &[LeafSet], leaves: LeafSet) -> std::result::Result<(), Violation> {
    if nodes.iter().any(|n| n.is_empty()) {
        return Err(Violation::EmptyNode);
    }
    if let Some(&node) = nodes.iter().find(|n| !n.is_subset(leaves)) {
        return Err(Violation::OutsideLeafSet { node });
    }
    if leaves.is_empty() || !nodes.contains(&leaves) {
        return Err(Violation::MissingRoot);
    }
    for leaf in leaves.iter() {
        if !nodes.contains(&LeafSet::singleton(leaf)) {
            return Err(Violation::MissingLeaf { leaf });
        }
    }
    for (i, &a) in nodes.iter().enumerate() {
        for &b in &nodes[i + 1..] {
            if !(a.is_subset(b) || b.is_subset(a) || a.is_disjoint(b)) {
                return Err(Violation::NotLaminar { first: a, second: b });
            }
        }
    }
    Ok(())
}

/// Three distinct leaves, stored in increasing order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct TripleKey([usize; 3]);

impl TripleKey {
    pub fn new(a: usize, b: usize, c: usize) -> Result<TripleKey> {
        let mut leaves = [a, b, c];
        leaves.sort_unstable();
        if leaves[0] == leaves[1] || leaves[1] == leaves[2] {
            return Err(Error::Domain(format!("triple needs distinct leaves, got {a}, {b}, {c}")));
        }
        Ok(TripleKey(leaves))
    }

    pub fn leaves(&self) -> [usize; 3] {
        self.0
    }

    pub fn leaf_set(&self) -> LeafSet {
        self.0.iter().copied().collect()
    }

    /// All triples of `leaves` in lexicographic order.
    pub fn all(leaves: LeafSet) -> Vec<TripleKey> {
        let leaves: Vec<usize> = leaves.iter().collect();
        let mut out = Vec::new();
        for i in 0..leaves.len() {
            for j in i + 1..leaves.len() {
                for k in j + 1..leaves.len() {
                    out.push(TripleKey([leaves[i], leaves[j], leaves[k]]));
                }
            }
        }
        out
    }
}

impl fmt::Display for TripleKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.0[0], self.0[1], self.0[2])
    }
}

/// One of the four rooted trees on three leaves.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TripleShape {
    /// All three leaves hang from the root.
    Fan,
    /// The two given leaves (increasing order) form an inner node.
    Inner(usize, usize),
}

impl TripleShape {
    pub fn inner(a: usize, b: usize) -> TripleShape {
        TripleShape::Inner(a.min(b), a.max(b))
    }

    /// Leaf set of `lca({a, b})` inside the trivariate tree `self` on `key`.
    pub fn pair_lca(&self, key: TripleKey, a: usize, b: usize) -> LeafSet {
        match *self {
            TripleShape::Inner(x, y) if (x, y) == (a.min(b), a.max(b)) => {
                LeafSet::singleton(x).union(LeafSet::singleton(y))
            }
            _ => key.leaf_set(),
        }
    }

    pub fn to_tree(&self, key: TripleKey, labels: &[String]) -> TreeStructure {
        let mut branching = vec![key.leaf_set()];
        if let TripleShape::Inner(a, b) = *self {
            branching.push(LeafSet::singleton(a).union(LeafSet::singleton(b)));
        }
        TreeStructure::from_branching(labels.to_vec(), key.leaf_set(), &branching)
            .expect("trivariate shapes are always valid trees")
    }
}

/// A rooted tree structure.
///
/// `labels` names every leaf index of the ambient universe; `leaves` is the
/// root of this tree. Induced subtrees keep the universe of their parent so
/// leaf indices stay comparable across trees.
#[derive(Clone, PartialEq, Eq)]
pub struct TreeStructure {
    labels: Vec<String>,
    leaves: LeafSet,
    nodes: BTreeSet<LeafSet>,
}

impl fmt::Debug for TreeStructure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "TreeStructure({})", self.format())
    }
}

impl fmt::Display for TreeStructure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.format())
    }
}

impl TreeStructure {
    /// Builds a tree from its full node family, which must already satisfy
    /// every clause of the definition.
    pub fn new(labels: Vec<String>, leaves: LeafSet, nodes: &[LeafSet]) -> Result<TreeStructure> {
        check_universe(&labels, leaves)?;
        validate(nodes, leaves).map_err(Error::InvalidTree)?;
        Ok(TreeStructure { labels, leaves, nodes: nodes.iter().copied().collect() })
    }

    /// Builds a tree from its branching nodes; the root and the singletons
    /// are added.
    pub fn from_branching(
        labels: Vec<String>,
        leaves: LeafSet,
        branching: &[LeafSet],
    ) -> Result<TreeStructure> {
        let mut nodes: BTreeSet<LeafSet> = branching.iter().copied().collect();
        nodes.insert(leaves);
        nodes.extend(leaves.iter().map(LeafSet::singleton));
        let nodes: Vec<LeafSet> = nodes.into_iter().collect();
        TreeStructure::new(labels, leaves, &nodes)
    }

    /// The trivial tree (a fan) on `labels`.
    pub fn fan(labels: Vec<String>) -> Result<TreeStructure> {
        let leaves = LeafSet::first(labels.len());
        TreeStructure::from_branching(labels, leaves, &[])
    }

    /// Default labels `U1, ..., Ud`.
    pub fn default_labels(d: usize) -> Vec<String> {
        (1..=d).map(|i| format!("U{i}")).collect()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn leaves(&self) -> LeafSet {
        self.leaves
    }

    pub fn dim(&self) -> usize {
        self.leaves.len()
    }

    pub fn nodes(&self) -> impl Iterator<Item = LeafSet> + '_ {
        self.nodes.iter().copied()
    }

    pub fn contains_node(&self, node: LeafSet) -> bool {
        self.nodes.contains(&node)
    }

    /// Nodes with at least two leaves, root first, parents before children.
    pub fn branching_nodes(&self) -> Vec<LeafSet> {
        let mut out: Vec<LeafSet> = self.nodes.iter().copied().filter(|n| n.len() >= 2).collect();
        out.sort_by(|a, b| b.len().cmp(&a.len()).then(a.min_leaf().cmp(&b.min_leaf())));
        out
    }

    /// Children of `node`, ordered by smallest leaf.
    pub fn children(&self, node: LeafSet) -> Vec<LeafSet> {
        let below: Vec<LeafSet> = self
            .nodes
            .iter()
            .copied()
            .filter(|&n| n != node && n.is_subset(node))
            .collect();
        let mut children: Vec<LeafSet> = below
            .iter()
            .copied()
            .filter(|&n| !below.iter().any(|&m| m != n && n.is_subset(m)))
            .collect();
        children.sort_by_key(|c| c.min_leaf());
        children
    }

    /// The smallest node strictly containing `node`, if any.
    pub fn parent(&self, node: LeafSet) -> Option<LeafSet> {
        self.nodes
            .iter()
            .copied()
            .filter(|&n| n != node && node.is_subset(n))
            .min_by_key(|n| n.len())
    }

    /// Lowest common ancestor: the intersection of all nodes containing `set`.
    pub fn lca(&self, set: LeafSet) -> Result<LeafSet> {
        if set.len() < 2 {
            return Err(Error::Domain(format!("lca needs at least two leaves, got {set}")));
        }
        if !set.is_subset(self.leaves) {
            return Err(Error::Domain(format!("{set} is not a subset of the leaves {}", self.leaves)));
        }
        Ok(self
            .nodes
            .iter()
            .filter(|n| set.is_subset(**n))
            .fold(self.leaves, |acc, &n| acc.intersection(n)))
    }

    /// The structure induced on `subset`: every node intersected with it.
    pub fn induce(&self, subset: LeafSet) -> Result<TreeStructure> {
        if subset.is_empty() {
            return Err(Error::Domain("cannot induce a tree on the empty set".into()));
        }
        if !subset.is_subset(self.leaves) {
            return Err(Error::Domain(format!("{subset} is not a subset of the leaves {}", self.leaves)));
        }
        let nodes: BTreeSet<LeafSet> = self
            .nodes
            .iter()
            .map(|n| n.intersection(subset))
            .filter(|n| !n.is_empty())
            .collect();
        Ok(TreeStructure { labels: self.labels.clone(), leaves: subset, nodes })
    }

    /// Shape of the tree induced on `key`.
    pub fn triple_shape(&self, key: TripleKey) -> Result<TripleShape> {
        let [a, b, c] = key.leaves();
        if !key.leaf_set().is_subset(self.leaves) {
            return Err(Error::Domain(format!("triple {key} is not inside the leaves {}", self.leaves)));
        }
        let pair = |x: usize, y: usize| LeafSet::singleton(x).union(LeafSet::singleton(y));
        for (x, y) in [(a, b), (a, c), (b, c)] {
            if self.lca(pair(x, y))? != self.lca(key.leaf_set())? {
                return Ok(TripleShape::Inner(x, y));
            }
        }
        Ok(TripleShape::Fan)
    }

    /// The induced trivariate tree of every triple of leaves.
    pub fn triples(&self) -> Result<BTreeMap<TripleKey, TreeStructure>> {
        if self.dim() < 3 {
            return Err(Error::Domain(format!("triples need at least 3 leaves, got {}", self.dim())));
        }
        TripleKey::all(self.leaves)
            .into_iter()
            .map(|key| Ok((key, self.induce(key.leaf_set())?)))
            .collect()
    }

    /// Shapes of all induced trivariate trees.
    pub fn triple_shapes(&self) -> Result<BTreeMap<TripleKey, TripleShape>> {
        if self.dim() < 3 {
            return Err(Error::Domain(format!("triples need at least 3 leaves, got {}", self.dim())));
        }
        TripleKey::all(self.leaves)
            .into_iter()
            .map(|key| Ok((key, self.triple_shape(key)?)))
            .collect()
    }

    /// Canonical nested-parenthesis form, children ordered by smallest leaf.
    pub fn format(&self) -> String {
        let mut out = String::new();
        self.format_node(self.leaves, &mut out);
        out
    }

    fn format_node(&self, node: LeafSet, out: &mut String) {
        if node.len() == 1 {
            out.push_str(&self.labels[node.min_leaf().unwrap()]);
            return;
        }
        out.push('(');
        for (i, child) in self.children(node).into_iter().enumerate() {
            if i > 0 {
                out.push(',');
            }
            self.format_node(child, out);
        }
        out.push(')');
    }

    /// Parses the text form; the label universe is the set of labels that
    /// appear, in natural order (`U2` before `U10`).
    pub fn parse(text: &str) -> Result<TreeStructure> {
        let parsed = Parser::new(text).parse()?;
        let mut labels: Vec<String> = parsed.leaf_labels();
        labels.sort_by(|a, b| natural_cmp(a, b));
        labels.dedup();
        build_parsed(&parsed, labels)
    }

    /// Parses the text form against a fixed label universe.
    pub fn parse_with_labels(text: &str, labels: &[String]) -> Result<TreeStructure> {
        let parsed = Parser::new(text).parse()?;
        build_parsed(&parsed, labels.to_vec())
    }

    pub fn to_json(&self) -> TreeJson {
        TreeJson {
            leaves: self.leaves.iter().map(|i| self.labels[i].clone()).collect(),
            nodes: self
                .branching_nodes()
                .into_iter()
                .map(|n| n.iter().map(|i| self.labels[i].clone()).collect())
                .collect(),
        }
    }

    pub fn from_json(json: &TreeJson) -> Result<TreeStructure> {
        let labels = json.leaves.clone();
        check_unique(&labels)?;
        let leaves = LeafSet::first(labels.len());
        let branching = json
            .nodes
            .iter()
            .map(|node| label_set(node, &labels))
            .collect::<Result<Vec<_>>>()?;
        TreeStructure::from_branching(labels, leaves, &branching)
    }

    /// Renders a node as its labels, e.g. `{U2,U3}`.
    pub fn describe(&self, node: LeafSet) -> String {
        let names: Vec<&str> = node.iter().map(|i| self.labels[i].as_str()).collect();
        format!("{{{}}}", names.join(","))
    }
}

/// Maps label names to a leaf set over `labels`.
pub fn label_set(names: &[String], labels: &[String]) -> Result<LeafSet> {
    let mut set = LeafSet::EMPTY;
    for name in names {
        let idx = labels
            .iter()
            .position(|l| l == name)
            .ok_or_else(|| Error::Domain(format!("unknown leaf label {name:?}")))?;
        if set.contains(idx) {
            return Err(Error::Domain(format!("leaf label {name:?} repeated in a node")));
        }
        set.insert(idx);
    }
    Ok(set)
}

fn check_unique(labels: &[String]) -> Result<()> {
    let unique: BTreeSet<&String> = labels.iter().collect();
    if unique.len() != labels.len() {
        return Err(Error::Domain("leaf labels must be distinct".into()));
    }
    Ok(())
}

fn check_universe(labels: &[String], leaves: LeafSet) -> Result<()> {
    if labels.len() > MAX_LEAVES {
        return Err(Error::Domain(format!("at most {MAX_LEAVES} leaves are supported")));
    }
    if !leaves.is_subset(LeafSet::first(labels.len())) {
        return Err(Error::Domain(format!("leaf set {leaves} exceeds the {} labels", labels.len())));
    }
    check_unique(labels)
}

/// JSON form: `{"leaves": [...], "nodes": [[...], ...]}`. `nodes` lists the
/// branching nodes; the root and singletons may be omitted.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TreeJson {
    pub leaves: Vec<String>,
    pub nodes: Vec<Vec<String>>,
}

/// A tree given either in text form or as a JSON object.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TreeSpec {
    Text(String),
    Json(TreeJson),
}

impl TreeSpec {
    pub fn build(&self) -> Result<TreeStructure> {
        match self {
            TreeSpec::Text(text) => TreeStructure::parse(text),
            TreeSpec::Json(json) => TreeStructure::from_json(json),
        }
    }
}

impl Serialize for TreeStructure {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_json().serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for TreeStructure {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let spec = TreeSpec::deserialize(deserializer)?;
        spec.build().map_err(serde::de::Error::custom)
    }
}

/// Compares labels by alternating runs of digits (numerically) and
/// non-digits (lexically).
pub fn natural_cmp(a: &str, b: &str) -> Ordering {
    fn runs(s: &str) -> Vec<(bool, &str)> {
        let mut out = Vec::new();
        let mut start = 0;
        let bytes = s.as_bytes();
        for i in 1..=bytes.len() {
            if i == bytes.len() || bytes[i].is_ascii_digit() != bytes[start].is_ascii_digit() {
                out.push((bytes[start].is_ascii_digit(), &s[start..i]));
                start = i;
            }
        }
        out
    }
    if a.is_empty() || b.is_empty() {
        return a.cmp(b);
    }
    for ((da, ra), (db, rb)) in runs(a).into_iter().zip(runs(b)) {
        let ord = if da && db {
            let (ta, tb) = (ra.trim_start_matches('0'), rb.trim_start_matches('0'));
            ta.len().cmp(&tb.len()).then(ta.cmp(tb))
        } else {
            ra.cmp(rb)
        };
        if ord != Ordering::Equal {
            return ord;
        }
    }
    runs(a).len().cmp(&runs(b).len()).then(a.cmp(b))
}

enum ParsedNode {
    Leaf(String, usize),
    Branch(Vec<ParsedNode>),
}

impl ParsedNode {
    fn leaf_labels(&self) -> Vec<String> {
        match self {
            ParsedNode::Leaf(label, _) => vec![label.clone()],
            ParsedNode::Branch(children) => children.iter().flat_map(|c| c.leaf_labels()).collect(),
        }
    }
}

struct Parser<'a> {
    text: &'a str,
    pos: usize,
}

impl<'a> Parser<'a> {
    fn new(text: &'a str) -> Self {
        Parser { text, pos: 0 }
    }

    fn error(&self, message: impl Into<String>) -> Error {
        Error::Parse { position: self.pos, message: message.into() }
    }

    fn skip_ws(&mut self) {
        while let Some(c) = self.text[self.pos..].chars().next() {
            if !c.is_whitespace() {
                break;
            }
            self.pos += c.len_utf8();
        }
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.text[self.pos..].chars().next()
    }

    fn parse(mut self) -> Result<ParsedNode> {
        let node = self.node()?;
        if self.peek().is_some() {
            return Err(self.error("unexpected trailing input"));
        }
        Ok(node)
    }

    fn node(&mut self) -> Result<ParsedNode> {
        match self.peek() {
            None => Err(self.error("unexpected end of input")),
            Some('(') => {
                let start = self.pos;
                self.pos += 1;
                let mut children = vec![self.node()?];
                loop {
                    match self.peek() {
                        Some(',') => {
                            self.pos += 1;
                            children.push(self.node()?);
                        }
                        Some(')') => {
                            self.pos += 1;
                            break;
                        }
                        Some(c) => return Err(self.error(format!("expected ',' or ')', found {c:?}"))),
                        None => return Err(self.error("unclosed '('")),
                    }
                }
                if children.len() < 2 {
                    return Err(Error::Parse {
                        position: start,
                        message: "a branching node needs at least two children".into(),
                    });
                }
                Ok(ParsedNode::Branch(children))
            }
            Some(c) if c == ')' || c == ',' => Err(self.error(format!("expected a label, found {c:?}"))),
            Some(_) => {
                let start = self.pos;
                while let Some(c) = self.text[self.pos..].chars().next() {
                    if c == '(' || c == ')' || c == ',' || c.is_whitespace() {
                        break;
                    }
                    self.pos += c.len_utf8();
                }
                Ok(ParsedNode::Leaf(self.text[start..self.pos].to_string(), start))
            }
        }
    }
}

fn build_parsed(parsed: &ParsedNode, labels: Vec<String>) -> Result<TreeStructure> {
    check_unique(&labels)?;
    fn collect(
        node: &ParsedNode,
        labels: &[String],
        nodes: &mut Vec<LeafSet>,
    ) -> Result<LeafSet> {
        match node {
            ParsedNode::Leaf(label, pos) => {
                let idx = labels.iter().position(|l| l == label).ok_or_else(|| Error::Parse {
                    position: *pos,
                    message: format!("unknown label {label:?}"),
                })?;
                let set = LeafSet::singleton(idx);
                if nodes.contains(&set) {
                    return Err(Error::Parse { position: *pos, message: format!("label {label:?} repeated") });
                }
                nodes.push(set);
                Ok(set)
            }
            ParsedNode::Branch(children) => {
                let mut set = LeafSet::EMPTY;
                for child in children {
                    set = set.union(collect(child, labels, nodes)?);
                }
                nodes.push(set);
                Ok(set)
            }
        }
    }
    if labels.len() > MAX_LEAVES {
        return Err(Error::Domain(format!("at most {MAX_LEAVES} leaves are supported")));
    }
    let mut nodes = Vec::new();
    let root = collect(parsed, &labels, &mut nodes)?;
    TreeStructure::new(labels, root, &nodes)
}

/// Draws a random tree on `labels` by recursive random partition: each
/// branching node with `m` leaves splits into a uniformly chosen number
/// `k in 2..=m` of nonempty blocks (a shuffle cut at `k - 1` distinct
/// uniform positions); blocks of two or more leaves recurse.
pub fn random_tree<R: Rng + ?Sized>(labels: Vec<String>, rng: &mut R) -> TreeStructure {
    fn split<R: Rng + ?Sized>(set: Vec<usize>, rng: &mut R, out: &mut Vec<LeafSet>) {
        out.push(set.iter().copied().collect());
        if set.len() < 2 {
            return;
        }
        let mut shuffled = set;
        shuffled.shuffle(rng);
        let m = shuffled.len();
        let k = rng.random_range(2..=m);
        let mut cuts: Vec<usize> = (1..m).collect();
        cuts.shuffle(rng);
        let mut cuts: Vec<usize> = cuts[..k - 1].to_vec();
        cuts.sort_unstable();
        let mut start = 0;
        for end in cuts.into_iter().chain(std::iter::once(m)) {
            split(shuffled[start..end].to_vec(), rng, out);
            start = end;
        }
    }
    let d = labels.len();
    let mut nodes = Vec::new();
    split((0..d).collect(), rng, &mut nodes);
    TreeStructure::new(labels, LeafSet::first(d), &nodes).expect("random partitions are laminar")
}
