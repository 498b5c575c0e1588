//! Finite sequences, `M`-ary trees of height `k` and their leaf systems.
//!
//! A tree is stored by its leaves; internal nodes are the proper prefixes.
//! Labels are opaque ordered tokens, so leaves can be identified with the
//! indices of a reduced hypergraph.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::hypercore::content_lines;
use crate::scalar::Scalar;
use crate::BigRational;

/// An opaque, totally ordered token.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Label(Arc<str>);

impl Label {
    /// Labels may not be empty, contain whitespace, `.`, `#` or `@`, or be `-`.
    pub fn new(text: &str) -> Result<Self> {
        if text.is_empty()
            || text == "-"
            || text.chars().any(|c| c.is_whitespace() || matches!(c, '.' | '#' | '@'))
        {
            return Err(Error::arg(format!("invalid label `{text}`")));
        }
        Ok(Label(Arc::from(text)))
    }

    /// Like [`Label::new`] but also accepts `.`, as in index names derived
    /// from dotted leaves.
    pub fn name(text: &str) -> Result<Self> {
        if text.is_empty() || text.chars().any(|c| c.is_whitespace() || matches!(c, '#' | '@')) {
            return Err(Error::arg(format!("invalid name `{text}`")));
        }
        Ok(Label(Arc::from(text)))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl From<usize> for Label {
    fn from(i: usize) -> Self {
        Label(Arc::from(i.to_string()))
    }
}

impl fmt::Debug for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// A finite sequence of labels; `Seq::empty()` is the root.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Seq(Vec<Label>);

impl Seq {
    pub fn empty() -> Self {
        Seq(Vec::new())
    }

    pub fn new(labels: Vec<Label>) -> Self {
        Seq(labels)
    }

    pub fn from_strs(labels: &[&str]) -> Result<Self> {
        labels.iter().map(|l| Label::new(l)).collect::<Result<_>>().map(Seq)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn labels(&self) -> &[Label] {
        &self.0
    }

    /// The `i`-th term, 1-based.
    pub fn at(&self, i: usize) -> &Label {
        &self.0[i - 1]
    }

    /// Initial segment of length `l`.
    pub fn restrict(&self, l: usize) -> Seq {
        Seq(self.0[..l].to_vec())
    }

    /// Longest common initial segment.
    pub fn wedge(&self, other: &Seq) -> Seq {
        let n = self.0.iter().zip(&other.0).take_while(|(a, b)| a == b).count();
        self.restrict(n)
    }

    pub fn concat(&self, other: &Seq) -> Seq {
        let mut v = self.0.clone();
        v.extend(other.0.iter().cloned());
        Seq(v)
    }

    pub fn push(&self, label: Label) -> Seq {
        let mut v = self.0.clone();
        v.push(label);
        Seq(v)
    }

    /// The sequence with its first term removed.
    pub fn tail(&self) -> Seq {
        Seq(self.0[1..].to_vec())
    }

    pub fn starts_with(&self, prefix: &Seq) -> bool {
        self.0.starts_with(&prefix.0)
    }

    /// Dotted rendering, `-` for the empty sequence.
    pub fn dotted(&self) -> String {
        if self.0.is_empty() {
            "-".to_string()
        } else {
            self.0.iter().map(Label::as_str).collect::<Vec<_>>().join(".")
        }
    }

    pub fn parse_dotted(text: &str) -> Result<Seq> {
        if text == "-" {
            return Ok(Seq::empty());
        }
        text.split('.').map(Label::new).collect::<Result<_>>().map(Seq)
    }
}

impl fmt::Debug for Seq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({})", self.0.iter().map(Label::as_str).collect::<Vec<_>>().join(","))
    }
}

impl fmt::Display for Seq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.dotted())
    }
}

/// An `M`-ary tree of height `k`, kept as its `[k,M]`-system of leaves.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct KMTree {
    height: usize,
    arity: usize,
    /// Successor labels of every node of length `< k`, sorted.
    children: BTreeMap<Seq, Vec<Label>>,
    leaves: Vec<Seq>,
}

impl KMTree {
    /// Validates the leaves as a `[k, M]`-system.
    pub fn from_leaves(height: usize, arity: usize, leaves: impl IntoIterator<Item = Seq>) -> Result<Self> {
        if height == 0 || arity == 0 {
            return Err(Error::Structural(format!("height and arity must be positive, got {height}, {arity}")));
        }
        let leaves: BTreeSet<Seq> = leaves.into_iter().collect();
        let mut children: BTreeMap<Seq, BTreeSet<Label>> = BTreeMap::new();
        for leaf in &leaves {
            if leaf.len() != height {
                return Err(Error::Structural(format!("leaf {leaf} has length {}, expected {height}", leaf.len())));
            }
            for i in 0..height {
                children.entry(leaf.restrict(i)).or_default().insert(leaf.at(i + 1).clone());
            }
        }
        if leaves.is_empty() {
            return Err(Error::Structural("tree has no leaves".into()));
        }
        for (node, kids) in &children {
            if kids.len() != arity {
                return Err(Error::Structural(format!(
                    "node {node} has {} direct continuations, expected {arity}",
                    kids.len()
                )));
            }
        }
        Ok(KMTree {
            height,
            arity,
            children: children.into_iter().map(|(k, v)| (k, v.into_iter().collect())).collect(),
            leaves: leaves.into_iter().collect(),
        })
    }

    /// The full tree whose every node has successors `0..M`.
    pub fn product(height: usize, arity: usize) -> Result<Self> {
        let labels: Vec<Label> = (0..arity).map(Label::from).collect();
        let mut leaves = vec![Seq::empty()];
        for _ in 0..height {
            leaves = leaves.iter().flat_map(|s| labels.iter().map(move |l| s.push(l.clone()))).collect();
        }
        KMTree::from_leaves(height, arity, leaves)
    }

    /// `{a ∘ z : (a, S_a), z ∈ S_a}` for subtrees of a common shape.
    pub fn graft(parts: Vec<(Label, KMTree)>) -> Result<Self> {
        let Some((_, first)) = parts.first() else {
            return Err(Error::Structural("graft needs at least one subtree".into()));
        };
        let (height, arity) = (first.height + 1, first.arity);
        if parts.len() != arity {
            return Err(Error::Structural(format!("graft of {} subtrees onto arity {arity}", parts.len())));
        }
        let mut leaves = Vec::new();
        for (a, t) in &parts {
            if t.height + 1 != height || t.arity != arity {
                return Err(Error::Structural("grafted subtrees differ in shape".into()));
            }
            let prefix = Seq::new(vec![a.clone()]);
            leaves.extend(t.leaves.iter().map(|z| prefix.concat(z)));
        }
        KMTree::from_leaves(height, arity, leaves)
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    /// `[T]`, sorted.
    pub fn leaves(&self) -> &[Seq] {
        &self.leaves
    }

    pub fn contains(&self, node: &Seq) -> bool {
        if node.len() == self.height {
            self.leaves.binary_search(node).is_ok()
        } else {
            self.children.contains_key(node)
        }
    }

    /// `𝒮_T(a)`; empty for leaves and non-members.
    pub fn successors(&self, node: &Seq) -> &[Label] {
        self.children.get(node).map(Vec::as_slice).unwrap_or(&[])
    }

    /// `{z : a ∘ z ∈ [T]}` for a first-level label `a`.
    pub fn subtree(&self, a: &Label) -> Result<KMTree> {
        if self.height < 2 {
            return Err(Error::arg("subtree of a height-1 tree has height 0"));
        }
        let prefix = Seq::new(vec![a.clone()]);
        if !self.children.contains_key(&prefix) {
            return Err(Error::arg(format!("{a} is not a first-level node")));
        }
        let leaves = self.leaves.iter().filter(|l| l.starts_with(&prefix)).map(Seq::tail);
        KMTree::from_leaves(self.height - 1, self.arity, leaves)
    }

    /// The subsystem keeping the lexicographically first `m` successors of
    /// every node.
    pub fn trim(&self, m: usize) -> Result<KMTree> {
        if m == 0 || m > self.arity {
            return Err(Error::arg(format!("cannot trim arity {} to {m}", self.arity)));
        }
        let mut frontier = vec![Seq::empty()];
        for _ in 0..self.height {
            frontier = frontier
                .iter()
                .flat_map(|s| self.successors(s)[..m].iter().map(move |l| s.push(l.clone())))
                .collect();
        }
        KMTree::from_leaves(self.height, m, frontier)
    }

    /// Whether every leaf of `self` is a leaf of `other`.
    pub fn is_subsystem_of(&self, other: &KMTree) -> bool {
        self.height == other.height && self.leaves.iter().all(|l| other.contains(l))
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = content_lines(text);
        let (ln, header) = lines.next().ok_or_else(|| Error::parse(1, "missing `height <k> arity <M>` header"))?;
        let (height, arity) = parse_tree_header(ln, header)?;
        let mut leaves = Vec::new();
        for (ln, line) in lines {
            leaves.push(parse_leaf_line(ln, line)?);
        }
        KMTree::from_leaves(height, arity, leaves).map_err(|e| Error::parse(ln, e))
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("height {} arity {}\n", self.height, self.arity);
        for leaf in &self.leaves {
            let labels: Vec<&str> = leaf.labels().iter().map(Label::as_str).collect();
            out.push_str(&labels.join(" "));
            out.push('\n');
        }
        out
    }
}

pub(crate) fn parse_tree_header(ln: usize, line: &str) -> Result<(usize, usize)> {
    let toks: Vec<&str> = line.split_whitespace().collect();
    match toks[..] {
        ["height", k, "arity", m] => {
            let k = k.parse().map_err(|_| Error::parse(ln, format!("invalid height `{k}`")))?;
            let m = m.parse().map_err(|_| Error::parse(ln, format!("invalid arity `{m}`")))?;
            Ok((k, m))
        }
        _ => Err(Error::parse(ln, "expected `height <k> arity <M>` header")),
    }
}

pub(crate) fn parse_leaf_line(ln: usize, line: &str) -> Result<Seq> {
    line.split_whitespace()
        .map(|t| Label::new(t).map_err(|e| Error::parse(ln, e)))
        .collect::<Result<_>>()
        .map(Seq)
}

/// Leaf lines without a header, e.g. a subset of `[T]`.
pub fn parse_leaf_set(text: &str) -> Result<BTreeSet<Seq>> {
    content_lines(text).map(|(ln, line)| parse_leaf_line(ln, line)).collect()
}

/// `Q(c)`: sequences `d` with `d_i ∈ 𝒮_T(c|(i−1)) \ {c_i}` for every `i`.
pub fn q_set(tree: &KMTree, c: &Seq) -> Result<Vec<Seq>> {
    if !tree.contains(c) {
        return Err(Error::arg(format!("{c} is not a node of the tree")));
    }
    let mut out = vec![Seq::empty()];
    for i in 1..=c.len() {
        let options: Vec<&Label> = tree.successors(&c.restrict(i - 1)).iter().filter(|l| *l != c.at(i)).collect();
        out = out.iter().flat_map(|d| options.iter().map(move |l| d.push((*l).clone()))).collect();
    }
    Ok(out)
}

/// A `[k, m]`-subsystem found inside a leaf subset.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Extraction {
    pub m: usize,
    pub tree: KMTree,
}

/// Extracts a `[k, m]`-system inside `X ⊆ [T]` with `m = ⌈εM/k⌉`, given `|X| ≥ εM^k`.
///
/// At every level the children whose part of `X` has size at least
/// `((k−1)ε/k)·M^{k−1}` qualify; the `m` lexicographically smallest are
/// kept and the recursion continues with `ε' = (k−1)ε/k`.
pub fn extract_subsystem<S: Scalar>(tree: &KMTree, x: &BTreeSet<Seq>, eps: S) -> Result<Extraction> {
    if !(eps > S::zero() && eps <= S::one()) {
        return Err(Error::arg(format!("epsilon {eps} outside (0,1]")));
    }
    if let Some(bad) = x.iter().find(|l| !tree.contains(l) || l.len() != tree.height) {
        return Err(Error::arg(format!("{bad} is not a leaf of the tree")));
    }
    // floats count as the decimal they print as
    let eps: BigRational = eps.to_exact().ok_or_else(|| Error::arg(format!("epsilon {eps} has no exact value")))?;
    let (k, big_m) = (tree.height, tree.arity);
    let total = (big_m as u64).pow(k as u32);
    if BigRational::from_count(x.len() as u64) < eps.clone() * BigRational::from_count(total) {
        return Err(Error::Precondition(format!("|X| = {} is below {eps}·{big_m}^{k}", x.len())));
    }
    let m = (eps.clone() * BigRational::from_count(big_m as u64) / BigRational::from_count(k as u64))
        .ceil_u64()
        .ok_or_else(|| Error::arg("epsilon·M/k not representable"))? as usize;
    let counts = prefix_counts(x);
    let mut leaves = Vec::new();
    pick(tree, &counts, &Seq::empty(), k, eps, m, &mut leaves)?;
    let sub = KMTree::from_leaves(k, m, leaves)?;
    Ok(Extraction { m, tree: sub })
}

fn prefix_counts(x: &BTreeSet<Seq>) -> HashMap<Seq, usize> {
    let mut counts = HashMap::new();
    for leaf in x {
        for i in 0..=leaf.len() {
            *counts.entry(leaf.restrict(i)).or_insert(0) += 1;
        }
    }
    counts
}

fn pick<S: Scalar>(
    tree: &KMTree,
    counts: &HashMap<Seq, usize>,
    node: &Seq,
    levels: usize,
    eps: S,
    m: usize,
    out: &mut Vec<Seq>,
) -> Result<()> {
    let kids = tree.successors(node);
    let count = |s: &Seq| counts.get(s).copied().unwrap_or(0) as u64;
    if levels == 1 {
        let chosen: Vec<Seq> = kids.iter().map(|l| node.push(l.clone())).filter(|s| count(s) > 0).take(m).collect();
        if chosen.len() < m {
            return Err(Error::Structural(format!("only {} leaves of X below {node}, need {m}", chosen.len())));
        }
        out.extend(chosen);
        return Ok(());
    }
    let kk = levels as u64;
    let next_eps = S::from_count(kk - 1) * eps / S::from_count(kk);
    let threshold = next_eps.clone() * S::from_count((tree.arity as u64).pow(levels as u32 - 1));
    let qualifying: Vec<Seq> = kids
        .iter()
        .map(|l| node.push(l.clone()))
        .filter(|s| S::from_count(count(s)) >= threshold)
        .take(m)
        .collect();
    if qualifying.len() < m {
        return Err(Error::Structural(format!(
            "only {} children of {node} meet the averaging threshold, need {m}",
            qualifying.len()
        )));
    }
    for child in &qualifying {
        pick(tree, counts, child, levels - 1, next_eps.clone(), m, out)?;
    }
    Ok(())
}

/// Largest `m` for which `X` contains a `[k, m]`-subsystem of `T`, with the
/// lexicographically first such subsystem; `None` when `X` is empty.
pub fn largest_subsystem(tree: &KMTree, x: &BTreeSet<Seq>) -> Option<Extraction> {
    fn best(tree: &KMTree, x: &BTreeSet<Seq>, node: &Seq, levels: usize, memo: &mut HashMap<Seq, usize>) -> usize {
        if let Some(&v) = memo.get(node) {
            return v;
        }
        let kids = tree.successors(node);
        let v = if levels == 1 {
            kids.iter().filter(|l| x.contains(&node.push((*l).clone()))).count()
        } else {
            let mut vals: Vec<usize> =
                kids.iter().map(|l| best(tree, x, &node.push(l.clone()), levels - 1, memo)).collect();
            vals.sort_unstable_by(|a, b| b.cmp(a));
            // largest m with at least m children supporting arity m
            vals.iter().enumerate().map(|(i, &v)| v.min(i + 1)).max().unwrap_or(0)
        };
        memo.insert(node.clone(), v);
        v
    }
    fn collect(
        tree: &KMTree,
        x: &BTreeSet<Seq>,
        node: &Seq,
        levels: usize,
        m: usize,
        memo: &mut HashMap<Seq, usize>,
        out: &mut Vec<Seq>,
    ) {
        let kids: Vec<Seq> = tree.successors(node).iter().map(|l| node.push(l.clone())).collect();
        if levels == 1 {
            out.extend(kids.into_iter().filter(|s| x.contains(s)).take(m));
            return;
        }
        let chosen: Vec<Seq> = kids.into_iter().filter(|s| best(tree, x, s, levels - 1, memo) >= m).take(m).collect();
        for c in chosen {
            collect(tree, x, &c, levels - 1, m, memo, out);
        }
    }
    let mut memo = HashMap::new();
    let m = best(tree, x, &Seq::empty(), tree.height, &mut memo);
    if m == 0 {
        return None;
    }
    let mut leaves = Vec::new();
    collect(tree, x, &Seq::empty(), tree.height, m, &mut memo, &mut leaves);
    let sub = KMTree::from_leaves(tree.height, m, leaves).expect("collected a uniform subsystem");
    Some(Extraction { m, tree: sub })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn seq(s: &[&str]) -> Seq {
        Seq::from_strs(s).unwrap()
    }

    #[test]
    fn sequence_algebra() {
        let a = seq(&["x", "y", "z"]);
        let b = seq(&["x", "y", "w"]);
        assert_eq!(a.wedge(&b), seq(&["x", "y"]));
        assert_eq!(a.restrict(0), Seq::empty());
        assert_eq!(a.concat(&b).restrict(3), a);
        assert_eq!(a.at(2).as_str(), "y");
        assert_eq!(Seq::parse_dotted(&a.dotted()).unwrap(), a);
        assert_eq!(Seq::parse_dotted("-").unwrap(), Seq::empty());
        assert!(Label::new("a.b").is_err());
        assert!(Label::new("-").is_err());
    }

    #[test]
    fn q_of_root_is_root() {
        let t = KMTree::product(3, 3).unwrap();
        assert_eq!(q_set(&t, &Seq::empty()).unwrap(), vec![Seq::empty()]);
    }

    #[test]
    fn ternary_height_two_example() {
        let groups = [("a", ["α1", "α2", "α3"]), ("b", ["β1", "β2", "β3"]), ("c", ["γ1", "γ2", "γ3"])];
        let leaves = groups.iter().flat_map(|(p, kids)| kids.iter().map(move |k| seq(&[p, k])));
        let t = KMTree::from_leaves(2, 3, leaves).unwrap();
        let q = q_set(&t, &seq(&["b", "β2"])).unwrap();
        let expected = vec![seq(&["a", "β1"]), seq(&["a", "β3"]), seq(&["c", "β1"]), seq(&["c", "β3"])];
        assert_eq!(q, expected);
        assert!(!t.contains(&q[0]));
    }

    #[test]
    fn q_in_binary_trees_is_singleton() {
        let t = KMTree::product(4, 2).unwrap();
        for leaf in t.leaves() {
            for s in 0..=4 {
                assert_eq!(q_set(&t, &leaf.restrict(s)).unwrap().len(), 1);
            }
        }
        assert!(q_set(&t, &seq(&["7"])).is_err());
    }

    #[test]
    fn tree_validation() {
        assert!(KMTree::from_leaves(2, 2, [seq(&["0", "0"]), seq(&["0", "1"]), seq(&["1", "0"])]).is_err());
        assert!(KMTree::from_leaves(2, 1, [seq(&["0"])]).is_err());
        assert!(KMTree::from_leaves(1, 1, []).is_err());
        let t = KMTree::product(2, 3).unwrap();
        assert_eq!(t.leaves().len(), 9);
        assert_eq!(KMTree::parse(&t.to_text()).unwrap(), t);
        assert!(matches!(KMTree::parse("height 1 arity 2\na\n"), Err(Error::Parse { .. })));
    }

    #[test]
    fn subtree_graft_trim() {
        let t = KMTree::product(3, 3).unwrap();
        let sub = t.subtree(&Label::from(1)).unwrap();
        assert_eq!(sub, KMTree::product(2, 3).unwrap());
        let parts = (0..3).map(|i| (Label::from(i), t.subtree(&Label::from(i)).unwrap())).collect();
        assert_eq!(KMTree::graft(parts).unwrap(), t);
        let small = t.trim(2).unwrap();
        assert_eq!(small, KMTree::product(3, 2).unwrap());
        assert!(small.is_subsystem_of(&t));
    }

    #[test]
    fn extraction_base_case_and_full_set() {
        let t = KMTree::product(1, 10).unwrap();
        let x: BTreeSet<Seq> = [2, 5, 7, 9].iter().map(|i| seq(&[&i.to_string()])).collect();
        let ex = extract_subsystem(&t, &x, 0.4).unwrap();
        assert_eq!(ex.m, 4);
        assert!(ex.tree.leaves().iter().all(|l| x.contains(l)));

        let t = KMTree::product(3, 5).unwrap();
        let all: BTreeSet<Seq> = t.leaves().iter().cloned().collect();
        let ex = extract_subsystem(&t, &all, 1.0).unwrap();
        assert_eq!(ex.m, 2);
        assert_eq!(ex.tree.arity(), 2);
    }

    #[test]
    fn extraction_precondition() {
        let t = KMTree::product(2, 4).unwrap();
        let x: BTreeSet<Seq> = t.leaves()[..3].iter().cloned().collect();
        assert!(matches!(extract_subsystem(&t, &x, 0.5), Err(Error::Precondition(_))));
        assert!(extract_subsystem(&t, &x, 0.0).is_err());
    }

    #[test]
    fn exact_rational_epsilon() {
        // 3/10 · 10 / 3 = 1 exactly
        let t = KMTree::product(3, 10).unwrap();
        let all: BTreeSet<Seq> = t.leaves().iter().cloned().collect();
        let ex = extract_subsystem(&t, &all, crate::Rational::new(3, 10)).unwrap();
        assert_eq!(ex.m, 1);
    }

    #[test]
    fn float_epsilon_uses_its_exact_value() {
        // 0.3 * 10 / 3 evaluates to 1.0000000000000002 in f64
        let t = KMTree::product(3, 10).unwrap();
        let all: BTreeSet<Seq> = t.leaves().iter().cloned().collect();
        assert_eq!(extract_subsystem(&t, &all, 0.3).unwrap().m, 1);
    }

    #[test]
    fn largest_subsystem_grows_m() {
        let t = KMTree::product(2, 4).unwrap();
        let all: BTreeSet<Seq> = t.leaves().iter().cloned().collect();
        let ex = largest_subsystem(&t, &all).unwrap();
        assert_eq!(ex.m, 4);
        let x: BTreeSet<Seq> = all.iter().filter(|l| l.at(2).as_str() != "3").cloned().collect();
        assert_eq!(largest_subsystem(&t, &x).unwrap().m, 3);
        assert!(largest_subsystem(&t, &BTreeSet::new()).is_none());
    }
}
