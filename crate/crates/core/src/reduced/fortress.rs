use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;

use super::{is_reduced_clique, ReducedClique, ReducedHypergraph};
use crate::error::{Error, Result};
use crate::hypercore::content_lines;
use crate::systems::{parse_leaf_line, parse_tree_header, q_set, KMTree, Label, Seq};

/// Vertices `P^{ab}_d` for leaf pairs `a ≠ b` of a tree and `d ∈ Q(a∧b)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Fortress {
    tree: KMTree,
    index: BTreeMap<Seq, Label>,
    vertex: BTreeMap<(Seq, Seq, Seq), usize>,
}

fn ordered(a: &Seq, b: &Seq) -> (Seq, Seq) {
    if a < b {
        (a.clone(), b.clone())
    } else {
        (b.clone(), a.clone())
    }
}

impl Fortress {
    /// An empty assignment over `tree`, each leaf naming an index.
    pub fn new(tree: KMTree, index: BTreeMap<Seq, Label>) -> Result<Self> {
        if index.len() != tree.leaves().len() || tree.leaves().iter().any(|l| !index.contains_key(l)) {
            return Err(Error::Structural("index map must cover exactly the leaves".into()));
        }
        let names: HashSet<&Label> = index.values().collect();
        if names.len() != index.len() {
            return Err(Error::Structural("two leaves name the same index".into()));
        }
        Ok(Fortress { tree, index, vertex: BTreeMap::new() })
    }

    /// Leaves name the index spelled by their dotted rendering.
    pub fn with_dotted_indices(tree: KMTree) -> Self {
        let index = tree.leaves().iter().map(|l| (l.clone(), Label::name(&l.dotted()).expect("dotted labels"))).collect();
        Fortress { tree, index, vertex: BTreeMap::new() }
    }

    pub fn tree(&self) -> &KMTree {
        &self.tree
    }

    pub fn index_of(&self, leaf: &Seq) -> Option<&Label> {
        self.index.get(leaf)
    }

    fn in_q(&self, a: &Seq, b: &Seq, d: &Seq) -> bool {
        let c = a.wedge(b);
        d.len() == c.len()
            && (1..=c.len()).all(|i| d.at(i) != c.at(i) && self.tree.successors(&c.restrict(i - 1)).contains(d.at(i)))
    }

    /// Sets `P^{ab}_d`.
    pub fn set(&mut self, a: &Seq, b: &Seq, d: &Seq, v: usize) -> Result<()> {
        if a == b || !self.index.contains_key(a) || !self.index.contains_key(b) {
            return Err(Error::arg(format!("{a}, {b} are not two distinct leaves")));
        }
        if !self.in_q(a, b, d) {
            return Err(Error::arg(format!("{d} is not in Q({})", a.wedge(b))));
        }
        let (a, b) = ordered(a, b);
        self.vertex.insert((a, b, d.clone()), v);
        Ok(())
    }

    pub fn get(&self, a: &Seq, b: &Seq, d: &Seq) -> Option<usize> {
        let (a, b) = ordered(a, b);
        self.vertex.get(&(a, b, d.clone())).copied()
    }

    /// Assigned entries `((a, b, d), P^{ab}_d)` with `a < b`.
    pub fn entries(&self) -> impl Iterator<Item = (&(Seq, Seq, Seq), &usize)> {
        self.vertex.iter()
    }

    /// Every `(a, b, d)` the definition requires, `a < b`.
    pub fn domain(&self) -> Vec<(Seq, Seq, Seq)> {
        let leaves = self.tree.leaves();
        let mut cache: HashMap<Seq, Vec<Seq>> = HashMap::new();
        let mut out = Vec::new();
        for (i, a) in leaves.iter().enumerate() {
            for b in &leaves[i + 1..] {
                let w = a.wedge(b);
                let qs = cache.entry(w.clone()).or_insert_with(|| q_set(&self.tree, &w).expect("wedge is a node"));
                out.extend(qs.iter().map(|d| (a.clone(), b.clone(), d.clone())));
            }
        }
        out
    }

    pub fn missing(&self) -> Vec<(Seq, Seq, Seq)> {
        self.domain().into_iter().filter(|k| !self.vertex.contains_key(k)).collect()
    }

    /// Header and leaf lines as for trees, a leaf optionally followed by
    /// `@<index>`; then `vertex <a> <b> <d|-> <id>` lines with dotted leaves.
    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = content_lines(text);
        let (ln0, header) = lines.next().ok_or_else(|| Error::parse(1, "missing `height <k> arity <M>` header"))?;
        let (height, arity) = parse_tree_header(ln0, header)?;
        let mut leaves = Vec::new();
        let mut names = Vec::new();
        let mut vertices = Vec::new();
        for (ln, line) in lines {
            if line.split_whitespace().next() == Some("vertex") {
                let toks: Vec<&str> = line.split_whitespace().collect();
                let [_, a, b, d, v] = toks[..] else {
                    return Err(Error::parse(ln, "expected `vertex <a> <b> <d|-> <id>`"));
                };
                let seq = |t: &str| Seq::parse_dotted(t).map_err(|e| Error::parse(ln, e));
                let v = v.parse::<usize>().map_err(|_| Error::parse(ln, format!("invalid vertex id `{v}`")))?;
                vertices.push((ln, seq(a)?, seq(b)?, seq(d)?, v));
                continue;
            }
            if !vertices.is_empty() {
                return Err(Error::parse(ln, "leaf lines must precede vertex lines"));
            }
            let (body, name) = match line.split_once('@') {
                Some((body, name)) => (body, Some(name.trim())),
                None => (line, None),
            };
            let leaf = parse_leaf_line(ln, body)?;
            let name = match name {
                Some(n) => Label::name(n).map_err(|e| Error::parse(ln, e))?,
                None => Label::name(&leaf.dotted()).map_err(|e| Error::parse(ln, e))?,
            };
            leaves.push(leaf.clone());
            names.push((leaf, name));
        }
        let tree = KMTree::from_leaves(height, arity, leaves).map_err(|e| Error::parse(ln0, e))?;
        let mut f = Fortress::new(tree, names.into_iter().collect()).map_err(|e| Error::parse(ln0, e))?;
        for (ln, a, b, d, v) in vertices {
            if f.get(&a, &b, &d).is_some() {
                return Err(Error::parse(ln, "vertex assigned twice"));
            }
            f.set(&a, &b, &d, v).map_err(|e| Error::parse(ln, e))?;
        }
        Ok(f)
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("height {} arity {}\n", self.tree.height(), self.tree.arity());
        for leaf in self.tree.leaves() {
            let labels: Vec<&str> = leaf.labels().iter().map(Label::as_str).collect();
            out.push_str(&format!("{} @{}\n", labels.join(" "), self.index[leaf]));
        }
        for ((a, b, d), v) in &self.vertex {
            out.push_str(&format!("vertex {a} {b} {d} {v}\n"));
        }
        out
    }
}

/// Distinct leaves `a, b, c` and `d ∈ Q(b∧c)` whose triple
/// `{P^{ab}_{d|s}, P^{ac}_{d|s}, P^{bc}_d}` is not a constituent edge.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FortressViolation {
    pub a: Seq,
    pub b: Seq,
    pub c: Seq,
    pub d: Seq,
}

impl fmt::Display for FortressViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "a={} b={} c={} d={}", self.a, self.b, self.c, self.d)
    }
}

fn positions(h: &ReducedHypergraph, f: &Fortress) -> Result<HashMap<Seq, usize>> {
    f.index
        .iter()
        .map(|(leaf, name)| {
            h.position(name)
                .map(|p| (leaf.clone(), p))
                .ok_or_else(|| Error::Structural(format!("leaf {leaf} names unknown index {name}")))
        })
        .collect()
}

/// Checks axiom (F); an empty list means the tree supports the fortress.
pub fn verify_fortress(h: &ReducedHypergraph, f: &Fortress) -> Result<Vec<FortressViolation>> {
    let pos = positions(h, f)?;
    let missing = f.missing();
    if !missing.is_empty() {
        let shown: Vec<String> = missing.iter().take(10).map(|(a, b, d)| format!("({a}, {b}, {d})")).collect();
        return Err(Error::Structural(format!(
            "fortress is missing {} vertices: {}{}",
            missing.len(),
            shown.join(" "),
            if missing.len() > 10 { " ..." } else { "" }
        )));
    }
    for ((a, b, _), &v) in &f.vertex {
        if v >= h.class_size(pos[a], pos[b]) {
            return Err(Error::Structural(format!("vertex {v} outside the class of {a}, {b}")));
        }
    }
    let leaves = f.tree.leaves();
    let mut qs: HashMap<Seq, Vec<Seq>> = HashMap::new();
    let mut bad = Vec::new();
    for (i, b) in leaves.iter().enumerate() {
        for c in &leaves[i + 1..] {
            let bc = b.wedge(c);
            let t = bc.len();
            let q = qs.entry(bc.clone()).or_insert_with(|| q_set(&f.tree, &bc).expect("wedge is a node")).clone();
            for a in leaves {
                let s = a.wedge(b).len();
                if a == b || a == c || s >= t {
                    continue;
                }
                for d in q.iter().filter(|d| d.at(s + 1) == a.at(s + 1)) {
                    let ds = d.restrict(s);
                    let p_ab = f.get(a, b, &ds).expect("domain checked");
                    let p_ac = f.get(a, c, &ds).expect("domain checked");
                    let p_bc = f.get(b, c, d).expect("domain checked");
                    if !h.contains_edge(pos[a], pos[b], pos[c], p_ab, p_ac, p_bc) {
                        bad.push(FortressViolation { a: a.clone(), b: b.clone(), c: c.clone(), d: d.clone() });
                    }
                }
            }
        }
    }
    Ok(bad)
}

/// Reads an `[r, 2]`-fortress as a clique of order `2^r` on its leaves.
pub fn fortress_to_clique(h: &ReducedHypergraph, f: &Fortress) -> Result<ReducedClique> {
    if f.tree.arity() != 2 {
        return Err(Error::arg(format!("fortress has arity {}, expected 2", f.tree.arity())));
    }
    let pos = positions(h, f)?;
    let mut vertices = BTreeMap::new();
    for (a, b, d) in f.domain() {
        let v = f.get(&a, &b, &d).ok_or_else(|| Error::Structural(format!("no vertex for ({a}, {b}, {d})")))?;
        let (x, y) = (pos[&a], pos[&b]);
        vertices.insert((x.min(y), x.max(y)), v);
    }
    let mut indices: Vec<usize> = pos.values().copied().collect();
    indices.sort_unstable();
    Ok(ReducedClique { indices, vertices })
}

/// Relabels a clique of order `2^r` by binary sequences of length `r`, in
/// increasing index order.
pub fn clique_to_fortress(h: &ReducedHypergraph, c: &ReducedClique) -> Result<Fortress> {
    let t = c.indices.len();
    if t < 2 || !t.is_power_of_two() {
        return Err(Error::arg(format!("clique order {t} is not a power of two")));
    }
    if !is_reduced_clique(h, c) {
        return Err(Error::Precondition("witness is not a clique".into()));
    }
    let r = t.trailing_zeros() as usize;
    let tree = KMTree::product(r, 2)?;
    let mut j = c.indices.clone();
    j.sort_unstable();
    let at: HashMap<Seq, usize> = tree.leaves().iter().cloned().zip(j.iter().copied()).collect();
    let index = at.iter().map(|(l, &p)| (l.clone(), h.indices()[p].clone())).collect();
    let mut f = Fortress::new(tree, index)?;
    for (a, b, d) in f.domain() {
        let v = c.vertex(at[&a], at[&b]).expect("clique covers all pairs");
        f.set(&a, &b, &d, v)?;
    }
    Ok(f)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::reduced::find_reduced_clique;

    fn fill(f: &mut Fortress, v: usize) {
        for (a, b, d) in f.domain() {
            f.set(&a, &b, &d, v).unwrap();
        }
    }

    #[test]
    fn height_one_is_vacuous() {
        let h = ReducedHypergraph::new(
            ["0", "1", "2", "3"].iter().map(|s| Label::new(s).unwrap()).collect(),
            |_, _| 2,
        )
        .unwrap();
        let mut f = Fortress::with_dotted_indices(KMTree::product(1, 4).unwrap());
        fill(&mut f, 1);
        assert!(verify_fortress(&h, &f).unwrap().is_empty());
    }

    #[test]
    fn gaps_are_structural_errors() {
        let h = ReducedHypergraph::complete(8, 1).unwrap();
        let tree = KMTree::product(3, 2).unwrap();
        let index = tree.leaves().iter().enumerate().map(|(i, l)| (l.clone(), Label::from(i))).collect();
        let mut f = Fortress::new(tree, index).unwrap();
        assert!(matches!(verify_fortress(&h, &f), Err(Error::Structural(_))));
        fill(&mut f, 0);
        assert!(verify_fortress(&h, &f).unwrap().is_empty());
        assert_eq!(Fortress::parse(&f.to_text()).unwrap(), f);
    }

    #[test]
    fn q_membership_is_enforced() {
        let mut f = Fortress::with_dotted_indices(KMTree::product(2, 3).unwrap());
        let a = Seq::parse_dotted("0.0").unwrap();
        let b = Seq::parse_dotted("0.1").unwrap();
        assert!(f.set(&a, &b, &Seq::parse_dotted("1").unwrap(), 0).is_ok());
        assert!(f.set(&a, &b, &Seq::parse_dotted("0").unwrap(), 0).is_err());
        assert!(f.set(&a, &a, &Seq::parse_dotted("1").unwrap(), 0).is_err());
        assert_eq!(f.domain().len(), 9 * 2 + 27);
    }

    #[test]
    fn clique_round_trip() {
        let h = ReducedHypergraph::complete(6, 2).unwrap();
        let c = find_reduced_clique(&h, 4, None).unwrap().verdict.witness().unwrap().clone();
        let f = clique_to_fortress(&h, &c).unwrap();
        assert!(verify_fortress(&h, &f).unwrap().is_empty());
        assert_eq!(fortress_to_clique(&h, &f).unwrap(), c);
        let three = ReducedClique { indices: vec![0, 1, 2], vertices: c.vertices.clone() };
        assert!(clique_to_fortress(&h, &three).is_err());
    }
}
