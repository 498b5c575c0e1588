//! Reduced hypergraphs: an index set `I`, a vertex class `𝒫^{ij}` for every
//! pair of indices and a tripartite constituent `𝒜^{ijk}` for every triple.
//!
//! Indices are addressed by their position in [`ReducedHypergraph::indices`];
//! the vertices of a class are `0..size`.

use std::collections::{BTreeMap, HashMap, HashSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::bits::Bits;
use crate::error::{Error, Result};
use crate::hypercore::{content_lines, Verdict};
use crate::scalar::{at_most, below, Scalar};
use crate::systems::Label;

mod base;
mod builder;
mod constants;
mod fortress;

pub use base::{sample_base_selection, BaseOutcome, BaseSelection, BasePart};
pub use builder::{build_fortress, check_goal, BuildFailure, BuildOutcome, BuildParams, FortressBuild, GoalViolation, Stage};
pub use constants::{compute_constants, ConstantLimits, Constants, ConstantsOutcome, ConstantsTable};
pub use fortress::{clique_to_fortress, fortress_to_clique, verify_fortress, Fortress, FortressViolation};

/// One constituent, with every pair of its classes indexing a row over the third.
#[derive(Clone, Debug)]
struct Constituent {
    // classes of the triple i < j < k: P^{ij} (size a), P^{ik} (size b), P^{jk} (size c)
    b: usize,
    c: usize,
    by_jk: Vec<Bits>, // [p * b + q] -> {s}
    by_ik: Vec<Bits>, // [p * c + s] -> {q}
    by_ij: Vec<Bits>, // [q * c + s] -> {p}
    edges: usize,
}

impl Constituent {
    fn new(a: usize, b: usize, c: usize) -> Self {
        Constituent {
            b,
            c,
            by_jk: vec![Bits::new(c); a * b],
            by_ik: vec![Bits::new(b); a * c],
            by_ij: vec![Bits::new(a); b * c],
            edges: 0,
        }
    }

    fn contains(&self, p: usize, q: usize, s: usize) -> bool {
        self.by_jk[p * self.b + q].contains(s)
    }

    fn insert(&mut self, p: usize, q: usize, s: usize) -> bool {
        if self.contains(p, q, s) {
            return false;
        }
        self.by_jk[p * self.b + q].insert(s);
        self.by_ik[p * self.c + s].insert(q);
        self.by_ij[q * self.c + s].insert(p);
        self.edges += 1;
        true
    }

    fn remove(&mut self, p: usize, q: usize, s: usize) -> bool {
        if !self.contains(p, q, s) {
            return false;
        }
        self.by_jk[p * self.b + q].remove(s);
        self.by_ik[p * self.c + s].remove(q);
        self.by_ij[q * self.c + s].remove(p);
        self.edges -= 1;
        true
    }
}

fn pair_rank(i: usize, j: usize) -> usize {
    let (i, j) = if i < j { (i, j) } else { (j, i) };
    j * (j - 1) / 2 + i
}

fn triple_rank(i: usize, j: usize, k: usize) -> usize {
    k * (k - 1) * (k - 2) / 6 + j * (j - 1) / 2 + i
}

#[derive(Clone, Debug)]
pub struct ReducedHypergraph {
    indices: Vec<Label>,
    position: HashMap<Label, usize>,
    class: Vec<usize>,
    constituents: Vec<Constituent>,
}

impl ReducedHypergraph {
    /// Empty constituents over the given classes.
    pub fn new(indices: Vec<Label>, class_size: impl Fn(usize, usize) -> usize) -> Result<Self> {
        let mut position = HashMap::new();
        for (p, l) in indices.iter().enumerate() {
            if position.insert(l.clone(), p).is_some() {
                return Err(Error::arg(format!("duplicate index {l}")));
            }
        }
        let n = indices.len();
        let mut class = vec![0; n * n.saturating_sub(1) / 2];
        for j in 0..n {
            for i in 0..j {
                let s = class_size(i, j);
                if s == 0 {
                    return Err(Error::arg(format!("class {} {} is empty", indices[i], indices[j])));
                }
                class[pair_rank(i, j)] = s;
            }
        }
        let mut constituents = Vec::with_capacity(n * n.saturating_sub(1) * n.saturating_sub(2) / 6);
        for k in 0..n {
            for j in 0..k {
                for i in 0..j {
                    debug_assert_eq!(constituents.len(), triple_rank(i, j, k));
                    let (a, b, c) = (class[pair_rank(i, j)], class[pair_rank(i, k)], class[pair_rank(j, k)]);
                    constituents.push(Constituent::new(a, b, c));
                }
            }
        }
        Ok(ReducedHypergraph { indices, position, class, constituents })
    }

    /// Indices named `0..n`, every class of the given size, no edges.
    pub fn uniform(n: usize, size: usize) -> Result<Self> {
        Self::new((0..n).map(Label::from).collect(), |_, _| size)
    }

    /// Every constituent complete.
    pub fn complete(n: usize, size: usize) -> Result<Self> {
        Self::random(n, size, 1.0, 0)
    }

    /// Every potential constituent edge kept independently with probability `p`.
    pub fn random(n: usize, size: usize, p: f64, seed: u64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::arg(format!("edge probability {p} outside [0,1]")));
        }
        let mut h = Self::uniform(n, size)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for k in 0..n {
            for j in 0..k {
                for i in 0..j {
                    for p_ij in 0..size {
                        for p_ik in 0..size {
                            for p_jk in 0..size {
                                if p >= 1.0 || rng.gen_bool(p) {
                                    h.constituent_mut(i, j, k).insert(p_ij, p_ik, p_jk);
                                }
                            }
                        }
                    }
                }
            }
        }
        Ok(h)
    }

    pub fn indices(&self) -> &[Label] {
        &self.indices
    }

    pub fn index_count(&self) -> usize {
        self.indices.len()
    }

    pub fn position(&self, label: &Label) -> Option<usize> {
        self.position.get(label).copied()
    }

    /// `|𝒫^{ij}|`.
    pub fn class_size(&self, i: usize, j: usize) -> usize {
        assert!(i != j && i < self.indices.len() && j < self.indices.len(), "no class {i} {j}");
        self.class[pair_rank(i, j)]
    }

    pub fn edge_count(&self) -> usize {
        self.constituents.iter().map(|c| c.edges).sum()
    }

    fn constituent(&self, i: usize, j: usize, k: usize) -> &Constituent {
        &self.constituents[triple_rank(i, j, k)]
    }

    fn constituent_mut(&mut self, i: usize, j: usize, k: usize) -> &mut Constituent {
        &mut self.constituents[triple_rank(i, j, k)]
    }

    fn check_triple(&self, u: usize, v: usize, w: usize) -> Result<()> {
        let n = self.indices.len();
        if u == v || u == w || v == w || u >= n || v >= n || w >= n {
            return Err(Error::arg(format!("({u}, {v}, {w}) is not a triple of distinct indices")));
        }
        Ok(())
    }

    /// Sorts `{u, v, w}` and carries the class vertices along.
    fn normalise(u: usize, v: usize, w: usize, p_uv: usize, p_uw: usize, p_vw: usize) -> ([usize; 3], [usize; 3]) {
        let mut t = [u, v, w];
        t.sort_unstable();
        let pick = |x: usize, y: usize| {
            let key = (x.min(y), x.max(y));
            if key == (u.min(v), u.max(v)) {
                p_uv
            } else if key == (u.min(w), u.max(w)) {
                p_uw
            } else {
                p_vw
            }
        };
        (t, [pick(t[0], t[1]), pick(t[0], t[2]), pick(t[1], t[2])])
    }

    fn check_vertices(&self, t: [usize; 3], p: [usize; 3]) -> Result<()> {
        let pairs = [(t[0], t[1]), (t[0], t[2]), (t[1], t[2])];
        for ((x, y), v) in pairs.into_iter().zip(p) {
            if v >= self.class_size(x, y) {
                return Err(Error::arg(format!("vertex {v} outside class {} {}", self.indices[x], self.indices[y])));
            }
        }
        Ok(())
    }

    /// Adds `{P^{uv}, P^{uw}, P^{vw}}` to `𝒜^{uvw}`; `false` if already present.
    pub fn insert_edge(&mut self, u: usize, v: usize, w: usize, p_uv: usize, p_uw: usize, p_vw: usize) -> Result<bool> {
        self.check_triple(u, v, w)?;
        let (t, p) = Self::normalise(u, v, w, p_uv, p_uw, p_vw);
        self.check_vertices(t, p)?;
        Ok(self.constituent_mut(t[0], t[1], t[2]).insert(p[0], p[1], p[2]))
    }

    pub fn remove_edge(&mut self, u: usize, v: usize, w: usize, p_uv: usize, p_uw: usize, p_vw: usize) -> Result<bool> {
        self.check_triple(u, v, w)?;
        let (t, p) = Self::normalise(u, v, w, p_uv, p_uw, p_vw);
        self.check_vertices(t, p)?;
        Ok(self.constituent_mut(t[0], t[1], t[2]).remove(p[0], p[1], p[2]))
    }

    /// Whether `{P^{uv}, P^{uw}, P^{vw}} ∈ E(𝒜^{uvw})`.
    pub fn contains_edge(&self, u: usize, v: usize, w: usize, p_uv: usize, p_uw: usize, p_vw: usize) -> bool {
        self.row(u, v, w, p_uv, p_uw).contains(p_vw)
    }

    /// Vertices of `𝒫^{vw}` completing `P^{av}, P^{aw}` to an edge of `𝒜^{avw}`.
    pub fn row(&self, apex: usize, v: usize, w: usize, p_av: usize, p_aw: usize) -> &Bits {
        let mut t = [apex, v, w];
        t.sort_unstable();
        let [i, j, k] = t;
        let c = self.constituent(i, j, k);
        // vertex on the class shared with the smaller of v, w first
        let (first, second) = if v < w { (p_av, p_aw) } else { (p_aw, p_av) };
        if apex == i {
            &c.by_jk[first * c.b + second]
        } else if apex == j {
            &c.by_ik[first * c.c + second]
        } else {
            &c.by_ij[first * c.c + second]
        }
    }

    /// Pair-degree of `P^{av}, P^{aw}` in `𝒫^{vw}`.
    pub fn pair_degree(&self, apex: usize, v: usize, w: usize, p_av: usize, p_aw: usize) -> usize {
        self.row(apex, v, w, p_av, p_aw).count()
    }

    /// Constituent edges of `i < j < k` as `(P^{ij}, P^{ik}, P^{jk})`.
    pub fn edges_of(&self, i: usize, j: usize, k: usize) -> impl Iterator<Item = (usize, usize, usize)> + '_ {
        assert!(i < j && j < k && k < self.indices.len(), "edges_of needs i < j < k");
        let c = self.constituent(i, j, k);
        c.by_jk.iter().enumerate().flat_map(move |(pq, row)| row.iter().map(move |s| (pq / c.b, pq % c.b, s)))
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = content_lines(text);
        let (_, header) = lines.next().ok_or_else(|| Error::parse(1, "missing `indices` line"))?;
        let mut toks = header.split_whitespace();
        if toks.next() != Some("indices") {
            return Err(Error::parse(1, "expected `indices i1 i2 ...`"));
        }
        let labels: Vec<Label> = toks.map(Label::name).collect::<Result<_>>().map_err(|e| Error::parse(1, e))?;
        let n = labels.len();
        let pos: HashMap<&str, usize> = labels.iter().enumerate().map(|(p, l)| (l.as_str(), p)).collect();
        if pos.len() != n {
            return Err(Error::parse(1, "duplicate index"));
        }
        let lookup = |ln: usize, t: &str| pos.get(t).copied().ok_or_else(|| Error::parse(ln, format!("unknown index `{t}`")));
        let num = |ln: usize, t: &str| t.parse::<usize>().map_err(|_| Error::parse(ln, format!("invalid number `{t}`")));
        let mut sizes: HashMap<(usize, usize), usize> = HashMap::new();
        let mut edges = Vec::new();
        for (ln, line) in lines {
            let toks: Vec<&str> = line.split_whitespace().collect();
            match toks[..] {
                ["class", i, j, size] => {
                    let (i, j, size) = (lookup(ln, i)?, lookup(ln, j)?, num(ln, size)?);
                    if i == j || size == 0 {
                        return Err(Error::parse(ln, "class needs two distinct indices and a positive size"));
                    }
                    if sizes.insert((i.min(j), i.max(j)), size).is_some() {
                        return Err(Error::parse(ln, "class declared twice"));
                    }
                }
                ["edge", i, j, k, p, q, s] => {
                    let t = [lookup(ln, i)?, lookup(ln, j)?, lookup(ln, k)?];
                    if !(t[0] < t[1] && t[1] < t[2]) {
                        return Err(Error::parse(ln, "edge indices must be increasing in declared order"));
                    }
                    edges.push((ln, t, [num(ln, p)?, num(ln, q)?, num(ln, s)?]));
                }
                _ => return Err(Error::parse(ln, "expected `class i j size` or `edge i j k p q s`")),
            }
        }
        for j in 0..n {
            for i in 0..j {
                if !sizes.contains_key(&(i, j)) {
                    return Err(Error::Structural(format!("class {} {} not declared", labels[i], labels[j])));
                }
            }
        }
        let mut h = ReducedHypergraph::new(labels, |i, j| sizes[&(i, j)])?;
        for (ln, t, p) in edges {
            h.check_vertices(t, p).map_err(|e| Error::parse(ln, e))?;
            if !h.constituent_mut(t[0], t[1], t[2]).insert(p[0], p[1], p[2]) {
                return Err(Error::parse(ln, "duplicate edge"));
            }
        }
        Ok(h)
    }

    pub fn to_text(&self) -> String {
        let n = self.indices.len();
        let names: Vec<&str> = self.indices.iter().map(Label::as_str).collect();
        let mut out = format!("indices {}\n", names.join(" "));
        for i in 0..n {
            for j in i + 1..n {
                out.push_str(&format!("class {} {} {}\n", names[i], names[j], self.class_size(i, j)));
            }
        }
        for i in 0..n {
            for j in i + 1..n {
                for k in j + 1..n {
                    for (p, q, s) in self.edges_of(i, j, k) {
                        out.push_str(&format!("edge {} {} {} {p} {q} {s}\n", names[i], names[j], names[k]));
                    }
                }
            }
        }
        out
    }
}

/// One ordered role assignment `(i, j, k)`: pairs `(P^{ij}, P^{ik})` whose
/// pair-degree into `𝒫^{jk}` is below `d|𝒫^{jk}|`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BoxViolation {
    pub roles: [usize; 3],
    pub bad_pairs: u64,
    pub pairs: u64,
}

#[derive(Clone, Debug, Default)]
pub struct BoxDenseReport {
    pub assignments: usize,
    pub violations: Vec<BoxViolation>,
    pub note: Option<String>,
}

impl BoxDenseReport {
    pub fn passes(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks `(d, δ, ⋈)`-density over every ordered choice of distinct `i, j, k`.
pub fn check_box_dense<S: Scalar>(h: &ReducedHypergraph, d: &S, delta: &S) -> Result<BoxDenseReport> {
    if !d.is_unit_interval() || !delta.is_unit_interval() {
        return Err(Error::arg(format!("d = {d} and delta = {delta} must lie in [0,1]")));
    }
    let n = h.index_count();
    let mut report = BoxDenseReport::default();
    if n < 3 {
        report.note = Some(format!("{n} indices: no triples, vacuously dense"));
        return Ok(report);
    }
    for k in 0..n {
        for j in 0..k {
            for i in 0..j {
                let c = h.constituent(i, j, k);
                // apex and the class the rows range over; the two orders of
                // the remaining indices see the same pairs
                let apexes: [(usize, usize, usize, &Vec<Bits>); 3] = [
                    (i, j, k, &c.by_jk),
                    (j, i, k, &c.by_ik),
                    (k, i, j, &c.by_ij),
                ];
                for (apex, v, w, rows) in apexes {
                    let third = h.class_size(v, w) as u64;
                    let bad = rows.iter().filter(|r| below(r.count() as u64, d, third)).count() as u64;
                    let pairs = rows.len() as u64;
                    for roles in [[apex, v, w], [apex, w, v]] {
                        report.assignments += 1;
                        if !at_most(bad, delta, pairs) {
                            report.violations.push(BoxViolation { roles, bad_pairs: bad, pairs });
                        }
                    }
                }
            }
        }
    }
    Ok(report)
}

/// A choice of `P^{xy} ∈ 𝒫^{xy}` for `x ∈ X`, `y ∈ Y`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Selection {
    xs: Vec<usize>,
    ys: Vec<usize>,
    choice: BTreeMap<(usize, usize), usize>,
}

impl Selection {
    pub fn new(xs: Vec<usize>, ys: Vec<usize>) -> Result<Self> {
        let x: HashSet<usize> = xs.iter().copied().collect();
        let y: HashSet<usize> = ys.iter().copied().collect();
        if x.len() != xs.len() || y.len() != ys.len() {
            return Err(Error::arg("selection sides contain repeated indices"));
        }
        if !x.is_disjoint(&y) {
            return Err(Error::arg("selection sides must be disjoint"));
        }
        Ok(Selection { xs, ys, choice: BTreeMap::new() })
    }

    /// Every `P^{xy}` set to vertex `v`.
    pub fn constant(xs: Vec<usize>, ys: Vec<usize>, v: usize) -> Result<Self> {
        let mut s = Selection::new(xs, ys)?;
        for &x in &s.xs {
            for &y in &s.ys {
                s.choice.insert((x, y), v);
            }
        }
        Ok(s)
    }

    /// Uniformly random vertices.
    pub fn random(h: &ReducedHypergraph, xs: Vec<usize>, ys: Vec<usize>, seed: u64) -> Result<Self> {
        let mut s = Selection::new(xs, ys)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for &x in &s.xs {
            for &y in &s.ys {
                s.choice.insert((x, y), rng.gen_range(0..h.class_size(x, y)));
            }
        }
        Ok(s)
    }

    pub fn xs(&self) -> &[usize] {
        &self.xs
    }

    pub fn ys(&self) -> &[usize] {
        &self.ys
    }

    pub fn set(&mut self, x: usize, y: usize, v: usize) -> Result<()> {
        if !self.xs.contains(&x) || !self.ys.contains(&y) {
            return Err(Error::arg(format!("({x}, {y}) is outside the selection domain")));
        }
        self.choice.insert((x, y), v);
        Ok(())
    }

    pub fn get(&self, x: usize, y: usize) -> Option<usize> {
        self.choice.get(&(x, y)).copied()
    }

    /// First `(x, y)` without a vertex.
    pub fn missing(&self) -> Option<(usize, usize)> {
        self.xs.iter().flat_map(|&x| self.ys.iter().map(move |&y| (x, y))).find(|k| !self.choice.contains_key(k))
    }

    fn validate(&self, h: &ReducedHypergraph) -> Result<()> {
        if let Some((x, y)) = self.missing() {
            return Err(Error::arg(format!("selection has no vertex for ({x}, {y})")));
        }
        let n = h.index_count();
        if let Some(&bad) = self.xs.iter().chain(&self.ys).find(|&&i| i >= n) {
            return Err(Error::arg(format!("index {bad} out of range")));
        }
        for (&(x, y), &v) in &self.choice {
            if v >= h.class_size(x, y) {
                return Err(Error::arg(format!("vertex {v} outside class ({x}, {y})")));
            }
        }
        Ok(())
    }
}

/// Triples `(x, x', y)`, `x < x'`, where `P^{xy}, P^{x'y}` have pair-degree
/// below `d|𝒫^{xx'}|`; empty means `d`-admissible.
pub fn check_admissible<S: Scalar>(h: &ReducedHypergraph, sel: &Selection, d: &S) -> Result<Vec<(usize, usize, usize)>> {
    sel.validate(h)?;
    let mut bad = Vec::new();
    let mut xs = sel.xs.clone();
    xs.sort_unstable();
    for (a, &x) in xs.iter().enumerate() {
        for &x2 in &xs[a + 1..] {
            let total = h.class_size(x, x2) as u64;
            for &y in &sel.ys {
                let deg = h.pair_degree(y, x, x2, sel.choice[&(x, y)], sel.choice[&(x2, y)]);
                if below(deg as u64, d, total) {
                    bad.push((x, x2, y));
                }
            }
        }
    }
    Ok(bad)
}

/// Indices `J` with a vertex `P^{ij}` for every pair `i < j` of `J`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReducedClique {
    pub indices: Vec<usize>,
    pub vertices: BTreeMap<(usize, usize), usize>,
}

impl ReducedClique {
    pub fn vertex(&self, i: usize, j: usize) -> Option<usize> {
        self.vertices.get(&(i.min(j), i.max(j))).copied()
    }
}

/// Whether every triple of `J` spans a constituent edge with the chosen vertices.
pub fn is_reduced_clique(h: &ReducedHypergraph, c: &ReducedClique) -> bool {
    let j = &c.indices;
    let n = h.index_count();
    let distinct: HashSet<usize> = j.iter().copied().collect();
    if distinct.len() != j.len() || j.iter().any(|&i| i >= n) {
        return false;
    }
    let vertex = |a: usize, b: usize| c.vertex(a, b).filter(|&v| v < h.class_size(a, b));
    for (x, &a) in j.iter().enumerate() {
        for (y, &b) in j.iter().enumerate().skip(x + 1) {
            if vertex(a, b).is_none() {
                return false;
            }
            for &cc in &j[y + 1..] {
                let (Some(p), Some(q), Some(s)) = (vertex(a, b), vertex(a, cc), vertex(b, cc)) else {
                    return false;
                };
                if !h.contains_edge(a, b, cc, p, q, s) {
                    return false;
                }
            }
        }
    }
    true
}

#[derive(Clone, Debug)]
pub struct ReducedCliqueSearch {
    pub verdict: Verdict<ReducedClique>,
    pub nodes: u64,
}

/// Backtracking over indices in increasing order, then over the vertices
/// joining each new index to the indices already chosen.
pub fn find_reduced_clique(h: &ReducedHypergraph, t: usize, node_limit: Option<u64>) -> Result<ReducedCliqueSearch> {
    if t < 3 {
        return Err(Error::arg(format!("clique order must be at least 3, got {t}")));
    }
    if t > h.index_count() {
        return Ok(ReducedCliqueSearch { verdict: Verdict::Absent, nodes: 0 });
    }
    let mut s = CliqueSearcher { h, t, limit: node_limit, nodes: 0, chosen: Vec::new(), vertex: HashMap::new() };
    let verdict = match s.extend(0) {
        Step::Found => Verdict::Found(ReducedClique {
            indices: s.chosen.clone(),
            vertices: s.vertex.iter().map(|(&k, &v)| (k, v)).collect(),
        }),
        Step::Exhausted => Verdict::Absent,
        Step::OutOfBudget => Verdict::Unknown,
    };
    Ok(ReducedCliqueSearch { verdict, nodes: s.nodes })
}

enum Step {
    Found,
    Exhausted,
    OutOfBudget,
}

struct CliqueSearcher<'a> {
    h: &'a ReducedHypergraph,
    t: usize,
    limit: Option<u64>,
    nodes: u64,
    chosen: Vec<usize>,
    vertex: HashMap<(usize, usize), usize>,
}

impl CliqueSearcher<'_> {
    fn tick(&mut self) -> bool {
        self.nodes += 1;
        self.limit.is_some_and(|l| self.nodes > l)
    }

    fn extend(&mut self, start: usize) -> Step {
        if self.chosen.len() == self.t {
            return Step::Found;
        }
        let n = self.h.index_count();
        let need = self.t - self.chosen.len();
        for v in start..=n - need {
            if self.tick() {
                return Step::OutOfBudget;
            }
            match self.join(v, 0) {
                Step::Exhausted => {}
                other => return other,
            }
        }
        Step::Exhausted
    }

    /// Chooses `P^{u_l v}` for the `l`-th chosen index `u_l`.
    fn join(&mut self, v: usize, l: usize) -> Step {
        if l == self.chosen.len() {
            self.chosen.push(v);
            let r = self.extend(v + 1);
            if !matches!(r, Step::Found) {
                self.chosen.pop();
            }
            return r;
        }
        let u = self.chosen[l];
        let mut cand = Bits::full(self.h.class_size(u, v));
        for &um in &self.chosen[..l] {
            let row = self.h.row(um, u, v, self.vertex[&(um, u)], self.vertex[&(um, v)]);
            cand.intersect_with(row);
        }
        for p in cand.iter() {
            if self.tick() {
                return Step::OutOfBudget;
            }
            self.vertex.insert((u, v), p);
            match self.join(v, l + 1) {
                Step::Exhausted => {}
                other => return other,
            }
        }
        self.vertex.remove(&(u, v));
        Step::Exhausted
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roles_agree_with_storage() {
        let mut h = ReducedHypergraph::new((0..3).map(Label::from).collect(), |i, j| 2 + i + j).unwrap();
        // classes: 01 -> 3, 02 -> 4, 12 -> 5
        assert!(h.insert_edge(2, 0, 1, 3, 1, 2).unwrap());
        // the edge is P^{01} = 2, P^{02} = 3, P^{12} = 1
        assert!(h.contains_edge(0, 1, 2, 2, 3, 1));
        assert!(h.contains_edge(1, 2, 0, 1, 2, 3));
        assert!(!h.contains_edge(0, 1, 2, 2, 1, 3));
        assert_eq!(h.pair_degree(0, 1, 2, 2, 3), 1);
        assert_eq!(h.pair_degree(1, 0, 2, 2, 1), 1);
        assert_eq!(h.pair_degree(2, 1, 0, 1, 3), 1);
        assert_eq!(h.pair_degree(2, 0, 1, 3, 1), 1);
        assert_eq!(h.edges_of(0, 1, 2).collect::<Vec<_>>(), vec![(2, 3, 1)]);
        assert!(!h.insert_edge(0, 1, 2, 2, 3, 1).unwrap());
        assert!(h.insert_edge(0, 1, 2, 3, 0, 0).is_err());
        assert!(h.remove_edge(0, 2, 1, 3, 2, 1).unwrap());
        assert_eq!(h.edge_count(), 0);
    }

    #[test]
    fn file_round_trip() {
        let h = ReducedHypergraph::random(4, 2, 0.5, 3).unwrap();
        let back = ReducedHypergraph::parse(&h.to_text()).unwrap();
        assert_eq!(back.to_text(), h.to_text());
        let bad = "indices a b c\nclass a b 1\nclass a c 1\nclass b c 1\nedge b a c 0 0 0\n";
        assert!(matches!(ReducedHypergraph::parse(bad), Err(Error::Parse { line: 5, .. })));
        let missing = "indices a b c\nclass a b 1\nclass a c 1\n";
        assert!(ReducedHypergraph::parse(missing).is_err());
    }

    #[test]
    fn box_density_extremes() {
        let full = ReducedHypergraph::complete(4, 3).unwrap();
        let r = check_box_dense(&full, &1.0, &0.0).unwrap();
        assert!(r.passes());
        assert_eq!(r.assignments, 4 * 6);
        let empty = ReducedHypergraph::uniform(4, 3).unwrap();
        let r = check_box_dense(&empty, &0.5, &0.9).unwrap();
        assert_eq!(r.violations.len(), 24);
        assert!(check_box_dense(&empty, &0.0, &0.0).unwrap().passes());
        assert!(check_box_dense(&empty, &0.5, &1.0).unwrap().passes());
        let tiny = ReducedHypergraph::uniform(2, 3).unwrap();
        assert!(check_box_dense(&tiny, &1.0, &0.0).unwrap().note.is_some());
    }

    #[test]
    fn admissibility_reports_zero_codegree() {
        let mut h = ReducedHypergraph::complete(4, 2).unwrap();
        let sel = Selection::constant(vec![0, 1, 2], vec![3], 0).unwrap();
        assert!(check_admissible(&h, &sel, &1.0).unwrap().is_empty());
        for p in 0..2 {
            h.remove_edge(3, 0, 1, 0, 0, p).unwrap();
        }
        assert_eq!(check_admissible(&h, &sel, &0.5).unwrap(), vec![(0, 1, 3)]);
        let partial = Selection::new(vec![0, 1], vec![3]).unwrap();
        assert!(check_admissible(&h, &partial, &0.5).is_err());
        let single = Selection::constant(vec![0], vec![3], 1).unwrap();
        assert!(check_admissible(&h, &single, &1.0).unwrap().is_empty());
    }

    #[test]
    fn clique_search_basics() {
        let full = ReducedHypergraph::complete(5, 2).unwrap();
        let found = find_reduced_clique(&full, 5, None).unwrap();
        assert!(is_reduced_clique(&full, found.verdict.witness().unwrap()));
        let empty = ReducedHypergraph::uniform(5, 2).unwrap();
        assert!(find_reduced_clique(&empty, 3, None).unwrap().verdict.is_absent());
        assert!(find_reduced_clique(&full, 6, None).unwrap().verdict.is_absent());
        assert!(find_reduced_clique(&full, 2, None).is_err());
        let r = find_reduced_clique(&ReducedHypergraph::random(8, 3, 0.3, 1).unwrap(), 6, Some(5)).unwrap();
        assert_eq!(r.verdict, Verdict::Unknown);
    }
}
