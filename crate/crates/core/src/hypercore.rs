//! Hypergraphs, pair sets and the exact density counters.
//!
//! Three counters mirror the three density notions for a 3-uniform
//! hypergraph `H` on `0..n`:
//!
//! * [`count_boxtimes`]: pairs of pairs `((x,y),(x,z)) ∈ P×Q` sharing the
//!   first coordinate, witnessed when `{x,y,z} ∈ E`.
//! * [`count_ev`]: incidences `(x,(y,z)) ∈ X×P`.
//! * [`count_vvv`]: triples `(x,y,z) ∈ X×Y×Z`.
//!
//! In every counter only pairwise distinct `x, y, z` are candidates, so the
//! totals are the number of triples that could possibly be edges.

use std::fmt::Write as _;

use crate::bits::Bits;
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::Ratio;

/// 3-uniform hypergraph on `0..n` with an `O(1)` triple-membership oracle.
///
/// For every ordered pair `(x,y)` the link `{z : {x,y,z} ∈ E}` is kept as a
/// bitset, so membership and link intersections never scan the edge list.
#[derive(Clone, PartialEq, Eq)]
pub struct Hypergraph3 {
    n: usize,
    links: Vec<Bits>,
    edges: usize,
}

impl Hypergraph3 {
    pub fn empty(n: usize) -> Self {
        Hypergraph3 { n, links: vec![Bits::new(n); n * n], edges: 0 }
    }

    pub fn complete(n: usize) -> Self {
        let mut h = Hypergraph3::empty(n);
        for x in 0..n {
            for y in x + 1..n {
                for z in y + 1..n {
                    h.link_insert(x, y, z);
                }
            }
        }
        h.edges = n * n.saturating_sub(1) * n.saturating_sub(2) / 6;
        h
    }

    pub fn from_edges(n: usize, edges: impl IntoIterator<Item = [usize; 3]>) -> Result<Self> {
        let mut h = Hypergraph3::empty(n);
        for [x, y, z] in edges {
            h.insert(x, y, z)?;
        }
        Ok(h)
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.edges
    }

    fn link_insert(&mut self, x: usize, y: usize, z: usize) {
        let n = self.n;
        self.links[x * n + y].insert(z);
        self.links[y * n + x].insert(z);
        self.links[x * n + z].insert(y);
        self.links[z * n + x].insert(y);
        self.links[y * n + z].insert(x);
        self.links[z * n + y].insert(x);
    }

    /// Adds `{x,y,z}`; returns whether the edge was new.
    pub fn insert(&mut self, x: usize, y: usize, z: usize) -> Result<bool> {
        self.check_triple(x, y, z)?;
        if self.contains(x, y, z) {
            return Ok(false);
        }
        self.link_insert(x, y, z);
        self.edges += 1;
        Ok(true)
    }

    /// Inserts a triple already known to be valid and absent.
    pub(crate) fn insert_new_unchecked(&mut self, x: usize, y: usize, z: usize) {
        self.link_insert(x, y, z);
        self.edges += 1;
    }

    fn check_triple(&self, x: usize, y: usize, z: usize) -> Result<()> {
        if x >= self.n || y >= self.n || z >= self.n {
            return Err(Error::arg(format!("triple {{{x},{y},{z}}} out of range for n = {}", self.n)));
        }
        if x == y || x == z || y == z {
            return Err(Error::arg(format!("triple {{{x},{y},{z}}} has repeated vertices")));
        }
        Ok(())
    }

    #[inline]
    pub fn contains(&self, x: usize, y: usize, z: usize) -> bool {
        x < self.n && y < self.n && self.links[x * self.n + y].contains(z)
    }

    /// `{z : {x,y,z} ∈ E}`.
    #[inline]
    pub fn link(&self, x: usize, y: usize) -> &Bits {
        &self.links[x * self.n + y]
    }

    /// Number of edges containing `v`.
    pub fn degree(&self, v: usize) -> usize {
        (0..self.n).map(|u| self.link(v, u).count()).sum::<usize>() / 2
    }

    /// Edges as sorted triples `x < y < z`, in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = [usize; 3]> + '_ {
        let n = self.n;
        (0..n).flat_map(move |x| {
            (x + 1..n).flat_map(move |y| {
                self.link(x, y).iter().filter(move |&z| z > y).map(move |z| [x, y, z])
            })
        })
    }

    /// Edge-wise union; both hypergraphs must share `n`.
    pub fn union(&self, other: &Hypergraph3) -> Result<Hypergraph3> {
        if self.n != other.n {
            return Err(Error::dim(self.n, other.n));
        }
        let mut out = self.clone();
        for [x, y, z] in other.edges() {
            out.insert(x, y, z)?;
        }
        Ok(out)
    }

    /// Parses the `vertices <n>` / `x y z` text format.
    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = content_lines(text);
        let (ln, header) = lines.next().ok_or_else(|| Error::parse(1, "missing `vertices <n>` header"))?;
        let n = parse_header(ln, header, "vertices")?;
        let mut h = Hypergraph3::empty(n);
        for (ln, line) in lines {
            let nums = parse_usizes(ln, line)?;
            let [x, y, z] = nums[..] else {
                return Err(Error::parse(ln, format!("expected `x y z`, found {} fields", nums.len())));
            };
            if !(x < y && y < z) {
                return Err(Error::parse(ln, "edge must satisfy x < y < z"));
            }
            if z >= n {
                return Err(Error::parse(ln, format!("vertex {z} out of range for n = {n}")));
            }
            h.insert(x, y, z).map_err(|e| Error::parse(ln, e))?;
        }
        Ok(h)
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("vertices {}\n", self.n);
        for [x, y, z] in self.edges() {
            let _ = writeln!(out, "{x} {y} {z}");
        }
        out
    }
}

impl std::fmt::Debug for Hypergraph3 {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Hypergraph3").field("n", &self.n).field("edges", &self.edges).finish()
    }
}

/// A set of ordered pairs `(x,y)` with `x ≠ y` over `0..n`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct PairSet {
    n: usize,
    rows: Vec<Bits>,
}

impl PairSet {
    pub fn empty(n: usize) -> Self {
        PairSet { n, rows: vec![Bits::new(n); n] }
    }

    /// All ordered pairs of distinct vertices.
    pub fn all(n: usize) -> Self {
        let mut p = PairSet::empty(n);
        for x in 0..n {
            p.rows[x] = Bits::full(n);
            p.rows[x].remove(x);
        }
        p
    }

    /// `X × Y` minus the diagonal.
    pub fn product(x: &VertexSet, y: &VertexSet) -> Result<Self> {
        if x.n() != y.n() {
            return Err(Error::dim(x.n(), y.n()));
        }
        let mut p = PairSet::empty(x.n());
        for a in x.iter() {
            p.rows[a] = y.bits().clone();
            p.rows[a].remove(a);
        }
        Ok(p)
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn insert(&mut self, x: usize, y: usize) -> Result<bool> {
        if x >= self.n || y >= self.n {
            return Err(Error::arg(format!("pair ({x},{y}) out of range for n = {}", self.n)));
        }
        if x == y {
            return Err(Error::arg(format!("loop ({x},{x}) is not a valid pair")));
        }
        let new = !self.rows[x].contains(y);
        self.rows[x].insert(y);
        Ok(new)
    }

    #[inline]
    pub fn contains(&self, x: usize, y: usize) -> bool {
        x < self.n && self.rows[x].contains(y)
    }

    /// `{y : (x,y) ∈ P}`.
    #[inline]
    pub fn row(&self, x: usize) -> &Bits {
        &self.rows[x]
    }

    pub fn len(&self) -> usize {
        self.rows.iter().map(Bits::count).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.iter().all(Bits::is_empty)
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.rows.iter().enumerate().flat_map(|(x, row)| row.iter().map(move |y| (x, y)))
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = content_lines(text);
        let (ln, header) = lines.next().ok_or_else(|| Error::parse(1, "missing `vertices <n>` header"))?;
        let n = parse_header(ln, header, "vertices")?;
        let mut p = PairSet::empty(n);
        for (ln, line) in lines {
            let nums = parse_usizes(ln, line)?;
            let [x, y] = nums[..] else {
                return Err(Error::parse(ln, format!("expected `x y`, found {} fields", nums.len())));
            };
            p.insert(x, y).map_err(|e| Error::parse(ln, e))?;
        }
        Ok(p)
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("vertices {}\n", self.n);
        for (x, y) in self.iter() {
            let _ = writeln!(out, "{x} {y}");
        }
        out
    }
}

/// A subset of `0..n`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct VertexSet {
    bits: Bits,
}

impl VertexSet {
    pub fn empty(n: usize) -> Self {
        VertexSet { bits: Bits::new(n) }
    }

    pub fn all(n: usize) -> Self {
        VertexSet { bits: Bits::full(n) }
    }

    pub fn from_vertices(n: usize, vs: impl IntoIterator<Item = usize>) -> Result<Self> {
        let mut s = VertexSet::empty(n);
        for v in vs {
            if v >= n {
                return Err(Error::arg(format!("vertex {v} out of range for n = {n}")));
            }
            s.bits.insert(v);
        }
        Ok(s)
    }

    pub fn n(&self) -> usize {
        self.bits.len()
    }

    pub fn len(&self) -> usize {
        self.bits.count()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn contains(&self, v: usize) -> bool {
        self.bits.contains(v)
    }

    pub fn bits(&self) -> &Bits {
        &self.bits
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.bits.iter()
    }

    /// Single line of whitespace-separated indices (blank means empty).
    pub fn parse(text: &str, n: usize) -> Result<Self> {
        let mut s = VertexSet::empty(n);
        let mut seen_line = false;
        for (ln, line) in content_lines(text) {
            if seen_line {
                return Err(Error::parse(ln, "vertex subset must be a single line"));
            }
            seen_line = true;
            for v in parse_usizes(ln, line)? {
                if v >= n {
                    return Err(Error::parse(ln, format!("vertex {v} out of range for n = {n}")));
                }
                s.bits.insert(v);
            }
        }
        Ok(s)
    }

    pub fn to_text(&self) -> String {
        let items: Vec<String> = self.iter().map(|v| v.to_string()).collect();
        format!("{}\n", items.join(" "))
    }
}

/// Witnessed incidences `e` out of `total` candidates.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct DensityReport {
    pub e: u64,
    pub total: u64,
}

impl DensityReport {
    /// `e / total`, exact; `None` when there are no candidates.
    pub fn ratio(&self) -> Option<Ratio> {
        (self.total > 0).then(|| Ratio::new(self.e, self.total))
    }

    pub fn ratio_as<S: Scalar>(&self) -> Option<S> {
        self.ratio().map(S::from_ratio)
    }

    /// `e - d·total + η·n³`; nonnegative exactly when the density inequality holds.
    pub fn margin<S: Scalar>(&self, d: &S, eta: &S, n: usize) -> S {
        let n3 = (n as u64).pow(3);
        S::from_count(self.e) - d.clone() * S::from_count(self.total) + eta.clone() * S::from_count(n3)
    }
}

/// Parameters `(d₂, δ₂)` of a regular tripartite graph, used for the
/// triangle-count upper bound `d₂³|X||Y||Z| + 3δ₂|X||Y||Z|`.
#[derive(Clone, Debug, PartialEq)]
pub struct RegularityParams<S: Scalar = f64> {
    pub d2: S,
    pub delta2: S,
}

impl<S: Scalar> RegularityParams<S> {
    pub fn new(d2: S, delta2: S) -> Result<Self> {
        if !d2.is_unit_interval() || !delta2.is_unit_interval() {
            return Err(Error::arg("d2 and delta2 must lie in [0,1]"));
        }
        Ok(RegularityParams { d2, delta2 })
    }

    pub fn triangle_upper_bound(&self, x: usize, y: usize, z: usize) -> S {
        let vol = S::from_count((x * y * z) as u64);
        let d3 = self.d2.clone() * self.d2.clone() * self.d2.clone();
        let three = S::from_count(3);
        d3 * vol.clone() + three * self.delta2.clone() * vol
    }
}

fn same_n(h: &Hypergraph3, n: usize) -> Result<()> {
    if h.n() == n {
        Ok(())
    } else {
        Err(Error::dim(h.n(), n))
    }
}

/// Counts `((x,y),(x,z)) ∈ P×Q` with `x,y,z` pairwise distinct, and those
/// among them with `{x,y,z} ∈ E`.
pub fn count_boxtimes(h: &Hypergraph3, p: &PairSet, q: &PairSet) -> Result<DensityReport> {
    same_n(h, p.n())?;
    same_n(h, q.n())?;
    let mut total = 0u64;
    let mut e = 0u64;
    for x in 0..h.n() {
        let pr = p.row(x);
        let qr = q.row(x);
        let (pc, qc) = (pr.count() as u64, qr.count() as u64);
        if pc == 0 || qc == 0 {
            continue;
        }
        total += pc * qc - pr.and_count(qr) as u64;
        for y in pr.iter() {
            e += h.link(x, y).and_count(qr) as u64;
        }
    }
    Ok(DensityReport { e, total })
}

/// Counts `(x,(y,z)) ∈ X×P` with `x ∉ {y,z}`, and those with `{x,y,z} ∈ E`.
pub fn count_ev(h: &Hypergraph3, x: &VertexSet, p: &PairSet) -> Result<DensityReport> {
    same_n(h, x.n())?;
    same_n(h, p.n())?;
    let xs = x.len() as u64;
    let mut total = 0u64;
    let mut e = 0u64;
    for y in 0..h.n() {
        let row = p.row(y);
        if row.is_empty() {
            continue;
        }
        let in_x_y = x.contains(y) as u64;
        for z in row.iter() {
            total += xs - in_x_y - x.contains(z) as u64;
            e += h.link(y, z).and_count(x.bits()) as u64;
        }
    }
    Ok(DensityReport { e, total })
}

/// Counts `(x,y,z) ∈ X×Y×Z` pairwise distinct, and those with `{x,y,z} ∈ E`.
pub fn count_vvv(h: &Hypergraph3, x: &VertexSet, y: &VertexSet, z: &VertexSet) -> Result<DensityReport> {
    same_n(h, x.n())?;
    same_n(h, y.n())?;
    same_n(h, z.n())?;
    let (a, b, c) = (x.len() as u64, y.len() as u64, z.len() as u64);
    let xy = x.bits().and_count(y.bits()) as u64;
    let xz = x.bits().and_count(z.bits()) as u64;
    let yz = y.bits().and_count(z.bits()) as u64;
    let xyz = x.bits().and_count3(y.bits(), z.bits()) as u64;
    // inclusion-exclusion over the coincidences x=y, x=z, y=z
    let total = a * b * c + 2 * xyz - xy * c - xz * b - yz * a;
    let mut e = 0u64;
    for u in x.iter() {
        for v in y.iter() {
            if u != v {
                e += h.link(u, v).and_count(z.bits()) as u64;
            }
        }
    }
    Ok(DensityReport { e, total })
}

/// Result of a bounded search.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Verdict<W> {
    Found(W),
    /// Exhaustive search proved there is no witness.
    Absent,
    /// The node budget ran out first.
    Unknown,
}

impl<W> Verdict<W> {
    pub fn witness(&self) -> Option<&W> {
        match self {
            Verdict::Found(w) => Some(w),
            _ => None,
        }
    }

    pub fn is_absent(&self) -> bool {
        matches!(self, Verdict::Absent)
    }

    pub fn label(&self) -> &'static str {
        match self {
            Verdict::Found(_) => "found",
            Verdict::Absent => "none",
            Verdict::Unknown => "unknown",
        }
    }
}

#[derive(Clone, Debug)]
pub struct CliqueSearch {
    pub verdict: Verdict<Vec<usize>>,
    pub nodes: u64,
}

/// Searches for `K_k^{(3)}` in `h`.
///
/// Vertices are explored in descending degree, ties broken by index, so the
/// witness is reproducible. `node_limit = None` means unbounded.
pub fn find_clique(h: &Hypergraph3, k: usize, node_limit: Option<u64>) -> Result<CliqueSearch> {
    if k < 3 {
        return Err(Error::arg(format!("clique order must be at least 3, got {k}")));
    }
    if k > h.n() {
        return Ok(CliqueSearch { verdict: Verdict::Absent, nodes: 0 });
    }
    let mut order: Vec<(usize, usize)> = (0..h.n()).map(|v| (h.degree(v), v)).collect();
    order.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));
    let order: Vec<usize> = order.into_iter().map(|(_, v)| v).collect();

    let mut search = CliqueDfs { h, k, order: &order, nodes: 0, limit: node_limit.unwrap_or(u64::MAX), chosen: Vec::with_capacity(k) };
    let verdict = match search.run(Bits::full(h.n())) {
        Some(true) => Verdict::Found(search.chosen.clone()),
        Some(false) => Verdict::Absent,
        None => Verdict::Unknown,
    };
    Ok(CliqueSearch { verdict, nodes: search.nodes })
}

struct CliqueDfs<'a> {
    h: &'a Hypergraph3,
    k: usize,
    order: &'a [usize],
    nodes: u64,
    limit: u64,
    chosen: Vec<usize>,
}

impl CliqueDfs<'_> {
    /// `Some(true)` found (left in `chosen`), `Some(false)` exhausted, `None` out of budget.
    fn run(&mut self, mut cand: Bits) -> Option<bool> {
        if self.chosen.len() == self.k {
            return Some(true);
        }
        for &v in self.order {
            if self.chosen.len() + cand.count() < self.k {
                return Some(false);
            }
            if !cand.contains(v) {
                continue;
            }
            self.nodes += 1;
            if self.nodes > self.limit {
                return None;
            }
            cand.remove(v);
            let mut next = cand.clone();
            for &w in &self.chosen {
                next.intersect_with(self.h.link(w, v));
            }
            self.chosen.push(v);
            match self.run(next) {
                Some(true) => return Some(true),
                None => return None,
                Some(false) => {}
            }
            self.chosen.pop();
        }
        Some(false)
    }
}

/// Whether every triple of `vs` is an edge.
pub fn is_clique(h: &Hypergraph3, vs: &[usize]) -> bool {
    let mut sorted = vs.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    if sorted.len() != vs.len() {
        return false;
    }
    for (i, &a) in vs.iter().enumerate() {
        for (j, &b) in vs.iter().enumerate().skip(i + 1) {
            for &c in &vs[j + 1..] {
                if !h.contains(a, b, c) {
                    return false;
                }
            }
        }
    }
    true
}

/// Simple undirected graph with bitset adjacency.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Graph {
    adj: Vec<Bits>,
}

impl Graph {
    pub fn empty(n: usize) -> Self {
        Graph { adj: vec![Bits::new(n); n] }
    }

    pub fn n(&self) -> usize {
        self.adj.len()
    }

    pub fn add_edge(&mut self, u: usize, v: usize) -> Result<()> {
        let n = self.n();
        if u >= n || v >= n || u == v {
            return Err(Error::arg(format!("invalid graph edge ({u},{v}) for n = {n}")));
        }
        self.adj[u].insert(v);
        self.adj[v].insert(u);
        Ok(())
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        u < self.n() && self.adj[u].contains(v)
    }

    pub fn neighbours(&self, v: usize) -> &Bits {
        &self.adj[v]
    }
}

/// Number of triangles `(x,y,z) ∈ X×Y×Z` of the tripartite graph induced by
/// the three disjoint parts.
pub fn count_triangles_tripartite(g: &Graph, x: &VertexSet, y: &VertexSet, z: &VertexSet) -> Result<u64> {
    for part in [x, y, z] {
        if part.n() != g.n() {
            return Err(Error::dim(g.n(), part.n()));
        }
    }
    if !x.bits().is_disjoint(y.bits()) || !x.bits().is_disjoint(z.bits()) || !y.bits().is_disjoint(z.bits()) {
        return Err(Error::arg("tripartite parts must be disjoint"));
    }
    let mut count = 0u64;
    for u in x.iter() {
        let nu = g.neighbours(u);
        let zu = nu.intersection(z.bits());
        for v in nu.iter().filter(|&v| y.contains(v)) {
            count += zu.and_count(g.neighbours(v)) as u64;
        }
    }
    Ok(count)
}

/// Non-empty, non-comment lines with their 1-based line numbers.
pub(crate) fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines().enumerate().filter_map(|(i, raw)| {
        let line = raw.split('#').next().unwrap_or("").trim();
        (!line.is_empty()).then_some((i + 1, line))
    })
}

pub(crate) fn parse_usizes(ln: usize, line: &str) -> Result<Vec<usize>> {
    line.split_whitespace()
        .map(|tok| tok.parse::<usize>().map_err(|_| Error::parse(ln, format!("expected a nonnegative integer, found `{tok}`"))))
        .collect()
}

pub(crate) fn parse_header(ln: usize, line: &str, key: &str) -> Result<usize> {
    let mut toks = line.split_whitespace();
    match (toks.next(), toks.next(), toks.next()) {
        (Some(k), Some(v), None) if k == key => {
            v.parse().map_err(|_| Error::parse(ln, format!("invalid `{key}` value `{v}`")))
        }
        _ => Err(Error::parse(ln, format!("expected `{key} <value>` header"))),
    }
}
