//! Exact search for edge colourings of `K_k` whose triangles all carry a
//! pattern from a palette.
//!
//! An infeasible verdict certifies that every hypergraph induced by the
//! palette is `K_k^{(3)}`-free, which turns the palette's codegree density
//! into a lower bound (see [`lower_bound_report`]).
//!
//! Edges are coloured vertex by vertex: all edges `(u, v)` with `u < v` are
//! fixed before vertex `v + 1` is touched, so every assignment closes
//! triangles only with edges that are already coloured. On top of that the
//! search keeps, for the vertex currently being attached, the set of colours
//! still possible on each of its remaining edges (forward checking).
//!
//! Colour symmetry is broken with respect to the automorphism group `G` of
//! the palette only. At every edge, the colours already used are fixed by a
//! subgroup `H ≤ G`; trying one colour per `H`-orbit loses nothing because
//! the palette is invariant under `H` and `H` fixes the assignment so far.
//! For the full symmetric group this is first-use order; for the cyclic
//! palette it only pins the very first colour.

use std::sync::atomic::{AtomicBool, AtomicU64, Ordering};
use std::sync::Mutex;
use std::time::{Duration, Instant};

use crate::construct::EdgeColouring;
use crate::error::{Error, Result};
use crate::palette::{Colour, Palette};
use crate::Ratio;

/// Largest clique order the search accepts.
pub const MAX_K: usize = 24;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SearchBudget {
    pub node_limit: Option<u64>,
    pub time_limit: Option<Duration>,
    pub symmetry_breaking: bool,
    /// Worker threads; 1 gives the sequential, reproducible search.
    pub threads: usize,
}

impl Default for SearchBudget {
    fn default() -> Self {
        SearchBudget {
            node_limit: Some(1_000_000_000),
            time_limit: Some(Duration::from_secs(600)),
            symmetry_breaking: true,
            threads: 1,
        }
    }
}

impl SearchBudget {
    pub fn unlimited() -> Self {
        SearchBudget { node_limit: None, time_limit: None, ..SearchBudget::default() }
    }

    fn validate(&self) -> Result<()> {
        if self.node_limit == Some(0) || self.time_limit == Some(Duration::ZERO) || self.threads == 0 {
            return Err(Error::arg("search limits and thread count must be positive"));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ColouringVerdict {
    Feasible(EdgeColouring),
    Infeasible,
    Unknown,
}

impl ColouringVerdict {
    pub fn label(&self) -> &'static str {
        match self {
            ColouringVerdict::Feasible(_) => "feasible",
            ColouringVerdict::Infeasible => "infeasible",
            ColouringVerdict::Unknown => "unknown",
        }
    }
}

#[derive(Clone, Debug)]
pub struct SearchOutcome {
    pub verdict: ColouringVerdict,
    pub nodes_explored: u64,
    pub elapsed: Duration,
}

/// First triangle (as `a < b < c`) whose pattern is not in the palette.
pub fn find_bad_triangle(phi: &EdgeColouring, palette: &Palette) -> Option<[usize; 3]> {
    let k = phi.n();
    for a in 0..k {
        for b in a + 1..k {
            for c in b + 1..k {
                if !palette.allows(phi.colour(a, b), phi.colour(a, c), phi.colour(b, c)) {
                    return Some([a, b, c]);
                }
            }
        }
    }
    None
}

struct Problem {
    k: usize,
    colours: usize,
    all: u64,
    /// `third[(a-1)*ℓ + (b-1)]`: bitmask (bit `c-1`) of colours `c` with `{a,b,c}` allowed.
    third: Vec<u64>,
    /// Per used-colour mask: the colours worth trying (one per orbit).
    orbit_reps: Option<Vec<u64>>,
    edges: Vec<(usize, usize)>,
}

impl Problem {
    fn new(palette: &Palette, k: usize, symmetry: bool) -> Self {
        let l = palette.colour_count();
        let all = if l == 64 { u64::MAX } else { (1u64 << l) - 1 };
        let mut third = vec![0u64; l * l];
        for a in 1..=l {
            for b in 1..=l {
                for c in 1..=l {
                    if palette.allows(a as Colour, b as Colour, c as Colour) {
                        third[(a - 1) * l + (b - 1)] |= 1 << (c - 1);
                    }
                }
            }
        }
        let orbit_reps = if symmetry { palette.automorphisms().map(|g| orbit_table(&g, l)) } else { None };
        let edges = (1..k).flat_map(|v| (0..v).map(move |u| (u, v))).collect();
        Problem { k, colours: l, all, third, orbit_reps, edges }
    }

    #[inline]
    fn candidates(&self, used: u64) -> u64 {
        match &self.orbit_reps {
            Some(t) => t[used as usize],
            None => self.all,
        }
    }
}

/// For each mask of used colours, the colours that are minimal in their
/// orbit under the automorphisms fixing every used colour.
fn orbit_table(group: &[Vec<Colour>], l: usize) -> Vec<u64> {
    (0..1u64 << l)
        .map(|used| {
            let stab: Vec<&Vec<Colour>> = group
                .iter()
                .filter(|g| (0..l).all(|c| used >> c & 1 == 0 || g[c] as usize == c))
                .collect();
            let mut reps = 0u64;
            for c in 0..l {
                if stab.iter().all(|g| g[c] as usize >= c) {
                    reps |= 1 << c;
                }
            }
            reps
        })
        .collect()
}

#[derive(Clone)]
struct State {
    col: Vec<Colour>,
    /// Remaining colours for edges `(u, v)` of the vertex `v` being attached.
    dom: Vec<u64>,
    used: u64,
    edge: usize,
}

enum Flow {
    Found(Vec<Colour>),
    Exhausted,
    OutOfBudget,
}

struct Shared<'a> {
    nodes: &'a AtomicU64,
    stop: &'a AtomicBool,
    node_limit: u64,
    deadline: Option<Instant>,
}

struct Worker<'a> {
    p: &'a Problem,
    shared: &'a Shared<'a>,
    local: u64,
}

const FLUSH: u64 = 1 << 14;

impl Worker<'_> {
    fn tick(&mut self) -> bool {
        self.local += 1;
        if self.local == FLUSH {
            let total = self.shared.nodes.fetch_add(self.local, Ordering::Relaxed) + self.local;
            self.local = 0;
            if total > self.shared.node_limit
                || self.shared.stop.load(Ordering::Relaxed)
                || self.shared.deadline.is_some_and(|d| Instant::now() >= d)
            {
                return false;
            }
        }
        true
    }

    fn flush(&mut self) -> bool {
        let total = self.shared.nodes.fetch_add(self.local, Ordering::Relaxed) + self.local;
        self.local = 0;
        total <= self.shared.node_limit
    }

    fn dfs(&mut self, s: State) -> Flow {
        if s.edge == self.p.edges.len() {
            return Flow::Found(s.col);
        }
        let p = self.p;
        let mut out_of_budget = false;
        let found = expand(p, &s, |child| {
            if !self.tick() {
                out_of_budget = true;
                return Some(Flow::OutOfBudget);
            }
            match child {
                Child::Pruned => None,
                Child::State(c) => match self.dfs(c) {
                    Flow::Exhausted => None,
                    other => Some(other),
                },
            }
        });
        match found {
            Some(flow) => flow,
            None if out_of_budget => Flow::OutOfBudget,
            None => Flow::Exhausted,
        }
    }
}

enum Child {
    /// The colour emptied some remaining edge's domain.
    Pruned,
    State(State),
}

/// Feeds every candidate colour of the next edge, in increasing order, to
/// `f`; stops at the first `Some`.
fn expand(p: &Problem, s: &State, mut f: impl FnMut(Child) -> Option<Flow>) -> Option<Flow> {
    let k = p.k;
    let (u, v) = p.edges[s.edge];
    let mut dom = s.dom.clone();
    if u == 0 {
        dom.iter_mut().take(v).for_each(|d| *d = p.all);
    }
    let mut cands = dom[u] & p.candidates(s.used);
    while cands != 0 {
        let c = cands.trailing_zeros() as usize + 1;
        cands &= cands - 1;
        let mut next_dom = dom.clone();
        next_dom[u] = 1 << (c - 1);
        let mut dead = false;
        for w in u + 1..v {
            let a = s.col[u * k + w] as usize;
            next_dom[w] &= p.third[(a - 1) * p.colours + (c - 1)];
            if next_dom[w] == 0 {
                dead = true;
                break;
            }
        }
        let child = if dead {
            Child::Pruned
        } else {
            let mut col = s.col.clone();
            col[u * k + v] = c as Colour;
            col[v * k + u] = c as Colour;
            Child::State(State { col, dom: next_dom, used: s.used | 1 << (c - 1), edge: s.edge + 1 })
        };
        if let Some(flow) = f(child) {
            return Some(flow);
        }
    }
    None
}

fn root_state(k: usize) -> State {
    State { col: vec![0; k * k], dom: vec![0; k], used: 0, edge: 0 }
}

fn to_colouring(col: &[Colour], k: usize, colours: usize) -> EdgeColouring {
    let mut phi = EdgeColouring::constant(k, colours).expect("valid dims");
    for u in 0..k {
        for v in u + 1..k {
            phi.set(u, v, col[u * k + v]).expect("complete witness");
        }
    }
    phi
}

/// Decides whether `K_k` has an edge colouring with every triangle pattern in `palette`.
pub fn search_palette_colouring(palette: &Palette, k: usize, budget: &SearchBudget) -> Result<SearchOutcome> {
    if k < 3 {
        return Err(Error::arg(format!("clique order must be at least 3, got {k}")));
    }
    if k > MAX_K {
        return Err(Error::arg(format!("clique order {k} exceeds supported maximum {MAX_K}")));
    }
    budget.validate()?;
    let start = Instant::now();
    let problem = Problem::new(palette, k, budget.symmetry_breaking);
    let nodes = AtomicU64::new(0);
    let stop = AtomicBool::new(false);
    let shared = Shared {
        nodes: &nodes,
        stop: &stop,
        node_limit: budget.node_limit.unwrap_or(u64::MAX),
        deadline: budget.time_limit.map(|t| start + t),
    };

    let flow = if budget.threads <= 1 {
        let mut w = Worker { p: &problem, shared: &shared, local: 0 };
        let flow = w.dfs(root_state(k));
        let within = w.flush();
        match flow {
            Flow::Exhausted if !within => Flow::OutOfBudget,
            f => f,
        }
    } else {
        parallel_search(&problem, &shared, budget.threads)
    };

    let verdict = match flow {
        Flow::Found(col) => ColouringVerdict::Feasible(to_colouring(&col, k, palette.colour_count())),
        Flow::Exhausted => ColouringVerdict::Infeasible,
        Flow::OutOfBudget => ColouringVerdict::Unknown,
    };
    if let ColouringVerdict::Feasible(phi) = &verdict {
        debug_assert!(find_bad_triangle(phi, palette).is_none());
    }
    Ok(SearchOutcome { verdict, nodes_explored: nodes.load(Ordering::Relaxed), elapsed: start.elapsed() })
}

/// Splits the tree at a frontier of partial states and hands those out to
/// workers. Infeasible only if every subtree is exhausted.
fn parallel_search(p: &Problem, shared: &Shared<'_>, threads: usize) -> Flow {
    let mut frontier = vec![root_state(p.k)];
    let target = threads * 8;
    while frontier.len() < target {
        if frontier.iter().any(|s| s.edge == p.edges.len()) {
            break;
        }
        let mut next = Vec::new();
        for s in &frontier {
            expand(p, s, |child| {
                if let Child::State(c) = child {
                    next.push(c);
                }
                None
            });
        }
        if next.is_empty() {
            return Flow::Exhausted;
        }
        frontier = next;
    }
    if let Some(done) = frontier.iter().find(|s| s.edge == p.edges.len()) {
        return Flow::Found(done.col.clone());
    }

    let cursor = AtomicU64::new(0);
    let result: Mutex<Option<Flow>> = Mutex::new(None);
    let budget_hit = AtomicBool::new(false);
    std::thread::scope(|scope| {
        for _ in 0..threads {
            scope.spawn(|| {
                let mut w = Worker { p, shared, local: 0 };
                loop {
                    if shared.stop.load(Ordering::Relaxed) {
                        break;
                    }
                    let i = cursor.fetch_add(1, Ordering::Relaxed) as usize;
                    let Some(s) = frontier.get(i) else { break };
                    match w.dfs(s.clone()) {
                        Flow::Exhausted => {}
                        Flow::OutOfBudget => {
                            if !shared.stop.load(Ordering::Relaxed) {
                                budget_hit.store(true, Ordering::Relaxed);
                            }
                            break;
                        }
                        found @ Flow::Found(_) => {
                            let mut slot = result.lock().expect("poisoned");
                            if slot.is_none() {
                                *slot = Some(found);
                            }
                            shared.stop.store(true, Ordering::Relaxed);
                            break;
                        }
                    }
                }
                if !w.flush() {
                    budget_hit.store(true, Ordering::Relaxed);
                }
            });
        }
    });
    match result.into_inner().expect("poisoned") {
        Some(found) => found,
        None if budget_hit.load(Ordering::Relaxed) => Flow::OutOfBudget,
        None => Flow::Exhausted,
    }
}

/// A certified lower bound `π(K_k^{(3)}) ≥ d`, when the search proves
/// infeasibility.
#[derive(Clone, Debug)]
pub struct LowerBound {
    pub k: usize,
    pub outcome: SearchOutcome,
    pub bound: Option<Ratio>,
}

impl LowerBound {
    pub fn inconclusive(&self) -> bool {
        matches!(self.outcome.verdict, ColouringVerdict::Unknown)
    }
}

pub fn lower_bound_report(palette: &Palette, k: usize, budget: &SearchBudget) -> Result<LowerBound> {
    let outcome = search_palette_colouring(palette, k, budget)?;
    let bound = matches!(outcome.verdict, ColouringVerdict::Infeasible).then(|| palette.min_codegree());
    Ok(LowerBound { k, outcome, bound })
}
