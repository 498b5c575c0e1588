use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use num_bigint::BigUint;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::base::{check_disjoint, check_part, exact_eps, level, sample, BasePart, PartView, Pick};
use super::{Fortress, ReducedHypergraph};
use crate::error::{Error, Result};
use crate::scalar::{below, meets_power_bound, Scalar};
use crate::systems::{extract_subsystem, largest_subsystem, q_set, KMTree, Label, Seq};
use crate::BigRational;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Stage {
    /// The randomized selection of a height-1 call.
    Base,
    Part3Admissibility,
    Part3YSize,
    Part4Recursion,
    Part4WExtraction,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Stage::Base => "base selection",
            Stage::Part3Admissibility => "Part III admissibility",
            Stage::Part3YSize => "Part III Y0 size",
            Stage::Part4Recursion => "Part IV recursion",
            Stage::Part4WExtraction => "Part IV W extraction",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BuildFailure {
    pub stage: Stage,
    pub detail: String,
    /// The failure of the recursive call, for [`Stage::Part4Recursion`].
    pub cause: Option<Box<BuildFailure>>,
}

impl BuildFailure {
    fn new(stage: Stage, detail: impl Into<String>) -> Self {
        BuildFailure { stage, detail: detail.into(), cause: None }
    }

    /// The innermost failure.
    pub fn root(&self) -> &BuildFailure {
        self.cause.as_deref().map_or(self, BuildFailure::root)
    }
}

impl fmt::Display for BuildFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.stage, self.detail)?;
        if let Some(c) = &self.cause {
            write!(f, " <- {c}")?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct BuildParams<S: Scalar> {
    pub r: usize,
    pub k: usize,
    pub m: usize,
    pub eps: S,
    pub seed: u64,
    /// Draws allowed for every randomized selection.
    pub retries: u32,
}

impl<S: Scalar> BuildParams<S> {
    pub fn new(r: usize, k: usize, m: usize, eps: S, seed: u64) -> Self {
        BuildParams { r, k, m, eps, seed, retries: 64 }
    }
}

#[derive(Clone, Debug)]
pub struct FortressBuild {
    /// `Z_0`, a `[k, m]`-subsystem of the input system.
    pub system: KMTree,
    pub fortress: Fortress,
    /// `Y_j ⊆ X_j`, sorted.
    pub ys: Vec<Vec<usize>>,
    /// `|Y_j| ≥ (ε/2)^{eta_exponent}|X_j|`, with `η` recomputed from the arities used.
    pub eta_exponent: BigUint,
}

#[derive(Clone, Debug)]
pub enum BuildOutcome {
    Built(FortressBuild),
    Failed(BuildFailure),
}

struct Built {
    tree: KMTree,
    vertex: BTreeMap<(Seq, Seq, Seq), usize>,
    ys: Vec<Vec<usize>>,
    eta_exponent: BigUint,
}

struct Ctx<'a> {
    h: &'a ReducedHypergraph,
    leaf_pos: &'a BTreeMap<Seq, usize>,
    d: BigRational,
    half_eps: BigRational,
    m: usize,
    retries: u32,
    rng: ChaCha8Rng,
}

type Step<T> = std::result::Result<T, BuildFailure>;

fn in_q(tree: &KMTree, c: &Seq, d: &Seq) -> bool {
    d.len() == c.len() && (1..=c.len()).all(|i| d.at(i) != c.at(i) && tree.successors(&c.restrict(i - 1)).contains(d.at(i)))
}

fn key(x: usize, y: usize) -> (usize, usize) {
    (x.min(y), x.max(y))
}

impl Ctx<'_> {
    fn pos(&self, prefix: &Seq, z: &Seq) -> usize {
        self.leaf_pos[&prefix.concat(z)]
    }

    fn name(&self, i: usize) -> &Label {
        &self.h.indices()[i]
    }

    fn build(&mut self, prefix: &Seq, x0: &KMTree, parts: &[PartView<'_>]) -> Step<Built> {
        if x0.height() == 1 {
            self.base(prefix, x0, parts)
        } else {
            self.step(prefix, x0, parts)
        }
    }

    fn base(&mut self, prefix: &Seq, x0: &KMTree, parts: &[PartView<'_>]) -> Step<Built> {
        let leaves: Vec<Seq> = x0.leaves()[..self.m].to_vec();
        let pos: Vec<usize> = leaves.iter().map(|z| self.pos(prefix, z)).collect();
        let out = sample(self.h, &pos, parts, &self.half_eps, &mut self.rng, self.retries);
        let Some(sel) = out.selection else {
            return Err(BuildFailure::new(
                Stage::Base,
                format!("no draw in {} met the Y size bound below {prefix}", out.attempts),
            ));
        };
        let mut vertex = BTreeMap::new();
        for (i, a) in leaves.iter().enumerate() {
            for (j, b) in leaves.iter().enumerate().skip(i + 1) {
                vertex.insert((a.clone(), b.clone(), Seq::empty()), sel.vertices[&key(pos[i], pos[j])]);
            }
        }
        let m = self.m as u64;
        Ok(Built {
            tree: KMTree::from_leaves(1, self.m, leaves).expect("m leaves"),
            vertex,
            ys: sel.ys,
            eta_exponent: BigUint::from(m * (m - 1) / 2),
        })
    }

    /// Part III: `P_∅` across distinct first-level children, and the sets `Y⁰_j`.
    fn part3(
        &mut self,
        prefix: &Seq,
        sub: &BTreeMap<Label, KMTree>,
        parts: &[PartView<'_>],
        eta0: &BigUint,
    ) -> Step<(HashMap<(usize, usize), usize>, Vec<Vec<usize>>)> {
        let h = self.h;
        let groups: Vec<(Label, Vec<usize>)> = sub
            .iter()
            .map(|(a, t)| {
                let head = Seq::new(vec![a.clone()]);
                (a.clone(), t.leaves().iter().map(|z| self.pos(prefix, &head.concat(z))).collect())
            })
            .collect();
        let mut last = None;
        for _ in 0..self.retries {
            let mut p0 = HashMap::new();
            for (gi, (_, xs)) in groups.iter().enumerate() {
                for (_, ys) in &groups[gi + 1..] {
                    for &x in xs {
                        for &y in ys {
                            p0.insert(key(x, y), self.rng.gen_range(0..h.class_size(x, y)));
                        }
                    }
                }
            }
            // (i): every (X_0^a, X_0^b) selection is admissible
            let mut violation = None;
            'adm: for (ga, (_, xs)) in groups.iter().enumerate() {
                for (gb, (_, ys)) in groups.iter().enumerate() {
                    if ga == gb {
                        continue;
                    }
                    for (i, &x) in xs.iter().enumerate() {
                        for &x2 in &xs[i + 1..] {
                            let total = h.class_size(x, x2) as u64;
                            for &y in ys {
                                let deg = h.pair_degree(y, x, x2, p0[&key(x, y)], p0[&key(x2, y)]);
                                if below(deg as u64, &self.d, total) {
                                    violation = Some((x, x2, y));
                                    break 'adm;
                                }
                            }
                        }
                    }
                }
            }
            if let Some((x, x2, y)) = violation {
                last = Some(BuildFailure::new(
                    Stage::Part3Admissibility,
                    format!(
                        "pair ({}, {}) with {}: pair-degree below {} of the class",
                        self.name(x),
                        self.name(x2),
                        self.name(y),
                        self.d
                    ),
                ));
                continue;
            }
            // (ii): the sets Y⁰_j
            let mut y0 = Vec::with_capacity(parts.len());
            let mut short = None;
            for (j, part) in parts.iter().enumerate() {
                let keep: Vec<usize> = part
                    .set
                    .iter()
                    .copied()
                    .filter(|&y| {
                        p0.iter().all(|(&(x, x2), &p)| h.contains_edge(x, x2, y, p, (part.pick)(x, y), (part.pick)(x2, y)))
                    })
                    .collect();
                if !meets_power_bound(keep.len(), part.set.len(), &self.half_eps, eta0) {
                    short = Some(j + 1);
                }
                y0.push(keep);
            }
            if let Some(j) = short {
                last = Some(BuildFailure::new(
                    Stage::Part3YSize,
                    format!("|Y0_{j}| = {} is below eta_0 |X_{j}|", y0[j - 1].len()),
                ));
                continue;
            }
            return Ok((p0, y0));
        }
        let mut f = last.expect("retries is positive");
        f.detail = format!("{} (after {} draws, prefix {prefix})", f.detail, self.retries);
        Err(f)
    }

    fn step(&mut self, prefix: &Seq, x0: &KMTree, parts: &[PartView<'_>]) -> Step<Built> {
        let k = x0.height();
        let m = self.m;
        // Part II
        let a: Vec<Label> = x0.successors(&Seq::empty())[..m].to_vec();
        let mut z: BTreeMap<Label, KMTree> =
            a.iter().map(|l| (l.clone(), x0.subtree(l).expect("height at least 2"))).collect();
        let big_m = BigUint::from(x0.arity());
        let eta0 = BigUint::from(m * m) * num_traits::pow(big_m, 2 * (k - 1));
        // Part III
        let (p0, mut ys) = self.part3(prefix, &z, parts, &eta0)?;
        let pick0 = |x: usize, y: usize| p0[&key(x, y)];
        // Part IV
        let mut eta_exponent = eta0;
        let mut sub_fortresses: Vec<(Label, Label, BTreeMap<(Seq, Seq, Seq), usize>)> = Vec::new();
        let pairs: Vec<(Label, Label)> =
            a.iter().flat_map(|x| a.iter().filter(move |y| *y != x).map(move |y| (x.clone(), y.clone()))).collect();
        for (ah, bh) in pairs {
            let head_a = prefix.push(ah.clone());
            let head_b = prefix.push(bh.clone());
            let zb = z[&bh].clone();
            let b_pos: Vec<usize> = zb.leaves().iter().map(|w| self.pos(&head_b, w)).collect();
            let mut inner_parts = vec![PartView { set: b_pos.clone(), pick: &pick0 as Pick<'_> }];
            inner_parts.extend(ys.iter().zip(parts).map(|(y, p)| PartView { set: y.clone(), pick: p.pick }));
            let za = z[&ah].clone();
            let inner = self.build(&head_a, &za, &inner_parts).map_err(|f| BuildFailure {
                stage: Stage::Part4Recursion,
                detail: format!("pair ({ah}, {bh}) below {prefix}"),
                cause: Some(Box::new(f)),
            })?;
            z.insert(ah.clone(), inner.tree);
            sub_fortresses.push((ah.clone(), bh.clone(), inner.vertex));
            let mut inner_ys = inner.ys.into_iter();
            let w_pos: BTreeSet<usize> = inner_ys.next().expect("first part").into_iter().collect();
            ys = inner_ys.collect();
            eta_exponent += inner.eta_exponent;
            let w: BTreeSet<Seq> =
                zb.leaves().iter().zip(&b_pos).filter(|(_, p)| w_pos.contains(p)).map(|(l, _)| l.clone()).collect();
            let shrunk = Self::subsystem_in(&zb, &w, m).ok_or_else(|| {
                BuildFailure::new(
                    Stage::Part4WExtraction,
                    format!("W of size {} holds no [{}, {m}]-subsystem of {head_b}", w.len(), k - 1),
                )
            })?;
            z.insert(bh.clone(), shrunk);
            for c in &a {
                if *c != ah && *c != bh && z[c].arity() > m {
                    let t = z[c].trim(m).expect("arity above m");
                    z.insert(c.clone(), t);
                }
            }
        }
        // Part V
        let mut vertex = BTreeMap::new();
        for (i, x) in a.iter().enumerate() {
            for y in &a[i + 1..] {
                let (hx, hy) = (Seq::new(vec![x.clone()]), Seq::new(vec![y.clone()]));
                for zx in z[x].leaves() {
                    for zy in z[y].leaves() {
                        let (lx, ly) = (hx.concat(zx), hy.concat(zy));
                        let v = pick0(self.leaf_pos[&prefix.concat(&lx)], self.leaf_pos[&prefix.concat(&ly)]);
                        vertex.insert((lx, ly, Seq::empty()), v);
                    }
                }
            }
        }
        for (ai, bi, f) in sub_fortresses {
            let t = &z[&ai];
            let (ha, hb) = (Seq::new(vec![ai.clone()]), Seq::new(vec![bi.clone()]));
            for ((x, y, d), v) in f {
                if t.contains(&x) && t.contains(&y) && in_q(t, &x.wedge(&y), &d) {
                    vertex.insert((ha.concat(&x), ha.concat(&y), hb.concat(&d)), v);
                }
            }
        }
        let tree = KMTree::graft(a.iter().map(|l| (l.clone(), z[l].clone())).collect()).expect("uniform arity m");
        Ok(Built { tree, vertex, ys, eta_exponent })
    }

    /// An arity-`m` subsystem of `tree` inside `w`: the guaranteed extraction
    /// first, the largest one otherwise, trimmed to `m`.
    fn subsystem_in(tree: &KMTree, w: &BTreeSet<Seq>, m: usize) -> Option<KMTree> {
        if w.is_empty() {
            return None;
        }
        let eps = BigRational::new(w.len().into(), tree.leaves().len().into());
        let found = match extract_subsystem(tree, w, eps) {
            Ok(ex) if ex.m >= m => Some(ex),
            _ => largest_subsystem(tree, w).filter(|ex| ex.m >= m),
        }?;
        Some(if found.m > m { found.tree.trim(m).expect("m below arity") } else { found.tree })
    }
}

/// Runs the inductive construction on the `[k, M']`-system `system`, whose
/// leaves name indices of `h` through `leaf_index`.
///
/// `parts` holds `X_1, …, X_{r−k}` with their selections, which must be
/// `((r−2)/(r−1)+ε)`-admissible. `M' ≥ m` is all that is required of the
/// arity; failures name the stage at which a random or extraction step ran
/// out of budget.
pub fn build_fortress<S: Scalar>(
    h: &ReducedHypergraph,
    system: &KMTree,
    leaf_index: &BTreeMap<Seq, usize>,
    parts: &[BasePart],
    params: &BuildParams<S>,
) -> Result<BuildOutcome> {
    let BuildParams { r, k, m, ref eps, seed, retries } = *params;
    if r < 2 || m < 2 || k < 1 || k > r {
        return Err(Error::arg(format!("need r >= 2, m >= 2 and 1 <= k <= r, got r = {r}, k = {k}, m = {m}")));
    }
    if system.height() != k {
        return Err(Error::arg(format!("system has height {}, expected k = {k}", system.height())));
    }
    if system.arity() < m {
        return Err(Error::arg(format!("system arity {} is below m = {m}", system.arity())));
    }
    if parts.len() != r - k {
        return Err(Error::arg(format!("{} further sets given, expected r - k = {}", parts.len(), r - k)));
    }
    if !(*eps > S::zero() && *eps < S::one()) {
        return Err(Error::arg(format!("epsilon {eps} outside (0,1)")));
    }
    if retries == 0 {
        return Err(Error::arg("retries must be positive"));
    }
    if system.leaves().iter().any(|l| !leaf_index.contains_key(l)) {
        return Err(Error::arg("every leaf needs an index"));
    }
    let x0: Vec<usize> = system.leaves().iter().map(|l| leaf_index[l]).collect();
    if let Some(&bad) = x0.iter().chain(parts.iter().flat_map(|p| &p.set)).find(|&&i| i >= h.index_count()) {
        return Err(Error::arg(format!("index {bad} out of range")));
    }
    check_disjoint(std::iter::once(x0.as_slice()).chain(parts.iter().map(|p| p.set.as_slice())))?;
    let d = level(r, eps);
    for (j, part) in parts.iter().enumerate() {
        check_part(h, &x0, j + 1, part, &d)?;
    }
    let exact = exact_eps(eps)?;
    let d_exact = BigRational::new(((r - 2) as u64).into(), ((r - 1) as u64).into()) + &exact;
    let lookups: Vec<Box<dyn Fn(usize, usize) -> usize + '_>> = parts
        .iter()
        .map(|p| Box::new(move |x, y| p.selection.get(x, y).expect("validated")) as Box<dyn Fn(usize, usize) -> usize>)
        .collect();
    let views: Vec<PartView<'_>> =
        parts.iter().zip(&lookups).map(|(p, f)| PartView { set: p.set.clone(), pick: f.as_ref() }).collect();
    let mut ctx = Ctx {
        h,
        leaf_pos: leaf_index,
        d: d_exact,
        half_eps: exact / BigRational::from_integer(2.into()),
        m,
        retries,
        rng: ChaCha8Rng::seed_from_u64(seed),
    };
    let built = match ctx.build(&Seq::empty(), system, &views) {
        Ok(b) => b,
        Err(f) => return Ok(BuildOutcome::Failed(f)),
    };
    let index = built.tree.leaves().iter().map(|l| (l.clone(), h.indices()[leaf_index[l]].clone())).collect();
    let mut fortress = Fortress::new(built.tree.clone(), index)?;
    for ((x, y, dd), v) in &built.vertex {
        fortress.set(x, y, dd, *v)?;
    }
    Ok(BuildOutcome::Built(FortressBuild {
        system: built.tree,
        fortress,
        ys: built.ys,
        eta_exponent: built.eta_exponent,
    }))
}

/// `(z, z', d, y)` with `{P^{zz'}_d, P^{zy}, P^{z'y}}` missing from the constituent.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GoalViolation {
    pub z: Seq,
    pub z2: Seq,
    pub d: Seq,
    pub y: usize,
}

/// Checks that every `y ∈ Y_j` completes every fortress vertex with the
/// selection vertices of `parts[j]`.
pub fn check_goal(
    h: &ReducedHypergraph,
    fortress: &Fortress,
    parts: &[BasePart],
    ys: &[Vec<usize>],
) -> Result<Vec<GoalViolation>> {
    if ys.len() != parts.len() {
        return Err(Error::dim(parts.len(), ys.len()));
    }
    let pos = |l: &Seq| -> Result<usize> {
        let name = fortress.index_of(l).ok_or_else(|| Error::arg(format!("{l} is not a leaf")))?;
        h.position(name).ok_or_else(|| Error::Structural(format!("unknown index {name}")))
    };
    let mut bad = Vec::new();
    let mut qs: HashMap<Seq, Vec<Seq>> = HashMap::new();
    let leaves = fortress.tree().leaves();
    for (i, z) in leaves.iter().enumerate() {
        for z2 in &leaves[i + 1..] {
            let w = z.wedge(z2);
            let q = qs.entry(w.clone()).or_insert_with(|| q_set(fortress.tree(), &w).expect("wedge is a node"));
            let (pz, pz2) = (pos(z)?, pos(z2)?);
            for d in q.iter() {
                let v = fortress
                    .get(z, z2, d)
                    .ok_or_else(|| Error::Structural(format!("no vertex for ({z}, {z2}, {d})")))?;
                for (part, y_set) in parts.iter().zip(ys) {
                    for &y in y_set {
                        let (Some(a), Some(b)) = (part.selection.get(pz, y), part.selection.get(pz2, y)) else {
                            return Err(Error::arg(format!("selection misses index {y}")));
                        };
                        if !h.contains_edge(pz, pz2, y, v, a, b) {
                            bad.push(GoalViolation { z: z.clone(), z2: z2.clone(), d: d.clone(), y });
                        }
                    }
                }
            }
        }
    }
    Ok(bad)
}
