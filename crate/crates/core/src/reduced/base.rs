use std::collections::{BTreeMap, HashSet};

use num_bigint::BigUint;
use num_traits::One;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{check_admissible, ReducedHypergraph, Selection};
use crate::error::{Error, Result};
use crate::scalar::{meets_power_bound, Scalar};
use crate::BigRational;

/// A set `X_j` of indices with its `(X_0, X_j)`-selection.
#[derive(Clone, Debug)]
pub struct BasePart {
    pub set: Vec<usize>,
    pub selection: Selection,
}

/// Lookup of `P^{xy}` for `x` on the `X_0` side.
pub(super) type Pick<'a> = &'a dyn Fn(usize, usize) -> usize;

pub(super) struct PartView<'a> {
    pub set: Vec<usize>,
    pub pick: Pick<'a>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BaseSelection {
    /// `P^{xx'}` for `x < x'` in `X_0`.
    pub vertices: BTreeMap<(usize, usize), usize>,
    /// `Y_j(𝒞)`, sorted.
    pub ys: Vec<Vec<usize>>,
    /// `X_j` was empty, so `Y_j = ∅` holds vacuously.
    pub vacuous: Vec<bool>,
}

#[derive(Clone, Debug)]
pub struct BaseOutcome {
    pub attempts: u32,
    /// `None` when every draw missed the size bound.
    pub selection: Option<BaseSelection>,
}

/// Draws `P^{xx'}` uniformly for every pair of `x0` and computes the sets `Y_j`.
pub(super) fn draw(
    h: &ReducedHypergraph,
    x0: &[usize],
    parts: &[PartView<'_>],
    rng: &mut ChaCha8Rng,
) -> (BTreeMap<(usize, usize), usize>, Vec<Vec<usize>>) {
    let mut xs = x0.to_vec();
    xs.sort_unstable();
    let mut vertices = BTreeMap::new();
    for (i, &x) in xs.iter().enumerate() {
        for &x2 in &xs[i + 1..] {
            vertices.insert((x, x2), rng.gen_range(0..h.class_size(x, x2)));
        }
    }
    let ys = parts
        .iter()
        .map(|part| {
            let mut y: Vec<usize> = part
                .set
                .iter()
                .copied()
                .filter(|&y| {
                    vertices.iter().all(|(&(x, x2), &p)| h.contains_edge(x, x2, y, p, (part.pick)(x, y), (part.pick)(x2, y)))
                })
                .collect();
            y.sort_unstable();
            y
        })
        .collect();
    (vertices, ys)
}

/// Repeated independent draws until every `|Y_j| ≥ (ε/2)^{C(m,2)}|X_j|`.
pub(super) fn sample(
    h: &ReducedHypergraph,
    x0: &[usize],
    parts: &[PartView<'_>],
    half_eps: &BigRational,
    rng: &mut ChaCha8Rng,
    retries: u32,
) -> BaseOutcome {
    let m = x0.len() as u64;
    let exponent = BigUint::from(m * (m - 1) / 2);
    for attempt in 1..=retries {
        let (vertices, ys) = draw(h, x0, parts, rng);
        let ok = ys.iter().zip(parts).all(|(y, p)| meets_power_bound(y.len(), p.set.len(), half_eps, &exponent));
        if ok {
            let vacuous = parts.iter().map(|p| p.set.is_empty()).collect();
            return BaseOutcome { attempts: attempt, selection: Some(BaseSelection { vertices, ys, vacuous }) };
        }
    }
    BaseOutcome { attempts: retries, selection: None }
}

pub(super) fn check_disjoint<'a>(sets: impl IntoIterator<Item = &'a [usize]>) -> Result<()> {
    let mut seen = HashSet::new();
    for set in sets {
        for &i in set {
            if !seen.insert(i) {
                return Err(Error::arg(format!("index {i} appears twice among the sets")));
            }
        }
    }
    Ok(())
}

/// Checks that `part` carries a `d`-admissible `(x0, X_j)`-selection.
pub(super) fn check_part<S: Scalar>(h: &ReducedHypergraph, x0: &[usize], j: usize, part: &BasePart, d: &S) -> Result<()> {
    let same = |a: &[usize], b: &[usize]| {
        let a: HashSet<_> = a.iter().collect();
        let b: HashSet<_> = b.iter().collect();
        a == b
    };
    if !same(part.selection.xs(), x0) || !same(part.selection.ys(), &part.set) {
        return Err(Error::arg(format!("selection {j} is not over (X_0, X_{j})")));
    }
    if let Some(&(x, x2, y)) = check_admissible(h, &part.selection, d)?.first() {
        let name = |i: usize| h.indices()[i].clone();
        return Err(Error::Precondition(format!(
            "selection {j} is not {d}-admissible at ({}, {}, {})",
            name(x),
            name(x2),
            name(y)
        )));
    }
    Ok(())
}

/// Admissibility level `(r−2)/(r−1) + ε`.
pub(super) fn level<S: Scalar>(r: usize, eps: &S) -> S {
    S::from_count(r as u64 - 2) / S::from_count(r as u64 - 1) + eps.clone()
}

pub(super) fn exact_eps<S: Scalar>(eps: &S) -> Result<BigRational> {
    eps.to_exact().ok_or_else(|| Error::arg(format!("epsilon {eps} has no exact value")))
}

/// The randomized base step: uniform `P^{xx'}` for all pairs of `X_0`,
/// retried until `|Y_j(𝒞)| ≥ (ε/2)^{C(m,2)}|X_j|` for every `j`.
///
/// `r − 1 = parts.len()`; the selections must be
/// `((r−2)/(r−1)+ε)`-admissible, otherwise a precondition error is returned.
pub fn sample_base_selection<S: Scalar>(
    h: &ReducedHypergraph,
    x0: &[usize],
    parts: &[BasePart],
    eps: &S,
    seed: u64,
    retries: u32,
) -> Result<BaseOutcome> {
    if x0.len() < 2 {
        return Err(Error::arg(format!("|X_0| = {} but at least 2 is needed", x0.len())));
    }
    if parts.is_empty() {
        return Err(Error::arg("at least one further set X_1 is needed (r >= 2)"));
    }
    if !(*eps > S::zero() && *eps <= S::one()) {
        return Err(Error::arg(format!("epsilon {eps} outside (0,1]")));
    }
    if retries == 0 {
        return Err(Error::arg("retries must be positive"));
    }
    if let Some(&bad) = x0.iter().chain(parts.iter().flat_map(|p| &p.set)).find(|&&i| i >= h.index_count()) {
        return Err(Error::arg(format!("index {bad} out of range")));
    }
    check_disjoint(std::iter::once(x0).chain(parts.iter().map(|p| p.set.as_slice())))?;
    let d = level(parts.len() + 1, eps);
    for (j, part) in parts.iter().enumerate() {
        check_part(h, x0, j + 1, part, &d)?;
    }
    let half_eps = exact_eps(eps)? / BigRational::from_integer(2.into());
    debug_assert!(half_eps < BigRational::one());
    let lookups: Vec<Box<dyn Fn(usize, usize) -> usize + '_>> = parts
        .iter()
        .map(|p| Box::new(move |x, y| p.selection.get(x, y).expect("validated")) as Box<dyn Fn(usize, usize) -> usize>)
        .collect();
    let views: Vec<PartView<'_>> =
        parts.iter().zip(&lookups).map(|(p, f)| PartView { set: p.set.clone(), pick: f.as_ref() }).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(sample(h, x0, &views, &half_eps, &mut rng, retries))
}
