//! Random edge colourings and the hypergraphs they induce through a palette.
//!
//! Given a colouring `φ` of the pairs of `V` and a palette `𝒫`, the induced
//! hypergraph has as edges the triples whose three pair colours form a
//! pattern of `𝒫`. For a uniformly random `φ` these hypergraphs are dense in
//! the pair-of-pairs sense with `d` equal to the palette's codegree density;
//! [`audit_density`] measures that empirically on chosen pair-set families.

use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::hypercore::{content_lines, count_boxtimes, DensityReport, Hypergraph3, PairSet, VertexSet};
use crate::palette::{Colour, Palette, MAX_COLOURS};
use crate::scalar::Scalar;
use crate::Ratio;

/// Colouring of the unordered pairs of `0..n` with colours `1..=ℓ`.
#[derive(Clone, PartialEq, Eq)]
pub struct EdgeColouring {
    n: usize,
    colours: usize,
    // full symmetric matrix, diagonal 0
    matrix: Vec<Colour>,
}

impl EdgeColouring {
    /// Colouring with every pair set to colour 1.
    pub fn constant(n: usize, colours: usize) -> Result<Self> {
        check_colours(colours)?;
        let mut matrix = vec![1; n * n];
        for v in 0..n {
            matrix[v * n + v] = 0;
        }
        Ok(EdgeColouring { n, colours, matrix })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn colour_count(&self) -> usize {
        self.colours
    }

    /// `φ(x,y)`; symmetric, 0 on the diagonal.
    #[inline]
    pub fn colour(&self, x: usize, y: usize) -> Colour {
        self.matrix[x * self.n + y]
    }

    pub fn set(&mut self, x: usize, y: usize, c: Colour) -> Result<()> {
        if x >= self.n || y >= self.n || x == y {
            return Err(Error::arg(format!("invalid pair ({x},{y}) for n = {}", self.n)));
        }
        if c == 0 || c as usize > self.colours {
            return Err(Error::arg(format!("colour {c} outside 1..={}", self.colours)));
        }
        self.matrix[x * self.n + y] = c;
        self.matrix[y * self.n + x] = c;
        Ok(())
    }

    /// Number of unordered pairs of each colour, indexed by `colour - 1`.
    pub fn class_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.colours];
        for x in 0..self.n {
            for y in x + 1..self.n {
                sizes[self.colour(x, y) as usize - 1] += 1;
            }
        }
        sizes
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = content_lines(text);
        let (ln, header) = lines.next().ok_or_else(|| Error::parse(1, "missing `vertices <n> colors <ℓ>` header"))?;
        let toks: Vec<&str> = header.split_whitespace().collect();
        let (n, colours) = match toks[..] {
            ["vertices", n, "colors", l] => (
                n.parse::<usize>().map_err(|_| Error::parse(ln, format!("invalid vertex count `{n}`")))?,
                l.parse::<usize>().map_err(|_| Error::parse(ln, format!("invalid colour count `{l}`")))?,
            ),
            _ => return Err(Error::parse(ln, "expected `vertices <n> colors <ℓ>` header")),
        };
        let mut phi = EdgeColouring::constant(n, colours).map_err(|e| Error::parse(ln, e))?;
        let mut seen = vec![false; n * n];
        let mut assigned = 0usize;
        for (ln, line) in lines {
            let nums = crate::hypercore::parse_usizes(ln, line)?;
            let [x, y, c] = nums[..] else {
                return Err(Error::parse(ln, format!("expected `x y c`, found {} fields", nums.len())));
            };
            if !(x < y && y < n) {
                return Err(Error::parse(ln, format!("pair must satisfy x < y < {n}")));
            }
            if c == 0 || c > colours {
                return Err(Error::parse(ln, format!("colour {c} outside 1..={colours}")));
            }
            if std::mem::replace(&mut seen[x * n + y], true) {
                return Err(Error::parse(ln, format!("pair ({x},{y}) coloured twice")));
            }
            phi.set(x, y, c as Colour).map_err(|e| Error::parse(ln, e))?;
            assigned += 1;
        }
        let expected = n * n.saturating_sub(1) / 2;
        if assigned != expected {
            return Err(Error::parse(0, format!("colouring covers {assigned} of {expected} pairs")));
        }
        Ok(phi)
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("vertices {} colors {}\n", self.n, self.colours);
        for x in 0..self.n {
            for y in x + 1..self.n {
                let _ = writeln!(out, "{x} {y} {}", self.colour(x, y));
            }
        }
        out
    }
}

impl std::fmt::Debug for EdgeColouring {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("EdgeColouring").field("n", &self.n).field("colours", &self.colours).finish()
    }
}

fn check_colours(colours: usize) -> Result<()> {
    if colours == 0 || colours > MAX_COLOURS {
        return Err(Error::arg(format!("colour count must be in 1..={MAX_COLOURS}, got {colours}")));
    }
    Ok(())
}

/// Colours every pair independently and uniformly; a pure function of the seed.
pub fn random_colouring(n: usize, colours: usize, seed: u64) -> Result<EdgeColouring> {
    if n < 2 {
        return Err(Error::arg(format!("random colouring needs n >= 2, got {n}")));
    }
    let mut phi = EdgeColouring::constant(n, colours)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for x in 0..n {
        for y in x + 1..n {
            let c = rng.gen_range(1..=colours as Colour);
            phi.matrix[x * n + y] = c;
            phi.matrix[y * n + x] = c;
        }
    }
    Ok(phi)
}

/// The hypergraph of triples whose colour pattern lies in the palette.
pub fn build_hypergraph(phi: &EdgeColouring, palette: &Palette) -> Result<Hypergraph3> {
    if phi.colour_count() != palette.colour_count() {
        return Err(Error::arg(format!(
            "colouring uses {} colours but palette is over {}",
            phi.colour_count(),
            palette.colour_count()
        )));
    }
    let n = phi.n();
    let mut h = Hypergraph3::empty(n);
    for x in 0..n {
        for y in x + 1..n {
            let cxy = phi.colour(x, y);
            for z in y + 1..n {
                if palette.allows(cxy, phi.colour(x, z), phi.colour(y, z)) {
                    h.insert_new_unchecked(x, y, z);
                }
            }
        }
    }
    Ok(h)
}

/// Ordered pairs `(x,y)`, both orientations, with `φ(x,y) = c`.
pub fn colour_class_pairs(phi: &EdgeColouring, c: Colour) -> Result<PairSet> {
    if c == 0 || c as usize > phi.colour_count() {
        return Err(Error::arg(format!("colour {c} outside 1..={}", phi.colour_count())));
    }
    let mut p = PairSet::empty(phi.n());
    for x in 0..phi.n() {
        for y in 0..phi.n() {
            if x != y && phi.colour(x, y) == c {
                p.insert(x, y)?;
            }
        }
    }
    Ok(p)
}

#[derive(Clone, Debug, PartialEq)]
pub struct RandomPairFamilies {
    /// Inclusion probabilities, each in `(0,1]`.
    pub densities: Vec<f64>,
    pub trials: usize,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ProductFamilies {
    pub trials: usize,
    pub seed: u64,
}

/// Which pair-set families to test and with which tolerance `η`.
#[derive(Clone, Debug, PartialEq)]
pub struct AuditSpec<S: Scalar = f64> {
    /// `P = class(c)`, `Q = class(c')` for all ordered colour pairs.
    pub colour_classes: bool,
    pub random_pairs: Option<RandomPairFamilies>,
    /// `P = X×Y`, `Q = X×Z` for random vertex subsets.
    pub products: Option<ProductFamilies>,
    pub eta: S,
}

impl<S: Scalar> AuditSpec<S> {
    pub fn colour_classes_only(eta: S) -> Self {
        AuditSpec { colour_classes: true, random_pairs: None, products: None, eta }
    }

    fn validate(&self) -> Result<()> {
        if let Some(r) = &self.random_pairs {
            if r.trials == 0 {
                return Err(Error::arg("random pair families need at least one trial"));
            }
            if let Some(rho) = r.densities.iter().find(|&&rho| !(rho > 0.0 && rho <= 1.0)) {
                return Err(Error::arg(format!("pair density {rho} outside (0,1]")));
            }
        }
        if let Some(p) = &self.products {
            if p.trials == 0 {
                return Err(Error::arg("product families need at least one trial"));
            }
        }
        if self.eta < S::zero() {
            return Err(Error::arg("eta must be nonnegative"));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FamilyResult<S: Scalar = f64> {
    pub label: String,
    pub report: DensityReport,
    /// `e − d·total + η·n³`.
    pub margin: S,
    pub holds: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct AuditReport<S: Scalar = f64> {
    /// The palette's codegree density, used as `d`.
    pub d: Ratio,
    pub eta: S,
    pub families: Vec<FamilyResult<S>>,
    /// Families skipped because they had no candidate pairs of pairs.
    pub skipped: Vec<String>,
}

impl<S: Scalar> AuditReport<S> {
    /// Smallest observed ratio and the family attaining it (first on ties).
    pub fn min_ratio(&self) -> Option<(Ratio, &str)> {
        let mut best: Option<(Ratio, &str)> = None;
        for f in &self.families {
            if let Some(r) = f.report.ratio() {
                if best.is_none_or(|(b, _)| r < b) {
                    best = Some((r, f.label.as_str()));
                }
            }
        }
        best
    }

    /// Whether every tested family satisfied the density inequality.
    pub fn all_hold(&self) -> bool {
        self.families.iter().all(|f| f.holds)
    }
}

/// Measures `e_⋈(P,Q)` against `d·|𝒦_⋈(P,Q)| − η n³` on the requested families.
pub fn audit_density<S: Scalar>(
    h: &Hypergraph3,
    phi: &EdgeColouring,
    palette: &Palette,
    spec: &AuditSpec<S>,
) -> Result<AuditReport<S>> {
    spec.validate()?;
    if h.n() != phi.n() {
        return Err(Error::dim(h.n(), phi.n()));
    }
    if phi.colour_count() != palette.colour_count() {
        return Err(Error::arg("colouring and palette disagree on the colour count"));
    }
    let n = h.n();
    let d = palette.min_codegree();
    let d_s = S::from_ratio(d);
    let mut report = AuditReport { d, eta: spec.eta.clone(), families: Vec::new(), skipped: Vec::new() };
    let mut record = |label: String, p: &PairSet, q: &PairSet| -> Result<()> {
        let r = count_boxtimes(h, p, q)?;
        if r.total == 0 {
            report.skipped.push(label);
            return Ok(());
        }
        let margin = r.margin(&d_s, &spec.eta, n);
        let holds = margin >= S::zero();
        report.families.push(FamilyResult { label, report: r, margin, holds });
        Ok(())
    };

    if spec.colour_classes {
        let classes: Vec<PairSet> = (1..=phi.colour_count() as Colour)
            .map(|c| colour_class_pairs(phi, c))
            .collect::<Result<_>>()?;
        for (i, p) in classes.iter().enumerate() {
            for (j, q) in classes.iter().enumerate() {
                record(format!("colour({},{})", i + 1, j + 1), p, q)?;
            }
        }
    }
    if let Some(rp) = &spec.random_pairs {
        let mut rng = ChaCha8Rng::seed_from_u64(rp.seed);
        for &rho in &rp.densities {
            for t in 0..rp.trials {
                let p = random_pair_set(n, rho, &mut rng);
                let q = random_pair_set(n, rho, &mut rng);
                record(format!("random(rho={rho},trial={t})"), &p, &q)?;
            }
        }
    }
    if let Some(pf) = &spec.products {
        let mut rng = ChaCha8Rng::seed_from_u64(pf.seed);
        for t in 0..pf.trials {
            let x = random_subset(n, 0.5, &mut rng);
            let y = random_subset(n, 0.5, &mut rng);
            let z = random_subset(n, 0.5, &mut rng);
            record(format!("product(trial={t})"), &PairSet::product(&x, &y)?, &PairSet::product(&x, &z)?)?;
        }
    }
    Ok(report)
}

fn random_pair_set(n: usize, rho: f64, rng: &mut impl Rng) -> PairSet {
    let mut p = PairSet::empty(n);
    for x in 0..n {
        for y in 0..n {
            if x != y && rng.gen_bool(rho) {
                let _ = p.insert(x, y);
            }
        }
    }
    p
}

fn random_subset(n: usize, rho: f64, rng: &mut impl Rng) -> VertexSet {
    let vs: Vec<usize> = (0..n).filter(|_| rng.gen_bool(rho)).collect();
    VertexSet::from_vertices(n, vs).expect("in range")
}
