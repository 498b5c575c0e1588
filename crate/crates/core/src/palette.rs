//! Colour patterns and palettes.
//!
//! A pattern is a 3-element multiset of colours from `1..=ℓ`; a palette is
//! a set of patterns. The codegree density of a palette is the smallest
//! fraction of third colours `c''` that complete a colour pair `(c, c')`
//! (repeats allowed) to a pattern of the palette.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::hypercore::content_lines;
use crate::Ratio;

/// Colours are dense 1-based integers.
pub type Colour = u8;

/// Largest supported colour count.
pub const MAX_COLOURS: usize = 64;

/// A multiset of three colours, stored non-decreasing.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Pattern([Colour; 3]);

impl Pattern {
    pub fn new(a: Colour, b: Colour, c: Colour) -> Self {
        let mut v = [a, b, c];
        v.sort_unstable();
        Pattern(v)
    }

    pub fn colours(&self) -> [Colour; 3] {
        self.0
    }

    /// Number of distinct colours in the pattern.
    pub fn distinct(&self) -> usize {
        let [a, b, c] = self.0;
        1 + (a != b) as usize + (b != c) as usize
    }
}

impl fmt::Debug for Pattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let [a, b, c] = self.0;
        write!(f, "{{{a},{b},{c}}}")
    }
}

impl fmt::Display for Pattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let [a, b, c] = self.0;
        write!(f, "{a} {b} {c}")
    }
}

#[derive(Clone, PartialEq, Eq)]
pub struct Palette {
    colours: usize,
    patterns: BTreeSet<Pattern>,
    // membership table indexed by (a-1)*ℓ² + (b-1)*ℓ + (c-1), all orderings set
    table: Vec<bool>,
}

impl Palette {
    pub fn new(colours: usize, patterns: impl IntoIterator<Item = Pattern>) -> Result<Self> {
        if colours == 0 || colours > MAX_COLOURS {
            return Err(Error::arg(format!("colour count must be in 1..={MAX_COLOURS}, got {colours}")));
        }
        let mut p = Palette { colours, patterns: BTreeSet::new(), table: vec![false; colours.pow(3)] };
        for pat in patterns {
            p.insert(pat)?;
        }
        Ok(p)
    }

    pub fn empty(colours: usize) -> Result<Self> {
        Palette::new(colours, [])
    }

    /// Every multiset over `1..=ℓ`.
    pub fn complete(colours: usize) -> Result<Self> {
        Palette::new(colours, all_patterns(colours))
    }

    /// Adds a pattern; returns whether it was new.
    pub fn insert(&mut self, pat: Pattern) -> Result<bool> {
        let l = self.colours;
        if pat.0.iter().any(|&c| c == 0 || c as usize > l) {
            return Err(Error::arg(format!("pattern {pat:?} uses a colour outside 1..={l}")));
        }
        let [a, b, c] = pat.0.map(|c| c as usize - 1);
        for [x, y, z] in [[a, b, c], [a, c, b], [b, a, c], [b, c, a], [c, a, b], [c, b, a]] {
            self.table[(x * l + y) * l + z] = true;
        }
        Ok(self.patterns.insert(pat))
    }

    pub fn colour_count(&self) -> usize {
        self.colours
    }

    pub fn patterns(&self) -> impl Iterator<Item = &Pattern> {
        self.patterns.iter()
    }

    pub fn len(&self) -> usize {
        self.patterns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.patterns.is_empty()
    }

    /// Whether the multiset `{a,b,c}` is a pattern; out-of-range colours are not.
    #[inline]
    pub fn allows(&self, a: Colour, b: Colour, c: Colour) -> bool {
        let l = self.colours;
        let (a, b, c) = (a as usize, b as usize, c as usize);
        if a == 0 || b == 0 || c == 0 || a > l || b > l || c > l {
            return false;
        }
        self.table[((a - 1) * l + (b - 1)) * l + (c - 1)]
    }

    pub fn contains(&self, pat: &Pattern) -> bool {
        self.patterns.contains(pat)
    }

    pub fn is_subset(&self, other: &Palette) -> bool {
        self.colours == other.colours && self.patterns.is_subset(&other.patterns)
    }

    /// Number of third colours `c''` with `{c, c', c''}` in the palette.
    pub fn codegree(&self, c: Colour, c2: Colour) -> usize {
        (1..=self.colours as Colour).filter(|&x| self.allows(c, c2, x)).count()
    }

    /// The largest `d` for which the palette is `(d,⋈)`-dense: the minimum
    /// over colour pairs of `codegree / ℓ`, exactly.
    pub fn min_codegree(&self) -> Ratio {
        let l = self.colours as Colour;
        let min = (1..=l)
            .flat_map(|c| (c..=l).map(move |c2| (c, c2)))
            .map(|(c, c2)| self.codegree(c, c2))
            .min()
            .unwrap_or(0);
        Ratio::new(min as u64, self.colours as u64)
    }

    /// Colour permutations (as 0-based images) mapping the palette onto itself.
    ///
    /// Enumerates all `ℓ!` permutations, so this returns `None` above `ℓ = 8`.
    pub fn automorphisms(&self) -> Option<Vec<Vec<Colour>>> {
        let l = self.colours;
        if l > 8 {
            return None;
        }
        let mut out = Vec::new();
        let mut perm: Vec<Colour> = (0..l as Colour).collect();
        permute(&mut perm, 0, &mut |p| {
            let ok = self.patterns.iter().all(|pat| {
                let [a, b, c] = pat.0.map(|x| p[x as usize - 1] + 1);
                self.allows(a, b, c)
            });
            if ok {
                out.push(p.to_vec());
            }
        });
        out.sort();
        Some(out)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = content_lines(text);
        let (ln, header) = lines.next().ok_or_else(|| Error::parse(1, "missing `colors <ℓ>` header"))?;
        let colours = crate::hypercore::parse_header(ln, header, "colors")?;
        let mut p = Palette::new(colours, []).map_err(|e| Error::parse(ln, e))?;
        for (ln, line) in lines {
            let nums = crate::hypercore::parse_usizes(ln, line)?;
            let [a, b, c] = nums[..] else {
                return Err(Error::parse(ln, format!("expected `a b c`, found {} fields", nums.len())));
            };
            if !(1 <= a && a <= b && b <= c && c <= colours) {
                return Err(Error::parse(ln, format!("pattern must satisfy 1 <= a <= b <= c <= {colours}")));
            }
            p.insert(Pattern::new(a as Colour, b as Colour, c as Colour)).map_err(|e| Error::parse(ln, e))?;
        }
        Ok(p)
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("colors {}\n", self.colours);
        for pat in &self.patterns {
            out.push_str(&format!("{pat}\n"));
        }
        out
    }
}

impl fmt::Debug for Palette {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Palette").field("colours", &self.colours).field("patterns", &self.patterns).finish()
    }
}

fn permute(p: &mut Vec<Colour>, i: usize, f: &mut impl FnMut(&[Colour])) {
    if i == p.len() {
        f(p);
        return;
    }
    for j in i..p.len() {
        p.swap(i, j);
        permute(p, i + 1, f);
        p.swap(i, j);
    }
}

/// All multisets of size three over `1..=ℓ`.
pub fn all_patterns(colours: usize) -> impl Iterator<Item = Pattern> {
    let l = colours as Colour;
    (1..=l).flat_map(move |a| (a..=l).flat_map(move |b| (b..=l).map(move |c| Pattern::new(a, b, c))))
}

/// The named palettes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StandardPalette {
    /// `{112, 223, 331}` over three colours.
    Cyclic3,
    /// `{112, 221}` over two colours.
    TwoColourNonMono,
    /// All patterns using exactly two of three colours.
    ExactlyTwoOfThree,
    /// All non-monochromatic patterns over `ℓ` colours.
    NonMono(usize),
}

impl StandardPalette {
    pub fn build(self) -> Result<Palette> {
        let p = |a, b, c| Pattern::new(a, b, c);
        match self {
            StandardPalette::Cyclic3 => Palette::new(3, [p(1, 1, 2), p(2, 2, 3), p(3, 3, 1)]),
            StandardPalette::TwoColourNonMono => Palette::new(2, [p(1, 1, 2), p(2, 2, 1)]),
            StandardPalette::ExactlyTwoOfThree => Palette::new(3, all_patterns(3).filter(|q| q.distinct() == 2)),
            StandardPalette::NonMono(l) => {
                if l < 2 {
                    return Err(Error::arg(format!("nonmono needs at least 2 colours, got {l}")));
                }
                Palette::new(l, all_patterns(l).filter(|q| q.distinct() > 1))
            }
        }
    }

    pub fn name(&self) -> String {
        match self {
            StandardPalette::Cyclic3 => "cyclic3".into(),
            StandardPalette::TwoColourNonMono => "two_colour_nonmono".into(),
            StandardPalette::ExactlyTwoOfThree => "exactly_two_of_three".into(),
            StandardPalette::NonMono(l) => format!("nonmono({l})"),
        }
    }
}

impl FromStr for StandardPalette {
    type Err = Error;

    /// Accepts `cyclic3`, `two_colour_nonmono`, `exactly_two_of_three`,
    /// `nonmono(ℓ)` and `nonmono:ℓ`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        match s {
            "cyclic3" => return Ok(StandardPalette::Cyclic3),
            "two_colour_nonmono" | "two_color_nonmono" => return Ok(StandardPalette::TwoColourNonMono),
            "exactly_two_of_three" => return Ok(StandardPalette::ExactlyTwoOfThree),
            _ => {}
        }
        let arg = s
            .strip_prefix("nonmono(")
            .and_then(|r| r.strip_suffix(')'))
            .or_else(|| s.strip_prefix("nonmono:"));
        match arg.map(str::parse::<usize>) {
            Some(Ok(l)) => Ok(StandardPalette::NonMono(l)),
            _ => Err(Error::arg(format!("unknown palette `{s}`"))),
        }
    }
}

/// Convenience: build a named palette from its string name.
pub fn standard_palette(name: &str) -> Result<Palette> {
    name.parse::<StandardPalette>()?.build()
}
