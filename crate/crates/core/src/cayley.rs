//! The Cayley graph: generating sets, neighbor expansion, breadth-first
//! ball enumeration with exact word lengths, growth series and a textual
//! ball cache.
//!
//! Edges are never materialized. Right multiplication by a generator is the
//! edge relation, and the canonical undirected edge set is
//! `{(v, v*s) : s in positives}` so that every geometric edge is counted
//! exactly once.

use std::collections::HashMap;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::group::{GroupElement, GroupKind, SL2Matrix, TorusBundleGroup, Word};
use crate::textio;

/// Upper bound on enumerated elements before a ball build gives up.
pub const DEFAULT_ELEMENT_CAP: u64 = 50_000_000;

/// A finite symmetric generating set.
///
/// `positives` carries one labelled element per geometric edge orbit; the
/// closure lists the positives followed by their inverses. The closure
/// contains no identity and no repeated element.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GeneratorSet {
    positives: Vec<(String, GroupElement)>,
    closure: Vec<GroupElement>,
}

impl GeneratorSet {
    fn build(group: &TorusBundleGroup, labelled: Vec<(String, GroupElement)>) -> Result<Self> {
        let mut positives: Vec<(String, GroupElement)> = Vec::new();
        let mut taken: Vec<GroupElement> = Vec::new();
        for (label, value) in labelled {
            if value.is_identity() {
                return Err(Error::IdentityGenerator);
            }
            let inv = group.inverse(value)?;
            // A repeated element, or the inverse of one already taken,
            // names an edge orbit we already have.
            if taken.contains(&value) {
                continue;
            }
            taken.push(value);
            taken.push(inv);
            positives.push((label, value));
        }
        if positives.is_empty() {
            return Err(Error::IdentityGenerator);
        }
        let mut closure: Vec<GroupElement> = positives.iter().map(|(_, g)| *g).collect();
        for (_, g) in &positives {
            let inv = group.inverse(*g)?;
            if !closure.contains(&inv) {
                closure.push(inv);
            }
        }
        Ok(GeneratorSet { positives, closure })
    }

    /// Labelled generators, one per edge orbit.
    pub fn positives(&self) -> &[(String, GroupElement)] {
        &self.positives
    }

    /// Positives followed by their inverses; the vertex valence of the
    /// Cayley graph.
    pub fn closure(&self) -> &[GroupElement] {
        &self.closure
    }
}

/// The generating sets carved out by the cell decompositions of the three
/// supported lattices.
///
/// * `Z^2` — `a`, `b` (valence 4);
/// * Heisenberg — `b`, `c = b^-1 a`, `t`, `tb` (valence 8);
/// * solvable — `d = ab`, `t`, `c1c2 = a^2 b`, `td^-1`, `tc2^-1c1^-1`,
///   `tb1c1^-1 = ta^-1` (valence 12).
pub fn default_generators(group: &TorusBundleGroup) -> Result<GeneratorSet> {
    let labelled_words: &[(&str, &str)] = if group.kind() == GroupKind::Abelian2 {
        &[("a", "a"), ("b", "b")]
    } else if group.matrix() == TorusBundleGroup::nil().matrix() {
        &[("b", "b"), ("c", "Ba"), ("t", "t"), ("tb", "tb")]
    } else if group.matrix() == TorusBundleGroup::sol().matrix() {
        &[
            ("d", "ab"),
            ("t", "t"),
            ("c1c2", "aba"),
            ("tD", "tBA"),
            ("tC2C1", "tBAA"),
            ("tb1C1", "tA"),
        ]
    } else {
        return Err(Error::UnsupportedGroup);
    };
    let labelled = labelled_words
        .iter()
        .map(|(label, word)| Ok((label.to_string(), group.evaluate_word(&Word::parse(word)?)?)))
        .collect::<Result<Vec<_>>>()?;
    GeneratorSet::build(group, labelled)
}

/// Builds a generating set from explicit words, labelled by their spelling.
pub fn custom_generators(group: &TorusBundleGroup, words: &[Word]) -> Result<GeneratorSet> {
    let labelled = words
        .iter()
        .map(|w| Ok((w.to_string(), group.evaluate_word(w)?)))
        .collect::<Result<Vec<_>>>()?;
    GeneratorSet::build(group, labelled)
}

/// Right translates `g*s` for every `s` in the closure, in closure order.
pub fn neighbors(
    group: &TorusBundleGroup,
    gens: &GeneratorSet,
    g: GroupElement,
) -> Result<Vec<GroupElement>> {
    gens.closure()
        .iter()
        .map(|s| group.multiply(g, *s))
        .collect()
}

/// A ball around the identity with exact word lengths.
///
/// Elements are stored in the canonical order `(dist, k, p, q)`; `sizes[i]`
/// is the number of elements at distance at most `i`.
#[derive(Debug, Clone, PartialEq)]
pub struct CayleyBall {
    group: TorusBundleGroup,
    gens: GeneratorSet,
    radius: u32,
    elements: Vec<GroupElement>,
    dists: Vec<u32>,
    index: HashMap<GroupElement, u32>,
    sizes: Vec<u64>,
}

impl CayleyBall {
    pub fn group(&self) -> &TorusBundleGroup {
        &self.group
    }

    pub fn generators(&self) -> &GeneratorSet {
        &self.gens
    }

    pub fn radius(&self) -> u32 {
        self.radius
    }

    pub fn len(&self) -> u64 {
        self.elements.len() as u64
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    /// Cumulative ball sizes `|B(0)|, ..., |B(radius)|`.
    pub fn sizes(&self) -> &[u64] {
        &self.sizes
    }

    /// Elements in canonical order `(dist, k, p, q)`.
    pub fn elements(&self) -> &[GroupElement] {
        &self.elements
    }

    /// Word lengths parallel to [`CayleyBall::elements`].
    pub fn dists(&self) -> &[u32] {
        &self.dists
    }

    /// Position of an element in canonical order, if present.
    pub fn position(&self, g: &GroupElement) -> Option<usize> {
        self.index.get(g).map(|&i| i as usize)
    }

    /// Exact word length of `g`, or `None` when `g` lies outside the ball.
    pub fn dist(&self, g: &GroupElement) -> Option<u32> {
        self.position(g).map(|i| self.dists[i])
    }

    pub fn contains(&self, g: &GroupElement) -> bool {
        self.index.contains_key(g)
    }
}

/// Word length of `g` in a completed ball (`None` = outside).
pub fn word_length(ball: &CayleyBall, g: &GroupElement) -> Option<u32> {
    ball.dist(g)
}

/// Incremental breadth-first construction, one full level at a time.
pub(crate) struct BallBuilder {
    group: TorusBundleGroup,
    gens: GeneratorSet,
    cap: u64,
    visited: HashMap<GroupElement, u32>,
    levels: Vec<Vec<GroupElement>>,
    sizes: Vec<u64>,
}

impl BallBuilder {
    pub(crate) fn new(group: &TorusBundleGroup, gens: &GeneratorSet, cap: u64) -> Self {
        let id = GroupElement::identity();
        let mut visited = HashMap::new();
        visited.insert(id, 0);
        BallBuilder {
            group: *group,
            gens: gens.clone(),
            cap,
            visited,
            levels: vec![vec![id]],
            sizes: vec![1],
        }
    }

    /// Radius of the last completed level.
    pub(crate) fn radius(&self) -> u32 {
        (self.levels.len() - 1) as u32
    }

    pub(crate) fn sizes(&self) -> &[u64] {
        &self.sizes
    }

    /// Expands the frontier by every closure generator, yielding the next
    /// distance level.
    pub(crate) fn extend(&mut self) -> Result<()> {
        let dist = self.levels.len() as u32;
        let mut next: Vec<GroupElement> = Vec::new();
        let matrix = *self.group.matrix();
        // The frontier is sorted by (k, p, q), so the fiber power of A
        // changes rarely; memoize the last one.
        let mut memo_k = 0i32;
        let mut memo_pow = SL2Matrix::identity();
        let frontier = std::mem::take(self.levels.last_mut().expect("at least level 0"));
        for v in &frontier {
            if v.k != memo_k {
                memo_k = v.k;
                memo_pow = matrix.power(v.k)?;
            }
            for s in self.gens.closure() {
                let (sp, sq) = memo_pow.apply((s.p, s.q))?;
                let w = GroupElement {
                    p: v.p.checked_add(sp).ok_or(Error::ArithmeticOverflow)?,
                    q: v.q.checked_add(sq).ok_or(Error::ArithmeticOverflow)?,
                    k: v.k.checked_add(s.k).ok_or(Error::ArithmeticOverflow)?,
                };
                if let std::collections::hash_map::Entry::Vacant(slot) = self.visited.entry(w) {
                    slot.insert(dist);
                    next.push(w);
                }
            }
        }
        *self.levels.last_mut().expect("level") = frontier;
        if self.visited.len() as u64 > self.cap {
            return Err(Error::ResourceLimit { cap: self.cap });
        }
        next.sort_unstable();
        self.sizes
            .push(self.sizes.last().unwrap() + next.len() as u64);
        self.levels.push(next);
        Ok(())
    }

    pub(crate) fn extend_to(&mut self, radius: u32) -> Result<()> {
        while self.radius() < radius {
            self.extend()?;
        }
        Ok(())
    }

    /// Freezes the first `radius + 1` levels into a ball.
    pub(crate) fn finish(&self, radius: u32) -> Result<CayleyBall> {
        if radius > self.radius() {
            return Err(Error::RadiusExceeded {
                requested: radius,
                available: self.radius(),
            });
        }
        let mut elements = Vec::new();
        let mut dists = Vec::new();
        for (d, level) in self.levels.iter().take(radius as usize + 1).enumerate() {
            elements.extend_from_slice(level);
            dists.extend(std::iter::repeat_n(d as u32, level.len()));
        }
        let index = elements
            .iter()
            .enumerate()
            .map(|(i, g)| (*g, i as u32))
            .collect();
        Ok(CayleyBall {
            group: self.group,
            gens: self.gens.clone(),
            radius,
            elements,
            dists,
            index,
            sizes: self.sizes[..=radius as usize].to_vec(),
        })
    }
}

/// Breadth-first enumeration of the ball of the given radius, with the
/// default element cap.
pub fn enumerate_ball(
    group: &TorusBundleGroup,
    gens: &GeneratorSet,
    radius: u32,
) -> Result<CayleyBall> {
    enumerate_ball_capped(group, gens, radius, DEFAULT_ELEMENT_CAP)
}

/// Like [`enumerate_ball`] with an explicit element cap; exceeding it is a
/// [`Error::ResourceLimit`].
pub fn enumerate_ball_capped(
    group: &TorusBundleGroup,
    gens: &GeneratorSet,
    radius: u32,
    cap: u64,
) -> Result<CayleyBall> {
    let mut builder = BallBuilder::new(group, gens, cap);
    builder.extend_to(radius)?;
    builder.finish(radius)
}

/// `[|B(0)|, ..., |B(rmax)|]` with the default element cap.
pub fn growth_series(group: &TorusBundleGroup, gens: &GeneratorSet, rmax: u32) -> Result<Vec<u64>> {
    growth_series_capped(group, gens, rmax, DEFAULT_ELEMENT_CAP)
}

/// `[|B(0)|, ..., |B(rmax)|]` with an explicit element cap.
pub fn growth_series_capped(
    group: &TorusBundleGroup,
    gens: &GeneratorSet,
    rmax: u32,
    cap: u64,
) -> Result<Vec<u64>> {
    let mut builder = BallBuilder::new(group, gens, cap);
    builder.extend_to(rmax)?;
    Ok(builder.sizes()[..=rmax as usize].to_vec())
}

/// Serializes a ball to the line-oriented cache format:
///
/// ```text
/// ball-cache v1 matrix=<m11>,<m12>,<m21>,<m22> kind=<abelian2|bundle> gens=<label:p,q,k;...> radius=<r>
/// p q k dist
/// ```
///
/// Records are written in canonical order, so write/read round trips are
/// bit-exact.
pub fn write_ball_cache(ball: &CayleyBall, path: &Path) -> Result<()> {
    fs::write(path, ball_cache_string(ball))?;
    Ok(())
}

pub(crate) fn ball_cache_string(ball: &CayleyBall) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "ball-cache v1 {} {} {} radius={}\n",
        textio::matrix_token(ball.group.matrix()),
        textio::kind_token(ball.group.kind()),
        textio::gens_token(&ball.gens),
        ball.radius
    ));
    for (g, d) in ball.elements.iter().zip(&ball.dists) {
        out.push_str(&format!("{} {} {} {}\n", g.p, g.q, g.k, d));
    }
    out
}

/// Reads a ball cache, validating the header against the requesting group
/// and generating set and the records against the canonical order.
pub fn read_ball_cache(
    path: &Path,
    group: &TorusBundleGroup,
    gens: &GeneratorSet,
) -> Result<CayleyBall> {
    let text = fs::read_to_string(path)?;
    parse_ball_cache(&text, group, gens)
}

pub(crate) fn parse_ball_cache(
    text: &str,
    group: &TorusBundleGroup,
    gens: &GeneratorSet,
) -> Result<CayleyBall> {
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::CorruptCache("empty file".into()))?;
    let tokens: Vec<&str> = header.split_whitespace().collect();
    if tokens.len() != 6 || tokens[0] != "ball-cache" || tokens[1] != "v1" {
        return Err(Error::CorruptCache(format!("bad header '{header}'")));
    }
    let matrix = textio::parse_matrix_token(tokens[2])?;
    let kind = textio::parse_kind_token(tokens[3])?;
    let positives = textio::parse_gens_token(tokens[4])?;
    let radius = textio::parse_u32(
        tokens[5].strip_prefix("radius=").ok_or_else(|| {
            Error::CorruptCache(format!("expected radius token, found '{}'", tokens[5]))
        })?,
        "radius",
    )?;
    textio::check_header_matches(&matrix, kind, &positives, group, gens)?;

    let mut elements: Vec<GroupElement> = Vec::new();
    let mut dists: Vec<u32> = Vec::new();
    for line in lines {
        let parts: Vec<&str> = line.split_whitespace().collect();
        if parts.len() != 4 {
            return Err(Error::CorruptCache(format!("bad record '{line}'")));
        }
        let g = GroupElement::new(
            textio::parse_i64(parts[0], "record coordinate")?,
            textio::parse_i64(parts[1], "record coordinate")?,
            textio::parse_i32(parts[2], "record coordinate")?,
        );
        let d = textio::parse_u32(parts[3], "record distance")?;
        if d > radius {
            return Err(Error::CorruptCache(format!(
                "distance {d} exceeds radius {radius}"
            )));
        }
        if let (Some(last_g), Some(last_d)) = (elements.last(), dists.last()) {
            if (d, g.canonical_key()) <= (*last_d, last_g.canonical_key()) {
                return Err(Error::CorruptCache(format!(
                    "record '{line}' breaks the canonical order"
                )));
            }
        }
        elements.push(g);
        dists.push(d);
    }
    if elements.first() != Some(&GroupElement::identity()) || dists.first() != Some(&0) {
        return Err(Error::CorruptCache(
            "first record must be the identity at distance 0".into(),
        ));
    }
    let mut sizes = vec![0u64; radius as usize + 1];
    for &d in &dists {
        sizes[d as usize] += 1;
    }
    for i in 1..sizes.len() {
        sizes[i] += sizes[i - 1];
    }
    let index = elements
        .iter()
        .enumerate()
        .map(|(i, g)| (*g, i as u32))
        .collect();
    Ok(CayleyBall {
        group: *group,
        gens: gens.clone(),
        radius,
        elements,
        dists,
        index,
        sizes,
    })
}
