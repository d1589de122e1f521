//! Finite multiplicity domains on the Cayley graph.
//!
//! A domain is a finitely supported function `phi` from vertices to
//! positive integers. Its mass is the total of `phi`, its boundary is the
//! set of canonical edges whose endpoints carry different values (with
//! `phi = 0` off the support), and the gradient is the summed absolute
//! difference over boundary edges.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::fs;
use std::path::Path;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::cayley::{neighbors, CayleyBall, GeneratorSet};
use crate::error::{Error, Result};
use crate::group::{GroupElement, GroupKind, TorusBundleGroup};
use crate::textio;

/// One fiber level of a domain: all support vertices with equal `k`, with
/// `(p, q)` kept in lexicographic order. The transport inner loop walks
/// these as sorted runs.
#[derive(Debug, Clone)]
pub(crate) struct Layer {
    pub(crate) k: i32,
    pub(crate) pts: Vec<(i64, i64)>,
    pub(crate) mults: Vec<u32>,
    pub(crate) min_p: i64,
    pub(crate) max_p: i64,
    pub(crate) min_q: i64,
    pub(crate) max_q: i64,
}

/// A finite-support multiplicity function on the vertices of the Cayley
/// graph. Immutable after construction.
#[derive(Debug, Clone)]
pub struct Domain {
    group: TorusBundleGroup,
    gens: GeneratorSet,
    entries: Vec<(GroupElement, u32)>,
    index: HashMap<GroupElement, u32>,
    layers: Vec<Layer>,
    mass: u64,
    seed: Option<u64>,
}

impl PartialEq for Domain {
    fn eq(&self, other: &Self) -> bool {
        self.group == other.group
            && self.gens == other.gens
            && self.entries == other.entries
            && self.seed == other.seed
    }
}

impl Eq for Domain {}

/// A boundary edge: a canonical edge `from -> from * via` whose endpoint
/// values differ; `delta` is the absolute difference.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoundaryEdge {
    pub from: GroupElement,
    pub via: String,
    pub to: GroupElement,
    pub delta: u64,
}

impl fmt::Display for BoundaryEdge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} -{}-> {} (delta {})",
            self.from, self.via, self.to, self.delta
        )
    }
}

impl Domain {
    /// Builds a domain from raw `(vertex, multiplicity)` pairs.
    ///
    /// Zero multiplicities are dropped (absent means zero), duplicates are
    /// rejected, and an empty result is an error.
    pub fn from_entries<I>(group: &TorusBundleGroup, gens: &GeneratorSet, raw: I) -> Result<Domain>
    where
        I: IntoIterator<Item = (GroupElement, u32)>,
    {
        Self::from_entries_seeded(group, gens, raw, None)
    }

    fn from_entries_seeded<I>(
        group: &TorusBundleGroup,
        gens: &GeneratorSet,
        raw: I,
        seed: Option<u64>,
    ) -> Result<Domain>
    where
        I: IntoIterator<Item = (GroupElement, u32)>,
    {
        let mut entries: Vec<(GroupElement, u32)> =
            raw.into_iter().filter(|(_, m)| *m > 0).collect();
        entries.sort_unstable_by_key(|(g, _)| g.canonical_key());
        for pair in entries.windows(2) {
            if pair[0].0 == pair[1].0 {
                return Err(Error::DuplicateVertex(pair[0].0));
            }
        }
        if entries.is_empty() {
            return Err(Error::EmptyDomain);
        }
        let mut mass = 0u64;
        for (_, m) in &entries {
            mass = mass
                .checked_add(*m as u64)
                .ok_or(Error::ArithmeticOverflow)?;
        }
        let index = entries.iter().map(|(g, m)| (*g, *m)).collect();
        let layers = build_layers(&entries);
        Ok(Domain {
            group: *group,
            gens: gens.clone(),
            entries,
            index,
            layers,
            mass,
            seed,
        })
    }

    pub fn group(&self) -> &TorusBundleGroup {
        &self.group
    }

    pub fn generators(&self) -> &GeneratorSet {
        &self.gens
    }

    /// Support entries in canonical `(k, p, q)` order.
    pub fn entries(&self) -> &[(GroupElement, u32)] {
        &self.entries
    }

    pub fn support_len(&self) -> usize {
        self.entries.len()
    }

    /// Total mass `sum phi`.
    pub fn mass(&self) -> u64 {
        self.mass
    }

    /// `phi` at a vertex, zero off the support.
    pub fn phi(&self, g: &GroupElement) -> u32 {
        self.index.get(g).copied().unwrap_or(0)
    }

    /// True when every multiplicity is 1.
    pub fn is_characteristic(&self) -> bool {
        self.entries.iter().all(|(_, m)| *m == 1)
    }

    /// Seed recorded at construction, when the domain came from the seeded
    /// random family.
    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    pub(crate) fn layers(&self) -> &[Layer] {
        &self.layers
    }
}

fn build_layers(entries: &[(GroupElement, u32)]) -> Vec<Layer> {
    let mut layers: Vec<Layer> = Vec::new();
    for (g, m) in entries {
        match layers.last_mut() {
            Some(layer) if layer.k == g.k => {
                layer.pts.push((g.p, g.q));
                layer.mults.push(*m);
                layer.min_p = layer.min_p.min(g.p);
                layer.max_p = layer.max_p.max(g.p);
                layer.min_q = layer.min_q.min(g.q);
                layer.max_q = layer.max_q.max(g.q);
            }
            _ => layers.push(Layer {
                k: g.k,
                pts: vec![(g.p, g.q)],
                mults: vec![*m],
                min_p: g.p,
                max_p: g.p,
                min_q: g.q,
                max_q: g.q,
            }),
        }
    }
    layers
}

/// The characteristic domain of a ball of radius `n`: `phi = 1` on `B(n)`.
pub fn from_ball(ball: &CayleyBall, n: u32) -> Result<Domain> {
    if n > ball.radius() {
        return Err(Error::RadiusExceeded {
            requested: n,
            available: ball.radius(),
        });
    }
    let entries = ball
        .elements()
        .iter()
        .zip(ball.dists())
        .filter(|(_, d)| **d <= n)
        .map(|(g, _)| (*g, 1u32));
    Domain::from_entries(ball.group(), ball.generators(), entries)
}

/// The characteristic domain of a coordinate box `lo <= (p, q, k) <= hi`.
/// In `Z^2` the fiber bounds are ignored.
pub fn from_box(
    group: &TorusBundleGroup,
    gens: &GeneratorSet,
    lo: (i64, i64, i32),
    hi: (i64, i64, i32),
) -> Result<Domain> {
    if lo.0 > hi.0 || lo.1 > hi.1 {
        return Err(Error::EmptyBox);
    }
    let (klo, khi) = if group.kind() == GroupKind::Abelian2 {
        (0, 0)
    } else {
        if lo.2 > hi.2 {
            return Err(Error::EmptyBox);
        }
        (lo.2, hi.2)
    };
    let mut entries = Vec::new();
    for k in klo..=khi {
        for p in lo.0..=hi.0 {
            for q in lo.1..=hi.1 {
                entries.push((GroupElement::new(p, q, k), 1u32));
            }
        }
    }
    Domain::from_entries(group, gens, entries)
}

/// Grows a connected random support from the identity.
///
/// The support is extended one vertex at a time by a uniformly chosen
/// unvisited neighbor of the current support; each added vertex draws a
/// multiplicity uniform in `1..=max_mult`; growth stops once the total mass
/// reaches `target_mass`. The generator is ChaCha8 seeded with `seed`, so a
/// fixed seed reproduces the domain exactly.
pub fn random_connected(
    group: &TorusBundleGroup,
    gens: &GeneratorSet,
    target_mass: u64,
    max_mult: u32,
    seed: u64,
) -> Result<Domain> {
    if target_mass == 0 {
        return Err(Error::EmptyDomain);
    }
    if max_mult == 0 {
        return Err(Error::InvariantViolation(
            "max_mult must be at least 1".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut support: HashMap<GroupElement, u32> = HashMap::new();
    let mut candidates: Vec<GroupElement> = Vec::new();
    let mut candidate_set: HashSet<GroupElement> = HashSet::new();

    let add = |v: GroupElement,
               rng: &mut ChaCha8Rng,
               support: &mut HashMap<GroupElement, u32>,
               candidates: &mut Vec<GroupElement>,
               candidate_set: &mut HashSet<GroupElement>|
     -> Result<u64> {
        let mult = rng.random_range(1..=max_mult);
        support.insert(v, mult);
        for w in neighbors(group, gens, v)? {
            if !support.contains_key(&w) && candidate_set.insert(w) {
                candidates.push(w);
            }
        }
        Ok(mult as u64)
    };

    let mut total = add(
        GroupElement::identity(),
        &mut rng,
        &mut support,
        &mut candidates,
        &mut candidate_set,
    )?;
    while total < target_mass {
        let i = rng.random_range(0..candidates.len());
        let v = candidates.swap_remove(i);
        candidate_set.remove(&v);
        total += add(
            v,
            &mut rng,
            &mut support,
            &mut candidates,
            &mut candidate_set,
        )?;
    }
    Domain::from_entries_seeded(group, gens, support, Some(seed))
}

/// Total mass of the domain.
pub fn mass(d: &Domain) -> u64 {
    d.mass()
}

/// All boundary edges in a fixed deterministic order.
///
/// Every canonical edge `(v, v*s)` with `s` positive and differing endpoint
/// values appears exactly once: outgoing edges are listed at their support
/// source, and edges entering the support from outside are listed at their
/// support target.
pub fn varopoulos_boundary(d: &Domain) -> Result<Vec<BoundaryEdge>> {
    let group = d.group();
    let positives = d.generators().positives();
    let inverses = positives
        .iter()
        .map(|(_, s)| group.inverse(*s))
        .collect::<Result<Vec<_>>>()?;
    let mut edges = Vec::new();
    for (sigma, m) in d.entries() {
        let phi_sigma = *m as u64;
        for ((label, s), s_inv) in positives.iter().zip(&inverses) {
            let to = group.multiply(*sigma, *s)?;
            let phi_to = d.phi(&to) as u64;
            if phi_sigma != phi_to {
                edges.push(BoundaryEdge {
                    from: *sigma,
                    via: label.clone(),
                    to,
                    delta: phi_sigma.abs_diff(phi_to),
                });
            }
            let from = group.multiply(*sigma, *s_inv)?;
            if d.phi(&from) == 0 {
                edges.push(BoundaryEdge {
                    from,
                    via: label.clone(),
                    to: *sigma,
                    delta: phi_sigma,
                });
            }
        }
    }
    Ok(edges)
}

/// Summed endpoint difference over the boundary.
pub fn gradient(d: &Domain) -> Result<u64> {
    let mut total = 0u64;
    for edge in varopoulos_boundary(d)? {
        total = total
            .checked_add(edge.delta)
            .ok_or(Error::ArithmeticOverflow)?;
    }
    Ok(total)
}

/// Left translation `phi'(gamma sigma) = phi(sigma)`, a graph automorphism
/// of the right Cayley graph.
pub fn translate_left(d: &Domain, gamma: GroupElement) -> Result<Domain> {
    let group = d.group();
    let moved = d
        .entries()
        .iter()
        .map(|(sigma, m)| Ok((group.multiply(gamma, *sigma)?, *m)))
        .collect::<Result<Vec<_>>>()?;
    Domain::from_entries_seeded(group, d.generators(), moved, d.seed())
}

/// Serializes a domain to the line-oriented format:
///
/// ```text
/// domain v1 matrix=<m11>,<m12>,<m21>,<m22> kind=<abelian2|bundle> gens=<label:p,q,k;...> seed=<s|none>
/// p q k mult
/// ```
pub fn write_domain_file(d: &Domain, path: &Path) -> Result<()> {
    fs::write(path, domain_file_string(d))?;
    Ok(())
}

pub(crate) fn domain_file_string(d: &Domain) -> String {
    let seed = match d.seed() {
        Some(s) => s.to_string(),
        None => "none".to_string(),
    };
    let mut out = format!(
        "domain v1 {} {} {} seed={}\n",
        textio::matrix_token(d.group().matrix()),
        textio::kind_token(d.group().kind()),
        textio::gens_token(d.generators()),
        seed
    );
    for (g, m) in d.entries() {
        out.push_str(&format!("{} {} {} {}\n", g.p, g.q, g.k, m));
    }
    out
}

/// Reads a domain file, validating the header against the requesting group
/// and generating set.
pub fn read_domain_file(
    path: &Path,
    group: &TorusBundleGroup,
    gens: &GeneratorSet,
) -> Result<Domain> {
    let text = fs::read_to_string(path)?;
    parse_domain_file(&text, group, gens)
}

pub(crate) fn parse_domain_file(
    text: &str,
    group: &TorusBundleGroup,
    gens: &GeneratorSet,
) -> Result<Domain> {
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::CorruptCache("empty file".into()))?;
    let tokens: Vec<&str> = header.split_whitespace().collect();
    if tokens.len() != 6 || tokens[0] != "domain" || tokens[1] != "v1" {
        return Err(Error::CorruptCache(format!("bad header '{header}'")));
    }
    let matrix = textio::parse_matrix_token(tokens[2])?;
    let kind = textio::parse_kind_token(tokens[3])?;
    let positives = textio::parse_gens_token(tokens[4])?;
    let seed_body = tokens[5].strip_prefix("seed=").ok_or_else(|| {
        Error::CorruptCache(format!("expected seed token, found '{}'", tokens[5]))
    })?;
    let seed = match seed_body {
        "none" => None,
        s => Some(
            s.parse::<u64>()
                .map_err(|_| Error::CorruptCache(format!("bad seed '{s}'")))?,
        ),
    };
    textio::check_header_matches(&matrix, kind, &positives, group, gens)?;

    let mut entries: Vec<(GroupElement, u32)> = Vec::new();
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
        let m = textio::parse_u32(parts[3], "record multiplicity")?;
        if m == 0 {
            return Err(Error::CorruptCache(format!(
                "zero multiplicity in '{line}'"
            )));
        }
        if let Some((last, _)) = entries.last() {
            if g.canonical_key() <= last.canonical_key() {
                return Err(Error::CorruptCache(format!(
                    "record '{line}' breaks the canonical order"
                )));
            }
        }
        entries.push((g, m));
    }
    Domain::from_entries_seeded(group, gens, entries, seed)
}
