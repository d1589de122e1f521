//! Exact arithmetic in the torus-bundle groups `Z^2 x| Z`.
//!
//! Elements are kept in the normal form `a^p b^q t^k`, written as the
//! coordinate triple `(p, q, k)`. The whole group structure is derived from
//! one law, fixed here as the single source of truth:
//!
//! ```text
//! (u, k) * (v, l) = (u + A^k v, k + l)
//! ```
//!
//! where `A` is the gluing matrix acting on the abelian coordinates. All
//! coordinate arithmetic is checked 64-bit integer arithmetic; overflow is
//! reported, never wrapped.

use std::fmt;

use crate::error::{Error, Result};

#[inline]
fn add(a: i64, b: i64) -> Result<i64> {
    a.checked_add(b).ok_or(Error::ArithmeticOverflow)
}

#[inline]
fn mul(a: i64, b: i64) -> Result<i64> {
    a.checked_mul(b).ok_or(Error::ArithmeticOverflow)
}

#[inline]
fn neg(a: i64) -> Result<i64> {
    a.checked_neg().ok_or(Error::ArithmeticOverflow)
}

/// A 2x2 integer matrix with determinant +1 or -1.
///
/// Entries are row-major: the matrix is `[[m11, m12], [m21, m22]]` and acts
/// on column vectors `(p, q)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SL2Matrix {
    m11: i64,
    m12: i64,
    m21: i64,
    m22: i64,
}

impl SL2Matrix {
    /// Builds a matrix, rejecting any determinant other than +1 or -1.
    pub fn new(m11: i64, m12: i64, m21: i64, m22: i64) -> Result<Self> {
        let det = add(mul(m11, m22)?, neg(mul(m12, m21)?)?)?;
        if det != 1 && det != -1 {
            return Err(Error::BadMatrix(det));
        }
        Ok(SL2Matrix { m11, m12, m21, m22 })
    }

    pub const fn identity() -> Self {
        SL2Matrix {
            m11: 1,
            m12: 0,
            m21: 0,
            m22: 1,
        }
    }

    pub fn entries(&self) -> (i64, i64, i64, i64) {
        (self.m11, self.m12, self.m21, self.m22)
    }

    pub fn det(&self) -> i64 {
        // Entries of a constructed matrix keep det exactly +-1.
        self.m11 * self.m22 - self.m12 * self.m21
    }

    pub fn trace(&self) -> i64 {
        self.m11 + self.m22
    }

    /// Exact inverse via the adjugate: for det = +-1 the inverse is
    /// `det * [[m22, -m12], [-m21, m11]]`.
    pub fn inverse(&self) -> Result<SL2Matrix> {
        let d = self.det();
        Ok(SL2Matrix {
            m11: mul(d, self.m22)?,
            m12: mul(d, neg(self.m12)?)?,
            m21: mul(d, neg(self.m21)?)?,
            m22: mul(d, self.m11)?,
        })
    }

    /// Matrix product `self * rhs` with checked entries.
    pub fn mul(&self, rhs: &SL2Matrix) -> Result<SL2Matrix> {
        Ok(SL2Matrix {
            m11: add(mul(self.m11, rhs.m11)?, mul(self.m12, rhs.m21)?)?,
            m12: add(mul(self.m11, rhs.m12)?, mul(self.m12, rhs.m22)?)?,
            m21: add(mul(self.m21, rhs.m11)?, mul(self.m22, rhs.m21)?)?,
            m22: add(mul(self.m21, rhs.m12)?, mul(self.m22, rhs.m22)?)?,
        })
    }

    /// `self^k` by repeated squaring; negative exponents go through the
    /// exact adjugate inverse.
    pub fn power(&self, k: i32) -> Result<SL2Matrix> {
        let base = if k < 0 { self.inverse()? } else { *self };
        let mut exp = k.unsigned_abs();
        let mut acc = SL2Matrix::identity();
        let mut sq = base;
        while exp > 0 {
            if exp & 1 == 1 {
                acc = acc.mul(&sq)?;
            }
            exp >>= 1;
            if exp > 0 {
                sq = sq.mul(&sq)?;
            }
        }
        Ok(acc)
    }

    /// Applies the matrix to a column vector with exact arithmetic.
    pub fn apply(&self, v: (i64, i64)) -> Result<(i64, i64)> {
        Ok((
            add(mul(self.m11, v.0)?, mul(self.m12, v.1)?)?,
            add(mul(self.m21, v.0)?, mul(self.m22, v.1)?)?,
        ))
    }
}

impl fmt::Display for SL2Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "[[{},{}],[{},{}]]",
            self.m11, self.m12, self.m21, self.m22
        )
    }
}

/// A group element `a^p b^q t^k` in normal form.
///
/// The triple identifies the element uniquely; equality, hashing and the
/// total order by `(k, p, q)` all agree with equality in the group.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct GroupElement {
    pub p: i64,
    pub q: i64,
    pub k: i32,
}

impl GroupElement {
    pub const fn new(p: i64, q: i64, k: i32) -> Self {
        GroupElement { p, q, k }
    }

    pub const fn identity() -> Self {
        GroupElement { p: 0, q: 0, k: 0 }
    }

    pub fn is_identity(&self) -> bool {
        *self == GroupElement::identity()
    }

    /// Sort key giving the canonical order used everywhere in this crate.
    #[inline]
    pub fn canonical_key(&self) -> (i32, i64, i64) {
        (self.k, self.p, self.q)
    }
}

impl Ord for GroupElement {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.canonical_key().cmp(&other.canonical_key())
    }
}

impl PartialOrd for GroupElement {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for GroupElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{},{})", self.p, self.q, self.k)
    }
}

/// Whether the group has a fiber direction at all.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GroupKind {
    /// Plain `Z^2`; the fiber coordinate is fixed at 0 and the gluing
    /// matrix is the identity.
    Abelian2,
    /// Full semidirect product `Z^2 x| Z`.
    TorusBundle,
}

/// Coarse classification of the gluing matrix by its eigenvalues.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Geometry {
    /// Identity or minus identity gluing (flat), or no fiber at all.
    Euclidean,
    /// Eigenvalues +-1 of infinite order (unipotent up to sign).
    Nil,
    /// Real eigenvalues off the unit circle.
    Sol,
    /// Finite-order gluing.
    Finite,
}

impl fmt::Display for Geometry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Geometry::Euclidean => "euclidean",
            Geometry::Nil => "nil",
            Geometry::Sol => "sol",
            Geometry::Finite => "finite",
        };
        f.write_str(s)
    }
}

/// A torus-bundle group, fixed by its gluing matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TorusBundleGroup {
    matrix: SL2Matrix,
    kind: GroupKind,
}

impl TorusBundleGroup {
    /// The plane `Z^2` with no fiber letter.
    pub fn z2() -> Self {
        TorusBundleGroup {
            matrix: SL2Matrix::identity(),
            kind: GroupKind::Abelian2,
        }
    }

    /// The integral Heisenberg lattice: gluing matrix `[[1,1],[0,1]]`.
    pub fn nil() -> Self {
        TorusBundleGroup {
            matrix: SL2Matrix::new(1, 1, 0, 1).expect("unimodular"),
            kind: GroupKind::TorusBundle,
        }
    }

    /// The solvable lattice: gluing matrix `[[2,1],[1,1]]`.
    pub fn sol() -> Self {
        TorusBundleGroup {
            matrix: SL2Matrix::new(2, 1, 1, 1).expect("unimodular"),
            kind: GroupKind::TorusBundle,
        }
    }

    /// A torus bundle over an arbitrary unimodular gluing matrix.
    pub fn from_matrix(matrix: SL2Matrix) -> Self {
        TorusBundleGroup {
            matrix,
            kind: GroupKind::TorusBundle,
        }
    }

    pub fn matrix(&self) -> &SL2Matrix {
        &self.matrix
    }

    pub fn kind(&self) -> GroupKind {
        self.kind
    }

    pub fn geometry(&self) -> Geometry {
        if self.kind == GroupKind::Abelian2 {
            return Geometry::Euclidean;
        }
        let m = &self.matrix;
        if *m == SL2Matrix::identity() || m.entries() == (-1, 0, 0, -1) {
            return Geometry::Euclidean;
        }
        let tr = m.trace();
        if m.det() == 1 {
            match tr.abs() {
                0 | 1 => Geometry::Finite,
                2 => Geometry::Nil,
                _ => Geometry::Sol,
            }
        } else if tr == 0 {
            Geometry::Finite
        } else {
            Geometry::Sol
        }
    }

    /// The group law `(u, k)(v, l) = (u + A^k v, k + l)`.
    pub fn multiply(&self, g: GroupElement, h: GroupElement) -> Result<GroupElement> {
        debug_assert!(self.kind != GroupKind::Abelian2 || (g.k == 0 && h.k == 0));
        let (vp, vq) = self.matrix.power(g.k)?.apply((h.p, h.q))?;
        Ok(GroupElement {
            p: add(g.p, vp)?,
            q: add(g.q, vq)?,
            k: g.k.checked_add(h.k).ok_or(Error::ArithmeticOverflow)?,
        })
    }

    /// Inverse from the group law: `(u, k)^-1 = (-A^-k u, -k)`.
    pub fn inverse(&self, g: GroupElement) -> Result<GroupElement> {
        let nk = g.k.checked_neg().ok_or(Error::ArithmeticOverflow)?;
        let (up, uq) = self.matrix.power(nk)?.apply((g.p, g.q))?;
        Ok(GroupElement {
            p: neg(up)?,
            q: neg(uq)?,
            k: nk,
        })
    }

    /// Left-to-right product of the letter values `a = (1,0,0)`,
    /// `b = (0,1,0)`, `t = (0,0,1)` and their inverses.
    ///
    /// The fiber letter `t` is rejected in `Z^2`.
    pub fn evaluate_word(&self, word: &Word) -> Result<GroupElement> {
        let mut acc = GroupElement::identity();
        for letter in word.letters() {
            if self.kind == GroupKind::Abelian2 && letter.gen == Gen::T {
                return Err(Error::IllegalLetter(letter.to_char()));
            }
            acc = self.multiply(acc, letter.value())?;
        }
        Ok(acc)
    }
}

/// One of the three base letters of the presentation alphabet.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Gen {
    A,
    B,
    T,
}

/// A signed letter: a base letter or its inverse.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Letter {
    pub gen: Gen,
    pub inverse: bool,
}

impl Letter {
    pub const fn new(gen: Gen, inverse: bool) -> Self {
        Letter { gen, inverse }
    }

    /// The group value of the letter.
    pub fn value(&self) -> GroupElement {
        let sign = if self.inverse { -1 } else { 1 };
        match self.gen {
            Gen::A => GroupElement::new(sign, 0, 0),
            Gen::B => GroupElement::new(0, sign, 0),
            Gen::T => GroupElement::new(0, 0, sign as i32),
        }
    }

    /// Lowercase for a letter, uppercase for its inverse.
    pub fn to_char(&self) -> char {
        match (self.gen, self.inverse) {
            (Gen::A, false) => 'a',
            (Gen::B, false) => 'b',
            (Gen::T, false) => 't',
            (Gen::A, true) => 'A',
            (Gen::B, true) => 'B',
            (Gen::T, true) => 'T',
        }
    }

    pub fn from_char(c: char) -> Result<Letter> {
        match c {
            'a' => Ok(Letter::new(Gen::A, false)),
            'b' => Ok(Letter::new(Gen::B, false)),
            't' => Ok(Letter::new(Gen::T, false)),
            'A' => Ok(Letter::new(Gen::A, true)),
            'B' => Ok(Letter::new(Gen::B, true)),
            'T' => Ok(Letter::new(Gen::T, true)),
            other => Err(Error::IllegalLetter(other)),
        }
    }
}

/// A word over the alphabet `{a, b, t}` and inverses.
///
/// Evaluation goes through the group, so freely cancelling pairs never
/// change the value.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Word(Vec<Letter>);

impl Word {
    pub fn new(letters: Vec<Letter>) -> Self {
        Word(letters)
    }

    pub fn empty() -> Self {
        Word(Vec::new())
    }

    /// Parses `"tB"` as `t * b^-1`: lowercase letters, uppercase inverses.
    pub fn parse(s: &str) -> Result<Word> {
        s.chars()
            .map(Letter::from_char)
            .collect::<Result<Vec<_>>>()
            .map(Word)
    }

    pub fn letters(&self) -> &[Letter] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("1");
        }
        for l in &self.0 {
            write!(f, "{}", l.to_char())?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn m(m11: i64, m12: i64, m21: i64, m22: i64) -> SL2Matrix {
        SL2Matrix::new(m11, m12, m21, m22).unwrap()
    }

    fn e(p: i64, q: i64, k: i32) -> GroupElement {
        GroupElement::new(p, q, k)
    }

    #[test]
    fn rejects_non_unimodular_matrix() {
        assert!(matches!(
            SL2Matrix::new(1, 1, 0, 2),
            Err(Error::BadMatrix(2))
        ));
        assert!(matches!(
            SL2Matrix::new(0, 0, 0, 0),
            Err(Error::BadMatrix(0))
        ));
        assert!(SL2Matrix::new(0, 1, 1, 0).is_ok()); // det -1 allowed
    }

    #[test]
    fn matrix_power_examples() {
        let shear = m(1, 1, 0, 1);
        assert_eq!(shear.power(0).unwrap(), SL2Matrix::identity());
        assert_eq!(shear.power(2).unwrap(), m(1, 2, 0, 1));
        assert_eq!(shear.power(-1).unwrap(), m(1, -1, 0, 1));
    }

    #[test]
    fn matrix_power_cancels_for_small_exponents() {
        for mat in [m(1, 1, 0, 1), m(2, 1, 1, 1), m(0, 1, 1, 0)] {
            for k in -20..=20 {
                let prod = mat.power(k).unwrap().mul(&mat.power(-k).unwrap()).unwrap();
                assert_eq!(prod, SL2Matrix::identity(), "matrix {mat}, exponent {k}");
            }
        }
    }

    #[test]
    fn matrix_power_overflows_loudly() {
        let sol = m(2, 1, 1, 1);
        assert!(matches!(sol.power(200), Err(Error::ArithmeticOverflow)));
    }

    #[test]
    fn apply_examples() {
        assert_eq!(SL2Matrix::identity().apply((7, -3)).unwrap(), (7, -3));
        assert_eq!(m(1, 1, 0, 1).apply((0, 1)).unwrap(), (1, 1));
        assert_eq!(m(2, 1, 1, 1).apply((1, 1)).unwrap(), (3, 2));
    }

    #[test]
    fn multiply_examples() {
        let nil = TorusBundleGroup::nil();
        let sol = TorusBundleGroup::sol();
        assert_eq!(
            nil.multiply(GroupElement::identity(), e(5, -2, 3)).unwrap(),
            e(5, -2, 3)
        );
        // t * b = abt in the Heisenberg lattice.
        assert_eq!(nil.multiply(e(0, 0, 1), e(0, 1, 0)).unwrap(), e(1, 1, 1));
        assert_eq!(sol.multiply(e(0, 0, 1), e(1, 0, 0)).unwrap(), e(2, 1, 1));
    }

    #[test]
    fn inverse_examples() {
        let nil = TorusBundleGroup::nil();
        let sol = TorusBundleGroup::sol();
        assert_eq!(
            nil.inverse(GroupElement::identity()).unwrap(),
            GroupElement::identity()
        );
        let g = e(1, 1, 1);
        let gi = nil.inverse(g).unwrap();
        assert_eq!(gi, e(0, -1, -1));
        assert_eq!(nil.multiply(g, gi).unwrap(), GroupElement::identity());
        assert_eq!(sol.inverse(e(2, 1, 1)).unwrap(), e(-1, 0, -1));
    }

    #[test]
    fn evaluate_word_examples() {
        let nil = TorusBundleGroup::nil();
        let sol = TorusBundleGroup::sol();
        assert_eq!(
            nil.evaluate_word(&Word::empty()).unwrap(),
            GroupElement::identity()
        );
        assert_eq!(
            nil.evaluate_word(&Word::parse("Ba").unwrap()).unwrap(),
            e(1, -1, 0)
        );
        assert_eq!(
            sol.evaluate_word(&Word::parse("tA").unwrap()).unwrap(),
            e(-2, -1, 1)
        );
    }

    #[test]
    fn fiber_letter_rejected_in_the_plane() {
        let z2 = TorusBundleGroup::z2();
        assert!(matches!(
            z2.evaluate_word(&Word::parse("abt").unwrap()),
            Err(Error::IllegalLetter('t'))
        ));
        assert!(matches!(
            z2.evaluate_word(&Word::parse("T").unwrap()),
            Err(Error::IllegalLetter('T'))
        ));
        assert_eq!(
            z2.evaluate_word(&Word::parse("aB").unwrap()).unwrap(),
            e(1, -1, 0)
        );
    }

    #[test]
    fn word_parse_rejects_unknown_letters() {
        assert!(matches!(Word::parse("ax"), Err(Error::IllegalLetter('x'))));
    }

    /// The defining relations of both lattices, checked literally.
    #[test]
    fn relators_hold() {
        let nil = TorusBundleGroup::nil();
        let sol = TorusBundleGroup::sol();
        let ev = |g: &TorusBundleGroup, w: &str| g.evaluate_word(&Word::parse(w).unwrap()).unwrap();

        // Heisenberg: t a t^-1 = a and t b t^-1 = ab.
        assert_eq!(ev(&nil, "taT"), ev(&nil, "a"));
        assert_eq!(ev(&nil, "tbT"), ev(&nil, "ab"));
        // Solvable: t a t^-1 = a^2 b and t b t^-1 = ab.
        assert_eq!(ev(&sol, "taT"), ev(&sol, "aab"));
        assert_eq!(ev(&sol, "tbT"), ev(&sol, "ab"));
        // [a, b] = 1 in every group.
        for g in [TorusBundleGroup::z2(), nil, sol] {
            assert_eq!(ev(&g, "abAB"), GroupElement::identity());
        }
    }

    fn random_element(rng: &mut ChaCha8Rng, fiber: bool) -> GroupElement {
        GroupElement::new(
            rng.random_range(-50i64..=50),
            rng.random_range(-50i64..=50),
            if fiber {
                rng.random_range(-8i32..=8)
            } else {
                0
            },
        )
    }

    #[test]
    fn associativity_over_seeded_triples() {
        for group in [
            TorusBundleGroup::z2(),
            TorusBundleGroup::nil(),
            TorusBundleGroup::sol(),
        ] {
            let fiber = group.kind() == GroupKind::TorusBundle;
            let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0001);
            for _ in 0..1000 {
                let g = random_element(&mut rng, fiber);
                let h = random_element(&mut rng, fiber);
                let f = random_element(&mut rng, fiber);
                let left = group.multiply(group.multiply(g, h).unwrap(), f).unwrap();
                let right = group.multiply(g, group.multiply(h, f).unwrap()).unwrap();
                assert_eq!(left, right);
            }
        }
    }

    #[test]
    fn inverse_law_over_seeded_elements() {
        for group in [
            TorusBundleGroup::z2(),
            TorusBundleGroup::nil(),
            TorusBundleGroup::sol(),
        ] {
            let fiber = group.kind() == GroupKind::TorusBundle;
            let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0002);
            for _ in 0..1000 {
                let g = random_element(&mut rng, fiber);
                let gi = group.inverse(g).unwrap();
                assert_eq!(group.multiply(g, gi).unwrap(), GroupElement::identity());
                assert_eq!(group.multiply(gi, g).unwrap(), GroupElement::identity());
            }
        }
    }

    #[test]
    fn geometry_classification() {
        assert_eq!(TorusBundleGroup::z2().geometry(), Geometry::Euclidean);
        assert_eq!(TorusBundleGroup::nil().geometry(), Geometry::Nil);
        assert_eq!(TorusBundleGroup::sol().geometry(), Geometry::Sol);
        let flip = TorusBundleGroup::from_matrix(m(0, 1, 1, 0));
        assert_eq!(flip.geometry(), Geometry::Finite);
        let rot = TorusBundleGroup::from_matrix(m(0, -1, 1, 0));
        assert_eq!(rot.geometry(), Geometry::Finite);
        let flat = TorusBundleGroup::from_matrix(SL2Matrix::identity());
        assert_eq!(flat.geometry(), Geometry::Euclidean);
    }

    #[test]
    fn canonical_order_is_k_then_p_then_q() {
        let mut v = vec![e(1, 0, 0), e(0, 0, 1), e(0, 1, 0), e(0, 0, -1)];
        v.sort();
        assert_eq!(v, vec![e(0, 0, -1), e(0, 1, 0), e(1, 0, 0), e(0, 0, 1)]);
    }

    proptest! {
        #[test]
        fn identity_is_two_sided_neutral(p in -1000i64..1000, q in -1000i64..1000, k in -16i32..16) {
            for group in [TorusBundleGroup::nil(), TorusBundleGroup::sol()] {
                let g = e(p, q, k);
                let id = GroupElement::identity();
                prop_assert_eq!(group.multiply(g, id).unwrap(), g);
                prop_assert_eq!(group.multiply(id, g).unwrap(), g);
            }
        }

        #[test]
        fn double_inverse_is_identity_map(p in -1000i64..1000, q in -1000i64..1000, k in -16i32..16) {
            for group in [TorusBundleGroup::nil(), TorusBundleGroup::sol()] {
                let g = e(p, q, k);
                prop_assert_eq!(group.inverse(group.inverse(g).unwrap()).unwrap(), g);
            }
        }

        #[test]
        fn power_is_homomorphic(j in -12i32..12, k in -12i32..12) {
            for mat in [m(1, 1, 0, 1), m(2, 1, 1, 1)] {
                let lhs = mat.power(j + k).unwrap();
                let rhs = mat.power(j).unwrap().mul(&mat.power(k).unwrap()).unwrap();
                prop_assert_eq!(lhs, rhs);
            }
        }
    }
}
