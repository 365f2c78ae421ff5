//! The group `Γ = ⟨A, B⟩` acting on directions, written in the slope
//! coordinate `p = x/y` of RP¹.
//!
//! `A = [[1, 6], [0, 1]]` fixes ∞ and `B = [[1, 0], [3/2, 1]]` fixes 0. Every
//! rational slope is either in the orbit of one of these two cusps or can be
//! pushed by ping-pong into the fundamental interval `[1, 4)`.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigInt;
use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::exactnum::{classify_matrix, mat_act, q, sum_balanced, Mat2, MatrixClass, ProjPoint, Rational};
use crate::surface;

pub const DEFAULT_REDUCE_DEPTH: usize = 64;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SchottkyError {
    #[error("intersection matrix is empty or ragged")]
    MalformedMatrix,
    #[error("Gram matrices of size {0}x{0} are not supported (at most 2x2)")]
    UnsupportedDimension(usize),
    #[error("Gram matrix is reducible")]
    Reducible,
    #[error("matrix has a nonpositive determinant")]
    NotOrientationPreserving,
}

pub fn generators() -> (Mat2, Mat2, Mat2) {
    (
        Mat2::from_ints(1, 6, 0, 1),
        Mat2::new(q(1, 1), q(0, 1), q(3, 2), q(1, 1)),
        Mat2::from_ints(-1, 0, 0, -1),
    )
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Generator {
    A,
    B,
}

impl Generator {
    /// Matrix of `self^exp`.
    pub fn power(self, exp: i64) -> Mat2 {
        match self {
            Generator::A => Mat2::new(q(1, 1), Rational::integer(6 * exp), q(0, 1), q(1, 1)),
            Generator::B => Mat2::new(q(1, 1), q(0, 1), q(3 * exp, 2), q(1, 1)),
        }
    }
}

/// One of `A, A⁻¹, B, B⁻¹`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Letter {
    pub generator: Generator,
    pub inverse: bool,
}

impl Letter {
    pub const ALL: [Letter; 4] = [
        Letter { generator: Generator::A, inverse: false },
        Letter { generator: Generator::A, inverse: true },
        Letter { generator: Generator::B, inverse: false },
        Letter { generator: Generator::B, inverse: true },
    ];

    pub fn inverted(self) -> Letter {
        Letter { inverse: !self.inverse, ..self }
    }

    pub fn exponent(self) -> i64 {
        if self.inverse {
            -1
        } else {
            1
        }
    }

    pub fn matrix(self) -> Mat2 {
        self.generator.power(self.exponent())
    }
}

/// A freely reduced word in `A, B`, stored as syllables `(generator, exponent)`
/// in product order: the word `A² B⁻¹` acts by applying `B⁻¹` first.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct GroupWord {
    syllables: Vec<(Generator, i64)>,
}

impl GroupWord {
    pub fn identity() -> Self {
        GroupWord::default()
    }

    pub fn from_syllables(syllables: impl IntoIterator<Item = (Generator, i64)>) -> Self {
        let mut w = GroupWord::identity();
        for (g, e) in syllables {
            w.push_right(g, e);
        }
        w
    }

    pub fn from_letters(letters: &[Letter]) -> Self {
        Self::from_syllables(letters.iter().map(|l| (l.generator, l.exponent())))
    }

    pub fn syllables(&self) -> &[(Generator, i64)] {
        &self.syllables
    }

    pub fn letters(&self) -> Vec<Letter> {
        self.syllables
            .iter()
            .flat_map(|&(generator, e)| {
                std::iter::repeat_n(Letter { generator, inverse: e < 0 }, e.unsigned_abs() as usize)
            })
            .collect()
    }

    /// Number of letters.
    pub fn len(&self) -> usize {
        self.syllables.iter().map(|(_, e)| e.unsigned_abs() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.syllables.is_empty()
    }

    pub fn is_identity(&self) -> bool {
        self.is_empty()
    }

    fn push_right(&mut self, g: Generator, e: i64) {
        if e == 0 {
            return;
        }
        match self.syllables.last_mut() {
            Some((last, exp)) if *last == g => {
                *exp += e;
                if *exp == 0 {
                    self.syllables.pop();
                }
            }
            _ => self.syllables.push((g, e)),
        }
    }

    /// `g^e · self`.
    pub fn prepend(&self, g: Generator, e: i64) -> GroupWord {
        Self::from_syllables(std::iter::once((g, e)).chain(self.syllables.iter().copied()))
    }

    pub fn compose(&self, other: &GroupWord) -> GroupWord {
        Self::from_syllables(self.syllables.iter().chain(other.syllables.iter()).copied())
    }

    pub fn inverse(&self) -> GroupWord {
        Self::from_syllables(self.syllables.iter().rev().map(|&(g, e)| (g, -e)))
    }

    pub fn matrix(&self) -> Mat2 {
        self.syllables.iter().fold(Mat2::identity(), |acc, &(g, e)| &acc * &g.power(e))
    }

    pub fn act(&self, p: &ProjPoint) -> ProjPoint {
        mat_act(&self.matrix(), p)
    }
}

impl fmt::Display for GroupWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.syllables.is_empty() {
            return f.write_str("e");
        }
        for (i, (g, e)) in self.syllables.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{g:?}")?;
            if *e != 1 {
                write!(f, "^{e}")?;
            }
        }
        Ok(())
    }
}

impl Serialize for GroupWord {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum ReductionStatus {
    Reduced,
    Cusp,
    DepthCapReached,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ReductionResult {
    pub status: ReductionStatus,
    pub point: ProjPoint,
    /// Group element with `word · input = point`.
    pub word: GroupWord,
}

fn ceil(x: &Rational) -> Rational {
    -(-x).floor()
}

fn to_i64(x: &Rational) -> i64 {
    i64::try_from(x.numer()).expect("reduction exponent fits in i64")
}

/// Ping-pong reduction into `[1, 4)`. Each applied generator power counts
/// as one unit of depth.
pub fn reduce_to_fundamental(p: &ProjPoint, depth_cap: usize) -> ReductionResult {
    let (one, four) = (Rational::one(), Rational::integer(4));
    let mut point = p.clone();
    let mut word = GroupWord::identity();
    let mut depth = 0;
    loop {
        let x = match &point {
            ProjPoint::Infinity => return ReductionResult { status: ReductionStatus::Cusp, point, word },
            ProjPoint::Finite(x) if x.is_zero() => {
                return ReductionResult { status: ReductionStatus::Cusp, point, word }
            }
            ProjPoint::Finite(x) => x.clone(),
        };
        if x >= one && x < four {
            return ReductionResult { status: ReductionStatus::Reduced, point, word };
        }
        if depth >= depth_cap {
            return ReductionResult { status: ReductionStatus::DepthCapReached, point, word };
        }
        let six = Rational::integer(6);
        let three_halves = q(3, 2);
        let (g, e) = if x >= four {
            (Generator::A, -(to_i64(&((&x - &four) / &six).floor()) + 1))
        } else if x < Rational::integer(-2) {
            (Generator::A, to_i64(&ceil(&((Rational::integer(-2) - &x) / &six))))
        } else if x.is_positive() {
            // work in q = 1/p, where B acts as q ↦ q + 3/2
            let inv = x.recip();
            (Generator::B, -to_i64(&ceil(&((&inv - &one) / &three_halves))))
        } else {
            let inv = x.recip();
            (Generator::B, to_i64(&((&q(-1, 2) - &inv) / &three_halves).floor()) + 1)
        };
        point = mat_act(&g.power(e), &point);
        word = word.prepend(g, e);
        depth += 1;
    }
}

/// `a + b√d` with rational `a, b` and rational `d ≥ 0`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct QuadSurd {
    pub a: Rational,
    pub b: Rational,
    pub d: Rational,
}

fn rational_sqrt(x: &Rational) -> Option<Rational> {
    let exact = |n: &BigInt| {
        let r = n.sqrt();
        (&r * &r == *n).then_some(r)
    };
    if x.is_negative() {
        return None;
    }
    Some(Rational::from_big(num_rational::BigRational::new(exact(x.numer())?, exact(x.denom())?)))
}

impl QuadSurd {
    pub fn new(a: Rational, b: Rational, d: Rational) -> Self {
        assert!(!d.is_negative(), "negative radicand");
        match rational_sqrt(&d) {
            Some(root) => QuadSurd { a: a + &b * &root, b: Rational::zero(), d: Rational::zero() },
            None if b.is_zero() => QuadSurd { a, b, d: Rational::zero() },
            None => QuadSurd { a, b, d },
        }
    }

    pub fn rational(a: Rational) -> Self {
        QuadSurd { a, b: Rational::zero(), d: Rational::zero() }
    }

    pub fn as_rational(&self) -> Option<&Rational> {
        self.b.is_zero().then_some(&self.a)
    }

    pub fn to_f64(&self) -> f64 {
        self.a.to_f64() + self.b.to_f64() * self.d.to_f64().sqrt()
    }

    /// Sign of `a + b√d`.
    pub fn signum(&self) -> Ordering {
        let sa = self.a.cmp(&Rational::zero());
        let sb = self.b.cmp(&Rational::zero());
        if sb == Ordering::Equal || sa == sb {
            return if sa == Ordering::Equal { sb } else { sa };
        }
        if sa == Ordering::Equal {
            return sb;
        }
        // opposite signs: compare a² with b²d
        match self.a.square().cmp(&(self.b.square() * &self.d)) {
            Ordering::Greater => sa,
            Ordering::Less => sb,
            Ordering::Equal => Ordering::Equal,
        }
    }

    pub fn cmp_rational(&self, r: &Rational) -> Ordering {
        QuadSurd { a: &self.a - r, b: self.b.clone(), d: self.d.clone() }.signum()
    }

    /// Comparison in the linear order of slopes with ∞ as the maximum.
    pub fn cmp_point(&self, p: &ProjPoint) -> Ordering {
        match p {
            ProjPoint::Infinity => Ordering::Less,
            ProjPoint::Finite(r) => self.cmp_rational(r),
        }
    }
}

impl fmt::Display for QuadSurd {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.b.is_zero() {
            write!(f, "{}", self.a)
        } else {
            write!(f, "{} + {}*sqrt({})", self.a, self.b, self.d)
        }
    }
}

/// Fixed points of a hyperbolic element, as surds (or ∞ when `c = 0`).
pub fn hyperbolic_fixed_points(m: &Mat2) -> Option<[FixedPoint; 2]> {
    if classify_matrix(m).ok()? != MatrixClass::Hyperbolic {
        return None;
    }
    let disc = m.trace().square() - &(Rational::integer(4) * m.det());
    if m.c.is_zero() {
        let other = &m.b / &(&m.d - &m.a);
        return Some([FixedPoint::Infinity, FixedPoint::Surd(QuadSurd::rational(other))]);
    }
    let two_c = &m.c * &Rational::integer(2);
    let base = (&m.a - &m.d) / &two_c;
    let coef = two_c.recip();
    Some([
        FixedPoint::Surd(QuadSurd::new(base.clone(), coef.clone(), disc.clone())),
        FixedPoint::Surd(QuadSurd::new(base, -coef, disc)),
    ])
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FixedPoint {
    Surd(QuadSurd),
    Infinity,
}

/// Closed arc of RP¹ from `lo` to `hi` in the increasing direction (passing
/// through ∞ when `lo > hi`).
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Arc {
    pub lo: ProjPoint,
    pub hi: ProjPoint,
}

impl Arc {
    pub fn new(lo: ProjPoint, hi: ProjPoint) -> Self {
        Arc { lo, hi }
    }

    fn wraps(&self) -> bool {
        self.lo.linear_cmp(&self.hi) == Ordering::Greater
    }

    pub fn contains(&self, p: &ProjPoint) -> bool {
        let above = p.linear_cmp(&self.lo) != Ordering::Less;
        let below = p.linear_cmp(&self.hi) != Ordering::Greater;
        if self.wraps() {
            above || below
        } else {
            above && below
        }
    }

    pub fn contains_fixed_point(&self, fp: &FixedPoint) -> bool {
        let (above, below) = match fp {
            FixedPoint::Infinity => (true, matches!(self.hi, ProjPoint::Infinity)),
            FixedPoint::Surd(s) => {
                (s.cmp_point(&self.lo) != Ordering::Less, s.cmp_point(&self.hi) != Ordering::Greater)
            }
        };
        if self.wraps() {
            above || below
        } else {
            above && below
        }
    }

    /// Position along the arc measured from `lo`, as a sortable key.
    fn key<'a>(&self, p: &'a ProjPoint) -> (bool, &'a ProjPoint) {
        (p.linear_cmp(&self.lo) == Ordering::Less, p)
    }

    pub fn contains_arc(&self, other: &Arc) -> bool {
        if !self.contains(&other.lo) || !self.contains(&other.hi) {
            return false;
        }
        let (k1, k2) = (self.key(&other.lo), self.key(&other.hi));
        match k1.0.cmp(&k2.0) {
            Ordering::Less => true,
            Ordering::Greater => false,
            Ordering::Equal => k1.1.linear_cmp(k2.1) != Ordering::Greater,
        }
    }

    pub fn image(&self, m: &Mat2) -> Arc {
        Arc { lo: mat_act(m, &self.lo), hi: mat_act(m, &self.hi) }
    }

    /// Length in the chart `φ(p) = 1/(p − 5/2)`. The point 5/2 sits in the
    /// gap `(2, 3)` between the Schottky domains, so the chart is finite on
    /// every arc produced by [`limit_set_approx`].
    pub fn chart_length(&self) -> Rational {
        let phi = |p: &ProjPoint| match p {
            ProjPoint::Infinity => Rational::zero(),
            ProjPoint::Finite(x) => (x - &q(5, 2)).recip(),
        };
        phi(&self.lo) - phi(&self.hi)
    }
}

impl fmt::Display for Arc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}..{}", self.lo, self.hi)
    }
}

/// Schottky domain attached to a letter: `g` maps the complement of the
/// domain of `g⁻¹` into the domain of `g`.
pub fn schottky_domain(letter: Letter) -> Arc {
    let f = |n, d| ProjPoint::Finite(q(n, d));
    match (letter.generator, letter.inverse) {
        (Generator::A, false) => Arc::new(f(3, 1), ProjPoint::Infinity),
        (Generator::A, true) => Arc::new(ProjPoint::Infinity, f(-3, 1)),
        (Generator::B, false) => Arc::new(f(0, 1), f(2, 1)),
        (Generator::B, true) => Arc::new(f(-1, 1), f(0, 1)),
    }
}

/// The `4·3^{depth−1}` arcs `x₁⋯x_{d−1}(D_{x_d})` over reduced words of length
/// `depth`, sorted by their left end.
pub fn limit_set_approx(depth: usize) -> Vec<Arc> {
    assert!(depth >= 1, "depth must be at least 1");
    let mut level: Vec<(Mat2, Letter)> = Letter::ALL.iter().map(|&l| (Mat2::identity(), l)).collect();
    for _ in 1..depth {
        level = level
            .into_iter()
            .flat_map(|(prefix, last)| {
                let next_prefix = &prefix * &last.matrix();
                Letter::ALL
                    .into_iter()
                    .filter(move |&l| l != last.inverted())
                    .map(move |l| (next_prefix.clone(), l))
            })
            .collect();
    }
    let mut arcs: Vec<Arc> =
        level.iter().map(|(prefix, last)| schottky_domain(*last).image(prefix)).collect();
    arcs.sort_by(|a, b| a.lo.linear_cmp(&b.lo));
    arcs
}

pub fn total_chart_length(arcs: &[Arc]) -> Rational {
    sum_balanced(arcs.iter().map(Arc::chart_length).collect())
}

/// `[[a, b√μ], [c√μ, d]]` with rational `a, b, c, d`.
#[derive(Clone, Debug, PartialEq)]
pub struct RootMatrix {
    pub a: Rational,
    pub b: Rational,
    pub c: Rational,
    pub d: Rational,
    pub mu: QuadSurd,
}

impl RootMatrix {
    pub fn classify(&self) -> Result<MatrixClass, SchottkyError> {
        // det = ad − bc·μ, possibly irrational
        let bc = &self.b * &self.c;
        let det = QuadSurd {
            a: &self.a * &self.d - &bc * &self.mu.a,
            b: -(&bc * &self.mu.b),
            d: self.mu.d.clone(),
        };
        if det.signum() != Ordering::Greater {
            return Err(SchottkyError::NotOrientationPreserving);
        }
        if self.b.is_zero() && self.c.is_zero() && self.a == self.d {
            return Ok(MatrixClass::Identity);
        }
        let tr2 = (&self.a + &self.d).square();
        let four = Rational::integer(4);
        let diff = QuadSurd { a: &tr2 - &(&four * &det.a), b: -(&four * &det.b), d: det.d.clone() };
        Ok(match diff.signum() {
            Ordering::Less => MatrixClass::Elliptic,
            Ordering::Equal => MatrixClass::Parabolic,
            Ordering::Greater => MatrixClass::Hyperbolic,
        })
    }
}

impl fmt::Display for RootMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[[{}, {}*sqrt(mu)], [{}*sqrt(mu), {}]]", self.a, self.b, self.c, self.d)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ThurstonRep {
    pub mu: QuadSurd,
    pub twist_a: RootMatrix,
    pub twist_b: RootMatrix,
}

/// Perron eigenvalue `μ` of the Gram matrix of the intersection matrix `N`
/// and the two multi-twist representation matrices. The smaller of `N·Nᵗ`
/// and `Nᵗ·N` is used; both share their nonzero spectrum.
pub fn thurston_mu(n: &[Vec<u64>]) -> Result<ThurstonRep, SchottkyError> {
    let rows = n.len();
    let cols = n.first().map_or(0, Vec::len);
    if rows == 0 || cols == 0 || n.iter().any(|r| r.len() != cols) {
        return Err(SchottkyError::MalformedMatrix);
    }
    let dim = rows.min(cols);
    let entry = |i: usize, j: usize| -> Rational {
        let sum: u64 = if rows <= cols {
            (0..cols).map(|k| n[i][k] * n[j][k]).sum()
        } else {
            (0..rows).map(|k| n[k][i] * n[k][j]).sum()
        };
        Rational::integer(sum as i64)
    };
    let mu = match dim {
        1 => {
            let g = entry(0, 0);
            if g.is_zero() {
                return Err(SchottkyError::Reducible);
            }
            QuadSurd::rational(g)
        }
        2 => {
            let (p, off, r) = (entry(0, 0), entry(0, 1), entry(1, 1));
            if off.is_zero() {
                return Err(SchottkyError::Reducible);
            }
            let half = q(1, 2);
            let disc = (&p - &r).square() + Rational::integer(4) * off.square();
            QuadSurd::new((&p + &r) * &half, half, disc)
        }
        d => return Err(SchottkyError::UnsupportedDimension(d)),
    };
    let one = Rational::one();
    let twist_a =
        RootMatrix { a: one.clone(), b: one.clone(), c: Rational::zero(), d: one.clone(), mu: mu.clone() };
    let twist_b = RootMatrix { a: one.clone(), b: Rational::zero(), c: -one.clone(), d: one, mu: mu.clone() };
    Ok(ThurstonRep { mu, twist_a, twist_b })
}

#[derive(Clone, Debug, PartialEq)]
pub struct CheckItem {
    pub name: String,
    pub detail: String,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct VeechReport {
    pub items: Vec<CheckItem>,
}

impl VeechReport {
    pub fn all_pass(&self) -> bool {
        self.items.iter().all(|i| i.pass)
    }
}

impl fmt::Display for VeechReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for item in &self.items {
            let tag = if item.pass { "PASS" } else { "FAIL" };
            writeln!(f, "{tag} {}: {}", item.name, item.detail)?;
        }
        Ok(())
    }
}

/// Self-checks on the generators, including the cylinder moduli measured on
/// the suspension model.
pub fn veech_checks() -> VeechReport {
    let (a, b, minus_id) = generators();
    let mut items = Vec::new();
    let mut check = |name: &str, detail: String, pass: bool| {
        items.push(CheckItem { name: name.to_string(), detail, pass })
    };
    let class = |m: &Mat2| classify_matrix(m).map_or_else(|e| e.to_string(), |c| c.to_string());

    let horizontal_twist = a.a == Rational::one() && a.d == Rational::one() && a.c.is_zero();
    check("A is a horizontal twist", format!("A = {a}"), horizontal_twist);
    check("modulus slot of A", format!("{}", a.b), a.b == Rational::integer(6));
    let vertical_twist = b.a == Rational::one() && b.d == Rational::one() && b.b.is_zero();
    check("B is a vertical twist", format!("B = {b}"), vertical_twist);
    check("modulus slot of B", format!("{}", b.c), b.c == q(3, 2));
    check("A parabolic", class(&a), class(&a) == "Parabolic");
    check("B parabolic", class(&b), class(&b) == "Parabolic");
    let ab_inv = &a * &b.inverse().expect("B is invertible");
    check(
        "AB^-1 hyperbolic",
        format!("{} (trace {})", class(&ab_inv), ab_inv.trace()),
        class(&ab_inv) == "Hyperbolic",
    );
    let expected = Mat2::new(q(-8, 1), q(6, 1), q(-3, 2), q(1, 1));
    check("AB^-1 matrix", format!("{ab_inv}"), ab_inv == expected);
    check("-Id acts trivially", class(&minus_id), minus_id.is_scalar() && class(&minus_id) == "Identity");
    let pp = |n: i64| ProjPoint::Finite(Rational::integer(n));
    let ping_a = mat_act(&a, &pp(-3)) == pp(3) && mat_act(&a, &ProjPoint::Infinity) == ProjPoint::Infinity;
    check("A maps the complement of D(A^-1) onto D(A)", "A(-3) = 3, A(inf) = inf".into(), ping_a);
    let ping_b = mat_act(&b, &pp(-1)) == pp(2) && mat_act(&b, &pp(0)) == pp(0);
    check("B maps the complement of D(B^-1) onto D(B)", "B(-1) = 2, B(0) = 0".into(), ping_b);

    let horizontal = surface::horizontal_moduli();
    check(
        "horizontal cylinders of the surface",
        format!("moduli {horizontal:?}"),
        horizontal == vec![Rational::integer(6)],
    );
    let vertical = surface::vertical_moduli();
    check(
        "vertical cylinders of the surface",
        format!("moduli {vertical:?}"),
        vertical == vec![q(3, 2), q(3, 2)],
    );
    VeechReport { items }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn pt(n: i64, d: i64) -> ProjPoint {
        ProjPoint::Finite(q(n, d))
    }

    fn letter(g: Generator, inverse: bool) -> Letter {
        Letter { generator: g, inverse }
    }

    #[test]
    fn generator_actions() {
        let (a, b, minus_id) = generators();
        assert_eq!(mat_act(&a, &pt(1, 3)), pt(19, 3));
        assert_eq!(mat_act(&a, &pt(-3, 1)), pt(3, 1));
        assert_eq!(mat_act(&b, &pt(-1, 1)), pt(2, 1));
        assert_eq!(mat_act(&minus_id, &pt(5, 7)), pt(5, 7));
        let ab_inv = &a * &b.inverse().unwrap();
        assert_eq!(ab_inv, Mat2::new(q(-8, 1), q(6, 1), q(-3, 2), q(1, 1)));
        assert_eq!(mat_act(&ab_inv, &pt(1, 1)), pt(4, 1));
    }

    #[test]
    fn group_word_reduction() {
        let w = GroupWord::from_syllables([(Generator::A, 2), (Generator::A, -2), (Generator::B, 1)]);
        assert_eq!(w.syllables(), &[(Generator::B, 1)]);
        let w = GroupWord::from_letters(&[
            letter(Generator::A, false),
            letter(Generator::B, true),
            letter(Generator::B, true),
        ]);
        assert_eq!(w.to_string(), "A B^-2");
        assert_eq!(w.len(), 3);
        assert_eq!(w.letters().len(), 3);
        assert!(w.compose(&w.inverse()).is_identity());
        assert_eq!(GroupWord::identity().to_string(), "e");
    }

    #[test]
    fn reduction_examples() {
        let r = reduce_to_fundamental(&pt(3, 2), 64);
        assert_eq!((r.status, r.point.clone()), (ReductionStatus::Reduced, pt(3, 2)));
        assert!(r.word.is_identity());

        let r = reduce_to_fundamental(&pt(6, 1), 64);
        assert_eq!(r.status, ReductionStatus::Cusp);
        assert_eq!(r.point, pt(0, 1));
        assert_eq!(r.word.syllables(), &[(Generator::A, -1)]);

        let one = reduce_to_fundamental(&pt(1, 1), 64);
        let four = reduce_to_fundamental(&pt(4, 1), 64);
        assert_eq!(one.point, four.point);
        assert_eq!(four.word.act(&pt(4, 1)), four.point);

        assert_eq!(reduce_to_fundamental(&ProjPoint::Infinity, 64).status, ReductionStatus::Cusp);
    }

    #[test]
    fn depth_cap() {
        let r = reduce_to_fundamental(&pt(1234567, 7654321), 1);
        assert_eq!(r.status, ReductionStatus::DepthCapReached);
    }

    #[test]
    fn free_words_are_never_scalar() {
        let mut words: Vec<Vec<Letter>> = Letter::ALL.iter().map(|&l| vec![l]).collect();
        for _ in 1..8 {
            for w in &words {
                assert!(!GroupWord::from_letters(w).matrix().is_scalar());
            }
            words = words
                .iter()
                .flat_map(|w| {
                    let last = *w.last().unwrap();
                    Letter::ALL.into_iter().filter(move |&l| l != last.inverted()).map(move |l| {
                        let mut v = w.clone();
                        v.push(l);
                        v
                    })
                })
                .collect();
        }
        for w in &words {
            assert!(!GroupWord::from_letters(w).matrix().is_scalar());
        }
    }

    #[test]
    fn ping_pong_domains() {
        for l in Letter::ALL {
            let target = schottky_domain(l);
            let source = schottky_domain(l.inverted());
            // complement of the source arc, traversed from its hi end to its lo end
            let complement = Arc::new(source.hi.clone(), source.lo.clone());
            assert_eq!(complement.image(&l.matrix()), target, "letter {l:?}");
        }
    }

    #[test]
    fn limit_set_counts_and_lengths() {
        let d1 = limit_set_approx(1);
        assert_eq!(d1.len(), 4);
        assert_eq!(total_chart_length(&d1), q(2, 1) + q(2, 11) + q(4, 35) + q(8, 5));
        assert!(d1.iter().any(|a| a.contains(&ProjPoint::Infinity)));
        assert!(d1.iter().any(|a| a.contains(&pt(0, 1))));
        let mut prev = total_chart_length(&d1);
        for depth in 2..=5 {
            let arcs = limit_set_approx(depth);
            assert_eq!(arcs.len(), 4 * 3usize.pow(depth as u32 - 1));
            let total = total_chart_length(&arcs);
            assert!(total < prev);
            prev = total;
        }
    }

    #[test]
    fn limit_set_nesting() {
        for depth in 1..=4 {
            let outer = limit_set_approx(depth);
            for arc in limit_set_approx(depth + 1) {
                assert!(outer.iter().any(|o| o.contains_arc(&arc)), "{arc} at depth {}", depth + 1);
            }
        }
    }

    #[test]
    fn hyperbolic_fixed_points_lie_in_limit_set() {
        let (a, b, _) = generators();
        let ab_inv = &a * &b.inverse().unwrap();
        let fps = hyperbolic_fixed_points(&ab_inv).unwrap();
        // 3 ± √5
        for fp in &fps {
            let FixedPoint::Surd(s) = fp else { panic!() };
            assert_eq!(s.a, q(3, 1));
            assert_eq!(s.b.square() * &s.d, q(5, 1));
        }
        let arcs = limit_set_approx(3);
        let mut words: Vec<Vec<Letter>> = vec![vec![]];
        for _ in 0..3 {
            words = words
                .iter()
                .flat_map(|w| {
                    Letter::ALL.into_iter().filter(move |&l| w.last() != Some(&l.inverted())).map(move |l| {
                        let mut v = w.clone();
                        v.push(l);
                        v
                    })
                })
                .collect();
            for w in &words {
                let Some(fps) = hyperbolic_fixed_points(&GroupWord::from_letters(w).matrix()) else {
                    continue;
                };
                for fp in &fps {
                    assert!(arcs.iter().any(|arc| arc.contains_fixed_point(fp)), "{w:?}");
                }
            }
        }
    }

    #[test]
    fn quad_surd_ordering() {
        let s = QuadSurd::new(q(3, 1), q(-1, 1), q(5, 1));
        assert_eq!(s.cmp_rational(&q(3, 4)), Ordering::Greater);
        assert_eq!(s.cmp_rational(&q(77, 100)), Ordering::Less);
        assert_eq!(QuadSurd::new(q(1, 1), q(1, 1), q(9, 4)).as_rational(), Some(&q(5, 2)));
    }

    #[test]
    fn thurston_examples() {
        let rep = thurston_mu(&[vec![2, 2]]).unwrap();
        assert_eq!(rep.mu.as_rational(), Some(&q(8, 1)));
        assert_eq!(rep.twist_a.classify().unwrap(), MatrixClass::Parabolic);
        assert_eq!(rep.twist_b.classify().unwrap(), MatrixClass::Parabolic);
        // the 2x2 Gram matrix [[4, 4], [4, 4]] has the same Perron eigenvalue
        let rep = thurston_mu(&[vec![2], vec![2]]).unwrap();
        assert_eq!(rep.mu.as_rational(), Some(&q(8, 1)));
        assert_eq!(thurston_mu(&[vec![1]]).unwrap().mu.as_rational(), Some(&q(1, 1)));
        let rep = thurston_mu(&[vec![1, 0], vec![1, 1]]).unwrap();
        assert!(rep.mu.as_rational().is_none());
        assert!((rep.mu.to_f64() - (3.0 + 5f64.sqrt()) / 2.0).abs() < 1e-12);
        assert_eq!(thurston_mu(&[vec![1, 0], vec![0, 1]]), Err(SchottkyError::Reducible));
        assert_eq!(thurston_mu(&[vec![0]]), Err(SchottkyError::Reducible));
        assert!(thurston_mu(&[vec![1, 1, 1], vec![1, 1, 1], vec![1, 1, 1]]).is_err());
    }

    #[test]
    fn veech_report_passes() {
        let report = veech_checks();
        assert!(report.all_pass(), "{report}");
    }

    fn slope() -> impl Strategy<Value = ProjPoint> {
        prop_oneof![
            1 => Just(ProjPoint::Infinity),
            20 => (-400i64..400, 1i64..60).prop_map(|(n, d)| ProjPoint::Finite(q(n, d))),
        ]
    }

    fn word() -> impl Strategy<Value = GroupWord> {
        proptest::collection::vec(0usize..4, 0..=3)
            .prop_map(|idx| GroupWord::from_letters(&idx.iter().map(|&i| Letter::ALL[i]).collect::<Vec<_>>()))
    }

    proptest! {
        #[test]
        fn reduction_is_consistent(p in slope()) {
            let r = reduce_to_fundamental(&p, 64);
            prop_assert_eq!(r.word.act(&p), r.point.clone());
            if r.status == ReductionStatus::Reduced {
                let x = r.point.finite().unwrap();
                prop_assert!(x >= &q(1, 1) && x < &q(4, 1));
            }
            prop_assert!(r.status != ReductionStatus::DepthCapReached);
        }

        #[test]
        fn reduction_is_equivariant(p in slope(), g in word()) {
            let direct = reduce_to_fundamental(&p, 64);
            let moved = reduce_to_fundamental(&g.act(&p), 64);
            prop_assert_eq!(direct.status, moved.status);
            if direct.status == ReductionStatus::Reduced {
                prop_assert_eq!(direct.point, moved.point);
            }
        }
    }
}
