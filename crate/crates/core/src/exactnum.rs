//! Exact rational scalars, 2×2 rational matrices and points of the real
//! projective line.
//!
//! Everything that feeds a classification is computed over these types, so
//! results are bit-exact and never depend on a rounding mode.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ExactError {
    #[error("cannot parse `{0}` as a rational number")]
    Parse(String),
    #[error("division by zero")]
    DivisionByZero,
    #[error("matrix is not invertible")]
    Singular,
    #[error("matrix has negative determinant")]
    OrientationReversing,
}

/// Arbitrary-precision rational, always in lowest terms with a positive
/// denominator.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Rational(BigRational);

impl Rational {
    pub fn new(num: impl Into<BigInt>, den: impl Into<BigInt>) -> Self {
        let den = den.into();
        assert!(!den.is_zero(), "zero denominator");
        Self::from_big(BigRational::new(num.into(), den))
    }

    pub fn from_big(r: BigRational) -> Self {
        let out = Rational(r);
        out.debug_check();
        out
    }

    pub fn integer(n: i64) -> Self {
        Rational(BigRational::from_integer(n.into()))
    }

    pub fn zero() -> Self {
        Rational(BigRational::zero())
    }

    pub fn one() -> Self {
        Rational(BigRational::one())
    }

    /// `2^k` for any integer `k`, negative exponents included.
    pub fn pow2(k: i64) -> Self {
        let p = BigInt::one() << k.unsigned_abs();
        if k >= 0 {
            Rational(BigRational::from_integer(p))
        } else {
            Rational(BigRational::new_raw(BigInt::one(), p))
        }
    }

    /// If `self = 2^k` exactly, returns `k`.
    pub fn log2_exact(&self) -> Option<i64> {
        if !self.is_positive() {
            return None;
        }
        let (n, d) = (self.numer(), self.denom());
        let is_pow2 = |x: &BigInt| x.is_positive() && (x & (x - BigInt::one())).is_zero();
        if d.is_one() && is_pow2(n) {
            Some(n.bits() as i64 - 1)
        } else if n.is_one() && is_pow2(d) {
            Some(-(d.bits() as i64 - 1))
        } else {
            None
        }
    }

    pub fn numer(&self) -> &BigInt {
        self.0.numer()
    }

    pub fn denom(&self) -> &BigInt {
        self.0.denom()
    }

    pub fn as_big(&self) -> &BigRational {
        &self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_positive(&self) -> bool {
        self.0.is_positive()
    }

    pub fn is_negative(&self) -> bool {
        self.0.is_negative()
    }

    pub fn is_integer(&self) -> bool {
        self.0.is_integer()
    }

    pub fn abs(&self) -> Self {
        Rational(self.0.abs())
    }

    pub fn recip(&self) -> Self {
        assert!(!self.is_zero(), "reciprocal of zero");
        Rational(self.0.recip())
    }

    pub fn checked_div(&self, other: &Rational) -> Result<Rational, ExactError> {
        if other.is_zero() {
            Err(ExactError::DivisionByZero)
        } else {
            Ok(self / other)
        }
    }

    pub fn floor(&self) -> Self {
        Rational(self.0.floor())
    }

    /// Representative of `self mod 1` in `[0, 1)`.
    pub fn fract_positive(&self) -> Self {
        self - &self.floor()
    }

    pub fn square(&self) -> Self {
        self * self
    }

    pub fn to_f64(&self) -> f64 {
        self.0.to_f64().unwrap_or_else(|| {
            // Fallback for huge numerators/denominators: scale by bit length.
            let shift = self.numer().bits() as i64 - self.denom().bits() as i64;
            let scaled = self / &Rational::pow2(shift);
            scaled.0.to_f64().unwrap_or(f64::NAN) * 2f64.powi(shift as i32)
        })
    }

    /// Exact value of a finite `f64`.
    pub fn from_f64(x: f64) -> Option<Self> {
        BigRational::from_float(x).map(Rational)
    }

    #[inline]
    fn debug_check(&self) {
        debug_assert!(self.denom().is_positive());
        debug_assert!(self.numer().gcd(self.denom()).is_one() || self.numer().is_zero());
    }
}

macro_rules! forward_binop {
    ($tr:ident, $method:ident) => {
        impl $tr<&Rational> for &Rational {
            type Output = Rational;
            fn $method(self, rhs: &Rational) -> Rational {
                Rational::from_big($tr::$method(&self.0, &rhs.0))
            }
        }
        impl $tr<Rational> for Rational {
            type Output = Rational;
            fn $method(self, rhs: Rational) -> Rational {
                Rational::from_big($tr::$method(self.0, rhs.0))
            }
        }
        impl $tr<&Rational> for Rational {
            type Output = Rational;
            fn $method(self, rhs: &Rational) -> Rational {
                Rational::from_big($tr::$method(self.0, &rhs.0))
            }
        }
        impl $tr<Rational> for &Rational {
            type Output = Rational;
            fn $method(self, rhs: Rational) -> Rational {
                Rational::from_big($tr::$method(&self.0, rhs.0))
            }
        }
    };
}

forward_binop!(Add, add);
forward_binop!(Sub, sub);
forward_binop!(Mul, mul);
forward_binop!(Div, div);

impl AddAssign<&Rational> for Rational {
    fn add_assign(&mut self, rhs: &Rational) {
        self.0 += &rhs.0;
    }
}

impl SubAssign<&Rational> for Rational {
    fn sub_assign(&mut self, rhs: &Rational) {
        self.0 -= &rhs.0;
    }
}

impl MulAssign<&Rational> for Rational {
    fn mul_assign(&mut self, rhs: &Rational) {
        self.0 *= &rhs.0;
    }
}

impl Neg for Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        Rational(-self.0)
    }
}

impl Neg for &Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        Rational(-&self.0)
    }
}

impl From<i64> for Rational {
    fn from(n: i64) -> Self {
        Rational::integer(n)
    }
}

impl From<BigInt> for Rational {
    fn from(n: BigInt) -> Self {
        Rational(BigRational::from_integer(n))
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.denom().is_one() {
            write!(f, "{}", self.numer())
        } else {
            write!(f, "{}/{}", self.numer(), self.denom())
        }
    }
}

impl fmt::Debug for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// Accepts `p/q`, integers, and plain decimals such as `0.125` (read exactly).
impl FromStr for Rational {
    type Err = ExactError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        let err = || ExactError::Parse(s.to_string());
        if let Some((n, d)) = s.split_once('/') {
            let n: BigInt = n.trim().parse().map_err(|_| err())?;
            let d: BigInt = d.trim().parse().map_err(|_| err())?;
            if d.is_zero() {
                return Err(ExactError::DivisionByZero);
            }
            return Ok(Rational::new(n, d));
        }
        if let Some((int, frac)) = s.split_once('.') {
            if frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) {
                return Err(err());
            }
            let negative = int.starts_with('-');
            let int_part: BigInt = match int {
                "" | "-" | "+" => BigInt::zero(),
                _ => int.parse().map_err(|_| err())?,
            };
            let frac_part: BigInt = frac.parse().map_err(|_| err())?;
            let scale = num_traits::pow(BigInt::from(10), frac.len());
            let mag = int_part.abs() * &scale + frac_part;
            let num = if negative { -mag } else { mag };
            return Ok(Rational::new(num, scale));
        }
        let n: BigInt = s.parse().map_err(|_| err())?;
        Ok(Rational::from(n))
    }
}

impl Serialize for Rational {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Rational {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Sum of many fractions, added pairwise so the intermediate denominators
/// stay small.
pub fn sum_balanced(mut terms: Vec<Rational>) -> Rational {
    while terms.len() > 1 {
        terms = terms.chunks(2).map(|pair| pair.iter().fold(Rational::zero(), |acc, x| acc + x)).collect();
    }
    terms.pop().unwrap_or_else(Rational::zero)
}

/// Shorthand used all over the crate and its tests.
pub fn q(num: i64, den: i64) -> Rational {
    Rational::new(num, den)
}

/// A point of RP¹ in the affine chart `[x:y] ↦ x/y`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub enum ProjPoint {
    Finite(Rational),
    Infinity,
}

impl ProjPoint {
    pub fn from_vector(x: &Rational, y: &Rational) -> Self {
        if y.is_zero() {
            assert!(!x.is_zero(), "zero vector has no projective class");
            ProjPoint::Infinity
        } else {
            ProjPoint::Finite(x / y)
        }
    }

    pub fn finite(&self) -> Option<&Rational> {
        match self {
            ProjPoint::Finite(r) => Some(r),
            ProjPoint::Infinity => None,
        }
    }

    pub fn is_infinity(&self) -> bool {
        matches!(self, ProjPoint::Infinity)
    }

    /// A representative vector `(x, y)`.
    pub fn vector(&self) -> (Rational, Rational) {
        match self {
            ProjPoint::Finite(r) => (r.clone(), Rational::one()),
            ProjPoint::Infinity => (Rational::one(), Rational::zero()),
        }
    }

    /// Position on the line with `∞` placed after every finite value. Arcs use
    /// this as the base of their cyclic order.
    pub fn linear_cmp(&self, other: &ProjPoint) -> Ordering {
        match (self, other) {
            (ProjPoint::Infinity, ProjPoint::Infinity) => Ordering::Equal,
            (ProjPoint::Infinity, _) => Ordering::Greater,
            (_, ProjPoint::Infinity) => Ordering::Less,
            (ProjPoint::Finite(a), ProjPoint::Finite(b)) => a.cmp(b),
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            ProjPoint::Finite(r) => r.to_f64(),
            ProjPoint::Infinity => f64::INFINITY,
        }
    }
}

impl From<Rational> for ProjPoint {
    fn from(r: Rational) -> Self {
        ProjPoint::Finite(r)
    }
}

impl fmt::Display for ProjPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ProjPoint::Finite(r) => write!(f, "{r}"),
            ProjPoint::Infinity => write!(f, "inf"),
        }
    }
}

impl fmt::Debug for ProjPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for ProjPoint {
    type Err = ExactError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "inf" | "Inf" | "infinity" | "∞" => Ok(ProjPoint::Infinity),
            other => other.parse().map(ProjPoint::Finite),
        }
    }
}

impl Serialize for ProjPoint {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

/// Row-major 2×2 rational matrix `[[a, b], [c, d]]`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Mat2 {
    pub a: Rational,
    pub b: Rational,
    pub c: Rational,
    pub d: Rational,
}

impl Mat2 {
    pub fn new(a: Rational, b: Rational, c: Rational, d: Rational) -> Self {
        Mat2 { a, b, c, d }
    }

    pub fn from_ints(a: i64, b: i64, c: i64, d: i64) -> Self {
        Mat2::new(a.into(), b.into(), c.into(), d.into())
    }

    pub fn identity() -> Self {
        Mat2::from_ints(1, 0, 0, 1)
    }

    pub fn scalar(k: Rational) -> Self {
        Mat2::new(k.clone(), Rational::zero(), Rational::zero(), k)
    }

    pub fn det(&self) -> Rational {
        &self.a * &self.d - &self.b * &self.c
    }

    pub fn trace(&self) -> Rational {
        &self.a + &self.d
    }

    pub fn is_scalar(&self) -> bool {
        self.b.is_zero() && self.c.is_zero() && self.a == self.d
    }

    pub fn inverse(&self) -> Result<Mat2, ExactError> {
        let det = self.det();
        if det.is_zero() {
            return Err(ExactError::Singular);
        }
        Ok(Mat2::new(&self.d / &det, -(&self.b / &det), -(&self.c / &det), &self.a / &det))
    }

    pub fn scale(&self, k: &Rational) -> Mat2 {
        Mat2::new(&self.a * k, &self.b * k, &self.c * k, &self.d * k)
    }

    /// Matrix times column vector.
    pub fn apply(&self, x: &Rational, y: &Rational) -> (Rational, Rational) {
        (&self.a * x + &self.b * y, &self.c * x + &self.d * y)
    }

    pub fn pow(&self, k: u32) -> Mat2 {
        (0..k).fold(Mat2::identity(), |acc, _| mat_mul(&acc, self))
    }
}

impl Mul<&Mat2> for &Mat2 {
    type Output = Mat2;
    fn mul(self, rhs: &Mat2) -> Mat2 {
        mat_mul(self, rhs)
    }
}

impl fmt::Display for Mat2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[[{}, {}], [{}, {}]]", self.a, self.b, self.c, self.d)
    }
}

impl fmt::Debug for Mat2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

pub fn mat_mul(m1: &Mat2, m2: &Mat2) -> Mat2 {
    Mat2::new(
        &m1.a * &m2.a + &m1.b * &m2.c,
        &m1.a * &m2.b + &m1.b * &m2.d,
        &m1.c * &m2.a + &m1.d * &m2.c,
        &m1.c * &m2.b + &m1.d * &m2.d,
    )
}

/// Projective action `[x:y] ↦ [ax+by : cx+dy]`.
///
/// Panics on a singular matrix when the image vector vanishes.
pub fn mat_act(m: &Mat2, p: &ProjPoint) -> ProjPoint {
    let (x, y) = p.vector();
    let (u, v) = m.apply(&x, &y);
    ProjPoint::from_vector(&u, &v)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum MatrixClass {
    Identity,
    Elliptic,
    Parabolic,
    Hyperbolic,
}

impl fmt::Display for MatrixClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// Type of `m` as an element of PSL(2,ℝ): compare `tr²` with `4·det`, which is
/// `|tr|/√det` against 2 without taking a square root.
pub fn classify_matrix(m: &Mat2) -> Result<MatrixClass, ExactError> {
    let det = m.det();
    if det.is_zero() {
        return Err(ExactError::Singular);
    }
    if det.is_negative() {
        return Err(ExactError::OrientationReversing);
    }
    if m.is_scalar() {
        return Ok(MatrixClass::Identity);
    }
    let four_det = &det * &Rational::integer(4);
    Ok(match m.trace().square().cmp(&four_det) {
        Ordering::Less => MatrixClass::Elliptic,
        Ordering::Equal => MatrixClass::Parabolic,
        Ordering::Greater => MatrixClass::Hyperbolic,
    })
}
