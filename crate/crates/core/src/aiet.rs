//! Affine interval exchange transformations over exact rationals.
//!
//! All intervals are half-open `[lo, hi)`. A map is stored as a sorted list of
//! branches `x ↦ slope·x + intercept`; branches partition the domain and their
//! images are pairwise disjoint (the map is injective, not necessarily onto).

use std::fmt;

use thiserror::Error;

use crate::exactnum::{q, Rational};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AietError {
    #[error("point {0} lies outside the domain")]
    OutOfDomain(Rational),
    #[error("branch domains do not partition the domain")]
    NotPartition,
    #[error("branch slope {0} is not positive")]
    NonPositiveSlope(Rational),
    #[error("branch images overlap")]
    NotInjective,
    #[error("empty interval {0}")]
    EmptyInterval(String),
    #[error("sub-interval is not contained in the domain")]
    NotSubinterval,
    #[error("some points of the sub-interval did not return within {0} iterations")]
    ReturnCapExceeded(usize),
    #[error("image of the inner map leaves the domain of the outer map")]
    IncompatibleComposition,
    #[error("malformed table line `{0}`")]
    Table(String),
}

/// Half-open interval `[lo, hi)` with `lo < hi`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Interval {
    pub lo: Rational,
    pub hi: Rational,
}

impl Interval {
    pub fn new(lo: Rational, hi: Rational) -> Result<Self, AietError> {
        if lo < hi {
            Ok(Interval { lo, hi })
        } else {
            Err(AietError::EmptyInterval(format!("[{lo}, {hi})")))
        }
    }

    pub fn unit() -> Self {
        Interval { lo: Rational::zero(), hi: Rational::one() }
    }

    pub fn len(&self) -> Rational {
        &self.hi - &self.lo
    }

    pub fn contains(&self, x: &Rational) -> bool {
        &self.lo <= x && x < &self.hi
    }

    pub fn contains_interval(&self, other: &Interval) -> bool {
        self.lo <= other.lo && other.hi <= self.hi
    }

    pub fn intersect(&self, other: &Interval) -> Option<Interval> {
        let lo = (&self.lo).max(&other.lo).clone();
        let hi = (&self.hi).min(&other.hi).clone();
        (lo < hi).then_some(Interval { lo, hi })
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {})", self.lo, self.hi)
    }
}

impl fmt::Debug for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// One continuity piece: `x ↦ slope·x + intercept` on `[lo, hi)`.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Branch {
    pub lo: Rational,
    pub hi: Rational,
    pub slope: Rational,
    pub intercept: Rational,
}

impl Branch {
    pub fn eval(&self, x: &Rational) -> Rational {
        &self.slope * x + &self.intercept
    }

    pub fn domain(&self) -> Interval {
        Interval { lo: self.lo.clone(), hi: self.hi.clone() }
    }

    pub fn image(&self) -> Interval {
        Interval { lo: self.eval(&self.lo), hi: self.eval(&self.hi) }
    }

    fn same_map(&self, other: &Branch) -> bool {
        self.slope == other.slope && self.intercept == other.intercept
    }
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Aiet {
    domain: Interval,
    branches: Vec<Branch>,
}

/// Orbit segment `x, T(x), …, Tⁿ(x)` with the product of slopes used.
#[derive(Clone, Debug, PartialEq)]
pub struct OrbitRecord {
    pub points: Vec<Rational>,
    pub branches: Vec<usize>,
    pub derivative_product: Rational,
}

/// A periodic orbit found by [`Aiet::detect_periodic`].
#[derive(Clone, Debug, PartialEq)]
pub struct PeriodicCycle {
    pub period: usize,
    /// Derivative of `T^period` along the cycle.
    pub multiplier: Rational,
    /// The cycle, in orbit order.
    pub points: Vec<Rational>,
    pub itinerary: Vec<usize>,
    /// Iteration count at which the cycle was confirmed.
    pub confirmed_at: usize,
    /// The cycle passes through the left end of some branch, i.e. through a
    /// discontinuity (or the domain's left end). Such a cycle is a singular
    /// leaf, not a regular closed one.
    pub singular: bool,
}

impl PeriodicCycle {
    pub fn is_attracting(&self) -> bool {
        self.multiplier < Rational::one()
    }

    /// Regular attracting cycle: the closed-leaf attractor of a dynamically
    /// trivial map.
    pub fn is_regular_attractor(&self) -> bool {
        self.is_attracting() && !self.singular
    }
}

/// First-return map together with per-branch return times.
#[derive(Clone, Debug, PartialEq)]
pub struct ReturnMap {
    pub map: Aiet,
    pub return_times: Vec<usize>,
}

impl Aiet {
    /// Builds a map from branches, sorting them and checking every structural
    /// invariant (partition, positive slopes, disjoint images).
    pub fn new(mut branches: Vec<Branch>) -> Result<Self, AietError> {
        if branches.is_empty() {
            return Err(AietError::NotPartition);
        }
        branches.sort_by(|a, b| a.lo.cmp(&b.lo));
        for br in &branches {
            if br.lo >= br.hi {
                return Err(AietError::EmptyInterval(format!("[{}, {})", br.lo, br.hi)));
            }
            if !br.slope.is_positive() {
                return Err(AietError::NonPositiveSlope(br.slope.clone()));
            }
        }
        if branches.windows(2).any(|w| w[0].hi != w[1].lo) {
            return Err(AietError::NotPartition);
        }
        let mut images: Vec<Interval> = branches.iter().map(Branch::image).collect();
        images.sort_by(|a, b| a.lo.cmp(&b.lo));
        if images.windows(2).any(|w| w[0].hi > w[1].lo) {
            return Err(AietError::NotInjective);
        }
        let domain = Interval { lo: branches[0].lo.clone(), hi: branches[branches.len() - 1].hi.clone() };
        Ok(Aiet { domain, branches })
    }

    pub fn domain(&self) -> &Interval {
        &self.domain
    }

    pub fn branches(&self) -> &[Branch] {
        &self.branches
    }

    /// Merges neighbouring branches that carry the same affine map.
    pub fn normalized(&self) -> Aiet {
        let mut out: Vec<Branch> = Vec::with_capacity(self.branches.len());
        for br in &self.branches {
            match out.last_mut() {
                Some(last) if last.same_map(br) && last.hi == br.lo => last.hi = br.hi.clone(),
                _ => out.push(br.clone()),
            }
        }
        Aiet { domain: self.domain.clone(), branches: out }
    }

    pub fn branch_index(&self, x: &Rational) -> Option<usize> {
        if !self.domain.contains(x) {
            return None;
        }
        let idx = self.branches.partition_point(|b| &b.lo <= x);
        Some(idx - 1)
    }

    /// Image of `x` and the branch it was taken on.
    pub fn eval(&self, x: &Rational) -> Result<(Rational, usize), AietError> {
        let i = self.branch_index(x).ok_or_else(|| AietError::OutOfDomain(x.clone()))?;
        Ok((self.branches[i].eval(x), i))
    }

    pub fn apply(&self, x: &Rational) -> Result<Rational, AietError> {
        self.eval(x).map(|(y, _)| y)
    }

    pub fn images(&self) -> Vec<Interval> {
        self.branches.iter().map(Branch::image).collect()
    }

    pub fn image_length(&self) -> Rational {
        self.images().iter().fold(Rational::zero(), |acc, iv| acc + iv.len())
    }

    /// Left ends of all branches: the discontinuities plus the domain start.
    pub fn breakpoints(&self) -> impl Iterator<Item = &Rational> {
        self.branches.iter().map(|b| &b.lo)
    }

    pub fn orbit(&self, x: &Rational, steps: usize) -> Result<OrbitRecord, AietError> {
        let mut points = vec![x.clone()];
        let mut branches = Vec::with_capacity(steps);
        let mut derivative_product = Rational::one();
        let mut cur = x.clone();
        for _ in 0..steps {
            let (next, i) = self.eval(&cur)?;
            derivative_product *= &self.branches[i].slope;
            branches.push(i);
            points.push(next.clone());
            cur = next;
        }
        Ok(OrbitRecord { points, branches, derivative_product })
    }

    /// Exact image of a sub-interval, cut at the discontinuities it meets.
    pub fn image_of(&self, iv: &Interval) -> Vec<Interval> {
        self.branches
            .iter()
            .filter_map(|br| {
                iv.intersect(&br.domain())
                    .map(|piece| Interval { lo: br.eval(&piece.lo), hi: br.eval(&piece.hi) })
            })
            .collect()
    }

    /// `self ∘ inner`. The image of `inner` must lie in the domain of `self`.
    pub fn compose(&self, inner: &Aiet) -> Result<Aiet, AietError> {
        let mut out = Vec::new();
        for ib in &inner.branches {
            let image = ib.image();
            if !self.domain.contains_interval(&image) {
                return Err(AietError::IncompatibleComposition);
            }
            for ob in &self.branches {
                if let Some(piece) = image.intersect(&ob.domain()) {
                    // pull the piece back through the inner branch
                    let lo = (&piece.lo - &ib.intercept) / &ib.slope;
                    let hi = (&piece.hi - &ib.intercept) / &ib.slope;
                    out.push(Branch {
                        lo,
                        hi,
                        slope: &ob.slope * &ib.slope,
                        intercept: &ob.slope * &ib.intercept + &ob.intercept,
                    });
                }
            }
        }
        Ok(Aiet::new(out)?.normalized())
    }

    /// First-return map of `self` on `sub`, built by pushing pieces of `sub`
    /// forward until every piece is back inside `sub`.
    pub fn first_return(&self, sub: &Interval, cap: usize) -> Result<ReturnMap, AietError> {
        if !self.domain.contains_interval(sub) {
            return Err(AietError::NotSubinterval);
        }
        struct Piece {
            lo: Rational,
            hi: Rational,
            slope: Rational,
            intercept: Rational,
        }
        let mut pending = vec![Piece {
            lo: sub.lo.clone(),
            hi: sub.hi.clone(),
            slope: Rational::one(),
            intercept: Rational::zero(),
        }];
        let mut done: Vec<(Branch, usize)> = Vec::new();
        for time in 1..=cap {
            let mut next = Vec::new();
            for piece in pending {
                let start = &piece.slope * &piece.lo + &piece.intercept;
                let end = &piece.slope * &piece.hi + &piece.intercept;
                let current = Interval { lo: start, hi: end };
                for br in &self.branches {
                    let Some(part) = current.intersect(&br.domain()) else { continue };
                    let slope = &br.slope * &piece.slope;
                    let intercept = &br.slope * &piece.intercept + &br.intercept;
                    let image = Interval { lo: br.eval(&part.lo), hi: br.eval(&part.hi) };
                    let pull = |y: &Rational| (y - &intercept) / &slope;
                    let outside = [
                        Interval { lo: image.lo.clone(), hi: (&image.hi).min(&sub.lo).clone() },
                        Interval { lo: (&image.lo).max(&sub.hi).clone(), hi: image.hi.clone() },
                    ];
                    if let Some(inside) = image.intersect(sub) {
                        let branch = Branch {
                            lo: pull(&inside.lo),
                            hi: pull(&inside.hi),
                            slope: slope.clone(),
                            intercept: intercept.clone(),
                        };
                        done.push((branch, time));
                    }
                    for out in outside.into_iter().filter(|iv| iv.lo < iv.hi) {
                        next.push(Piece {
                            lo: pull(&out.lo),
                            hi: pull(&out.hi),
                            slope: slope.clone(),
                            intercept: intercept.clone(),
                        });
                    }
                }
            }
            pending = next;
            if pending.is_empty() {
                break;
            }
        }
        if !pending.is_empty() {
            return Err(AietError::ReturnCapExceeded(cap));
        }
        done.sort_by(|a, b| a.0.lo.cmp(&b.0.lo));
        let mut merged: Vec<(Branch, usize)> = Vec::with_capacity(done.len());
        for (br, t) in done {
            match merged.last_mut() {
                Some((last, lt)) if *lt == t && last.same_map(&br) && last.hi == br.lo => last.hi = br.hi,
                _ => merged.push((br, t)),
            }
        }
        let return_times = merged.iter().map(|(_, t)| *t).collect();
        let map = Aiet::new(merged.into_iter().map(|(b, _)| b).collect())?;
        Ok(ReturnMap { map, return_times })
    }

    /// Follows the orbit of `x` exactly and looks for an eventually periodic
    /// itinerary. A candidate period read off the itinerary is accepted only
    /// after the fixed point of the composed affine map is shown to be a
    /// genuine periodic point with that itinerary; nothing here uses a
    /// tolerance.
    pub fn detect_periodic(&self, x: &Rational, max_iter: usize) -> Option<PeriodicCycle> {
        let mut cur = x.clone();
        let mut symbols: Vec<u32> = Vec::new();
        let mut checkpoint = 8usize;
        for step in 1..=max_iter {
            let (next, i) = self.eval(&cur).ok()?;
            symbols.push(i as u32);
            cur = next;
            if step == checkpoint || step == max_iter {
                if let Some(cycle) = self.cycle_from_itinerary(&symbols, &cur, step) {
                    return Some(cycle);
                }
                checkpoint = checkpoint.saturating_mul(2);
            }
        }
        None
    }

    fn cycle_from_itinerary(
        &self,
        symbols: &[u32],
        current: &Rational,
        step: usize,
    ) -> Option<PeriodicCycle> {
        const MAX_CANDIDATES: usize = 6;
        let rev: Vec<u32> = symbols.iter().rev().copied().collect();
        let z = z_function(&rev);
        let n = rev.len();
        let mut tried = 0;
        for p in 1..=n / 2 {
            if z[p] < p {
                continue;
            }
            tried += 1;
            // symbols[n-p..n] is the pattern `current` should follow
            let pattern: Vec<usize> = symbols[n - p..].iter().map(|&s| s as usize).collect();
            if let Some(cycle) = self.verify_cycle(&pattern, current, step) {
                return Some(cycle);
            }
            if tried >= MAX_CANDIDATES {
                break;
            }
        }
        None
    }

    fn verify_cycle(&self, pattern: &[usize], current: &Rational, step: usize) -> Option<PeriodicCycle> {
        let period = minimal_period(pattern);
        let pattern = &pattern[..period];
        let (mut slope, mut intercept) = (Rational::one(), Rational::zero());
        for &i in pattern {
            let br = &self.branches[i];
            intercept = &br.slope * &intercept + &br.intercept;
            slope = &br.slope * &slope;
        }
        let start = if slope == Rational::one() {
            if !intercept.is_zero() {
                return None;
            }
            current.clone()
        } else {
            &intercept / &(Rational::one() - &slope)
        };
        let mut points = Vec::with_capacity(period);
        let mut y = start.clone();
        for &i in pattern {
            if !self.branches[i].domain().contains(&y) {
                return None;
            }
            points.push(y.clone());
            y = self.branches[i].eval(&y);
        }
        if y != start {
            return None;
        }
        let singular = points.iter().any(|p| self.breakpoints().any(|b| b == p));
        Some(PeriodicCycle {
            period,
            multiplier: slope,
            points,
            itinerary: pattern.to_vec(),
            confirmed_at: step,
            singular,
        })
    }

    /// Floating-point iteration for ω-limit pictures: discards `burn_in`
    /// iterates and returns the next `samples` iterates, sorted.
    pub fn omega_limit_estimate(&self, x0: f64, burn_in: usize, samples: usize) -> Vec<f64> {
        let table = FloatTable::new(self);
        let mut x = table.clamp(x0);
        for _ in 0..burn_in {
            x = table.step(x);
        }
        let mut out = Vec::with_capacity(samples);
        for _ in 0..samples {
            x = table.step(x);
            out.push(x);
        }
        out.sort_by(f64::total_cmp);
        out
    }

    /// Plain-text table, one `x_lo x_hi slope intercept` line per branch.
    pub fn to_table(&self) -> String {
        self.branches.iter().map(|b| format!("{} {} {} {}\n", b.lo, b.hi, b.slope, b.intercept)).collect()
    }

    pub fn from_table(text: &str) -> Result<Aiet, AietError> {
        let mut branches = Vec::new();
        for line in text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#')) {
            let fields: Vec<Rational> = line
                .split_whitespace()
                .map(|f| f.parse::<Rational>())
                .collect::<Result<_, _>>()
                .map_err(|_| AietError::Table(line.to_string()))?;
            let [lo, hi, slope, intercept]: [Rational; 4] =
                fields.try_into().map_err(|_| AietError::Table(line.to_string()))?;
            branches.push(Branch { lo, hi, slope, intercept });
        }
        Aiet::new(branches)
    }
}

struct FloatTable {
    lo: f64,
    hi: f64,
    starts: Vec<f64>,
    maps: Vec<(f64, f64)>,
}

impl FloatTable {
    fn new(map: &Aiet) -> Self {
        FloatTable {
            lo: map.domain.lo.to_f64(),
            hi: map.domain.hi.to_f64(),
            starts: map.branches.iter().map(|b| b.lo.to_f64()).collect(),
            maps: map.branches.iter().map(|b| (b.slope.to_f64(), b.intercept.to_f64())).collect(),
        }
    }

    fn clamp(&self, x: f64) -> f64 {
        if x.is_nan() {
            return self.lo;
        }
        x.clamp(self.lo, f64::max(self.lo, self.hi - f64::EPSILON))
    }

    fn step(&self, x: f64) -> f64 {
        let idx = self.starts.partition_point(|&s| s <= x).max(1) - 1;
        let (slope, intercept) = self.maps[idx];
        self.clamp(slope * x + intercept)
    }
}

fn z_function(s: &[u32]) -> Vec<usize> {
    let n = s.len();
    let mut z = vec![0; n];
    if n == 0 {
        return z;
    }
    z[0] = n;
    let (mut l, mut r) = (0usize, 0usize);
    for i in 1..n {
        if i < r {
            z[i] = (r - i).min(z[i - l]);
        }
        while i + z[i] < n && s[z[i]] == s[i + z[i]] {
            z[i] += 1;
        }
        if i + z[i] > r {
            l = i;
            r = i + z[i];
        }
    }
    z
}

fn minimal_period(pattern: &[usize]) -> usize {
    let n = pattern.len();
    (1..=n).find(|&d| n.is_multiple_of(d) && (d..n).all(|i| pattern[i] == pattern[i - d])).unwrap_or(n)
}

/// The involution `F` of `[0, 1)`.
pub fn base_map() -> Aiet {
    let br = |lo: Rational, hi: Rational, slope: Rational, intercept: Rational| Branch {
        lo,
        hi,
        slope,
        intercept,
    };
    Aiet::new(vec![
        br(q(0, 1), q(1, 6), q(2, 1), q(1, 6)),
        br(q(1, 6), q(1, 2), q(1, 2), q(-1, 12)),
        br(q(1, 2), q(5, 6), q(1, 2), q(7, 12)),
        br(q(5, 6), q(1, 1), q(2, 1), q(-7, 6)),
    ])
    .expect("F is a valid AIET")
}

/// `F_t = F ∘ r_t`, where `r_t` is the rotation by `t` modulo 1. `t` is
/// reduced modulo 1 first.
pub fn family_member(t: &Rational) -> Aiet {
    let t = t.fract_positive();
    let base = base_map();
    let one = Rational::one();
    let mut out = Vec::with_capacity(5);
    for br in base.branches() {
        // x + t lands in [br.lo, br.hi) for x in [br.lo - t, br.hi - t) mod 1
        let lo = &br.lo - &t;
        let hi = &br.hi - &t;
        let shifted = |shift: &Rational, lo: Rational, hi: Rational| Branch {
            lo,
            hi,
            slope: br.slope.clone(),
            intercept: &br.slope * shift + &br.intercept,
        };
        if !hi.is_positive() {
            let shift = &t - &one;
            out.push(shifted(&shift, &lo + &one, &hi + &one));
        } else if !lo.is_negative() {
            out.push(shifted(&t, lo, hi));
        } else {
            let shift = &t - &one;
            out.push(shifted(&t, Rational::zero(), hi));
            out.push(shifted(&shift, &lo + &one, one.clone()));
        }
    }
    Aiet::new(out).expect("F_t is a valid AIET").normalized()
}

/// The rotation `x ↦ x + t mod 1` on `[0, 1)`.
pub fn rotation(t: &Rational) -> Aiet {
    let t = t.fract_positive();
    let one = Rational::one();
    if t.is_zero() {
        return Aiet::new(vec![Branch {
            lo: Rational::zero(),
            hi: one.clone(),
            slope: one,
            intercept: Rational::zero(),
        }])
        .expect("identity");
    }
    let cut = &one - &t;
    Aiet::new(vec![
        Branch { lo: Rational::zero(), hi: cut.clone(), slope: one.clone(), intercept: t.clone() },
        Branch { lo: cut, hi: one.clone(), slope: one.clone(), intercept: &t - &one },
    ])
    .expect("rotation")
}

/// Element of the two-interval family `I(m, n)` on `[0, λ_A + λ_B)`: the left
/// interval `A` is contracted by `2⁻ⁿ` onto the right end of the domain and
/// the right interval `B` is contracted by `2⁻ᵐ` onto its left end.
pub fn two_interval(m: u32, n: u32, lambda_a: &Rational, lambda_b: &Rational) -> Result<Aiet, AietError> {
    let total = lambda_a + lambda_b;
    let ka = Rational::pow2(-(n as i64));
    let kb = Rational::pow2(-(m as i64));
    Aiet::new(vec![
        Branch {
            lo: Rational::zero(),
            hi: lambda_a.clone(),
            intercept: &total - &(lambda_a * &ka),
            slope: ka,
        },
        Branch { lo: lambda_a.clone(), hi: total, intercept: -(lambda_a * &kb), slope: kb },
    ])
}

/// Translates the domain of `map` so that it starts at 0.
pub fn translate_to_origin(map: &Aiet) -> Aiet {
    let shift = map.domain.lo.clone();
    let branches = map
        .branches
        .iter()
        .map(|b| {
            // y = s(x + shift) + c - shift
            Branch {
                lo: &b.lo - &shift,
                hi: &b.hi - &shift,
                slope: b.slope.clone(),
                intercept: &b.slope * &shift + &b.intercept - &shift,
            }
        })
        .collect();
    Aiet::new(branches).expect("translation preserves validity")
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn base_map_values() {
        let f = base_map();
        assert_eq!(f.apply(&q(0, 1)).unwrap(), q(1, 6));
        assert_eq!(f.apply(&q(1, 2)).unwrap(), q(5, 6));
        assert_eq!(f.apply(&q(5, 6)).unwrap(), q(1, 2));
        assert_eq!(f.apply(&q(1, 6)).unwrap(), q(0, 1));
        let y = f.apply(&q(1, 3)).unwrap();
        assert_eq!(f.apply(&y).unwrap(), q(1, 3));
        assert_eq!(f.image_length(), q(1, 1));
    }

    #[test]
    fn eval_reports_branch_and_rejects_outside() {
        let f = base_map();
        assert_eq!(f.eval(&q(1, 6)).unwrap().1, 1);
        assert_eq!(f.eval(&q(0, 1)).unwrap().1, 0);
        assert_eq!(f.eval(&q(1, 1)), Err(AietError::OutOfDomain(q(1, 1))));
        assert_eq!(f.eval(&q(-1, 5)), Err(AietError::OutOfDomain(q(-1, 5))));
    }

    #[test]
    fn family_member_examples() {
        assert_eq!(family_member(&q(0, 1)), base_map());
        assert_eq!(family_member(&q(1, 6)).apply(&q(0, 1)).unwrap(), q(0, 1));
        assert_eq!(family_member(&q(1, 2)).apply(&q(1, 2)).unwrap(), q(1, 6));
        assert_eq!(family_member(&q(7, 6)), family_member(&q(1, 6)));
        for t in [q(1, 7), q(1, 3), q(5, 9), q(99, 100)] {
            let ft = family_member(&t);
            assert!(ft.branches().len() <= 5);
            assert_eq!(ft.image_length(), q(1, 1));
        }
    }

    #[test]
    fn family_member_matches_rotation_composition() {
        for t in [q(1, 7), q(1, 6), q(1, 2), q(2, 3), q(13, 17)] {
            let composed = base_map().compose(&rotation(&t)).unwrap();
            assert_eq!(composed, family_member(&t));
        }
    }

    #[test]
    fn first_return_on_whole_domain_is_identity_operation() {
        let f = base_map();
        let r = f.first_return(&Interval::unit(), 4).unwrap();
        assert_eq!(r.map, f);
        assert!(r.return_times.iter().all(|&t| t == 1));
    }

    #[test]
    fn first_return_of_involution() {
        let f = base_map();
        // F swaps [0, 1/6) and [1/6, 1/2), so [0, 1/2) is invariant
        let half = f.first_return(&Interval::new(q(0, 1), q(1, 2)).unwrap(), 10).unwrap();
        assert_eq!(half.map.branches(), &f.branches()[..2]);
        assert_eq!(half.return_times, vec![1, 1]);
        // on [0, 1/6) every point comes back after two steps, unchanged
        let r = f.first_return(&Interval::new(q(0, 1), q(1, 6)).unwrap(), 10).unwrap();
        assert_eq!(r.map.branches().len(), 1);
        let br = &r.map.branches()[0];
        assert_eq!((br.slope.clone(), br.intercept.clone()), (q(1, 1), q(0, 1)));
        assert_eq!(r.return_times, vec![2]);
    }

    #[test]
    fn first_return_cap() {
        // a contraction whose orbits leave [1/2, 1) never to return
        let t = two_interval(1, 1, &q(1, 2), &q(1, 2)).unwrap();
        let sub = Interval::new(q(0, 1), q(1, 100)).unwrap();
        assert!(matches!(t.first_return(&sub, 5), Err(AietError::ReturnCapExceeded(5))));
    }

    #[test]
    fn involution_orbit_is_period_two() {
        let cycle = base_map().detect_periodic(&q(1, 3), 100).unwrap();
        assert_eq!(cycle.period, 2);
        assert_eq!(cycle.multiplier, q(1, 1));
        assert!(!cycle.singular);
    }

    #[test]
    fn two_interval_balanced_lengths_attract() {
        let t = two_interval(1, 1, &q(1, 2), &q(1, 2)).unwrap();
        let cycle = t.detect_periodic(&q(1, 10), 200).unwrap();
        assert_eq!(cycle.period, 2);
        assert_eq!(cycle.multiplier, q(1, 4));
        assert!(cycle.is_regular_attractor());
    }

    #[test]
    fn saddle_boundary_has_no_regular_cycle() {
        // s = 1/3: T²(A) converges to the excluded right end of A
        let t = two_interval(1, 1, &q(1, 3), &q(2, 3)).unwrap();
        assert!(t.detect_periodic(&q(1, 10), 400).is_none());
        // s = 2/3: the limit cycle passes through the discontinuity
        let t = two_interval(1, 1, &q(2, 3), &q(1, 3)).unwrap();
        let cycle = t.detect_periodic(&q(1, 10), 400).unwrap();
        assert!(cycle.singular);
    }

    #[test]
    fn non_periodic_within_cap() {
        // a tiny iteration budget cannot confirm anything
        let t = two_interval(1, 1, &q(1, 2), &q(1, 2)).unwrap();
        assert!(t.detect_periodic(&q(1, 10), 2).is_none());
    }

    #[test]
    fn omega_limit_of_involution_has_two_values() {
        let pts = base_map().omega_limit_estimate(0.3, 1000, 100);
        let mut distinct = pts.clone();
        distinct.dedup_by(|a, b| (*a - *b).abs() < 1e-9);
        assert_eq!(distinct.len(), 2);
        assert!(pts.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn table_roundtrip() {
        let ft = family_member(&q(2, 7));
        let text = ft.to_table();
        assert!(text.lines().next().unwrap().split_whitespace().count() == 4);
        assert_eq!(Aiet::from_table(&text).unwrap(), ft);
        assert!(Aiet::from_table("0 1 x 0").is_err());
    }

    #[test]
    fn invalid_maps_rejected() {
        let b = |lo, hi, s, c| Branch { lo, hi, slope: s, intercept: c };
        assert_eq!(
            Aiet::new(vec![b(q(0, 1), q(1, 2), q(1, 1), q(0, 1)), b(q(1, 2), q(1, 1), q(1, 1), q(-1, 4))]),
            Err(AietError::NotInjective)
        );
        assert_eq!(
            Aiet::new(vec![b(q(0, 1), q(1, 3), q(1, 1), q(0, 1)), b(q(1, 2), q(1, 1), q(1, 1), q(0, 1))]),
            Err(AietError::NotPartition)
        );
        assert_eq!(
            Aiet::new(vec![b(q(0, 1), q(1, 1), q(0, 1), q(0, 1))]),
            Err(AietError::NonPositiveSlope(q(0, 1)))
        );
    }

    fn unit_rational() -> impl Strategy<Value = Rational> {
        (1i64..10_000).prop_flat_map(|d| (0..d, Just(d))).prop_map(|(n, d)| q(n, d))
    }

    proptest! {
        #[test]
        fn f_is_an_involution(x in unit_rational()) {
            let f = base_map();
            prop_assert_eq!(f.apply(&f.apply(&x).unwrap()).unwrap(), x);
        }

        #[test]
        fn family_members_are_injective(t in unit_rational()) {
            // Aiet::new validates disjoint images
            let ft = family_member(&t);
            prop_assert!(Aiet::new(ft.branches().to_vec()).is_ok());
            prop_assert_eq!(ft.image_length(), q(1, 1));
        }

        #[test]
        fn derivative_chain_rule(t in unit_rational(), x in unit_rational(), n in 0usize..40) {
            let ft = family_member(&t);
            let orbit = ft.orbit(&x, n).unwrap();
            let product = orbit
                .branches
                .iter()
                .fold(Rational::one(), |acc, &i| acc * &ft.branches()[i].slope);
            prop_assert_eq!(product, orbit.derivative_product);
        }
    }
}
