//! Affine Rauzy–Veech induction on the two-interval family `I(m, n)`.
//!
//! A state is `(m, n, λ_A, λ_B)`: the map contracts `A` by `2⁻ⁿ` and `B` by
//! `2⁻ᵐ` (see [`crate::aiet::two_interval`]). Each step either induces on a
//! smaller interval, stops at an attracting period-two cycle, or reports a
//! saddle connection when the lengths hit an equality boundary.

use std::fmt;
use std::str::FromStr;

use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::aiet::{two_interval, Aiet, Interval};
use crate::exactnum::{sum_balanced, Mat2, Rational};

pub const DEFAULT_MAX_STEPS: usize = 64;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RauzyError {
    #[error("lengths must be positive, got {0}")]
    NonPositiveLength(String),
    #[error("starting length {0} is not in (0, 1)")]
    InvalidStart(Rational),
    #[error("`{0}` is not a word over {{L, R}}")]
    ParseWord(String),
    #[error("s = {0} stops or hits a saddle within {1} steps; it is not a Cantor candidate")]
    NotCantorCandidate(Rational, usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Letter {
    L,
    R,
}

/// A word over `{L, R}`, printed as e.g. `LRR` (the empty word prints as
/// nothing).
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Word(Vec<Letter>);

impl Word {
    pub fn new(letters: Vec<Letter>) -> Self {
        Word(letters)
    }

    pub fn empty() -> Self {
        Word(Vec::new())
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

    pub fn push(&mut self, letter: Letter) {
        self.0.push(letter);
    }

    pub fn with(&self, letter: Letter) -> Word {
        let mut w = self.clone();
        w.push(letter);
        w
    }

    pub fn prefix(&self, len: usize) -> Word {
        Word(self.0[..len].to_vec())
    }

    /// Whether the last `k` letters are all equal (true when `k` exceeds the
    /// length and the word is constant).
    pub fn has_constant_tail(&self, k: usize) -> bool {
        let tail = &self.0[self.0.len().saturating_sub(k)..];
        tail.windows(2).all(|w| w[0] == w[1])
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for l in &self.0 {
            f.write_str(match l {
                Letter::L => "L",
                Letter::R => "R",
            })?;
        }
        Ok(())
    }
}

impl FromStr for Word {
    type Err = RauzyError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        s.trim()
            .chars()
            .map(|c| match c {
                'L' => Ok(Letter::L),
                'R' => Ok(Letter::R),
                _ => Err(RauzyError::ParseWord(s.to_string())),
            })
            .collect::<Result<Vec<_>, _>>()
            .map(Word)
    }
}

impl Serialize for Word {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

/// Closed interval `[lo, hi]` of starting parameters, printed as `lo..hi`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Segment {
    pub lo: Rational,
    pub hi: Rational,
}

impl Segment {
    pub fn len(&self) -> Rational {
        &self.hi - &self.lo
    }

    pub fn is_degenerate(&self) -> bool {
        self.lo >= self.hi
    }

    pub fn contains(&self, x: &Rational) -> bool {
        &self.lo <= x && x <= &self.hi
    }
}

impl fmt::Display for Segment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}..{}", self.lo, self.hi)
    }
}

pub fn right_matrix(_m: u64, n: u64) -> Mat2 {
    let p = Rational::pow2(n as i64);
    Mat2::new(Rational::one(), -&p, Rational::zero(), p)
}

pub fn left_matrix(m: u64, _n: u64) -> Mat2 {
    let p = Rational::pow2(m as i64);
    Mat2::new(p.clone(), Rational::zero(), -p, Rational::one())
}

#[derive(Clone, Debug, PartialEq)]
pub struct InductionState {
    pub m: u64,
    pub n: u64,
    pub lambda_a: Rational,
    pub lambda_b: Rational,
    pub word: Word,
    /// Product of the step matrices applied so far.
    pub matrix: Mat2,
}

impl InductionState {
    pub fn new(m: u64, n: u64, lambda_a: Rational, lambda_b: Rational) -> Result<Self, RauzyError> {
        if !lambda_a.is_positive() || !lambda_b.is_positive() || m == 0 || n == 0 {
            return Err(RauzyError::NonPositiveLength(format!("({lambda_a}, {lambda_b})")));
        }
        Ok(InductionState { m, n, lambda_a, lambda_b, word: Word::empty(), matrix: Mat2::identity() })
    }

    /// The `I(1, 1)` datum with lengths `(s, 1 − s)`.
    pub fn initial(s: &Rational) -> Result<Self, RauzyError> {
        if !s.is_positive() || s >= &Rational::one() {
            return Err(RauzyError::InvalidStart(s.clone()));
        }
        Self::new(1, 1, s.clone(), Rational::one() - s)
    }

    pub fn map(&self) -> Aiet {
        two_interval(self.m as u32, self.n as u32, &self.lambda_a, &self.lambda_b)
            .expect("positive lengths give a valid map")
    }

    fn advanced(&self, letter: Letter) -> InductionState {
        let step = match letter {
            Letter::L => left_matrix(self.m, self.n),
            Letter::R => right_matrix(self.m, self.n),
        };
        let (lambda_a, lambda_b) = step.apply(&self.lambda_a, &self.lambda_b);
        let (m, n) = match letter {
            Letter::L => (self.m, self.n + self.m),
            Letter::R => (self.m + self.n, self.n),
        };
        InductionState {
            m,
            n,
            lambda_a,
            lambda_b,
            word: self.word.with(letter),
            matrix: &step * &self.matrix,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Step {
    Left(InductionState),
    Right(InductionState),
    /// Attracting period-two cycle with derivative `2^{-(m+n)}`.
    Stop {
        m: u64,
        n: u64,
    },
    Saddle,
}

pub fn step(state: &InductionState) -> Result<Step, RauzyError> {
    let (la, lb) = (&state.lambda_a, &state.lambda_b);
    if !la.is_positive() || !lb.is_positive() {
        return Err(RauzyError::NonPositiveLength(format!("({la}, {lb})")));
    }
    let a_image = la * &Rational::pow2(-(state.n as i64));
    let b_image = lb * &Rational::pow2(-(state.m as i64));
    if lb < &a_image {
        Ok(Step::Right(state.advanced(Letter::R)))
    } else if &b_image > la {
        Ok(Step::Left(state.advanced(Letter::L)))
    } else if lb == &a_image || &b_image == la {
        Ok(Step::Saddle)
    } else {
        Ok(Step::Stop { m: state.m, n: state.n })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum InductionOutcome {
    Stopped {
        word: Word,
        m: u64,
        n: u64,
        multiplier: Rational,
    },
    Saddle {
        word: Word,
        m: u64,
        n: u64,
    },
    /// No decision within the step budget: a Cantor candidate.
    CapExceeded {
        word: Word,
        m: u64,
        n: u64,
    },
}

impl InductionOutcome {
    pub fn word(&self) -> &Word {
        match self {
            InductionOutcome::Stopped { word, .. }
            | InductionOutcome::Saddle { word, .. }
            | InductionOutcome::CapExceeded { word, .. } => word,
        }
    }

    pub fn multiplier(&self) -> Option<&Rational> {
        match self {
            InductionOutcome::Stopped { multiplier, .. } => Some(multiplier),
            _ => None,
        }
    }

    pub fn final_mn(&self) -> (u64, u64) {
        match self {
            InductionOutcome::Stopped { m, n, .. }
            | InductionOutcome::Saddle { m, n, .. }
            | InductionOutcome::CapExceeded { m, n, .. } => (*m, *n),
        }
    }
}

pub fn run_from(state: InductionState, max_steps: usize) -> Result<InductionOutcome, RauzyError> {
    let mut state = state;
    for _ in 0..max_steps {
        match step(&state)? {
            Step::Left(next) | Step::Right(next) => state = next,
            Step::Stop { m, n } => {
                let multiplier = Rational::pow2(-((m + n) as i64));
                return Ok(InductionOutcome::Stopped { word: state.word, m, n, multiplier });
            }
            Step::Saddle => return Ok(InductionOutcome::Saddle { word: state.word, m: state.m, n: state.n }),
        }
    }
    // the budget may run out exactly when the next step would decide
    Ok(match step(&state)? {
        Step::Stop { m, n } => InductionOutcome::Stopped {
            word: state.word,
            m,
            n,
            multiplier: Rational::pow2(-((m + n) as i64)),
        },
        Step::Saddle => InductionOutcome::Saddle { word: state.word, m: state.m, n: state.n },
        _ => InductionOutcome::CapExceeded { word: state.word, m: state.m, n: state.n },
    })
}

/// Runs the induction from `I(1, 1)` with lengths `(s, 1 − s)`.
pub fn run(s: &Rational, max_steps: usize) -> Result<InductionOutcome, RauzyError> {
    run_from(InductionState::initial(s)?, max_steps)
}

/// `(M_w, m, n)` from the recurrences started at `(Id, 1, 1)`.
pub fn word_matrix(w: &Word) -> (Mat2, u64, u64) {
    let (mut mat, mut m, mut n) = (Mat2::identity(), 1u64, 1u64);
    for letter in w.letters() {
        match letter {
            Letter::R => {
                mat = &right_matrix(m, n) * &mat;
                m += n;
            }
            Letter::L => {
                mat = &left_matrix(m, n) * &mat;
                n += m;
            }
        }
    }
    (mat, m, n)
}

/// Parameters `s` for which both lengths `M_w · (s, 1 − s)` are nonnegative.
/// Degenerate (`lo ≥ hi`) when no induction path begins with `w`.
pub fn interval_of_word(w: &Word) -> Segment {
    let (mat, _, _) = word_matrix(w);
    interval_from_matrix(&mat)
}

fn interval_from_matrix(mat: &Mat2) -> Segment {
    let a_minus_b = &mat.a - &mat.b;
    let d_minus_c = &mat.d - &mat.c;
    debug_assert!(a_minus_b.is_positive() && d_minus_c.is_positive());
    Segment { lo: -&mat.b / &a_minus_b, hi: &mat.d / &d_minus_c }
}

/// Closed window of parameters inside `I(w)` that stop right after `w`.
pub fn stop_window(w: &Word) -> Segment {
    let (mat, m, n) = word_matrix(w);
    let outer = interval_from_matrix(&mat);
    let det = mat.det();
    let alpha = &det / &(&mat.d - &mat.c);
    let beta = &det / &(&mat.a - &mat.b);
    let lo_norm = &beta / &(&Rational::pow2(m as i64) * &alpha + &beta);
    let hi_norm = &beta / &(&Rational::pow2(-(n as i64)) * &alpha + &beta);
    let width = outer.len();
    Segment { lo: &outer.lo + &(&lo_norm * &width), hi: &outer.lo + &(&hi_norm * &width) }
}

/// `(a − b)/(d − c)` for `M_w`, which always lies in `[1/2, 2]`.
pub fn ratio_bound_check(w: &Word) -> Rational {
    let (mat, _, _) = word_matrix(w);
    let x = (&mat.a - &mat.b) / (&mat.d - &mat.c);
    assert!(x >= Rational::new(1, 2) && x <= Rational::integer(2), "ratio {x} for word {w} escapes [1/2, 2]");
    x
}

/// Every word of length at most `k` whose `I(w)` is nondegenerate.
pub fn feasible_words(k: usize) -> Vec<Word> {
    let mut out = Vec::new();
    let mut stack = vec![Word::empty()];
    while let Some(w) = stack.pop() {
        if interval_of_word(&w).is_degenerate() {
            continue;
        }
        if w.len() < k {
            stack.push(w.with(Letter::R));
            stack.push(w.with(Letter::L));
        }
        out.push(w);
    }
    out.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.to_string().cmp(&b.to_string())));
    out
}

/// Total length of `⋃_{|w| ≤ k} H(w)`.
pub fn coverage_measure(k: usize) -> Rational {
    sum_balanced(feasible_words(k).iter().map(|w| stop_window(w).len()).collect())
}

/// Finite-depth approximation of the Cantor attractor of the `I(1, 1)` map
/// with lengths `(s, 1 − s)`.
#[derive(Clone, Debug, PartialEq)]
pub struct CantorApprox {
    /// Surviving intervals, sorted and disjoint.
    pub intervals: Vec<Interval>,
    pub total_length: Rational,
    /// Length of the gap `D − T(D)`.
    pub gap_length: Rational,
}

/// Removes the forward images `T⁰(G), …, T^depth(G)` of the gap
/// `G = D − T(D)` from `D`.
pub fn cantor_attractor_approx(s: &Rational, depth: usize) -> Result<CantorApprox, RauzyError> {
    match run(s, depth)? {
        InductionOutcome::CapExceeded { .. } => {}
        _ => return Err(RauzyError::NotCantorCandidate(s.clone(), depth)),
    }
    let map = InductionState::initial(s)?.map();
    let domain = map.domain().clone();
    let mut images = map.images();
    images.sort_by(|a, b| a.lo.cmp(&b.lo));
    let gap = complement(&domain, &images);
    let gap_length = gap.iter().fold(Rational::zero(), |acc, iv| acc + iv.len());
    let mut removed = gap.clone();
    let mut layer = gap;
    for _ in 0..depth {
        layer = layer.iter().flat_map(|iv| map.image_of(iv)).collect();
        removed.extend(layer.iter().cloned());
    }
    removed.sort_by(|a, b| a.lo.cmp(&b.lo));
    let intervals = complement(&domain, &removed);
    let total_length = intervals.iter().fold(Rational::zero(), |acc, iv| acc + iv.len());
    Ok(CantorApprox { intervals, total_length, gap_length })
}

/// `domain` minus a sorted list of intervals.
fn complement(domain: &Interval, sorted: &[Interval]) -> Vec<Interval> {
    let mut out = Vec::new();
    let mut cursor = domain.lo.clone();
    for iv in sorted {
        if iv.lo > cursor {
            out.push(Interval { lo: cursor.clone(), hi: iv.lo.clone() });
        }
        if iv.hi > cursor {
            cursor = iv.hi.clone();
        }
    }
    if cursor < domain.hi {
        out.push(Interval { lo: cursor, hi: domain.hi.clone() });
    }
    out
}
