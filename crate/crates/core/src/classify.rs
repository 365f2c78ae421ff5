//! Classification of directions: reduce by the Veech group, then read the
//! dynamics off the reduced slope.
//!
//! In the fundamental interval `[1, 4)`:
//! * `1 < p < 2`: every leaf is attracted to a closed leaf of holonomy 1/2;
//! * `p = 1, 2`: saddle connections;
//! * `2 < p < 4`: the foliation is trapped in a subsurface whose return map
//!   is the two-interval map with `s = 2 − p/2`, handed to the induction.

use std::fmt;

use serde::Serialize;

use crate::exactnum::{q, ProjPoint, Rational};
use crate::rauzy::{self, InductionOutcome, Word};
use crate::schottky::{self, GroupWord, ReductionStatus};
use crate::surface;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Tag {
    CompletelyPeriodic,
    TrivialAttractor,
    SaddleConnection,
    CantorAttractor,
    LimitSetDirection,
}

impl fmt::Display for Tag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct Caps {
    pub reduce_depth: usize,
    pub induction_steps: usize,
}

impl Default for Caps {
    fn default() -> Self {
        Caps { reduce_depth: schottky::DEFAULT_REDUCE_DEPTH, induction_steps: rauzy::DEFAULT_MAX_STEPS }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Classification {
    pub tag: Tag,
    pub reduction_word: GroupWord,
    pub reduced_slope: ProjPoint,
    pub induction_word: Option<Word>,
    pub multiplier: Option<Rational>,
    /// Period of the attracting leaf in the reduced return map (1 in the
    /// cylinder band, 2 for a stopped induction).
    pub period: Option<usize>,
    pub caps: Caps,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub comment: Option<String>,
}

impl Classification {
    fn new(tag: Tag, reduction_word: GroupWord, reduced_slope: ProjPoint, caps: Caps) -> Self {
        Classification {
            tag,
            reduction_word,
            reduced_slope,
            induction_word: None,
            multiplier: None,
            period: None,
            caps,
            comment: None,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("classification serializes")
    }
}

fn stable_band_contains(p: &Rational) -> bool {
    p > &q(2, 1) && p < &q(4, 1)
}

/// Starting length `s = 2 − p/2` of the trapped two-interval system for a
/// reduced slope in `(2, 4)`.
pub fn stable_band_parameter(reduced_slope: &Rational) -> Option<Rational> {
    if !stable_band_contains(reduced_slope) {
        return None;
    }
    let s = q(2, 1) - reduced_slope / &q(2, 1);
    debug_assert_eq!(
        surface::trapped_section_parameter(&ProjPoint::Finite(reduced_slope.clone())).ok(),
        Some(s.clone())
    );
    Some(s)
}

pub fn classify_direction(p: &ProjPoint, caps: Caps) -> Classification {
    let reduction = schottky::reduce_to_fundamental(p, caps.reduce_depth);
    let word = reduction.word;
    let point = reduction.point;
    match reduction.status {
        ReductionStatus::Cusp => {
            let mut c = Classification::new(Tag::CompletelyPeriodic, word, point, caps);
            c.multiplier = Some(Rational::one());
            return c;
        }
        ReductionStatus::DepthCapReached => {
            let mut c = Classification::new(Tag::LimitSetDirection, word, point, caps);
            c.comment = Some("conjecturally minimal".to_string());
            return c;
        }
        ReductionStatus::Reduced => {}
    }
    let x = point.finite().expect("reduced slopes are finite").clone();
    if x == q(1, 1) || x == q(2, 1) {
        return Classification::new(Tag::SaddleConnection, word, point, caps);
    }
    if x < q(2, 1) {
        let mut c = Classification::new(Tag::TrivialAttractor, word, point, caps);
        c.multiplier = Some(q(1, 2));
        c.period = Some(1);
        return c;
    }
    let s = stable_band_parameter(&x).expect("reduced slope lies in the stable band");
    let outcome = rauzy::run(&s, caps.induction_steps).expect("s lies in (0, 1)");
    match outcome {
        InductionOutcome::Stopped { word: w, multiplier, .. } => {
            let mut c = Classification::new(Tag::TrivialAttractor, word, point, caps);
            c.induction_word = Some(w);
            c.multiplier = Some(multiplier);
            c.period = Some(2);
            c
        }
        InductionOutcome::Saddle { word: w, .. } => {
            let mut c = Classification::new(Tag::SaddleConnection, word, point, caps);
            c.induction_word = Some(w);
            c
        }
        InductionOutcome::CapExceeded { word: w, .. } => {
            let mut c = Classification::new(Tag::CantorAttractor, word, point, caps);
            let note = if w.has_constant_tail(8) {
                "induction cap exceeded; constant word tail"
            } else {
                "induction cap exceeded; Cantor candidate"
            };
            c.comment = Some(note.to_string());
            c.induction_word = Some(w);
            c
        }
    }
}

/// Slope of the direction whose return map is `F_t`: one crossing drifts by
/// `p/6`, so `p = 6t`.
pub fn slope_of_parameter(t: &Rational) -> ProjPoint {
    ProjPoint::Finite(t.fract_positive() * Rational::integer(6))
}

pub fn classify_parameter_t(t: &Rational, caps: Caps) -> Classification {
    classify_direction(&slope_of_parameter(t), caps)
}
