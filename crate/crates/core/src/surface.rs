//! A suspension model of the Disco surface.
//!
//! The surface is the rectangle `[0, 1) × [0, h)` with `h = 1/6`: the sides
//! are glued by `x ↦ x mod 1` and the top edge is glued to the bottom edge by
//! the four dilations of `F`. A straight line of slope `p = dx/dy` climbs the
//! rectangle with horizontal drift `h·p`, so its first return to the bottom
//! edge is `F ∘ r_t` with `t = h·p mod 1`.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use thiserror::Error;

use crate::aiet::{base_map, rotation, Aiet, AietError, Branch, Interval};
use crate::exactnum::{q, ProjPoint, Rational};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SurfaceError {
    #[error("the horizontal direction never crosses the base edge")]
    Horizontal,
    #[error("start point {0} is outside [0, 1)")]
    OutOfRange(Rational),
    #[error("slope {0} is outside the stable band (2, 4)")]
    OutsideStableBand(ProjPoint),
    #[error(transparent)]
    Map(#[from] AietError),
}

/// Height of the suspension rectangle.
pub fn height() -> Rational {
    q(1, 6)
}

/// Horizontal drift `t` (mod 1) of one crossing in direction `p`.
pub fn drift(p: &ProjPoint) -> Result<Rational, SurfaceError> {
    match p {
        ProjPoint::Infinity => Err(SurfaceError::Horizontal),
        ProjPoint::Finite(x) => Ok((x * &height()).fract_positive()),
    }
}

/// First-return map to the bottom edge, assembled as `F ∘ r_t` by composing
/// the translation across the rectangle with the top-to-bottom gluing.
pub fn first_return_direction(p: &ProjPoint) -> Result<Aiet, SurfaceError> {
    let t = drift(p)?;
    Ok(base_map().compose(&rotation(&t))?)
}

/// Singular points on the top and bottom edges (the corner is `x = 0`).
pub fn prongs() -> Vec<Rational> {
    base_map().branches().iter().map(|b| b.lo.clone()).collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct FlowCrossing {
    /// Position on the bottom edge after this crossing.
    pub position: Rational,
    pub level: usize,
    /// Branch of `F` used by the gluing.
    pub branch: usize,
    /// Product of the gluing dilations crossed so far.
    pub derivative: Rational,
}

#[derive(Clone, Debug, PartialEq)]
pub enum LeafEnd {
    Completed,
    /// The leaf runs into a cone point on the top edge during `crossing`.
    Singular {
        crossing: usize,
        x: Rational,
    },
}

#[derive(Clone, Debug, PartialEq)]
pub struct LeafTrace {
    pub start: Rational,
    pub crossings: Vec<FlowCrossing>,
    pub end: LeafEnd,
}

impl LeafTrace {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("step,x_num,x_den,level,deriv_num,deriv_den\n");
        out.push_str(&format!("0,{},{},0,1,1\n", self.start.numer(), self.start.denom()));
        for (i, c) in self.crossings.iter().enumerate() {
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                i + 1,
                c.position.numer(),
                c.position.denom(),
                c.level,
                c.derivative.numer(),
                c.derivative.denom()
            ));
        }
        out
    }
}

/// Follows the leaf through `(x0, 0)` for up to `crossings` crossings.
/// Hitting a cone point ends the trace early; that is saddle-connection
/// evidence, not a failure.
pub fn trace_leaf(x0: &Rational, p: &ProjPoint, crossings: usize) -> Result<LeafTrace, SurfaceError> {
    if x0.is_negative() || x0 >= &Rational::one() {
        return Err(SurfaceError::OutOfRange(x0.clone()));
    }
    let t = drift(p)?;
    let f = base_map();
    let prongs = prongs();
    let mut out = Vec::with_capacity(crossings);
    let mut x = x0.clone();
    let mut derivative = Rational::one();
    for level in 1..=crossings {
        let top = (&x + &t).fract_positive();
        if prongs.contains(&top) {
            return Ok(LeafTrace {
                start: x0.clone(),
                crossings: out,
                end: LeafEnd::Singular { crossing: level, x: top },
            });
        }
        let (next, branch) = f.eval(&top)?;
        derivative *= &f.branches()[branch].slope;
        out.push(FlowCrossing { position: next.clone(), level, branch, derivative: derivative.clone() });
        x = next;
    }
    Ok(LeafTrace { start: x0.clone(), crossings: out, end: LeafEnd::Completed })
}

/// A family of closed leaves found by sampling.
#[derive(Clone, Debug, PartialEq)]
pub struct Cylinder {
    /// Linear holonomy of the core leaf.
    pub multiplier: Rational,
    pub representative: Rational,
    /// Crossings per turn.
    pub period: usize,
    /// Circumference over width, for flat cylinders.
    pub modulus: Option<Rational>,
}

impl Cylinder {
    pub fn is_flat(&self) -> bool {
        self.multiplier == Rational::one()
    }
}

fn canonical_rotation(itinerary: &[usize]) -> Vec<usize> {
    (0..itinerary.len())
        .map(|k| itinerary[k..].iter().chain(&itinerary[..k]).copied().collect::<Vec<_>>())
        .min()
        .unwrap_or_default()
}

/// The horizontal cylinder: horizontal circles of length 1 stacked to height `h`.
fn horizontal_cylinder() -> Cylinder {
    Cylinder {
        multiplier: Rational::one(),
        representative: height() / Rational::integer(2),
        period: 1,
        modulus: Some(Rational::one() / height()),
    }
}

/// Maximal interval of points sharing the first `itinerary.len()` steps of
/// `x`'s itinerary.
fn itinerary_cell(map: &Aiet, x: &Rational, itinerary: &[usize]) -> Interval {
    let mut cell = map.branches()[itinerary[0]].domain();
    let (mut slope, mut intercept) = (Rational::one(), Rational::zero());
    for &i in itinerary {
        let br = &map.branches()[i];
        // points of `cell` whose current image lies in branch i
        let lo = (&br.lo - &intercept) / &slope;
        let hi = (&br.hi - &intercept) / &slope;
        cell = cell.intersect(&Interval { lo, hi }).expect("the cell contains x");
        intercept = &br.slope * &intercept + &br.intercept;
        slope = &br.slope * &slope;
    }
    debug_assert!(cell.contains(x));
    cell
}

/// Flat-cylinder modulus: the circumference is the sum of the crossing
/// lengths rescaled into the chart of the start point, and the width is the
/// cell of the start point projected perpendicular to the leaves.
fn flat_modulus(map: &Aiet, p: &Rational, x: &Rational, itinerary: &[usize]) -> Rational {
    let cell = itinerary_cell(map, x, itinerary);
    let mut derivative = Rational::one();
    let mut heights = Rational::zero();
    for &i in itinerary {
        heights += &(height() / &derivative);
        derivative *= &map.branches()[i].slope;
    }
    heights * (Rational::one() + p.square()) / cell.len()
}

/// Closed regular leaves through `sample_count` evenly spaced points,
/// grouped into cylinders by their cyclic itinerary. Only attracting and
/// flat cylinders are visible to forward iteration.
pub fn find_cylinders(p: &ProjPoint, sample_count: usize) -> Result<Vec<Cylinder>, SurfaceError> {
    const MAX_ITER: usize = 4096;
    let slope = match p {
        ProjPoint::Infinity => return Ok(vec![horizontal_cylinder()]),
        ProjPoint::Finite(x) => x.clone(),
    };
    let map = first_return_direction(p)?;
    let mut found: BTreeMap<Vec<usize>, Cylinder> = BTreeMap::new();
    let n = sample_count.max(1) as i64;
    for i in 0..n {
        let x = q(2 * i + 1, 2 * n);
        let Some(cycle) = map.detect_periodic(&x, MAX_ITER) else { continue };
        if cycle.singular || cycle.multiplier > Rational::one() {
            continue;
        }
        let key = canonical_rotation(&cycle.itinerary);
        found.entry(key).or_insert_with(|| {
            let representative = cycle.points[0].clone();
            let modulus = (cycle.multiplier == Rational::one())
                .then(|| flat_modulus(&map, &slope, &representative, &cycle.itinerary));
            Cylinder { multiplier: cycle.multiplier, representative, period: cycle.period, modulus }
        });
    }
    Ok(found.into_values().collect())
}

pub fn horizontal_moduli() -> Vec<Rational> {
    vec![horizontal_cylinder().modulus.expect("flat")]
}

pub fn vertical_moduli() -> Vec<Rational> {
    find_cylinders(&ProjPoint::Finite(Rational::zero()), 24)
        .expect("vertical direction")
        .into_iter()
        .filter_map(|c| c.modulus)
        .collect()
}

/// A class of identified polygon vertices with its total angle.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConeAngle {
    pub vertices: Vec<String>,
    /// Total angle divided by π.
    pub angle_over_pi: Rational,
}

impl fmt::Display for ConeAngle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}π at {{{}}}", self.angle_over_pi, self.vertices.join(", "))
    }
}

/// Total angle around each vertex class of the rectangle after gluing.
pub fn vertex_angle_check() -> Vec<ConeAngle> {
    #[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
    enum Edge {
        Top,
        Bottom,
    }
    let f = base_map();
    let mut marks: Vec<(Edge, Rational)> = Vec::new();
    let mut glue: Vec<((Edge, Rational), (Edge, Rational))> = Vec::new();
    for br in f.branches() {
        let image = br.image();
        glue.push(((Edge::Top, br.lo.clone()), (Edge::Bottom, image.lo.clone())));
        glue.push(((Edge::Top, br.hi.clone()), (Edge::Bottom, image.hi.clone())));
        marks.extend([
            (Edge::Top, br.lo.clone()),
            (Edge::Top, br.hi.clone()),
            (Edge::Bottom, image.lo),
            (Edge::Bottom, image.hi),
        ]);
    }
    let one = Rational::one();
    glue.push(((Edge::Top, Rational::zero()), (Edge::Top, one.clone())));
    glue.push(((Edge::Bottom, Rational::zero()), (Edge::Bottom, one.clone())));
    marks.sort();
    marks.dedup();

    let index: HashMap<(Edge, Rational), usize> =
        marks.iter().cloned().enumerate().map(|(i, m)| (m, i)).collect();
    let mut parent: Vec<usize> = (0..marks.len()).collect();
    fn find(parent: &mut [usize], i: usize) -> usize {
        let mut r = i;
        while parent[r] != r {
            r = parent[r];
        }
        parent[i] = r;
        r
    }
    for (u, v) in &glue {
        let (a, b) = (find(&mut parent, index[u]), find(&mut parent, index[v]));
        parent[a] = b;
    }
    let mut classes: BTreeMap<usize, ConeAngle> = BTreeMap::new();
    for (i, (edge, x)) in marks.iter().enumerate() {
        let corner = x.is_zero() || x == &one;
        let angle = if corner { q(1, 2) } else { q(1, 1) };
        let name = format!("{}({x})", if *edge == Edge::Top { "T" } else { "B" });
        let root = find(&mut parent, i);
        let class = classes
            .entry(root)
            .or_insert_with(|| ConeAngle { vertices: Vec::new(), angle_over_pi: Rational::zero() });
        class.vertices.push(name);
        class.angle_over_pi += &angle;
    }
    classes.into_values().collect()
}

/// Return map of the direction-`p` flow to the trapped cross-section
/// `[5/6, 1) ∪ [0, 1/6)` of the bottom edge, in the coordinate
/// `u = 3·((x + 1/6) mod 1)` on `[0, 1)`. For `2 < p < 4` it is the
/// two-interval map `I(1, 1)`.
pub fn trapped_section_map(p: &ProjPoint) -> Result<Aiet, SurfaceError> {
    let inside = matches!(p, ProjPoint::Finite(x) if x > &q(2, 1) && x < &q(4, 1));
    if !inside {
        return Err(SurfaceError::OutsideStableBand(p.clone()));
    }
    let map = first_return_direction(p)?;
    let shift = q(1, 6);
    let conjugated = rotation(&shift).compose(&map.compose(&rotation(&-&shift))?)?;
    let ret = conjugated.first_return(&Interval::new(Rational::zero(), q(1, 3))?, 64)?;
    let three = Rational::integer(3);
    let branches = ret
        .map
        .branches()
        .iter()
        .map(|b| Branch {
            lo: &b.lo * &three,
            hi: &b.hi * &three,
            slope: b.slope.clone(),
            intercept: &b.intercept * &three,
        })
        .collect();
    Ok(Aiet::new(branches)?)
}

/// Length `s` of the left interval of [`trapped_section_map`].
pub fn trapped_section_parameter(p: &ProjPoint) -> Result<Rational, SurfaceError> {
    let map = trapped_section_map(p)?;
    Ok(map.branches()[0].hi.clone())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::aiet::{family_member, two_interval};

    fn slope(n: i64, d: i64) -> ProjPoint {
        ProjPoint::Finite(q(n, d))
    }

    #[test]
    fn vertical_return_is_f() {
        assert_eq!(first_return_direction(&slope(0, 1)).unwrap(), base_map());
        assert_eq!(first_return_direction(&ProjPoint::Infinity), Err(SurfaceError::Horizontal));
    }

    #[test]
    fn drift_calibration() {
        assert_eq!(drift(&slope(1, 1)).unwrap(), q(1, 6));
        assert_eq!(first_return_direction(&slope(1, 1)).unwrap(), family_member(&q(1, 6)));
        // A adds 6 to the slope, i.e. one full turn of drift
        for (n, d) in [(1, 3), (5, 2), (-7, 4)] {
            let p = q(n, d);
            let shifted = ProjPoint::Finite(&p + &q(6, 1));
            assert_eq!(
                first_return_direction(&ProjPoint::Finite(p)).unwrap(),
                first_return_direction(&shifted).unwrap()
            );
        }
    }

    #[test]
    fn vertical_leaf_closes() {
        let trace = trace_leaf(&q(1, 3), &slope(0, 1), 2).unwrap();
        assert_eq!(trace.end, LeafEnd::Completed);
        assert_eq!(trace.crossings[1].position, q(1, 3));
        assert_eq!(trace.crossings[1].derivative, q(1, 1));
        assert!(trace.to_csv().starts_with("step,x_num,x_den,level,deriv_num,deriv_den\n0,1,3,0,1,1\n"));
    }

    #[test]
    fn trivial_direction_contracts() {
        let trace = trace_leaf(&q(2, 7), &slope(3, 2), 12).unwrap();
        assert!(trace.crossings.last().unwrap().derivative < q(1, 1));
    }

    #[test]
    fn saddle_direction_hits_prong() {
        // p = 1: t = 1/6 and the prong at 0 returns to the prong at 1/6 on top
        let trace = trace_leaf(&q(0, 1), &slope(1, 1), 10).unwrap();
        assert!(matches!(trace.end, LeafEnd::Singular { .. }));
        let trace = trace_leaf(&q(1, 6), &slope(2, 1), 10).unwrap();
        assert!(matches!(trace.end, LeafEnd::Singular { .. }));
    }

    #[test]
    fn cylinders_vertical_and_horizontal() {
        let vertical = find_cylinders(&slope(0, 1), 24).unwrap();
        assert_eq!(vertical.len(), 2);
        assert!(vertical.iter().all(Cylinder::is_flat));
        assert_eq!(vertical_moduli(), vec![q(3, 2), q(3, 2)]);
        let horizontal = find_cylinders(&ProjPoint::Infinity, 24).unwrap();
        assert_eq!(horizontal.len(), 1);
        assert_eq!(horizontal_moduli(), vec![q(6, 1)]);
    }

    #[test]
    fn cylinder_band_multiplier_is_one_half() {
        for p in [slope(5, 4), slope(3, 2), slope(19, 10)] {
            let cyl = find_cylinders(&p, 16).unwrap();
            assert_eq!(cyl.len(), 1);
            assert_eq!(cyl[0].multiplier, q(1, 2));
        }
    }

    #[test]
    fn cone_angles() {
        let classes = vertex_angle_check();
        assert_eq!(classes.len(), 2);
        assert!(classes.iter().all(|c| c.angle_over_pi == q(4, 1)));
        let excess = classes.iter().fold(Rational::zero(), |acc, c| acc + &c.angle_over_pi - q(2, 1));
        assert_eq!(excess, q(4, 1));
    }

    #[test]
    fn trapped_section_is_two_interval_map() {
        for (n, d) in [(5, 2), (3, 1), (7, 2), (401, 100), (39, 10)] {
            let p = slope(n, d);
            if p.finite().unwrap() >= &q(4, 1) {
                assert!(trapped_section_map(&p).is_err());
                continue;
            }
            let s = q(2, 1) - p.finite().unwrap() / &q(2, 1);
            let expected = two_interval(1, 1, &s, &(Rational::one() - &s)).unwrap();
            assert_eq!(trapped_section_map(&p).unwrap(), expected);
            assert_eq!(trapped_section_parameter(&p).unwrap(), s);
        }
    }
}
