//! Target geometries and analytic Riemannian coverings between them.

use std::f64::consts::TAU;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A point of a target space; one-dimensional spaces leave the second slot at 0.
pub type Point = [f64; 2];

/// Reduces `x` into `[0, period)`.
#[inline]
pub fn reduce(x: f64, period: f64) -> f64 {
    let r = x.rem_euclid(period);
    // rem_euclid rounds tiny negative inputs up to `period` itself
    if r >= period {
        0.0
    } else {
        r
    }
}

/// Periodic distance between two reals.
#[inline]
pub fn periodic_distance(a: f64, b: f64, period: f64) -> f64 {
    let mut r = (a - b).abs();
    if r >= period {
        r = r.rem_euclid(period);
    }
    r.min(period - r)
}

/// Signed shortest periodic displacement from `a` to `b`, in `[−period/2, period/2]`.
#[inline]
fn periodic_offset(a: f64, b: f64, period: f64) -> f64 {
    let r = (b - a).rem_euclid(period);
    if r > period / 2.0 {
        r - period
    } else {
        r
    }
}

/// The flat target manifolds used as bases and total spaces.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum TargetGeometry {
    RealLine,
    /// Circle of the given circumference, coordinates in `[0, L)`.
    Circle(f64),
    RealPlane,
    /// Flat torus with the given periods.
    FlatTorus2([f64; 2]),
}

impl TargetGeometry {
    pub fn dim(&self) -> usize {
        match self {
            TargetGeometry::RealLine | TargetGeometry::Circle(_) => 1,
            TargetGeometry::RealPlane | TargetGeometry::FlatTorus2(_) => 2,
        }
    }

    pub fn injectivity_radius(&self) -> f64 {
        match *self {
            TargetGeometry::RealLine | TargetGeometry::RealPlane => f64::INFINITY,
            TargetGeometry::Circle(l) => l / 2.0,
            TargetGeometry::FlatTorus2([a, b]) => a.min(b) / 2.0,
        }
    }

    pub fn diameter(&self) -> f64 {
        match *self {
            TargetGeometry::RealLine | TargetGeometry::RealPlane => f64::INFINITY,
            TargetGeometry::Circle(l) => l / 2.0,
            TargetGeometry::FlatTorus2([a, b]) => (a / 2.0).hypot(b / 2.0),
        }
    }

    pub fn is_real_line(&self) -> bool {
        matches!(self, TargetGeometry::RealLine)
    }

    /// Geodesic distance.
    #[inline]
    pub fn distance(&self, a: &Point, b: &Point) -> f64 {
        match *self {
            TargetGeometry::RealLine => (a[0] - b[0]).abs(),
            TargetGeometry::Circle(l) => periodic_distance(a[0], b[0], l),
            TargetGeometry::RealPlane => (a[0] - b[0]).hypot(a[1] - b[1]),
            TargetGeometry::FlatTorus2([l0, l1]) => {
                periodic_distance(a[0], b[0], l0).hypot(periodic_distance(a[1], b[1], l1))
            }
        }
    }

    /// Canonical coordinates of a point (periodic coordinates reduced).
    pub fn canonical(&self, p: &Point) -> Point {
        match *self {
            TargetGeometry::RealLine => [p[0], 0.0],
            TargetGeometry::Circle(l) => [reduce(p[0], l), 0.0],
            TargetGeometry::RealPlane => *p,
            TargetGeometry::FlatTorus2([l0, l1]) => [reduce(p[0], l0), reduce(p[1], l1)],
        }
    }

    /// Point at fraction `t` along a shortest geodesic from `a` to `b`.
    pub fn interpolate(&self, a: &Point, b: &Point, t: f64) -> Point {
        match *self {
            TargetGeometry::RealLine => [a[0] + t * (b[0] - a[0]), 0.0],
            TargetGeometry::RealPlane => [a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])],
            TargetGeometry::Circle(l) => [reduce(a[0] + t * periodic_offset(a[0], b[0], l), l), 0.0],
            TargetGeometry::FlatTorus2([l0, l1]) => [
                reduce(a[0] + t * periodic_offset(a[0], b[0], l0), l0),
                reduce(a[1] + t * periodic_offset(a[1], b[1], l1), l1),
            ],
        }
    }

    /// Finite, with canonical coordinates.
    pub fn is_valid(&self, p: &Point) -> bool {
        p[0].is_finite() && p[1].is_finite() && self.canonical(p) == *p
    }
}

/// The analytic covering families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CoveringFamily {
    /// `t ↦ t mod 2π`, ℝ → S¹.
    LineOverCircle,
    /// Circle of circumference `2πk` over the circle of circumference `2π`.
    KFoldCircle(u32),
    /// ℝ² → ℝ²/(2πℤ)².
    PlaneOverTorus,
}

/// An element of a deck group, acting by translation of the total-space coordinate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum DeckElement {
    Rank1(i64),
    Rank2(i64, i64),
}

impl fmt::Display for DeckElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DeckElement::Rank1(k) => write!(f, "{k}"),
            DeckElement::Rank2(a, b) => write!(f, "({a},{b})"),
        }
    }
}

/// A Riemannian covering `π: total → base` with its deck group.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoveringChart {
    family: CoveringFamily,
    base: TargetGeometry,
    total: TargetGeometry,
}

impl CoveringChart {
    pub fn new(family: CoveringFamily) -> Result<Self> {
        let (base, total) = match family {
            CoveringFamily::LineOverCircle => (TargetGeometry::Circle(TAU), TargetGeometry::RealLine),
            CoveringFamily::KFoldCircle(0) => {
                return Err(Error::InvalidParameter("k-fold covering needs k >= 1".into()))
            }
            CoveringFamily::KFoldCircle(k) => {
                (TargetGeometry::Circle(TAU), TargetGeometry::Circle(TAU * k as f64))
            }
            CoveringFamily::PlaneOverTorus => {
                (TargetGeometry::FlatTorus2([TAU, TAU]), TargetGeometry::RealPlane)
            }
        };
        Ok(CoveringChart { family, base, total })
    }

    pub fn line_over_circle() -> Self {
        Self::new(CoveringFamily::LineOverCircle).unwrap()
    }

    pub fn kfold_circle(k: u32) -> Result<Self> {
        Self::new(CoveringFamily::KFoldCircle(k))
    }

    pub fn plane_over_torus() -> Self {
        Self::new(CoveringFamily::PlaneOverTorus).unwrap()
    }

    pub fn family(&self) -> CoveringFamily {
        self.family
    }

    pub fn base(&self) -> TargetGeometry {
        self.base
    }

    pub fn total(&self) -> TargetGeometry {
        self.total
    }

    /// Injectivity radius of the base.
    pub fn inj(&self) -> f64 {
        self.base.injectivity_radius()
    }

    /// Configuration id: `r-over-s1`, `kfold:<k>` or `r2-over-t2`.
    pub fn id(&self) -> String {
        match self.family {
            CoveringFamily::LineOverCircle => "r-over-s1".into(),
            CoveringFamily::KFoldCircle(k) => format!("kfold:{k}"),
            CoveringFamily::PlaneOverTorus => "r2-over-t2".into(),
        }
    }

    pub fn project(&self, p: &Point) -> Point {
        self.base.canonical(p)
    }

    /// The unique preimage of `base_point` within the injectivity radius of `reference`.
    pub fn local_lift(&self, base_point: &Point, reference: &Point) -> Result<Point> {
        let b = self.base.canonical(base_point);
        let distance = self.base.distance(&b, &self.project(reference));
        let inj = self.inj();
        if !(distance < inj) {
            return Err(Error::AmbiguousLift { distance, inj });
        }
        let shift = |target: f64, from: f64| {
            let diff = target - from;
            from + (diff - TAU * (diff / TAU).round())
        };
        Ok(match self.family {
            CoveringFamily::LineOverCircle => [shift(b[0], reference[0]), 0.0],
            CoveringFamily::KFoldCircle(k) => {
                [reduce(shift(b[0], reference[0]), TAU * k as f64), 0.0]
            }
            CoveringFamily::PlaneOverTorus => {
                [shift(b[0], reference[0]), shift(b[1], reference[1])]
            }
        })
    }

    pub fn identity(&self) -> DeckElement {
        match self.family {
            CoveringFamily::PlaneOverTorus => DeckElement::Rank2(0, 0),
            _ => DeckElement::Rank1(0),
        }
    }

    fn validate(&self, elem: DeckElement) -> Result<()> {
        let ok = match (self.family, elem) {
            (CoveringFamily::LineOverCircle, DeckElement::Rank1(_)) => true,
            (CoveringFamily::KFoldCircle(k), DeckElement::Rank1(j)) => (0..k as i64).contains(&j),
            (CoveringFamily::PlaneOverTorus, DeckElement::Rank2(..)) => true,
            _ => false,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidDeckElement(elem.to_string()))
        }
    }

    /// Applies a deck transformation.
    pub fn deck_apply(&self, elem: DeckElement, p: &Point) -> Result<Point> {
        self.validate(elem)?;
        Ok(match (self.family, elem) {
            (CoveringFamily::LineOverCircle, DeckElement::Rank1(j)) => [p[0] + TAU * j as f64, 0.0],
            (CoveringFamily::KFoldCircle(k), DeckElement::Rank1(j)) => {
                [reduce(p[0] + TAU * j as f64, TAU * k as f64), 0.0]
            }
            (CoveringFamily::PlaneOverTorus, DeckElement::Rank2(a, b)) => {
                [p[0] + TAU * a as f64, p[1] + TAU * b as f64]
            }
            _ => unreachable!("validated above"),
        })
    }

    /// Group law of the deck group.
    pub fn compose(&self, a: DeckElement, b: DeckElement) -> Result<DeckElement> {
        self.validate(a)?;
        self.validate(b)?;
        Ok(match (self.family, a, b) {
            (CoveringFamily::KFoldCircle(k), DeckElement::Rank1(x), DeckElement::Rank1(y)) => {
                DeckElement::Rank1((x + y).rem_euclid(k as i64))
            }
            (_, DeckElement::Rank1(x), DeckElement::Rank1(y)) => DeckElement::Rank1(x + y),
            (_, DeckElement::Rank2(a0, a1), DeckElement::Rank2(b0, b1)) => {
                DeckElement::Rank2(a0 + b0, a1 + b1)
            }
            _ => unreachable!("validated above"),
        })
    }

    /// The deck element carrying `a` to `b`, if both lie in one fibre up to `tol`.
    pub fn deck_between(&self, a: &Point, b: &Point, tol: f64) -> Option<DeckElement> {
        let turns = |x: f64, y: f64| ((y - x) / TAU).round() as i64;
        let elem = match self.family {
            CoveringFamily::LineOverCircle => DeckElement::Rank1(turns(a[0], b[0])),
            CoveringFamily::KFoldCircle(k) => {
                DeckElement::Rank1(turns(a[0], b[0]).rem_euclid(k as i64))
            }
            CoveringFamily::PlaneOverTorus => {
                DeckElement::Rank2(turns(a[0], b[0]), turns(a[1], b[1]))
            }
        };
        let image = self.deck_apply(elem, a).ok()?;
        (self.total.distance(&image, b) <= tol).then_some(elem)
    }
}

impl std::str::FromStr for CoveringChart {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "r-over-s1" => Ok(Self::line_over_circle()),
            "r2-over-t2" => Ok(Self::plane_over_torus()),
            _ => {
                let k = s
                    .strip_prefix("kfold:")
                    .and_then(|k| k.parse::<u32>().ok())
                    .ok_or_else(|| Error::InvalidParameter(format!("unknown covering `{s}`")))?;
                Self::kfold_circle(k)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() < 1e-12
    }

    #[test]
    fn geometry_constants() {
        let c = TargetGeometry::Circle(3.0);
        assert_eq!(c.injectivity_radius(), 1.5);
        assert_eq!(c.diameter(), 1.5);
        assert!(TargetGeometry::RealLine.diameter().is_infinite());
        assert!(TargetGeometry::RealPlane.injectivity_radius().is_infinite());
        assert!(close(c.distance(&[0.1, 0.0], &[2.9, 0.0]), 0.2));
        assert!(close(TargetGeometry::FlatTorus2([1.0, 2.0]).distance(&[0.9, 0.0], &[0.0, 1.8]), 0.1f64.hypot(0.2)));
        assert!(close(c.distance(&[0.1, 0.0], &[6.2, 0.0]), 0.1));
    }

    #[test]
    fn geodesic_interpolation() {
        let c = TargetGeometry::Circle(3.0);
        // shortest arc from 2.8 to 0.2 crosses 0
        assert!(close(c.interpolate(&[2.8, 0.0], &[0.2, 0.0], 0.5)[0], 0.0) || close(c.interpolate(&[2.8, 0.0], &[0.2, 0.0], 0.5)[0], 3.0));
        assert!(close(c.interpolate(&[2.8, 0.0], &[0.2, 0.0], 0.25)[0], 2.9));
        let r = TargetGeometry::RealLine.interpolate(&[1.0, 0.0], &[3.0, 0.0], 0.25);
        assert_eq!(r, [1.5, 0.0]);
        let t = TargetGeometry::FlatTorus2([1.0, 1.0]);
        let m = t.interpolate(&[0.9, 0.5], &[0.1, 0.7], 0.5);
        assert!(close(t.distance(&m, &[0.0, 0.6]), 0.0));
    }

    #[test]
    fn projections() {
        let l = CoveringChart::line_over_circle();
        assert!(close(l.project(&[3.0 * PI, 0.0])[0], PI));
        assert_eq!(l.project(&[0.0, 0.0])[0], 0.0);
        let k2 = CoveringChart::kfold_circle(2).unwrap();
        assert!(close(k2.project(&[3.0 * PI, 0.0])[0], PI));
        assert!(close(l.project(&[-1e-20, 0.0])[0], 0.0));
    }

    #[test]
    fn local_lifts() {
        let l = CoveringChart::line_over_circle();
        assert!(close(l.local_lift(&[PI / 2.0, 0.0], &[0.0, 0.0]).unwrap()[0], PI / 2.0));
        assert!(close(l.local_lift(&[1.5 * PI, 0.0], &[0.0, 0.0]).unwrap()[0], -PI / 2.0));
        assert!(matches!(l.local_lift(&[PI, 0.0], &[0.0, 0.0]), Err(Error::AmbiguousLift { .. })));
        assert!(close(l.local_lift(&[0.1, 0.0], &[20.0 * PI, 0.0]).unwrap()[0], 20.0 * PI + 0.1));
        let k3 = CoveringChart::kfold_circle(3).unwrap();
        assert!(close(k3.local_lift(&[0.1, 0.0], &[6.0 * PI - 0.05, 0.0]).unwrap()[0], 0.1));
        let p = CoveringChart::plane_over_torus();
        let y = p.local_lift(&[0.2, 6.2], &[TAU, 0.0]).unwrap();
        assert!(close(y[0], TAU + 0.2) && close(y[1], 6.2 - TAU));
    }

    #[test]
    fn deck_actions() {
        let l = CoveringChart::line_over_circle();
        assert!(close(l.deck_apply(DeckElement::Rank1(1), &[0.5, 0.0]).unwrap()[0], 0.5 + TAU));
        assert_eq!(l.deck_apply(DeckElement::Rank1(0), &[0.5, 0.0]).unwrap()[0], 0.5);
        let k3 = CoveringChart::kfold_circle(3).unwrap();
        assert!(close(k3.deck_apply(DeckElement::Rank1(2), &[3.0 * PI, 0.0]).unwrap()[0], PI));
        assert!(matches!(k3.deck_apply(DeckElement::Rank1(3), &[0.0, 0.0]), Err(Error::InvalidDeckElement(_))));
        assert!(l.deck_apply(DeckElement::Rank2(1, 0), &[0.0, 0.0]).is_err());
        assert_eq!(k3.compose(DeckElement::Rank1(2), DeckElement::Rank1(2)).unwrap(), DeckElement::Rank1(1));
        let p = CoveringChart::plane_over_torus();
        assert_eq!(p.deck_between(&[0.1, 0.2], &[0.1 - TAU, 0.2 + 2.0 * TAU], 1e-9), Some(DeckElement::Rank2(-1, 2)));
        assert_eq!(l.deck_between(&[0.1, 0.0], &[0.2, 0.0], 1e-9), None);
    }

    #[test]
    fn ids_round_trip() {
        for id in ["r-over-s1", "kfold:3", "r2-over-t2"] {
            assert_eq!(id.parse::<CoveringChart>().unwrap().id(), id);
        }
        assert!("kfold:x".parse::<CoveringChart>().is_err());
        assert!("kfold:0".parse::<CoveringChart>().is_err());
    }
}
