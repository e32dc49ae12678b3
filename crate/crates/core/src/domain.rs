//! Flat grid domains: intervals, cubes and tori sampled at cell midpoints.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Shape of a grid domain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DomainKind {
    Interval,
    Cube,
    Torus,
}

impl DomainKind {
    pub fn name(self) -> &'static str {
        match self {
            DomainKind::Interval => "interval",
            DomainKind::Cube => "cube",
            DomainKind::Torus => "torus",
        }
    }
}

impl std::str::FromStr for DomainKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "interval" => Ok(DomainKind::Interval),
            "cube" => Ok(DomainKind::Cube),
            "torus" => Ok(DomainKind::Torus),
            other => Err(format!("unknown domain kind `{other}`")),
        }
    }
}

/// A uniform grid of `n^m` cells on `[0, side]^m`, possibly periodic.
///
/// Points sit at cell midpoints `(i + 1/2) h` with `h = side / n`. Flat
/// indices are row-major with axis 0 varying fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct GridDomain {
    kind: DomainKind,
    m: usize,
    n: usize,
    side: f64,
    periodic: [bool; 2],
}

/// A maximal run of grid indices along one axis.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinePath {
    pub indices: Vec<usize>,
    /// The last index neighbours the first (periodic axis).
    pub closed: bool,
}

/// Builds a domain, validating dimension and resolution.
pub fn make_domain(kind: DomainKind, m: usize, n: usize, side: f64) -> Result<GridDomain> {
    GridDomain::new(kind, m, n, side)
}

impl GridDomain {
    pub fn new(kind: DomainKind, m: usize, n: usize, side: f64) -> Result<Self> {
        if !(1..=2).contains(&m) || (kind == DomainKind::Interval && m != 1) {
            return Err(Error::InvalidDimension(m));
        }
        if n < 2 {
            return Err(Error::InvalidResolution(n));
        }
        if !(side.is_finite() && side > 0.0) {
            return Err(Error::InvalidSide(side));
        }
        let per = kind == DomainKind::Torus;
        Ok(GridDomain { kind, m, n, side, periodic: [per, per && m == 2] })
    }

    pub fn kind(&self) -> DomainKind {
        self.kind
    }

    /// Spatial dimension.
    pub fn dim(&self) -> usize {
        self.m
    }

    /// Points per axis.
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn side(&self) -> f64 {
        self.side
    }

    pub fn periodic(&self) -> [bool; 2] {
        self.periodic
    }

    /// Total number of grid points.
    pub fn len(&self) -> usize {
        self.n.pow(self.m as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Grid spacing.
    pub fn h(&self) -> f64 {
        self.side / self.n as f64
    }

    /// Measure carried by every cell.
    pub fn weight(&self) -> f64 {
        self.h().powi(self.m as i32)
    }

    pub fn total_measure(&self) -> f64 {
        self.weight() * self.len() as f64
    }

    pub fn is_convex(&self) -> bool {
        self.kind != DomainKind::Torus
    }

    /// Diameter of the continuous domain.
    pub fn diameter(&self) -> f64 {
        let per_axis = if self.kind == DomainKind::Torus { self.side / 2.0 } else { self.side };
        per_axis * (self.m as f64).sqrt()
    }

    /// Per-axis grid coordinates of a flat index.
    pub fn multi_index(&self, i: usize) -> [usize; 2] {
        if self.m == 1 {
            [i, 0]
        } else {
            [i % self.n, i / self.n]
        }
    }

    pub fn flat_index(&self, c: [usize; 2]) -> usize {
        c[0] + self.n * c[1]
    }

    /// Midpoint coordinate of cell `k` along any axis.
    pub fn coordinate(&self, k: usize) -> f64 {
        (k as f64 + 0.5) * self.h()
    }

    /// Physical coordinates of a grid point (second component 0 in 1D).
    pub fn point(&self, i: usize) -> [f64; 2] {
        let c = self.multi_index(i);
        let y = if self.m == 2 { self.coordinate(c[1]) } else { 0.0 };
        [self.coordinate(c[0]), y]
    }

    fn check(&self, i: usize) -> Result<()> {
        if i < self.len() {
            Ok(())
        } else {
            Err(Error::IndexOutOfRange { index: i, len: self.len() })
        }
    }

    /// Distance along one axis between cells whose indices differ by `delta`.
    pub fn axis_offset_distance(&self, axis: usize, delta: usize) -> f64 {
        let delta = if self.periodic[axis] { delta.min(self.n - delta) } else { delta };
        delta as f64 * self.h()
    }

    /// Distance between two points given their absolute index offsets per axis.
    pub fn offset_distance(&self, d0: usize, d1: usize) -> f64 {
        let a = self.axis_offset_distance(0, d0);
        if self.m == 1 {
            a
        } else {
            a.hypot(self.axis_offset_distance(1, d1))
        }
    }

    /// Absolute index offsets per axis between two flat indices.
    #[inline]
    pub fn offsets(&self, i: usize, j: usize) -> (usize, usize) {
        if self.m == 1 {
            (i.abs_diff(j), 0)
        } else {
            let (a, b) = (self.multi_index(i), self.multi_index(j));
            (a[0].abs_diff(b[0]), a[1].abs_diff(b[1]))
        }
    }

    /// Geodesic distance; the periodic minimum on tori.
    pub fn geodesic_distance(&self, i: usize, j: usize) -> Result<f64> {
        self.check(i)?;
        self.check(j)?;
        let (d0, d1) = self.offsets(i, j);
        Ok(self.offset_distance(d0, d1))
    }

    /// All maximal index paths along `axis`; every index lies on exactly one.
    pub fn line_sections(&self, axis: usize) -> Result<Vec<LinePath>> {
        if axis >= self.m {
            return Err(Error::IndexOutOfRange { index: axis, len: self.m });
        }
        let lines = if self.m == 1 { 1 } else { self.n };
        Ok((0..lines)
            .map(|other| LinePath {
                indices: (0..self.n)
                    .map(|k| {
                        let mut c = [0, 0];
                        c[axis] = k;
                        c[1 - axis] = other;
                        self.flat_index(c)
                    })
                    .collect(),
                closed: self.periodic[axis],
            })
            .collect())
    }

    /// Neighbour of `i` one step along `axis` in direction `forward`, if any.
    pub fn step(&self, i: usize, axis: usize, forward: bool) -> Option<usize> {
        let mut c = self.multi_index(i);
        let k = c[axis];
        c[axis] = match (forward, self.periodic[axis]) {
            (true, _) if k + 1 < self.n => k + 1,
            (true, true) => 0,
            (false, _) if k > 0 => k - 1,
            (false, true) => self.n - 1,
            _ => return None,
        };
        Some(self.flat_index(c))
    }

    /// Grid-graph neighbours of `i` in increasing index order.
    pub fn neighbors(&self, i: usize) -> Vec<usize> {
        let mut out: Vec<usize> = (0..self.m)
            .flat_map(|axis| [self.step(i, axis, false), self.step(i, axis, true)])
            .flatten()
            .filter(|&j| j != i)
            .collect();
        out.sort_unstable();
        out.dedup();
        out
    }

    /// Undirected grid-graph edges `(i, j)` with `i < j`, wrap included on periodic axes.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::with_capacity(self.len() * self.m);
        for i in 0..self.len() {
            for j in self.neighbors(i) {
                if i < j {
                    out.push((i, j));
                }
            }
        }
        out
    }

    /// Table of `f(distance)` indexed by per-axis index offsets; see [`OffsetTable`].
    pub fn offset_table(&self, f: impl Fn(f64) -> f64) -> OffsetTable {
        let rows = if self.m == 1 { 1 } else { self.n };
        let mut values = Vec::with_capacity(self.n * rows);
        for d1 in 0..rows {
            for d0 in 0..self.n {
                values.push(f(self.offset_distance(d0, d1)));
            }
        }
        OffsetTable { n: self.n, m: self.m, values }
    }
}

/// Precomputed function of the domain distance; distances on these grids
/// depend only on the absolute index offset per axis.
#[derive(Debug, Clone)]
pub struct OffsetTable {
    n: usize,
    m: usize,
    values: Vec<f64>,
}

impl OffsetTable {
    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        if self.m == 1 {
            self.values[i.abs_diff(j)]
        } else {
            let (a0, a1) = (i % self.n, i / self.n);
            let (b0, b1) = (j % self.n, j / self.n);
            self.values[a0.abs_diff(b0) + self.n * a1.abs_diff(b1)]
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn midpoints_and_weights() {
        let d = make_domain(DomainKind::Torus, 1, 4, 1.0).unwrap();
        let xs: Vec<f64> = (0..4).map(|i| d.point(i)[0]).collect();
        assert_eq!(xs, vec![0.125, 0.375, 0.625, 0.875]);
        assert_eq!(d.weight(), 0.25);
        let d = make_domain(DomainKind::Interval, 1, 2, 1.0).unwrap();
        assert_eq!((d.point(0)[0], d.point(1)[0]), (0.25, 0.75));
        let d = make_domain(DomainKind::Cube, 2, 8, 1.0).unwrap();
        assert_eq!(d.len(), 64);
        assert!((d.total_measure() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn construction_errors() {
        assert_eq!(make_domain(DomainKind::Cube, 3, 4, 1.0), Err(Error::InvalidDimension(3)));
        assert_eq!(make_domain(DomainKind::Interval, 2, 4, 1.0), Err(Error::InvalidDimension(2)));
        assert_eq!(make_domain(DomainKind::Torus, 1, 1, 1.0), Err(Error::InvalidResolution(1)));
    }

    #[test]
    fn distances() {
        let d = make_domain(DomainKind::Interval, 1, 4, 1.0).unwrap();
        assert_eq!(d.geodesic_distance(0, 3).unwrap(), 0.75);
        let t = make_domain(DomainKind::Torus, 1, 4, 1.0).unwrap();
        assert_eq!(t.geodesic_distance(0, 3).unwrap(), 0.25);
        assert_eq!(t.geodesic_distance(2, 2).unwrap(), 0.0);
        assert!(matches!(t.geodesic_distance(0, 4), Err(Error::IndexOutOfRange { .. })));
        let c = make_domain(DomainKind::Cube, 2, 4, 1.0).unwrap();
        assert!((c.geodesic_distance(0, 15).unwrap() - 0.75 * 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn sections() {
        let c = make_domain(DomainKind::Cube, 2, 3, 1.0).unwrap();
        let s = c.line_sections(0).unwrap();
        assert_eq!(s.len(), 3);
        assert!(s.iter().all(|l| l.indices.len() == 3 && !l.closed));
        assert_eq!(s[1].indices, vec![3, 4, 5]);
        assert_eq!(c.line_sections(1).unwrap()[0].indices, vec![0, 3, 6]);
        let t = make_domain(DomainKind::Torus, 1, 8, 1.0).unwrap();
        let s = t.line_sections(0).unwrap();
        assert_eq!(s.len(), 1);
        assert!(s[0].closed && s[0].indices.len() == 8);
        let t2 = make_domain(DomainKind::Torus, 2, 4, 1.0).unwrap();
        let s = t2.line_sections(1).unwrap();
        assert_eq!(s.len(), 4);
        assert!(s.iter().all(|l| l.closed && l.indices.len() == 4));
        assert!(t.line_sections(1).is_err());
    }

    #[test]
    fn graph_edges() {
        let t = make_domain(DomainKind::Torus, 1, 4, 1.0).unwrap();
        assert_eq!(t.edges(), vec![(0, 1), (0, 3), (1, 2), (2, 3)]);
        let c = make_domain(DomainKind::Cube, 2, 3, 1.0).unwrap();
        assert_eq!(c.edges().len(), 12);
        assert_eq!(c.neighbors(4), vec![1, 3, 5, 7]);
        // two-point periodic axis: both directions hit the same neighbour
        let t2 = make_domain(DomainKind::Torus, 1, 2, 1.0).unwrap();
        assert_eq!(t2.neighbors(0), vec![1]);
    }

    #[test]
    fn offset_table_matches_distance() {
        for d in [
            make_domain(DomainKind::Torus, 2, 5, 2.0).unwrap(),
            make_domain(DomainKind::Cube, 2, 4, 1.0).unwrap(),
            make_domain(DomainKind::Interval, 1, 7, 3.0).unwrap(),
        ] {
            let tab = d.offset_table(|x| x);
            for i in 0..d.len() {
                for j in 0..d.len() {
                    assert_eq!(tab.get(i, j), d.geodesic_distance(i, j).unwrap());
                }
            }
        }
    }
}
