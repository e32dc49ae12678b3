//! Liftings through coverings by nearest-sheet continuation, with holonomy
//! certificates, winding numbers and deck alignment.

use std::collections::{BTreeMap, VecDeque};

use serde::Serialize;

use crate::covering::{periodic_distance, CoveringChart, DeckElement, Point, TargetGeometry};
use crate::energy::Field;
use crate::error::{Error, Result};

/// Closure defects above this are treated as genuine deck jumps.
pub const HOLONOMY_TOLERANCE: f64 = 1e-9;

/// Tolerance for "same base point" and "same total point" comparisons.
pub const MATCH_TOLERANCE: f64 = 1e-9;

/// A lifted field with its construction data.
#[derive(Debug, Clone, PartialEq)]
pub struct LiftResult {
    pub lifted: Field,
    pub seed_index: usize,
    pub seed_sheet: Point,
    /// Largest closure defect over the non-tree grid edges.
    pub max_holonomy_residual: f64,
    /// BFS parent of every index (`None` for the seed).
    pub parent: Vec<Option<usize>>,
}

/// Outcome of comparing two liftings of the same field.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Alignment {
    /// `deck_apply(τ, a[i]) = b[i]` for every index.
    Deck(DeckElement),
    /// No single deck element works; the best one misses this fraction of points.
    NotRelated { mismatch_fraction: f64 },
}

/// Lifts a sequence of base points, each step continuing from the previous lift.
pub fn lift_path(values: &[Point], cov: &CoveringChart, seed_sheet: &Point) -> Result<Vec<Point>> {
    let base = cov.base();
    let inj = cov.inj();
    for (k, w) in values.windows(2).enumerate() {
        let distance = base.distance(&base.canonical(&w[0]), &base.canonical(&w[1]));
        if !(distance < inj) {
            return Err(Error::StepTooLarge { step: k, distance, inj });
        }
    }
    let mut out = Vec::with_capacity(values.len());
    let mut prev = *seed_sheet;
    for v in values {
        prev = cov.local_lift(v, &prev)?;
        out.push(prev);
    }
    Ok(out)
}

/// Lifts a base field by breadth-first propagation from `seed_index`.
///
/// Neighbours are visited in increasing index order. Every non-tree edge is
/// then checked for closure; a defect above [`HOLONOMY_TOLERANCE`] raises
/// [`Error::HolonomyObstruction`] with the grid cycle through that edge.
pub fn lift_field(field: &Field, cov: &CoveringChart, seed_index: usize, seed_sheet: &Point) -> Result<LiftResult> {
    if field.space() != cov.base() {
        return Err(Error::DomainMismatch);
    }
    let dom = field.domain();
    let len = field.len();
    if seed_index >= len {
        return Err(Error::IndexOutOfRange { index: seed_index, len });
    }
    let inj = cov.inj();
    let edges = dom.edges();
    for &(i, j) in &edges {
        let distance = field.target_distance(i, j);
        if !(distance < inj) {
            return Err(Error::EdgeTooLarge { from: i, to: j, distance, inj });
        }
    }

    let mut lifted: Vec<Option<Point>> = vec![None; len];
    let mut parent = vec![None; len];
    lifted[seed_index] = Some(cov.local_lift(&field.value(seed_index), seed_sheet)?);
    let mut queue = VecDeque::from([seed_index]);
    while let Some(i) = queue.pop_front() {
        let here = lifted[i].expect("queued nodes are lifted");
        for j in dom.neighbors(i) {
            if lifted[j].is_none() {
                lifted[j] = Some(cov.local_lift(&field.value(j), &here)?);
                parent[j] = Some(i);
                queue.push_back(j);
            }
        }
    }
    let lifted: Vec<Point> = lifted.into_iter().map(|v| v.expect("grid graph is connected")).collect();

    let total = cov.total();
    let mut worst = (0.0f64, None);
    for &(i, j) in &edges {
        if parent[j] == Some(i) || parent[i] == Some(j) {
            continue;
        }
        let expected = cov.local_lift(&field.value(j), &lifted[i])?;
        let residual = total.distance(&expected, &lifted[j]);
        if residual > worst.0 {
            worst = (residual, Some((i, j)));
        }
    }
    if let (residual, Some((i, j))) = worst {
        if residual > HOLONOMY_TOLERANCE {
            return Err(Error::HolonomyObstruction { cycle: tree_cycle(&parent, i, j), residual });
        }
    }
    Ok(LiftResult {
        lifted: Field::new(dom.clone(), total, lifted)?,
        seed_index,
        seed_sheet: *seed_sheet,
        max_holonomy_residual: worst.0,
        parent,
    })
}

/// The cycle formed by tree paths from `i` and `j` to their common ancestor
/// and the edge `(j, i)`: listed as `i, …, ancestor, …, j`.
fn tree_cycle(parent: &[Option<usize>], i: usize, j: usize) -> Vec<usize> {
    let to_root = |mut k: usize| {
        let mut path = vec![k];
        while let Some(p) = parent[k] {
            path.push(p);
            k = p;
        }
        path
    };
    let (pi, pj) = (to_root(i), to_root(j));
    let on_j: std::collections::HashSet<usize> = pj.iter().copied().collect();
    let cut_i = pi.iter().position(|k| on_j.contains(k)).expect("paths share the root");
    let ancestor = pi[cut_i];
    let cut_j = pj.iter().position(|&k| k == ancestor).expect("ancestor on both paths");
    let mut cycle: Vec<usize> = pi[..=cut_i].to_vec();
    cycle.extend(pj[..cut_j].iter().rev());
    cycle
}

/// Winding number of a closed loop on a circle (the last sample neighbours the first).
pub fn winding(values: &[Point], space: TargetGeometry) -> Result<i64> {
    let TargetGeometry::Circle(l) = space else {
        return Err(Error::InvalidParameter("winding numbers need a circle target".into()));
    };
    let n = values.len();
    let mut total = 0.0;
    for k in 0..n {
        let (a, b) = (values[k][0], values[(k + 1) % n][0]);
        let distance = periodic_distance(a, b, l);
        if !(distance < l / 2.0) {
            return Err(Error::StepTooLarge { step: k, distance, inj: l / 2.0 });
        }
        let diff = b - a;
        total += diff - l * (diff / l).round();
    }
    Ok((total / l).round() as i64)
}

/// Finds the deck transformation carrying `lift_a` onto `lift_b`, if one exists.
pub fn deck_align(lift_a: &Field, lift_b: &Field, cov: &CoveringChart) -> Result<Alignment> {
    if lift_a.space() != cov.total() || lift_b.space() != cov.total() || lift_a.domain() != lift_b.domain() {
        return Err(Error::DomainMismatch);
    }
    let base = cov.base();
    let defect = lift_a
        .values()
        .iter()
        .zip(lift_b.values())
        .map(|(a, b)| base.distance(&cov.project(a), &cov.project(b)))
        .fold(0.0, f64::max);
    if defect > MATCH_TOLERANCE {
        return Err(Error::ProjectionMismatch(defect));
    }
    let mut counts: BTreeMap<DeckElement, usize> = BTreeMap::new();
    for (a, b) in lift_a.values().iter().zip(lift_b.values()) {
        if let Some(tau) = cov.deck_between(a, b, MATCH_TOLERANCE) {
            *counts.entry(tau).or_default() += 1;
        }
    }
    let n = lift_a.len();
    let mut best: Option<(DeckElement, usize)> = None;
    for (&tau, &c) in &counts {
        if best.is_none_or(|(_, b)| c > b) {
            best = Some((tau, c));
        }
    }
    Ok(match best {
        Some((tau, c)) if c == n => Alignment::Deck(tau),
        Some((_, c)) => Alignment::NotRelated { mismatch_fraction: 1.0 - c as f64 / n as f64 },
        None => Alignment::NotRelated { mismatch_fraction: 1.0 },
    })
}

/// Largest `|d_total(ũ_i, ũ_j) − d_base(u_i, u_j)|` over grid edges whose base
/// distance is below the injectivity radius. Zero for nearest-sheet liftings.
pub fn chain_rule_residual(field: &Field, lift: &Field, cov: &CoveringChart) -> Result<f64> {
    if field.space() != cov.base() || lift.space() != cov.total() || field.domain() != lift.domain() {
        return Err(Error::DomainMismatch);
    }
    let base = cov.base();
    let defect = field
        .values()
        .iter()
        .zip(lift.values())
        .map(|(u, l)| base.distance(u, &cov.project(l)))
        .fold(0.0, f64::max);
    if defect > MATCH_TOLERANCE {
        return Err(Error::ProjectionMismatch(defect));
    }
    let inj = cov.inj();
    let total = cov.total();
    Ok(field
        .domain()
        .edges()
        .into_iter()
        .filter_map(|(i, j)| {
            let db = field.target_distance(i, j);
            (db < inj).then(|| (total.distance(&lift.value(i), &lift.value(j)) - db).abs())
        })
        .fold(0.0, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{make_domain, DomainKind};
    use std::f64::consts::{PI, TAU};

    fn circle() -> TargetGeometry {
        TargetGeometry::Circle(TAU)
    }

    #[test]
    fn path_lifting() {
        let cov = CoveringChart::line_over_circle();
        let loop16: Vec<Point> = (0..=16).map(|k| circle().canonical(&[TAU * k as f64 / 16.0, 0.0])).collect();
        let lifted = lift_path(&loop16, &cov, &[0.0, 0.0]).unwrap();
        assert!((lifted[16][0] - lifted[0][0] - TAU).abs() < 1e-9);
        let constant = vec![[1.0, 0.0]; 5];
        assert!(lift_path(&constant, &cov, &[1.0 + TAU, 0.0]).unwrap().iter().all(|v| v[0] == 1.0 + TAU));
        let jump = vec![[0.0, 0.0], [PI, 0.0]];
        assert!(matches!(lift_path(&jump, &cov, &[0.0, 0.0]), Err(Error::StepTooLarge { step: 0, .. })));
    }

    #[test]
    fn windings() {
        for (k, n) in [(-2i64, 64usize), (7, 256), (1, 64)] {
            let v: Vec<Point> = (0..n).map(|i| circle().canonical(&[TAU * k as f64 * i as f64 / n as f64, 0.0])).collect();
            assert_eq!(winding(&v, circle()).unwrap(), k);
        }
        assert_eq!(winding(&vec![[2.0, 0.0]; 10], circle()).unwrap(), 0);
        assert!(winding(&[[0.0, 0.0], [PI, 0.0]], circle()).is_err());
    }

    #[test]
    fn torus_winding_is_obstructed() {
        let cov = CoveringChart::line_over_circle();
        let d = make_domain(DomainKind::Torus, 1, 32, 1.0).unwrap();
        let u = Field::from_fn(&d, circle(), |x| [TAU * x[0], 0.0]);
        match lift_field(&u, &cov, 0, &[u.value(0)[0], 0.0]) {
            Err(Error::HolonomyObstruction { cycle, residual }) => {
                assert_eq!(cycle.len(), 32);
                assert!((residual - TAU).abs() < 1e-9);
            }
            other => panic!("expected obstruction, got {other:?}"),
        }
    }

    #[test]
    fn smooth_cube_field_lifts_to_its_phase() {
        let cov = CoveringChart::line_over_circle();
        let d = make_domain(DomainKind::Cube, 2, 24, 1.0).unwrap();
        let phi = |x: [f64; 2]| 9.0 * x[0] * x[1] + 4.0 * (3.0 * x[0]).sin() - 2.0;
        let u = Field::from_fn(&d, circle(), |x| [phi(x), 0.0]);
        let res = lift_field(&u, &cov, 37, &[0.0, 0.0]).unwrap();
        assert!(res.max_holonomy_residual <= 1e-9);
        let exact = Field::real(&d, phi);
        let Alignment::Deck(tau) = deck_align(&exact, &res.lifted, &cov).unwrap() else { panic!() };
        for (a, b) in exact.values().iter().zip(res.lifted.values()) {
            assert!((cov.deck_apply(tau, a).unwrap()[0] - b[0]).abs() <= 1e-9);
        }
        assert!(chain_rule_residual(&u, &res.lifted, &cov).unwrap() <= 1e-12);
    }

    #[test]
    fn constant_field_lift() {
        let cov = CoveringChart::plane_over_torus();
        let d = make_domain(DomainKind::Torus, 2, 6, 1.0).unwrap();
        let u = Field::constant(&d, cov.base(), [1.0, 2.0]);
        let res = lift_field(&u, &cov, 0, &[1.0 + TAU, 2.0]).unwrap();
        assert_eq!(res.max_holonomy_residual, 0.0);
        assert!(res.lifted.values().iter().all(|v| *v == [1.0 + TAU, 2.0]));
    }

    #[test]
    fn alignment_cases() {
        let cov = CoveringChart::line_over_circle();
        let d = make_domain(DomainKind::Interval, 1, 40, 1.0).unwrap();
        let a = Field::real(&d, |x| 5.0 * x[0]);
        let shifted = a.map(TargetGeometry::RealLine, |v| [v[0] + TAU, 0.0]);
        assert_eq!(deck_align(&a, &shifted, &cov).unwrap(), Alignment::Deck(DeckElement::Rank1(1)));
        assert_eq!(deck_align(&a, &a, &cov).unwrap(), Alignment::Deck(DeckElement::Rank1(0)));
        let half = Field::real(&d, |x| 5.0 * x[0] + if x[0] > 0.5 { TAU } else { 0.0 });
        assert_eq!(deck_align(&a, &half, &cov).unwrap(), Alignment::NotRelated { mismatch_fraction: 0.5 });
        let other = Field::real(&d, |x| 5.0 * x[0] + 0.1);
        assert!(matches!(deck_align(&a, &other, &cov), Err(Error::ProjectionMismatch(_))));
    }

    #[test]
    fn corrupted_lift_residual() {
        let cov = CoveringChart::line_over_circle();
        let d = make_domain(DomainKind::Interval, 1, 30, 1.0).unwrap();
        let phi = Field::real(&d, |x| 3.0 * x[0]);
        let u = phi.project(&cov).unwrap();
        let mut vals = phi.values().to_vec();
        vals[10][0] += TAU;
        let bad = Field::new(d, TargetGeometry::RealLine, vals).unwrap();
        assert!(chain_rule_residual(&u, &bad, &cov).unwrap() >= TAU - cov.inj());
    }
}
