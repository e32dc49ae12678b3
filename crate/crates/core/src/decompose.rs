//! Splitting real fields into a fractional part and a first-order part, and
//! the mollification device used for density arguments.

use rayon::prelude::*;

use crate::domain::{GridDomain, OffsetTable};
use crate::energy::{dirichlet, gagliardo, pair_energy, truncated, EnergyValue, Field};
use crate::error::{Error, Result};
use crate::numeric::{csum, pow};

/// Number of geometric mollification scales tried by [`split_sum_space`].
pub const LADDER_SCALES: usize = 16;

/// Coordinate-descent budget of [`split_sum_space`].
pub const REFINE_STEPS: usize = 200;

/// Cells line-searched per gradient evaluation during refinement.
const CELLS_PER_ROUND: usize = 20;

/// A split `f = g + h`.
#[derive(Debug, Clone, PartialEq)]
pub struct DecompositionResult {
    pub g: Field,
    pub h: Field,
    /// `gagliardo(g, s, p) + dirichlet(h, sp)`.
    pub objective: f64,
    /// Mollification width of the starting split: 0 means `h = f`, infinity means `h = 0`.
    pub scale_chosen: f64,
    pub refine_iterations: usize,
}

fn bump(z2: f64) -> f64 {
    if z2 < 1.0 {
        let t = 1.0 - z2;
        t * t * t
    } else {
        0.0
    }
}

/// Index of cell `k` (possibly outside `0..n`) after periodic wrap or
/// reflection about the domain boundary.
fn fold(k: i64, n: usize, periodic: bool) -> usize {
    let n = n as i64;
    if periodic {
        k.rem_euclid(n) as usize
    } else {
        let r = k.rem_euclid(2 * n);
        (if r >= n { 2 * n - 1 - r } else { r }) as usize
    }
}

/// Convolution with the normalized bump `(1 − |z|²)³₊` of radius `scale`.
pub fn mollify(f: &Field, scale: f64) -> Result<Field> {
    let vals = f.reals()?;
    if !(scale >= 0.0) {
        return Err(Error::InvalidParameter(format!("mollification scale {scale} must be nonnegative")));
    }
    let dom = f.domain();
    let h = dom.h();
    let radius = if scale.is_finite() { (scale / h).floor() as i64 } else { i64::MAX };
    let reach = radius.min(4 * dom.n() as i64);
    let mut taps: Vec<([i64; 2], f64)> = Vec::new();
    let r1 = if dom.dim() == 2 { reach } else { 0 };
    for k1 in -r1..=r1 {
        for k0 in -reach..=reach {
            let z2 = ((k0 * k0 + k1 * k1) as f64) * h * h / (scale * scale);
            let w = bump(z2);
            if w > 0.0 {
                taps.push(([k0, k1], w));
            }
        }
    }
    if taps.len() <= 1 {
        return Ok(f.clone());
    }
    let norm = csum(taps.iter().map(|t| t.1));
    let per = dom.periodic();
    let n = dom.n();
    let out: Vec<f64> = (0..dom.len())
        .into_par_iter()
        .map(|i| {
            let c = dom.multi_index(i);
            csum(taps.iter().map(|&([k0, k1], w)| {
                let a = fold(c[0] as i64 + k0, n, per[0]);
                let b = if dom.dim() == 2 { fold(c[1] as i64 + k1, n, per[1]) } else { 0 };
                w * vals[dom.flat_index([a, b])]
            })) / norm
        })
        .collect();
    Field::from_reals(dom, &out)
}

/// `Φ(t) = |t|^p` for `|t| ≤ 1`, continued linearly with slope `p` beyond.
pub fn phi(t: f64, p: f64) -> f64 {
    let a = t.abs();
    if a <= 1.0 {
        pow(a, p)
    } else {
        1.0 + p * (a - 1.0)
    }
}

/// Energy `∬ Φ(u(y) − u(x)) / |y−x|^{m+sp}`, nonincreasing under mollification on tori.
pub fn phi_energy(f: &Field, s: f64, p: f64) -> Result<EnergyValue> {
    f.reals()?;
    pair_energy(f, s * p, None, |d| phi(d, p))
}

fn check_pair(g: &Field, h: &Field) -> Result<()> {
    g.reals()?;
    h.reals()?;
    if g.domain() != h.domain() {
        return Err(Error::DomainMismatch);
    }
    Ok(())
}

/// `gagliardo(g, s, p) + dirichlet(h, sp)`.
pub fn sum_objective(g: &Field, h: &Field, s: f64, p: f64) -> Result<f64> {
    check_pair(g, h)?;
    if !(s * p > 1.0) {
        return Err(Error::SubcriticalExponent(s * p));
    }
    Ok(gagliardo(g, s, p)?.value + dirichlet(h, s * p)?.value)
}

/// Geometric mollification widths from the grid spacing to the domain diameter.
pub fn ladder_scales(dom: &GridDomain) -> Vec<f64> {
    let (lo, hi) = (dom.h(), dom.diameter());
    (0..LADDER_SCALES).map(|k| lo * (hi / lo).powf(k as f64 / (LADDER_SCALES - 1) as f64)).collect()
}

/// Splits `f` by a mollification ladder followed by coordinate descent on `g`.
///
/// Candidates are `h = f`, `h = 0` and `h = mollify(f, scale)` over
/// [`ladder_scales`]; the best is refined by at most [`REFINE_STEPS`] cellwise
/// line searches that only accept decreases of the objective.
pub fn split_sum_space(f: &Field, s: f64, p: f64) -> Result<DecompositionResult> {
    let fv = f.reals()?;
    if !(s * p > 1.0) {
        return Err(Error::SubcriticalExponent(s * p));
    }
    let dom = f.domain();
    let zero = Field::from_reals(dom, &vec![0.0; fv.len()])?;
    let mut scales = vec![0.0];
    scales.extend(ladder_scales(dom));
    scales.push(f64::INFINITY);
    let candidates: Vec<(f64, Field, f64)> = scales
        .par_iter()
        .map(|&scale| {
            let h = if scale.is_infinite() { zero.clone() } else { mollify(f, scale)? };
            let g: Vec<f64> = fv.iter().zip(h.values()).map(|(a, b)| a - b[0]).collect();
            let g = Field::from_reals(dom, &g)?;
            let obj = sum_objective(&g, &h, s, p)?;
            Ok((scale, g, obj))
        })
        .collect::<Result<_>>()?;
    let mut best = 0;
    for (k, c) in candidates.iter().enumerate() {
        if c.2 < candidates[best].2 {
            best = k;
        }
    }
    let (scale_chosen, g0, _) = candidates.into_iter().nth(best).expect("nonempty ladder");

    let mut refiner = Refiner::new(dom, fv.clone(), g0.reals()?, s, p);
    let refine_iterations = refiner.run(REFINE_STEPS);
    let g = Field::from_reals(dom, &refiner.g)?;
    let hv: Vec<f64> = fv.iter().zip(&refiner.g).map(|(a, b)| a - b).collect();
    let h = Field::from_reals(dom, &hv)?;
    let objective = sum_objective(&g, &h, s, p)?;
    Ok(DecompositionResult { g, h, objective, scale_chosen, refine_iterations })
}

/// Membership functional of the sum space: the truncated energy with `0 < q < sp`.
pub fn sum_membership_functional(f: &Field, s: f64, p: f64, q: f64) -> Result<f64> {
    f.reals()?;
    if !(q > 0.0 && q < s * p) {
        return Err(Error::ExponentOutOfRange(format!("q = {q} must lie in (0, sp = {})", s * p)));
    }
    Ok(truncated(f, s, p, q)?.value)
}

/// Cellwise coordinate descent on `g` with `h = f − g`.
struct Refiner<'a> {
    dom: &'a GridDomain,
    f: Vec<f64>,
    g: Vec<f64>,
    p: f64,
    r: f64,
    inv: OffsetTable,
    w2: f64,
    step: f64,
}

impl<'a> Refiner<'a> {
    fn new(dom: &'a GridDomain, f: Vec<f64>, g: Vec<f64>, s: f64, p: f64) -> Self {
        let e = dom.dim() as f64 + s * p;
        let inv = dom.offset_table(|d| if d > 0.0 { d.powf(-e) } else { 0.0 });
        let (lo, hi) = f.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
        Refiner { dom, f, g, p, r: s * p, inv, w2: dom.weight() * dom.weight(), step: 0.25 * (hi - lo) }
    }

    fn h(&self, i: usize) -> f64 {
        self.f[i] - self.g[i]
    }

    /// Change of the fractional part when `g_i → g_i + delta`.
    fn delta_fractional(&self, i: usize, delta: f64) -> f64 {
        let gi = self.g[i];
        let mut acc = 0.0;
        for (j, &gj) in self.g.iter().enumerate() {
            if j != i {
                acc += (pow((gi + delta - gj).abs(), self.p) - pow((gi - gj).abs(), self.p)) * self.inv.get(i, j);
            }
        }
        2.0 * self.w2 * acc
    }

    fn gradient_fractional(&self, i: usize) -> f64 {
        let gi = self.g[i];
        let mut acc = 0.0;
        for (j, &gj) in self.g.iter().enumerate() {
            if j != i {
                let d = gi - gj;
                acc += self.p * pow(d.abs(), self.p - 1.0) * d.signum() * self.inv.get(i, j);
            }
        }
        2.0 * self.w2 * acc
    }

    fn stencil_partner(&self, c: usize, axis: usize) -> usize {
        self.dom.step(c, axis, true).or_else(|| self.dom.step(c, axis, false)).expect("n ≥ 2")
    }

    /// Cells whose gradient stencil reads `h_i`.
    fn dependents(&self, i: usize) -> Vec<usize> {
        let mut out = vec![i];
        for c in self.dom.neighbors(i) {
            if (0..self.dom.dim()).any(|a| self.stencil_partner(c, a) == i) {
                out.push(c);
            }
        }
        out
    }

    fn local_dirichlet(&self, cells: &[usize], i: usize, dh: f64) -> f64 {
        let hval = |k: usize| if k == i { self.h(k) + dh } else { self.h(k) };
        let step = self.dom.h();
        let w = self.dom.weight();
        cells
            .iter()
            .map(|&c| {
                let sq: f64 = (0..self.dom.dim())
                    .map(|a| {
                        let d = (hval(self.stencil_partner(c, a)) - hval(c)).abs() / step;
                        d * d
                    })
                    .sum();
                pow(sq.sqrt(), self.r) * w
            })
            .sum()
    }

    /// Objective change when `g_i → g_i + delta` (so `h_i → h_i − delta`).
    fn delta(&self, i: usize, cells: &[usize], delta: f64) -> f64 {
        let before = self.local_dirichlet(cells, i, 0.0);
        let after = self.local_dirichlet(cells, i, -delta);
        self.delta_fractional(i, delta) + after - before
    }

    fn run(&mut self, budget: usize) -> usize {
        if !(self.step > 0.0) {
            return 0;
        }
        let mut steps = 0;
        while steps < budget {
            let eps = 1e-7 * self.step;
            let grads: Vec<f64> = (0..self.g.len())
                .into_par_iter()
                .map(|i| {
                    let cells = self.dependents(i);
                    let dd = (self.local_dirichlet(&cells, i, -eps) - self.local_dirichlet(&cells, i, eps)) / (2.0 * eps);
                    self.gradient_fractional(i) + dd
                })
                .collect();
            let mut order: Vec<usize> = (0..grads.len()).collect();
            order.sort_by(|&a, &b| grads[b].abs().total_cmp(&grads[a].abs()).then(a.cmp(&b)));
            let mut improved = false;
            for &i in order.iter().take(CELLS_PER_ROUND.min(budget - steps)) {
                steps += 1;
                if grads[i] == 0.0 {
                    continue;
                }
                let cells = self.dependents(i);
                let dir = -grads[i].signum();
                let mut best = (0.0, 0.0);
                for k in 0..32 {
                    let delta = dir * self.step * 0.5f64.powi(k);
                    let change = self.delta(i, &cells, delta);
                    if change < best.1 {
                        best = (delta, change);
                    }
                }
                if best.1 < 0.0 {
                    self.g[i] += best.0;
                    improved = true;
                }
            }
            if !improved {
                break;
            }
        }
        steps
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{make_domain, DomainKind};
    use std::f64::consts::TAU;

    #[test]
    fn mollify_identities() {
        for kind in [DomainKind::Interval, DomainKind::Torus] {
            let d = make_domain(kind, 1, 64, 1.0).unwrap();
            let c = Field::real(&d, |_| 2.5);
            for scale in [0.05, 0.3, 3.0] {
                assert!(mollify(&c, scale).unwrap().reals().unwrap().iter().all(|v| (v - 2.5).abs() < 1e-14));
            }
            let f = Field::real(&d, |x| (TAU * x[0]).sin());
            assert_eq!(mollify(&f, 0.0).unwrap(), f);
        }
        let c2 = make_domain(DomainKind::Cube, 2, 12, 1.0).unwrap();
        let f = Field::real(&c2, |x| x[0] - x[1]);
        let m = mollify(&f, 0.2).unwrap();
        // reflection keeps odd symmetry about the centre
        let v = m.reals().unwrap();
        assert!((v[0] + v[143]).abs() < 1e-12);
    }

    #[test]
    fn mollify_rejects_circle_fields() {
        let d = make_domain(DomainKind::Torus, 1, 8, 1.0).unwrap();
        let f = Field::constant(&d, crate::TargetGeometry::Circle(TAU), [1.0, 0.0]);
        assert_eq!(mollify(&f, 0.1), Err(Error::NonRealField));
    }

    #[test]
    fn objective_endpoints() {
        let d = make_domain(DomainKind::Interval, 1, 64, 1.0).unwrap();
        let f = Field::real(&d, |x| x[0] * x[0] + 0.1 * (40.0 * x[0]).sin());
        let z = Field::real(&d, |_| 0.0);
        let (s, p) = (0.5, 3.0);
        assert_eq!(sum_objective(&f, &z, s, p).unwrap(), gagliardo(&f, s, p).unwrap().value);
        assert_eq!(sum_objective(&z, &f, s, p).unwrap(), dirichlet(&f, s * p).unwrap().value);
        assert!(matches!(sum_objective(&f, &z, 0.5, 2.0), Err(Error::SubcriticalExponent(_))));
        let other = make_domain(DomainKind::Interval, 1, 32, 1.0).unwrap();
        assert_eq!(sum_objective(&f, &Field::real(&other, |_| 0.0), s, p), Err(Error::DomainMismatch));
    }

    #[test]
    fn constant_splits_to_zero() {
        let d = make_domain(DomainKind::Interval, 1, 32, 1.0).unwrap();
        let r = split_sum_space(&Field::real(&d, |_| 4.0), 0.5, 3.0).unwrap();
        assert_eq!(r.objective, 0.0);
        assert!(matches!(split_sum_space(&Field::real(&d, |_| 4.0), 0.5, 2.0), Err(Error::SubcriticalExponent(_))));
    }

    #[test]
    fn refinement_deltas_match_recomputation() {
        for (kind, m) in [(DomainKind::Interval, 1), (DomainKind::Cube, 2), (DomainKind::Torus, 2)] {
            let d = make_domain(kind, m, 8, 1.0).unwrap();
            let f: Vec<f64> = (0..d.len()).map(|i| ((i * 7919) % 13) as f64 * 0.3).collect();
            let g: Vec<f64> = (0..d.len()).map(|i| ((i * 31) % 5) as f64 * 0.2).collect();
            let (s, p) = (0.6, 2.5);
            let r = Refiner::new(&d, f.clone(), g.clone(), s, p);
            let objective = |g: &[f64]| {
                let h: Vec<f64> = f.iter().zip(g).map(|(a, b)| a - b).collect();
                sum_objective(&Field::from_reals(&d, g).unwrap(), &Field::from_reals(&d, &h).unwrap(), s, p).unwrap()
            };
            for i in [0, 5, d.len() - 1, d.len() / 2] {
                let mut g2 = g.clone();
                g2[i] += 0.37;
                let expect = objective(&g2) - objective(&g);
                let got = r.delta(i, &r.dependents(i), 0.37);
                assert!((expect - got).abs() < 1e-9 * (1.0 + expect.abs()), "{kind:?} i={i} {expect} {got}");
            }
        }
    }
}
