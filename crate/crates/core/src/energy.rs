//! Nonlocal and local energies as deterministic pair sums over a grid.
//!
//! Every pair energy has the form `Σ_{i≠j} K(d_target(u_i, u_j)) / d_dom(x_i, x_j)^e · w²`
//! with the diagonal excluded. Kernels are symmetric, so the sum runs over `i < j`
//! and is doubled. Rows are grouped into fixed blocks, each accumulated with
//! compensated summation, and block totals are combined in block order, so the
//! result does not depend on the number of worker threads.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::covering::{CoveringChart, Point, TargetGeometry};
use crate::domain::{DomainKind, GridDomain};
use crate::error::{Error, Result};
use crate::numeric::{pow, CompensatedSum};

/// Rows per accumulation block.
const BLOCK_ROWS: usize = 16;

/// Default number of inner segment samples for [`segment_double_energy`].
pub const DEFAULT_INNER_POINTS: usize = 64;

/// A sampled map from a grid domain into a target geometry.
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    domain: GridDomain,
    space: TargetGeometry,
    values: Vec<Point>,
}

impl Field {
    /// Wraps values, rejecting wrong lengths and non-canonical points.
    pub fn new(domain: GridDomain, space: TargetGeometry, values: Vec<Point>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::EmptyField);
        }
        if values.len() != domain.len() {
            return Err(Error::LengthMismatch { expected: domain.len(), got: values.len() });
        }
        if let Some(i) = values.iter().position(|v| !space.is_valid(v)) {
            return Err(Error::InvalidPoint(i));
        }
        Ok(Field { domain, space, values })
    }

    /// Samples `f` at every grid point, reducing periodic coordinates.
    pub fn from_fn(domain: &GridDomain, space: TargetGeometry, f: impl Fn([f64; 2]) -> Point) -> Self {
        let values = (0..domain.len()).map(|i| space.canonical(&f(domain.point(i)))).collect();
        Field { domain: domain.clone(), space, values }
    }

    /// Real-valued field sampled from `f`.
    pub fn real(domain: &GridDomain, f: impl Fn([f64; 2]) -> f64) -> Self {
        Self::from_fn(domain, TargetGeometry::RealLine, |x| [f(x), 0.0])
    }

    /// Real-valued field from raw values.
    pub fn from_reals(domain: &GridDomain, values: &[f64]) -> Result<Self> {
        Self::new(domain.clone(), TargetGeometry::RealLine, values.iter().map(|&v| [v, 0.0]).collect())
    }

    pub fn constant(domain: &GridDomain, space: TargetGeometry, value: Point) -> Self {
        Self::from_fn(domain, space, |_| value)
    }

    pub fn domain(&self) -> &GridDomain {
        &self.domain
    }

    pub fn space(&self) -> TargetGeometry {
        self.space
    }

    pub fn values(&self) -> &[Point] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn value(&self, i: usize) -> Point {
        self.values[i]
    }

    /// Target distance between the values at two indices.
    #[inline]
    pub fn target_distance(&self, i: usize, j: usize) -> f64 {
        self.space.distance(&self.values[i], &self.values[j])
    }

    /// The first components of a real-valued field.
    pub fn reals(&self) -> Result<Vec<f64>> {
        if !self.space.is_real_line() {
            return Err(Error::NonRealField);
        }
        Ok(self.values.iter().map(|v| v[0]).collect())
    }

    /// Pointwise image under `f` into `space`.
    pub fn map(&self, space: TargetGeometry, f: impl Fn(&Point) -> Point) -> Field {
        let values = self.values.iter().map(|v| space.canonical(&f(v))).collect();
        Field { domain: self.domain.clone(), space, values }
    }

    /// Projection of a total-space field to the base of `cov`.
    pub fn project(&self, cov: &CoveringChart) -> Result<Field> {
        if self.space != cov.total() {
            return Err(Error::DomainMismatch);
        }
        Ok(self.map(cov.base(), |v| cov.project(v)))
    }
}

/// Exponents and thresholds of an energy evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnergyParams {
    pub s: f64,
    pub p: f64,
    #[serde(default)]
    pub q: f64,
    #[serde(default)]
    pub threshold: Option<f64>,
    #[serde(default)]
    pub gamma: Option<f64>,
}

impl EnergyParams {
    pub fn new(s: f64, p: f64) -> Self {
        EnergyParams { s, p, q: 0.0, threshold: None, gamma: None }
    }

    /// Checks `s ∈ (0,1)`, `p > 1`, `q ≥ 0` and a nonnegative threshold.
    /// The error carries the offending key.
    pub fn validate(&self) -> std::result::Result<(), &'static str> {
        if !(self.s > 0.0 && self.s < 1.0) {
            return Err("s");
        }
        if !(self.p > 1.0 && self.p.is_finite()) {
            return Err("p");
        }
        if !(self.q >= 0.0 && self.q.is_finite()) {
            return Err("q");
        }
        if matches!(self.threshold, Some(t) if !(t >= 0.0)) {
            return Err("threshold");
        }
        if matches!(self.gamma, Some(g) if !g.is_finite()) {
            return Err("gamma");
        }
        Ok(())
    }
}

/// Result of an energy evaluation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnergyValue {
    pub value: f64,
    /// Ordered pairs (or cells, for local energies) that entered the sum.
    pub pair_count: u64,
    pub params: BTreeMap<&'static str, f64>,
}

impl EnergyValue {
    fn new(value: f64, pair_count: u64, params: &[(&'static str, f64)]) -> Self {
        EnergyValue { value, pair_count, params: params.iter().copied().collect() }
    }
}

/// Sums `f(i, j)` over ordered pairs `i ≠ j` of a symmetric kernel; `None` excludes a pair.
pub fn pair_sum<F>(len: usize, f: F) -> (f64, u64)
where
    F: Fn(usize, usize) -> Option<f64> + Sync,
{
    let blocks: Vec<(f64, u64)> = (0..len.div_ceil(BLOCK_ROWS))
        .into_par_iter()
        .map(|b| {
            let mut acc = CompensatedSum::default();
            let mut count = 0u64;
            for i in b * BLOCK_ROWS..len.min((b + 1) * BLOCK_ROWS) {
                for j in i + 1..len {
                    if let Some(v) = f(i, j) {
                        acc.add(v);
                        count += 1;
                    }
                }
            }
            (acc.value(), count)
        })
        .collect();
    let mut total = CompensatedSum::default();
    let mut count = 0;
    for (v, c) in blocks {
        total.add(v);
        count += c;
    }
    (2.0 * total.value(), 2 * count)
}

fn check_nonempty(field: &Field) -> Result<()> {
    if field.is_empty() {
        Err(Error::EmptyField)
    } else {
        Ok(())
    }
}

fn check_sp(s: f64, p: f64) -> Result<()> {
    if !(s > 0.0 && s < 1.0) {
        return Err(Error::ExponentOutOfRange(format!("s = {s} must lie in (0, 1)")));
    }
    if !(p >= 1.0 && p.is_finite()) {
        return Err(Error::ExponentOutOfRange(format!("p = {p} must be at least 1")));
    }
    Ok(())
}

/// `d^-e` by offset, zero on the diagonal.
fn inverse_power_table(dom: &GridDomain, e: f64) -> crate::domain::OffsetTable {
    dom.offset_table(|d| if d > 0.0 { d.powf(-e) } else { 0.0 })
}

/// Generic thresholded pair energy `Σ_{d ≥ threshold} kernel(d) / |y−x|^{m+e}`.
fn kernel_energy(field: &Field, exponent: f64, threshold: Option<f64>, kernel: impl Fn(f64) -> f64 + Sync) -> (f64, u64) {
    let dom = field.domain();
    let inv = inverse_power_table(dom, dom.dim() as f64 + exponent);
    let w2 = dom.weight() * dom.weight();
    let (sum, count) = match threshold {
        None => pair_sum(field.len(), |i, j| Some(kernel(field.target_distance(i, j)) * inv.get(i, j))),
        Some(t) => pair_sum(field.len(), |i, j| {
            let d = field.target_distance(i, j);
            (d >= t).then(|| kernel(d) * inv.get(i, j))
        }),
    };
    (sum * w2, count)
}

/// Pair energy `Σ_{d ≥ threshold} kernel(d) / |y−x|^{m+exponent}` for an arbitrary
/// kernel of the target distance.
pub fn pair_energy(
    field: &Field,
    exponent: f64,
    threshold: Option<f64>,
    kernel: impl Fn(f64) -> f64 + Sync,
) -> Result<EnergyValue> {
    check_nonempty(field)?;
    let (v, c) = kernel_energy(field, exponent, threshold, kernel);
    Ok(EnergyValue::new(v, c, &[("exponent", exponent)]))
}

/// Gagliardo energy `∬ d(u(y),u(x))^p / |y−x|^{m+sp}`.
pub fn gagliardo(field: &Field, s: f64, p: f64) -> Result<EnergyValue> {
    check_nonempty(field)?;
    check_sp(s, p)?;
    let (v, c) = kernel_energy(field, s * p, None, |d| pow(d, p));
    Ok(EnergyValue::new(v, c, &[("s", s), ("p", p)]))
}

/// Truncated energy with kernel `min(d^p, d^q)`; `q = 0` caps the kernel at 1.
pub fn truncated(field: &Field, s: f64, p: f64, q: f64) -> Result<EnergyValue> {
    check_nonempty(field)?;
    check_sp(s, p)?;
    if !(q >= 0.0) {
        return Err(Error::ExponentOutOfRange(format!("q = {q} must be nonnegative")));
    }
    let (v, c) = kernel_energy(field, s * p, None, |d| pow(d, p).min(pow(d, q)));
    Ok(EnergyValue::new(v, c, &[("s", s), ("p", p), ("q", q)]))
}

/// Gap energy `∬_{d ≥ λ} (d − λ)^q / |y−x|^{m+γ}`.
pub fn gap_energy(field: &Field, lambda: f64, q: f64, gamma: f64) -> Result<EnergyValue> {
    check_nonempty(field)?;
    if !(lambda >= 0.0) || !(q >= 0.0) {
        return Err(Error::InvalidParameter(format!("gap energy needs λ ≥ 0 and q ≥ 0 (λ = {lambda}, q = {q})")));
    }
    if !(field.domain().dim() as f64 + gamma > 0.0) {
        return Err(Error::ExponentOutOfRange(format!("m + γ must be positive (γ = {gamma})")));
    }
    let (v, c) = kernel_energy(field, gamma, Some(lambda), |d| pow(d - lambda, q));
    Ok(EnergyValue::new(v, c, &[("lambda", lambda), ("q", q), ("gamma", gamma)]))
}

/// Membership functional of the large-oscillation space: `∬_{d ≥ inj/2} 1 / |y−x|^{m+1}`.
pub fn x_energy(field_total: &Field, cov: &CoveringChart) -> Result<EnergyValue> {
    check_nonempty(field_total)?;
    if field_total.space() != cov.total() {
        return Err(Error::DomainMismatch);
    }
    let half = cov.inj() / 2.0;
    let (v, c) = kernel_energy(field_total, 1.0, Some(half), |_| 1.0);
    Ok(EnergyValue::new(v, c, &[("threshold", half)]))
}

/// Large-oscillation energy `∬_{d ≥ δ} d^{p*} / |y−x|^{m+s* p*}`.
pub fn large_osc_energy(field: &Field, delta: f64, s_star: f64, p_star: f64) -> Result<EnergyValue> {
    check_nonempty(field)?;
    check_sp(s_star, p_star)?;
    if !(delta > 0.0) {
        return Err(Error::InvalidParameter(format!("δ = {delta} must be positive")));
    }
    let (v, c) = kernel_energy(field, s_star * p_star, Some(delta), |d| pow(d, p_star));
    Ok(EnergyValue::new(v, c, &[("delta", delta), ("s_star", s_star), ("p_star", p_star)]))
}

/// Discrete gradient magnitude at each cell: target distance to the forward
/// neighbour per axis (backward at a non-periodic boundary) over `h`, combined in quadrature.
pub fn gradient_magnitudes(field: &Field) -> Vec<f64> {
    let dom = field.domain();
    let h = dom.h();
    (0..field.len()).map(|i| cell_gradient(field.space(), dom, field.values(), i, h)).collect()
}

#[inline]
pub(crate) fn cell_gradient(space: TargetGeometry, dom: &GridDomain, values: &[Point], i: usize, h: f64) -> f64 {
    let mut sq = 0.0;
    for axis in 0..dom.dim() {
        let j = dom.step(i, axis, true).or_else(|| dom.step(i, axis, false)).expect("n ≥ 2");
        let g = space.distance(&values[i], &values[j]) / h;
        sq += g * g;
    }
    sq.sqrt()
}

/// Local energy `∫ |Du|^r` with forward differences.
pub fn dirichlet(field: &Field, r: f64) -> Result<EnergyValue> {
    check_nonempty(field)?;
    if !(r >= 1.0) {
        return Err(Error::ExponentOutOfRange(format!("r = {r} must be at least 1")));
    }
    let w = field.domain().weight();
    let total: CompensatedSum = gradient_magnitudes(field).into_iter().map(|g| pow(g, r)).collect();
    Ok(EnergyValue::new(total.value() * w, field.len() as u64, &[("r", r)]))
}

/// Double energy over segments of a 1D field.
///
/// For every pair of grid points `x ≠ y` the segment `[x, y]` is sampled at
/// `inner` midpoints `t_a`; the field between samples is the geodesic
/// interpolation of its two neighbouring samples. With `μ = 0` the inner kernel
/// is `d^p / |t−r|^{1+σp}`; with `μ > 0` it is `(d / |t−r|^σ − μ)₊^p / |t−r|`.
/// The inner diagonal is excluded and the outer weight is `|y−x|^{−(1+sp)}`.
/// Cost is `O(n² · inner²)`.
pub fn segment_double_energy(field: &Field, s: f64, p: f64, sigma: f64, mu: f64, inner: usize) -> Result<EnergyValue> {
    check_nonempty(field)?;
    let dom = field.domain();
    if dom.dim() != 1 || dom.kind() == DomainKind::Torus {
        return Err(Error::NotOneDimensional);
    }
    check_sp(s, p)?;
    if !(sigma > 0.0 && sigma < s) {
        return Err(Error::BadSigma { sigma, s });
    }
    if !(mu >= 0.0) || inner < 2 {
        return Err(Error::InvalidParameter(format!("need μ ≥ 0 and at least 2 inner points (μ = {mu}, inner = {inner})")));
    }
    let n = field.len();
    let space = field.space();
    let values = field.values();
    // z is measured in cells, sample i sits at z = i + 1/2
    let at = |z: f64| -> Point {
        let x = z - 0.5;
        if x <= 0.0 {
            return values[0];
        }
        let a = x.floor() as usize;
        if a + 1 >= n {
            return values[n - 1];
        }
        space.interpolate(&values[a], &values[a + 1], x - a as f64)
    };
    let ts: Vec<f64> = (0..inner).map(|a| (a as f64 + 0.5) / inner as f64).collect();
    let dt2 = 1.0 / (inner * inner) as f64;
    // |t − r| for a < b, row-major over the upper triangle
    let gaps: Vec<f64> = (0..inner).flat_map(|a| (a + 1..inner).map(move |b| (b - a) as f64 / inner as f64)).collect();
    let weights: Vec<f64> = gaps.iter().map(|&g| g.powf(-(1.0 + sigma * p)) * dt2).collect();
    let scaled: Vec<f64> = gaps.iter().map(|&g| g.powf(sigma)).collect();
    let outer = inverse_power_table(dom, 1.0 + s * p);
    let w2 = dom.weight() * dom.weight();

    let (sum, count) = pair_sum(n, |i, j| {
        let pts: Vec<Point> = ts.iter().map(|&t| at((1.0 - t) * (i as f64 + 0.5) + t * (j as f64 + 0.5))).collect();
        let mut acc = 0.0;
        let mut k = 0;
        for a in 0..inner {
            for b in a + 1..inner {
                let d = space.distance(&pts[a], &pts[b]);
                acc += if mu == 0.0 {
                    pow(d, p) * weights[k]
                } else {
                    pow((d / scaled[k] - mu).max(0.0), p) / gaps[k] * dt2
                };
                k += 1;
            }
        }
        Some(2.0 * acc * outer.get(i, j))
    });
    Ok(EnergyValue::new(sum * w2, count, &[("s", s), ("p", p), ("sigma", sigma), ("mu", mu), ("inner", inner as f64)]))
}
