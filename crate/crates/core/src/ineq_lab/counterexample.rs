//! A `W^{1,q}` function on the plane whose large-oscillation energy diverges.
//!
//! The function is a sum of disjoint rescaled bumps `λ_j ψ((x − a_j)/ρ_j)` with
//! `λ_j = λ₀ 2^{j²}` and `ρ_j^{m−q} = 1 / (λ_j^q ln(λ_j/2 − 1))`. Each bump is
//! evaluated by scaling from one reference profile `ψ`:
//!
//! - gradient term `λ_j^q ρ_j^{m−q} ∫|Dψ|^q = ∫|Dψ|^q / ln(λ_j/2 − 1)`,
//! - oscillation term `ρ_j^{m−q} λ_j^q J(1/λ_j) = J(1/λ_j) / ln(λ_j/2 − 1)`, where
//!   `J(ε) = ∬_{|ψ(y)−ψ(x)| ≥ ε} |ψ(y)−ψ(x)|^q / |y−x|^{m+q}`.
//!
//! `J` is measured on a reference grid down to a resolvable threshold `ε_g`;
//! below it `J(ε) = J(ε_g) + c ∫|Dψ|^q ln(ε_g/ε)` with `c = ∫_{S¹} |ω₁|^q`, the
//! exact small-threshold asymptotics of the pair integral for smooth `ψ`.

use std::f64::consts::{LN_2, TAU};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{Exponents, RatioReport, Series, SuiteOutput};
use crate::domain::{make_domain, DomainKind};
use crate::energy::{dirichlet, Field};
use crate::error::{Error, Result};
use crate::numeric::{integrate, CompensatedSum};

pub const SUITE: &str = "counterexample";

const M: usize = 2;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub q: f64,
    pub lambda0: f64,
    /// Number of bumps `J`.
    pub terms: u32,
    /// Reference grid resolution per axis on `[−1, 1]²`.
    pub grid_n: usize,
    /// Smallest threshold measured directly on the reference grid.
    pub grid_threshold: f64,
}

impl Default for Config {
    fn default() -> Self {
        Config { q: 1.5, lambda0: 4f64.exp(), terms: 4, grid_n: 256, grid_threshold: 0.125 }
    }
}

impl Config {
    pub fn quick() -> Self {
        Config { grid_n: 128, ..Self::default() }
    }
}

/// Smooth step from 0 at `t ≤ 0` to 1 at `t ≥ 1`.
fn smooth_step(t: f64) -> f64 {
    if t <= 0.0 {
        return 0.0;
    }
    if t >= 1.0 {
        return 1.0;
    }
    let a = (-1.0 / t).exp();
    let b = (-1.0 / (1.0 - t)).exp();
    a / (a + b)
}

/// Reference profile: `x₁` on `B_{1/2}`, zero outside `B_{0.9}`.
pub fn psi(x: [f64; 2]) -> f64 {
    let r = x[0].hypot(x[1]);
    x[0] * (1.0 - smooth_step((r - 0.5) / 0.4))
}

/// `ln(e^L − 1)` without overflow.
fn ln_expm1(l: f64) -> f64 {
    l + (-(-l).exp()).ln_1p()
}

/// `ln λ_j = ln λ₀ + j² ln 2`.
pub fn ln_lambda(lambda0: f64, j: u32) -> f64 {
    lambda0.ln() + (j * j) as f64 * LN_2
}

/// `ln(λ_j / 2 − 1)`.
pub fn ln_denominator(lambda0: f64, j: u32) -> f64 {
    ln_expm1(ln_lambda(lambda0, j) - LN_2)
}

/// `∫_{S¹} |ω₁|^q`.
pub fn sphere_moment(q: f64) -> f64 {
    integrate(|t| t.cos().abs().powf(q), 0.0, TAU, 1e-12)
}

/// Measurements on the reference grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Reference {
    /// `∫|Dψ|^q`.
    pub gradient: f64,
    /// `(ε, J(ε))` for the measured thresholds, ascending in `ε`.
    pub thresholds: Vec<(f64, f64)>,
}

/// `J(ε)` at every threshold in `eps` (ascending) in one pass over the grid.
pub fn reference(n: usize, q: f64, eps: &[f64]) -> Result<Reference> {
    let dom = make_domain(DomainKind::Cube, M, n, 2.0)?;
    let centred = |i: usize| {
        let x = dom.point(i);
        [x[0] - 1.0, x[1] - 1.0]
    };
    let field = Field::real(&dom, |x| psi([x[0] - 1.0, x[1] - 1.0]));
    let gradient = dirichlet(&field, q)?.value;

    let h = dom.h();
    let disk: Vec<(usize, [usize; 2], f64)> = (0..dom.len())
        .filter(|&i| {
            let x = centred(i);
            x[0].hypot(x[1]) < 1.0
        })
        .map(|i| (i, dom.multi_index(i), psi(centred(i))))
        .collect();
    let inv: Vec<f64> = (0..n * n)
        .map(|k| {
            let (a, b) = (k % n, k / n);
            if k == 0 {
                0.0
            } else {
                (((a * a + b * b) as f64).sqrt() * h).powf(-(M as f64 + q))
            }
        })
        .collect();
    let half = n / 2;
    // ψ is odd in x₁ and even in x₂, so pairs with x in the open first quadrant cover all pairs four times
    let first: Vec<usize> = (0..disk.len()).filter(|&k| disk[k].1[0] >= half && disk[k].1[1] >= half).collect();
    let bins = eps.len();
    let blocks: Vec<Vec<f64>> = first
        .par_chunks(64)
        .map(|chunk| {
            let mut acc = vec![CompensatedSum::default(); bins];
            for &a in chunk {
                let (ia, ca, va) = disk[a];
                let mut row = vec![0.0; bins];
                for &(ib, cb, vb) in &disk {
                    if ib == ia {
                        continue;
                    }
                    let d = (vb - va).abs();
                    if d < eps[0] {
                        continue;
                    }
                    let k = ca[0].abs_diff(cb[0]) + n * ca[1].abs_diff(cb[1]);
                    let w = d.powf(q) * inv[k];
                    let top = eps.iter().take_while(|&&e| e <= d).count();
                    row[top - 1] += w;
                }
                for (s, v) in acc.iter_mut().zip(row) {
                    s.add(v);
                }
            }
            acc.iter().map(|s| s.value()).collect()
        })
        .collect();
    let w = 4.0 * dom.weight() * dom.weight();
    let mut per_bin = vec![CompensatedSum::default(); bins];
    for b in blocks {
        for (s, v) in per_bin.iter_mut().zip(b) {
            s.add(v);
        }
    }
    // a pair counts toward every threshold at or below its oscillation
    let mut thresholds = Vec::with_capacity(bins);
    let mut tail = 0.0;
    for k in (0..bins).rev() {
        tail += per_bin[k].value();
        thresholds.push((eps[k], tail * w));
    }
    thresholds.reverse();
    Ok(Reference { gradient, thresholds })
}

/// Per-bump terms of the construction.
#[derive(Debug, Clone, PartialEq)]
pub struct Terms {
    pub gradient: Vec<f64>,
    pub oscillation: Vec<f64>,
    pub gradient_norm: f64,
    pub moment: f64,
    pub grid_slope: f64,
}

pub fn terms(config: &Config) -> Result<Terms> {
    let q = config.q;
    if !(q >= 1.0 && q < M as f64) {
        return Err(Error::ExponentOutOfRange(format!("need 1 ≤ q < m = {M} (q = {q})")));
    }
    if !(config.lambda0 > 2.0 && config.lambda0.is_finite()) {
        return Err(Error::InvalidParameter(format!("λ₀ = {} must exceed 2", config.lambda0)));
    }
    if !(1..=6).contains(&config.terms) {
        return Err(Error::InvalidParameter(format!("the number of bumps must lie in 1..=6 (got {})", config.terms)));
    }
    if config.grid_n % 2 != 0 {
        return Err(Error::InvalidResolution(config.grid_n));
    }
    let eg = config.grid_threshold;
    if !(eg > 0.0) {
        return Err(Error::InvalidParameter(format!("grid threshold {eg} must be positive")));
    }
    let js: Vec<u32> = (1..=config.terms).collect();
    let mut eps: Vec<f64> = vec![eg, 2.0 * eg];
    eps.extend(js.iter().map(|&j| (-ln_lambda(config.lambda0, j)).exp()).filter(|&e| e >= eg));
    eps.sort_by(f64::total_cmp);
    eps.dedup();
    let r = reference(config.grid_n, q, &eps)?;
    let g = r.gradient;
    let c = sphere_moment(q);
    let j_at = |e: f64| r.thresholds.iter().find(|t| t.0 == e).map(|t| t.1);
    let jg = j_at(eg).expect("grid threshold measured");
    let grid_slope = (jg - j_at(2.0 * eg).expect("measured")) / LN_2;

    let gradient: Vec<f64> = js.iter().map(|&j| g / ln_denominator(config.lambda0, j)).collect();
    let oscillation: Vec<f64> = js
        .iter()
        .map(|&j| {
            let ln_l = ln_lambda(config.lambda0, j);
            let e = (-ln_l).exp();
            let big_j = j_at(e).unwrap_or_else(|| jg + c * g * (eg.ln() + ln_l));
            big_j / ln_denominator(config.lambda0, j)
        })
        .collect();
    Ok(Terms { gradient, oscillation, gradient_norm: g, moment: c, grid_slope })
}

pub fn run(config: &Config) -> Result<SuiteOutput> {
    let t = terms(config)?;
    let e = Exponents::new(f64::NAN, config.q, config.q);
    let mut out = SuiteOutput::new(SUITE);
    let g = t.gradient_norm;
    out.push_constant("gradient_norm", g);
    out.push_constant("sphere_moment", t.moment);
    out.push_constant("grid_slope", t.grid_slope);
    out.push_constant("asymptotic_slope", t.moment * g);
    let count = t.gradient.len();
    for j in 0..count {
        let label = j + 1;
        if j + 1 < count {
            out.reports.push(RatioReport::exact(SUITE, format!("gradient/decreasing/j{label}"), e, t.gradient[j + 1], t.gradient[j]));
        }
        let weighted = (label * label) as f64 * t.gradient[j];
        out.reports.push(RatioReport::explicit(SUITE, format!("gradient/summable/j{label}"), e, weighted, g, 1.0 / LN_2, 0.0));
        out.reports.push(RatioReport::explicit(
            SUITE,
            format!("oscillation/vs_gradient/j{label}"),
            e,
            t.gradient[0],
            t.oscillation[j],
            2.0,
            0.0,
        ));
        out.reports.push(RatioReport::explicit(
            SUITE,
            format!("oscillation/vs_first/j{label}"),
            e,
            t.oscillation[0],
            t.oscillation[j],
            2.0,
            0.0,
        ));
    }
    let max = t.oscillation.iter().copied().fold(0.0, f64::max);
    let min = t.oscillation.iter().copied().fold(f64::INFINITY, f64::min);
    out.reports.push(RatioReport::explicit(SUITE, "oscillation/band", e, max, min, 2.0, 0.0));
    let partial = |v: &[f64]| -> Vec<(f64, f64)> {
        v.iter()
            .scan(0.0, |acc, x| {
                *acc += x;
                Some(*acc)
            })
            .enumerate()
            .map(|(j, s)| ((j + 1) as f64, s))
            .collect()
    };
    out.series.push(Series { name: "gradient partial sums".into(), points: partial(&t.gradient) });
    out.series.push(Series { name: "oscillation partial sums".into(), points: partial(&t.oscillation) });
    for (j, (a, b)) in t.gradient.iter().zip(&t.oscillation).enumerate() {
        out.push_constant(format!("gradient_term/j{}", j + 1), *a);
        out.push_constant(format!("oscillation_term/j{}", j + 1), *b);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn first_denominator() {
        // λ₀ = e⁴: ln(e⁴ − 1)
        let d = ln_denominator(4f64.exp(), 1);
        assert!((d - (4f64.exp() - 1.0).ln()).abs() < 1e-14);
        assert!((1.0 / d - 0.2511).abs() < 1e-4);
    }

    #[test]
    fn large_bumps_do_not_overflow() {
        let d = ln_denominator(4f64.exp(), 40);
        assert!((d - (4.0 + 1599.0 * LN_2)).abs() < 1e-9);
    }

    #[test]
    fn moment_closed_form() {
        // ∫|cos θ|^q = 2√π Γ((q+1)/2) / Γ(q/2 + 1); for q = 2 this is π
        assert!((sphere_moment(2.0) - PI).abs() < 1e-10);
        assert!((sphere_moment(1.0) - 4.0).abs() < 1e-10);
    }

    #[test]
    fn profile() {
        assert_eq!(psi([0.3, 0.1]), 0.3);
        assert_eq!(psi([0.95, 0.0]), 0.0);
        assert!(psi([0.7, 0.0]) > 0.0 && psi([0.7, 0.0]) < 0.7);
    }

    #[test]
    fn grid_slope_matches_asymptotics() {
        let t = terms(&Config::quick()).unwrap();
        let rel = t.grid_slope / (t.moment * t.gradient_norm);
        assert!((rel - 1.0).abs() < 0.2, "grid slope / asymptotic slope = {rel}");
    }

    #[test]
    fn rejects_supercritical_q() {
        let c = Config { q: 2.0, ..Config::default() };
        assert!(matches!(terms(&c), Err(Error::ExponentOutOfRange(_))));
    }

    #[test]
    fn quick_run_passes() {
        let out = run(&Config::quick()).unwrap();
        assert!(out.all_pass(), "{:#?}", out.reports.iter().filter(|r| !r.pass).collect::<Vec<_>>());
    }
}
