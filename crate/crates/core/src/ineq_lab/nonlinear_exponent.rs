//! Growth exponent `1/s` of the lifted energy in terms of the base energy.
//!
//! For `u_t = project(t φ)` the base energy `X_t` grows like `t^{sp}` while
//! the lifted energy `Y_t = t^p [φ]` grows like `t^p`, so `log Y` against
//! `log X` has slope `1/s` for large `t`.

use std::f64::consts::TAU;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{Exponents, RatioReport, Series, SuiteOutput, DEFAULT_GROWTH};
use crate::covering::CoveringChart;
use crate::domain::{make_domain, DomainKind};
use crate::energy::{gagliardo, Field};
use crate::error::{Error, Result};
use crate::lifting::lift_field;
use crate::numeric::log_log_slope;

pub const SUITE: &str = "nonlinear_exponent";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub n: usize,
    pub s: f64,
    pub p: f64,
    /// Amplitudes are `t = 2^k` for these `k`.
    pub t_exponents: Vec<i32>,
    /// Smallest `k` used in the slope fit.
    pub fit_from: i32,
    pub slope_tolerance: f64,
    pub growth: f64,
}

impl Default for Config {
    fn default() -> Self {
        Config { n: 4096, s: 0.75, p: 2.0, t_exponents: (0..=8).collect(), fit_from: 4, slope_tolerance: 0.10, growth: DEFAULT_GROWTH }
    }
}

impl Config {
    pub fn quick() -> Self {
        Config { n: 512, t_exponents: (0..=5).collect(), fit_from: 3, ..Self::default() }
    }
}

/// `(X_t, Y_t)` for `φ = sin 2πx` on the unit circle domain with `n` points.
pub fn energies(n: usize, s: f64, p: f64, t: f64) -> Result<(f64, f64)> {
    let cov = CoveringChart::line_over_circle();
    let dom = make_domain(DomainKind::Torus, 1, n, 1.0)?;
    let phi = move |x: [f64; 2]| t * (TAU * x[0]).sin();
    let u = Field::from_fn(&dom, cov.base(), |x| [phi(x), 0.0]);
    let lift = lift_field(&u, &cov, 0, &[phi(dom.point(0)), 0.0])?;
    Ok((gagliardo(&u, s, p)?.value, gagliardo(&lift.lifted, s, p)?.value))
}

pub fn run(config: &Config) -> Result<SuiteOutput> {
    let (s, p) = (config.s, config.p);
    if !(s * p > 1.0) {
        return Err(Error::ExponentConditionViolated(format!("need sp > 1 on a 1D domain (sp = {})", s * p)));
    }
    let e = Exponents::new(s, p, f64::NAN);
    let ts: Vec<f64> = config.t_exponents.iter().map(|&k| 2f64.powi(k)).collect();
    let sweep = |n: usize| -> Result<Vec<(f64, f64)>> { ts.par_iter().map(|&t| energies(n, s, p, t)).collect() };
    let base = sweep(config.n)?;
    let fine = sweep(2 * config.n)?;
    let mut out = SuiteOutput::new(SUITE);

    let fit: Vec<(f64, f64)> = config
        .t_exponents
        .iter()
        .zip(&base)
        .filter(|(k, _)| **k >= config.fit_from)
        .map(|(_, xy)| *xy)
        .collect();
    if fit.len() < 2 {
        return Err(Error::InvalidParameter("slope fit needs at least two amplitudes".into()));
    }
    let (xs, ys): (Vec<f64>, Vec<f64>) = fit.iter().copied().unzip();
    let slope = log_log_slope(&xs, &ys);
    out.push_constant("slope", slope);
    out.push_constant("target_slope", 1.0 / s);
    let tol = config.slope_tolerance;
    out.reports.push(RatioReport::explicit(SUITE, "slope_upper", e, slope, 1.0, 1.0 / s, tol));
    out.reports.push(RatioReport::explicit(SUITE, "slope_lower", e, (1.0 - tol) / s, slope, 1.0, 0.0));

    for (k, &(x, y)) in config.t_exponents.iter().zip(&base) {
        out.reports.push(RatioReport::exact(SUITE, format!("t2^{k}/projection_contracts"), e, x, y));
        if *k == 0 {
            // identical up to the rounding of the circle reduction
            out.reports.push(RatioReport::explicit(SUITE, "t1/small_energy_regime", e, y, x, 1.0, 1e-9));
        }
    }
    let constant = |v: &[(f64, f64)]| v.iter().map(|&(x, y)| y / (x + x.powf(1.0 / s))).fold(0.0, f64::max);
    let (cb, cf) = (constant(&base), constant(&fine));
    out.push_constant(format!("C/n{}", config.n), cb);
    out.push_constant(format!("C/n{}", 2 * config.n), cf);
    out.reports.push(RatioReport::empirical(SUITE, "lifted_vs_base/refinement", e, cf, cb, config.growth));
    let (x0, y0) = energies(config.n, s, p, 0.0)?;
    out.reports.push(RatioReport::exact(SUITE, "constant_phase", e, y0, x0));
    out.series.push(Series { name: format!("lifted vs base energy (n={}, fitted amplitudes)", config.n), points: fit });
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quick_run_passes() {
        let out = run(&Config::quick()).unwrap();
        assert!(out.all_pass(), "{:#?}", out.reports);
    }
}
