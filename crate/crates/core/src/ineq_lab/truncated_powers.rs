//! Scalar inequality `(t−1)^{q₁} ≤ C ∫_η^t (t−r)^{q₀} / r^{1+q₀−q₁} dr` for `t ≥ 1`.

use serde::{Deserialize, Serialize};

use super::{Exponents, RatioReport, SuiteOutput, DEFAULT_GROWTH};
use crate::error::{Error, Result};
use crate::numeric::integrate;

pub const SUITE: &str = "truncated_powers";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    /// `(q₀, q₁, η)` triples.
    pub cases: Vec<[f64; 3]>,
    pub t_max: f64,
    /// Spacing of the `t` grid; grids for `t_max` and `2 t_max` are nested.
    pub t_step: f64,
    pub growth: f64,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            cases: vec![[1.0, 1.0, 0.5], [0.5, 2.0, 0.25], [2.0, 0.5, 0.5], [1.5, 1.5, 0.1], [0.0, 1.0, 0.75]],
            t_max: 10.0,
            t_step: 0.125,
            growth: DEFAULT_GROWTH,
        }
    }
}

/// `∫_η^t (t−r)^{q₀} / r^{1+q₀−q₁} dr`.
pub fn rhs_integral(q0: f64, q1: f64, eta: f64, t: f64) -> f64 {
    let f = |r: f64| (t - r).max(0.0).powf(q0) / r.powf(1.0 + q0 - q1);
    let scale = f(0.5 * (eta + t)).abs().max(1e-300) * (t - eta);
    integrate(f, eta, t, 1e-11 * scale)
}

/// `max_t (t−1)^{q₁} / rhs(t)` over the grid `1, 1 + step, …, ≤ t_max`.
pub fn empirical_constant(q0: f64, q1: f64, eta: f64, t_max: f64, step: f64) -> f64 {
    let count = ((t_max - 1.0) / step).floor() as usize;
    (0..=count)
        .map(|k| {
            let t = 1.0 + k as f64 * step;
            (t - 1.0).powf(q1) / rhs_integral(q0, q1, eta, t)
        })
        .fold(0.0, f64::max)
}

pub fn run(config: &Config) -> Result<SuiteOutput> {
    let mut out = SuiteOutput::new(SUITE);
    for &[q0, q1, eta] in &config.cases {
        if !(eta > 0.0 && eta < 1.0) {
            return Err(Error::BadEta(eta));
        }
        if !(q0 >= 0.0 && q1 >= 0.0) {
            return Err(Error::ExponentOutOfRange(format!("q₀ = {q0}, q₁ = {q1} must be nonnegative")));
        }
        let base = empirical_constant(q0, q1, eta, config.t_max, config.t_step);
        let fine = empirical_constant(q0, q1, eta, 2.0 * config.t_max, config.t_step);
        let case = format!("q0{q0}_q1{q1}_eta{eta}");
        out.push_constant(format!("C/{case}/tmax{}", config.t_max), base);
        out.push_constant(format!("C/{case}/tmax{}", 2.0 * config.t_max), fine);
        out.reports.push(RatioReport::empirical(SUITE, case, Exponents::new(f64::NAN, f64::NAN, q1), fine, base, config.growth));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_form_case() {
        let v = rhs_integral(1.0, 1.0, 0.5, 2.0);
        assert!((v - (2.0 * 4f64.ln() - 1.5)).abs() < 1e-9);
        assert!((1.0 / v - 0.7858).abs() < 1e-4);
        assert_eq!(empirical_constant(1.0, 1.0, 0.5, 1.0, 0.125), 0.0);
    }

    #[test]
    fn bad_eta() {
        let c = Config { cases: vec![[1.0, 1.0, 1.5]], ..Config::default() };
        assert_eq!(run(&c).unwrap_err(), Error::BadEta(1.5));
    }

    #[test]
    fn default_run_passes() {
        let out = run(&Config::default()).unwrap();
        assert!(out.all_pass(), "{:#?}", out.reports);
    }
}
