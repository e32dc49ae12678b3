//! Verification harness: each suite turns an estimate into [`RatioReport`]s.
//!
//! Reports come in three strictness modes. Literal finite-sum inequalities are
//! checked to `1e-12` relative; inequalities with an explicit constant are
//! checked against that constant with a configured slack; inequalities with an
//! unspecified constant are checked by comparing the empirical constant at two
//! resolutions.

use serde::{Deserialize, Serialize};

use crate::error::Result;

pub mod counterexample;
pub mod exponent_equivalence;
pub mod families;
pub mod fractional_integration;
pub mod gap_scaling;
pub mod large_scale;
pub mod lifting_estimates;
pub mod nonlinear_exponent;
pub mod small_lemmas;
pub mod sum_space;
pub mod supercritical;
pub mod truncated_powers;

/// Relative tolerance of [`Mode::Exact`] checks.
pub const EXACT_TOLERANCE: f64 = 1e-12;

/// Absolute tolerance when the right-hand side vanishes.
pub const ZERO_TOLERANCE: f64 = 1e-12;

/// Default slack for quadrature-backed explicit constants.
pub const DEFAULT_SLACK: f64 = 0.05;

/// Default allowed growth of an empirical constant under resolution doubling.
pub const DEFAULT_GROWTH: f64 = 1.2;

/// Default band for empirical constants compared across covering families.
pub const DEFAULT_COVERING_BAND: f64 = 2.0;

/// Strictness of a check.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Mode {
    /// `lhs ≤ rhs · (1 + 1e-12)`.
    Exact,
    /// `lhs ≤ bound_constant · rhs · (1 + slack)`.
    ExplicitConstant { slack: f64 },
    /// `lhs` is an empirical constant at the finer setting and `rhs` the one at
    /// the base setting; passes when `lhs ≤ growth_limit · rhs`.
    EmpiricalStability { growth_limit: f64 },
}

impl Mode {
    pub fn label(&self) -> &'static str {
        match self {
            Mode::Exact => "EXACT",
            Mode::ExplicitConstant { .. } => "EXPLICIT_CONSTANT",
            Mode::EmpiricalStability { .. } => "EMPIRICAL_STABILITY",
        }
    }
}

/// Exponents echoed into a report; NaN where not applicable.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Exponents {
    pub s: f64,
    pub p: f64,
    pub q: f64,
}

impl Exponents {
    pub fn new(s: f64, p: f64, q: f64) -> Self {
        Exponents { s, p, q }
    }

    pub fn none() -> Self {
        Exponents { s: f64::NAN, p: f64::NAN, q: f64::NAN }
    }
}

/// One inequality check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatioReport {
    pub suite_id: String,
    pub case_id: String,
    pub s: f64,
    pub p: f64,
    pub q: f64,
    pub lhs: f64,
    pub rhs: f64,
    /// NaN in empirical mode.
    pub bound_constant: f64,
    pub ratio: f64,
    pub mode: Mode,
    pub pass: bool,
}

fn ratio(lhs: f64, rhs: f64) -> f64 {
    if rhs > 0.0 {
        lhs / rhs
    } else if lhs.abs() <= ZERO_TOLERANCE {
        0.0
    } else {
        f64::INFINITY
    }
}

impl RatioReport {
    fn build(suite: &str, case: impl Into<String>, e: Exponents, lhs: f64, rhs: f64, bound: f64, mode: Mode, pass: bool) -> Self {
        RatioReport {
            suite_id: suite.to_string(),
            case_id: case.into(),
            s: e.s,
            p: e.p,
            q: e.q,
            lhs,
            rhs,
            bound_constant: bound,
            ratio: ratio(lhs, rhs),
            mode,
            pass,
        }
    }

    /// Literal inequality `lhs ≤ rhs`.
    pub fn exact(suite: &str, case: impl Into<String>, e: Exponents, lhs: f64, rhs: f64) -> Self {
        let pass = lhs <= rhs * (1.0 + EXACT_TOLERANCE) || (rhs == 0.0 && lhs.abs() <= ZERO_TOLERANCE);
        Self::build(suite, case, e, lhs, rhs, 1.0, Mode::Exact, pass)
    }

    /// `lhs ≤ bound · rhs · (1 + slack)`.
    pub fn explicit(suite: &str, case: impl Into<String>, e: Exponents, lhs: f64, rhs: f64, bound: f64, slack: f64) -> Self {
        let limit = bound * rhs * (1.0 + slack);
        let pass = lhs <= limit || (limit == 0.0 && lhs.abs() <= ZERO_TOLERANCE);
        Self::build(suite, case, e, lhs, rhs, bound, Mode::ExplicitConstant { slack }, pass)
    }

    /// Empirical constant `fine` (doubled resolution) against `base`.
    pub fn empirical(suite: &str, case: impl Into<String>, e: Exponents, fine: f64, base: f64, growth_limit: f64) -> Self {
        let pass = fine.is_finite()
            && base.is_finite()
            && (fine <= growth_limit * base || (base == 0.0 && fine.abs() <= ZERO_TOLERANCE));
        Self::build(suite, case, e, fine, base, f64::NAN, Mode::EmpiricalStability { growth_limit }, pass)
    }
}

/// A named sequence of `(x, y)` points for log-log plots.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Series {
    pub name: String,
    pub points: Vec<(f64, f64)>,
}

/// Everything a suite produces.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteOutput {
    pub suite_id: String,
    pub reports: Vec<RatioReport>,
    /// Named empirical constants and derived quantities.
    pub constants: Vec<(String, f64)>,
    pub series: Vec<Series>,
}

impl SuiteOutput {
    pub fn new(suite_id: &str) -> Self {
        SuiteOutput { suite_id: suite_id.to_string(), reports: Vec::new(), constants: Vec::new(), series: Vec::new() }
    }

    pub fn all_pass(&self) -> bool {
        self.reports.iter().all(|r| r.pass)
    }

    pub fn constant(&self, name: &str) -> Option<f64> {
        self.constants.iter().find(|(n, _)| n == name).map(|c| c.1)
    }

    pub(crate) fn push_constant(&mut self, name: impl Into<String>, value: f64) {
        self.constants.push((name.into(), value));
    }
}

/// Identifiers of all suites, in run order.
pub const SUITE_IDS: [&str; 11] = [
    "fractional_integration",
    "gap_scaling",
    "truncated_powers",
    "exponent_equivalence",
    "lifting_estimates",
    "nonlinear_exponent",
    "large_scale",
    "counterexample",
    "supercritical",
    "small_lemmas",
    "sum_space",
];

/// Configuration of every suite; missing tables take their defaults.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LabConfig {
    pub fractional_integration: fractional_integration::Config,
    pub gap_scaling: gap_scaling::Config,
    pub truncated_powers: truncated_powers::Config,
    pub exponent_equivalence: exponent_equivalence::Config,
    pub lifting_estimates: lifting_estimates::Config,
    pub nonlinear_exponent: nonlinear_exponent::Config,
    pub large_scale: large_scale::Config,
    pub counterexample: counterexample::Config,
    pub supercritical: supercritical::Config,
    pub small_lemmas: small_lemmas::Config,
    pub sum_space: sum_space::Config,
}

impl LabConfig {
    /// Reduced resolutions for smoke runs; same cases, coarser grids.
    pub fn quick() -> Self {
        LabConfig {
            fractional_integration: fractional_integration::Config::quick(),
            gap_scaling: gap_scaling::Config::quick(),
            truncated_powers: truncated_powers::Config::default(),
            exponent_equivalence: exponent_equivalence::Config::quick(),
            lifting_estimates: lifting_estimates::Config::quick(),
            nonlinear_exponent: nonlinear_exponent::Config::quick(),
            large_scale: large_scale::Config::quick(),
            counterexample: counterexample::Config::quick(),
            supercritical: supercritical::Config::quick(),
            small_lemmas: small_lemmas::Config::quick(),
            sum_space: sum_space::Config::quick(),
        }
    }

    /// Overrides every suite seed.
    pub fn set_seed(&mut self, seed: u64) {
        self.fractional_integration.seed = seed;
        self.gap_scaling.seed = seed;
        self.exponent_equivalence.seed = seed;
        self.large_scale.seed = seed;
        self.small_lemmas.seed = seed;
        self.sum_space.seed = seed;
    }
}

/// Runs one suite by id; `None` for an unknown id.
pub fn run_suite(id: &str, config: &LabConfig) -> Option<Result<SuiteOutput>> {
    Some(match id {
        "fractional_integration" => fractional_integration::run(&config.fractional_integration),
        "gap_scaling" => gap_scaling::run(&config.gap_scaling),
        "truncated_powers" => truncated_powers::run(&config.truncated_powers),
        "exponent_equivalence" => exponent_equivalence::run(&config.exponent_equivalence),
        "lifting_estimates" => lifting_estimates::run(&config.lifting_estimates),
        "nonlinear_exponent" => nonlinear_exponent::run(&config.nonlinear_exponent),
        "large_scale" => large_scale::run(&config.large_scale),
        "counterexample" => counterexample::run(&config.counterexample),
        "supercritical" => supercritical::run(&config.supercritical),
        "small_lemmas" => small_lemmas::run(&config.small_lemmas),
        "sum_space" => sum_space::run(&config.sum_space),
        _ => return None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pass_semantics() {
        let e = Exponents::none();
        assert!(RatioReport::exact("t", "c", e, 1.0, 1.0).pass);
        assert!(!RatioReport::exact("t", "c", e, 1.0 + 1e-9, 1.0).pass);
        assert!(RatioReport::exact("t", "c", e, 0.0, 0.0).pass);
        let r = RatioReport::explicit("t", "c", e, 3.0, 1.0, 2.9, 0.05);
        assert!(r.pass && r.ratio == 3.0);
        assert!(!RatioReport::explicit("t", "c", e, 3.1, 1.0, 2.9, 0.05).pass);
        let r = RatioReport::empirical("t", "c", e, 1.1, 1.0, 1.2);
        assert!(r.pass && r.bound_constant.is_nan());
        assert!(!RatioReport::empirical("t", "c", e, 1.3, 1.0, 1.2).pass);
        assert!(RatioReport::empirical("t", "c", e, 0.0, 0.0, 1.2).pass);
        assert!(!RatioReport::empirical("t", "c", e, f64::INFINITY, 1.0, 1.2).pass);
        assert_eq!(RatioReport::exact("t", "c", e, 1.0, 0.0).ratio, f64::INFINITY);
    }
}
