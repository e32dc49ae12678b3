//! Splitting into `W^{s,p} + W^{1,sp}` against the truncated membership functional.
//!
//! Each field is split by [`split_sum_space`]; the objective must not exceed
//! either trivial split, and the ratios between the truncated functional and
//! the objective must stay in a band that is stable under refinement.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::families::{FamilyKind, FieldFamily};
use super::{Exponents, RatioReport, SuiteOutput, DEFAULT_GROWTH};
use crate::decompose::{split_sum_space, sum_membership_functional, sum_objective};
use crate::domain::{make_domain, DomainKind};
use crate::energy::Field;
use crate::error::{Error, Result};

pub const SUITE: &str = "sum_space";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub n: usize,
    pub s: f64,
    pub p: f64,
    pub q: f64,
    pub fields: u64,
    pub growth: f64,
    pub seed: u64,
}

impl Default for Config {
    fn default() -> Self {
        Config { n: 128, s: 0.5, p: 3.0, q: 1.0, fields: 20, growth: DEFAULT_GROWTH, seed: 0 }
    }
}

impl Config {
    pub fn quick() -> Self {
        Config { n: 64, fields: 6, ..Self::default() }
    }
}

/// Seeded smooth fields cycling through trigonometric mixes, ramps and bumps.
pub fn field(dom: &crate::domain::GridDomain, seed: u64, index: u64) -> Field {
    let kind = [FamilyKind::Trig, FamilyKind::Ramp, FamilyKind::Bumps][(index % 3) as usize];
    Field::real(dom, FieldFamily::new(kind, seed).member(index, 1, dom.side()))
}

/// Per field: `(objective, split g = f, split h = f, membership)`.
pub fn measure(config: &Config, n: usize) -> Result<Vec<(f64, f64, f64, f64)>> {
    let (s, p, q) = (config.s, config.p, config.q);
    let dom = make_domain(DomainKind::Interval, 1, n, 1.0)?;
    let zero = Field::from_reals(&dom, &vec![0.0; n])?;
    (0..config.fields)
        .into_par_iter()
        .map(|i| {
            let f = field(&dom, config.seed, i);
            let split = split_sum_space(&f, s, p)?;
            let all_g = sum_objective(&f, &zero, s, p)?;
            let all_h = sum_objective(&zero, &f, s, p)?;
            let membership = sum_membership_functional(&f, s, p, q)?;
            Ok((split.objective, all_g, all_h, membership))
        })
        .collect()
}

pub fn run(config: &Config) -> Result<SuiteOutput> {
    let (s, p, q) = (config.s, config.p, config.q);
    if !(s * p > 1.0) {
        return Err(Error::SubcriticalExponent(s * p));
    }
    if !(q > 0.0 && q < s * p) {
        return Err(Error::ExponentOutOfRange(format!("q = {q} must lie in (0, sp = {})", s * p)));
    }
    let e = Exponents::new(s, p, q);
    let base = measure(config, config.n)?;
    let fine = measure(config, 2 * config.n)?;
    let mut out = SuiteOutput::new(SUITE);
    for (i, &(obj, all_g, all_h, _)) in base.iter().enumerate() {
        out.reports.push(RatioReport::exact(SUITE, format!("field{i:02}/vs_all_fractional"), e, obj, all_g));
        out.reports.push(RatioReport::exact(SUITE, format!("field{i:02}/vs_all_first_order"), e, obj, all_h));
    }
    let band = |v: &[(f64, f64, f64, f64)]| -> (f64, f64) {
        let up = v.iter().filter(|c| c.0 > 0.0).map(|c| c.3 / c.0).fold(0.0, f64::max);
        let down = v.iter().filter(|c| c.3 > 0.0).map(|c| c.0 / c.3).fold(0.0, f64::max);
        (up, down)
    };
    let ((ub, db), (uf, df)) = (band(&base), band(&fine));
    out.push_constant(format!("membership_over_objective/n{}", config.n), ub);
    out.push_constant(format!("membership_over_objective/n{}", 2 * config.n), uf);
    out.push_constant(format!("objective_over_membership/n{}", config.n), db);
    out.push_constant(format!("objective_over_membership/n{}", 2 * config.n), df);
    out.reports.push(RatioReport::empirical(SUITE, "band/membership_over_objective", e, uf, ub, config.growth));
    out.reports.push(RatioReport::empirical(SUITE, "band/objective_over_membership", e, df, db, config.growth));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quick_run_passes() {
        let out = run(&Config::quick()).unwrap();
        assert!(out.all_pass(), "{:#?} {:#?}", out.reports.iter().filter(|r| !r.pass).collect::<Vec<_>>(), out.constants);
    }
}
