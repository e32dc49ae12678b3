//! Capped energy of a lifting against the Gagliardo energy of the base map.

use std::f64::consts::TAU;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{Exponents, RatioReport, SuiteOutput, DEFAULT_COVERING_BAND, DEFAULT_GROWTH};
use crate::covering::CoveringChart;
use crate::domain::{make_domain, DomainKind};
use crate::energy::{gagliardo, truncated, Field};
use crate::error::{Error, Result};
use crate::lifting::lift_field;

pub const SUITE: &str = "lifting_estimates";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    /// Base resolution; the check compares it with `2n`.
    pub n: usize,
    pub s: f64,
    pub p: f64,
    /// Amplitudes of the phases `t (2πx + sin 2πx)`.
    pub amplitudes: Vec<f64>,
    pub coverings: Vec<String>,
    pub growth: f64,
    pub covering_band: f64,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            n: 128,
            s: 0.75,
            p: 2.0,
            amplitudes: vec![1.0, 4.0, 16.0],
            coverings: vec!["r-over-s1".into(), "kfold:3".into()],
            growth: DEFAULT_GROWTH,
            covering_band: DEFAULT_COVERING_BAND,
        }
    }
}

impl Config {
    pub fn quick() -> Self {
        Config { n: 64, amplitudes: vec![1.0, 4.0], ..Self::default() }
    }
}

/// The phase `t (2πx + sin 2πx)`.
pub fn phase(t: f64) -> impl Fn([f64; 2]) -> f64 {
    move |x| t * (TAU * x[0] + (TAU * x[0]).sin())
}

/// Capped lifted energy and base energy of `project(φ)`.
pub fn energies(cov: &CoveringChart, n: usize, s: f64, p: f64, phi: impl Fn([f64; 2]) -> f64) -> Result<(f64, f64)> {
    let dom = make_domain(DomainKind::Interval, 1, n, 1.0)?;
    let u = Field::from_fn(&dom, cov.base(), |x| [phi(x), 0.0]);
    let seed = cov.total().canonical(&[phi(dom.point(0)), 0.0]);
    let lift = lift_field(&u, cov, 0, &seed)?;
    Ok((truncated(&lift.lifted, s, p, 0.0)?.value, gagliardo(&u, s, p)?.value))
}

pub fn run(config: &Config) -> Result<SuiteOutput> {
    let (s, p) = (config.s, config.p);
    if !(s * p > 1.0) {
        return Err(Error::ExponentConditionViolated(format!("sp = {} must exceed 1", s * p)));
    }
    let covs: Vec<CoveringChart> = config.coverings.iter().map(|c| c.parse()).collect::<Result<_>>()?;
    if let Some(c) = covs.iter().find(|c| c.base().dim() != 1) {
        return Err(Error::InvalidParameter(format!("covering {} is not over a circle", c.id())));
    }
    let e = Exponents::new(s, p, 0.0);
    let mut out = SuiteOutput::new(SUITE);
    let mut fine_constants = Vec::new();
    for cov in &covs {
        let constant = |n: usize| -> Result<f64> {
            let ratios: Vec<f64> = config
                .amplitudes
                .par_iter()
                .map(|&t| energies(cov, n, s, p, phase(t)).map(|(l, r)| l / r))
                .collect::<Result<_>>()?;
            Ok(ratios.into_iter().fold(0.0, f64::max))
        };
        let (cb, cf) = (constant(config.n)?, constant(2 * config.n)?);
        out.push_constant(format!("C/{}/n{}", cov.id(), config.n), cb);
        out.push_constant(format!("C/{}/n{}", cov.id(), 2 * config.n), cf);
        out.reports.push(RatioReport::empirical(SUITE, format!("{}/refinement", cov.id()), e, cf, cb, config.growth));
        let (lc, rc) = energies(cov, config.n, s, p, |_| 1.0)?;
        out.reports.push(RatioReport::exact(SUITE, format!("{}/constant", cov.id()), e, lc, rc));
        fine_constants.push((cov.id(), cf));
    }
    for w in fine_constants.windows(2) {
        let (a, b) = (w[0].1, w[1].1);
        out.reports.push(RatioReport::empirical(
            SUITE,
            format!("{}_vs_{}/n{}", w[0].0, w[1].0, 2 * config.n),
            e,
            a.max(b),
            a.min(b),
            config.covering_band,
        ));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quick_run_passes() {
        let out = run(&Config::quick()).unwrap();
        assert_eq!(out.reports.len(), 5);
        assert!(out.all_pass(), "{:#?}", out.reports);
    }
}
