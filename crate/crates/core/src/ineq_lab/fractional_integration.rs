//! Segment double energies against the Gagliardo energy, with the sharp
//! constant `8 / ((2(s−σ)p + 1)² − 1)`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::families::{FamilyKind, FieldFamily};
use super::{Exponents, RatioReport, SuiteOutput, DEFAULT_SLACK};
use crate::domain::{make_domain, DomainKind};
use crate::energy::{gagliardo, segment_double_energy, Field, DEFAULT_INNER_POINTS};
use crate::error::{Error, Result};

pub const SUITE: &str = "fractional_integration";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub n: usize,
    pub inner: usize,
    pub fields: u64,
    /// `(s, σ, p)` triples.
    pub params: Vec<[f64; 3]>,
    pub slack: f64,
    pub seed: u64,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            n: 128,
            inner: DEFAULT_INNER_POINTS,
            fields: 10,
            params: vec![[0.5, 0.3, 2.0], [0.75, 0.5, 2.0], [0.6, 0.2, 3.0]],
            slack: DEFAULT_SLACK,
            seed: 0,
        }
    }
}

impl Config {
    pub fn quick() -> Self {
        Config { n: 32, inner: 16, fields: 3, ..Self::default() }
    }
}

/// The sharp constant of the segment inequality.
pub fn bound_constant(s: f64, sigma: f64, p: f64) -> f64 {
    let a = 2.0 * (s - sigma) * p + 1.0;
    8.0 / (a * a - 1.0)
}

pub fn run(config: &Config) -> Result<SuiteOutput> {
    let dom = make_domain(DomainKind::Interval, 1, config.n, 1.0)?;
    for &[s, sigma, _] in &config.params {
        if !(sigma > 0.0 && sigma < s) {
            return Err(Error::BadSigma { sigma, s });
        }
    }
    let family = FieldFamily::new(FamilyKind::Trig, config.seed);
    let mut cases: Vec<(usize, Option<u64>)> = Vec::new();
    for k in 0..config.params.len() {
        cases.extend((0..config.fields).map(|i| (k, Some(i))));
        cases.push((k, None));
    }
    let reports: Vec<RatioReport> = cases
        .par_iter()
        .map(|&(k, member)| {
            let [s, sigma, p] = config.params[k];
            let (field, name) = match member {
                Some(i) => (Field::real(&dom, family.member(i, 1, 1.0)), format!("trig{i:02}")),
                None => (Field::real(&dom, |_| 1.0), "constant".to_string()),
            };
            let lhs = segment_double_energy(&field, s, p, sigma, 0.0, config.inner)?.value;
            let rhs = gagliardo(&field, s, p)?.value;
            Ok(RatioReport::explicit(
                SUITE,
                format!("s{s}_sigma{sigma}_p{p}/{name}"),
                Exponents::new(s, p, f64::NAN),
                lhs,
                rhs,
                bound_constant(s, sigma, p),
                config.slack,
            ))
        })
        .collect::<Result<_>>()?;
    let mut out = SuiteOutput::new(SUITE);
    for &[s, sigma, p] in &config.params {
        let worst = reports
            .iter()
            .filter(|r| r.case_id.starts_with(&format!("s{s}_sigma{sigma}_p{p}/")))
            .map(|r| r.ratio)
            .fold(0.0, f64::max);
        out.push_constant(format!("max_ratio/s{s}_sigma{sigma}_p{p}"), worst);
        out.push_constant(format!("bound/s{s}_sigma{sigma}_p{p}"), bound_constant(s, sigma, p));
    }
    out.reports = reports;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constants() {
        assert!((bound_constant(0.5, 0.3, 2.0) - 8.0 / 2.24).abs() < 1e-12);
        assert!((bound_constant(0.75, 0.5, 2.0) - 8.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn quick_run_passes() {
        let out = run(&Config::quick()).unwrap();
        assert_eq!(out.reports.len(), 12);
        assert!(out.all_pass(), "{:#?}", out.reports.iter().filter(|r| !r.pass).collect::<Vec<_>>());
    }
}
