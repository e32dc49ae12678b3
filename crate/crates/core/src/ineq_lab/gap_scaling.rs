//! Growth of gap energies in the threshold on convex domains.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::families::{FamilyKind, FieldFamily};
use super::{Exponents, RatioReport, SuiteOutput, DEFAULT_SLACK};
use crate::domain::{make_domain, DomainKind};
use crate::energy::{gap_energy, Field};
use crate::error::{Error, Result};

pub const SUITE: &str = "gap_scaling";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub kind: DomainKind,
    pub m: usize,
    pub n: usize,
    pub fields: u64,
    /// `(q, γ, λ₀, λ₁)` tuples.
    pub cases: Vec<[f64; 4]>,
    pub slack: f64,
    pub seed: u64,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            kind: DomainKind::Interval,
            m: 1,
            n: 256,
            fields: 6,
            cases: vec![
                [1.0, 1.5, 0.5, 1.0],
                [2.0, 1.2, 0.5, 1.5],
                [0.5, 0.8, 0.25, 1.0],
                [1.5, 0.5, 0.3, 0.9],
                [0.0, 0.5, 0.5, 2.0],
                [3.0, 2.5, 1.0, 1.5],
            ],
            slack: DEFAULT_SLACK,
            seed: 0,
        }
    }
}

impl Config {
    pub fn quick() -> Self {
        Config { n: 64, fields: 3, ..Self::default() }
    }
}

fn pos(x: f64) -> f64 {
    x.max(0.0)
}

/// `2^{(γ−1−(q−1)₊)₊} (λ₁/λ₀)^{(q−1)₊−γ+1}`.
pub fn bound_constant(q: f64, gamma: f64, lambda0: f64, lambda1: f64) -> f64 {
    let qp = pos(q - 1.0);
    2f64.powf(pos(gamma - 1.0 - qp)) * (lambda1 / lambda0).powf(qp - gamma + 1.0)
}

pub fn run(config: &Config) -> Result<SuiteOutput> {
    if config.kind == DomainKind::Torus {
        return Err(Error::NotConvexDomain);
    }
    let dom = make_domain(config.kind, config.m, config.n, 1.0)?;
    for &[_, _, l0, l1] in &config.cases {
        if !(l0 > 0.0 && l0 < l1) {
            return Err(Error::InvalidParameter(format!("gap scaling needs 0 < λ₀ < λ₁ (got {l0}, {l1})")));
        }
    }
    let family = FieldFamily::new(FamilyKind::RampSteps, config.seed);
    let fields: Vec<(String, Field)> = (0..config.fields)
        .map(|i| (format!("ramp_steps{i:02}"), Field::real(&dom, family.member(i, config.m, 1.0))))
        .chain(std::iter::once(("small_oscillation".to_string(), Field::real(&dom, |x| 0.2 * x[0]))))
        .collect();
    let jobs: Vec<(usize, usize)> =
        (0..config.cases.len()).flat_map(|c| (0..fields.len()).map(move |f| (c, f))).collect();
    let reports = jobs
        .par_iter()
        .map(|&(c, f)| {
            let [q, gamma, l0, l1] = config.cases[c];
            let (name, field) = &fields[f];
            let lhs = gap_energy(field, l1, q, gamma)?.value;
            let rhs = gap_energy(field, l0, q, gamma)?.value;
            Ok(RatioReport::explicit(
                SUITE,
                format!("q{q}_gamma{gamma}_l{l0}-{l1}/{name}"),
                Exponents::new(f64::NAN, f64::NAN, q),
                lhs,
                rhs,
                bound_constant(q, gamma, l0, l1),
                config.slack,
            ))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut out = SuiteOutput::new(SUITE);
    out.reports = reports;
    Ok(out)
}
