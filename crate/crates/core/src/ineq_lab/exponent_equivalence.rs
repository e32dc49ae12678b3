//! Equivalence of truncated energies for different lower exponents below `sp`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::families::{FamilyKind, FieldFamily};
use super::{Exponents, RatioReport, SuiteOutput, DEFAULT_GROWTH};
use crate::domain::{make_domain, DomainKind};
use crate::energy::{truncated, Field};
use crate::error::{Error, Result};

pub const SUITE: &str = "exponent_equivalence";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub n: usize,
    pub s: f64,
    pub p: f64,
    /// `(q₀, q₁)` pairs; the check is `truncated(q₀) ≤ C · truncated(q₁)`.
    pub pairs: Vec<[f64; 2]>,
    /// Amplitudes `t` of the ramps `t·x` plus a seeded winding perturbation.
    pub amplitudes: Vec<f64>,
    pub growth: f64,
    pub seed: u64,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            n: 128,
            s: 0.75,
            p: 2.0,
            pairs: vec![[1.4, 0.5], [0.5, 1.4], [1.0, 1.0], [1.2, 1.0]],
            amplitudes: vec![0.25, 1.0, 4.0, 16.0, 64.0],
            growth: DEFAULT_GROWTH,
            seed: 0,
        }
    }
}

impl Config {
    pub fn quick() -> Self {
        Config { n: 32, amplitudes: vec![0.25, 4.0, 64.0], ..Self::default() }
    }
}

pub fn run(config: &Config) -> Result<SuiteOutput> {
    let (s, p) = (config.s, config.p);
    for &[q0, q1] in &config.pairs {
        if !(q0 >= 0.0 && q1 >= 0.0 && q0.max(q1).max(1.0) < s * p) {
            return Err(Error::ExponentOutOfRange(format!("need max(q₀, q₁, 1) < sp (q₀ = {q0}, q₁ = {q1}, sp = {})", s * p)));
        }
    }
    let family = FieldFamily::new(FamilyKind::Winding, config.seed);
    let build = |n: usize| -> Result<Vec<(String, Field)>> {
        let dom = make_domain(DomainKind::Interval, 1, n, 1.0)?;
        Ok(config
            .amplitudes
            .iter()
            .enumerate()
            .map(|(k, &t)| {
                let wiggle = family.member(k as u64, 1, 1.0);
                (format!("ramp{t}"), Field::real(&dom, |x| t * (x[0] + 0.1 * wiggle(x))))
            })
            .collect())
    };
    let coarse = build(config.n)?;
    let fine = build(2 * config.n)?;
    let mut out = SuiteOutput::new(SUITE);
    for &[q0, q1] in &config.pairs {
        let e = Exponents::new(s, p, q0);
        let ratios = |fields: &[(String, Field)]| -> Result<Vec<(f64, f64)>> {
            fields
                .par_iter()
                .map(|(_, f)| Ok((truncated(f, s, p, q0)?.value, truncated(f, s, p, q1)?.value)))
                .collect()
        };
        let rc = ratios(&coarse)?;
        if q0 <= q1 {
            for ((name, _), (a, b)) in coarse.iter().zip(&rc) {
                out.reports.push(RatioReport::exact(SUITE, format!("q0{q0}_q1{q1}/{name}"), e, *a, *b));
            }
        } else {
            let rf = ratios(&fine)?;
            let cmax = |r: &[(f64, f64)]| r.iter().map(|(a, b)| a / b).fold(0.0, f64::max);
            let (cb, cf) = (cmax(&rc), cmax(&rf));
            out.push_constant(format!("C/q0{q0}_q1{q1}/n{}", config.n), cb);
            out.push_constant(format!("C/q0{q0}_q1{q1}/n{}", 2 * config.n), cf);
            out.reports.push(RatioReport::empirical(SUITE, format!("q0{q0}_q1{q1}/max_over_family"), e, cf, cb, config.growth));
        }
    }
    Ok(out)
}
