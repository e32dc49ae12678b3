//! Lower-order energy of a lifting in the supercritical regime `1 − s < sp/m < 1`.
//!
//! The lifting is controlled in `W^{s♭,p}` with `s♭ = s − (1−s)(m/(sp) − 1)`.
//! The probe uses `|x − c|^{−α}`, whose `W^{s*,p}` energy is finite exactly when
//! `(α + s*) p < m`, and locates that threshold from how the discrete energy
//! grows under grid refinement.

use std::f64::consts::TAU;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::families::power_singularity;
use super::{Exponents, RatioReport, Series, SuiteOutput, DEFAULT_GROWTH};
use crate::covering::CoveringChart;
use crate::domain::{make_domain, DomainKind};
use crate::energy::{gagliardo, Field};
use crate::error::{Error, Result};

pub const SUITE: &str = "supercritical";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub m: usize,
    pub s: f64,
    pub p: f64,
    /// Base resolution of the lifted-family check; compared with `2n`.
    pub n: usize,
    pub amplitudes: Vec<f64>,
    pub growth: f64,
    pub alpha: f64,
    /// Coarsest probe resolution; the probe also uses `2n` and `4n`.
    pub probe_n: usize,
    pub probe_s: Vec<f64>,
    pub band: f64,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            m: 2,
            s: 0.8,
            p: 2.0,
            n: 32,
            amplitudes: vec![0.5, 1.0, 2.0],
            growth: DEFAULT_GROWTH,
            alpha: 0.24,
            probe_n: 32,
            probe_s: vec![0.6, 0.65, 0.7, 0.75, 0.8, 0.85, 0.9],
            band: 0.05,
        }
    }
}

impl Config {
    pub fn quick() -> Self {
        Config { n: 24, probe_n: 16, ..Self::default() }
    }
}

/// `s♭ = s − (1 − s)(m/(sp) − 1)`.
pub fn s_flat(m: usize, s: f64, p: f64) -> f64 {
    s - (1.0 - s) * (m as f64 / (s * p) - 1.0)
}

/// Checks `1 − s < sp/m < 1`.
pub fn admissible(m: usize, s: f64, p: f64) -> Result<()> {
    let r = s * p / m as f64;
    if 1.0 - s < r && r < 1.0 {
        Ok(())
    } else {
        Err(Error::ExponentConditionViolated(format!("need 1 − s < sp/m < 1 (1 − s = {}, sp/m = {r})", 1.0 - s)))
    }
}

/// Winding phase on the square.
fn phase(t: f64) -> impl Fn([f64; 2]) -> f64 {
    move |x| t * TAU * (x[0] + 0.25 * (TAU * x[1]).sin())
}

/// Refinement exponent `log₂((E(4n) − E(2n)) / (E(2n) − E(n)))`.
pub fn refinement_exponent(e: [f64; 3]) -> f64 {
    ((e[2] - e[1]) / (e[1] - e[0])).log2()
}

/// First sign change of `κ` from negative to nonnegative, linearly interpolated.
pub fn sign_change(s_values: &[f64], kappa: &[f64]) -> Option<f64> {
    (1..kappa.len()).find(|&k| kappa[k - 1] < 0.0 && kappa[k] >= 0.0).map(|k| {
        let (a, b) = (kappa[k - 1], kappa[k]);
        s_values[k - 1] + (s_values[k] - s_values[k - 1]) * a / (a - b)
    })
}

fn lifted_family(config: &Config, sf: f64, out: &mut SuiteOutput) -> Result<()> {
    let (s, p) = (config.s, config.p);
    let cov = CoveringChart::line_over_circle();
    let constant = |n: usize| -> Result<f64> {
        let dom = make_domain(DomainKind::Cube, config.m, n, 1.0)?;
        let ratios: Vec<f64> = config
            .amplitudes
            .par_iter()
            .map(|&t| {
                let lifted = Field::real(&dom, phase(t));
                let e = gagliardo(&lifted.project(&cov)?, s, p)?.value;
                let lhs = gagliardo(&lifted, sf, p)?.value;
                Ok(lhs / (e + e.powf(1.0 / s)))
            })
            .collect::<Result<_>>()?;
        Ok(ratios.into_iter().fold(0.0, f64::max))
    };
    let (cb, cf) = (constant(config.n)?, constant(2 * config.n)?);
    out.push_constant(format!("lifted/C/n{}", config.n), cb);
    out.push_constant(format!("lifted/C/n{}", 2 * config.n), cf);
    out.reports.push(RatioReport::empirical(SUITE, "lifted/refinement", Exponents::new(sf, p, f64::NAN), cf, cb, config.growth));
    Ok(())
}

/// `κ(s*)` for the power singularity at each probe exponent.
pub fn probe(m: usize, p: f64, alpha: f64, n: usize, s_values: &[f64]) -> Result<Vec<f64>> {
    let ns = [n, 2 * n, 4 * n];
    let fields: Vec<Field> = ns
        .iter()
        .map(|&k| {
            let dom = make_domain(DomainKind::Cube, m, k, 1.0)?;
            Ok(Field::real(&dom, power_singularity(alpha, [0.5, 0.5], m == 2)))
        })
        .collect::<Result<_>>()?;
    s_values
        .iter()
        .map(|&ss| {
            let mut e = [0.0; 3];
            for (slot, f) in e.iter_mut().zip(&fields) {
                *slot = gagliardo(f, ss, p)?.value;
            }
            Ok(refinement_exponent(e))
        })
        .collect()
}

pub fn run(config: &Config) -> Result<SuiteOutput> {
    let (m, s, p) = (config.m, config.s, config.p);
    if !(1..=2).contains(&m) {
        return Err(Error::InvalidDimension(m));
    }
    admissible(m, s, p)?;
    let sf = s_flat(m, s, p);
    let mut out = SuiteOutput::new(SUITE);
    out.push_constant("s_flat", sf);
    lifted_family(config, sf, &mut out)?;

    let kappa = probe(m, p, config.alpha, config.probe_n, &config.probe_s)?;
    let predicted = m as f64 / p - config.alpha;
    out.push_constant("probe/predicted_threshold", predicted);
    for (ss, k) in config.probe_s.iter().zip(&kappa) {
        out.push_constant(format!("probe/kappa/s{ss}"), *k);
    }
    let e = Exponents::new(sf, p, f64::NAN);
    match sign_change(&config.probe_s, &kappa) {
        Some(root) => {
            out.push_constant("probe/threshold", root);
            out.reports.push(RatioReport::explicit(SUITE, "probe/threshold_vs_s_flat", e, (root - sf).abs(), config.band, 1.0, 0.0));
            out.reports.push(RatioReport::explicit(
                SUITE,
                "probe/threshold_vs_prediction",
                e,
                (root - predicted).abs(),
                config.band,
                1.0,
                0.0,
            ));
        }
        None => {
            out.push_constant("probe/threshold", f64::NAN);
            out.reports.push(RatioReport::explicit(SUITE, "probe/threshold_vs_s_flat", e, f64::INFINITY, config.band, 1.0, 0.0));
        }
    }
    out.series.push(Series {
        name: "refinement exponent against s*".into(),
        points: config.probe_s.iter().copied().zip(kappa).collect(),
    });
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn s_flat_value() {
        assert_eq!(s_flat(2, 0.8, 2.0), 0.75);
        assert!(admissible(2, 0.8, 2.0).is_ok());
        assert!(matches!(admissible(2, 0.5, 2.0), Err(Error::ExponentConditionViolated(_))));
        assert!(matches!(admissible(1, 0.8, 2.0), Err(Error::ExponentConditionViolated(_))));
    }

    #[test]
    fn interpolated_root() {
        let r = sign_change(&[0.0, 1.0, 2.0], &[-2.0, -1.0, 1.0]).unwrap();
        assert!((r - 1.5).abs() < 1e-15);
        assert!(sign_change(&[0.0, 1.0], &[1.0, 2.0]).is_none());
    }

    #[test]
    fn quick_run_passes() {
        let out = run(&Config::quick()).unwrap();
        assert!(out.all_pass(), "{:#?} {:#?}", out.reports, out.constants);
    }
}
