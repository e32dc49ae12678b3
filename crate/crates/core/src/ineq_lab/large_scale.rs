//! One-dimensional and large-scale oscillation estimates.
//!
//! Four groups of cases: mean-oscillation chains, the truncated Morrey bound at
//! sampled pairs, large oscillations of a lifting against the base energy, and
//! the segment integration bound with constant `2 diam^{m+γ} / (m + γ)`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::families::{FamilyKind, FieldFamily};
use super::{Exponents, RatioReport, SuiteOutput, DEFAULT_GROWTH, DEFAULT_SLACK};
use crate::covering::CoveringChart;
use crate::domain::{make_domain, DomainKind};
use crate::energy::{gagliardo, large_osc_energy, Field};
use crate::error::{Error, Result};
use crate::numeric::{csum, pow, CompensatedSum};

pub const SUITE: &str = "large_scale";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub seed: u64,
    pub growth: f64,
    pub chain_cases: u64,
    pub chain_n: usize,
    pub morrey_n: usize,
    pub morrey_s: f64,
    pub morrey_p: f64,
    pub morrey_pairs: usize,
    pub morrey_mu: Vec<f64>,
    pub morrey_fields: u64,
    pub osc_n: usize,
    pub osc_s: f64,
    pub osc_p: f64,
    pub osc_p_star: f64,
    pub osc_amplitudes: Vec<f64>,
    pub osc_fields: u64,
    pub integration_n: usize,
    pub integration_inner: usize,
    pub integration_gammas: Vec<f64>,
    pub integration_fields: u64,
    pub integration_slack: f64,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            seed: 0,
            growth: DEFAULT_GROWTH,
            chain_cases: 20,
            chain_n: 64,
            morrey_n: 128,
            morrey_s: 0.75,
            morrey_p: 2.0,
            morrey_pairs: 200,
            morrey_mu: vec![0.0, 0.5, 2.0, 8.0],
            morrey_fields: 3,
            osc_n: 256,
            osc_s: 0.8,
            osc_p: 2.0,
            osc_p_star: 2.0,
            osc_amplitudes: vec![0.5, 1.0, 2.0, 4.0],
            osc_fields: 4,
            integration_n: 64,
            integration_inner: 32,
            integration_gammas: vec![0.5, 1.5],
            integration_fields: 3,
            integration_slack: DEFAULT_SLACK,
        }
    }
}

impl Config {
    pub fn quick() -> Self {
        Config {
            morrey_n: 64,
            morrey_pairs: 60,
            osc_n: 128,
            osc_amplitudes: vec![0.5, 2.0],
            osc_fields: 2,
            integration_n: 32,
            integration_inner: 16,
            integration_fields: 2,
            ..Self::default()
        }
    }
}

/// `(mean over A×B of |f(y) − f(x)|^p)^{1/p}`.
fn mean_oscillation(f: &[f64], a: &[usize], b: &[usize], p: f64) -> f64 {
    let total = csum(a.iter().flat_map(|&x| b.iter().map(move |&y| pow((f[y] - f[x]).abs(), p))));
    (total / (a.len() * b.len()) as f64).powf(1.0 / p)
}

/// Chain inequality `osc(A₀, A_k) ≤ Σ osc(A_j, A_{j+1})` for sets `sets[0..=k]`.
pub fn chain_sides(f: &[f64], sets: &[Vec<usize>], p: f64) -> (f64, f64) {
    let k = sets.len() - 1;
    let lhs = mean_oscillation(f, &sets[0], &sets[k], p);
    let rhs = csum(sets.windows(2).map(|w| mean_oscillation(f, &w[0], &w[1], p)));
    (lhs, rhs)
}

/// Inner truncated energy `Σ_{w≠v ∈ [a, b]} (|f_w − f_v| / |w−v|^s − μ)₊^p / |w−v| · h²`.
fn morrey_inner(f: &[f64], a: usize, b: usize, h: f64, s: f64, p: f64, mu: f64) -> f64 {
    let mut acc = CompensatedSum::default();
    for w in a..=b {
        for v in w + 1..=b {
            let r = (v - w) as f64 * h;
            let q = (f[v] - f[w]).abs() / r.powf(s) - mu;
            if q > 0.0 {
                acc.add(pow(q, p) / r);
            }
        }
    }
    2.0 * acc.value() * h * h
}

/// Ratio of `|f(y) − f(x)|` to the truncated Morrey right-hand side at grid indices `a < b`.
pub fn morrey_ratio(f: &[f64], a: usize, b: usize, h: f64, s: f64, p: f64, mu: f64) -> f64 {
    let d = (f[b] - f[a]).abs();
    let len = (b - a) as f64 * h;
    let rhs = morrey_inner(f, a, b, h, s, p, mu).powf(1.0 / p) * len.powf(s - 1.0 / p) + mu * len.powf(s);
    if rhs > 0.0 {
        d / rhs
    } else if d == 0.0 {
        0.0
    } else {
        f64::INFINITY
    }
}

/// Both sides of the segment integration bound in 1D for a kernel `F` on index pairs
/// (zero on the diagonal), sampling each segment at `inner` midpoints.
pub fn integration_sides(n: usize, inner: usize, gamma: f64, kernel: &(dyn Fn(usize, usize) -> f64 + Sync)) -> (f64, f64) {
    let h = 1.0 / n as f64;
    let ts: Vec<f64> = (0..inner).map(|a| (a as f64 + 0.5) / inner as f64).collect();
    let lhs: f64 = (0..n)
        .into_par_iter()
        .map(|x| {
            let mut acc = CompensatedSum::default();
            for y in 0..n {
                if y == x {
                    continue;
                }
                let idx: Vec<usize> = ts
                    .iter()
                    .map(|&t| {
                        let z = (1.0 - t) * (x as f64 + 0.5) + t * (y as f64 + 0.5);
                        (z.floor() as usize).min(n - 1)
                    })
                    .collect();
                let len = x.abs_diff(y) as f64 * h;
                let seg = csum(idx.iter().flat_map(|&w| idx.iter().map(move |&v| if w == v { 0.0 } else { kernel(w, v) })));
                acc.add(seg * len * len / (inner * inner) as f64 * len.powf(gamma - 1.0));
            }
            acc.value()
        })
        .collect::<Vec<f64>>()
        .into_iter()
        .sum::<f64>()
        * h
        * h;
    let base = csum((0..n).flat_map(|w| (0..n).map(move |v| if w == v { 0.0 } else { kernel(w, v) }))) * h * h;
    (lhs, base)
}

/// `2 diam^{m+γ} / (m + γ)`.
pub fn integration_constant(m: usize, diam: f64, gamma: f64) -> f64 {
    let e = m as f64 + gamma;
    2.0 * diam.powf(e) / e
}

/// `s_*` with `(1 − s_*) / m = 1/(sp) − 1/p_*`.
pub fn critical_s_star(m: usize, s: f64, p: f64, p_star: f64) -> f64 {
    1.0 - m as f64 * (1.0 / (s * p) - 1.0 / p_star)
}

fn chain_cases(config: &Config, out: &mut SuiteOutput) -> Result<()> {
    let dom = make_domain(DomainKind::Interval, 1, config.chain_n, 1.0)?;
    let family = FieldFamily::new(FamilyKind::RampSteps, config.seed);
    let reports: Vec<RatioReport> = (0..config.chain_cases)
        .into_par_iter()
        .map(|c| {
            let mut rng = ChaCha8Rng::seed_from_u64(config.seed ^ (0xC4A1 << 32) ^ c);
            let k = 1 + (c % 4) as usize;
            let p = rng.random_range(1.0..3.0);
            let f = Field::real(&dom, family.member(c, 1, 1.0)).reals()?;
            let sets: Vec<Vec<usize>> = (0..=k)
                .map(|_| {
                    let size = rng.random_range(1..=config.chain_n / 4);
                    (0..size).map(|_| rng.random_range(0..config.chain_n)).collect()
                })
                .collect();
            let (lhs, rhs) = chain_sides(&f, &sets, p);
            Ok(RatioReport::exact(SUITE, format!("chain/k{k}/case{c:02}"), Exponents::new(f64::NAN, p, f64::NAN), lhs, rhs))
        })
        .collect::<Result<_>>()?;
    out.reports.extend(reports);
    Ok(())
}

fn morrey_cases(config: &Config, out: &mut SuiteOutput) -> Result<()> {
    let (s, p) = (config.morrey_s, config.morrey_p);
    if !(s * p > 1.0) {
        return Err(Error::ExponentConditionViolated(format!("truncated Morrey needs sp > 1 (sp = {})", s * p)));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed ^ (0x303E << 32));
    let pairs: Vec<(f64, f64)> = (0..config.morrey_pairs)
        .map(|_| {
            let (x, y): (f64, f64) = (rng.random_range(0.0..1.0), rng.random_range(0.0..1.0));
            (x.min(y), x.max(y))
        })
        .collect();
    let family = FieldFamily::new(FamilyKind::Trig, config.seed);
    let constant = |n: usize| -> Result<f64> {
        let dom = make_domain(DomainKind::Interval, 1, n, 1.0)?;
        let h = dom.h();
        let fields: Vec<Vec<f64>> =
            (0..config.morrey_fields).map(|i| Field::real(&dom, family.member(i, 1, 1.0)).reals()).collect::<Result<_>>()?;
        let worst = pairs
            .par_iter()
            .map(|&(x, y)| {
                let (a, b) = ((x * n as f64) as usize, (y * n as f64) as usize);
                if a == b {
                    return 0.0;
                }
                let mut w: f64 = 0.0;
                for f in &fields {
                    for &mu in &config.morrey_mu {
                        w = w.max(morrey_ratio(f, a, b, h, s, p, mu));
                    }
                }
                w
            })
            .reduce(|| 0.0, f64::max);
        Ok(worst)
    };
    let (cb, cf) = (constant(config.morrey_n)?, constant(2 * config.morrey_n)?);
    out.push_constant(format!("morrey/C/n{}", config.morrey_n), cb);
    out.push_constant(format!("morrey/C/n{}", 2 * config.morrey_n), cf);
    out.reports.push(RatioReport::empirical(SUITE, "morrey/refinement", Exponents::new(s, p, f64::NAN), cf, cb, config.growth));
    Ok(())
}

fn oscillation_cases(config: &Config, out: &mut SuiteOutput) -> Result<()> {
    let (s, p, p_star) = (config.osc_s, config.osc_p, config.osc_p_star);
    if !(s * p > 1.0) {
        return Err(Error::ExponentConditionViolated(format!("large oscillation bound needs sp > 1 (sp = {})", s * p)));
    }
    let s_star = critical_s_star(1, s, p, p_star);
    if !(s_star > 0.0 && s_star < 1.0) {
        return Err(Error::ExponentConditionViolated(format!("s_* = {s_star} must lie in (0, 1)")));
    }
    let cov = CoveringChart::line_over_circle();
    let delta = cov.inj() / 2.0;
    let family = FieldFamily::new(FamilyKind::Winding, config.seed);
    let cases: Vec<(u64, f64)> =
        (0..config.osc_fields).flat_map(|i| config.osc_amplitudes.iter().map(move |&t| (i, t))).collect();
    let constant = |n: usize| -> Result<f64> {
        let dom = make_domain(DomainKind::Interval, 1, n, 1.0)?;
        let ratios: Vec<f64> = cases
            .par_iter()
            .map(|&(i, t)| {
                let phi = family.member(i, 1, 1.0);
                let lifted = Field::real(&dom, |x| t * phi(x));
                let base = lifted.project(&cov)?;
                let lhs = large_osc_energy(&lifted, delta, s_star, p_star)?.value;
                let energy = gagliardo(&base, s, p)?.value;
                let rhs = (energy / delta.powf((1.0 - s) * p)).powf(p_star / (s * p));
                Ok(if rhs > 0.0 { lhs / rhs } else { 0.0 })
            })
            .collect::<Result<_>>()?;
        Ok(ratios.into_iter().fold(0.0, f64::max))
    };
    let (cb, cf) = (constant(config.osc_n)?, constant(2 * config.osc_n)?);
    out.push_constant("oscillation/s_star", s_star);
    out.push_constant(format!("oscillation/C/n{}", config.osc_n), cb);
    out.push_constant(format!("oscillation/C/n{}", 2 * config.osc_n), cf);
    out.reports.push(RatioReport::empirical(
        SUITE,
        "oscillation/refinement",
        Exponents::new(s_star, p_star, f64::NAN),
        cf,
        cb,
        config.growth,
    ));
    Ok(())
}

fn integration_cases(config: &Config, out: &mut SuiteOutput) -> Result<()> {
    let (n, inner) = (config.integration_n, config.integration_inner);
    let dom = make_domain(DomainKind::Interval, 1, n, 1.0)?;
    let family = FieldFamily::new(FamilyKind::Trig, config.seed);
    let (s, p) = (0.5, 2.0);
    for &gamma in &config.integration_gammas {
        if !(gamma > -1.0) {
            return Err(Error::ExponentOutOfRange(format!("γ = {gamma} must exceed −m")));
        }
        let bound = integration_constant(1, dom.diameter(), gamma);
        for i in 0..config.integration_fields {
            let f = Field::real(&dom, family.member(i, 1, 1.0)).reals()?;
            let h = dom.h();
            let kernel = |w: usize, v: usize| pow((f[w] - f[v]).abs(), p) / (w.abs_diff(v) as f64 * h).powf(1.0 + s * p);
            let (lhs, rhs) = integration_sides(n, inner, gamma, &kernel);
            out.reports.push(RatioReport::explicit(
                SUITE,
                format!("integration/gamma{gamma}/trig{i:02}"),
                Exponents::new(s, p, f64::NAN),
                lhs,
                rhs,
                bound,
                config.integration_slack,
            ));
        }
    }
    Ok(())
}

pub fn run(config: &Config) -> Result<SuiteOutput> {
    let mut out = SuiteOutput::new(SUITE);
    chain_cases(config, &mut out)?;
    morrey_cases(config, &mut out)?;
    oscillation_cases(config, &mut out)?;
    integration_cases(config, &mut out)?;
    Ok(out)
}
