//! Elementary inequalities: truncated powers of sums, the measure-Hölder bound
//! on convergence in measure, and the approximation of a field by cellwise
//! constants with constant `m^{(m+sp)/2} / k^{sp}`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::families::{FamilyKind, FieldFamily};
use super::{Exponents, RatioReport, SuiteOutput, DEFAULT_SLACK};
use crate::domain::{make_domain, DomainKind, GridDomain};
use crate::energy::{truncated, Field};
use crate::error::{Error, Result};
use crate::numeric::{csum, pow};

pub const SUITE: &str = "small_lemmas";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub seed: u64,
    pub tuples: u64,
    pub holder_cases: u64,
    pub holder_slack: f64,
    pub coarsen_n: usize,
    pub coarsen_k: Vec<usize>,
    pub coarsen_s: f64,
    pub coarsen_p: f64,
    pub coarsen_q: f64,
    pub coarsen_fields: u64,
    pub coarsen_slack: f64,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            seed: 0,
            tuples: 1000,
            holder_cases: 20,
            holder_slack: 1e-9,
            coarsen_n: 64,
            coarsen_k: vec![2, 4, 8],
            coarsen_s: 0.5,
            coarsen_p: 2.0,
            coarsen_q: 1.0,
            coarsen_fields: 3,
            coarsen_slack: DEFAULT_SLACK,
        }
    }
}

impl Config {
    pub fn quick() -> Self {
        Config { coarsen_n: 32, coarsen_fields: 2, ..Self::default() }
    }
}

/// `t^p ∧ t^q`.
fn cap(t: f64, p: f64, q: f64) -> f64 {
    pow(t, p).min(pow(t, q))
}

/// Both sides of `(Σ a)^p ∧ (Σ a)^q ≤ max_i (ℓ a_i)^p ∧ (ℓ a_i)^q`.
pub fn sum_power_sides(a: &[f64], p: f64, q: f64) -> (f64, f64) {
    let l = a.len() as f64;
    let lhs = cap(a.iter().sum(), p, q);
    let rhs = a.iter().map(|&x| cap(l * x, p, q)).fold(0.0, f64::max);
    (lhs, rhs)
}

/// Sides of the measure-Hölder bound for pointwise distances `d` with cell weight `w`:
/// `(Σ d/(1+d) w, (Σ d^p ∧ d^q w)^{1/p ∧ 1})`; the constant is `μ(Ω)^{(1−1/p)₊}`.
pub fn measure_holder_sides(d: &[f64], w: f64, p: f64, q: f64) -> (f64, f64) {
    let lhs = csum(d.iter().map(|&t| t / (1.0 + t))) * w;
    let inner = csum(d.iter().map(|&t| cap(t, p, q))) * w;
    (lhs, inner.powf((1.0 / p).min(1.0)))
}

/// `μ(Ω)^{(1 − 1/p)₊}`.
pub fn measure_holder_constant(measure: f64, p: f64) -> f64 {
    measure.powf((1.0 - 1.0 / p).max(0.0))
}

/// `m^{(m+sp)/2} / k^{sp}`.
pub fn coarsening_constant(m: usize, k: usize, s: f64, p: f64) -> f64 {
    (m as f64).powf((m as f64 + s * p) / 2.0) / (k as f64).powf(s * p)
}

/// Cellwise-constant approximation on `k^m` cells: each cell takes the value of
/// its sample minimizing the mean kernel `d^p ∧ d^q` to the other samples of the cell.
pub fn coarsen(f: &[f64], dom: &GridDomain, k: usize, p: f64, q: f64) -> Result<Vec<f64>> {
    let n = dom.n();
    if k == 0 || n % k != 0 {
        return Err(Error::InvalidParameter(format!("cell count {k} must divide n = {n}")));
    }
    let w = n / k;
    let m = dom.dim();
    let cells = k.pow(m as u32);
    let members = |c: usize| -> Vec<usize> {
        let (c0, c1) = (c % k, c / k);
        let r1 = if m == 2 { c1 * w..(c1 + 1) * w } else { 0..1 };
        r1.flat_map(|b| (c0 * w..(c0 + 1) * w).map(move |a| dom.flat_index([a, b]))).collect()
    };
    let choice: Vec<(Vec<usize>, f64)> = (0..cells)
        .into_par_iter()
        .map(|c| {
            let idx = members(c);
            let mut best = (f64::INFINITY, 0.0);
            for &x in &idx {
                let mean = csum(idx.iter().map(|&y| cap((f[y] - f[x]).abs(), p, q)));
                if mean < best.0 {
                    best = (mean, f[x]);
                }
            }
            (idx, best.1)
        })
        .collect();
    let mut out = vec![0.0; f.len()];
    for (idx, v) in choice {
        for i in idx {
            out[i] = v;
        }
    }
    Ok(out)
}

fn sum_power_cases(config: &Config, out: &mut SuiteOutput) {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed ^ (0x50A8 << 32));
    let mut worst: Option<(f64, f64, f64, f64)> = None;
    for _ in 0..config.tuples {
        let l = rng.random_range(1..=8);
        let a: Vec<f64> = (0..l).map(|_| rng.random_range(0.0..3.0)).collect();
        let (p, q) = (rng.random_range(0.05..4.0), rng.random_range(0.05..4.0));
        let (lhs, rhs) = sum_power_sides(&a, p, q);
        let score = if rhs > 0.0 { lhs / rhs } else { f64::INFINITY };
        if worst.is_none_or(|w| score > w.0 / w.1) {
            worst = Some((lhs, rhs, p, q));
        }
    }
    if let Some((lhs, rhs, p, q)) = worst {
        out.reports.push(RatioReport::exact(SUITE, "sum_power/worst_tuple", Exponents::new(f64::NAN, p, q), lhs, rhs));
    }
    let (lhs, rhs) = sum_power_sides(&[1.0, 1.0, 1.0], 2.0, 1.0);
    out.reports.push(RatioReport::exact(SUITE, "sum_power/ones3", Exponents::new(f64::NAN, 2.0, 1.0), lhs, rhs));
}

fn measure_holder_cases(config: &Config, out: &mut SuiteOutput) -> Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed ^ (0x40DE << 32));
    let family = FieldFamily::new(FamilyKind::Bumps, config.seed);
    for c in 0..config.holder_cases {
        let m = 1 + (c % 2) as usize;
        let side = rng.random_range(0.5..2.0);
        let p = rng.random_range(0.5..3.0);
        let q = rng.random_range(0.0..p);
        let dom = make_domain(DomainKind::Cube, m, if m == 1 { 128 } else { 24 }, side)?;
        let (f, g) = (Field::real(&dom, family.member(2 * c, m, side)), Field::real(&dom, family.member(2 * c + 1, m, side)));
        let (fv, gv) = (f.reals()?, g.reals()?);
        let d: Vec<f64> = fv.iter().zip(&gv).map(|(a, b)| (a - b).abs()).collect();
        let (lhs, rhs) = measure_holder_sides(&d, dom.weight(), p, q);
        out.reports.push(RatioReport::explicit(
            SUITE,
            format!("measure_holder/case{c:02}"),
            Exponents::new(f64::NAN, p, q),
            lhs,
            rhs,
            measure_holder_constant(dom.total_measure(), p),
            config.holder_slack,
        ));
    }
    Ok(())
}

fn coarsening_cases(config: &Config, out: &mut SuiteOutput) -> Result<()> {
    let (s, p, q) = (config.coarsen_s, config.coarsen_p, config.coarsen_q);
    if !(s > 0.0 && s < 1.0 && p >= 1.0 && q >= 0.0) {
        return Err(Error::ExponentOutOfRange(format!("coarsening needs 0 < s < 1, p ≥ 1, q ≥ 0 (s = {s}, p = {p}, q = {q})")));
    }
    let dom = make_domain(DomainKind::Cube, 2, config.coarsen_n, 1.0)?;
    let family = FieldFamily::new(FamilyKind::Trig, config.seed);
    let e = Exponents::new(s, p, q);
    for i in 0..config.coarsen_fields {
        // generated on a four times larger square so the field varies slowly on cells
        let field = Field::real(&dom, family.member(i, 2, 4.0));
        let f = field.reals()?;
        let energy = truncated(&field, s, p, q)?.value;
        let mut errors = Vec::new();
        for &k in &config.coarsen_k {
            let fk = coarsen(&f, &dom, k, p, q)?;
            let err = csum(f.iter().zip(&fk).map(|(a, b)| cap((a - b).abs(), p, q))) * dom.weight();
            out.reports.push(RatioReport::explicit(
                SUITE,
                format!("coarsen/k{k}/trig{i:02}"),
                e,
                err,
                energy,
                coarsening_constant(2, k, s, p),
                config.coarsen_slack,
            ));
            errors.push((k, err));
        }
        // doubling the cell count divides the error by at least 2^{sp}
        for w in errors.windows(2) {
            let ((k0, e0), (k1, e1)) = (w[0], w[1]);
            if k1 == 2 * k0 {
                out.reports.push(RatioReport::exact(SUITE, format!("coarsen/decay_k{k0}_k{k1}/trig{i:02}"), e, e1 * 2f64.powf(s * p), e0));
            }
        }
    }
    Ok(())
}

pub fn run(config: &Config) -> Result<SuiteOutput> {
    let mut out = SuiteOutput::new(SUITE);
    sum_power_cases(config, &mut out);
    measure_holder_cases(config, &mut out)?;
    coarsening_cases(config, &mut out)?;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sum_power_examples() {
        assert_eq!(sum_power_sides(&[1.0, 1.0, 1.0], 2.0, 1.0), (3.0, 3.0));
        let (l, r) = sum_power_sides(&[0.7], 1.5, 0.5);
        assert_eq!(l, r);
    }

    #[test]
    fn coarsening_constant_value() {
        // m = 2, sp = 1: 2^{3/2} / k
        assert!((coarsening_constant(2, 4, 0.5, 2.0) - 8f64.sqrt() / 4.0).abs() < 1e-15);
    }

    #[test]
    fn coarsen_is_exact_on_cellwise_constants() {
        let dom = make_domain(DomainKind::Cube, 2, 8, 1.0).unwrap();
        let f: Vec<f64> = (0..dom.len()).map(|i| (dom.multi_index(i)[0] / 4 + 2 * (dom.multi_index(i)[1] / 4)) as f64).collect();
        assert_eq!(coarsen(&f, &dom, 2, 2.0, 1.0).unwrap(), f);
        assert!(coarsen(&f, &dom, 3, 2.0, 1.0).is_err());
    }

    #[test]
    fn quick_run_passes() {
        let out = run(&Config::quick()).unwrap();
        assert!(out.all_pass(), "{:#?}", out.reports.iter().filter(|r| !r.pass).collect::<Vec<_>>());
    }
}
