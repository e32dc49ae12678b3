//! Job execution: builds fields, calls the core operations, collects a [`Bundle`].

use std::f64::consts::TAU;
use std::path::Path;
use std::time::Instant;

use liftlab_core::decompose::{split_sum_space, sum_membership_functional, sum_objective};
use liftlab_core::energy::{dirichlet, gagliardo, truncated};
use liftlab_core::ineq_lab::families::{FamilyKind, FieldFamily};
use liftlab_core::ineq_lab::{run_suite, Exponents, RatioReport, Series, SUITE_IDS};
use liftlab_core::lifting::{chain_rule_residual, lift_field, winding};
use liftlab_core::{make_domain, CoveringChart, Field, GridDomain, TargetGeometry};

use crate::config::{EnergyKind, ExperimentConfig, FamilySpec, JobKind};
use crate::error::CliError;
use crate::output::{field_csv, read_field, reports_csv, write_atomic, ErrorSummary, Named, SuiteSummary, Summary, Timings};
use crate::plot::{emit_plot, plottable};

/// Everything a job produces.
#[derive(Debug, Clone)]
pub struct Bundle {
    pub reports: Vec<RatioReport>,
    pub summary: Summary,
    /// File stem and series of each plot.
    pub plots: Vec<(String, Vec<Series>)>,
    /// File stem and contents of each field file.
    pub fields: Vec<(String, Field)>,
    pub timings: Timings,
}

impl Bundle {
    fn new(job: JobKind, seed: u64) -> Self {
        Bundle { reports: Vec::new(), summary: Summary::new(job.name(), seed), plots: Vec::new(), fields: Vec::new(), timings: Timings::default() }
    }

    /// Writes `report.csv`, `summary.json`, `timings.json`, `plots/*.svg` and `fields/*.csv` under `dir`.
    pub fn write(&self, dir: &Path) -> Result<(), CliError> {
        write_atomic(&dir.join("report.csv"), &reports_csv(&self.reports))?;
        write_atomic(&dir.join("summary.json"), &self.summary.to_json())?;
        let mut timings = serde_json::to_vec_pretty(&self.timings).expect("timings serialize");
        timings.push(b'\n');
        write_atomic(&dir.join("timings.json"), &timings)?;
        for (stem, series) in &self.plots {
            emit_plot(stem, series, &dir.join("plots").join(format!("{stem}.svg")))?;
        }
        for (stem, field) in &self.fields {
            write_atomic(&dir.join("fields").join(format!("{stem}.csv")), &field_csv(field))?;
        }
        Ok(())
    }

    pub fn exit_code(&self) -> u8 {
        if self.summary.pass {
            crate::error::EXIT_PASS
        } else {
            crate::error::EXIT_MATH
        }
    }
}

fn domain(config: &ExperimentConfig, n: usize) -> Result<GridDomain, CliError> {
    let d = &config.domain;
    Ok(make_domain(d.kind, d.dim, n, d.side)?)
}

fn family_kind(f: FamilySpec) -> Option<FamilyKind> {
    Some(match f {
        FamilySpec::Trig => FamilyKind::Trig,
        FamilySpec::Ramp => FamilyKind::Ramp,
        FamilySpec::Steps => FamilyKind::Steps,
        FamilySpec::RampSteps => FamilyKind::RampSteps,
        FamilySpec::Bumps => FamilyKind::Bumps,
        FamilySpec::Winding => FamilyKind::Winding,
        FamilySpec::Power => FamilyKind::Power,
        FamilySpec::Constant | FamilySpec::Linear | FamilySpec::Sine | FamilySpec::Loop => return None,
    })
}

/// Scalar profile of the configured field family, member `offset` past the configured index.
fn profile(config: &ExperimentConfig, offset: u64) -> Box<dyn Fn([f64; 2]) -> f64 + Send + Sync> {
    let (a, side, m) = (config.field.amplitude, config.domain.side, config.domain.dim);
    match config.field.family {
        FamilySpec::Constant => Box::new(move |_| a),
        FamilySpec::Linear => Box::new(move |x| a * x[0]),
        FamilySpec::Sine => Box::new(move |x| a * (TAU * x[0] / side).sin()),
        FamilySpec::Loop => Box::new(|_| 0.0),
        kind => {
            let f = FieldFamily::new(family_kind(kind).expect("seeded family"), config.seed).member(config.field.index + offset, m, side);
            Box::new(move |x| a * f(x))
        }
    }
}

/// Real-valued field; `loop` gives the unwrapped winding phase.
pub fn real_field(config: &ExperimentConfig, n: usize) -> Result<Field, CliError> {
    if let Some(path) = &config.field.input {
        return read_field(path, config.domain.kind, config.domain.side, TargetGeometry::RealLine);
    }
    let dom = domain(config, n)?;
    let f = profile(config, 0);
    let turns = TAU * config.field.winding as f64 / config.domain.side;
    Ok(match config.field.family {
        FamilySpec::Loop => Field::real(&dom, move |x| turns * x[0]),
        _ => Field::real(&dom, f),
    })
}

/// Field with values in the base of `cov`: the family profile plus `winding` turns per axis.
pub fn base_field(config: &ExperimentConfig, cov: &CoveringChart, n: usize) -> Result<Field, CliError> {
    let base = cov.base();
    if let Some(path) = &config.field.input {
        return read_field(path, config.domain.kind, config.domain.side, base);
    }
    let dom = domain(config, n)?;
    let (f, g) = (profile(config, 0), profile(config, 1));
    let turns = TAU * config.field.winding as f64 / config.domain.side;
    Ok(Field::from_fn(&dom, base, move |x| base.canonical(&[f(x) + turns * x[0], g(x) + turns * x[1]])))
}

fn energy_of(config: &ExperimentConfig, f: &Field) -> Result<(f64, u64), CliError> {
    let (s, p, q) = (config.s, config.p, config.q);
    let e = match config.energy {
        EnergyKind::Gagliardo => gagliardo(f, s, p)?,
        EnergyKind::Truncated => truncated(f, s, p, q)?,
        EnergyKind::Dirichlet => dirichlet(f, p)?,
        EnergyKind::Phi => liftlab_core::decompose::phi_energy(f, s, p)?,
    };
    Ok((e.value, e.pair_count))
}

fn energy_job(config: &ExperimentConfig, b: &mut Bundle) -> Result<(), CliError> {
    let base = real_field(config, config.n)?;
    let (value, pairs) = energy_of(config, &base)?;
    b.summary.push_value("value", value);
    b.summary.push_value("pair_count", pairs as f64);
    b.summary.push_value("n", base.domain().n() as f64);
    let mut series = vec![(base.domain().n() as f64, value)];
    if config.field.input.is_none() {
        for &n in &config.ladder {
            let (v, _) = energy_of(config, &real_field(config, n)?)?;
            b.summary.push_value(format!("value/n{n}"), v);
            series.push((n as f64, v));
        }
    }
    let energy = format!("{:?}", config.energy).to_lowercase();
    let plot = plottable(&[Series { name: format!("{energy} energy against n"), points: series }]);
    if !plot.is_empty() {
        b.plots.push(("energy".into(), plot));
    }
    b.fields.push(("field".into(), base));
    Ok(())
}

fn lift_job(config: &ExperimentConfig, b: &mut Bundle) -> Result<(), CliError> {
    let cov: CoveringChart = config.covering.parse()?;
    let u = base_field(config, &cov, config.n)?;
    b.fields.push(("base".into(), u.clone()));
    if u.domain().dim() == 1 {
        if let TargetGeometry::Circle(_) = cov.base() {
            if let Ok(k) = winding(u.values(), cov.base()) {
                b.summary.push_value("winding", k as f64);
            }
        }
    }
    let lift = lift_field(&u, &cov, 0, &u.value(0))?;
    let residual = chain_rule_residual(&u, &lift.lifted, &cov)?;
    b.summary.push_value("max_holonomy_residual", lift.max_holonomy_residual);
    b.summary.push_value("chain_rule_residual", residual);
    b.reports.push(RatioReport::exact("lift", "chain_rule_residual", Exponents::none(), residual, 0.0));
    b.fields.push(("lifted".into(), lift.lifted));
    Ok(())
}

fn decompose_job(config: &ExperimentConfig, b: &mut Bundle) -> Result<(), CliError> {
    let (s, p, q) = (config.s, config.p, config.q);
    let f = real_field(config, config.n)?;
    let split = split_sum_space(&f, s, p)?;
    let zero = Field::from_reals(f.domain(), &vec![0.0; f.len()])?;
    let (all_g, all_h) = (sum_objective(&f, &zero, s, p)?, sum_objective(&zero, &f, s, p)?);
    let (fv, gv, hv) = (f.reals()?, split.g.reals()?, split.h.reals()?);
    let defect = fv.iter().zip(&gv).zip(&hv).map(|((a, g), h)| (g + h - a).abs()).fold(0.0, f64::max);
    let e = Exponents::new(s, p, q);
    b.summary.push_value("objective", split.objective);
    b.summary.push_value("all_fractional", all_g);
    b.summary.push_value("all_first_order", all_h);
    b.summary.push_value("scale_chosen", split.scale_chosen);
    b.summary.push_value("refine_iterations", split.refine_iterations as f64);
    if q > 0.0 && q < s * p {
        b.summary.push_value("membership", sum_membership_functional(&f, s, p, q)?);
    }
    b.reports.push(RatioReport::exact("decompose", "vs_all_fractional", e, split.objective, all_g));
    b.reports.push(RatioReport::exact("decompose", "vs_all_first_order", e, split.objective, all_h));
    b.reports.push(RatioReport::exact("decompose", "reassembly_defect", e, defect, 0.0));
    b.fields.push(("g".into(), split.g));
    b.fields.push(("h".into(), split.h));
    Ok(())
}

fn verify_job(config: &ExperimentConfig, suite: &str, b: &mut Bundle) -> Result<(), CliError> {
    let ids: Vec<&str> = if suite == "all" {
        SUITE_IDS.to_vec()
    } else if SUITE_IDS.contains(&suite) {
        vec![suite]
    } else {
        return Err(CliError::UnknownSuite(suite.to_string()));
    };
    let lab = config.lab_config()?;
    for id in ids {
        let start = Instant::now();
        let result = run_suite(id, &lab).expect("known suite id");
        b.timings.steps.push((id.to_string(), start.elapsed().as_secs_f64()));
        let summary = match result {
            Ok(out) => {
                let plot = plottable(&out.series);
                if !plot.is_empty() {
                    b.plots.push((id.to_string(), plot));
                }
                let s = SuiteSummary {
                    suite_id: id.to_string(),
                    cases: out.reports.len(),
                    passed: out.reports.iter().filter(|r| r.pass).count(),
                    failed_cases: out.reports.iter().filter(|r| !r.pass).map(|r| r.case_id.clone()).collect(),
                    constants: out.constants.iter().map(|(n, v)| Named::new(n.clone(), *v)).collect(),
                    error: None,
                };
                b.reports.extend(out.reports);
                s
            }
            Err(e) => SuiteSummary {
                suite_id: id.to_string(),
                cases: 0,
                passed: 0,
                failed_cases: Vec::new(),
                constants: Vec::new(),
                error: Some(ErrorSummary::from_error(&CliError::Module(e))),
            },
        };
        b.summary.suites.push(summary);
    }
    Ok(())
}

/// Runs one job. Module errors are recorded in the summary rather than returned.
pub fn run_job(job: JobKind, config: &ExperimentConfig) -> Bundle {
    let start = Instant::now();
    let mut b = Bundle::new(job, config.seed);
    let result = match job {
        JobKind::Energy => energy_job(config, &mut b),
        JobKind::Lift => lift_job(config, &mut b),
        JobKind::Decompose => decompose_job(config, &mut b),
        JobKind::Verify => verify_job(config, &config.suite, &mut b),
        JobKind::Counterexample => verify_job(config, "counterexample", &mut b),
    };
    if let Err(e) = result {
        b.summary.error = Some(ErrorSummary::from_error(&e));
    }
    b.summary.tally(&b.reports);
    b.timings.total_seconds = start.elapsed().as_secs_f64();
    b
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::parse_config;

    #[test]
    fn constant_field_has_zero_energy() {
        let c = parse_config("job = \"energy\"\nn = 32\n[field]\nfamily = \"constant\"\namplitude = 3.0\n").unwrap();
        let b = run_job(JobKind::Energy, &c);
        assert!(b.summary.pass);
        assert_eq!(b.summary.values[0], Named::new("value", 0.0));
    }

    #[test]
    fn torus_loop_is_obstructed() {
        let c = parse_config("n = 64\n[domain]\nkind = \"torus\"\n[field]\nfamily = \"loop\"\nwinding = 1\n").unwrap();
        let b = run_job(JobKind::Lift, &c);
        assert_eq!(b.exit_code(), 2);
        let err = b.summary.error.unwrap();
        assert_eq!(err.kind, "HolonomyObstruction");
        assert!(err.cycle.is_some_and(|c| c.len() >= 2));
    }

    #[test]
    fn interval_loop_lifts_with_its_winding() {
        let c = parse_config("n = 128\ncovering = \"kfold:3\"\n[field]\nfamily = \"loop\"\nwinding = -2\n").unwrap();
        let b = run_job(JobKind::Lift, &c);
        assert!(b.summary.pass, "{:?}", b.summary);
        assert!(b.summary.values.contains(&Named::new("winding", -2.0)));
    }

    #[test]
    fn unknown_suite_is_an_error() {
        let c = parse_config("suite = \"nope\"\n").unwrap();
        let b = run_job(JobKind::Verify, &c);
        assert_eq!(b.summary.error.unwrap().kind, "UnknownSuite");
    }

    #[test]
    fn decompose_beats_trivial_splits() {
        let c = parse_config("n = 32\ns = 0.75\np = 2.0\n[field]\nfamily = \"bumps\"\n").unwrap();
        let b = run_job(JobKind::Decompose, &c);
        assert!(b.summary.pass, "{:?}", b.reports);
        assert_eq!(b.fields.len(), 2);
    }
}
