//! Report bundle: CSV rows, JSON summary, field files, all written atomically.

use std::io::Write;
use std::path::{Path, PathBuf};

use liftlab_core::ineq_lab::RatioReport;
use liftlab_core::{DomainKind, Field, GridDomain, Point, TargetGeometry};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

/// Column order of the report CSV.
pub const CSV_HEADER: [&str; 11] = ["suite_id", "case_id", "s", "p", "q", "lhs", "rhs", "bound_constant", "ratio", "mode", "pass"];

/// Writes `bytes` to `path` through a temporary file in the same directory.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let dir = path.parent().filter(|d| !d.as_os_str().is_empty()).unwrap_or(Path::new("."));
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| CliError::io(dir, e))?;
    tmp.write_all(bytes).map_err(|e| CliError::io(tmp.path(), e))?;
    tmp.as_file().sync_all().map_err(|e| CliError::io(tmp.path(), e))?;
    tmp.persist(path).map_err(|e| CliError::io(path, e.error))?;
    Ok(())
}

fn num(x: f64) -> String {
    format!("{x}")
}

/// The report CSV with its fixed header.
pub fn reports_csv(reports: &[RatioReport]) -> Vec<u8> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(CSV_HEADER).expect("in-memory write");
    for r in reports {
        w.write_record([
            r.suite_id.clone(),
            r.case_id.clone(),
            num(r.s),
            num(r.p),
            num(r.q),
            num(r.lhs),
            num(r.rhs),
            num(r.bound_constant),
            num(r.ratio),
            r.mode.label().to_string(),
            r.pass.to_string(),
        ])
        .expect("in-memory write");
    }
    w.into_inner().expect("in-memory flush")
}

/// A named number; `None` stands for a non-finite value, which JSON cannot hold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Named {
    pub name: String,
    pub value: Option<f64>,
}

impl Named {
    pub fn new(name: impl Into<String>, value: f64) -> Self {
        Named { name: name.into(), value: value.is_finite().then_some(value) }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteSummary {
    pub suite_id: String,
    pub cases: usize,
    pub passed: usize,
    pub failed_cases: Vec<String>,
    pub constants: Vec<Named>,
    pub error: Option<ErrorSummary>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorSummary {
    pub kind: String,
    pub message: String,
    /// Grid cycle witnessing a holonomy obstruction.
    pub cycle: Option<Vec<usize>>,
}

impl ErrorSummary {
    pub fn from_error(e: &CliError) -> Self {
        let cycle = match e {
            CliError::Module(liftlab_core::Error::HolonomyObstruction { cycle, .. }) => Some(cycle.clone()),
            _ => None,
        };
        ErrorSummary { kind: e.kind().to_string(), message: e.to_string(), cycle }
    }
}

/// Machine-readable outcome of one job. Deterministic for a given configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub job: String,
    pub seed: u64,
    pub pass: bool,
    pub cases: usize,
    pub passed: usize,
    pub suites: Vec<SuiteSummary>,
    /// Job-specific results.
    pub values: Vec<Named>,
    pub error: Option<ErrorSummary>,
}

impl Summary {
    pub fn new(job: &str, seed: u64) -> Self {
        Summary { job: job.into(), seed, pass: true, cases: 0, passed: 0, suites: Vec::new(), values: Vec::new(), error: None }
    }

    pub fn push_value(&mut self, name: impl Into<String>, value: f64) {
        self.values.push(Named::new(name, value));
    }

    /// Recomputes the totals from the reports and errors.
    pub fn tally(&mut self, reports: &[RatioReport]) {
        self.cases = reports.len();
        self.passed = reports.iter().filter(|r| r.pass).count();
        self.pass = self.cases == self.passed && self.error.is_none() && self.suites.iter().all(|s| s.error.is_none());
    }

    pub fn to_json(&self) -> Vec<u8> {
        let mut v = serde_json::to_vec_pretty(self).expect("summary serializes");
        v.push(b'\n');
        v
    }
}

/// Wall-clock runtimes, kept apart from the summary so that it stays reproducible.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct Timings {
    pub total_seconds: f64,
    pub steps: Vec<(String, f64)>,
}

fn axis_names(dom: &GridDomain) -> Vec<String> {
    (0..dom.dim()).map(|a| format!("i{a}")).collect()
}

/// A field as CSV: grid index columns, then the value components.
pub fn field_csv(field: &Field) -> Vec<u8> {
    let dom = field.domain();
    let comps = field.space().dim();
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = axis_names(dom);
    header.extend((0..comps).map(|c| format!("v{c}")));
    w.write_record(&header).expect("in-memory write");
    for (i, v) in field.values().iter().enumerate() {
        let idx = dom.multi_index(i);
        let mut row: Vec<String> = idx[..dom.dim()].iter().map(|k| k.to_string()).collect();
        row.extend(v[..comps].iter().map(|&x| num(x)));
        w.write_record(&row).expect("in-memory write");
    }
    w.into_inner().expect("in-memory flush")
}

/// Reads a field written by [`field_csv`] onto a grid of the given kind and side.
pub fn read_field(path: &Path, kind: DomainKind, side: f64, space: TargetGeometry) -> Result<Field, CliError> {
    let bad = |message: String| CliError::FieldFormat { path: PathBuf::from(path), message };
    let mut r = csv::Reader::from_path(path).map_err(|e| match e.into_kind() {
        csv::ErrorKind::Io(io) => CliError::io(path, io),
        other => bad(format!("{other:?}")),
    })?;
    let header = r.headers().map_err(|e| bad(e.to_string()))?.clone();
    let m = header.iter().filter(|h| h.starts_with('i')).count();
    let comps = header.len() - m;
    if !(1..=2).contains(&m) || comps != space.dim() {
        return Err(bad(format!("expected 1 or 2 index columns and {} value columns", space.dim())));
    }
    let mut rows: Vec<([usize; 2], Point)> = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(|e| bad(e.to_string()))?;
        let mut idx = [0usize; 2];
        for (a, slot) in idx.iter_mut().enumerate().take(m) {
            *slot = rec[a].trim().parse().map_err(|_| bad(format!("bad index {:?}", &rec[a])))?;
        }
        let mut v = [0.0; 2];
        for c in 0..comps {
            v[c] = rec[m + c].trim().parse().map_err(|_| bad(format!("bad value {:?}", &rec[m + c])))?;
        }
        rows.push((idx, v));
    }
    let n = (rows.len() as f64).powf(1.0 / m as f64).round() as usize;
    let dom = liftlab_core::make_domain(kind, m, n, side)?;
    if dom.len() != rows.len() {
        return Err(bad(format!("{} rows do not form a {m}-dimensional grid", rows.len())));
    }
    let mut values = vec![[f64::NAN; 2]; dom.len()];
    for (idx, v) in rows {
        if idx[0] >= n || idx[1] >= n.max(1) || (m == 1 && idx[1] != 0) {
            return Err(bad(format!("index {idx:?} outside the grid")));
        }
        values[dom.flat_index(idx)] = v;
    }
    if values.iter().any(|v| v[0].is_nan()) {
        return Err(bad("repeated or missing grid indices".into()));
    }
    Ok(Field::new(dom, space, values)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use liftlab_core::ineq_lab::Exponents;

    #[test]
    fn csv_header_is_fixed() {
        let r = RatioReport::exact("x", "c", Exponents::none(), 1.0, 2.0);
        let text = String::from_utf8(reports_csv(&[r])).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), "suite_id,case_id,s,p,q,lhs,rhs,bound_constant,ratio,mode,pass");
        assert_eq!(lines.next().unwrap(), "x,c,NaN,NaN,NaN,1,2,1,0.5,EXACT,true");
    }

    #[test]
    fn summary_round_trips() {
        let mut s = Summary::new("verify", 3);
        s.push_value("a", 1.5);
        s.push_value("b", f64::NAN);
        s.suites.push(SuiteSummary {
            suite_id: "x".into(),
            cases: 2,
            passed: 1,
            failed_cases: vec!["c".into()],
            constants: vec![Named::new("k", 0.25)],
            error: Some(ErrorSummary { kind: "HolonomyObstruction".into(), message: "m".into(), cycle: Some(vec![0, 1]) }),
        });
        let back: Summary = serde_json::from_slice(&s.to_json()).unwrap();
        assert_eq!(back, s);
    }

    #[test]
    fn field_files_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let dom = liftlab_core::make_domain(DomainKind::Torus, 2, 5, 2.0).unwrap();
        let f = Field::from_fn(&dom, TargetGeometry::FlatTorus2([1.0, 1.0]), |x| [x[0] / 3.0, x[1] / 7.0]);
        let path = dir.path().join("f.csv");
        write_atomic(&path, &field_csv(&f)).unwrap();
        let g = read_field(&path, DomainKind::Torus, 2.0, f.space()).unwrap();
        assert_eq!(g, f);
        assert!(matches!(read_field(&path, DomainKind::Torus, 2.0, TargetGeometry::RealLine), Err(CliError::FieldFormat { .. })));
    }

    #[test]
    fn atomic_write_leaves_no_temporaries() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("sub").join("a.txt");
        write_atomic(&path, b"one").unwrap();
        write_atomic(&path, b"two").unwrap();
        assert_eq!(std::fs::read(&path).unwrap(), b"two");
        assert_eq!(std::fs::read_dir(path.parent().unwrap()).unwrap().count(), 1);
    }
}
