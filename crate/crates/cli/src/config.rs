//! Experiment configuration: TOML text to a validated [`ExperimentConfig`].

use std::path::PathBuf;

use liftlab_core::ineq_lab::LabConfig;
use liftlab_core::{CoveringChart, DomainKind};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

/// Job kinds, one per subcommand.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum JobKind {
    Energy,
    Lift,
    Decompose,
    Verify,
    Counterexample,
}

impl JobKind {
    pub fn name(self) -> &'static str {
        match self {
            JobKind::Energy => "energy",
            JobKind::Lift => "lift",
            JobKind::Decompose => "decompose",
            JobKind::Verify => "verify",
            JobKind::Counterexample => "counterexample",
        }
    }
}

/// Suite resolutions: the full defaults or the reduced smoke-test set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Profile {
    #[default]
    Full,
    Quick,
}

/// Energies computable by the `energy` job.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EnergyKind {
    #[default]
    Gagliardo,
    Truncated,
    Dirichlet,
    Phi,
}

/// Field generators. `Loop` is a pure winding; the others are seeded families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FamilySpec {
    #[default]
    Trig,
    Ramp,
    Steps,
    RampSteps,
    Bumps,
    Winding,
    Power,
    Constant,
    Linear,
    Sine,
    Loop,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DomainSpec {
    pub kind: DomainKind,
    pub dim: usize,
    pub side: f64,
}

impl Default for DomainSpec {
    fn default() -> Self {
        DomainSpec { kind: DomainKind::Interval, dim: 1, side: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FieldSpec {
    pub family: FamilySpec,
    /// Member of the seeded family.
    pub index: u64,
    pub amplitude: f64,
    /// Turns of the phase along the first axis (angle-valued fields only).
    pub winding: i64,
    /// Field CSV to read instead of generating one.
    pub input: Option<PathBuf>,
}

impl Default for FieldSpec {
    fn default() -> Self {
        FieldSpec { family: FamilySpec::default(), index: 0, amplitude: 1.0, winding: 0, input: None }
    }
}

/// A validated experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub job: Option<JobKind>,
    /// Suite id or `all`; `verify` only.
    pub suite: String,
    pub profile: Profile,
    pub seed: u64,
    /// Grid points per axis for field jobs.
    pub n: usize,
    /// Further resolutions at which the `energy` job is repeated.
    pub ladder: Vec<usize>,
    /// Slack of quadrature-backed explicit constants.
    pub slack: f64,
    pub covering: String,
    pub out: PathBuf,
    pub threads: Option<usize>,
    pub energy: EnergyKind,
    pub s: f64,
    pub p: f64,
    pub q: f64,
    pub domain: DomainSpec,
    pub field: FieldSpec,
    /// Per-suite overrides on top of `profile`.
    pub suites: toml::Table,
}

pub const DEFAULT_N: usize = 256;
pub const DEFAULT_SLACK: f64 = 0.05;

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            job: None,
            suite: "all".into(),
            profile: Profile::Full,
            seed: 0,
            n: DEFAULT_N,
            ladder: Vec::new(),
            slack: DEFAULT_SLACK,
            covering: "r-over-s1".into(),
            out: PathBuf::from("out"),
            threads: None,
            energy: EnergyKind::Gagliardo,
            s: 0.5,
            p: 2.0,
            q: 1.0,
            domain: DomainSpec::default(),
            field: FieldSpec::default(),
            suites: toml::Table::new(),
        }
    }
}

/// 1-based line of a byte offset.
fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}

/// The key assigned on the given line, if the line is an assignment.
fn key_on_line(text: &str, line: usize) -> Option<String> {
    let l = text.lines().nth(line - 1)?;
    let (key, _) = l.split_once('=')?;
    Some(key.trim().trim_matches('"').rsplit('.').next()?.to_string())
}

fn backticked(message: &str, after: &str) -> Option<String> {
    let rest = &message[message.find(after)? + after.len()..];
    let start = rest.find('`')? + 1;
    let len = rest[start..].find('`')?;
    Some(rest[start..start + len].to_string())
}

fn classify(text: &str, err: toml::de::Error) -> CliError {
    let message = err.message().to_string();
    let line = err.span().map(|s| line_of(text, s.start));
    if let Some(key) = backticked(&message, "unknown field") {
        return CliError::Schema(key);
    }
    if let Some(key) = backticked(&message, "missing field") {
        return CliError::Schema(key);
    }
    if message.contains("unknown variant") || message.contains("invalid type") {
        if let Some(key) = line.and_then(|l| key_on_line(text, l)) {
            return CliError::Schema(key);
        }
    }
    CliError::Parse { line: line.unwrap_or(0), message: message.trim().to_string() }
}

/// Parses and validates configuration text.
pub fn parse_config(text: &str) -> Result<ExperimentConfig, CliError> {
    // syntax first, so that malformed TOML is reported as such
    text.parse::<toml::Table>().map_err(|e| CliError::Parse {
        line: e.span().map_or(0, |s| line_of(text, s.start)),
        message: e.message().trim().to_string(),
    })?;
    let config: ExperimentConfig = toml::from_str(text).map_err(|e| classify(text, e))?;
    config.validate()?;
    Ok(config)
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<(), CliError> {
        let range = |ok: bool, key: &str| if ok { Ok(()) } else { Err(CliError::Range(key.to_string())) };
        range(self.s > 0.0 && self.s < 1.0, "s")?;
        range(self.p >= 1.0 && self.p.is_finite(), "p")?;
        range(self.q >= 0.0 && self.q.is_finite(), "q")?;
        range(self.n >= 2, "n")?;
        range(self.ladder.iter().all(|&k| k >= 2), "ladder")?;
        range(self.slack >= 0.0 && self.slack.is_finite(), "slack")?;
        range(self.threads != Some(0), "threads")?;
        range((1..=2).contains(&self.domain.dim), "dim")?;
        range(self.domain.kind != DomainKind::Interval || self.domain.dim == 1, "dim")?;
        range(self.domain.side > 0.0 && self.domain.side.is_finite(), "side")?;
        range(self.field.amplitude.is_finite(), "amplitude")?;
        self.covering.parse::<CoveringChart>().map_err(|_| CliError::Range("covering".into()))?;
        Ok(())
    }

    /// Suite configuration: the profile defaults overlaid with `[suites]`, then
    /// the global seed and slack.
    pub fn lab_config(&self) -> Result<LabConfig, CliError> {
        let base = match self.profile {
            Profile::Full => LabConfig::default(),
            Profile::Quick => LabConfig::quick(),
        };
        let mut lab = if self.suites.is_empty() {
            base
        } else {
            let mut table = toml::Table::try_from(&base).map_err(|e| CliError::Parse { line: 0, message: e.to_string() })?;
            merge(&mut table, &self.suites);
            let text = toml::to_string(&table).map_err(|e| CliError::Parse { line: 0, message: e.to_string() })?;
            toml::from_str(&text).map_err(|e| classify(&text, e))?
        };
        lab.set_seed(self.seed);
        lab.fractional_integration.slack = self.slack;
        lab.gap_scaling.slack = self.slack;
        lab.large_scale.integration_slack = self.slack;
        lab.small_lemmas.coarsen_slack = self.slack;
        Ok(lab)
    }
}

fn merge(into: &mut toml::Table, from: &toml::Table) {
    for (k, v) in from {
        match (into.get_mut(k), v) {
            (Some(toml::Value::Table(a)), toml::Value::Table(b)) => merge(a, b),
            _ => {
                into.insert(k.clone(), v.clone());
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_energy_job_takes_defaults() {
        let c = parse_config("job = \"energy\"\n").unwrap();
        assert_eq!(c.job, Some(JobKind::Energy));
        assert_eq!(c.n, 256);
        assert_eq!(c.slack, 0.05);
    }

    #[test]
    fn out_of_range_s() {
        assert_eq!(parse_config("job = \"energy\"\ns = 1.5\n").unwrap_err(), CliError::Range("s".into()));
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert_eq!(parse_config("foo = 1\n").unwrap_err(), CliError::Schema("foo".into()));
        assert_eq!(parse_config("[domain]\nbar = 2\n").unwrap_err(), CliError::Schema("bar".into()));
    }

    #[test]
    fn syntax_errors_carry_a_line() {
        match parse_config("n = 4\ns = = 2\n").unwrap_err() {
            CliError::Parse { line, .. } => assert_eq!(line, 2),
            e => panic!("{e:?}"),
        }
    }

    #[test]
    fn bad_variant_names_its_key() {
        assert_eq!(parse_config("energy = \"nope\"\n").unwrap_err(), CliError::Schema("energy".into()));
    }

    #[test]
    fn suite_overrides_merge_onto_profile() {
        let c = parse_config("profile = \"quick\"\n[suites.sum_space]\nfields = 2\n").unwrap();
        let lab = c.lab_config().unwrap();
        assert_eq!(lab.sum_space.fields, 2);
        assert_eq!(lab.sum_space.n, LabConfig::quick().sum_space.n);
        let bad = parse_config("[suites.sum_space]\nwidgets = 2\n").unwrap();
        assert_eq!(bad.lab_config().unwrap_err(), CliError::Schema("widgets".into()));
    }
}
