use std::path::PathBuf;

use thiserror::Error;

/// Exit status for passing runs.
pub const EXIT_PASS: u8 = 0;
/// Exit status for failed checks, module errors and invalid configurations.
pub const EXIT_MATH: u8 = 2;
/// Exit status for I/O failures.
pub const EXIT_IO: u8 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("unknown or malformed config key `{0}`")]
    Schema(String),
    #[error("config value out of range for `{0}`")]
    Range(String),
    #[error("unknown suite `{0}`")]
    UnknownSuite(String),
    #[error(transparent)]
    Module(#[from] liftlab_core::Error),
    #[error("plot needs at least one series with two or more positive points")]
    EmptySeries,
    #[error("malformed field file {path}: {message}")]
    FieldFormat { path: PathBuf, message: String },
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

impl PartialEq for CliError {
    fn eq(&self, other: &Self) -> bool {
        use CliError::*;
        match (self, other) {
            (Parse { line: a, message: x }, Parse { line: b, message: y }) => a == b && x == y,
            (Schema(a), Schema(b)) | (Range(a), Range(b)) | (UnknownSuite(a), UnknownSuite(b)) => a == b,
            (Module(a), Module(b)) => a == b,
            (EmptySeries, EmptySeries) => true,
            (FieldFormat { path: a, message: x }, FieldFormat { path: b, message: y }) => a == b && x == y,
            (Io { path: a, source: x }, Io { path: b, source: y }) => a == b && x.kind() == y.kind(),
            _ => false,
        }
    }
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io { path: path.into(), source }
    }

    /// Stable name used in JSON summaries.
    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Parse { .. } => "ParseError",
            CliError::Schema(_) => "SchemaError",
            CliError::Range(_) => "RangeError",
            CliError::UnknownSuite(_) => "UnknownSuite",
            CliError::Module(e) => e.kind(),
            CliError::EmptySeries => "EmptySeries",
            CliError::FieldFormat { .. } => "FieldFormat",
            CliError::Io { .. } => "IoError",
        }
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Io { .. } => EXIT_IO,
            _ => EXIT_MATH,
        }
    }
}
