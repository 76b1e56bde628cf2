use std::fmt;
use std::process::ExitCode;

use noonforge_core::analysis::AnalysisError;
use noonforge_core::fock::FockError;
use noonforge_core::io::IoError;
use noonforge_core::measurement::MeasurementError;
use noonforge_core::optics::OpticsError;
use noonforge_core::synth::SynthError;
use serde::Serialize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ErrorKind {
    /// Bad arguments, configs or input files.
    Validation,
    /// Well-formed input on which the numerics fail.
    Numerical,
}

impl ErrorKind {
    pub fn exit_code(self) -> ExitCode {
        match self {
            ErrorKind::Validation => ExitCode::from(2),
            ErrorKind::Numerical => ExitCode::from(3),
        }
    }
}

#[derive(Debug)]
pub struct CliError {
    pub kind: ErrorKind,
    pub error: anyhow::Error,
}

impl CliError {
    pub fn validation(error: impl Into<anyhow::Error>) -> Self {
        CliError { kind: ErrorKind::Validation, error: error.into() }
    }

    pub fn numerical(error: impl Into<anyhow::Error>) -> Self {
        CliError { kind: ErrorKind::Numerical, error: error.into() }
    }

    /// One JSON object on stderr so scripts can branch on the kind.
    pub fn to_json(&self) -> String {
        #[derive(Serialize)]
        struct Report<'a> {
            error: ErrorKind,
            message: &'a str,
        }
        let message = format!("{:#}", self.error);
        serde_json::to_string(&Report { error: self.kind, message: &message }).expect("plain strings serialize")
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:#}", self.error)
    }
}

impl From<AnalysisError> for CliError {
    fn from(e: AnalysisError) -> Self {
        if e.is_numerical() {
            CliError::numerical(e)
        } else {
            CliError::validation(e)
        }
    }
}

macro_rules! validation_from {
    ($($t:ty),*) => {
        $(impl From<$t> for CliError {
            fn from(e: $t) -> Self {
                CliError::validation(e)
            }
        })*
    };
}

validation_from!(
    SynthError,
    FockError,
    IoError,
    MeasurementError,
    OpticsError,
    serde_json::Error,
    std::io::Error,
    anyhow::Error
);

pub type CliResult<T> = Result<T, CliError>;
