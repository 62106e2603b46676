use std::fmt;

use serde::Serialize;

/// Failure of a pipeline, grouped by exit status.
#[derive(Debug, Clone, PartialEq)]
pub enum CliError {
    /// Malformed or inconsistent configuration (exit 2).
    Schema(String),
    /// Parameters outside the window of the requested method (exit 3).
    Regime(String),
    /// A numerical limit did not settle (exit 4).
    Convergence(String),
    /// Reading or writing an artifact failed (exit 1).
    Io(String),
}

#[derive(Serialize)]
struct ErrorObject<'a> {
    schema: &'static str,
    error: ErrorBody<'a>,
}

#[derive(Serialize)]
struct ErrorBody<'a> {
    kind: &'static str,
    code: i32,
    message: &'a str,
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Schema(_) => 2,
            CliError::Regime(_) => 3,
            CliError::Convergence(_) => 4,
            CliError::Io(_) => 1,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Schema(_) => "schema",
            CliError::Regime(_) => "regime",
            CliError::Convergence(_) => "convergence",
            CliError::Io(_) => "io",
        }
    }

    pub fn message(&self) -> &str {
        match self {
            CliError::Schema(m) | CliError::Regime(m) | CliError::Convergence(m) | CliError::Io(m) => m,
        }
    }

    /// One-line JSON object describing the failure.
    pub fn to_json(&self) -> String {
        let obj = ErrorObject {
            schema: crate::SCHEMA,
            error: ErrorBody { kind: self.kind(), code: self.exit_code(), message: self.message() },
        };
        serde_json::to_string(&obj).expect("error object serialises")
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} error: {}", self.kind(), self.message())
    }
}

impl std::error::Error for CliError {}

impl From<rloc_core::Error> for CliError {
    fn from(e: rloc_core::Error) -> Self {
        use rloc_core::Error as E;
        let m = e.to_string();
        match e {
            E::Regime(_) | E::YoungCondition { .. } => CliError::Regime(m),
            E::Convergence { .. } => CliError::Convergence(m),
            E::Domain(_) | E::Shape(_) | E::CommonJump { .. } | E::IndexMismatch => CliError::Schema(m),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}
