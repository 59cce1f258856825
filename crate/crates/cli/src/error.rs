use std::path::PathBuf;

use quasi_sierpinski::{ConfigIssue, Error as CoreError};
use serde_json::{json, Value};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_SOLVER: i32 = 3;
pub const EXIT_VERIFICATION: i32 = 4;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error("invalid configuration: {}", join_issues(.0))]
    Validation(Vec<ConfigIssue>),

    #[error("non-compressive support displacement at supports {0:?}; pass --allow-nonnegative-delta to continue")]
    NonCompressive(Vec<usize>),

    #[error("{0}")]
    Core(CoreError),

    #[error("solver failure: {0}")]
    Solver(CoreError),

    #[error("verification failed: {0}")]
    Verification(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {message}")]
    Parse { path: PathBuf, message: String },
}

fn join_issues(issues: &[ConfigIssue]) -> String {
    issues.iter().map(ToString::to_string).collect::<Vec<_>>().join("; ")
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::Validation(v) => CliError::Validation(v.issues),
            CoreError::NonCompressive { supports } => CliError::NonCompressive(supports),
            CoreError::Assembly(_) | CoreError::Factorization { .. } => CliError::Solver(e),
            other => CliError::Core(other),
        }
    }
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Validation(_)
            | CliError::NonCompressive(_)
            | CliError::Core(_)
            | CliError::Io { .. }
            | CliError::Parse { .. } => EXIT_VALIDATION,
            CliError::Solver(_) => EXIT_SOLVER,
            CliError::Verification(_) => EXIT_VERIFICATION,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Usage(_) => "usage",
            CliError::Validation(_) => "validation",
            CliError::NonCompressive(_) => "non_compressive",
            CliError::Core(_) => "domain",
            CliError::Solver(_) => "solver",
            CliError::Verification(_) => "verification",
            CliError::Io { .. } => "io",
            CliError::Parse { .. } => "parse",
        }
    }

    /// One-line machine-readable record for stderr.
    pub fn to_json(&self) -> Value {
        let mut v = json!({
            "code": self.exit_code(),
            "kind": self.kind(),
            "message": self.to_string(),
        });
        match self {
            CliError::Validation(issues) => {
                v["issues"] = issues
                    .iter()
                    .map(|i| json!({"field": i.field, "message": i.message}))
                    .collect();
            }
            CliError::NonCompressive(supports) => v["supports"] = json!(supports),
            _ => {}
        }
        v
    }
}
