use serde::Serialize;

/// Failure of a job, split by exit code.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// Bad input: exit code 2.
    #[error("{0}")]
    Validation(String),
    /// Failure while computing or writing artifacts: exit code 3.
    #[error("{0}")]
    Computation(String),
}

#[derive(Serialize)]
struct ErrorBody<'a> {
    kind: &'a str,
    message: String,
    exit_code: i32,
}

#[derive(Serialize)]
struct ErrorJson<'a> {
    error: ErrorBody<'a>,
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 2,
            CliError::Computation(_) => 3,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Validation(_) => "validation",
            CliError::Computation(_) => "computation",
        }
    }

    /// `{"error": {"kind": ..., "message": ..., "exit_code": ...}}`
    pub fn to_json(&self) -> String {
        serde_json::to_string(&ErrorJson {
            error: ErrorBody {
                kind: self.kind(),
                message: self.to_string(),
                exit_code: self.exit_code(),
            },
        })
        .expect("error json")
    }
}

pub(crate) fn validation(e: impl std::fmt::Display) -> CliError {
    CliError::Validation(e.to_string())
}

pub(crate) fn computation(e: impl std::fmt::Display) -> CliError {
    CliError::Computation(e.to_string())
}
