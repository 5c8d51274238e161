use thiserror::Error;

/// Exit status for a schema or usage violation.
pub const EXIT_SCHEMA: i32 = 2;
/// Exit status for numerical non-convergence or a failed gate.
pub const EXIT_FAILED: i32 = 1;

#[derive(Debug, Error)]
pub enum CliError {
    /// The configuration does not match the schema.
    #[error("config: {0}")]
    Config(String),

    #[error(transparent)]
    Core(#[from] plapd_core::Error),

    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        use plapd_core::Error as E;
        match self {
            CliError::Config(_) => EXIT_SCHEMA,
            CliError::Core(E::InvalidParameter(_) | E::InvalidDomain(_) | E::InvalidInput(_) | E::Rejected(_)) => {
                EXIT_SCHEMA
            }
            CliError::Core(E::Format(_)) => EXIT_SCHEMA,
            CliError::Json(_) => EXIT_SCHEMA,
            CliError::Core(_) | CliError::Io(_) => EXIT_FAILED,
        }
    }
}
