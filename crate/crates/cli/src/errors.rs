//! Error taxonomy mapped to exit codes: validation problems (bad arguments,
//! unreadable or malformed inputs) exit 2; failures inside a running stage
//! exit 3.

use std::fmt;

#[derive(Debug)]
pub enum CliError {
    /// Input or argument problems detected before/while loading inputs.
    Validation(String),
    /// A processing stage failed after its inputs validated.
    Stage { stage: &'static str, message: String },
}

impl CliError {
    pub fn stage(stage: &'static str, message: impl fmt::Display) -> Self {
        CliError::Stage {
            stage,
            message: message.to_string(),
        }
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Validation(_) => 2,
            CliError::Stage { .. } => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Validation(m) => write!(f, "{m}"),
            CliError::Stage { stage, message } => write!(f, "stage {stage} failed: {message}"),
        }
    }
}

impl std::error::Error for CliError {}

/// Validation-phase adapter: any error while reading/parsing inputs.
pub fn input_err(e: impl fmt::Display) -> CliError {
    CliError::Validation(e.to_string())
}

/// Stage-phase adapter bound to a stage name.
pub fn stage_err(stage: &'static str) -> impl Fn(uatpc::IoError) -> CliError {
    move |e| CliError::stage(stage, e)
}
