use std::path::PathBuf;

/// Failure of a command, mapped onto the process exit code.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("verification suite failed: {0}")]
    Suite(String),
    #[error("invalid input: {0:#}")]
    Input(anyhow::Error),
    #[error("condition check failed: {0}")]
    Condition(String),
    #[error("solver failed: {0}")]
    Solver(skorokhod_core::Error),
    #[error("cannot write {path}: {source}")]
    Output { path: PathBuf, source: std::io::Error },
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Suite(_) => 1,
            CliError::Input(_) => 2,
            CliError::Condition(_) => 3,
            CliError::Solver(_) => 4,
            // an unwritable output location is a problem with the arguments
            CliError::Output { .. } => 2,
        }
    }

    pub fn input(e: impl Into<anyhow::Error>) -> Self {
        CliError::Input(e.into())
    }
}

/// Core errors raised while solving are solver failures; everything else
/// the core rejects is bad input.
pub fn classify(e: skorokhod_core::Error) -> CliError {
    use skorokhod_core::Error as E;
    match e {
        E::NonConvergence { .. } | E::Diverged { .. } | E::CrossingStalled { .. } => CliError::Solver(e),
        other => CliError::Input(other.into()),
    }
}
