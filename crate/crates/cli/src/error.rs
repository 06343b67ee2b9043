//! CLI error taxonomy mapped onto process exit codes.

use thiserror::Error;

/// Exit codes: 0 ok, 1 validation, 2 numerical failure, 3 audit failure.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Validation(String),
    #[error("{0}")]
    Numerical(String),
    #[error("oracle audit failed: {0}")]
    Audit(String),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 1,
            CliError::Numerical(_) => 2,
            CliError::Audit(_) => 3,
            // treat filesystem trouble as a validation-level failure
            CliError::Io { .. } => 1,
        }
    }

    pub fn validation(msg: impl Into<String>) -> Self {
        CliError::Validation(msg.into())
    }

    pub fn numerical(msg: impl Into<String>) -> Self {
        CliError::Numerical(msg.into())
    }

    pub fn io(path: impl Into<String>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }
}

impl From<spdc_sim::fock::FockError> for CliError {
    fn from(e: spdc_sim::fock::FockError) -> Self {
        CliError::Validation(e.to_string())
    }
}

impl From<spdc_sim::hamiltonian::HamiltonianError> for CliError {
    fn from(e: spdc_sim::hamiltonian::HamiltonianError) -> Self {
        CliError::Validation(e.to_string())
    }
}

impl From<spdc_sim::dynamics::DynamicsError> for CliError {
    fn from(e: spdc_sim::dynamics::DynamicsError) -> Self {
        use spdc_sim::dynamics::DynamicsError as D;
        match &e {
            D::Fock(_)
            | D::Hamiltonian(_)
            | D::BadSampleGrid
            | D::BadTolerances
            | D::SpaceMismatch => CliError::Validation(e.to_string()),
            D::Integrate(_) => CliError::Numerical(e.to_string()),
        }
    }
}

impl From<spdc_sim::quantify::QuantifyError> for CliError {
    fn from(e: spdc_sim::quantify::QuantifyError) -> Self {
        CliError::Numerical(e.to_string())
    }
}
