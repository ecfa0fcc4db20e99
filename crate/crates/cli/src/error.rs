use qedr_core::cavity::CavityError;
use qedr_core::rabi::RabiError;
use qedr_core::spectra::SpectraError;
use qedr_core::CasidaError;
use thiserror::Error;

/// Every failure maps to one of two exit codes.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("input-error: {0}")]
    Input(String),
    #[error("numerical-failure: {0}")]
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => 2,
            CliError::Numerical(_) => 3,
        }
    }

    pub fn input(msg: impl Into<String>) -> Self {
        CliError::Input(msg.into())
    }

    pub fn numerical(msg: impl Into<String>) -> Self {
        CliError::Numerical(msg.into())
    }

    /// The error as one line, newlines folded.
    pub fn line(&self) -> String {
        self.to_string().split_whitespace().collect::<Vec<_>>().join(" ")
    }
}

pub type Result<T> = std::result::Result<T, CliError>;

impl From<CasidaError> for CliError {
    fn from(e: CasidaError) -> Self {
        match e {
            CasidaError::Eigensolver | CasidaError::RootIsolation { .. } => CliError::numerical(e.to_string()),
            _ => CliError::input(e.to_string()),
        }
    }
}

impl From<RabiError> for CliError {
    fn from(e: RabiError) -> Self {
        match e {
            RabiError::NotConverged { .. } | RabiError::Unstable { .. } | RabiError::Eigensolver => {
                CliError::numerical(e.to_string())
            }
            _ => CliError::input(e.to_string()),
        }
    }
}

impl From<SpectraError> for CliError {
    fn from(e: SpectraError) -> Self {
        match e {
            SpectraError::Domain(_) => CliError::numerical(e.to_string()),
            _ => CliError::input(e.to_string()),
        }
    }
}

impl From<CavityError> for CliError {
    fn from(e: CavityError) -> Self {
        match e {
            CavityError::NotPositive(_)
            | CavityError::PositionOutside { .. }
            | CavityError::NoModes
            | CavityError::EmptyWindow(..) => CliError::input(e.to_string()),
            _ => CliError::numerical(e.to_string()),
        }
    }
}
