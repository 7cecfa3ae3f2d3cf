use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error in `{field}`: {reason}")]
    Config { field: String, reason: String },

    #[error("numerical failure: {0}")]
    Numerical(String),
}

impl CliError {
    pub fn config(field: &str, reason: impl Into<String>) -> Self {
        CliError::Config {
            field: field.to_string(),
            reason: reason.into(),
        }
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config { .. } => 2,
            CliError::Numerical(_) => 3,
        }
    }
}

impl From<fock_filter::Error> for CliError {
    fn from(e: fock_filter::Error) -> Self {
        use fock_filter::Error as E;
        match e {
            // inputs the user can fix by editing the config
            E::InvalidParameter { name, .. } => CliError::config(name, e.to_string()),
            E::CutoffTooSmall { .. } => CliError::config("cutoff", e.to_string()),
            E::TooFewResonances { .. } => CliError::config("cavity", e.to_string()),
            E::NonUniformGrid(_) | E::DimensionMismatch(_) => CliError::config("tomography.input", e.to_string()),
            _ => CliError::Numerical(e.to_string()),
        }
    }
}
