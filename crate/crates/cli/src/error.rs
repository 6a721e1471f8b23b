use thiserror::Error;

use crate::config::ConfigError;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Core(#[from] dkg_core::Error),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

impl CliError {
    /// 2 for rejected input, 1 for everything else.
    pub fn exit_code(&self) -> i32 {
        use dkg_core::Error as E;
        match self {
            CliError::Config(_) => 2,
            CliError::Core(
                E::Precondition(_)
                | E::MassCondition { .. }
                | E::InvalidMass(_)
                | E::GridSize(_)
                | E::Cfl(_)
                | E::UnresolvedShell { .. }
                | E::ExponentPair(..),
            ) => 2,
            _ => 1,
        }
    }
}
