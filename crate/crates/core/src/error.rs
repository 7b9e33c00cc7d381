use std::path::PathBuf;

use thiserror::Error;

/// Errors raised by the model, simulator and experiment runner.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("config error at `{path}`: {message}")]
    Config { path: String, message: String },

    #[error("missing required config fields: {}", .0.join(", "))]
    MissingFields(Vec<String>),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("recipient at {distance_m:.1} m is unreachable on SF{sf}: frame success probability is zero with {remaining:.3} fragments outstanding")]
    Unreachable { distance_m: f64, sf: u8, remaining: f64 },

    #[error("infeasible duty profile: {0}")]
    InfeasibleProfile(String),

    #[error("simulation incomplete: {0}")]
    Incomplete(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }
}

impl Error {
    /// Process exit status for the command-line tool: 2 for bad input,
    /// 3 for numerical trouble, 4 for an incomplete simulation.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidParameter(_)
            | Error::Config { .. }
            | Error::MissingFields(_)
            | Error::InfeasibleProfile(_)
            | Error::Io { .. }
            | Error::Csv(_)
            | Error::Json(_) => 2,
            Error::Numerical(_) | Error::Unreachable { .. } => 3,
            Error::Incomplete(_) => 4,
        }
    }
}
