use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("measure has no atoms")]
    EmptyMeasure,

    #[error("invalid measure: {0}")]
    InvalidMeasure(String),

    #[error("invalid time grid: {0}")]
    InvalidGrid(String),

    #[error("grids differ: {0}")]
    GridMismatch(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("model declares no bound for {0}")]
    MissingBound(&'static str),

    #[error("unknown model id `{0}`")]
    UnknownModel(String),

    #[error(
        "non-finite state at t={time}: particle {particle}, state {state}, drift {drift}, diffusion {diffusion}"
    )]
    NonFinite {
        time: f64,
        particle: usize,
        state: f64,
        drift: f64,
        diffusion: f64,
    },

    #[error("jump rate {rate} at t={time} exceeds the dominating intensity {bound}")]
    RateAboveBound { time: f64, rate: f64, bound: f64 },

    #[error("exponential moment saturated at t={time}")]
    MomentSaturated { time: f64 },

    #[error("limit flow did not converge; refusing to run")]
    FlowNotConverged,

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("i/o error on {path}: {source}")]
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

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
