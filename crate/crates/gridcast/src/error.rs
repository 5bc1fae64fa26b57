use std::path::PathBuf;

use gridcast_core::changepoint::ChangePointError;
use gridcast_core::forecast::ForecastError;
use gridcast_core::fpca::FpcaError;
use gridcast_core::metrics::MetricsError;
use gridcast_core::mpc::MpcError;
use gridcast_core::series::SeriesError;
use gridcast_core::synthetic::SyntheticError;
use gridcast_core::wasserstein::WassersteinError;

use crate::dataset::DatasetError;

/// Invalid configuration or command line. Maps to exit code 2.
#[derive(Debug, thiserror::Error)]
#[error("config error: {0}")]
pub struct ConfigError(pub String);

impl ConfigError {
    pub fn new(msg: impl Into<String>) -> Self {
        Self(msg.into())
    }
}

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error(transparent)]
    Dataset(#[from] DatasetError),
    #[error(transparent)]
    Series(#[from] SeriesError),
    #[error(transparent)]
    Synthetic(#[from] SyntheticError),
    #[error(transparent)]
    Forecast(#[from] ForecastError),
    #[error(transparent)]
    Mpc(#[from] MpcError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error(transparent)]
    Fpca(#[from] FpcaError),
    #[error(transparent)]
    Wasserstein(#[from] WassersteinError),
    #[error(transparent)]
    ChangePoint(#[from] ChangePointError),
    #[error(transparent)]
    Asset(#[from] gridcast_core::assets::AssetError),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("{0}")]
    Other(String),
}

impl HarnessError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Self::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code: 2 for configuration problems, 3 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Config(_) => 2,
            _ => 3,
        }
    }
}

pub type Result<T, E = HarnessError> = std::result::Result<T, E>;
