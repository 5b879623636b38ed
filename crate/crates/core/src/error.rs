use chrono::NaiveDate;
use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Coarse classification used by the command-line driver to pick an exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Input,
    NonConvergence,
    Identification,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("non-positive price {price} for asset `{asset_id}` on {date}")]
    NonPositivePrice {
        date: String,
        asset_id: String,
        price: f64,
    },

    #[error("group `{0}` is empty after filtering")]
    EmptyGroup(String),

    #[error("rank-deficient design: column `{column}` is collinear with earlier columns")]
    RankDeficient { column: String },

    #[error("collinear covariates `{first}` and `{second}`")]
    CollinearCovariates { first: String, second: String },

    #[error(
        "CR2 adjustment block for cluster `{cluster}` is numerically singular; \
         fall back to CR1 for this model"
    )]
    SingularClusterBlock { cluster: String },

    #[error("{what} did not converge after {iterations} iterations (duality gap {gap:e})")]
    NonConvergence {
        what: String,
        iterations: usize,
        gap: f64,
        objective_trace: Vec<f64>,
    },

    #[error("{0} is not identified")]
    Unidentified(String),

    #[error("event window ending {window_end} extends past the panel end {panel_end}")]
    WindowExceedsPanel {
        window_end: NaiveDate,
        panel_end: NaiveDate,
    },

    #[error("{failed} of {total} bootstrap replicates failed (more than 5%)")]
    BootstrapFailures { failed: usize, total: usize },

    #[error("{source_name}, record {record}: {message}")]
    Parse {
        source_name: String,
        record: usize,
        message: String,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::NonConvergence { .. } | Error::BootstrapFailures { .. } => {
                ErrorKind::NonConvergence
            }
            Error::RankDeficient { .. }
            | Error::CollinearCovariates { .. }
            | Error::SingularClusterBlock { .. }
            | Error::Unidentified(_) => ErrorKind::Identification,
            _ => ErrorKind::Input,
        }
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }
}
