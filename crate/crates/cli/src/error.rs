use refcmfs_core::ClusterError;
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("unsupported baseline: {0}")]
    UnsupportedBaseline(String),
    #[error("unknown algorithm: {0}")]
    UnknownAlgorithm(String),
    #[error("dataset error: {0}")]
    Dataset(ClusterError),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::UnsupportedBaseline(_) | CliError::UnknownAlgorithm(_) => 1,
            CliError::Dataset(_) => 2,
            CliError::InvalidConfig(_) => 3,
            CliError::Io(_) => 4,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::UnsupportedBaseline(_) => "unsupported_baseline",
            CliError::UnknownAlgorithm(_) => "unknown_algorithm",
            CliError::Dataset(_) => "dataset_parse",
            CliError::InvalidConfig(_) => "invalid_config",
            CliError::Io(_) => "io",
        }
    }

    /// Single-line JSON error record.
    pub fn to_json_line(&self) -> String {
        #[derive(Serialize)]
        struct Line<'a> {
            error: &'a str,
            code: i32,
            message: String,
        }
        serde_json::to_string(&Line {
            error: self.kind(),
            code: self.exit_code(),
            message: self.to_string(),
        })
        .expect("error record serializes")
    }
}

/// Configuration problems raised by the library become exit code 3.
impl From<ClusterError> for CliError {
    fn from(e: ClusterError) -> Self {
        match e {
            ClusterError::Io(e) => CliError::Io(e),
            other => CliError::InvalidConfig(other.to_string()),
        }
    }
}
