use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Core(#[from] ogl_core::Error),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("could not parse {path}: {msg}")]
    ConfigFile { path: String, msg: String },

    #[error("dataset `{0}` not found (relative paths are also tried under OGL_DATA_DIR)")]
    DatasetNotFound(String),

    #[error("no run records found in {0}")]
    NoRecords(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
