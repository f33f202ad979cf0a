use thiserror::Error;

pub type Result<T, E = LabError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum LabError {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("resource limit exceeded: {0}")]
    Resource(String),

    #[error("evaluation error: {0}")]
    Evaluation(String),

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error(transparent)]
    Integration(#[from] Box<crate::galerkin::IntegrationError>),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl LabError {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        LabError::Domain(msg.into())
    }

    pub(crate) fn config(msg: impl Into<String>) -> Self {
        LabError::Config(msg.into())
    }
}
