use thiserror::Error;

pub type Result<T> = std::result::Result<T, BfdError>;

#[derive(Debug, Error)]
pub enum BfdError {
    /// A scalar argument lies outside its admissible range.
    #[error("parameter `{name}` out of range: {detail}")]
    ParameterDomain { name: &'static str, detail: String },

    /// Coefficients violate the linear well-posedness signs a <= 0, c <= 0, b >= 0, d >= 0.
    #[error("ill-posed parameters: {0}")]
    IllPosed(String),

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("operation not available in {dim}D: {what}")]
    UnsupportedDimension { dim: usize, what: &'static str },

    #[error("unsupported case: {0}")]
    UnsupportedCase(String),

    #[error("configuration error: {0}")]
    Config(String),

    /// Non-finite values or a runaway X^0_mu norm during time stepping.
    #[error("blow-up at t = {t}: X^0_mu norm = {norm}")]
    BlowUp { t: f64, norm: f64 },

    /// A numerical self-check failed.
    #[error("internal invariant violated: {0}")]
    Invariant(String),

    #[error("snapshot format error: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl BfdError {
    pub(crate) fn domain(name: &'static str, detail: impl Into<String>) -> Self {
        BfdError::ParameterDomain {
            name,
            detail: detail.into(),
        }
    }
}
