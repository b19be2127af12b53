use thiserror::Error;

/// Errors raised anywhere in the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("empty site list")]
    EmptyRegion,

    #[error("duplicate site {0}")]
    DuplicateSite(String),

    #[error("invalid site: {0}")]
    InvalidSite(String),

    #[error("operator label {label} is undefined for local dimension {local_dim}")]
    InvalidLabel { label: String, local_dim: usize },

    #[error("support is not contained in target region; missing sites: {missing}")]
    NotContained { missing: String },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("matrix is not Hermitian (deviation {deviation:.3e})")]
    NotHermitian { deviation: f64 },

    /// Carries a Choi eigenpair witnessing the failure of complete positivity.
    #[error("map is not completely positive: Choi eigenvalue {eigenvalue:.6e}")]
    NotCompletelyPositive {
        eigenvalue: f64,
        eigenvector: Vec<num_complex::Complex64>,
    },

    #[error("capacity exceeded: {what} requires {requested}, cap is {cap}")]
    Capacity {
        what: String,
        requested: usize,
        cap: usize,
    },

    #[error("ODE integration needs {required} steps, cap is {cap} (generator norm {norm:.3e}, t = {t})")]
    StepLimit {
        required: usize,
        cap: usize,
        norm: f64,
        t: f64,
    },

    #[error("region of {sites} sites cannot host the {pattern} pattern")]
    RegionTooSmall { pattern: String, sites: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("evolution failed on volume {sites} sites: {source}")]
    Volume {
        sites: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("config error at {location}: {message}")]
    Config { location: String, message: String },

    #[error("linear algebra failure: {0}")]
    Linalg(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl From<ndarray_linalg::error::LinalgError> for Error {
    fn from(e: ndarray_linalg::error::LinalgError) -> Self {
        Error::Linalg(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
