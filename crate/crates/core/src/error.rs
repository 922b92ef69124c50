use std::path::PathBuf;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("i/o error on {path}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("bad magic: expected \"LTM1\", found {0:?}")]
    BadMagic([u8; 4]),

    #[error("truncated file: expected {expected} bytes, found {found}")]
    Truncated { expected: u64, found: u64 },

    #[error("unknown dtype code {0}")]
    UnknownDtype(u8),

    #[error("invalid shape: {0}")]
    InvalidShape(String),

    #[error("non-finite value at element {index}")]
    NonFinite { index: usize },

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("invalid hyperplane: {0}")]
    InvalidHyperplane(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("too few samples: need at least {need}, got {got}")]
    TooFewSamples { need: usize, got: usize },

    #[error("degenerate labeling: threshold {threshold} leaves {positives} positives of {n}")]
    DegenerateLabeling { threshold: f64, positives: usize, n: usize },

    #[error("training data contains a single class")]
    SingleClass,

    #[error("optimization diverged at iteration {iteration}")]
    Divergence { iteration: usize },

    #[error("fitted weight vector is zero")]
    ZeroWeights,

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("direction lies inside the span of the conditioning attributes")]
    InseparableDirection,

    #[error("no usable conditioning attributes")]
    EmptyAttributes,

    #[error("layer index {index} out of range for {layers} layers")]
    LayerOutOfRange { index: usize, layers: usize },

    #[error("labels differ between the two datasets")]
    LabelMismatch,

    #[error("all values tied; rank correlation undefined")]
    AllTied,

    #[error("covariance matrix is not symmetric (max deviation {0:e})")]
    AsymmetricCovariance(f64),

    #[error("eigendecomposition failed: {0}")]
    Eigen(String),

    #[error("baseline metric is not positive ({0})")]
    ZeroBaseline(f64),

    #[error("empty input: {0}")]
    EmptyInput(&'static str),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }
}
