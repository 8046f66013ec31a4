use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("index ({a},{b}) out of range for n = {n}")]
    IndexOutOfRange { a: usize, b: usize, n: usize },

    #[error("invalid highest weight: {0}")]
    InvalidWeight(String),

    #[error("invalid chain label: {0}")]
    InvalidLabel(String),

    #[error("unsupported configuration: {0}")]
    Unsupported(String),

    #[error("inconsistent dimensions: {0}")]
    Dimension(String),

    #[error("projection failed: {0}")]
    Projection(String),

    #[error("{hw3} is not contained in {hw1} x {hw2} with multiplicity >= {gamma}")]
    NotContained {
        hw1: String,
        hw2: String,
        hw3: String,
        gamma: usize,
    },

    #[error("sigma variant {given} does not match form {form}")]
    SigmaMismatch { given: String, form: String },

    #[error("empty interior: cutoff {cutoff} leaves no states at depth {depth}")]
    EmptyInterior { cutoff: String, depth: usize },

    #[error("no Spin({m}) x Spin({rest}) invariant vector available")]
    NoInvariantVector { m: usize, rest: usize },

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
