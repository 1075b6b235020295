use thiserror::Error;

/// Which side of a block matrix a gram belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    Row,
    Column,
}

impl std::fmt::Display for Axis {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Axis::Row => f.write_str("row"),
            Axis::Column => f.write_str("column"),
        }
    }
}

#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("singular {}: eigenvalue #{eig_index} = {eigenvalue:e} (threshold {threshold:e})", site_label(site))]
    SingularGram {
        /// Row or column gram the failure came from, when known.
        site: Option<(Axis, usize)>,
        eig_index: usize,
        eigenvalue: f64,
        threshold: f64,
    },
    #[error("numerical failure: {0}")]
    NumericalFailure(String),
    #[error("invalid scaling: {0}")]
    InvalidScaling(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("invalid well-spread mode: {0}")]
    InvalidMode(String),
    #[error("certificate mismatch: {0}")]
    CertificateMismatch(String),
    /// Point indices are one-based.
    #[error("triple ({i}, {j}, {k}) is not collinear (residual {residual:e})")]
    InvalidTriple {
        i: usize,
        j: usize,
        k: usize,
        residual: f64,
    },
    #[error("degenerate configuration: {0}")]
    DegenerateConfiguration(String),
    #[error("degenerate triple: {0}")]
    DegenerateTriple(String),
    #[error("degenerate pair: {0}")]
    DegeneratePair(String),
    #[error("hypothesis failure: {0}")]
    HypothesisFailure(String),
    #[error("construction failure: {0}")]
    ConstructionFailure(String),
}

fn site_label(site: &Option<(Axis, usize)>) -> String {
    match site {
        Some((axis, index)) => format!("{axis} gram {index}"),
        None => "matrix".to_string(),
    }
}

impl Error {
    /// Attaches a row/column location to a `SingularGram` error.
    pub fn at(self, axis: Axis, index: usize) -> Self {
        match self {
            Error::SingularGram {
                eig_index,
                eigenvalue,
                threshold,
                ..
            } => Error::SingularGram {
                site: Some((axis, index)),
                eig_index,
                eigenvalue,
                threshold,
            },
            other => other,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
