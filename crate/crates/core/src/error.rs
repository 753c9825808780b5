use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid knot vector: {0}")]
    InvalidKnots(String),

    #[error("evaluation point {0} outside [0, 1]")]
    OutOfDomain(f64),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),

    #[error("unsupported trimming configuration: {0}")]
    Tiling(String),

    #[error("bad cell {cell} has no good neighbor within the search radius")]
    NoGoodNeighbor { cell: usize },

    #[error("cell {cell} is not covered by the stabilization plan")]
    MissingPlanEntry { cell: usize },

    #[error("linear algebra failure: {0}")]
    Numerical(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for errors caused by user input rather than by the numerics.
    pub fn is_config(&self) -> bool {
        matches!(self, Error::Config(_) | Error::Io(_))
    }
}
