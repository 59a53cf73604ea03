use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Pipeline stage an error belongs to; the CLI maps it to an exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Config,
    Mesh,
    Solver,
    Quadrature,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("degenerate input: {0}")]
    DegenerateInput(String),
    #[error("resource limit: {0}")]
    ResourceLimit(String),
    #[error("grading failure: element {element} inverted")]
    GradingFailure { element: usize },
    #[error("construction failure: {0} non-conforming facets")]
    ConstructionFailure(usize),
    #[error("invalid mesh: {0}")]
    InvalidMesh(String),
    #[error("assembly failure: element {element} is degenerate")]
    AssemblyFailure { element: usize },
    #[error("point location failure: {0}")]
    PointLocation(String),
    #[error("clipping failure: {0}")]
    Clipping(String),
    #[error("empty system: every vertex lies on the boundary")]
    EmptySystem,
    #[error(
        "solver did not converge after {iterations} iterations (relative residual {residual:e})"
    )]
    NotConverged {
        iterations: usize,
        residual: f64,
        best: Vec<f64>,
    },
    #[error("matrix is not positive definite")]
    NotSpd,
    #[error("singular evaluation at {0:?}")]
    SingularEvaluation([f64; 3]),
    #[error("quadrature failure: {0}")]
    Quadrature(String),
    #[error("invalid record: {0}")]
    InvalidRecord(String),
    #[error("no theorem covers this configuration: {0}")]
    NoTheorem(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn stage(&self) -> Stage {
        match self {
            Error::InvalidArgument(_) | Error::NoTheorem(_) | Error::Parse(_) => Stage::Config,
            Error::DegenerateInput(_)
            | Error::ResourceLimit(_)
            | Error::GradingFailure { .. }
            | Error::ConstructionFailure(_)
            | Error::InvalidMesh(_)
            | Error::Io(_) => Stage::Mesh,
            Error::AssemblyFailure { .. }
            | Error::PointLocation(_)
            | Error::Clipping(_)
            | Error::EmptySystem
            | Error::NotConverged { .. }
            | Error::NotSpd => Stage::Solver,
            Error::SingularEvaluation(_) | Error::Quadrature(_) | Error::InvalidRecord(_) => {
                Stage::Quadrature
            }
        }
    }
}
