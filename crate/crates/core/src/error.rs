use thiserror::Error;

/// Errors raised by the solver, its boundary conditions and the reference solutions.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("non-positive density {0}")]
    NonPositiveDensity(f64),

    #[error("non-positive pressure {0}")]
    NonPositivePressure(f64),

    #[error("non-positive temperature {0}")]
    NonPositiveTemperature(f64),

    #[error("non-positive input {0} where a positive value is required")]
    NonPositiveInput(f64),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("unsupported polynomial degree {0} (expected 1..=12)")]
    UnsupportedDegree(usize),

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("wall kind does not match the requested ghost-state generator")]
    WrongWallKind,

    #[error("unsupported boundary: {0}")]
    UnsupportedBoundary(String),

    #[error("positivity failure at t = {t}, element {element}, node {node}: {source}")]
    PositivityFailure {
        t: f64,
        element: usize,
        node: usize,
        source: Box<Error>,
    },

    #[error("step size underflow at t = {t} (dt = {dt})")]
    StepSizeUnderflow { t: f64, dt: f64 },

    #[error("domain error: {0}")]
    DomainError(String),

    #[error("evaluation point lies on the current filament")]
    OnFilament,

    #[error("singular linear system")]
    SingularSystem,

    #[error("configuration error: {0}")]
    ConfigError(String),

    #[error("I/O error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
