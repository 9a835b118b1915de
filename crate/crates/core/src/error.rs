use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid potential: {0}")]
    InvalidPotential(String),

    #[error("invalid interval [{a}, {b}]")]
    InvalidInterval { a: f64, b: f64 },

    #[error("invalid family parameters: {0}")]
    InvalidFamily(String),

    #[error("degenerate constants: C2 = C1 + |E| = 0, K and delta are unbounded")]
    DegenerateConstants,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("solution overflow at x = {x}")]
    OverflowAtX { x: f64 },

    #[error("trace too short: {0}")]
    TraceTooShort(String),

    #[error("no eligible points: {0}")]
    NoEligiblePoints(String),

    #[error("inadmissible weight: {0}")]
    InadmissibleWeight(String),

    #[error("precondition failed: {0}")]
    PreconditionFailed(String),

    #[error("not a real solution: {0}")]
    NotRealSolution(String),

    #[error("grid too coarse near x = {x}: phase increment {increment} >= pi")]
    GridTooCoarse { x: f64, increment: f64 },

    #[error("complex energy not allowed here: E = {re} + {im}i")]
    ComplexEnergy { re: f64, im: f64 },

    #[error("config error in {location}: {message}")]
    Config { location: String, message: String },

    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
