use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("geometry error: {0}")]
    Geometry(String),

    #[error("local graph undefined at eta = {eta:e} (admissible |eta| < {limit:e})")]
    GraphDomain { eta: f64, limit: f64 },

    #[error("coefficient error: {0}")]
    Coefficient(String),

    #[error("tensor field does not provide {0}")]
    Capability(&'static str),

    #[error("degenerate interface frame: primitive system condition estimate {condition:e}")]
    DegenerateFrame { condition: f64 },

    #[error("grid error: {0}")]
    Grid(String),

    #[error("linear solver failed after {iterations} iterations (relative residual {residual:e}): {reason}")]
    Solver {
        iterations: usize,
        residual: f64,
        reason: String,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
