use thiserror::Error;

/// Errors raised by the model, estimator and experiment layers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid alpha sequence: {0}")]
    InvalidAlpha(String),

    #[error("{key}: value {value} out of range ({expected})")]
    OutOfRange {
        key: &'static str,
        value: f64,
        expected: &'static str,
    },

    #[error(
        "tail variance {tail_mass:.3e} still above target {target:.3e} after {terms} terms"
    )]
    TruncationCap {
        terms: usize,
        tail_mass: f64,
        target: f64,
    },

    #[error("invalid input distribution: {0}")]
    InvalidInput(String),

    #[error("blocklength {n} outside 1..={max}")]
    Blocklength { n: usize, max: usize },

    #[error("quadrature did not converge: estimated error {achieved:.3e} > tolerance {tolerance:.3e}")]
    Quadrature { achieved: f64, tolerance: f64 },

    #[error("eta*^2 = {eta_star2} outside [{eta_min2}, {eta_max2}]")]
    EtaStarOutside {
        eta_star2: f64,
        eta_min2: f64,
        eta_max2: f64,
    },

    #[error("eta^2 bound violated: eta^2 = {eta2} outside [{eta_min2}, {eta_max2}] for input {inputs:?}")]
    EtaBoundViolation {
        eta2: f64,
        eta_min2: f64,
        eta_max2: f64,
        inputs: Vec<f64>,
    },

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("config line {line}, column {column}: {message}")]
    Config {
        line: usize,
        column: usize,
        message: String,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
