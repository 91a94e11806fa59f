use std::fmt;

/// Errors raised by the beampattern engines and analytics.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A configuration value violates its domain (non-positive spacing, length mismatch, ...).
    InvalidConfig(String),
    /// The requested operation is not defined for this frequency plan variant.
    UnsupportedPlan(&'static str),
    /// Angle lies outside the visible sector |θ| < π/2.
    OutOfSector { theta: f64 },
    /// Evaluation too close to endfire, where 1/cos θ diverges.
    Singularity { theta: f64 },
    /// Quadrature node count below the Nyquist-safe minimum for the integrand.
    Sampling { required: usize, provided: usize },
    /// Covariance matrix of the wrong flavor handed to a beampattern.
    FlavorMismatch { expected: &'static str, found: &'static str },
    /// Phase-schedule segments overlap or are out of order.
    Schedule(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidConfig(msg) => write!(f, "invalid configuration: {msg}"),
            Error::UnsupportedPlan(what) => write!(f, "unsupported frequency plan: {what}"),
            Error::OutOfSector { theta } => {
                write!(f, "angle {:.4} deg is outside the visible sector", theta.to_degrees())
            }
            Error::Singularity { theta } => {
                write!(f, "angle {:.6} deg is too close to endfire", theta.to_degrees())
            }
            Error::Sampling { required, provided } => write!(
                f,
                "quadrature needs at least {required} nodes for the declared bandwidth, got {provided}"
            ),
            Error::FlavorMismatch { expected, found } => {
                write!(f, "expected a {expected} covariance matrix, got {found}")
            }
            Error::Schedule(msg) => write!(f, "invalid phase schedule: {msg}"),
        }
    }
}

impl std::error::Error for Error {}

pub type Result<T> = std::result::Result<T, Error>;
