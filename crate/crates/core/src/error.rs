//! Crate-wide error type.

use thiserror::Error;

/// Details of a minimum-data infeasibility: which sensor cannot meet its
/// demand even under a max-min allocation.
#[derive(Debug, Clone, PartialEq)]
pub struct InfeasibilityReport {
    /// Index of the binding sensor (0-based).
    pub binding_ws: usize,
    /// Demanded minimum data for that sensor [bit].
    pub required_bits: f64,
    /// Best achievable data for that sensor [bit].
    pub achievable_bits: f64,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("channel vector for WS {0} is zero; MRC beamformer undefined")]
    DegenerateChannel(usize),

    #[error("infeasible allocation: {0}")]
    InfeasibleAllocation(String),

    #[error("domain error in {context}: {message}")]
    Domain { context: &'static str, message: String },

    #[error("dual variables infeasible: {0}")]
    DualInfeasible(String),

    #[error(
        "minimum-data demand infeasible: WS {} needs {:.3} bit but at most {:.3} bit is achievable",
        .0.binding_ws, .0.required_bits, .0.achievable_bits
    )]
    Infeasible(InfeasibilityReport),

    #[error("solver failed to converge: {0}")]
    NonConvergence(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("invalid scenario: {0}")]
    InvalidScenario(String),

    #[error("usage error: {0}")]
    Usage(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn domain(context: &'static str, message: impl Into<String>) -> Self {
        Error::Domain { context, message: message.into() }
    }
}
