//! Error type shared by every module of the crate.

use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, KsError>;

/// Everything that can go wrong while building grids, evaluating norms or
/// running verification suites.
#[derive(Debug, Error)]
pub enum KsError {
    /// Grid construction rejected the requested shape.
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    /// Two fields (or a field and an operator) live on incompatible grids.
    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    /// A field was handed to an operation expecting the other domain.
    #[error("domain mismatch: expected {expected} field, got {got}")]
    DomainMismatch {
        expected: &'static str,
        got: &'static str,
    },

    /// A smoothness order or weight parameter is out of range.
    #[error("invalid order: {0}")]
    InvalidOrder(String),

    /// A window or partition cannot be realized on the current grid.
    #[error("window error: {0}")]
    Window(String),

    /// Quadrature failed to converge to the requested accuracy.
    #[error("quadrature error: {0}")]
    Quadrature(String),

    /// Preconditions of a functional-calculus operation are violated
    /// (range touching the boundary of the domain of holomorphy, degenerate
    /// denominators on the contour, and so on).
    #[error("calculus error: {0}")]
    Calculus(String),

    /// A verification check could not be evaluated (as opposed to failing).
    #[error("check error: {0}")]
    Check(String),

    /// File I/O failure.
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    /// Malformed field file or report document.
    #[error("format error: {0}")]
    Format(String),
}
