//! Gradient flow on finite point sets.
//!
//! A set of up to `n` distinct points in R^d is driven by mutual unit-strength
//! attraction until two points collide, which yields a map onto sets of at
//! most `n - 1` points. The crate provides the metric space plumbing
//! ([`space`]), the flow and the retraction built on it ([`flow`]), and a
//! seeded verification harness that checks the quantitative guarantees the
//! construction is supposed to satisfy ([`verify`]).

pub mod flow;
pub mod numfmt;
pub mod space;
pub mod verify;

/// Crate-wide error type.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Operands live in different ambient dimensions.
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    /// Validation failure in a constructor or an operation precondition.
    #[error("invalid input: {0}")]
    InvalidInput(String),
    /// Two points of a configuration coincide where distinctness is required.
    #[error("configuration is on the diagonal: points {0} and {1} coincide")]
    Diagonal(usize, usize),
    /// The label-matching precondition `separation > 2 * hausdorff` fails,
    /// so no nearest-point bijection can be certified.
    #[error("no certified matching: separation {separation} <= 2 * hausdorff distance {hausdorff}")]
    NoCertifiedMatching { separation: f64, hausdorff: f64 },
    /// The integrator ran out of its step budget before the stopping rule hit.
    #[error("no collision within {0} steps")]
    Divergence(usize),
}

pub type Result<T> = std::result::Result<T, Error>;
