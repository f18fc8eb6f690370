//! Numerical tolerances used across the crate.
//!
//! These are the defaults; anything user-facing that depends on them
//! (commuting-square classification, report generation) echoes the
//! effective value in its output.

/// Relative eigenvalue cutoff below which a spectral value is treated as
/// part of the kernel whenever a log or inverse is taken.
pub const EIG_ZERO_CUTOFF: f64 = 1e-12;

/// Relative singular-value cutoff for span membership and rank decisions.
pub const SPAN_CUTOFF: f64 = 1e-10;

/// Tolerance for structural identities: conditional-expectation algebra,
/// block reconstruction, Stinespring marginals.
pub const STRUCT_TOL: f64 = 1e-9;

/// Tolerance for deciding that a square of algebras is commuting.
pub const SQUARE_TOL: f64 = 1e-9;

/// Spectral gap used when grouping eigenvalues of a random central
/// element into block projections.
pub const CENTRAL_GAP: f64 = 1e-7;

/// Retry budget for the randomized block decomposition.
pub const BLOCK_RETRIES: usize = 8;
