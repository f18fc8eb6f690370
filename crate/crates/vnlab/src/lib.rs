//! Finite-dimensional von Neumann subalgebra toolkit.
//!
//! Everything is built on a dense complex-matrix substrate ([`matcore`]):
//! subalgebras with their canonical block decompositions and conditional
//! expectations ([`algebra`]), entropic functionals ([`entropy`]), the
//! commuting-square functional and generalized conditional mutual
//! information ([`squares`]), channels with Petz recovery and the
//! resource-theory operation validators ([`channels`]), squashed and
//! convex-roof non-classicality measures ([`measures`]), entropic
//! uncertainty-relation checkers ([`ucr`]), and flagship constructions
//! such as mutually unbiased basis families and the EPR/2UCR conversion
//! ([`scenarios`]).
//!
//! All entropies are in bits (base-2 logarithms). All samplers are
//! explicitly seeded and deterministic.

pub mod algebra;
pub mod channels;
pub mod entropy;
pub mod error;
pub mod matcore;
pub mod measures;
mod opt;
pub mod scenarios;
pub mod squares;
pub mod tol;
pub mod ucr;

pub use error::{Error, Result};
pub use matcore::{ComplexMatrix, Density, Spectrum};
