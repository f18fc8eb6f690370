//! Dense complex linear algebra substrate.
//!
//! Row-major `ComplexMatrix` values, a Jacobi Hermitian eigensolver,
//! spectral functions with an explicit zero cutoff, tensor / partial
//! trace calculus, fidelity and trace distance, and seeded sampling.

mod eig;
mod matrix;
mod metrics;
mod sample;

pub use eig::{apply_spectral_function, eig_hermitian, unitary_exp_i, Spectrum};
pub use matrix::{partial_trace, tensor, Cx, ComplexMatrix, Density};
pub use metrics::{fidelity, trace_distance};
pub use sample::{
    derive_seed, sample_density, sample_haar_unitary, sample_pure, sample_pure_vector,
};
