//! Seeded, deterministic random sampling.
//!
//! Everything here draws from a caller-supplied seed through ChaCha8, so
//! repeated runs with the same seed reproduce bit-identical samples.
//! [`derive_seed`] turns one master seed into an indexed family of
//! independent seeds for batch drivers.

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

use crate::error::Result;

use super::matrix::{ComplexMatrix, Cx, Density};

/// Seed for sample `index` of the family identified by `master`.
pub fn derive_seed(master: u64, index: u64) -> u64 {
    let mut h = Sha256::new();
    h.update(master.to_le_bytes());
    h.update(index.to_le_bytes());
    let out = h.finalize();
    u64::from_le_bytes(out[..8].try_into().unwrap())
}

fn standard_complex(rng: &mut ChaCha8Rng) -> Cx {
    // Box-Muller, two normals per complex entry.
    let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
    let u2: f64 = rng.gen_range(0.0..1.0);
    let r = (-2.0 * u1.ln()).sqrt();
    let th = 2.0 * std::f64::consts::PI * u2;
    Complex64::new(r * th.cos(), r * th.sin())
}

fn ginibre(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(rows, cols, |_, _| standard_complex(rng))
}

/// Modified Gram-Schmidt QR. Returns `(q, r_diag)` where `q` has
/// orthonormal columns and `r_diag` holds the diagonal of `R`.
fn mgs_qr(m: &ComplexMatrix) -> (ComplexMatrix, Vec<Cx>) {
    let (rows, cols) = (m.rows(), m.cols());
    let mut v: Vec<Vec<Cx>> = (0..cols).map(|c| m.column(c)).collect();
    let mut rdiag = Vec::with_capacity(cols);
    for j in 0..cols {
        let norm: f64 = v[j].iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        rdiag.push(Cx::new(norm, 0.0));
        if norm > 0.0 {
            for z in v[j].iter_mut() {
                *z /= norm;
            }
        }
        for k in (j + 1)..cols {
            let proj: Cx = v[j]
                .iter()
                .zip(v[k].iter())
                .map(|(a, b)| a.conj() * b)
                .sum();
            for i in 0..rows {
                let d = proj * v[j][i];
                v[k][i] -= d;
            }
        }
    }
    (ComplexMatrix::from_columns(&v), rdiag)
}

/// Haar-distributed unitary of dimension `dim`.
///
/// QR of a Ginibre matrix with the `R` diagonal phase-fixed to be real
/// positive, which makes the distribution exactly Haar.
pub fn sample_haar_unitary(dim: usize, seed: u64) -> ComplexMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g = ginibre(&mut rng, dim, dim);
    let (q, rdiag) = mgs_qr(&g);
    // Multiply each column by the phase of the corresponding R diagonal
    // entry; with MGS the diagonal is already real positive, but keep the
    // correction for robustness.
    ComplexMatrix::from_fn(dim, dim, |r, c| {
        let d = rdiag[c];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { Cx::new(1.0, 0.0) };
        q[(r, c)] * phase
    })
}

/// Random density matrix of the given rank (induced Ginibre measure:
/// `G G^† / tr`, with `G` of shape `dim x rank`).
pub fn sample_density(dim: usize, rank: usize, seed: u64) -> Result<Density> {
    assert!(rank >= 1 && rank <= dim, "rank must be in 1..=dim");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g = ginibre(&mut rng, dim, rank);
    let gg = g.matmul(&g.adjoint());
    let tr = gg.trace().re;
    Density::new(gg.scale_re(1.0 / tr))
}

/// Haar-random unit vector.
pub fn sample_pure_vector(dim: usize, seed: u64) -> Vec<Cx> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let v: Vec<Cx> = (0..dim).map(|_| standard_complex(&mut rng)).collect();
    let norm: f64 = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    v.into_iter().map(|z| z / norm).collect()
}

/// Haar-random pure state as a density matrix.
pub fn sample_pure(dim: usize, seed: u64) -> Result<Density> {
    Density::from_pure(&sample_pure_vector(dim, seed))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn haar_unitary_is_unitary_and_deterministic() {
        let u = sample_haar_unitary(5, 42);
        let gram = u.adjoint_mul(&u);
        assert!((&gram - &ComplexMatrix::identity(5)).frobenius_norm() < 1e-10);
        let u2 = sample_haar_unitary(5, 42);
        assert_eq!(u, u2);
        let u3 = sample_haar_unitary(5, 43);
        assert!((&u - &u3).frobenius_norm() > 1e-3);
    }

    #[test]
    fn sampled_densities_are_valid_and_have_requested_rank() {
        let rho = sample_density(4, 2, 7).unwrap();
        assert_eq!(rho.dim(), 4);
        assert_eq!(rho.rank(), 2);
        let pure = sample_pure(6, 11).unwrap();
        assert!(pure.is_pure(1e-10));
    }

    #[test]
    fn haar_average_of_conjugated_projector_is_mixed() {
        // E_U[U |0><0| U^†] = I/d; Monte-Carlo check with a loose bound.
        let d = 3;
        let n = 400;
        let mut acc = ComplexMatrix::zeros(d, d);
        for k in 0..n {
            let u = sample_haar_unitary(d, derive_seed(123, k));
            let col = u.column(0);
            acc.add_assign_scaled(&ComplexMatrix::outer(&col, &col), Cx::new(1.0, 0.0));
        }
        let avg = acc.scale_re(1.0 / n as f64);
        let target = ComplexMatrix::identity(d).scale_re(1.0 / d as f64);
        assert!((&avg - &target).frobenius_norm() < 0.08);
    }

    #[test]
    fn derived_seeds_are_distinct() {
        let a = derive_seed(1, 0);
        let b = derive_seed(1, 1);
        let c = derive_seed(2, 0);
        assert_ne!(a, b);
        assert_ne!(a, c);
    }
}
