//! Distinguishability metrics on density matrices.

use crate::error::Result;

use super::eig::{apply_spectral_function, eig_hermitian};
use super::matrix::{ComplexMatrix, Cx, Density};

/// Uhlmann fidelity `F(rho, sigma) = tr sqrt(sqrt(rho) sigma sqrt(rho))`,
/// in `[0, 1]`.
pub fn fidelity(rho: &Density, sigma: &Density) -> Result<f64> {
    // the square root amplifies eigenvalue round-off near zero (1e-16
    // becomes 1e-8), so zero out that noise band before taking roots
    let sqrt_rho = apply_spectral_function(rho.mat(), |l| l.max(0.0).sqrt(), 1e-14)?;
    let sqrt_sigma = apply_spectral_function(sigma.mat(), |l| l.max(0.0).sqrt(), 1e-14)?;
    let m = &sqrt_rho * &sqrt_sigma;
    // F = ‖√ρ √σ‖₁; read the singular values off the Hermitian dilation
    // [[0, m], [m†, 0]] (spectrum ±σᵢ) instead of diagonalizing m†m,
    // which would square small singular values into the round-off floor
    let d = m.rows();
    let dilation = ComplexMatrix::from_fn(2 * d, 2 * d, |r, c| {
        if r < d && c >= d {
            m[(r, c - d)]
        } else if r >= d && c < d {
            m[(c, r - d)].conj()
        } else {
            Cx::new(0.0, 0.0)
        }
    });
    let spec = eig_hermitian(&dilation)?;
    let f: f64 = spec.eigenvalues().iter().map(|l| l.abs()).sum::<f64>() * 0.5;
    Ok(f.clamp(0.0, 1.0))
}

/// Trace distance `T(rho, sigma) = (1/2) tr |rho - sigma|`, in `[0, 1]`.
pub fn trace_distance(rho: &Density, sigma: &Density) -> Result<f64> {
    let diff = rho.mat() - sigma.mat();
    let spec = eig_hermitian(&diff)?;
    let t: f64 = spec.eigenvalues().iter().map(|l| l.abs()).sum::<f64>() * 0.5;
    Ok(t.clamp(0.0, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matcore::matrix::{ComplexMatrix, Cx};

    fn cx(re: f64, im: f64) -> Cx {
        Cx::new(re, im)
    }

    #[test]
    fn metrics_on_equal_and_orthogonal_states() {
        let zero = Density::from_pure(&[cx(1.0, 0.0), cx(0.0, 0.0)]).unwrap();
        let one = Density::from_pure(&[cx(0.0, 0.0), cx(1.0, 0.0)]).unwrap();
        assert!((fidelity(&zero, &zero).unwrap() - 1.0).abs() < 1e-12);
        assert!(fidelity(&zero, &one).unwrap() < 1e-10);
        assert!(trace_distance(&zero, &zero).unwrap() < 1e-12);
        assert!((trace_distance(&zero, &one).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn fidelity_with_maximally_mixed() {
        // F(|0>, I/2) = sqrt(<0| I/2 |0>) = 1/sqrt(2)
        let zero = Density::from_pure(&[cx(1.0, 0.0), cx(0.0, 0.0)]).unwrap();
        let mixed = Density::maximally_mixed(2);
        let f = fidelity(&zero, &mixed).unwrap();
        assert!((f - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-12);
    }

    #[test]
    fn fidelity_is_symmetric_on_a_generic_pair() {
        let a = Density::new(ComplexMatrix::from_rows(vec![
            vec![cx(0.7, 0.0), cx(0.1, 0.2)],
            vec![cx(0.1, -0.2), cx(0.3, 0.0)],
        ]))
        .unwrap();
        let b = Density::new(ComplexMatrix::from_rows(vec![
            vec![cx(0.4, 0.0), cx(-0.2, 0.1)],
            vec![cx(-0.2, -0.1), cx(0.6, 0.0)],
        ]))
        .unwrap();
        let fab = fidelity(&a, &b).unwrap();
        let fba = fidelity(&b, &a).unwrap();
        assert!((fab - fba).abs() < 1e-10);
    }
}
