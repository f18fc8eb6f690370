//! Hermitian eigendecomposition via cyclic Jacobi sweeps.
//!
//! Each off-diagonal element is first realified with a diagonal phase
//! rotation and then annihilated with a real Jacobi rotation. The sweep
//! order is fixed, so the result is fully deterministic. Intended for the
//! small dimensions (≤ 64) that dominate this crate.

use crate::error::{Error, Result};
use crate::tol;

use super::matrix::{ComplexMatrix, Cx};

/// Spectral decomposition of a Hermitian matrix.
///
/// Eigenvalues are sorted descending; column `k` of [`eigenvectors`]
/// (an exactly unitary matrix up to round-off) corresponds to
/// `eigenvalues[k]`.
///
/// [`eigenvectors`]: Spectrum::eigenvectors
#[derive(Clone, Debug)]
pub struct Spectrum {
    eigenvalues: Vec<f64>,
    eigenvectors: ComplexMatrix,
}

impl Spectrum {
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn eigenvectors(&self) -> &ComplexMatrix {
        &self.eigenvectors
    }

    /// Rebuilds `sum_k f(lambda_k) |v_k><v_k|`.
    pub fn recompose_with(&self, mut f: impl FnMut(f64) -> f64) -> ComplexMatrix {
        let d = self.eigenvectors.rows();
        let mut out = ComplexMatrix::zeros(d, d);
        for (k, &l) in self.eigenvalues.iter().enumerate() {
            let fl = f(l);
            if fl == 0.0 {
                continue;
            }
            let v = self.eigenvectors.column(k);
            out.add_assign_scaled(&ComplexMatrix::outer(&v, &v), Cx::new(fl, 0.0));
        }
        out
    }

    /// Spectral projection onto eigenvalues selected by the predicate.
    pub fn projection_where(&self, mut keep: impl FnMut(f64) -> bool) -> ComplexMatrix {
        self.recompose_with(|l| if keep(l) { 1.0 } else { 0.0 })
    }
}

const MAX_SWEEPS: usize = 100;

/// Eigendecomposition of a Hermitian matrix.
///
/// Fails with [`Error::NotHermitian`] if the relative deviation from
/// Hermiticity exceeds `1e-8`.
pub fn eig_hermitian(m: &ComplexMatrix) -> Result<Spectrum> {
    if !m.is_square() {
        return Err(Error::ShapeMismatch("eigendecomposition of non-square matrix".into()));
    }
    let scale = m.frobenius_norm().max(1.0);
    let dev = m.hermitian_deviation() / scale;
    if dev > 1e-8 {
        return Err(Error::NotHermitian(dev));
    }
    let d = m.rows();
    let mut a = m.hermitize();
    let mut v = ComplexMatrix::identity(d);

    let off = |a: &ComplexMatrix| -> f64 {
        let mut s = 0.0;
        for r in 0..d {
            for c in (r + 1)..d {
                s += a[(r, c)].norm_sqr();
            }
        }
        s.sqrt()
    };

    let threshold = 1e-14 * scale;
    for _ in 0..MAX_SWEEPS {
        if off(&a) <= threshold {
            break;
        }
        for p in 0..d {
            for q in (p + 1)..d {
                let apq = a[(p, q)];
                if apq.norm() <= threshold / (d as f64) {
                    continue;
                }
                // Phase rotation making the pivot real, then a real
                // Jacobi rotation annihilating it.
                let phase = apq / apq.norm(); // e^{i phi}
                let app = a[(p, p)].re;
                let aqq = a[(q, q)].re;
                let g = apq.norm();
                let theta = 0.5 * (2.0 * g).atan2(app - aqq);
                let (c, s) = (theta.cos(), theta.sin());
                // Column update: col_p <- c*e^{...} combination. The full
                // 2x2 unitary acting on columns (p,q) is
                //   [ c*phase   -s*phase ]
                //   [ s         c        ]
                let up = Cx::new(c, 0.0) * phase;
                let uq = Cx::new(-s, 0.0) * phase;
                let sp = Cx::new(s, 0.0);
                let cq = Cx::new(c, 0.0);
                // a <- R^† a R ; v <- v R where R has columns
                // (up, uq; sp, cq) in the (p,q) plane.
                for r in 0..d {
                    let arp = a[(r, p)];
                    let arq = a[(r, q)];
                    a[(r, p)] = arp * up + arq * sp;
                    a[(r, q)] = arp * uq + arq * cq;
                }
                for cidx in 0..d {
                    let apc = a[(p, cidx)];
                    let aqc = a[(q, cidx)];
                    a[(p, cidx)] = up.conj() * apc + sp.conj() * aqc;
                    a[(q, cidx)] = uq.conj() * apc + cq.conj() * aqc;
                }
                for r in 0..d {
                    let vrp = v[(r, p)];
                    let vrq = v[(r, q)];
                    v[(r, p)] = vrp * up + vrq * sp;
                    v[(r, q)] = vrp * uq + vrq * cq;
                }
            }
        }
    }

    let mut pairs: Vec<(f64, usize)> = (0..d).map(|k| (a[(k, k)].re, k)).collect();
    // descending, with a deterministic tie-break on the original index
    pairs.sort_by(|x, y| y.0.partial_cmp(&x.0).unwrap().then(x.1.cmp(&y.1)));
    let eigenvalues: Vec<f64> = pairs.iter().map(|&(l, _)| l).collect();
    let eigenvectors =
        ComplexMatrix::from_fn(d, d, |r, c| v[(r, pairs[c].1)]);
    Ok(Spectrum { eigenvalues, eigenvectors })
}

/// Applies a scalar function to a Hermitian matrix through its spectrum.
///
/// Eigenvalues with `|lambda| <= cutoff * max|lambda|` are treated as
/// exact zeros and mapped to `zero_value` (the convention for `0 log 0`,
/// pseudo-inverses, and the like). Any *retained* eigenvalue on which `f`
/// returns a non-finite value is a [`Error::DomainError`].
pub fn apply_spectral_function(
    m: &ComplexMatrix,
    f: impl Fn(f64) -> f64,
    zero_value: f64,
) -> Result<ComplexMatrix> {
    let spec = eig_hermitian(m)?;
    let top = spec
        .eigenvalues()
        .iter()
        .map(|l| l.abs())
        .fold(0.0, f64::max);
    let cutoff = tol::EIG_ZERO_CUTOFF * top.max(1e-300);
    let d = m.rows();
    let mut out = ComplexMatrix::zeros(d, d);
    for (k, &l) in spec.eigenvalues().iter().enumerate() {
        let fl = if l.abs() <= cutoff { zero_value } else { f(l) };
        if !fl.is_finite() {
            return Err(Error::DomainError(l));
        }
        if fl == 0.0 {
            continue;
        }
        let v = spec.eigenvectors().column(k);
        out.add_assign_scaled(&ComplexMatrix::outer(&v, &v), Cx::new(fl, 0.0));
    }
    Ok(out)
}

/// Unitary `exp(i h)` of a Hermitian generator, through its spectrum.
pub fn unitary_exp_i(h: &ComplexMatrix) -> Result<ComplexMatrix> {
    let spec = eig_hermitian(h)?;
    let d = h.rows();
    let mut out = ComplexMatrix::zeros(d, d);
    for (k, &l) in spec.eigenvalues().iter().enumerate() {
        let v = spec.eigenvectors().column(k);
        out.add_assign_scaled(&ComplexMatrix::outer(&v, &v), Cx::new(0.0, l).exp());
    }
    Ok(out)
}
