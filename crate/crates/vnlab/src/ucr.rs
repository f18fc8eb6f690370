//! Entropic uncertainty-relation checkers.
//!
//! Three relations, all routed through the subalgebra-entropy and
//! square machinery: the memory-assisted relation for a pair of
//! mutually unbiased bases, the generalized Maassen–Uffink relation
//! for a commuting square of algebras with side information, and the
//! coherence relation for an unbiased basis pair.

use serde::Serialize;

use crate::algebra::VnAlgebra;
use crate::entropy::{algebra_cond_entropy, asymmetry, vn_entropy, vn_entropy_mat};
use crate::error::{Error, Result};
use crate::matcore::{partial_trace, ComplexMatrix, Density};
use crate::squares::gen_cmi;

/// Outcome of an uncertainty-relation evaluation.
///
/// `margin = lhs_bits − rhs_bits`; the relation holds iff the margin is
/// non-negative (up to the checker's tolerance).
#[derive(Clone, Debug, Serialize)]
pub struct UcrReport {
    pub relation_id: String,
    pub lhs_bits: f64,
    pub rhs_bits: f64,
    pub margin: f64,
    /// Human-readable instance descriptor (dimensions, bases).
    pub instance: String,
}

/// Verifies the columns of `x` and `z` form mutually unbiased bases:
/// every squared cross overlap must equal `1/d` within `1e-9`.
fn check_unbiased(x: &ComplexMatrix, z: &ComplexMatrix) -> Result<()> {
    let d = x.rows();
    if !x.is_square() || !z.is_square() || z.rows() != d {
        return Err(Error::ShapeMismatch("basis matrices must be square of equal size".into()));
    }
    for (u, name) in [(x, "first"), (z, "second")] {
        let gram = u.adjoint_mul(u);
        if (&gram - &ComplexMatrix::identity(d)).max_abs() > 1e-9 {
            return Err(Error::InvalidInput(format!("{name} basis is not orthonormal")));
        }
    }
    let cross = x.adjoint_mul(z);
    let mut worst = 0.0f64;
    for i in 0..d {
        for j in 0..d {
            worst = worst.max((cross[(i, j)].norm_sqr() - 1.0 / d as f64).abs());
        }
    }
    if worst > 1e-9 {
        return Err(Error::NotUnbiased(worst));
    }
    Ok(())
}

/// Memory-assisted uncertainty relation for two mutually unbiased
/// measurement bases on the first (`d`-dimensional) tensor slot:
///
/// `H(𝒳|B) + H(𝒵|B) ≥ log₂ d + H(A|B)`.
///
/// The margin coincides, as an identity, with the generalized CMI of
/// the two pinching algebras (each joined with the memory) inside the
/// joint algebra; the report's margin is asserted against that value.
pub fn memory_ucr(
    d: usize,
    rho_ab: &Density,
    x_basis: &ComplexMatrix,
    z_basis: &ComplexMatrix,
) -> Result<UcrReport> {
    check_unbiased(x_basis, z_basis)?;
    if x_basis.rows() != d {
        return Err(Error::ShapeMismatch("basis dimension != d".into()));
    }
    if rho_ab.dim() % d != 0 {
        return Err(Error::ShapeMismatch("joint dimension not divisible by d".into()));
    }
    let db = rho_ab.dim() / d;
    let x_alg = VnAlgebra::diagonal_in_basis(x_basis);
    let z_alg = VnAlgebra::diagonal_in_basis(z_basis);
    let h_x_b = algebra_cond_entropy(&x_alg, &[db], rho_ab)?.expect_finite();
    let h_z_b = algebra_cond_entropy(&z_alg, &[db], rho_ab)?.expect_finite();
    let rho_b = partial_trace(rho_ab.mat(), &[d, db], &[1])?;
    let h_a_given_b =
        vn_entropy(rho_ab).expect_finite() - vn_entropy_mat(&rho_b)?.expect_finite();
    let lhs = h_x_b + h_z_b;
    let rhs = (d as f64).log2() + h_a_given_b;
    let margin = lhs - rhs;
    // the relation reduces exactly to a generalized CMI of the lifted
    // pinching algebras; keep the identity honest
    let full_b = VnAlgebra::full(db);
    let s = VnAlgebra::tensor(&x_alg, &full_b);
    let t = VnAlgebra::tensor(&z_alg, &full_b);
    let m = VnAlgebra::full(d * db);
    let cmi = gen_cmi(&s, &t, &m, rho_ab)?.value_bits;
    debug_assert!(
        (margin - cmi).abs() <= 1e-9,
        "margin {margin} drifted from CMI {cmi}"
    );
    Ok(UcrReport {
        relation_id: "memory-ucr".into(),
        lhs_bits: lhs,
        rhs_bits: rhs,
        margin,
        instance: format!("d={d}, memory dim={db}"),
    })
}

/// Generalized Maassen–Uffink relation for a commuting square of
/// algebras `S, T` on the first tensor slot, with side systems `B`
/// (dimension `dims_bc.0`) and `C` (dimension `dims_bc.1`):
///
/// `H(E_S^c | B) + H(𝒯 | C) ≥ H(S ∩ T | C)`,
///
/// where `E_S^c` is the complementary channel of the conditional
/// expectation onto `S`.
pub fn maassen_uffink_general(
    s: &VnAlgebra,
    t: &VnAlgebra,
    dims_bc: (usize, usize),
    rho_abc: &Density,
) -> Result<UcrReport> {
    let da = s.ambient_dim();
    let (db, dc) = dims_bc;
    if t.ambient_dim() != da {
        return Err(Error::ShapeMismatch("algebras live on different systems".into()));
    }
    if rho_abc.dim() != da * db * dc {
        return Err(Error::ShapeMismatch("joint state dimension mismatch".into()));
    }
    let square = VnAlgebra::classify_square(s, t, &VnAlgebra::join(s, t))?;
    if !square.is_commuting() {
        return Err(Error::NotCommutingSquare(square.commuting_residual()));
    }
    let dims = [da, db, dc];
    let rho_ab = Density::new_renormalized(partial_trace(rho_abc.mat(), &dims, &[0, 1])?)?;
    let rho_ac = Density::new_renormalized(partial_trace(rho_abc.mat(), &dims, &[0, 2])?)?;
    // complement output conditioned on B
    let comp = s.complement_apply(&rho_ab, &[db])?;
    let env = comp.dim() / db;
    let comp_b = partial_trace(comp.mat(), &[env, db], &[1])?;
    let h_comp_b =
        vn_entropy(&comp).expect_finite() - vn_entropy_mat(&comp_b)?.expect_finite();
    let h_t_c = algebra_cond_entropy(t, &[dc], &rho_ac)?.expect_finite();
    let meet = VnAlgebra::intersect(s, t);
    let rhs = algebra_cond_entropy(&meet, &[dc], &rho_ac)?.expect_finite();
    let lhs = h_comp_b + h_t_c;
    Ok(UcrReport {
        relation_id: "maassen-uffink-general".into(),
        lhs_bits: lhs,
        rhs_bits: rhs,
        margin: lhs - rhs,
        instance: format!("dA={da}, dB={db}, dC={dc}, meet dim={}", meet.dim()),
    })
}

/// Coherence uncertainty relation for a mutually unbiased basis pair:
///
/// `C_r^𝒳(ρ) + C_r^𝒵(ρ) ≥ I(𝒳 : 𝒵)`,
///
/// with the relative entropy of coherence computed as the basis
/// asymmetry at order 1 and the right-hand side the generalized CMI of
/// the two pinching algebras in the full matrix algebra.
pub fn coherence_ucr(
    x_basis: &ComplexMatrix,
    z_basis: &ComplexMatrix,
    rho: &Density,
) -> Result<UcrReport> {
    check_unbiased(x_basis, z_basis)?;
    let d = x_basis.rows();
    if rho.dim() != d {
        return Err(Error::ShapeMismatch("state dimension != basis dimension".into()));
    }
    let x_alg = VnAlgebra::diagonal_in_basis(x_basis);
    let z_alg = VnAlgebra::diagonal_in_basis(z_basis);
    let c_x = asymmetry(&x_alg, rho, 1.0, 0)?.expect_finite();
    let c_z = asymmetry(&z_alg, rho, 1.0, 0)?.expect_finite();
    let rhs = gen_cmi(&x_alg, &z_alg, &VnAlgebra::full(d), rho)?.value_bits;
    let lhs = c_x + c_z;
    Ok(UcrReport {
        relation_id: "coherence-ucr".into(),
        lhs_bits: lhs,
        rhs_bits: rhs,
        margin: lhs - rhs,
        instance: format!("d={d}"),
    })
}
