//! The square functional and generalized conditional mutual information.
//!
//! For subalgebras `C ⊆ A∩B ⊆ A,B ⊆ M` the square functional is
//! `I = H(A) + H(B) − H(M) − H(C)` (all subalgebra entropies of the same
//! state). When `(S, T ⊆ M)` is a commuting square this is the
//! generalized conditional mutual information, guaranteed non-negative;
//! [`gen_cmi`] enforces the commuting-square precondition and
//! [`square_info`] is the raw escape hatch. The module also houses the
//! chain rule, the Petz recovery-gap refinement, a witness search for the
//! converse direction, and the commutant duality check.

use serde::Serialize;

use crate::algebra::{Square, VnAlgebra};
use crate::error::{Error, Result};
use crate::matcore::{
    apply_spectral_function, derive_seed, eig_hermitian, fidelity, ComplexMatrix, Cx, Density,
};
use crate::tol;

/// Evaluation record of the square functional on one state.
#[derive(Clone, Debug, Serialize)]
pub struct SquareReport {
    /// `h_a + h_b − h_m − h_c` in bits.
    pub value_bits: f64,
    pub h_a: f64,
    pub h_b: f64,
    pub h_m: f64,
    pub h_c: f64,
    /// Commuting-square flag of the evaluated quadruple; `None` for raw
    /// evaluations that never classified the square.
    pub is_commuting: Option<bool>,
    pub is_co_commuting: Option<bool>,
    /// SHA-256 digest of the evaluated state.
    pub state_digest: String,
    /// Set when evaluated through [`gen_cmi`]: `value ≥ −tolerance`.
    pub nonneg_ok: Option<bool>,
    /// Petz recovery-map lower bound, when computed.
    pub recovery_gap: Option<f64>,
    /// Tolerance the flags were decided at.
    pub tolerance: f64,
}

/// Entropy in bits of a Hermitian PSD unit-trace matrix (conditional
/// expectations of densities), without the full density revalidation.
fn entropy_of(mat: &ComplexMatrix) -> f64 {
    let spec = eig_hermitian(&mat.hermitize()).expect("symmetrized input");
    let top = spec.eigenvalues().first().copied().unwrap_or(0.0);
    let cutoff = tol::EIG_ZERO_CUTOFF * top.max(1e-300);
    spec.eigenvalues()
        .iter()
        .filter(|&&l| l > cutoff)
        .map(|&l| -l * l.log2())
        .sum::<f64>()
        .max(0.0)
}

fn four_terms(
    a: &VnAlgebra,
    b: &VnAlgebra,
    m: &VnAlgebra,
    c: &VnAlgebra,
    rho: &Density,
) -> (f64, f64, f64, f64) {
    (
        entropy_of(&a.cond_expectation(rho.mat())),
        entropy_of(&b.cond_expectation(rho.mat())),
        entropy_of(&m.cond_expectation(rho.mat())),
        entropy_of(&c.cond_expectation(rho.mat())),
    )
}

/// Raw square functional `I[A M; C B] = H(A) + H(B) − H(M) − H(C)`.
///
/// Requires the nesting `c ⊆ a ∩ b` and `a, b ⊆ m` but makes no
/// commuting-square demand; the value carries no sign guarantee.
pub fn square_info(
    a: &VnAlgebra,
    m: &VnAlgebra,
    c: &VnAlgebra,
    b: &VnAlgebra,
    rho: &Density,
) -> Result<SquareReport> {
    if !a.is_subalgebra_of(m) || !b.is_subalgebra_of(m) {
        return Err(Error::NotNested("a, b must sit inside m".into()));
    }
    if !c.is_subalgebra_of(a) || !c.is_subalgebra_of(b) {
        return Err(Error::NotNested("c must sit inside a ∩ b".into()));
    }
    if rho.dim() != m.ambient_dim() {
        return Err(Error::ShapeMismatch("state dimension != ambient dimension".into()));
    }
    let (h_a, h_b, h_m, h_c) = four_terms(a, b, m, c, rho);
    Ok(SquareReport {
        value_bits: h_a + h_b - h_m - h_c,
        h_a,
        h_b,
        h_m,
        h_c,
        is_commuting: None,
        is_co_commuting: None,
        state_digest: rho.digest(),
        nonneg_ok: None,
        recovery_gap: None,
        tolerance: tol::SQUARE_TOL,
    })
}

/// Generalized conditional mutual information `I(S : T ⊆ M)` on an
/// already classified commuting square (fast path for scans).
pub fn gen_cmi_classified(square: &Square, rho: &Density) -> Result<SquareReport> {
    if !square.is_commuting() {
        return Err(Error::NotCommutingSquare(square.commuting_residual()));
    }
    if rho.dim() != square.m().ambient_dim() {
        return Err(Error::ShapeMismatch("state dimension != ambient dimension".into()));
    }
    let (h_a, h_b, h_m, h_c) = four_terms(square.s(), square.t(), square.m(), square.c(), rho);
    let value_bits = h_a + h_b - h_m - h_c;
    Ok(SquareReport {
        value_bits,
        h_a,
        h_b,
        h_m,
        h_c,
        is_commuting: Some(true),
        is_co_commuting: Some(square.is_co_commuting()),
        state_digest: rho.digest(),
        nonneg_ok: Some(value_bits >= -1e-9),
        recovery_gap: None,
        tolerance: tol::SQUARE_TOL,
    })
}

/// Generalized conditional mutual information `I(S : T ⊆ within)` with
/// `C = S ∩ T`, refusing non-commuting squares (use [`square_info`] for
/// a raw evaluation).
pub fn gen_cmi(
    s: &VnAlgebra,
    t: &VnAlgebra,
    within: &VnAlgebra,
    rho: &Density,
) -> Result<SquareReport> {
    let square = VnAlgebra::classify_square(s, t, within)?;
    gen_cmi_classified(&square, rho)
}

/// Chain rule: splits `I[A M; C B]` across a middle pair `(mid_c,
/// mid_b)` playing the `(C, B)` role in the upper square and the
/// `(A, M)` role in the lower one. The two returned values sum to the
/// original functional exactly; if the lower square is commuting, the
/// upper value is a lower bound on the total.
pub fn chain_rule(
    a: &VnAlgebra,
    m: &VnAlgebra,
    c: &VnAlgebra,
    b: &VnAlgebra,
    mid_c: &VnAlgebra,
    mid_b: &VnAlgebra,
    rho: &Density,
) -> Result<(SquareReport, SquareReport)> {
    if !mid_c.is_subalgebra_of(m) || !mid_b.is_subalgebra_of(m) {
        return Err(Error::NotNested("middle algebras must sit inside m".into()));
    }
    // the outer nesting is validated by the plain evaluations below
    square_info(a, m, c, b, rho)?;
    let (h_a, h_sb, h_m, h_sc) = four_terms(a, mid_b, m, mid_c, rho);
    let (h_sc2, h_b, h_sb2, h_c) = four_terms(mid_c, b, mid_b, c, rho);
    let upper = SquareReport {
        value_bits: h_a + h_sb - h_m - h_sc,
        h_a,
        h_b: h_sb,
        h_m,
        h_c: h_sc,
        is_commuting: None,
        is_co_commuting: None,
        state_digest: rho.digest(),
        nonneg_ok: None,
        recovery_gap: None,
        tolerance: tol::SQUARE_TOL,
    };
    let lower = SquareReport {
        value_bits: h_sc2 + h_b - h_sb2 - h_c,
        h_a: h_sc2,
        h_b,
        h_m: h_sb2,
        h_c,
        is_commuting: None,
        is_co_commuting: None,
        state_digest: rho.digest(),
        nonneg_ok: None,
        recovery_gap: None,
        tolerance: tol::SQUARE_TOL,
    };
    Ok((upper, lower))
}

fn recovery_gap_roles(square: &Square, rho: &Density, swapped: bool) -> Result<f64> {
    if !square.is_commuting() {
        return Err(Error::NotCommutingSquare(square.commuting_residual()));
    }
    let (s, t) = if swapped {
        (square.t(), square.s())
    } else {
        (square.s(), square.t())
    };
    let rho_bar = Density::new_renormalized(square.m().cond_expectation(rho.mat()))?;
    let sigma_s = s.cond_expectation(rho_bar.mat());
    let e_c = t.cond_expectation(&sigma_s); // = E_{S∩T}(rho_bar)
    let inv_sqrt_c = apply_spectral_function(&e_c, |l| l.max(0.0).powf(-0.5), 0.0)?;
    let sqrt_s = apply_spectral_function(&sigma_s, |l| l.max(0.0).sqrt(), 0.0)?;
    let e_t = t.cond_expectation(rho_bar.mat());
    let mid = t.cond_expectation(&inv_sqrt_c.matmul(&e_t).matmul(&inv_sqrt_c));
    let recovered = Density::new_renormalized(sqrt_s.matmul(&mid).matmul(&sqrt_s))?;
    let f = fidelity(&rho_bar, &recovered)?;
    Ok((-2.0 * f.max(1e-300).log2()).max(0.0))
}

/// Petz recovery lower bound on the generalized CMI:
/// `−2 log₂ F(ρ̄, R_{E_S(ρ̄), E_T} ∘ E_T(ρ̄))` with `ρ̄ = E_M(ρ)`.
pub fn recovery_gap(square: &Square, rho: &Density) -> Result<f64> {
    recovery_gap_roles(square, rho, false)
}

/// Same bound with the roles of `S` and `T` exchanged.
pub fn recovery_gap_swapped(square: &Square, rho: &Density) -> Result<f64> {
    recovery_gap_roles(square, rho, true)
}

/// Hunts for a density making the square functional negative.
///
/// Returns `(false, None)` immediately on commuting squares (no witness
/// exists). Otherwise runs a budgeted multi-start Nelder–Mead search
/// over pure states and reports a witness whenever the best value drops
/// below `−1e-6`.
pub fn ssa_converse_search(
    s: &VnAlgebra,
    t: &VnAlgebra,
    within: &VnAlgebra,
    budget: usize,
    seed: u64,
) -> Result<(bool, Option<Density>)> {
    let square = VnAlgebra::classify_square(s, t, within)?;
    if square.is_commuting() {
        return Ok((false, None));
    }
    let d = within.ambient_dim();
    let (a, b, m, c) = (square.s(), square.t(), square.m(), square.c());
    let evals = std::cell::Cell::new(0usize);
    let state_of = |params: &[f64]| -> Option<Density> {
        let v: Vec<Cx> = (0..d)
            .map(|k| Cx::new(params[2 * k], params[2 * k + 1]))
            .collect();
        Density::from_pure(&v).ok()
    };
    let objective = |params: &[f64]| -> f64 {
        evals.set(evals.get() + 1);
        match state_of(params) {
            Some(rho) => {
                let (h_a, h_b, h_m, h_c) = four_terms(a, b, m, c, &rho);
                h_a + h_b - h_m - h_c
            }
            None => f64::INFINITY,
        }
    };
    let restarts = 8;
    let iters = (budget / (restarts * 2)).max(20);
    let mut best_val = f64::INFINITY;
    let mut best_x: Option<Vec<f64>> = None;
    for r in 0..restarts {
        if evals.get() >= budget {
            break;
        }
        let psi = crate::matcore::sample_pure_vector(d, derive_seed(seed, r as u64));
        let x0: Vec<f64> = psi.iter().flat_map(|z| [z.re, z.im]).collect();
        let mut f = |p: &[f64]| objective(p);
        let (x, v) = crate::opt::nelder_mead(&mut f, &x0, 0.3, iters);
        if v < best_val {
            best_val = v;
            best_x = Some(x);
        }
    }
    if best_val < -1e-6 {
        let witness = best_x.and_then(|x| state_of(&x));
        Ok((witness.is_some(), witness))
    } else {
        Ok((false, None))
    }
}

/// Commutant duality for commuting + co-commuting squares in a factor:
/// evaluates `I(S : T ⊆ ST)` on `E_{ST}(ψ)` against
/// `I(S′ : T′ ⊆ S′T′)` on the pure `ψ` itself and returns both sides.
pub fn duality_check(
    s: &VnAlgebra,
    t: &VnAlgebra,
    within: &VnAlgebra,
    psi: &Density,
) -> Result<(f64, f64)> {
    let center = within.center()?;
    if center.dim() != 1 {
        return Err(Error::NotFactor(center.dim()));
    }
    let square = VnAlgebra::classify_square(s, t, within)?;
    if !square.is_commuting() {
        return Err(Error::NotCommutingSquare(square.commuting_residual()));
    }
    if !square.is_co_commuting() {
        return Err(Error::NotCoCommuting(square.co_commuting_residual()));
    }
    if !psi.is_pure(1e-8) {
        return Err(Error::InvalidInput("duality check needs a pure state".into()));
    }
    let st = VnAlgebra::join(s, t);
    let rho_bar = Density::new_renormalized(st.cond_expectation(psi.mat()))?;
    let lhs = gen_cmi(s, t, &st, &rho_bar)?.value_bits;
    let sp = s.commutant(within)?;
    let tp = t.commutant(within)?;
    let stp = VnAlgebra::join(&sp, &tp);
    let rhs = gen_cmi(&sp, &tp, &stp, psi)?.value_bits;
    Ok((lhs, rhs))
}

/// Deterministic commuting-square generator for scans: tensor splits,
/// mutually unbiased diagonal pairs (prime dimensions), diagonal /
/// trivial pairs and nested full/diagonal pairs, optionally relabeled
/// by a Haar unitary. Every returned square is verified commuting.
pub fn sample_commuting_square(dim: usize, seed: u64) -> Result<Square> {
    use rand::Rng;
    use rand::SeedableRng;
    if dim < 2 {
        return Err(Error::InvalidInput("need dimension ≥ 2".into()));
    }
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(derive_seed(seed, 0x5A_C0DE));
    let divisors: Vec<usize> = (2..dim).filter(|a| dim % a == 0).collect();
    let prime = crate::scenarios::is_prime(dim);
    let (s, t) = loop {
        match rng.gen_range(0..4u32) {
            0 if !divisors.is_empty() => {
                let a = divisors[rng.gen_range(0..divisors.len())];
                let b = dim / a;
                break (
                    VnAlgebra::tensor(&VnAlgebra::full(a), &VnAlgebra::trivial(b)),
                    VnAlgebra::tensor(&VnAlgebra::trivial(a), &VnAlgebra::full(b)),
                );
            }
            1 if prime => {
                let fam = crate::scenarios::mub_family(dim)?;
                let i = rng.gen_range(0..fam.len());
                let j = (i + 1 + rng.gen_range(0..fam.len() - 1)) % fam.len();
                break (
                    VnAlgebra::diagonal_in_basis(fam.basis(i)),
                    VnAlgebra::diagonal_in_basis(fam.basis(j)),
                );
            }
            2 => break (VnAlgebra::diagonal(dim), VnAlgebra::trivial(dim)),
            3 => break (VnAlgebra::full(dim), VnAlgebra::diagonal(dim)),
            _ => continue,
        }
    };
    let (s, t) = if rng.gen_bool(0.5) {
        let u = crate::matcore::sample_haar_unitary(dim, derive_seed(seed, 0x0A11));
        (s.conjugated(&u), t.conjugated(&u))
    } else {
        (s, t)
    };
    let square = VnAlgebra::classify_square(&s, &t, &VnAlgebra::join(&s, &t))?;
    if !square.is_commuting() {
        return Err(Error::NotCommutingSquare(square.commuting_residual()));
    }
    Ok(square)
}

/// Deterministic commuting *and* co-commuting square inside the full
/// factor `M_{a·b}`: a Haar-relabeled tensor split, suitable for the
/// commutant duality check.
pub fn sample_cocommuting_factor_square(a: usize, b: usize, seed: u64) -> Result<Square> {
    if a < 2 || b < 2 {
        return Err(Error::InvalidInput("need both tensor factors ≥ 2".into()));
    }
    let dim = a * b;
    let s = VnAlgebra::tensor(&VnAlgebra::full(a), &VnAlgebra::trivial(b));
    let t = VnAlgebra::tensor(&VnAlgebra::trivial(a), &VnAlgebra::full(b));
    let u = crate::matcore::sample_haar_unitary(dim, derive_seed(seed, 0xD0A1));
    let square = VnAlgebra::classify_square(
        &s.conjugated(&u),
        &t.conjugated(&u),
        &VnAlgebra::full(dim),
    )?;
    if !square.is_commuting() || !square.is_co_commuting() {
        return Err(Error::ConstraintViolated("tensor split failed to classify".into()));
    }
    Ok(square)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matcore::{sample_density, sample_pure, tensor};

    fn up_y() -> Density {
        // +1 eigenstate of Pauli Y
        let s = std::f64::consts::FRAC_1_SQRT_2;
        Density::from_pure(&[Cx::new(s, 0.0), Cx::new(0.0, s)]).unwrap()
    }

    #[test]
    fn scan_samplers_produce_valid_squares() {
        for d in 2..=6usize {
            for k in 0..6u64 {
                let sq = sample_commuting_square(d, 100 * d as u64 + k).unwrap();
                assert!(sq.is_commuting());
                let rho = sample_density(d, d, 999 + k).unwrap();
                let rep = gen_cmi_classified(&sq, &rho).unwrap();
                assert!(rep.value_bits >= -1e-9);
            }
        }
        let sq = sample_cocommuting_factor_square(2, 3, 5).unwrap();
        assert!(sq.is_commuting() && sq.is_co_commuting());
        let psi = sample_pure(6, 7).unwrap();
        let (lhs, rhs) = duality_check(sq.s(), sq.t(), sq.m(), &psi).unwrap();
        assert!((lhs - rhs).abs() < 1e-7);
    }

    fn ghz() -> Density {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let mut v = vec![Cx::new(0.0, 0.0); 8];
        v[0] = Cx::new(s, 0.0);
        v[7] = Cx::new(s, 0.0);
        Density::from_pure(&v).unwrap()
    }

    fn slot_algebra(full_slots: &[bool]) -> VnAlgebra {
        let mut out = if full_slots[0] { VnAlgebra::full(2) } else { VnAlgebra::trivial(2) };
        for &f in &full_slots[1..] {
            let next = if f { VnAlgebra::full(2) } else { VnAlgebra::trivial(2) };
            out = VnAlgebra::tensor(&out, &next);
        }
        out
    }

    #[test]
    fn square_info_degenerate_and_mub_cases() {
        let m = VnAlgebra::full(2);
        let rho = sample_density(2, 2, 1).unwrap();
        let zero = square_info(&m, &m, &m, &m, &rho).unwrap();
        assert!(zero.value_bits.abs() < 1e-10);

        let x = VnAlgebra::by_name("pauli:X").unwrap();
        let z = VnAlgebra::by_name("pauli:Z").unwrap();
        let c = VnAlgebra::trivial(2);
        let r = square_info(&x, &m, &c, &z, &up_y()).unwrap();
        assert!((r.value_bits - 1.0).abs() < 1e-9);
    }

    #[test]
    fn ghz_tripartite_cmi_is_one_bit() {
        let ac = slot_algebra(&[true, false, true]);
        let bc = slot_algebra(&[false, true, true]);
        let m = VnAlgebra::full(8);
        let r = gen_cmi(&ac, &bc, &m, &ghz()).unwrap();
        assert!((r.value_bits - 1.0).abs() < 1e-9, "got {}", r.value_bits);
        assert_eq!(r.nonneg_ok, Some(true));
    }

    #[test]
    fn classical_mutual_information_case() {
        // I(A : B ⊆ AB) on the perfectly correlated classical state
        let mut m = ComplexMatrix::zeros(4, 4);
        m[(0, 0)] = Cx::new(0.5, 0.0);
        m[(3, 3)] = Cx::new(0.5, 0.0);
        let rho = Density::new(m).unwrap();
        let a = slot_algebra(&[true, false]);
        let b = slot_algebra(&[false, true]);
        let r = gen_cmi(&a, &b, &VnAlgebra::full(4), &rho).unwrap();
        assert!((r.value_bits - 1.0).abs() < 1e-9);
        // completely mixed state: zero
        let mixed = Density::maximally_mixed(4);
        let r0 = gen_cmi(&a, &b, &VnAlgebra::full(4), &mixed).unwrap();
        assert!(r0.value_bits.abs() < 1e-9);
    }

    #[test]
    fn gen_cmi_refuses_non_commuting_squares() {
        let z = VnAlgebra::by_name("pauli:Z").unwrap();
        let th = std::f64::consts::PI / 6.0;
        let u = ComplexMatrix::from_rows(vec![
            vec![Cx::new(th.cos(), 0.0), Cx::new(-th.sin(), 0.0)],
            vec![Cx::new(th.sin(), 0.0), Cx::new(th.cos(), 0.0)],
        ]);
        let rot = VnAlgebra::diagonal_in_basis(&u);
        let rho = sample_density(2, 2, 3).unwrap();
        assert!(matches!(
            gen_cmi(&z, &rot, &VnAlgebra::full(2), &rho),
            Err(Error::NotCommutingSquare(_))
        ));
    }

    #[test]
    fn chain_rule_is_exact_and_degenerates() {
        let a = slot_algebra(&[true, false, false]);
        let m = VnAlgebra::full(8);
        let c = VnAlgebra::trivial(8);
        let b = slot_algebra(&[false, true, true]);
        let mid_c = VnAlgebra::trivial(8);
        let mid_b = slot_algebra(&[false, false, true]);
        let rho = sample_density(8, 8, 5).unwrap();
        let total = square_info(&a, &m, &c, &b, &rho).unwrap().value_bits;
        let (upper, lower) = chain_rule(&a, &m, &c, &b, &mid_c, &mid_b, &rho).unwrap();
        assert!((upper.value_bits + lower.value_bits - total).abs() < 1e-10);
        // degenerate middle: lower square collapses to zero
        let (u2, l2) = chain_rule(&a, &m, &c, &b, &c, &b, &rho).unwrap();
        assert!(l2.value_bits.abs() < 1e-12);
        assert!((u2.value_bits - total).abs() < 1e-12);
    }

    #[test]
    fn recovery_gap_bounds_cmi() {
        // product Markov state: both the CMI and the gap vanish
        let a = slot_algebra(&[true, false]);
        let b = slot_algebra(&[false, true]);
        let sq = VnAlgebra::classify_square(&a, &b, &VnAlgebra::full(4)).unwrap();
        let prod = Density::new(tensor(
            sample_density(2, 2, 7).unwrap().mat(),
            sample_density(2, 2, 8).unwrap().mat(),
        ))
        .unwrap();
        let gap = recovery_gap(&sq, &prod).unwrap();
        let cmi = gen_cmi_classified(&sq, &prod).unwrap().value_bits;
        assert!(cmi.abs() < 1e-8);
        assert!(gap <= 1e-8, "gap {gap}");
        // random states on a MUB square: gap lower-bounds the CMI
        let x = VnAlgebra::by_name("pauli:X").unwrap();
        let z = VnAlgebra::by_name("pauli:Z").unwrap();
        let sq2 = VnAlgebra::classify_square(&x, &z, &VnAlgebra::full(2)).unwrap();
        for k in 0..40 {
            let rho = sample_density(2, 2, 600 + k).unwrap();
            let cmi = gen_cmi_classified(&sq2, &rho).unwrap().value_bits;
            let g1 = recovery_gap(&sq2, &rho).unwrap();
            let g2 = recovery_gap_swapped(&sq2, &rho).unwrap();
            assert!(cmi >= g1 - 1e-8, "cmi {cmi} < gap {g1}");
            assert!(cmi >= g2 - 1e-8, "cmi {cmi} < swapped gap {g2}");
        }
    }

    #[test]
    fn converse_search_finds_witness_for_rotated_basis() {
        let z = VnAlgebra::by_name("pauli:Z").unwrap();
        let th = std::f64::consts::PI / 6.0;
        let u = ComplexMatrix::from_rows(vec![
            vec![Cx::new(th.cos(), 0.0), Cx::new(-th.sin(), 0.0)],
            vec![Cx::new(th.sin(), 0.0), Cx::new(th.cos(), 0.0)],
        ]);
        let rot = VnAlgebra::diagonal_in_basis(&u);
        let m = VnAlgebra::full(2);
        let (found, witness) = ssa_converse_search(&z, &rot, &m, 10_000, 17).unwrap();
        assert!(found);
        let w = witness.unwrap();
        let c = VnAlgebra::intersect(&z, &rot);
        let val = square_info(&z, &m, &c, &rot, &w).unwrap().value_bits;
        assert!(val < -1e-3, "witness value {val}");
        // commuting square: no witness by construction
        let x = VnAlgebra::by_name("pauli:X").unwrap();
        let (found2, _) = ssa_converse_search(&x, &z, &m, 1000, 17).unwrap();
        assert!(!found2);
    }

    #[test]
    fn duality_on_ghz_gives_one_bit_both_sides() {
        let a = slot_algebra(&[true, false, false]);
        let b = slot_algebra(&[false, true, false]);
        let m = VnAlgebra::full(8);
        let (lhs, rhs) = duality_check(&a, &b, &m, &ghz()).unwrap();
        assert!((lhs - 1.0).abs() < 1e-8, "lhs {lhs}");
        assert!((rhs - 1.0).abs() < 1e-8, "rhs {rhs}");
    }

    #[test]
    fn duality_on_random_bipartite_pure_state() {
        let a = slot_algebra(&[true, false]);
        let b = slot_algebra(&[false, true]);
        let m = VnAlgebra::full(4);
        let psi = sample_pure(4, 23).unwrap();
        let (lhs, rhs) = duality_check(&a, &b, &m, &psi).unwrap();
        assert!((lhs - rhs).abs() < 1e-7, "lhs {lhs} rhs {rhs}");
    }
}
