//! Quantum channels, Petz recovery, and the free-operation machinery of
//! the bipartite-subalgebra resource theory.
//!
//! A channel is a completely positive trace-preserving map in Kraus
//! form. On top of that sit the resource-theory predicates (bimodule,
//! preservation of a subalgebra's marginal), the Petz recovery map, the
//! validated plan builder for individual operations of one party,
//! covariant averaging with algebra replacement, and picture swaps.

use serde::{Deserialize, Serialize};

use crate::algebra::{Square, VnAlgebra};
use crate::error::{Error, Result};
use crate::matcore::{
    apply_spectral_function, derive_seed, eig_hermitian, tensor, unitary_exp_i, ComplexMatrix, Cx,
    Density,
};

const CHANNEL_TOL: f64 = 1e-9;

/// Completely positive trace-preserving map in Kraus form.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(try_from = "ChannelWire", into = "ChannelWire")]
pub struct Channel {
    kraus: Vec<ComplexMatrix>,
    in_dim: usize,
    out_dim: usize,
}

#[derive(Serialize, Deserialize)]
struct ChannelWire {
    kraus: Vec<ComplexMatrix>,
}

impl From<Channel> for ChannelWire {
    fn from(c: Channel) -> Self {
        ChannelWire { kraus: c.kraus }
    }
}

impl TryFrom<ChannelWire> for Channel {
    type Error = Error;
    fn try_from(w: ChannelWire) -> Result<Self> {
        Channel::new(w.kraus)
    }
}

impl Channel {
    /// Builds a channel from Kraus operators, checking the
    /// trace-preservation identity `Σ K†K = I`.
    pub fn new(kraus: Vec<ComplexMatrix>) -> Result<Self> {
        let first = kraus
            .first()
            .ok_or_else(|| Error::InvalidInput("empty Kraus list".into()))?;
        let (out_dim, in_dim) = (first.rows(), first.cols());
        let mut sum = ComplexMatrix::zeros(in_dim, in_dim);
        for k in &kraus {
            if k.rows() != out_dim || k.cols() != in_dim {
                return Err(Error::ShapeMismatch("inconsistent Kraus shapes".into()));
            }
            sum = &sum + &k.adjoint_mul(k);
        }
        let dev = (&sum - &ComplexMatrix::identity(in_dim)).max_abs();
        if dev > CHANNEL_TOL {
            return Err(Error::InvalidInput(format!(
                "Kraus operators are not trace-preserving (deviation {dev:.3e})"
            )));
        }
        Ok(Channel { kraus, in_dim, out_dim })
    }

    pub fn identity(d: usize) -> Self {
        Channel { kraus: vec![ComplexMatrix::identity(d)], in_dim: d, out_dim: d }
    }

    /// Conjugation `ρ → UρU†` by a unitary (or isometry).
    pub fn from_unitary(u: &ComplexMatrix) -> Result<Self> {
        let dev = (&u.adjoint_mul(u) - &ComplexMatrix::identity(u.cols())).max_abs();
        if dev > CHANNEL_TOL {
            return Err(Error::InvalidInput(format!(
                "matrix is not an isometry (deviation {dev:.3e})"
            )));
        }
        Ok(Channel { kraus: vec![u.clone()], in_dim: u.cols(), out_dim: u.rows() })
    }

    /// Mixture of unitary conjugations with the given weights.
    pub fn mixed_unitary(terms: &[(f64, ComplexMatrix)]) -> Result<Self> {
        let total: f64 = terms.iter().map(|(w, _)| *w).sum();
        if terms.iter().any(|(w, _)| *w < -1e-12) || (total - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidInput("weights are not a probability vector".into()));
        }
        let kraus = terms
            .iter()
            .filter(|(w, _)| *w > 0.0)
            .map(|(w, u)| u.scale_re(w.sqrt()))
            .collect();
        Channel::new(kraus)
    }

    /// The conditional expectation onto `n` as a channel (Kraus form
    /// extracted from its minimal Stinespring dilation).
    pub fn cond_expectation(n: &VnAlgebra) -> Result<Self> {
        let v = n.stinespring()?;
        let d = n.ambient_dim();
        let env = v.rows() / d;
        let kraus = (0..env)
            .map(|e| ComplexMatrix::from_fn(d, d, |i, j| v[(i * env + e, j)]))
            .collect();
        Channel::new(kraus)
    }

    /// The complementary channel of the conditional expectation onto `n`
    /// (system traced out of the Stinespring dilation instead of the
    /// environment).
    pub fn complement_of(n: &VnAlgebra) -> Result<Self> {
        let v = n.stinespring()?;
        let d = n.ambient_dim();
        let env = v.rows() / d;
        let kraus = (0..d)
            .map(|i| ComplexMatrix::from_fn(env, d, |e, j| v[(i * env + e, j)]))
            .collect();
        Channel::new(kraus)
    }

    pub fn in_dim(&self) -> usize {
        self.in_dim
    }

    pub fn out_dim(&self) -> usize {
        self.out_dim
    }

    pub fn kraus(&self) -> &[ComplexMatrix] {
        &self.kraus
    }

    /// `Φ(x) = Σ K x K†` on an arbitrary operator.
    pub fn apply_mat(&self, x: &ComplexMatrix) -> ComplexMatrix {
        let mut out = ComplexMatrix::zeros(self.out_dim, self.out_dim);
        for k in &self.kraus {
            out = &out + &k.matmul(x).matmul(&k.adjoint());
        }
        out
    }

    pub fn apply(&self, rho: &Density) -> Result<Density> {
        Density::new_renormalized(self.apply_mat(rho.mat()))
    }

    /// Adjoint (Heisenberg picture) action `Φ†(x) = Σ K† x K`.
    pub fn adjoint_apply(&self, x: &ComplexMatrix) -> ComplexMatrix {
        let mut out = ComplexMatrix::zeros(self.in_dim, self.in_dim);
        for k in &self.kraus {
            out = &out + &k.adjoint().matmul(x).matmul(k);
        }
        out
    }

    /// `self ∘ other` in composition order (other acts first).
    pub fn compose(&self, other: &Channel) -> Result<Channel> {
        if self.in_dim != other.out_dim {
            return Err(Error::ShapeMismatch("composition dimension mismatch".into()));
        }
        let kraus = self
            .kraus
            .iter()
            .flat_map(|a| other.kraus.iter().map(move |b| a.matmul(b)))
            .collect();
        Channel::new(kraus)
    }

    /// Choi matrix `Σ_{ij} |i⟩⟨j| ⊗ Φ(|i⟩⟨j|)`.
    pub fn choi(&self) -> ComplexMatrix {
        let (din, dout) = (self.in_dim, self.out_dim);
        let mut c = ComplexMatrix::zeros(din * dout, din * dout);
        for k in &self.kraus {
            // vec(K) ⊗ vec(K)† with the (i, out-row) grouping
            let mut v = vec![Cx::new(0.0, 0.0); din * dout];
            for i in 0..din {
                for r in 0..dout {
                    v[i * dout + r] = k[(r, i)];
                }
            }
            c.add_assign_scaled(&ComplexMatrix::outer(&v, &v), Cx::new(1.0, 0.0));
        }
        c
    }

    /// Canonical channel equality: Choi matrices within `1e-9` in
    /// Frobenius norm.
    pub fn choi_distance(&self, other: &Channel) -> f64 {
        (&self.choi() - &other.choi()).frobenius_norm()
    }

    pub fn same_channel(&self, other: &Channel) -> bool {
        self.in_dim == other.in_dim
            && self.out_dim == other.out_dim
            && self.choi_distance(other) <= CHANNEL_TOL
    }
}

/// Checks the bimodule identity `a Φ†(b) c = Φ†(a b c)` for `a, c` over
/// a basis of `n` and `b` over a basis of `m`. A passing channel also
/// commutes with the conditional expectation onto `n` as a superoperator
/// (asserted on an operator basis).
pub fn is_bimodule(phi: &Channel, n: &VnAlgebra, m: &VnAlgebra) -> Result<bool> {
    let d = m.ambient_dim();
    if phi.in_dim() != d || phi.out_dim() != d || n.ambient_dim() != d {
        return Err(Error::ShapeMismatch("channel must act on m's ambient space".into()));
    }
    let adjoints: Vec<ComplexMatrix> = m.basis().iter().map(|b| phi.adjoint_apply(b)).collect();
    for a in n.basis() {
        for c in n.basis() {
            for (b, phib) in m.basis().iter().zip(&adjoints) {
                let lhs = a.matmul(phib).matmul(c);
                let rhs = phi.adjoint_apply(&a.matmul(b).matmul(c));
                if (&lhs - &rhs).max_abs() > CHANNEL_TOL {
                    return Ok(false);
                }
            }
        }
    }
    // consequence of the bimodule identity: Φ commutes with E_N
    let mut worst = 0.0f64;
    for i in 0..d {
        for j in 0..d {
            let mut e = ComplexMatrix::zeros(d, d);
            e[(i, j)] = Cx::new(1.0, 0.0);
            let dev = (&phi.apply_mat(&n.cond_expectation(&e))
                - &n.cond_expectation(&phi.apply_mat(&e)))
                .max_abs();
            worst = worst.max(dev);
        }
    }
    assert!(
        worst <= 1e-7,
        "bimodule channel fails to commute with the conditional expectation ({worst:.3e})"
    );
    Ok(true)
}

/// Checks that `Φ` leaves the `t`-marginal untouched: strictly
/// (`E_T ∘ Φ = E_T`) or, with an isometry certificate `u`, up to the
/// relocated copy (`E_{uTu†}(Φ x) = u E_T(x) u†`).
pub fn is_t_preserving(
    phi: &Channel,
    t: &VnAlgebra,
    iso: Option<&ComplexMatrix>,
) -> Result<bool> {
    let d = t.ambient_dim();
    if phi.in_dim() != d {
        return Err(Error::ShapeMismatch("channel must act on t's ambient space".into()));
    }
    let t_moved;
    let (t_out, u) = match iso {
        None => {
            if phi.out_dim() != d {
                return Err(Error::ShapeMismatch(
                    "strict preservation needs an endomorphism".into(),
                ));
            }
            (t, None)
        }
        Some(u) => {
            if u.cols() != d || u.rows() != phi.out_dim() {
                return Err(Error::ShapeMismatch("isometry shape mismatch".into()));
            }
            let dev = (&u.adjoint_mul(u) - &ComplexMatrix::identity(d)).max_abs();
            if dev > CHANNEL_TOL {
                return Err(Error::InvalidInput(format!(
                    "certificate is not an isometry (deviation {dev:.3e})"
                )));
            }
            if u.rows() != d {
                return Err(Error::ShapeMismatch(
                    "only square isometry certificates are supported".into(),
                ));
            }
            t_moved = t.conjugated(u);
            (&t_moved, Some(u))
        }
    };
    for i in 0..d {
        for j in 0..d {
            let mut e = ComplexMatrix::zeros(d, d);
            e[(i, j)] = Cx::new(1.0, 0.0);
            let lhs = t_out.cond_expectation(&phi.apply_mat(&e));
            let rhs = match u {
                None => t.cond_expectation(&e),
                Some(u) => u.matmul(&t.cond_expectation(&e)).matmul(&u.adjoint()),
            };
            if (&lhs - &rhs).max_abs() > CHANNEL_TOL {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Petz recovery map of `Φ` with default state `σ`:
/// `R(x) = σ^{1/2} Φ†( Φ(σ)^{−1/2} x Φ(σ)^{−1/2} ) σ^{1/2}`.
pub fn petz_map(phi: &Channel, sigma_default: &Density) -> Result<Channel> {
    if phi.in_dim() != sigma_default.dim() {
        return Err(Error::ShapeMismatch("default state dimension mismatch".into()));
    }
    let out = phi.apply_mat(sigma_default.mat());
    let spec = eig_hermitian(&out.hermitize())?;
    let top = spec.eigenvalues().first().copied().unwrap_or(0.0);
    let min = spec.eigenvalues().last().copied().unwrap_or(0.0);
    if min <= 1e-10 * top.max(1e-300) {
        return Err(Error::SingularDefault);
    }
    let out_inv_sqrt = apply_spectral_function(&out.hermitize(), |l| l.powf(-0.5), 0.0)?;
    let sigma_sqrt =
        apply_spectral_function(sigma_default.mat(), |l| l.max(0.0).sqrt(), 0.0)?;
    let kraus: Vec<ComplexMatrix> = phi
        .kraus()
        .iter()
        .map(|k| sigma_sqrt.matmul(&k.adjoint()).matmul(&out_inv_sqrt))
        .collect();
    let r = Channel::new(kraus)?;
    let back = r.apply_mat(&out);
    debug_assert!(
        (&back - sigma_default.mat()).max_abs() <= 1e-8,
        "recovery map fails to fix the default state"
    );
    Ok(r)
}

/// One step of an individual operation by the party holding `S` (the
/// `T`-party case follows by swapping roles before building).
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum PlanStep {
    /// Adjoin a fresh ancilla of the given dimension to `S` (and in the
    /// pure state `|0⟩` to `ρ`); `T` only gains the ancilla's identity.
    #[serde(rename = "extend")]
    Extend { anc_dim: usize },
    /// Apply a channel to the state. Must act trivially from the
    /// `S`-party's commutant perspective and leave the `T`-marginal
    /// untouched (optionally up to an isometry certificate).
    #[serde(rename = "channel")]
    StateChannel { channel: Channel, iso: Option<ComplexMatrix> },
    /// Conjugate `S` (not the state) by a unitary that is a bimodule for
    /// the `S`-party's commutant; the result must stay a commuting
    /// square.
    #[serde(rename = "unitary-heisenberg")]
    UnitaryHeisenberg { u: ComplexMatrix },
    /// Conjugate the state and every algebra by the same unitary — a
    /// global renaming with no entropic effect.
    #[serde(rename = "unitary-rename")]
    UnitaryRename { u: ComplexMatrix },
    /// Drop `S` to a subalgebra with the same intersection with `T`.
    #[serde(rename = "shrink-S")]
    ShrinkS { new_s: VnAlgebra },
    /// Grow `T` without growing the joint algebra.
    #[serde(rename = "enlarge-T")]
    EnlargeT { new_t: VnAlgebra },
    /// Project the state onto the joint algebra `ST`.
    #[serde(rename = "restrict")]
    Restrict,
}

/// Which picture the plan's steps are interpreted in; both share the
/// same step vocabulary.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OperationKind {
    StateModifying,
    AlgebraModifying,
}

/// Ordered list of steps describing one party's operation.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct OperationPlan {
    pub kind: OperationKind,
    pub steps: Vec<PlanStep>,
}

/// A plan whose every step passed its predicate against the evolving
/// square. Execution replays the same walk on a state.
#[derive(Clone, Debug)]
pub struct ValidatedOperation {
    steps: Vec<PlanStep>,
    initial: Square,
    /// Squares after each step, computed during validation.
    stages: Vec<Square>,
}

/// The `S`-party's effective algebra `S ∩ (S∩T)′` — the part of `S` not
/// frozen in the shared memory.
fn party_algebra(square: &Square) -> Result<VnAlgebra> {
    let c_comm = square.c().commutant(square.m())?;
    Ok(VnAlgebra::intersect(square.s(), &c_comm))
}

fn reject(step: usize, reason: impl Into<String>) -> Error {
    Error::StepRejected { step, reason: reason.into() }
}

/// Validates every step of `plan` against `square`, returning an
/// executable operation. Any failed predicate is a
/// [`Error::StepRejected`] naming the offending step.
pub fn build_s_operation(plan: &OperationPlan, square: &Square) -> Result<ValidatedOperation> {
    if !square.is_commuting() {
        return Err(Error::NotCommutingSquare(square.commuting_residual()));
    }
    let mut cur = square.clone();
    let mut stages = Vec::with_capacity(plan.steps.len());
    for (idx, step) in plan.steps.iter().enumerate() {
        let next = match step {
            PlanStep::Extend { anc_dim } => {
                if *anc_dim == 0 {
                    return Err(reject(idx, "ancilla dimension must be positive"));
                }
                let anc = VnAlgebra::full(*anc_dim);
                let anc_triv = VnAlgebra::trivial(*anc_dim);
                let s = VnAlgebra::tensor(cur.s(), &anc);
                let t = VnAlgebra::tensor(cur.t(), &anc_triv);
                let m = VnAlgebra::tensor(cur.m(), &anc);
                VnAlgebra::classify_square(&s, &t, &m)?
            }
            PlanStep::StateChannel { channel, iso } => {
                let d = cur.m().ambient_dim();
                if channel.in_dim() != d {
                    return Err(reject(idx, "channel dimension mismatch"));
                }
                let frak_s = party_algebra(&cur).map_err(|e| reject(idx, e.to_string()))?;
                let frak_s_comm = frak_s
                    .commutant(cur.m())
                    .map_err(|e| reject(idx, e.to_string()))?;
                if !is_bimodule(channel, &frak_s_comm, cur.m())? {
                    return Err(reject(idx, "channel is not a bimodule for the party's commutant"));
                }
                if !is_t_preserving(channel, cur.t(), iso.as_ref())? {
                    return Err(reject(idx, "channel does not preserve the T-marginal"));
                }
                match iso {
                    None => cur.clone(),
                    Some(u) => {
                        let s = cur.s().clone();
                        let t = cur.t().conjugated(u);
                        let m = VnAlgebra::join(&s, &t);
                        let next = VnAlgebra::classify_square(&s, &t, &m)?;
                        if !next.is_commuting() {
                            return Err(reject(idx, "relocated T breaks the commuting square"));
                        }
                        next
                    }
                }
            }
            PlanStep::UnitaryHeisenberg { u } => {
                let d = cur.m().ambient_dim();
                if u.rows() != d || u.cols() != d {
                    return Err(reject(idx, "unitary dimension mismatch"));
                }
                let conj = Channel::from_unitary(u).map_err(|e| reject(idx, e.to_string()))?;
                let frak_s = party_algebra(&cur).map_err(|e| reject(idx, e.to_string()))?;
                let frak_s_comm = frak_s
                    .commutant(cur.m())
                    .map_err(|e| reject(idx, e.to_string()))?;
                if !is_bimodule(&conj, &frak_s_comm, cur.m())? {
                    return Err(reject(idx, "unitary is not a bimodule for the party's commutant"));
                }
                let s = cur.s().conjugated(u);
                let m = VnAlgebra::join(&s, cur.t());
                let next = VnAlgebra::classify_square(&s, cur.t(), &m)?;
                if !next.is_commuting() {
                    return Err(reject(idx, "conjugated S breaks the commuting square"));
                }
                next
            }
            PlanStep::UnitaryRename { u } => {
                let d = cur.m().ambient_dim();
                if u.rows() != d || u.cols() != d {
                    return Err(reject(idx, "unitary dimension mismatch"));
                }
                Channel::from_unitary(u).map_err(|e| reject(idx, e.to_string()))?;
                let s = cur.s().conjugated(u);
                let t = cur.t().conjugated(u);
                let m = cur.m().conjugated(u);
                VnAlgebra::classify_square(&s, &t, &m)?
            }
            PlanStep::ShrinkS { new_s } => {
                if !new_s.is_subalgebra_of(cur.s()) {
                    return Err(reject(idx, "replacement S is not inside the current S"));
                }
                let new_c = VnAlgebra::intersect(new_s, cur.t());
                if !new_c.same_span(cur.c()) {
                    return Err(reject(idx, "shrinking S changes the shared memory S ∩ T"));
                }
                // the joint-algebra term tracks join(S, T), which shrinks here
                let m = VnAlgebra::join(new_s, cur.t());
                let next = VnAlgebra::classify_square(new_s, cur.t(), &m)?;
                if !next.is_commuting() {
                    return Err(reject(idx, "shrunk S breaks the commuting square"));
                }
                next
            }
            PlanStep::EnlargeT { new_t } => {
                if !cur.t().is_subalgebra_of(new_t) {
                    return Err(reject(idx, "replacement T does not contain the current T"));
                }
                let old_join = VnAlgebra::join(cur.s(), cur.t());
                let new_join = VnAlgebra::join(cur.s(), new_t);
                if !new_join.same_span(&old_join) {
                    return Err(reject(idx, "enlarging T grows the joint algebra ST"));
                }
                let next = VnAlgebra::classify_square(cur.s(), new_t, cur.m())?;
                if !next.is_commuting() {
                    return Err(reject(idx, "enlarged T breaks the commuting square"));
                }
                next
            }
            PlanStep::Restrict => cur.clone(),
        };
        stages.push(next.clone());
        cur = next;
    }
    Ok(ValidatedOperation { steps: plan.steps.clone(), initial: square.clone(), stages })
}

impl ValidatedOperation {
    pub fn initial(&self) -> &Square {
        &self.initial
    }

    pub fn final_square(&self) -> &Square {
        self.stages.last().unwrap_or(&self.initial)
    }

    /// Applies the operation, returning the state and square after every
    /// step (index `k` is the configuration after step `k`).
    pub fn apply_traced(&self, rho: &Density) -> Result<Vec<(Density, Square)>> {
        if rho.dim() != self.initial.m().ambient_dim() {
            return Err(Error::ShapeMismatch("state dimension mismatch".into()));
        }
        let mut out = Vec::with_capacity(self.steps.len());
        let mut state = rho.clone();
        for (step, stage) in self.steps.iter().zip(&self.stages) {
            state = match step {
                PlanStep::Extend { anc_dim } => {
                    let mut anc = ComplexMatrix::zeros(*anc_dim, *anc_dim);
                    anc[(0, 0)] = Cx::new(1.0, 0.0);
                    Density::new_renormalized(tensor(state.mat(), &anc))?
                }
                PlanStep::StateChannel { channel, .. } => channel.apply(&state)?,
                PlanStep::UnitaryHeisenberg { .. } => state,
                PlanStep::UnitaryRename { u } => Density::new_renormalized(
                    u.matmul(state.mat()).matmul(&u.adjoint()),
                )?,
                PlanStep::ShrinkS { .. } | PlanStep::EnlargeT { .. } => state,
                PlanStep::Restrict => {
                    let st = VnAlgebra::join(stage.s(), stage.t());
                    Density::new_renormalized(st.cond_expectation(state.mat()))?
                }
            };
            out.push((state.clone(), stage.clone()));
        }
        Ok(out)
    }

    /// Applies the operation and returns the final state and square.
    pub fn apply(&self, rho: &Density) -> Result<(Density, Square)> {
        let trace = self.apply_traced(rho)?;
        Ok(trace
            .into_iter()
            .last()
            .unwrap_or_else(|| (rho.clone(), self.initial.clone())))
    }
}

fn superop_commutes_with_cond_exp(u: &ComplexMatrix, n: &VnAlgebra) -> bool {
    let d = n.ambient_dim();
    let ua = u.adjoint();
    for i in 0..d {
        for j in 0..d {
            let mut e = ComplexMatrix::zeros(d, d);
            e[(i, j)] = Cx::new(1.0, 0.0);
            let lhs = n.cond_expectation(&u.matmul(&e).matmul(&ua));
            let rhs = u.matmul(&n.cond_expectation(&e)).matmul(&ua);
            if (&lhs - &rhs).max_abs() > CHANNEL_TOL {
                return false;
            }
        }
    }
    true
}

/// Mixes the state over a finite group of covariant unitaries while
/// replacing the two observable algebras.
///
/// Each unitary must commute with the conditional expectations onto
/// `S`, `T`, `ST`, and `S∩T`; the replacements must form a commuting
/// square over the same joint algebra and agree with the originals
/// inside the algebra `R` generated by the unitaries.
pub fn covariant_average(
    unitaries: &[(f64, ComplexMatrix)],
    square: &Square,
    rho: &Density,
    new_s: &VnAlgebra,
    new_t: &VnAlgebra,
) -> Result<(Density, Square)> {
    let total: f64 = unitaries.iter().map(|(w, _)| *w).sum();
    if unitaries.iter().any(|(w, _)| *w < -1e-12) || (total - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidInput("weights are not a probability vector".into()));
    }
    let st = VnAlgebra::join(square.s(), square.t());
    for (idx, (w, u)) in unitaries.iter().enumerate() {
        if *w <= 0.0 {
            continue;
        }
        Channel::from_unitary(u)?;
        let covariant = superop_commutes_with_cond_exp(u, square.s())
            && superop_commutes_with_cond_exp(u, square.t())
            && superop_commutes_with_cond_exp(u, &st)
            && superop_commutes_with_cond_exp(u, square.c());
        if !covariant {
            return Err(Error::NotCovariant(idx));
        }
    }
    let r = VnAlgebra::generate(
        &unitaries
            .iter()
            .filter(|(w, _)| *w > 0.0)
            .map(|(_, u)| u.clone())
            .collect::<Vec<_>>(),
        square.m().ambient_dim(),
    );
    let new_st = VnAlgebra::join(new_s, new_t);
    if !new_st.same_span(&st) {
        return Err(Error::ConstraintViolated("replacement joint algebra differs".into()));
    }
    let next = VnAlgebra::classify_square(new_s, new_t, square.m())?;
    if !next.is_commuting() {
        return Err(Error::ConstraintViolated("replacements are not a commuting square".into()));
    }
    if !VnAlgebra::intersect(new_s, &r).same_span(&VnAlgebra::intersect(square.s(), &r)) {
        return Err(Error::ConstraintViolated("S ∩ R changes under replacement".into()));
    }
    if !VnAlgebra::intersect(new_t, &r).same_span(&VnAlgebra::intersect(square.t(), &r)) {
        return Err(Error::ConstraintViolated("T ∩ R changes under replacement".into()));
    }
    if !VnAlgebra::intersect(next.c(), &r).same_span(&VnAlgebra::intersect(square.c(), &r)) {
        return Err(Error::ConstraintViolated("S ∩ T ∩ R changes under replacement".into()));
    }
    let mut mixed = ComplexMatrix::zeros(rho.dim(), rho.dim());
    for (w, u) in unitaries {
        if *w <= 0.0 {
            continue;
        }
        mixed.add_assign_scaled(&u.matmul(rho.mat()).matmul(&u.adjoint()), Cx::new(*w, 0.0));
    }
    Ok((Density::new_renormalized(mixed)?, next))
}

/// Trades state purity for a larger `S`: projects the state onto `r`
/// while replacing `S` by `s_new`, under the commutation and agreement
/// constraints that keep the generalized CMI from increasing.
pub fn picture_swap(
    square: &Square,
    r: &VnAlgebra,
    s_new: &VnAlgebra,
    rho: &Density,
) -> Result<(Density, Square)> {
    if !square.t().is_subalgebra_of(r) {
        return Err(Error::ConstraintViolated("R must contain T".into()));
    }
    let st = VnAlgebra::join(square.s(), square.t());
    // every listed conditional expectation must commute pairwise
    let algebras: [&VnAlgebra; 6] = [square.s(), square.t(), &st, square.c(), r, s_new];
    let d = square.m().ambient_dim();
    for (i, x) in algebras.iter().enumerate() {
        for y in algebras.iter().skip(i + 1) {
            for bi in 0..d {
                for bj in 0..d {
                    let mut e = ComplexMatrix::zeros(d, d);
                    e[(bi, bj)] = Cx::new(1.0, 0.0);
                    let lhs = x.cond_expectation(&y.cond_expectation(&e));
                    let rhs = y.cond_expectation(&x.cond_expectation(&e));
                    if (&lhs - &rhs).max_abs() > CHANNEL_TOL {
                        return Err(Error::ConstraintViolated(
                            "conditional expectations do not all commute".into(),
                        ));
                    }
                }
            }
        }
    }
    if !VnAlgebra::intersect(r, s_new).same_span(&VnAlgebra::intersect(r, square.s())) {
        return Err(Error::ConstraintViolated("R ∩ S changes under replacement".into()));
    }
    let rho_new = Density::new_renormalized(r.cond_expectation(rho.mat()))?;
    let new_m = VnAlgebra::join(s_new, square.t());
    let next = VnAlgebra::classify_square(s_new, square.t(), &new_m)?;
    let before = crate::squares::gen_cmi_classified(square, rho)?.value_bits;
    let after = crate::squares::gen_cmi_classified(&next, &rho_new)?.value_bits;
    assert!(
        before >= after - 1e-9,
        "picture swap increased the generalized CMI ({before} -> {after})"
    );
    Ok((rho_new, next))
}

/// Deterministically samples a validated individual operation of the
/// given length on a square (used by scans and the monotonicity
/// property checks). The square must be a conjugated tensor-product
/// square: steps are drawn from templates guaranteed valid there.
pub fn sample_validated_plan(square: &Square, len: usize, seed: u64) -> Result<OperationPlan> {
    use rand::Rng;
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(derive_seed(seed, 0xC4A2));
    let mut steps = Vec::with_capacity(len);
    let mut cur = square.clone();
    for k in 0..len {
        let frak_s = party_algebra(&cur)?;
        let choice = rng.gen_range(0..4u32);
        let step = match choice {
            0 => {
                // global renaming by a Haar unitary
                let u = crate::matcore::sample_haar_unitary(
                    cur.m().ambient_dim(),
                    derive_seed(seed, 10 + k as u64),
                );
                PlanStep::UnitaryRename { u }
            }
            1 => {
                // drop all of S down to the shared memory
                PlanStep::ShrinkS { new_s: cur.c().clone() }
            }
            2 => {
                // Heisenberg rotation of S by exp(iH), H in the party algebra
                let h = frak_s.random_hermitian_element(derive_seed(seed, 20 + k as u64));
                let u = unitary_exp_i(&h.scale_re(0.5))?;
                PlanStep::UnitaryHeisenberg { u }
            }
            _ => {
                // state-modifying rotation by a unitary in the party algebra
                let h = frak_s.random_hermitian_element(derive_seed(seed, 30 + k as u64));
                let u = unitary_exp_i(&h.scale_re(0.5))?;
                PlanStep::StateChannel { channel: Channel::from_unitary(&u)?, iso: None }
            }
        };
        let probe = OperationPlan { kind: OperationKind::AlgebraModifying, steps: vec![step.clone()] };
        match build_s_operation(&probe, &cur) {
            Ok(v) => {
                cur = v.final_square().clone();
                steps.push(step);
            }
            Err(_) => {
                // fall back to the always-valid restriction step
                steps.push(PlanStep::Restrict);
            }
        }
    }
    Ok(OperationPlan { kind: OperationKind::AlgebraModifying, steps })
}
