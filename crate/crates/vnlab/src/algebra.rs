//! Finite-dimensional von Neumann subalgebras.
//!
//! A [`VnAlgebra`] is a *-closed unital subalgebra of a matrix algebra,
//! stored as a Hilbert–Schmidt orthonormal basis. Every such algebra is
//! unitarily equivalent to a direct sum of blocks `M_n ⊗ C1_m`; the
//! [`BlockStructure`] records the central projections, block shapes, and
//! an aligning unitary, and is computed lazily. On top of this sit the
//! conditional expectation (the Hilbert–Schmidt orthogonal projection
//! onto the algebra), its complementary channel, a minimal Stinespring
//! dilation, commutants, and the (co-)commuting-square classifier.

use std::sync::OnceLock;

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::matcore::{
    apply_spectral_function, eig_hermitian, partial_trace, tensor, ComplexMatrix, Cx, Density,
};
use crate::tol;

/// *-closed unital subalgebra of `M_d`, stored basis-first.
#[derive(Clone, Debug)]
pub struct VnAlgebra {
    ambient_dim: usize,
    hs_basis: Vec<ComplexMatrix>,
    blocks: OnceLock<BlockStructure>,
    projector: OnceLock<ComplexMatrix>,
}

/// One minimal central block of an algebra.
#[derive(Clone, Debug)]
pub struct Block {
    /// Factor dimension `n`: the block algebra is `M_n ⊗ C1_m`.
    pub factor_dim: usize,
    /// Multiplicity dimension `m`.
    pub multiplicity: usize,
    /// Minimal central projection onto the block's subspace.
    pub projection: ComplexMatrix,
    /// `d x (n·m)` isometry whose columns put the block in `M_n ⊗ 1_m`
    /// coordinates (row-within-block index `k·m + μ`).
    pub frame: ComplexMatrix,
}

/// Canonical decomposition of an algebra into matrix blocks.
#[derive(Clone, Debug)]
pub struct BlockStructure {
    pub blocks: Vec<Block>,
    /// `d x d` unitary assembling all block frames; conjugating any
    /// algebra element by it yields exact block-diagonal form.
    pub alignment: ComplexMatrix,
}

impl BlockStructure {
    /// Total environment dimension `Σ mᵢ²` of the minimal Stinespring
    /// dilation of the conditional expectation.
    pub fn env_dim(&self) -> usize {
        self.blocks.iter().map(|b| b.multiplicity * b.multiplicity).sum()
    }

    /// Offset of block `i` in aligned system coordinates.
    fn sys_offset(&self, i: usize) -> usize {
        self.blocks[..i]
            .iter()
            .map(|b| b.factor_dim * b.multiplicity)
            .sum()
    }

    /// Offset of block `i` in environment coordinates.
    fn env_offset(&self, i: usize) -> usize {
        self.blocks[..i]
            .iter()
            .map(|b| b.multiplicity * b.multiplicity)
            .sum()
    }
}

/// Quadruple of nested algebras `C ⊆ S∩T ⊆ S,T ⊆ M` with cached
/// commuting / co-commuting flags.
#[derive(Clone, Debug)]
pub struct Square {
    s: VnAlgebra,
    t: VnAlgebra,
    c: VnAlgebra,
    m: VnAlgebra,
    is_commuting: bool,
    is_co_commuting: bool,
    commuting_residual: f64,
    co_commuting_residual: f64,
}

impl Square {
    pub fn s(&self) -> &VnAlgebra {
        &self.s
    }
    pub fn t(&self) -> &VnAlgebra {
        &self.t
    }
    pub fn c(&self) -> &VnAlgebra {
        &self.c
    }
    pub fn m(&self) -> &VnAlgebra {
        &self.m
    }
    pub fn is_commuting(&self) -> bool {
        self.is_commuting
    }
    pub fn is_co_commuting(&self) -> bool {
        self.is_co_commuting
    }
    /// Worst Frobenius deviation of `E_S E_T` / `E_T E_S` from `E_{S∩T}`
    /// as superoperators.
    pub fn commuting_residual(&self) -> f64 {
        self.commuting_residual
    }
    pub fn co_commuting_residual(&self) -> f64 {
        self.co_commuting_residual
    }
}

/// Hilbert–Schmidt Gram–Schmidt with rank cutoff, two passes per vector
/// for stability. Returns an orthonormal basis of the span.
fn hs_orthonormalize(mats: impl IntoIterator<Item = ComplexMatrix>) -> Vec<ComplexMatrix> {
    let mut basis: Vec<ComplexMatrix> = Vec::new();
    for mut m in mats {
        let scale0 = m.frobenius_norm();
        if scale0 == 0.0 {
            continue;
        }
        for _ in 0..2 {
            for b in &basis {
                let c = b.hs_inner(&m);
                m.add_assign_scaled(b, -c);
            }
        }
        let n = m.frobenius_norm();
        if n > tol::SPAN_CUTOFF * scale0.max(1.0) {
            basis.push(m.scale_re(1.0 / n));
        }
    }
    basis
}

fn complex_gaussian(rng: &mut ChaCha8Rng) -> Cx {
    use rand::Rng;
    let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
    let u2: f64 = rng.gen_range(0.0..1.0);
    let r = (-2.0 * u1.ln()).sqrt();
    let th = 2.0 * std::f64::consts::PI * u2;
    Cx::new(r * th.cos(), r * th.sin())
}

impl VnAlgebra {
    fn from_orthonormal_basis(ambient_dim: usize, hs_basis: Vec<ComplexMatrix>) -> Self {
        Self { ambient_dim, hs_basis, blocks: OnceLock::new(), projector: OnceLock::new() }
    }

    /// Smallest *-closed unital subalgebra containing the generators:
    /// adjoints and pairwise products are appended and re-orthonormalized
    /// until the span dimension stabilizes.
    pub fn generate(generators: &[ComplexMatrix], ambient_dim: usize) -> Self {
        let d = ambient_dim;
        let mut seed: Vec<ComplexMatrix> = vec![ComplexMatrix::identity(d)];
        for g in generators {
            assert_eq!((g.rows(), g.cols()), (d, d), "generator shape mismatch");
            seed.push(g.clone());
            seed.push(g.adjoint());
        }
        let mut basis = hs_orthonormalize(seed);
        loop {
            let mut candidates = basis.clone();
            for a in &basis {
                candidates.push(a.adjoint());
                for b in &basis {
                    candidates.push(a.matmul(b));
                }
            }
            let next = hs_orthonormalize(candidates);
            let grown = next.len() > basis.len();
            basis = next;
            if !grown {
                break;
            }
        }
        Self::from_orthonormal_basis(d, basis)
    }

    /// Full matrix algebra `M_d`.
    pub fn full(d: usize) -> Self {
        let mut basis = Vec::with_capacity(d * d);
        for i in 0..d {
            for j in 0..d {
                let mut e = ComplexMatrix::zeros(d, d);
                e[(i, j)] = Cx::new(1.0, 0.0);
                basis.push(e);
            }
        }
        Self::from_orthonormal_basis(d, basis)
    }

    /// Scalars `C1` inside `M_d`.
    pub fn trivial(d: usize) -> Self {
        let basis = vec![ComplexMatrix::identity(d).scale_re(1.0 / (d as f64).sqrt())];
        Self::from_orthonormal_basis(d, basis)
    }

    /// Diagonal (maximal abelian) algebra of `M_d`.
    pub fn diagonal(d: usize) -> Self {
        let basis = (0..d)
            .map(|j| {
                let mut e = ComplexMatrix::zeros(d, d);
                e[(j, j)] = Cx::new(1.0, 0.0);
                e
            })
            .collect();
        Self::from_orthonormal_basis(d, basis)
    }

    /// Commutative algebra of operators diagonal in the given orthonormal
    /// basis (columns of `u`).
    pub fn diagonal_in_basis(u: &ComplexMatrix) -> Self {
        let d = u.rows();
        assert_eq!(u.cols(), d);
        let basis = (0..d)
            .map(|j| {
                let col = u.column(j);
                ComplexMatrix::outer(&col, &col)
            })
            .collect();
        Self::from_orthonormal_basis(d, basis)
    }

    /// Canonical block algebra `⊕ᵢ (M_{nᵢ} ⊗ C1_{mᵢ})` in standard
    /// coordinates.
    pub fn block_pattern(pattern: &[(usize, usize)]) -> Self {
        let d: usize = pattern.iter().map(|&(n, m)| n * m).sum();
        let mut basis = Vec::new();
        let mut off = 0;
        for &(n, m) in pattern {
            let w = 1.0 / (m as f64).sqrt();
            for k in 0..n {
                for l in 0..n {
                    let mut e = ComplexMatrix::zeros(d, d);
                    for mu in 0..m {
                        e[(off + k * m + mu, off + l * m + mu)] = Cx::new(w, 0.0);
                    }
                    basis.push(e);
                }
            }
            off += n * m;
        }
        Self::from_orthonormal_basis(d, basis)
    }

    /// Tensor product algebra with basis `{aᵢ ⊗ bⱼ}` (stays orthonormal).
    pub fn tensor(a: &VnAlgebra, b: &VnAlgebra) -> Self {
        let mut basis = Vec::with_capacity(a.dim() * b.dim());
        for x in &a.hs_basis {
            for y in &b.hs_basis {
                basis.push(tensor(x, y));
            }
        }
        Self::from_orthonormal_basis(a.ambient_dim * b.ambient_dim, basis)
    }

    /// Algebra generated by the union of the two bases.
    pub fn join(a: &VnAlgebra, b: &VnAlgebra) -> Self {
        assert_eq!(a.ambient_dim, b.ambient_dim);
        let gens: Vec<ComplexMatrix> =
            a.hs_basis.iter().chain(b.hs_basis.iter()).cloned().collect();
        Self::generate(&gens, a.ambient_dim)
    }

    /// The algebra `u N u†`.
    pub fn conjugated(&self, u: &ComplexMatrix) -> Self {
        let basis = self
            .hs_basis
            .iter()
            .map(|b| u.matmul(b).matmul(&u.adjoint()))
            .collect();
        Self::from_orthonormal_basis(self.ambient_dim, basis)
    }

    /// Named built-ins: `full:d`, `trivial:d`, `diag:d`, `pauli:X|Y|Z`,
    /// `mub:d:k` (diagonal algebra of basis `k` of the dimension-`d`
    /// mutually unbiased family).
    pub fn by_name(name: &str) -> Result<Self> {
        let parts: Vec<&str> = name.split(':').collect();
        let parse_dim = |s: &str| -> Result<usize> {
            s.parse::<usize>()
                .ok()
                .filter(|&d| d >= 1 && d <= 64)
                .ok_or_else(|| Error::InvalidInput(format!("bad dimension in '{name}'")))
        };
        match parts.as_slice() {
            ["full", d] => Ok(Self::full(parse_dim(d)?)),
            ["trivial", d] => Ok(Self::trivial(parse_dim(d)?)),
            ["diag", d] => Ok(Self::diagonal(parse_dim(d)?)),
            ["pauli", which] => {
                let fam = crate::scenarios::mub_family(2)?;
                let idx = match *which {
                    "Z" => 0,
                    "X" => 1,
                    "Y" => 2,
                    _ => return Err(Error::InvalidInput(format!("unknown Pauli '{which}'"))),
                };
                Ok(Self::diagonal_in_basis(fam.basis(idx)))
            }
            ["mub", d, k] => {
                let d = parse_dim(d)?;
                let k = parse_dim(k)?;
                let fam = crate::scenarios::mub_family(d)?;
                if k >= fam.len() {
                    return Err(Error::InvalidInput(format!(
                        "basis index {k} out of range (family has {})",
                        fam.len()
                    )));
                }
                Ok(Self::diagonal_in_basis(fam.basis(k)))
            }
            _ => Err(Error::InvalidInput(format!("unknown algebra name '{name}'"))),
        }
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    /// Linear dimension of the algebra as a subspace of `M_d`.
    pub fn dim(&self) -> usize {
        self.hs_basis.len()
    }

    pub fn basis(&self) -> &[ComplexMatrix] {
        &self.hs_basis
    }

    /// Residual of projecting `x` onto the algebra's span.
    pub fn span_residual(&self, x: &ComplexMatrix) -> f64 {
        let mut rem = x.clone();
        for b in &self.hs_basis {
            let c = b.hs_inner(&rem);
            rem.add_assign_scaled(b, -c);
        }
        rem.frobenius_norm()
    }

    pub fn contains(&self, x: &ComplexMatrix) -> bool {
        self.span_residual(x) <= tol::STRUCT_TOL * x.frobenius_norm().max(1.0)
    }

    pub fn is_subalgebra_of(&self, other: &VnAlgebra) -> bool {
        self.ambient_dim == other.ambient_dim
            && self.hs_basis.iter().all(|b| other.contains(b))
    }

    pub fn same_span(&self, other: &VnAlgebra) -> bool {
        self.dim() == other.dim() && self.is_subalgebra_of(other)
    }

    /// Random element `Σ cₖ bₖ` with standard complex Gaussian
    /// coefficients.
    pub fn random_element(&self, seed: u64) -> ComplexMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut out = ComplexMatrix::zeros(self.ambient_dim, self.ambient_dim);
        for b in &self.hs_basis {
            out.add_assign_scaled(b, complex_gaussian(&mut rng));
        }
        out
    }

    pub fn random_hermitian_element(&self, seed: u64) -> ComplexMatrix {
        self.random_element(seed).hermitize()
    }

    /// Conditional expectation onto the algebra: the Hilbert–Schmidt
    /// orthogonal projection `Σₖ tr(bₖ† x) bₖ`. Trace-preserving,
    /// unital, idempotent, completely positive.
    pub fn cond_expectation(&self, x: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(
            (x.rows(), x.cols()),
            (self.ambient_dim, self.ambient_dim),
            "cond_expectation shape mismatch"
        );
        let mut out = ComplexMatrix::zeros(self.ambient_dim, self.ambient_dim);
        for b in &self.hs_basis {
            out.add_assign_scaled(b, b.hs_inner(x));
        }
        out
    }

    /// Conditional expectation of a state, revalidated as a density.
    pub fn cond_expectation_density(&self, rho: &Density) -> Result<Density> {
        Density::new_renormalized(self.cond_expectation(rho.mat()))
    }

    /// The conditional expectation as a `d² x d²` superoperator acting
    /// on row-major vectorized matrices; it is the orthogonal projector
    /// onto the vectorized span.
    pub fn hs_projector(&self) -> &ComplexMatrix {
        self.projector.get_or_init(|| {
            let d2 = self.ambient_dim * self.ambient_dim;
            let mut p = ComplexMatrix::zeros(d2, d2);
            for b in &self.hs_basis {
                p.add_assign_scaled(
                    &ComplexMatrix::outer(b.data(), b.data()),
                    Cx::new(1.0, 0.0),
                );
            }
            p
        })
    }

    /// Commutant of `self` inside `within` (requires `self ⊆ within`):
    /// the null space of `x ↦ {[x, bₖ]}` restricted to `within`'s span.
    pub fn commutant(&self, within: &VnAlgebra) -> Result<VnAlgebra> {
        if !self.is_subalgebra_of(within) {
            return Err(Error::NotSubalgebra(
                "commutant requires the algebra to sit inside `within`".into(),
            ));
        }
        let w = &within.hs_basis;
        let q = w.len();
        // Gram matrix of the stacked commutator constraints:
        // G_{jj'} = Σ_k <[w_j, b_k], [w_j', b_k]>.
        let comms: Vec<Vec<ComplexMatrix>> = w
            .iter()
            .map(|wj| {
                self.hs_basis
                    .iter()
                    .map(|b| &wj.matmul(b) - &b.matmul(wj))
                    .collect()
            })
            .collect();
        let mut g = ComplexMatrix::zeros(q, q);
        for j in 0..q {
            for jp in j..q {
                let mut acc = Cx::new(0.0, 0.0);
                for k in 0..self.hs_basis.len() {
                    acc += comms[j][k].hs_inner(&comms[jp][k]);
                }
                g[(j, jp)] = acc;
                g[(jp, j)] = acc.conj();
            }
        }
        let spec = eig_hermitian(&g)?;
        let top = spec.eigenvalues().first().copied().unwrap_or(0.0).max(1.0);
        let mut basis = Vec::new();
        for (k, &l) in spec.eigenvalues().iter().enumerate() {
            if l <= tol::SPAN_CUTOFF * top {
                let coeff = spec.eigenvectors().column(k);
                let mut x = ComplexMatrix::zeros(self.ambient_dim, self.ambient_dim);
                for (j, c) in coeff.iter().enumerate() {
                    x.add_assign_scaled(&w[j], *c);
                }
                basis.push(x);
            }
        }
        Ok(VnAlgebra::from_orthonormal_basis(self.ambient_dim, hs_orthonormalize(basis)))
    }

    /// Center = self ∩ (commutant of self in the full matrix algebra).
    pub fn center(&self) -> Result<VnAlgebra> {
        let comm = self.commutant(&VnAlgebra::full(self.ambient_dim))?;
        Ok(VnAlgebra::intersect(self, &comm))
    }

    /// Span intersection of two algebras (itself an algebra when both
    /// are; used for `S ∩ T` in squares).
    pub fn intersect(a: &VnAlgebra, b: &VnAlgebra) -> VnAlgebra {
        assert_eq!(a.ambient_dim, b.ambient_dim);
        let p = a.dim();
        // Overlap matrix M_{kj} = <a_k, b_j>; coefficient vectors u with
        // M M† u = u 1-eigenvectors give the intersection inside span(a).
        let m = ComplexMatrix::from_fn(p, b.dim(), |k, j| a.hs_basis[k].hs_inner(&b.hs_basis[j]));
        let w = m.matmul(&m.adjoint());
        let spec = eig_hermitian(&w).expect("overlap Gram matrix is Hermitian");
        let mut basis = Vec::new();
        for (k, &l) in spec.eigenvalues().iter().enumerate() {
            if l >= 1.0 - 1e-7 {
                let coeff = spec.eigenvectors().column(k);
                let mut x = ComplexMatrix::zeros(a.ambient_dim, a.ambient_dim);
                for (j, c) in coeff.iter().enumerate() {
                    x.add_assign_scaled(&a.hs_basis[j], *c);
                }
                basis.push(x);
            }
        }
        VnAlgebra::from_orthonormal_basis(a.ambient_dim, hs_orthonormalize(basis))
    }

    /// Canonical block decomposition, computed once and cached.
    pub fn block_structure(&self) -> Result<&BlockStructure> {
        if let Some(bs) = self.blocks.get() {
            return Ok(bs);
        }
        let bs = self.compute_block_structure()?;
        Ok(self.blocks.get_or_init(|| bs))
    }

    fn compute_block_structure(&self) -> Result<BlockStructure> {
        let center = self.center()?;
        for attempt in 0..tol::BLOCK_RETRIES {
            let seed = crate::matcore::derive_seed(0xB10C_0000, attempt as u64);
            match self.try_block_structure(&center, seed) {
                Ok(bs) => return Ok(bs),
                Err(_) => continue,
            }
        }
        Err(Error::DecompositionFailed(tol::BLOCK_RETRIES))
    }

    fn try_block_structure(&self, center: &VnAlgebra, seed: u64) -> Result<BlockStructure> {
        let d = self.ambient_dim;
        let z = center.dim();
        let h = center.random_hermitian_element(seed);
        let spec = eig_hermitian(&h)?;
        let groups = group_by_gap(spec.eigenvalues(), tol::CENTRAL_GAP);
        if groups.len() != z {
            return Err(Error::DecompositionFailed(0));
        }
        let mut blocks = Vec::with_capacity(z);
        for idxs in &groups {
            let q = ComplexMatrix::from_columns(
                &idxs.iter().map(|&k| spec.eigenvectors().column(k)).collect::<Vec<_>>(),
            );
            let r = idxs.len();
            let projection = q.matmul(&q.adjoint());
            // compress the algebra to the block subspace
            let compressed = hs_orthonormalize(
                self.hs_basis.iter().map(|b| q.adjoint().matmul(b).matmul(&q)),
            );
            let n = (compressed.len() as f64).sqrt().round() as usize;
            if n * n != compressed.len() || r % n != 0 {
                return Err(Error::DecompositionFailed(0));
            }
            let m = r / n;
            let comp_alg = VnAlgebra::from_orthonormal_basis(r, compressed);
            let local = block_frame(&comp_alg, n, m, seed)?;
            let frame = q.matmul(&local);
            blocks.push(Block { factor_dim: n, multiplicity: m, projection, frame });
        }
        // assemble the alignment unitary and verify exact block form
        let mut cols: Vec<Vec<Cx>> = Vec::with_capacity(d);
        for b in &blocks {
            for c in 0..b.frame.cols() {
                cols.push(b.frame.column(c));
            }
        }
        let alignment = ComplexMatrix::from_columns(&cols);
        let gram = alignment.adjoint_mul(&alignment);
        if (&gram - &ComplexMatrix::identity(d)).frobenius_norm() > 1e-8 {
            return Err(Error::DecompositionFailed(0));
        }
        let bs = BlockStructure { blocks, alignment };
        for b in &self.hs_basis {
            if block_form_residual(&bs, b) > 1e-8 {
                return Err(Error::DecompositionFailed(0));
            }
        }
        Ok(bs)
    }

    /// Complementary channel of the conditional expectation, applied to
    /// a joint operator with the algebra acting on the first tensor slot:
    /// `(E_N^c ⊗ id)(x) = ⊕ᵢ (1_{mᵢ}/mᵢ ⊗ tr_{nᵢ}((Pᵢ⊗1) x (Pᵢ⊗1)))`.
    /// The output lives on an environment of dimension `Σ mᵢ²` tensored
    /// with the auxiliary slots.
    pub fn complement_apply_mat(
        &self,
        x: &ComplexMatrix,
        aux_dims: &[usize],
    ) -> Result<ComplexMatrix> {
        let d = self.ambient_dim;
        let a: usize = aux_dims.iter().product::<usize>().max(1);
        if x.rows() != d * a || !x.is_square() {
            return Err(Error::ShapeMismatch(format!(
                "joint operator dim {} != {}·{}",
                x.rows(),
                d,
                a
            )));
        }
        let bs = self.block_structure()?;
        let u_full = tensor(&bs.alignment, &ComplexMatrix::identity(a));
        let aligned = u_full.adjoint().matmul(x).matmul(&u_full);
        let env = bs.env_dim();
        let mut out = ComplexMatrix::zeros(env * a, env * a);
        for (i, blk) in bs.blocks.iter().enumerate() {
            let (n, m) = (blk.factor_dim, blk.multiplicity);
            let off = bs.sys_offset(i) * a;
            let w = n * m * a;
            let sub = ComplexMatrix::from_fn(w, w, |r, c| aligned[(off + r, off + c)]);
            let sigma = partial_trace(&sub, &[n, m, a], &[1, 2])?; // (m·a) x (m·a)
            let eoff = bs.env_offset(i);
            let wm = 1.0 / m as f64;
            for j in 0..m {
                for mu in 0..m {
                    for av in 0..a {
                        for nu in 0..m {
                            for bv in 0..a {
                                let r = (eoff + j * m + mu) * a + av;
                                let c = (eoff + j * m + nu) * a + bv;
                                out[(r, c)] +=
                                    sigma[(mu * a + av, nu * a + bv)] * Cx::new(wm, 0.0);
                            }
                        }
                    }
                }
            }
        }
        Ok(out)
    }

    /// Density-level wrapper around [`complement_apply_mat`].
    ///
    /// [`complement_apply_mat`]: VnAlgebra::complement_apply_mat
    pub fn complement_apply(&self, rho: &Density, aux_dims: &[usize]) -> Result<Density> {
        Density::new_renormalized(self.complement_apply_mat(rho.mat(), aux_dims)?)
    }

    /// Minimal Stinespring isometry `V : C^d → C^d ⊗ C^env` of the
    /// conditional expectation: tracing out the environment of `VxV†`
    /// gives `E_N(x)`; tracing out the system gives the complementary
    /// channel.
    pub fn stinespring(&self) -> Result<ComplexMatrix> {
        let d = self.ambient_dim;
        let bs = self.block_structure()?;
        let env = bs.env_dim();
        let mut v_al = ComplexMatrix::zeros(d * env, d);
        for (i, blk) in bs.blocks.iter().enumerate() {
            let (n, m) = (blk.factor_dim, blk.multiplicity);
            let off = bs.sys_offset(i);
            let eoff = bs.env_offset(i);
            let w = 1.0 / (m as f64).sqrt();
            for x in 0..n {
                for a in 0..m {
                    let col = off + x * m + a;
                    for j in 0..m {
                        let row = (off + x * m + j) * env + (eoff + j * m + a);
                        v_al[(row, col)] = Cx::new(w, 0.0);
                    }
                }
            }
        }
        let u = &bs.alignment;
        let lift = tensor(u, &ComplexMatrix::identity(env));
        Ok(lift.matmul(&v_al).matmul(&u.adjoint()))
    }

    /// Classifies the square `(s, t ⊆ m)` with `C = s ∩ t`.
    ///
    /// Commuting means both superoperator products `E_S E_T` and
    /// `E_T E_S` equal `E_C`; co-commuting imposes the same on the
    /// commutants within `m`.
    pub fn classify_square(s: &VnAlgebra, t: &VnAlgebra, m: &VnAlgebra) -> Result<Square> {
        if !s.is_subalgebra_of(m) || !t.is_subalgebra_of(m) {
            return Err(Error::NotSubalgebra(
                "both algebras must sit inside the ambient algebra".into(),
            ));
        }
        let c = VnAlgebra::intersect(s, t);
        let (ps, pt, pc) = (s.hs_projector(), t.hs_projector(), c.hs_projector());
        let st = ps.matmul(pt);
        let ts = pt.matmul(ps);
        let commuting_residual =
            (&st - pc).frobenius_norm().max((&ts - pc).frobenius_norm());
        let is_commuting = commuting_residual <= tol::SQUARE_TOL;
        let sp = s.commutant(m)?;
        let tp = t.commutant(m)?;
        let cp = VnAlgebra::intersect(&sp, &tp);
        let (psp, ptp, pcp) = (sp.hs_projector(), tp.hs_projector(), cp.hs_projector());
        let co_commuting_residual = (&psp.matmul(ptp) - pcp)
            .frobenius_norm()
            .max((&ptp.matmul(psp) - pcp).frobenius_norm());
        let is_co_commuting = co_commuting_residual <= tol::SQUARE_TOL;
        Ok(Square {
            s: s.clone(),
            t: t.clone(),
            c,
            m: m.clone(),
            is_commuting,
            is_co_commuting,
            commuting_residual,
            co_commuting_residual,
        })
    }
}

/// Groups the indices of a descending value list into clusters separated
/// by more than `gap`.
fn group_by_gap(values: &[f64], gap: f64) -> Vec<Vec<usize>> {
    let mut groups: Vec<Vec<usize>> = Vec::new();
    for (k, &v) in values.iter().enumerate() {
        match groups.last_mut() {
            Some(g) if (values[*g.last().unwrap()] - v).abs() <= gap => g.push(k),
            _ => groups.push(vec![k]),
        }
    }
    groups
}

/// Builds the aligning frame of one block: an `r x r` unitary (with
/// `r = n·m`) whose columns `vₖ f_μ` come from a minimal projection `p`
/// (rank `m`) of the compressed algebra and partial isometries
/// `vₖ†vₖ = p` forming matrix units.
fn block_frame(alg: &VnAlgebra, n: usize, m: usize, seed: u64) -> Result<ComplexMatrix> {
    let r = n * m;
    if n == 1 {
        // abelian multiplicity block: any orthonormal basis works
        return Ok(ComplexMatrix::identity(r));
    }
    'attempt: for sub in 0..tol::BLOCK_RETRIES {
        let s1 = crate::matcore::derive_seed(seed ^ 0xF4A3, sub as u64);
        let a = alg.random_hermitian_element(s1);
        let spec = match eig_hermitian(&a) {
            Ok(s) => s,
            Err(_) => continue,
        };
        let groups = group_by_gap(spec.eigenvalues(), tol::CENTRAL_GAP);
        if groups.len() != n || groups.iter().any(|g| g.len() != m) {
            continue;
        }
        // spectral projections p_k, each of rank m; p_0 is minimal
        let projs: Vec<ComplexMatrix> = groups
            .iter()
            .map(|g| {
                let q = ComplexMatrix::from_columns(
                    &g.iter().map(|&k| spec.eigenvectors().column(k)).collect::<Vec<_>>(),
                );
                q.matmul(&q.adjoint())
            })
            .collect();
        let f: Vec<Vec<Cx>> = groups[0].iter().map(|&k| spec.eigenvectors().column(k)).collect();
        let g_el = alg.random_element(crate::matcore::derive_seed(s1, 1));
        let mut isoms: Vec<ComplexMatrix> = vec![projs[0].clone()];
        for pk in projs.iter().skip(1) {
            let w = pk.matmul(&g_el).matmul(&projs[0]);
            let wtw = w.adjoint_mul(&w);
            let inv_sqrt = match apply_spectral_function(&wtw, |x| x.max(0.0).powf(-0.5), 0.0) {
                Ok(x) => x,
                Err(_) => continue 'attempt,
            };
            let v = w.matmul(&inv_sqrt);
            if (&v.adjoint_mul(&v) - &projs[0]).frobenius_norm() > 1e-8 {
                continue 'attempt;
            }
            isoms.push(v);
        }
        let mut cols = Vec::with_capacity(r);
        for v in &isoms {
            for fv in &f {
                cols.push(v.apply_vec(fv));
            }
        }
        let frame = ComplexMatrix::from_columns(&cols);
        if (&frame.adjoint_mul(&frame) - &ComplexMatrix::identity(r)).frobenius_norm() <= 1e-8 {
            return Ok(frame);
        }
    }
    Err(Error::DecompositionFailed(tol::BLOCK_RETRIES))
}

/// Residual of `U† b U` against exact `⊕ᵢ (xᵢ ⊗ 1_{mᵢ})` form.
fn block_form_residual(bs: &BlockStructure, b: &ComplexMatrix) -> f64 {
    let u = &bs.alignment;
    let y = u.adjoint().matmul(b).matmul(u);
    let d = y.rows();
    let mut model = ComplexMatrix::zeros(d, d);
    for (i, blk) in bs.blocks.iter().enumerate() {
        let (n, m) = (blk.factor_dim, blk.multiplicity);
        let off = bs.sys_offset(i);
        for k in 0..n {
            for l in 0..n {
                let mut avg = Cx::new(0.0, 0.0);
                for mu in 0..m {
                    avg += y[(off + k * m + mu, off + l * m + mu)];
                }
                avg /= m as f64;
                for mu in 0..m {
                    model[(off + k * m + mu, off + l * m + mu)] = avg;
                }
            }
        }
    }
    (&y - &model).frobenius_norm()
}

// Wire format: {"ambient_dim": d, "generators": [matrix, ...]};
// normalized to an orthonormal basis on load.
#[derive(Serialize, Deserialize)]
struct AlgebraWire {
    ambient_dim: usize,
    generators: Vec<ComplexMatrix>,
}

impl Serialize for VnAlgebra {
    fn serialize<S: Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        AlgebraWire { ambient_dim: self.ambient_dim, generators: self.hs_basis.clone() }
            .serialize(ser)
    }
}

impl<'de> Deserialize<'de> for VnAlgebra {
    fn deserialize<D: Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        let wire = AlgebraWire::deserialize(de)?;
        if wire
            .generators
            .iter()
            .any(|g| g.rows() != wire.ambient_dim || g.cols() != wire.ambient_dim)
        {
            return Err(D::Error::custom("generator dimension mismatch"));
        }
        Ok(VnAlgebra::generate(&wire.generators, wire.ambient_dim))
    }
}
