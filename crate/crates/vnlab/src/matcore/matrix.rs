use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::tol;

/// Complex scalar used throughout the crate.
pub type Cx = Complex64;

/// Dense complex matrix, row-major.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Cx>,
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix {}x{} [", self.rows, self.cols)?;
        for r in 0..self.rows {
            write!(f, "  ")?;
            for c in 0..self.cols {
                let z = self[(r, c)];
                write!(f, "{:+.4}{:+.4}i ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![Cx::new(0.0, 0.0); rows * cols] }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim, dim);
        for i in 0..dim {
            m[(i, i)] = Cx::new(1.0, 0.0);
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Cx) -> Self {
        let mut m = Self::zeros(rows, cols);
        for r in 0..rows {
            for c in 0..cols {
                m[(r, c)] = f(r, c);
            }
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<Cx>>) -> Self {
        let nr = rows.len();
        let nc = if nr > 0 { rows[0].len() } else { 0 };
        assert!(rows.iter().all(|r| r.len() == nc), "ragged rows");
        Self { rows: nr, cols: nc, data: rows.into_iter().flatten().collect() }
    }

    pub fn from_real(rows: usize, cols: usize, entries: &[f64]) -> Self {
        assert_eq!(entries.len(), rows * cols);
        Self {
            rows,
            cols,
            data: entries.iter().map(|&x| Cx::new(x, 0.0)).collect(),
        }
    }

    /// Column vector as a `rows x 1` matrix.
    pub fn col_vector(v: &[Cx]) -> Self {
        Self { rows: v.len(), cols: 1, data: v.to_vec() }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn data(&self) -> &[Cx] {
        &self.data
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, c| self[(c, r)].conj())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, c| self[(c, r)])
    }

    pub fn conj(&self) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z.conj()).collect(),
        }
    }

    pub fn scale(&self, s: Cx) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z * s).collect(),
        }
    }

    pub fn scale_re(&self, s: f64) -> Self {
        self.scale(Cx::new(s, 0.0))
    }

    pub fn trace(&self) -> Cx {
        debug_assert!(self.is_square());
        (0..self.rows).map(|i| self[(i, i)]).sum()
    }

    /// Hilbert-Schmidt inner product `tr(self^† other)`.
    pub fn hs_inner(&self, other: &Self) -> Cx {
        debug_assert_eq!(self.rows, other.rows);
        debug_assert_eq!(self.cols, other.cols);
        self.data
            .iter()
            .zip(other.data.iter())
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn add_assign_scaled(&mut self, other: &Self, s: Cx) {
        debug_assert_eq!(self.data.len(), other.data.len());
        for (a, b) in self.data.iter_mut().zip(other.data.iter()) {
            *a += b * s;
        }
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "matmul shape mismatch");
        let mut out = Self::zeros(self.rows, other.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(r, k)];
                if a.norm_sqr() == 0.0 {
                    continue;
                }
                let lhs = &other.data[k * other.cols..(k + 1) * other.cols];
                let dst = &mut out.data[r * other.cols..(r + 1) * other.cols];
                for (d, &b) in dst.iter_mut().zip(lhs.iter()) {
                    *d += a * b;
                }
            }
        }
        out
    }

    /// `self^† * other` without materializing the adjoint.
    pub fn adjoint_mul(&self, other: &Self) -> Self {
        self.adjoint().matmul(other)
    }

    pub fn kron(&self, other: &Self) -> Self {
        let mut out = Self::zeros(self.rows * other.rows, self.cols * other.cols);
        for r1 in 0..self.rows {
            for c1 in 0..self.cols {
                let a = self[(r1, c1)];
                if a.norm_sqr() == 0.0 {
                    continue;
                }
                for r2 in 0..other.rows {
                    for c2 in 0..other.cols {
                        out[(r1 * other.rows + r2, c1 * other.cols + c2)] = a * other[(r2, c2)];
                    }
                }
            }
        }
        out
    }

    pub fn hermitian_deviation(&self) -> f64 {
        (self - &self.adjoint()).frobenius_norm()
    }

    pub fn hermitize(&self) -> Self {
        (self + &self.adjoint()).scale_re(0.5)
    }

    pub fn apply_vec(&self, v: &[Cx]) -> Vec<Cx> {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|r| {
                self.data[r * self.cols..(r + 1) * self.cols]
                    .iter()
                    .zip(v.iter())
                    .map(|(a, b)| a * b)
                    .sum()
            })
            .collect()
    }

    /// Outer product `u v^†` of two column vectors.
    pub fn outer(u: &[Cx], v: &[Cx]) -> Self {
        Self::from_fn(u.len(), v.len(), |r, c| u[r] * v[c].conj())
    }

    pub fn column(&self, c: usize) -> Vec<Cx> {
        (0..self.rows).map(|r| self[(r, c)]).collect()
    }

    /// Matrix built from the given columns.
    pub fn from_columns(cols: &[Vec<Cx>]) -> Self {
        let rows = cols.first().map_or(0, |c| c.len());
        Self::from_fn(rows, cols.len(), |r, c| cols[c][r])
    }
}

impl std::ops::Index<(usize, usize)> for ComplexMatrix {
    type Output = Cx;
    fn index(&self, (r, c): (usize, usize)) -> &Cx {
        &self.data[r * self.cols + c]
    }
}

impl std::ops::IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut Cx {
        &mut self.data[r * self.cols + c]
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

impl Neg for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn neg(self) -> ComplexMatrix {
        self.scale_re(-1.0)
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.matmul(rhs)
    }
}

/// Tensor (Kronecker) product.
pub fn tensor(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    a.kron(b)
}

/// Partial trace of a square matrix over the slots *not* listed in `keep`.
///
/// `dims` are the tensor slot dimensions in order; their product must equal
/// the matrix dimension. Slots in `keep` are retained in their original
/// relative order.
pub fn partial_trace(
    m: &ComplexMatrix,
    dims: &[usize],
    keep: &[usize],
) -> Result<ComplexMatrix> {
    if !m.is_square() {
        return Err(Error::ShapeMismatch("partial_trace of non-square matrix".into()));
    }
    let total: usize = dims.iter().product();
    if total != m.rows() {
        return Err(Error::ShapeMismatch(format!(
            "dims product {} != matrix dim {}",
            total,
            m.rows()
        )));
    }
    if keep.iter().any(|&k| k >= dims.len()) {
        return Err(Error::ShapeMismatch("keep index out of range".into()));
    }
    let n = dims.len();
    let mut keep_sorted: Vec<usize> = keep.to_vec();
    keep_sorted.sort_unstable();
    keep_sorted.dedup();
    let traced: Vec<usize> = (0..n).filter(|i| !keep_sorted.contains(i)).collect();

    let kdim: usize = keep_sorted.iter().map(|&i| dims[i]).product();
    let tdim: usize = traced.iter().map(|&i| dims[i]).product();
    let kdim = kdim.max(1);

    // strides of each slot in the full index
    let mut strides = vec![1usize; n];
    for i in (0..n.saturating_sub(1)).rev() {
        strides[i] = strides[i + 1] * dims[i + 1];
    }
    let unpack = |multi: usize, slots: &[usize]| -> usize {
        // multi is a mixed-radix index over `slots`; map to a full-space offset
        let mut rem = multi;
        let mut off = 0usize;
        for &s in slots {
            let later: usize = slots.iter().filter(|&&x| x > s).map(|&x| dims[x]).product();
            let digit = (rem / later.max(1)) % dims[s];
            rem %= later.max(1);
            off += digit * strides[s];
        }
        off
    };

    let mut out = ComplexMatrix::zeros(kdim, kdim);
    for kr in 0..kdim {
        let base_r = unpack(kr, &keep_sorted);
        for kc in 0..kdim {
            let base_c = unpack(kc, &keep_sorted);
            let mut acc = Cx::new(0.0, 0.0);
            for t in 0..tdim.max(1) {
                let off = unpack(t, &traced);
                acc += m[(base_r + off, base_c + off)];
            }
            out[(kr, kc)] = acc;
        }
    }
    Ok(out)
}

/// Unit-trace positive semidefinite matrix.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ComplexMatrix", into = "ComplexMatrix")]
pub struct Density {
    mat: ComplexMatrix,
}

impl Density {
    /// Validates the density invariants: Hermitian, eigenvalues bounded
    /// below by `-1e-10`, unit trace.
    pub fn new(mat: ComplexMatrix) -> Result<Self> {
        if !mat.is_square() {
            return Err(Error::ShapeMismatch("density must be square".into()));
        }
        let scale = mat.frobenius_norm().max(1.0);
        let herm = mat.hermitian_deviation();
        if herm > 1e-10 * scale.max(1.0) {
            return Err(Error::NotHermitian(herm / scale));
        }
        let tr = mat.trace();
        if (tr.re - 1.0).abs() > 1e-10 || tr.im.abs() > 1e-10 {
            return Err(Error::InvalidInput(format!("trace {} != 1", tr)));
        }
        let mat = mat.hermitize();
        let spec = super::eig::eig_hermitian(&mat)?;
        if spec.eigenvalues().iter().any(|&l| l < -1e-10) {
            return Err(Error::InvalidInput(format!(
                "negative eigenvalue {:.3e}",
                spec.eigenvalues().last().copied().unwrap_or(0.0)
            )));
        }
        Ok(Self { mat })
    }

    /// Normalizes trace and clips tiny negative eigenvalues before
    /// validating. Intended for matrices produced by long chains of
    /// floating-point channel applications.
    pub fn new_renormalized(mat: ComplexMatrix) -> Result<Self> {
        let h = mat.hermitize();
        let spec = super::eig::eig_hermitian(&h)?;
        let clipped: Vec<f64> = spec.eigenvalues().iter().map(|&l| l.max(0.0)).collect();
        let total: f64 = clipped.iter().sum();
        if total <= 0.0 {
            return Err(Error::InvalidInput("matrix has no positive part".into()));
        }
        let d = h.rows();
        let mut out = ComplexMatrix::zeros(d, d);
        for (k, &l) in clipped.iter().enumerate() {
            if l > 0.0 {
                let v = spec.eigenvectors().column(k);
                out.add_assign_scaled(&ComplexMatrix::outer(&v, &v), Cx::new(l / total, 0.0));
            }
        }
        Self::new(out)
    }

    pub fn from_pure(psi: &[Cx]) -> Result<Self> {
        let norm: f64 = psi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm <= 0.0 {
            return Err(Error::InvalidInput("zero state vector".into()));
        }
        let v: Vec<Cx> = psi.iter().map(|z| z / norm).collect();
        Self::new(ComplexMatrix::outer(&v, &v))
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self { mat: ComplexMatrix::identity(dim).scale_re(1.0 / dim as f64) }
    }

    pub fn dim(&self) -> usize {
        self.mat.rows()
    }

    pub fn mat(&self) -> &ComplexMatrix {
        &self.mat
    }

    pub fn into_mat(self) -> ComplexMatrix {
        self.mat
    }

    pub fn purity(&self) -> f64 {
        self.mat.hs_inner(&self.mat).re
    }

    pub fn is_pure(&self, tol: f64) -> bool {
        (self.purity() - 1.0).abs() <= tol
    }

    /// Rank at the standard relative eigenvalue cutoff.
    pub fn rank(&self) -> usize {
        let spec = super::eig::eig_hermitian(&self.mat).expect("density is Hermitian");
        let top = spec.eigenvalues().first().copied().unwrap_or(0.0);
        spec.eigenvalues()
            .iter()
            .filter(|&&l| l > tol::EIG_ZERO_CUTOFF * top.max(1e-300))
            .count()
    }

    /// SHA-256 digest of the entry bytes, hex-encoded. Used to tie
    /// reports to the exact state they were computed from.
    pub fn digest(&self) -> String {
        use sha2::{Digest, Sha256};
        let mut h = Sha256::new();
        for z in self.mat.data() {
            h.update(z.re.to_le_bytes());
            h.update(z.im.to_le_bytes());
        }
        let out = h.finalize();
        out.iter().map(|b| format!("{b:02x}")).collect()
    }
}

impl TryFrom<ComplexMatrix> for Density {
    type Error = Error;
    fn try_from(m: ComplexMatrix) -> Result<Self> {
        Density::new(m)
    }
}

impl From<Density> for ComplexMatrix {
    fn from(d: Density) -> ComplexMatrix {
        d.mat
    }
}

// Wire format: {"dim": d, "entries": [[re, im], ...]} row-major for square
// matrices; rectangular matrices carry "rows"/"cols" instead.
#[derive(Serialize, Deserialize)]
struct MatrixWire {
    #[serde(skip_serializing_if = "Option::is_none")]
    dim: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    rows: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    cols: Option<usize>,
    entries: Vec<[f64; 2]>,
}

impl Serialize for ComplexMatrix {
    fn serialize<S: Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        let wire = MatrixWire {
            dim: if self.is_square() { Some(self.rows) } else { None },
            rows: if self.is_square() { None } else { Some(self.rows) },
            cols: if self.is_square() { None } else { Some(self.cols) },
            entries: self.data.iter().map(|z| [z.re, z.im]).collect(),
        };
        wire.serialize(ser)
    }
}

impl<'de> Deserialize<'de> for ComplexMatrix {
    fn deserialize<D: Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        let wire = MatrixWire::deserialize(de)?;
        let (rows, cols) = match (wire.dim, wire.rows, wire.cols) {
            (Some(d), _, _) => (d, d),
            (None, Some(r), Some(c)) => (r, c),
            _ => return Err(D::Error::custom("matrix JSON needs dim or rows/cols")),
        };
        if wire.entries.len() != rows * cols {
            return Err(D::Error::custom(format!(
                "expected {} entries, got {}",
                rows * cols,
                wire.entries.len()
            )));
        }
        if wire.entries.iter().any(|e| !e[0].is_finite() || !e[1].is_finite()) {
            return Err(D::Error::custom("non-finite matrix entry"));
        }
        Ok(ComplexMatrix {
            rows,
            cols,
            data: wire.entries.iter().map(|e| Cx::new(e[0], e[1])).collect(),
        })
    }
}
