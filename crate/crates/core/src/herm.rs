//! Dense complex-Hermitian linear algebra.
//!
//! Hermitian matrices are paired by the real inner product `tr(AB)`. The
//! helper [`hvec`] maps a Hermitian `n x n` matrix isometrically onto
//! `R^{n^2}` (diagonal first, then `sqrt(2) Re`, `sqrt(2) Im` of each upper
//! entry), which is how subspaces are projected and orthonormalized.
//!
//! Kronecker products use the lexicographic convention: in `A ⊗ B` the first
//! factor is the outer block index, so `(A ⊗ B)[(i,k),(j,l)] = A[i,j] B[k,l]`
//! with `(i,k) -> i * dim(B) + k`.

use std::f64::consts::SQRT_2;
use std::fmt;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;

/// Tolerance used when checking Hermitian symmetry of stored entries.
pub const STORAGE_TOL: f64 = 1e-12;
/// Residual norm below which a vector is treated as linearly dependent.
pub const DEFLATION_TOL: f64 = 1e-10;

const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// A dense complex matrix equal to its conjugate transpose.
#[derive(Clone, PartialEq)]
pub struct HermitianMatrix {
    m: CMatrix,
}

impl fmt::Debug for HermitianMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "HermitianMatrix{}", self.m)
    }
}

impl HermitianMatrix {
    /// Validates symmetry (relative to the largest entry) and stores the
    /// exactly symmetrized matrix.
    pub fn new(m: CMatrix) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::DimensionMismatch {
                expected: m.nrows(),
                found: m.ncols(),
            });
        }
        if m.nrows() == 0 {
            return Err(Error::InvalidInput("empty matrix".into()));
        }
        let deviation = hermitian_deviation(&m);
        let scale = m.iter().map(|z| z.norm()).fold(1.0_f64, f64::max);
        if deviation > STORAGE_TOL * scale {
            return Err(Error::NotHermitian { deviation });
        }
        Ok(Self::symmetrized(m))
    }

    /// Takes the Hermitian part `(M + M*) / 2` without checking.
    pub fn symmetrized(m: CMatrix) -> Self {
        let adj = m.adjoint();
        Self { m: (m + adj).scale(0.5) }
    }

    pub fn from_real(m: &DMatrix<f64>) -> Result<Self> {
        Self::new(m.map(|x| Complex64::new(x, 0.0)))
    }

    pub fn identity(n: usize) -> Self {
        Self {
            m: CMatrix::identity(n, n),
        }
    }

    pub fn zeros(n: usize) -> Self {
        Self {
            m: CMatrix::zeros(n, n),
        }
    }

    /// Real diagonal matrix.
    pub fn diagonal(d: &[f64]) -> Self {
        let n = d.len();
        let mut m = CMatrix::zeros(n, n);
        for (i, &v) in d.iter().enumerate() {
            m[(i, i)] = Complex64::new(v, 0.0);
        }
        Self { m }
    }

    /// All-ones matrix `J_n`.
    pub fn all_ones(n: usize) -> Self {
        Self {
            m: CMatrix::from_element(n, n, ONE),
        }
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn as_matrix(&self) -> &CMatrix {
        &self.m
    }

    pub fn into_matrix(self) -> CMatrix {
        self.m
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.m[(i, j)]
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim()).map(|i| self.m[(i, i)].re).sum()
    }

    /// `tr(AB)`, real for Hermitian arguments.
    pub fn inner(&self, other: &Self) -> f64 {
        debug_assert_eq!(self.dim(), other.dim());
        self.m
            .iter()
            .zip(other.m.iter())
            .map(|(a, b)| (a * b.conj()).re)
            .sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Largest absolute eigenvalue.
    pub fn operator_norm(&self) -> f64 {
        let (vals, _) = eig_hermitian(self);
        vals.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()))
    }

    pub fn min_eigenvalue(&self) -> f64 {
        eig_hermitian(self).0[0]
    }

    pub fn max_eigenvalue(&self) -> f64 {
        let (vals, _) = eig_hermitian(self);
        vals[vals.len() - 1]
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            m: self.m.map(|z| z * s),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        Self {
            m: &self.m + &other.m,
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self {
            m: &self.m - &other.m,
        }
    }

    /// `self + s * other`.
    pub fn axpy(&self, s: f64, other: &Self) -> Self {
        Self {
            m: &self.m + other.m.map(|z| z * s),
        }
    }

    /// Entrywise complex conjugate, which equals the transpose here.
    pub fn conj(&self) -> Self {
        Self {
            m: self.m.map(|z| z.conj()),
        }
    }

    /// Entrywise (Schur) product.
    pub fn schur(&self, other: &Self) -> Self {
        Self {
            m: self.m.component_mul(&other.m),
        }
    }

    pub fn is_real(&self) -> bool {
        self.m.iter().all(|z| z.im == 0.0)
    }

    /// Whether `self - tol * (1 + ||self||) I` is PSD up to `tol`.
    pub fn is_psd(&self, tol: f64) -> bool {
        let (vals, _) = eig_hermitian(self);
        let norm = vals.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
        vals[0] >= -tol * (1.0 + norm)
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.m
            .iter()
            .zip(other.m.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

fn hermitian_deviation(m: &CMatrix) -> f64 {
    let n = m.nrows();
    let mut dev = 0.0_f64;
    for i in 0..n {
        for j in i..n {
            dev = dev.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    dev
}

/// Matrix unit `E_ij` in `M_n`.
pub fn matrix_unit(n: usize, i: usize, j: usize) -> CMatrix {
    let mut m = CMatrix::zeros(n, n);
    m[(i, j)] = ONE;
    m
}

/// `Δ_n = Σ_ij E_ij ⊗ E_ij`, the Choi matrix of the identity map.
pub fn max_entangled(n: usize) -> HermitianMatrix {
    let mut m = CMatrix::zeros(n * n, n * n);
    for i in 0..n {
        for j in 0..n {
            m[(i * n + i, j * n + j)] = ONE;
        }
    }
    HermitianMatrix { m }
}

/// The orthonormal Hermitian basis of `M_n` built from matrix units:
/// `E_ii`, then for each `i < j` the pair `(E_ij + E_ji)/√2`,
/// `i(E_ij - E_ji)/√2`. Element `k` is the matrix whose [`hvec`] is the
/// `k`-th standard basis vector.
pub fn standard_basis(n: usize) -> Vec<HermitianMatrix> {
    (0..n * n).map(|k| standard_basis_element(n, k)).collect()
}

pub fn standard_basis_element(n: usize, k: usize) -> HermitianMatrix {
    let mut e = DVector::zeros(n * n);
    e[k] = 1.0;
    hunvec(&e, n)
}

/// Isometric real coordinates of a Hermitian matrix (see module docs).
pub fn hvec(a: &HermitianMatrix) -> DVector<f64> {
    let n = a.dim();
    let mut v = DVector::zeros(n * n);
    for i in 0..n {
        v[i] = a.m[(i, i)].re;
    }
    let mut k = n;
    for i in 0..n {
        for j in (i + 1)..n {
            v[k] = SQRT_2 * a.m[(i, j)].re;
            v[k + 1] = SQRT_2 * a.m[(i, j)].im;
            k += 2;
        }
    }
    v
}

/// Inverse of [`hvec`].
pub fn hunvec(v: &DVector<f64>, n: usize) -> HermitianMatrix {
    assert_eq!(v.len(), n * n);
    let mut m = CMatrix::zeros(n, n);
    for i in 0..n {
        m[(i, i)] = Complex64::new(v[i], 0.0);
    }
    let mut k = n;
    for i in 0..n {
        for j in (i + 1)..n {
            let z = Complex64::new(v[k], v[k + 1]) / SQRT_2;
            m[(i, j)] = z;
            m[(j, i)] = z.conj();
            k += 2;
        }
    }
    HermitianMatrix { m }
}

/// An ordered list of Hilbert–Schmidt orthonormal Hermitian matrices.
#[derive(Clone, Debug)]
pub struct HermitianBasis {
    ambient_dim: usize,
    elements: Vec<HermitianMatrix>,
}

impl HermitianBasis {
    /// Wraps elements that are already known to be orthonormal.
    pub(crate) fn from_orthonormal(ambient_dim: usize, elements: Vec<HermitianMatrix>) -> Self {
        Self {
            ambient_dim,
            elements,
        }
    }

    pub fn empty(ambient_dim: usize) -> Self {
        Self {
            ambient_dim,
            elements: Vec::new(),
        }
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn elements(&self) -> &[HermitianMatrix] {
        &self.elements
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    /// Columns are the [`hvec`] coordinates of the elements.
    pub fn coordinate_matrix(&self) -> DMatrix<f64> {
        let d = self.ambient_dim * self.ambient_dim;
        let mut q = DMatrix::zeros(d, self.elements.len());
        for (c, e) in self.elements.iter().enumerate() {
            q.set_column(c, &hvec(e));
        }
        q
    }

    /// Gram matrix `[tr(G_i G_j)]`.
    pub fn gram(&self) -> DMatrix<f64> {
        let k = self.elements.len();
        DMatrix::from_fn(k, k, |i, j| self.elements[i].inner(&self.elements[j]))
    }
}

/// Orthonormal basis of the real span of `spanning` under `tr(AB)`.
///
/// Modified Gram–Schmidt with one re-orthogonalization pass; a vector is
/// dropped when its residual falls below [`DEFLATION_TOL`] times its norm.
pub fn orthonormalize(spanning: &[HermitianMatrix]) -> Result<HermitianBasis> {
    let Some(first) = spanning.first() else {
        return Err(Error::InvalidInput(
            "cannot infer ambient dimension of an empty spanning set".into(),
        ));
    };
    orthonormalize_in(first.dim(), spanning)
}

/// Like [`orthonormalize`] but accepts an empty list.
pub fn orthonormalize_in(n: usize, spanning: &[HermitianMatrix]) -> Result<HermitianBasis> {
    let mut vecs = Vec::with_capacity(spanning.len());
    for a in spanning {
        if a.dim() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: a.dim(),
            });
        }
        let dev = hermitian_deviation(&a.m);
        if dev > STORAGE_TOL * a.m.iter().map(|z| z.norm()).fold(1.0, f64::max) {
            return Err(Error::NotHermitian { deviation: dev });
        }
        vecs.push(hvec(a));
    }
    let q = gram_schmidt(&vecs);
    Ok(HermitianBasis {
        ambient_dim: n,
        elements: q.iter().map(|v| hunvec(v, n)).collect(),
    })
}

pub(crate) fn gram_schmidt(vecs: &[DVector<f64>]) -> Vec<DVector<f64>> {
    let mut q: Vec<DVector<f64>> = Vec::new();
    for v in vecs {
        let norm0 = v.norm();
        if norm0 == 0.0 {
            continue;
        }
        let mut r = v.clone();
        for _ in 0..2 {
            for b in &q {
                let c = b.dot(&r);
                r.axpy(-c, b, 1.0);
            }
        }
        let nr = r.norm();
        if nr > DEFLATION_TOL * norm0 {
            q.push(r / nr);
        }
    }
    q
}

/// Eigendecomposition `A = V diag(λ) V*` with eigenvalues ascending.
pub fn eig_hermitian(a: &HermitianMatrix) -> (DVector<f64>, CMatrix) {
    let n = a.dim();
    let eig = SymmetricEigen::new(a.m.clone());
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let vals = DVector::from_iterator(n, order.iter().map(|&i| eig.eigenvalues[i]));
    let mut vecs = CMatrix::zeros(n, n);
    for (c, &i) in order.iter().enumerate() {
        vecs.set_column(c, &eig.eigenvectors.column(i));
    }
    (vals, vecs)
}

/// Kronecker product of general complex matrices.
pub fn kron_c(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

pub fn kron(a: &HermitianMatrix, b: &HermitianMatrix) -> HermitianMatrix {
    HermitianMatrix {
        m: a.m.kronecker(&b.m),
    }
}

/// Which tensor factor a partial trace removes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TraceSide {
    /// `tr ⊗ id`: traces out the first factor, leaving `M_m`.
    First,
    /// `id ⊗ tr`: traces out the second factor, leaving `M_n`.
    Second,
}

/// Partial trace of `x ∈ M_n ⊗ M_m`.
pub fn partial_trace_c(x: &CMatrix, side: TraceSide, n: usize, m: usize) -> Result<CMatrix> {
    if x.nrows() != n * m || x.ncols() != n * m {
        return Err(Error::Factorization {
            dim: x.nrows(),
            n,
            m,
        });
    }
    Ok(match side {
        TraceSide::First => CMatrix::from_fn(m, m, |k, l| {
            (0..n).map(|i| x[(i * m + k, i * m + l)]).sum()
        }),
        TraceSide::Second => CMatrix::from_fn(n, n, |i, j| {
            (0..m).map(|k| x[(i * m + k, j * m + k)]).sum()
        }),
    })
}

pub fn partial_trace(
    x: &HermitianMatrix,
    side: TraceSide,
    n: usize,
    m: usize,
) -> Result<HermitianMatrix> {
    Ok(HermitianMatrix {
        m: partial_trace_c(&x.m, side, n, m)?,
    })
}

/// Index permutation behind [`shuffle`]: position in
/// `C^n ⊗ C^n ⊗ C^k ⊗ C^k` mapped to position in `C^n ⊗ C^k ⊗ C^n ⊗ C^k`.
fn shuffle_index(idx: usize, n: usize, k: usize) -> usize {
    let d = idx % k;
    let c = (idx / k) % k;
    let b = (idx / (k * k)) % n;
    let a = idx / (k * k * n);
    ((a * k + c) * n + b) * k + d
}

/// The shuffle isomorphism `A ⊗ B ⊗ C ⊗ D ↦ A ⊗ C ⊗ B ⊗ D` from
/// `M_n ⊗ M_n ⊗ M_k ⊗ M_k` onto `M_nk ⊗ M_nk`.
pub fn shuffle_c(z: &CMatrix, n: usize, k: usize) -> Result<CMatrix> {
    let d = n * n * k * k;
    if z.nrows() != d || z.ncols() != d {
        return Err(Error::Factorization {
            dim: z.nrows(),
            n: n * n,
            m: k * k,
        });
    }
    let perm: Vec<usize> = (0..d).map(|i| shuffle_index(i, n, k)).collect();
    let mut out = CMatrix::zeros(d, d);
    for r in 0..d {
        for c in 0..d {
            out[(perm[r], perm[c])] = z[(r, c)];
        }
    }
    Ok(out)
}

pub fn shuffle(z: &HermitianMatrix, n: usize, k: usize) -> Result<HermitianMatrix> {
    Ok(HermitianMatrix {
        m: shuffle_c(&z.m, n, k)?,
    })
}

pub(crate) fn c64(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}
