//! Completely bounded norms through Paulsen systems, a convex–concave search
//! for the CB-index, and the bounded index of `ℓ∞(n)` over the constants.
//!
//! For `E ⊆ Mₙ` and `u: E → Mₘ`, `‖u‖cb ≤ R` exactly when the map
//! `[[a I, x], [y*, b I]] ↦ [[R a I, u(x)], [u(y)*, R b I]]` on the Paulsen
//! system of `E` is completely positive, which by Arveson extension is
//! exactly when some CP map `M₂ₙ → M₂ₘ` agrees with it there. Agreement is
//! affine in the Choi matrix and `R`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::compile::{re, unit_basis};
use crate::herm::{CMatrix, HermitianMatrix};
use crate::sdp::{solve_with, Constraint, SdpProblem, SdpSolution, SolverOptions, SparseHermitian, Status};
use crate::{Error, Result};

/// Linearly independent (not necessarily Hermitian) matrices spanning `E ⊆ Mₙ`.
#[derive(Clone, Debug, PartialEq)]
pub struct OperatorSubspace {
    n: usize,
    basis: Vec<CMatrix>,
}

/// Relative Gram eigenvalue below which a spanning set counts as dependent.
const INDEPENDENCE_TOL: f64 = 1e-10;

fn frobenius_inner(a: &CMatrix, b: &CMatrix) -> Complex64 {
    a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum()
}

impl OperatorSubspace {
    pub fn new(n: usize, basis: Vec<CMatrix>) -> Result<Self> {
        for b in &basis {
            if b.nrows() != n || b.ncols() != n {
                return Err(Error::DimensionMismatch { expected: n, found: b.nrows().max(b.ncols()) });
            }
        }
        let k = basis.len();
        let gram = CMatrix::from_fn(k, k, |i, j| frobenius_inner(&basis[i], &basis[j]));
        if k > 0 {
            let vals = HermitianMatrix::symmetrized(gram).min_eigenvalue();
            let scale = basis.iter().map(|b| b.norm_squared()).fold(0.0, f64::max);
            if vals <= INDEPENDENCE_TOL * scale {
                return Err(Error::InvalidInput("operator subspace basis is linearly dependent".into()));
            }
        }
        Ok(Self { n, basis })
    }

    /// All of `Mₙ`, spanned by matrix units `E_ij` in row-major order.
    pub fn full(n: usize) -> Self {
        Self {
            n,
            basis: (0..n * n).map(|k| crate::herm::matrix_unit(n, k / n, k % n)).collect(),
        }
    }

    pub fn scalars(n: usize) -> Self {
        Self {
            n,
            basis: vec![CMatrix::identity(n, n)],
        }
    }

    pub fn diagonal(n: usize) -> Self {
        Self {
            n,
            basis: (0..n).map(|i| crate::herm::matrix_unit(n, i, i)).collect(),
        }
    }

    pub fn ambient_dim(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[CMatrix] {
        &self.basis
    }

    /// Least-squares coordinates of `x` and the residual norm.
    pub fn coordinates(&self, x: &CMatrix) -> (DVector<Complex64>, f64) {
        let k = self.dim();
        if k == 0 {
            return (DVector::zeros(0), x.norm());
        }
        let gram = CMatrix::from_fn(k, k, |i, j| frobenius_inner(&self.basis[i], &self.basis[j]));
        let rhs = DVector::from_fn(k, |i, _| frobenius_inner(&self.basis[i], x));
        let coords = gram.lu().solve(&rhs).unwrap_or_else(|| DVector::zeros(k));
        let recon = self.combine(&coords);
        (coords, (x - recon).norm())
    }

    pub fn combine(&self, coords: &DVector<Complex64>) -> CMatrix {
        self.basis
            .iter()
            .zip(coords.iter())
            .fold(CMatrix::zeros(self.n, self.n), |acc, (b, &c)| acc + b * c)
    }

    /// Largest residual of a basis element of `self` in `other`.
    pub fn inclusion_residual(&self, other: &Self) -> f64 {
        self.basis.iter().map(|b| other.coordinates(b).1).fold(0.0, f64::max)
    }
}

/// A linear map on an operator subspace, given by the images of its basis.
#[derive(Clone, Debug, PartialEq)]
pub struct SubspaceMap {
    domain: OperatorSubspace,
    out_dim: usize,
    images: Vec<CMatrix>,
}

impl SubspaceMap {
    pub fn new(domain: OperatorSubspace, out_dim: usize, images: Vec<CMatrix>) -> Result<Self> {
        if images.len() != domain.dim() {
            return Err(Error::DimensionMismatch { expected: domain.dim(), found: images.len() });
        }
        for im in &images {
            if im.nrows() != out_dim || im.ncols() != out_dim {
                return Err(Error::DimensionMismatch { expected: out_dim, found: im.nrows().max(im.ncols()) });
            }
        }
        Ok(Self { domain, out_dim, images })
    }

    /// The inclusion `E → Mₙ`.
    pub fn identity(domain: &OperatorSubspace) -> Self {
        Self {
            out_dim: domain.n,
            images: domain.basis.clone(),
            domain: domain.clone(),
        }
    }

    /// Restriction of `x ↦ f(x)` to `domain`.
    pub fn from_fn(domain: &OperatorSubspace, out_dim: usize, f: impl Fn(&CMatrix) -> CMatrix) -> Result<Self> {
        Self::new(domain.clone(), out_dim, domain.basis.iter().map(f).collect())
    }

    pub fn domain(&self) -> &OperatorSubspace {
        &self.domain
    }

    pub fn out_dim(&self) -> usize {
        self.out_dim
    }

    pub fn images(&self) -> &[CMatrix] {
        &self.images
    }

    pub fn apply(&self, x: &CMatrix) -> Result<CMatrix> {
        let (coords, residual) = self.domain.coordinates(x);
        if residual > 1e-9 * (1.0 + x.norm()) {
            return Err(Error::NotContained { residual });
        }
        Ok(self
            .images
            .iter()
            .zip(coords.iter())
            .fold(CMatrix::zeros(self.out_dim, self.out_dim), |acc, (m, &c)| acc + m * c))
    }

    fn zip_with(&self, other: &Self, f: impl Fn(&CMatrix, &CMatrix) -> CMatrix) -> Result<Self> {
        if self.domain != other.domain || self.out_dim != other.out_dim {
            return Err(Error::InvalidInput("maps have different domains or codomains".into()));
        }
        Ok(Self {
            domain: self.domain.clone(),
            out_dim: self.out_dim,
            images: self.images.iter().zip(&other.images).map(|(a, b)| f(a, b)).collect(),
        })
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self {
            domain: self.domain.clone(),
            out_dim: self.out_dim,
            images: self.images.iter().map(|a| a * s).collect(),
        }
    }
}

/// Hermitian part of `phase · W` for sparse `W` given by entries.
fn hermitian_part(dim: usize, entries: &[(usize, usize, Complex64)], phase: Complex64) -> SparseHermitian {
    SparseHermitian::from_upper(
        dim,
        entries.iter().map(|&(r, c, z)| {
            let z = z * phase;
            if r == c {
                (r, r, z)
            } else if r < c {
                (r, c, z * 0.5)
            } else {
                (c, r, z.conj() * 0.5)
            }
        }),
    )
}

/// What the right-hand side of a Paulsen agreement row reads off.
#[derive(Clone, Copy, Debug)]
enum Target {
    /// `−coeff · R` on the left; the right-hand side is zero.
    Diagonal(f64),
    /// `Re` or `Im` of `u(x_k)[q, p]`, or zero if `entry` is `None`.
    Corner { k: usize, entry: Option<(usize, usize)>, imag: bool },
}

struct PaulsenRow {
    h: SparseHermitian,
    target: Target,
}

/// Rows asserting that the CP map with Choi matrix `C` (dimension `4nm`)
/// agrees with `ũ_R` on the Paulsen system of `domain`.
fn paulsen_rows(domain: &OperatorSubspace, m: usize) -> Vec<PaulsenRow> {
    let n = domain.n;
    let (n2, m2) = (2 * n, 2 * m);
    let dim = n2 * m2;
    let mut rows = Vec::new();
    let out_units = unit_basis(m2);
    for corner in 0..2 {
        let a = SparseHermitian::from_upper(n2, (0..n).map(|i| (corner * n + i, corner * n + i, re(1.0))));
        for k in &out_units {
            // tr(E_cc ⊗ I_m · K)
            let coeff: f64 = k
                .entries()
                .iter()
                .filter(|&&(r, c, _)| r == c && r / m == corner)
                .map(|e| e.2.re)
                .sum();
            rows.push(PaulsenRow {
                h: SparseHermitian::kron(&a, k),
                target: Target::Diagonal(coeff),
            });
        }
    }
    for (idx, x) in domain.basis.iter().enumerate() {
        for p in 0..m2 {
            for q in 0..m2 {
                // W = (E₁₂ ⊗ x)ᵀ ⊗ E_pq, so tr(C W) = Φ(E₁₂ ⊗ x)[q, p]
                let w: Vec<_> = (0..n)
                    .flat_map(|a| (0..n).map(move |b| (a, b)))
                    .filter(|&(a, b)| x[(b, a)] != Complex64::new(0.0, 0.0))
                    .map(|(a, b)| ((n + a) * m2 + p, b * m2 + q, x[(b, a)]))
                    .collect();
                let entry = (q < m && p >= m).then(|| (q, p - m));
                for imag in [false, true] {
                    let phase = if imag { Complex64::new(0.0, -1.0) } else { re(1.0) };
                    rows.push(PaulsenRow {
                        h: hermitian_part(dim, &w, phase),
                        target: Target::Corner { k: idx, entry, imag },
                    });
                }
            }
        }
    }
    rows
}

fn read_target(images: &[CMatrix], k: usize, entry: Option<(usize, usize)>, imag: bool) -> f64 {
    match entry {
        None => 0.0,
        Some((q, p)) => {
            let z = images[k][(q, p)];
            if imag {
                z.im
            } else {
                z.re
            }
        }
    }
}

/// Output of [`cb_norm`].
#[derive(Clone, Debug)]
pub struct CbNormResult {
    pub value: f64,
    /// Choi matrix of the CP extension `M₂ₙ → M₂ₘ` of `ũ_R` at the optimum.
    pub choi: HermitianMatrix,
    pub gap: f64,
    pub status: Status,
    pub iterations: usize,
    /// Subgradient of `‖·‖cb` at `u`: `∂‖u‖cb/∂ Re u(x_k)[q,p]` and `∂/∂ Im`.
    pub subgradient: Vec<CMatrix>,
}

impl CbNormResult {
    pub fn is_optimal(&self) -> bool {
        self.status == Status::Optimal
    }
}

fn paulsen_problem(u: &SubspaceMap, rows: &[PaulsenRow], radius: Option<f64>) -> SdpProblem {
    let dim = 4 * u.domain.n * u.out_dim;
    let mut p = SdpProblem::new(if radius.is_some() { vec![dim] } else { vec![dim, 1] });
    if radius.is_none() {
        p.set_objective(1, SparseHermitian::scalar(1.0));
    }
    for row in rows {
        let c = match row.target {
            Target::Diagonal(coeff) => match radius {
                Some(r) => Constraint::new(coeff * r).with_block(0, row.h.clone()),
                None => Constraint::new(0.0)
                    .with_block(0, row.h.clone())
                    .with_block(1, SparseHermitian::scalar(-coeff)),
            },
            Target::Corner { k, entry, imag } => {
                Constraint::new(read_target(&u.images, k, entry, imag)).with_block(0, row.h.clone())
            }
        };
        p.add_constraint(c);
    }
    p
}

fn subgradient_from(u: &SubspaceMap, rows: &[PaulsenRow], sol: &SdpSolution) -> Vec<CMatrix> {
    let mut g = vec![CMatrix::zeros(u.out_dim, u.out_dim); u.domain.dim()];
    for (row, &y) in rows.iter().zip(&sol.dual_vector) {
        if let Target::Corner { k, entry: Some((q, p)), imag } = row.target {
            if imag {
                g[k][(q, p)].im += y;
            } else {
                g[k][(q, p)].re += y;
            }
        }
    }
    g
}

/// `‖u‖cb` as the least `R` for which `ũ_R` extends to a CP map.
pub fn cb_norm(u: &SubspaceMap, opts: SolverOptions) -> Result<CbNormResult> {
    let rows = paulsen_rows(&u.domain, u.out_dim);
    let p = paulsen_problem(u, &rows, None);
    let sol = solve_with(&p, opts)?;
    if !sol.is_optimal() {
        log::warn!("cb_norm: {}", crate::compile::describe(&sol));
    }
    Ok(CbNormResult {
        value: sol.primal_blocks[1].get(0, 0).re,
        choi: sol.primal_blocks[0].clone(),
        gap: (sol.primal_value - sol.dual_value).abs(),
        status: sol.status,
        iterations: sol.iterations,
        subgradient: subgradient_from(u, &rows, &sol),
    })
}

/// Whether `ũ_R` has a CP extension for the given `R`, decided by a
/// feasibility SDP rather than by comparing with [`cb_norm`].
pub fn paulsen_extension_feasible(u: &SubspaceMap, radius: f64, opts: SolverOptions) -> Result<Status> {
    let rows = paulsen_rows(&u.domain, u.out_dim);
    let p = paulsen_problem(u, &rows, Some(radius));
    Ok(solve_with(&p, opts)?.status)
}

/// Best witness found by [`cb_index_dc`].
#[derive(Clone, Debug)]
pub struct CbIndexReport {
    /// Least `‖u‖cb` over verified feasible witnesses; `None` if none was found.
    pub value: Option<f64>,
    pub witness: Option<SubspaceMap>,
    /// `‖u − id‖cb` of the witness, re-evaluated by [`cb_norm`].
    pub witness_deviation: Option<f64>,
    pub restarts: usize,
    pub iterations: usize,
}

/// Slack allowed when re-verifying `‖u − id‖cb ≤ ‖u‖cb − 1`.
pub const WITNESS_TOL: f64 = 1e-6;
const CCP_ITERATIONS: usize = 40;

/// Re-verifies a candidate and returns `(‖u‖cb, ‖u − id‖cb)` if it is feasible.
pub fn verify_cb_witness(u: &SubspaceMap, opts: SolverOptions) -> Result<Option<(f64, f64)>> {
    let norm = cb_norm(u, opts)?;
    let dev = cb_norm(&u.sub(&SubspaceMap::identity(&u.domain))?, opts)?;
    if !(norm.is_optimal() && dev.is_optimal()) {
        return Ok(None);
    }
    Ok((dev.value <= norm.value - 1.0 + WITNESS_TOL).then_some((norm.value, dev.value)))
}

/// Map `X → X₀ ⊆ Mₙ` with complex coefficients `θ`: `u(x_k) = Σ_l θ_lk y_l`.
fn map_from_coeffs(x: &OperatorSubspace, x0: &OperatorSubspace, theta: &DMatrix<Complex64>) -> SubspaceMap {
    let images = (0..x.dim())
        .map(|k| x0.combine(&theta.column(k).into_owned()))
        .collect();
    SubspaceMap {
        domain: x.clone(),
        out_dim: x.n,
        images,
    }
}

/// Upper bound on `Ind_CB(X : X₀)` by a penalty convex–concave procedure:
/// `‖u‖cb` in the reverse-convex constraint is replaced by its linearization
/// at the current iterate, making each step an SDP; every reported value is
/// re-verified through [`verify_cb_witness`].
pub fn cb_index_dc(
    x: &OperatorSubspace,
    x0: &OperatorSubspace,
    restarts: usize,
    seed: u64,
    opts: SolverOptions,
) -> Result<CbIndexReport> {
    if x.n != x0.n {
        return Err(Error::DimensionMismatch { expected: x.n, found: x0.n });
    }
    let residual = x0.inclusion_residual(x);
    if residual > 1e-9 {
        return Err(Error::NotContained { residual });
    }
    let (dx, d0) = (x.dim(), x0.dim());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    // Orthogonal projection onto X₀, in coefficients.
    let projection = DMatrix::from_fn(d0, dx, |l, k| x0.coordinates(&x.basis[k]).0[l]);
    let mut best: Option<(f64, f64, SubspaceMap)> = None;
    let mut total_iterations = 0;
    let consider = |u: SubspaceMap, best: &mut Option<(f64, f64, SubspaceMap)>| -> Result<()> {
        if let Some((norm, dev)) = verify_cb_witness(&u, opts)? {
            if best.as_ref().is_none_or(|(b, ..)| norm < *b) {
                *best = Some((norm, dev, u));
            }
        }
        Ok(())
    };

    for r in 0..restarts.max(1) {
        let start = if r == 0 {
            projection.map(|z| z * (dx as f64))
        } else {
            let scale = rng.random_range(1.0..=2.0 * dx as f64);
            let noise = DMatrix::from_fn(d0, dx, |_, _| {
                Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
            });
            (&projection + noise * Complex64::new(0.3, 0.0)).map(|z| z * scale)
        };
        consider(map_from_coeffs(x, x0, &start), &mut best)?;
        let (theta, iters) = ccp_run(x, x0, start, opts)?;
        total_iterations += iters;
        consider(map_from_coeffs(x, x0, &theta), &mut best)?;
    }
    let (value, witness_deviation, witness) = match best {
        Some((v, d, u)) => (Some(v), Some(d), Some(u)),
        None => (None, None, None),
    };
    Ok(CbIndexReport {
        value,
        witness,
        witness_deviation,
        restarts: restarts.max(1),
        iterations: total_iterations,
    })
}

/// One penalty CCP run from `theta`; returns the last iterate and the step count.
fn ccp_run(
    x: &OperatorSubspace,
    x0: &OperatorSubspace,
    mut theta: DMatrix<Complex64>,
    opts: SolverOptions,
) -> Result<(DMatrix<Complex64>, usize)> {
    let (dx, d0, n) = (x.dim(), x0.dim(), x.n);
    let rows = paulsen_rows(x, n);
    let cdim = 4 * n * n;
    // a small initial penalty lets the zero map win, which is a dead end
    let mut tau = 100.0;
    let mut last = f64::INFINITY;
    let mut steps = 0;
    for _ in 0..CCP_ITERATIONS {
        steps += 1;
        let u = map_from_coeffs(x, x0, &theta);
        let at = cb_norm(&u, opts)?;
        if !at.is_optimal() {
            break;
        }
        // blocks: C₁, R, C₂, S, slack; free: Re θ, Im θ (column-major)
        let mut p = SdpProblem::new(vec![cdim, 1, cdim, 1, 1]);
        p.set_objective(1, SparseHermitian::scalar(1.0));
        p.set_objective(4, SparseHermitian::scalar(tau));
        let vars: Vec<(usize, usize)> = (0..dx * d0).map(|_| (p.add_free(0.0), p.add_free(0.0))).collect();
        let var = |l: usize, k: usize| vars[k * d0 + l];
        for (choi_block, r_block, shift) in [(0, 1, false), (2, 3, true)] {
            for row in &rows {
                match row.target {
                    Target::Diagonal(coeff) => p.add_constraint(
                        Constraint::new(0.0)
                            .with_block(choi_block, row.h.clone())
                            .with_block(r_block, SparseHermitian::scalar(-coeff)),
                    ),
                    Target::Corner { k, entry, imag } => {
                        let mut c = Constraint::new(if shift {
                            -read_target(&x.basis, k, entry, imag)
                        } else {
                            0.0
                        })
                        .with_block(choi_block, row.h.clone());
                        if let Some((q, pp)) = entry {
                            for l in 0..d0 {
                                let y = x0.basis[l][(q, pp)];
                                let (vr, vi) = var(l, k);
                                // Re/Im of (a + ib)·y
                                let (ca, cb) = if imag { (y.im, y.re) } else { (y.re, -y.im) };
                                c = c.with_free(vr, -ca).with_free(vi, -cb);
                            }
                        }
                        p.add_constraint(c);
                    }
                }
            }
        }
        // S = ℓ(θ) − 1 + slack with ℓ the linearization of ‖u‖cb at the iterate
        let mut lin = Constraint::new(at.value - 1.0)
            .with_block(3, SparseHermitian::scalar(1.0))
            .with_block(4, SparseHermitian::scalar(-1.0));
        let mut offset = 0.0;
        for k in 0..dx {
            for l in 0..d0 {
                let (vr, vi) = var(l, k);
                // ∂‖u‖cb/∂a_lk = Σ_qp Re(g)·Re(y) + Im(g)·Im(y), and likewise for b
                let (mut da, mut db) = (0.0, 0.0);
                for ((q, pp), gz) in at.subgradient[k].iter().enumerate().map(|(i, z)| ((i % n, i / n), *z)) {
                    let y = x0.basis[l][(q, pp)];
                    da += gz.re * y.re + gz.im * y.im;
                    db += -gz.re * y.im + gz.im * y.re;
                }
                offset += da * theta[(l, k)].re + db * theta[(l, k)].im;
                lin = lin.with_free(vr, -da).with_free(vi, -db);
            }
        }
        lin.rhs -= offset;
        p.add_constraint(lin);

        let sol = solve_with(&p, opts)?;
        if !sol.is_optimal() {
            log::debug!("ccp step ended: {}", crate::compile::describe(&sol));
            break;
        }
        theta = DMatrix::from_fn(d0, dx, |l, k| {
            let (vr, vi) = var(l, k);
            Complex64::new(sol.free_values[vr], sol.free_values[vi])
        });
        let r = sol.primal_blocks[1].get(0, 0).re;
        let slack = sol.primal_blocks[4].get(0, 0).re;
        if slack < 1e-9 && (last - r).abs() < 1e-8 {
            break;
        }
        last = r;
        tau = (tau * 2.0).min(1e4);
    }
    Ok((theta, steps))
}

/// Result of [`bounded_index_linf`].
#[derive(Clone, Debug, PartialEq)]
pub struct LinfReport {
    /// `‖T‖` at the optimum, the bounded index.
    pub value: f64,
    /// Optimal `t` in `T = t·(x ↦ Σ xᵢ · 1)`.
    pub t: f64,
    pub norm: f64,
    /// `‖T − id‖` at the optimum.
    pub deviation: f64,
}

/// `‖T‖` and `‖T − id‖` on `ℓ∞(n)` for `T(x) = ⟨c, x⟩·1` with real `c`,
/// evaluated exactly over the sign vectors (extreme points of the unit ball).
pub fn linf_norms(c: &[f64]) -> (f64, f64) {
    let n = c.len();
    let mut norm: f64 = 0.0;
    let mut dev: f64 = 0.0;
    for mask in 0u64..(1 << n) {
        let s = |i: usize| if mask >> i & 1 == 1 { -1.0 } else { 1.0 };
        let tc: f64 = (0..n).map(|i| c[i] * s(i)).sum();
        norm = norm.max(tc.abs());
        for i in 0..n {
            dev = dev.max((tc - s(i)).abs());
        }
    }
    (norm, dev)
}

/// Whether `‖T − id‖ ≤ ‖T‖ − 1` for `T(x) = ⟨c, x⟩·1`.
pub fn linf_feasible(c: &[f64]) -> bool {
    let (norm, dev) = linf_norms(c);
    dev <= norm - 1.0 + 1e-12
}

/// `Ind_B(ℓ∞(n) : ℂ1)`: the constants-valued maps are searched along the
/// symmetric ray `c = t·1` by bisection on `t`, each norm being evaluated
/// exactly over sign vectors.
pub fn bounded_index_linf(n: usize) -> Result<LinfReport> {
    if !(2..=20).contains(&n) {
        return Err(Error::InvalidInput(format!("n must lie in 2..=20, got {n}")));
    }
    let feasible = |t: f64| linf_feasible(&vec![t; n]);
    let (mut lo, mut hi) = (0.0, 2.0);
    debug_assert!(feasible(hi) && !feasible(lo));
    while hi - lo > 1e-13 {
        let mid = 0.5 * (lo + hi);
        if feasible(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let (norm, deviation) = linf_norms(&vec![hi; n]);
    Ok(LinfReport {
        value: norm,
        t: hi,
        norm,
        deviation,
    })
}

#[cfg(test)]
mod tests;
