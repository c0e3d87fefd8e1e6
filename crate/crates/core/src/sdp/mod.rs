//! Hermitian semidefinite programs in standard primal form.
//!
//! ```text
//! minimize    Σ_b ⟨C_b, X_b⟩ + c_fᵀ x_f
//! subject to  Σ_b ⟨A_ib, X_b⟩ + f_iᵀ x_f = b_i,   X_b ⪰ 0,   x_f free
//! ```
//!
//! The dual is `maximize bᵀy` subject to `C_b − Σ_i y_i A_ib ⪰ 0` and
//! `Σ_i y_i f_i = c_f`. Problems are realified, presolved and handed to an
//! interior-point method; solutions are mapped back to Hermitian blocks and
//! every reported residual is recomputed from the original data.

mod ipm;
mod presolve;
mod real;

use std::collections::BTreeMap;
use std::fmt::Write as _;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::herm::{CMatrix, HermitianMatrix};

/// Tolerance used when checking infeasibility certificates.
pub const CERTIFICATE_TOL: f64 = 1e-6;

/// Sparse Hermitian matrix holding every nonzero entry (both triangles).
#[derive(Clone, Debug, PartialEq)]
pub struct SparseHermitian {
    dim: usize,
    entries: Vec<(usize, usize, Complex64)>,
}

impl SparseHermitian {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            entries: Vec::new(),
        }
    }

    /// The `1 × 1` matrix `[a]`.
    pub fn scalar(a: f64) -> Self {
        Self::from_upper(1, [(0, 0, Complex64::new(a, 0.0))])
    }

    /// Builds from upper-triangle entries `(r, c, z)` with `r <= c`; duplicates add.
    /// Diagonal entries keep only their real part.
    pub fn from_upper(dim: usize, entries: impl IntoIterator<Item = (usize, usize, Complex64)>) -> Self {
        let mut acc: BTreeMap<(usize, usize), Complex64> = BTreeMap::new();
        for (r, c, z) in entries {
            assert!(r <= c && c < dim, "entry ({r}, {c}) outside upper triangle of {dim}");
            let z = if r == c { Complex64::new(z.re, 0.0) } else { z };
            *acc.entry((r, c)).or_default() += z;
        }
        Self::from_upper_map(dim, acc)
    }

    fn from_upper_map(dim: usize, acc: BTreeMap<(usize, usize), Complex64>) -> Self {
        let mut entries = Vec::with_capacity(2 * acc.len());
        for ((r, c), z) in acc {
            if z == Complex64::new(0.0, 0.0) {
                continue;
            }
            entries.push((r, c, z));
            if r != c {
                entries.push((c, r, z.conj()));
            }
        }
        entries.sort_by_key(|&(r, c, _)| (r, c));
        Self { dim, entries }
    }

    pub fn from_dense(a: &HermitianMatrix) -> Self {
        let n = a.dim();
        let m = a.as_matrix();
        let upper = (0..n).flat_map(|r| (r..n).map(move |c| (r, c))).map(|(r, c)| (r, c, m[(r, c)]));
        Self::from_upper(n, upper)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    /// All stored entries `(row, col, value)`, both triangles, sorted.
    pub fn entries(&self) -> &[(usize, usize, Complex64)] {
        &self.entries
    }

    pub fn to_dense(&self) -> HermitianMatrix {
        let mut m = CMatrix::zeros(self.dim, self.dim);
        for &(r, c, z) in &self.entries {
            m[(r, c)] = z;
        }
        HermitianMatrix::symmetrized(m)
    }

    /// `tr(A X)`.
    pub fn inner(&self, x: &HermitianMatrix) -> f64 {
        let m = x.as_matrix();
        self.entries.iter().map(|&(r, c, z)| (z * m[(c, r)]).re).sum()
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            dim: self.dim,
            entries: self
                .entries
                .iter()
                .filter(|_| s != 0.0)
                .map(|&(r, c, z)| (r, c, z * s))
                .collect(),
        }
    }

    /// `A ⊗ B` in the lexicographic index convention.
    pub fn kron(a: &Self, b: &Self) -> Self {
        let nb = b.dim;
        let mut entries = Vec::with_capacity(a.nnz() * b.nnz());
        for &(r1, c1, z1) in &a.entries {
            for &(r2, c2, z2) in &b.entries {
                entries.push((r1 * nb + r2, c1 * nb + c2, z1 * z2));
            }
        }
        entries.sort_by_key(|&(r, c, _)| (r, c));
        Self {
            dim: a.dim * nb,
            entries,
        }
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> f64 {
        self.entries.iter().map(|e| e.2.norm()).fold(0.0, f64::max)
    }
}

/// One equality row: `Σ ⟨A_b, X_b⟩ + Σ f_j x_j = rhs`.
#[derive(Clone, Debug, PartialEq)]
pub struct Constraint {
    pub terms: Vec<(usize, SparseHermitian)>,
    pub free: Vec<(usize, f64)>,
    pub rhs: f64,
}

impl Constraint {
    pub fn new(rhs: f64) -> Self {
        Self {
            terms: Vec::new(),
            free: Vec::new(),
            rhs,
        }
    }

    pub fn with_block(mut self, block: usize, a: SparseHermitian) -> Self {
        if a.nnz() > 0 {
            self.terms.push((block, a));
        }
        self
    }

    pub fn with_free(mut self, var: usize, coeff: f64) -> Self {
        if coeff != 0.0 {
            self.free.push((var, coeff));
        }
        self
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SdpProblem {
    pub blocks: Vec<usize>,
    pub objective: Vec<SparseHermitian>,
    pub free_objective: Vec<f64>,
    pub constraints: Vec<Constraint>,
}

impl SdpProblem {
    /// A problem with the given PSD block sizes, zero objective and no rows.
    pub fn new(blocks: Vec<usize>) -> Self {
        let objective = blocks.iter().map(|&n| SparseHermitian::zeros(n)).collect();
        Self {
            blocks,
            objective,
            free_objective: Vec::new(),
            constraints: Vec::new(),
        }
    }

    /// Adds a free scalar with objective coefficient `cost`; returns its index.
    pub fn add_free(&mut self, cost: f64) -> usize {
        self.free_objective.push(cost);
        self.free_objective.len() - 1
    }

    pub fn set_objective(&mut self, block: usize, c: SparseHermitian) {
        self.objective[block] = c;
    }

    pub fn add_constraint(&mut self, c: Constraint) {
        self.constraints.push(c);
    }

    pub fn num_free(&self) -> usize {
        self.free_objective.len()
    }

    pub fn validate(&self) -> Result<()> {
        if self.objective.len() != self.blocks.len() {
            return Err(Error::DimensionMismatch {
                expected: self.blocks.len(),
                found: self.objective.len(),
            });
        }
        for (c, &n) in self.objective.iter().zip(&self.blocks) {
            if c.dim() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: c.dim(),
                });
            }
        }
        for (i, con) in self.constraints.iter().enumerate() {
            for (b, a) in &con.terms {
                let n = *self.blocks.get(*b).ok_or_else(|| {
                    Error::InvalidInput(format!("constraint {i} references block {b}"))
                })?;
                if a.dim() != n {
                    return Err(Error::DimensionMismatch {
                        expected: n,
                        found: a.dim(),
                    });
                }
            }
            if let Some((j, _)) = con.free.iter().find(|(j, _)| *j >= self.num_free()) {
                return Err(Error::InvalidInput(format!(
                    "constraint {i} references free variable {j}"
                )));
            }
            if !con.rhs.is_finite() {
                return Err(Error::InvalidInput(format!("constraint {i} has non-finite rhs")));
            }
        }
        Ok(())
    }

    /// Sparse text dump for debugging.
    ///
    /// Header lines start with `#`. Each data line is
    /// `<matrix> <block> <row> <col> <re> <im>` where matrix 0 is the objective
    /// and matrix `i` is constraint `i` (1-based); only `row <= col` is listed.
    /// Free coefficients use block `free` and column index 0.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# blocks {}", join(self.blocks.iter()));
        let _ = writeln!(out, "# free {}", self.num_free());
        let _ = writeln!(
            out,
            "# rhs {}",
            join(self.constraints.iter().map(|c| format!("{:e}", c.rhs)))
        );
        let line = |mat: usize, blk: usize, a: &SparseHermitian, out: &mut String| {
            for &(r, c, z) in a.entries() {
                if r <= c {
                    let _ = writeln!(out, "{mat} {blk} {r} {c} {:e} {:e}", z.re, z.im);
                }
            }
        };
        for (b, c) in self.objective.iter().enumerate() {
            line(0, b, c, &mut out);
        }
        for (j, &c) in self.free_objective.iter().enumerate() {
            let _ = writeln!(out, "0 free {j} 0 {c:e} 0e0");
        }
        for (i, con) in self.constraints.iter().enumerate() {
            for (b, a) in &con.terms {
                line(i + 1, *b, a, &mut out);
            }
            for &(j, f) in &con.free {
                let _ = writeln!(out, "{} free {j} 0 {f:e} 0e0", i + 1);
            }
        }
        out
    }

    fn free_residual(&self, y: &[f64]) -> f64 {
        let mut fty = self.free_objective.clone();
        for (con, &yi) in self.constraints.iter().zip(y) {
            for &(j, f) in &con.free {
                fty[j] -= yi * f;
            }
        }
        fty.iter().fold(0.0, |a, v| a.max(v.abs()))
    }

    /// `C_b − Σ_i y_i A_ib` for every block.
    pub fn dual_slack(&self, y: &[f64]) -> Vec<HermitianMatrix> {
        let mut z: Vec<CMatrix> = self.objective.iter().map(|c| c.to_dense().into_matrix()).collect();
        for (con, &yi) in self.constraints.iter().zip(y) {
            if yi == 0.0 {
                continue;
            }
            for (b, a) in &con.terms {
                for &(r, c, v) in a.entries() {
                    z[*b][(r, c)] -= v * yi;
                }
            }
        }
        z.into_iter().map(HermitianMatrix::symmetrized).collect()
    }

    /// `Σ_b ⟨A_ib, X_b⟩ + f_iᵀ x_f` for every row.
    pub fn apply(&self, x: &[HermitianMatrix], xf: &[f64]) -> Vec<f64> {
        self.constraints
            .iter()
            .map(|con| {
                con.terms.iter().map(|(b, a)| a.inner(&x[*b])).sum::<f64>()
                    + con.free.iter().map(|&(j, f)| f * xf[j]).sum::<f64>()
            })
            .collect()
    }

    pub fn objective_value(&self, x: &[HermitianMatrix], xf: &[f64]) -> f64 {
        self.objective.iter().zip(x).map(|(c, x)| c.inner(x)).sum::<f64>()
            + self.free_objective.iter().zip(xf).map(|(c, v)| c * v).sum::<f64>()
    }
}

fn join<T: ToString>(it: impl Iterator<Item = T>) -> String {
    it.map(|t| t.to_string()).collect::<Vec<_>>().join(" ")
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Optimal,
    PrimalInfeasible,
    DualInfeasible,
    MaxIterations,
    /// Factorization or step-length failure; the best iterate is returned.
    NumericalBreakdown,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Optimal => "optimal",
            Status::PrimalInfeasible => "primal_infeasible",
            Status::DualInfeasible => "dual_infeasible",
            Status::MaxIterations => "max_iterations",
            Status::NumericalBreakdown => "numerical_breakdown",
        }
    }
}

impl std::fmt::Display for Status {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Improving rays proving infeasibility.
#[derive(Clone, Debug, PartialEq)]
pub enum Certificate {
    /// `bᵀy = 1`, `Σ y_i A_i ⪯ 0`, `Σ y_i f_i = 0`.
    PrimalInfeasible { y: Vec<f64> },
    /// `X ⪰ 0`, `A(X) + F x_f = 0`, `⟨C, X⟩ + c_fᵀ x_f = −1`.
    DualInfeasible {
        blocks: Vec<HermitianMatrix>,
        free: Vec<f64>,
    },
}

/// Absolute residuals recomputed from problem data.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Residuals {
    /// `max_i |A_i(X) + f_iᵀx_f − b_i|`, together with PSD violation of `X`.
    pub primal_feas: f64,
    /// PSD violation of `C − Aᵀy` together with `max |c_f − Fᵀy|`.
    pub dual_feas: f64,
    /// `|primal_value − dual_value|`.
    pub gap: f64,
}

impl Residuals {
    pub fn max(&self) -> f64 {
        self.primal_feas.max(self.dual_feas).max(self.gap)
    }
}

#[derive(Clone, Debug)]
pub struct SdpSolution {
    pub status: Status,
    pub primal_value: f64,
    pub dual_value: f64,
    pub primal_blocks: Vec<HermitianMatrix>,
    pub free_values: Vec<f64>,
    /// One multiplier per original constraint.
    pub dual_vector: Vec<f64>,
    pub residuals: Residuals,
    pub iterations: usize,
    pub certificate: Option<Certificate>,
}

impl SdpSolution {
    pub fn is_optimal(&self) -> bool {
        self.status == Status::Optimal
    }
}

/// Residual report from [`verify`].
#[derive(Clone, Debug, PartialEq)]
pub struct VerifyReport {
    pub primal_feas: f64,
    pub psd_violation: f64,
    pub dual_feas: f64,
    pub free_feas: f64,
    pub gap: f64,
    pub primal_value: f64,
    pub dual_value: f64,
    /// `Some(passed)` when the solution carries a certificate.
    pub certificate_ok: Option<bool>,
}

impl VerifyReport {
    pub fn residuals(&self) -> Residuals {
        Residuals {
            primal_feas: self.primal_feas.max(self.psd_violation),
            dual_feas: self.dual_feas.max(self.free_feas),
            gap: self.gap,
        }
    }

    /// Optimality to `tol`, with the gap measured relative to the value.
    pub fn within(&self, tol: f64) -> bool {
        self.primal_feas <= tol
            && self.psd_violation <= tol
            && self.dual_feas <= tol
            && self.free_feas <= tol
            && self.gap <= tol * (1.0 + self.primal_value.abs())
    }
}

fn psd_violation(blocks: &[HermitianMatrix]) -> f64 {
    blocks
        .iter()
        .map(|x| (-x.min_eigenvalue()).max(0.0))
        .fold(0.0, f64::max)
}

/// Recomputes all residuals of `sol` against `problem`.
///
/// Certificates are checked at `tol`: the ray conditions must hold up to
/// `tol` relative to the data scale.
pub fn verify(problem: &SdpProblem, sol: &SdpSolution, tol: f64) -> VerifyReport {
    let ax = problem.apply(&sol.primal_blocks, &sol.free_values);
    let primal_feas = ax
        .iter()
        .zip(&problem.constraints)
        .map(|(v, c)| (v - c.rhs).abs())
        .fold(0.0, f64::max);
    let psd = psd_violation(&sol.primal_blocks);
    let z = problem.dual_slack(&sol.dual_vector);
    let dual_feas = psd_violation(&z);
    let free_feas = problem.free_residual(&sol.dual_vector);
    let primal_value = problem.objective_value(&sol.primal_blocks, &sol.free_values);
    let dual_value: f64 = problem
        .constraints
        .iter()
        .zip(&sol.dual_vector)
        .map(|(c, y)| c.rhs * y)
        .sum();
    let certificate_ok = sol
        .certificate
        .as_ref()
        .map(|cert| check_certificate(problem, cert, tol));
    VerifyReport {
        primal_feas,
        psd_violation: psd,
        dual_feas,
        free_feas,
        gap: (primal_value - dual_value).abs(),
        primal_value,
        dual_value,
        certificate_ok,
    }
}

/// Checks a Farkas-type certificate numerically.
pub fn check_certificate(problem: &SdpProblem, cert: &Certificate, tol: f64) -> bool {
    match cert {
        Certificate::PrimalInfeasible { y } => {
            if y.len() != problem.constraints.len() {
                return false;
            }
            let by: f64 = problem.constraints.iter().zip(y).map(|(c, v)| c.rhs * v).sum();
            // Σ y_i A_i ⪯ 0 is the dual slack of a zero objective being PSD.
            let mut zero_obj = problem.clone();
            zero_obj.objective = problem.blocks.iter().map(|&n| SparseHermitian::zeros(n)).collect();
            zero_obj.free_objective = vec![0.0; problem.num_free()];
            let slack = zero_obj.dual_slack(y);
            let scale = 1.0 + y.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
            (by - 1.0).abs() <= tol
                && psd_violation(&slack) <= tol * scale
                && zero_obj.free_residual(y) <= tol * scale
        }
        Certificate::DualInfeasible { blocks, free } => {
            if blocks.len() != problem.blocks.len() || free.len() != problem.num_free() {
                return false;
            }
            let ax = problem.apply(blocks, free);
            let scale = 1.0
                + blocks.iter().map(|b| b.frobenius_norm()).fold(0.0, f64::max)
                + free.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
            let cx = problem.objective_value(blocks, free);
            (cx + 1.0).abs() <= tol * scale
                && psd_violation(blocks) <= tol * scale
                && ax.iter().all(|v| v.abs() <= tol * scale)
        }
    }
}

/// Solver parameters.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolverOptions {
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            tol: 1e-8,
            max_iter: 500,
        }
    }
}

/// Solves with default tolerance `1e-8` and at most 500 iterations.
pub fn solve(problem: &SdpProblem) -> Result<SdpSolution> {
    solve_with(problem, SolverOptions::default())
}

pub fn solve_with(problem: &SdpProblem, opts: SolverOptions) -> Result<SdpSolution> {
    problem.validate()?;
    let m = problem.constraints.len();
    let realified = real::realify(problem);
    let rp = &realified.problem;
    let pre = presolve::presolve(rp);
    if !pre.dropped.is_empty() {
        log::warn!("presolve dropped {} dependent constraint rows", pre.dropped.len());
    }

    if let Some(yr) = pre.inconsistency {
        let mut y = vec![0.0; m];
        for (k, v) in yr.into_iter().enumerate() {
            y[realified.row_origin[k]] += v;
        }
        let cert = Certificate::PrimalInfeasible { y: y.clone() };
        return Ok(finish(problem, Status::PrimalInfeasible, zero_blocks(problem), vec![0.0; problem.num_free()], y, 0, Some(cert)));
    }

    // Kept rows, scaled to unit norm.
    let mut scales = Vec::with_capacity(pre.kept.len());
    let rows = pre
        .kept
        .iter()
        .map(|&k| {
            let row = &rp.rows[k];
            let s = row.norm();
            scales.push(s);
            real::RealRow {
                parts: row
                    .parts
                    .iter()
                    .map(|(b, a)| {
                        let entries = a.entries.iter().map(|&(r, c, v)| (r, c, v / s)).collect();
                        (*b, real::SymSparse { entries })
                    })
                    .collect(),
                free: row.free.iter().map(|&(j, f)| (j, f / s)).collect(),
                rhs: row.rhs / s,
            }
        })
        .collect();
    let reduced = real::RealProblem {
        dims: rp.dims.clone(),
        c: rp.c.clone(),
        cf: rp.cf.clone(),
        rows,
    };

    let out = ipm::solve(
        &reduced,
        &ipm::IpmSettings {
            tol: 0.1 * opts.tol,
            max_iter: opts.max_iter,
        },
    );

    let map_y = |yk: &nalgebra::DVector<f64>| {
        let mut y = vec![0.0; m];
        for (q, &k) in pre.kept.iter().enumerate() {
            y[realified.row_origin[k]] += yk[q] / scales[q];
        }
        y
    };
    let recover = |xs: &[DMatrix<f64>]| -> Vec<HermitianMatrix> {
        xs.iter()
            .zip(&problem.blocks)
            .zip(&realified.modes)
            .map(|((x, &n), &mode)| real::recover_block(x, n, mode))
            .collect()
    };

    let status = match out.status {
        ipm::IpmStatus::Optimal => Status::Optimal,
        ipm::IpmStatus::PrimalInfeasible => Status::PrimalInfeasible,
        ipm::IpmStatus::DualInfeasible => Status::DualInfeasible,
        ipm::IpmStatus::MaxIterations => Status::MaxIterations,
        ipm::IpmStatus::NumericalBreakdown => Status::NumericalBreakdown,
    };
    let certificate = match status {
        Status::PrimalInfeasible => out
            .primal_ray
            .as_ref()
            .map(|r| Certificate::PrimalInfeasible { y: map_y(r) }),
        Status::DualInfeasible => out.dual_ray.as_ref().map(|(x, xf)| Certificate::DualInfeasible {
            blocks: recover(x),
            free: xf.iter().copied().collect(),
        }),
        _ => None,
    };
    let blocks = recover(&out.x);
    let y = map_y(&out.y);
    let mut sol = finish(
        problem,
        status,
        blocks,
        out.xf.iter().copied().collect(),
        y,
        out.iterations,
        certificate,
    );
    // The best iterate of a stalled run may already meet the tolerance.
    if matches!(sol.status, Status::MaxIterations | Status::NumericalBreakdown)
        && verify(problem, &sol, opts.tol).within(opts.tol)
    {
        sol.status = Status::Optimal;
    }
    if sol.status != Status::Optimal {
        log::debug!("sdp finished with status {} after {} iterations", sol.status, sol.iterations);
    }
    Ok(sol)
}

fn zero_blocks(p: &SdpProblem) -> Vec<HermitianMatrix> {
    p.blocks.iter().map(|&n| HermitianMatrix::zeros(n)).collect()
}

fn finish(
    problem: &SdpProblem,
    status: Status,
    blocks: Vec<HermitianMatrix>,
    free: Vec<f64>,
    y: Vec<f64>,
    iterations: usize,
    certificate: Option<Certificate>,
) -> SdpSolution {
    let mut sol = SdpSolution {
        status,
        primal_value: 0.0,
        dual_value: 0.0,
        primal_blocks: blocks,
        free_values: free,
        dual_vector: y,
        residuals: Residuals::default(),
        iterations,
        certificate,
    };
    let report = verify(problem, &sol, CERTIFICATE_TOL);
    sol.primal_value = report.primal_value;
    sol.dual_value = report.dual_value;
    sol.residuals = report.residuals();
    sol
}
