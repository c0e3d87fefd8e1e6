//! CP-index programs: ambient primal and dual, relative index through a CP
//! extension, λ̃, the co-index and the tensor multiplicativity check.

use crate::compile::{
    conj, delta_pairing, describe, identity, pairing, sparse, sparse_basis, trace_of, traceless_basis,
    unit_basis,
};
use crate::herm::{kron, orthonormalize_in, HermitianMatrix};
use crate::opsys::{KernelSpace, MatricialSystem};
use crate::sdp::{solve_with, Constraint, Residuals, SdpProblem, SdpSolution, SolverOptions, SparseHermitian, Status};
use crate::{Error, Result};

/// Largest `n·k` accepted by [`multiplicativity_check`].
pub const TENSOR_SIZE_CAP: usize = 9;

/// Output of an index program.
#[derive(Clone, Debug)]
pub struct IndexResult {
    pub value: f64,
    /// `λ*` for the primal program, `tr X*` for the dual, `1/μ*` for the μ-programs.
    pub reciprocal: f64,
    /// The SDP's optimal blocks, in the order documented on each program.
    pub primal_certificate: Vec<HermitianMatrix>,
    /// Dual slack matrices `C − A*y`, one per block.
    pub dual_certificate: Vec<HermitianMatrix>,
    pub dual_vector: Vec<f64>,
    /// The index as implied by the dual objective.
    pub dual_value: f64,
    /// `|value from primal objective − value from dual objective|`.
    pub gap: f64,
    pub status: Status,
    pub iterations: usize,
    pub residuals: Residuals,
}

impl IndexResult {
    fn from_solution(problem: &SdpProblem, sol: SdpSolution, value_of: impl Fn(f64) -> f64, value: f64, reciprocal: f64) -> Self {
        let dual_value = value_of(sol.dual_value);
        let gap = (value_of(sol.primal_value) - dual_value).abs();
        Self {
            value,
            dual_value,
            reciprocal,
            dual_certificate: problem.dual_slack(&sol.dual_vector),
            primal_certificate: sol.primal_blocks,
            dual_vector: sol.dual_vector,
            gap,
            status: sol.status,
            iterations: sol.iterations,
            residuals: sol.residuals,
        }
    }

    pub fn is_optimal(&self) -> bool {
        self.status == Status::Optimal
    }

    /// Turns a non-optimal status into [`Error::Solver`] carrying the residuals.
    pub fn ensure_optimal(self) -> Result<Self> {
        if self.is_optimal() {
            return Ok(self);
        }
        Err(Error::Solver(format!(
            "status {} after {} iterations (primal_feas {:.2e}, dual_feas {:.2e}, gap {:.2e})",
            self.status, self.iterations, self.residuals.primal_feas, self.residuals.dual_feas, self.residuals.gap
        )))
    }
}

fn solve_logged(problem: &SdpProblem, opts: SolverOptions, what: &str) -> Result<SdpSolution> {
    let sol = solve_with(problem, opts)?;
    if !sol.is_optimal() {
        log::warn!("{what}: {}", describe(&sol));
    }
    Ok(sol)
}

fn clean(v: f64) -> f64 {
    if v.abs() < 1e-14 {
        0.0
    } else {
        v
    }
}

/// Orthonormal basis of `S ⊖ ℂI`.
pub(crate) fn traceless_part(s: &MatricialSystem) -> Vec<HermitianMatrix> {
    let n = s.ambient_dim();
    let id = HermitianMatrix::identity(n);
    let parts: Vec<_> = s
        .basis()
        .elements()
        .iter()
        .map(|b| b.axpy(-b.trace() / n as f64, &id))
        .collect();
    orthonormalize_in(n, &parts)
        .expect("dimensions agree")
        .elements()
        .to_vec()
}

/// Which partial trace normalizes the primal variable.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum PrimalTrace {
    /// `(tr ⊗ id)(X) = (1 − λ)I`.
    First,
    /// `(id ⊗ tr)(X) = (1 − λ)I`.
    Second,
}

/// `max λ` s.t. partial trace of `X` equals `(1 − λ)I`, `X + λΔ ∈ Mₙ ⊗ S`, `X ⪰ 0`.
/// Blocks: `[X, λ]`.
pub(crate) fn lambda_program(s: &MatricialSystem, side: PrimalTrace) -> SdpProblem {
    let n = s.ambient_dim();
    let mut p = SdpProblem::new(vec![n * n, 1]);
    p.set_objective(1, SparseHermitian::scalar(-1.0));
    let units = unit_basis(n);
    let id = identity(n);
    // With the first factor traced out, the S^⊥ part of the normalization
    // already follows from the membership rows.
    let normalizers = match side {
        PrimalTrace::First => sparse_basis(s.basis()),
        PrimalTrace::Second => units.clone(),
    };
    for h in &normalizers {
        let tr = trace_of(h);
        let a = match side {
            PrimalTrace::First => SparseHermitian::kron(&id, h),
            PrimalTrace::Second => SparseHermitian::kron(h, &id),
        };
        p.add_constraint(
            Constraint::new(tr)
                .with_block(0, a)
                .with_block(1, SparseHermitian::scalar(tr)),
        );
    }
    let perp = sparse_basis(s.perp().basis());
    for b in &units {
        for g in &perp {
            p.add_constraint(
                Constraint::new(0.0)
                    .with_block(0, SparseHermitian::kron(b, g))
                    .with_block(1, SparseHermitian::scalar(clean(delta_pairing(b, g)))),
            );
        }
    }
    p
}

fn lambda_result(p: &SdpProblem, sol: SdpSolution) -> IndexResult {
    let lambda = sol.primal_blocks[1].get(0, 0).re;
    // objective is −λ
    IndexResult::from_solution(p, sol, |obj| 1.0 / -obj, 1.0 / lambda, lambda)
}

/// `Ind_CP(Mₙ : S)` from the λ-program. Certificate blocks: `[X, λ]` with
/// `X = Choi(Φ) − λΔ` for the optimal unital CP map `Φ`.
pub fn cp_index_primal(s: &MatricialSystem, opts: SolverOptions) -> Result<IndexResult> {
    let p = lambda_program(s, PrimalTrace::First);
    let sol = solve_logged(&p, opts, "cp_index_primal")?;
    Ok(lambda_result(&p, sol))
}

/// `min tr X` over `Z = I ⊗ X + Y ⪰ 0`, `Y ∈ Mₙ ⊗ S^⊥`, `⟨Z, Δ⟩ = 1`.
/// The variable is `Z`; membership is imposed against `(I^⊥) ⊗ S`.
fn trace_program(s: &MatricialSystem) -> SdpProblem {
    let n = s.ambient_dim();
    let mut p = SdpProblem::new(vec![n * n]);
    let id = identity(n);
    p.set_objective(0, SparseHermitian::kron(&id, &id).scale(1.0 / n as f64));
    p.add_constraint(Constraint::new(1.0).with_block(0, sparse(&crate::herm::max_entangled(n))));
    let members = sparse_basis(s.basis());
    for h in &traceless_basis(n) {
        for sb in &members {
            p.add_constraint(Constraint::new(0.0).with_block(0, SparseHermitian::kron(h, sb)));
        }
    }
    p
}

/// `Ind_CP(Mₙ : S)` from the dual trace program. Certificate blocks: `[Z]`
/// with `Z = I ⊗ X + Y`; `X` is recovered by [`split_dual_variable`].
pub fn cp_index_dual(s: &MatricialSystem, opts: SolverOptions) -> Result<IndexResult> {
    let p = trace_program(s);
    let sol = solve_logged(&p, opts, "cp_index_dual")?;
    let n = s.ambient_dim() as f64;
    let tr_x = sol.primal_blocks[0].trace() / n;
    Ok(IndexResult::from_solution(&p, sol, |obj| 1.0 / obj, 1.0 / tr_x, tr_x))
}

/// Splits `Z = I ⊗ X + Y` with `X ∈ S` and `Y ∈ Mₙ ⊗ S^⊥`; `X` is unique up to
/// `S^⊥`, so the `S`-component is returned.
pub fn split_dual_variable(s: &MatricialSystem, z: &HermitianMatrix) -> Result<(HermitianMatrix, HermitianMatrix)> {
    let n = s.ambient_dim();
    let reduced = crate::herm::partial_trace(z, crate::herm::TraceSide::First, n, n)?;
    let x = s.project(&reduced.scale(1.0 / n as f64));
    let y = z.sub(&kron(&HermitianMatrix::identity(n), &x));
    Ok((x, y))
}

/// `Ind_CP(Mₙ : S)` using whichever of the primal and dual programs has fewer rows.
pub fn cp_index(s: &MatricialSystem, opts: SolverOptions) -> Result<IndexResult> {
    let n = s.ambient_dim();
    let primal_rows = n * n * (n * n - s.dim()) + s.dim();
    let dual_rows = (n * n - 1) * s.dim() + 1;
    if primal_rows <= dual_rows {
        cp_index_primal(s, opts)
    } else {
        cp_index_dual(s, opts)
    }
}

/// `Ind_CP(S : S₀)` as `min μ` over CP `Ψ` on `Mₙ` with `Ψ(x) + x ∈ S₀` for
/// `x ∈ S` and `Ψ(I) = (μ − 1)I`. Certificate blocks: `[Choi(Ψ), μ − 1]`.
pub fn cp_index_relative(s: &MatricialSystem, s0: &MatricialSystem, opts: SolverOptions) -> Result<IndexResult> {
    s0.check_subsystem_of(s)?;
    let n = s.ambient_dim();
    let mut p = SdpProblem::new(vec![n * n, 1]);
    p.set_objective(1, SparseHermitian::scalar(1.0));
    let id = identity(n);
    for h in &unit_basis(n) {
        let tr = trace_of(h);
        p.add_constraint(
            Constraint::new(0.0)
                .with_block(0, SparseHermitian::kron(&id, h))
                .with_block(1, SparseHermitian::scalar(-tr)),
        );
    }
    let xs: Vec<_> = traceless_part(s).iter().map(sparse).collect();
    let gs = sparse_basis(s0.perp().basis());
    for x in &xs {
        let xbar = conj(x);
        for g in &gs {
            p.add_constraint(Constraint::new(clean(-pairing(x, g))).with_block(0, SparseHermitian::kron(&xbar, g)));
        }
    }
    let sol = solve_logged(&p, opts, "cp_index_relative")?;
    let mu = 1.0 + sol.primal_blocks[1].get(0, 0).re;
    Ok(IndexResult::from_solution(&p, sol, |obj| 1.0 + obj, mu, 1.0 / mu))
}

/// `Ind_CP(S : S₀)`, taking the cheaper ambient program when `S = Mₙ`.
pub fn ind_cp(s: &MatricialSystem, s0: &MatricialSystem, opts: SolverOptions) -> Result<IndexResult> {
    if s.is_full() {
        s0.check_subsystem_of(s)?;
        cp_index(s0, opts)
    } else {
        cp_index_relative(s, s0, opts)
    }
}

/// `λ̃(S) = Ind_CP(S : ℂI)`.
pub fn lambda_tilde(s: &MatricialSystem, opts: SolverOptions) -> Result<IndexResult> {
    cp_index_relative(s, &MatricialSystem::scalars(s.ambient_dim()), opts)
}

/// `min μ` over CP `φ` with `φ − id` CP, `J ⊆ ker φ` and `φ(I) ⪯ μI`.
/// Certificate blocks: `[Choi(φ) − Δ, μI − φ(I), μ]`.
pub fn coindex(j: &KernelSpace, opts: SolverOptions) -> Result<IndexResult> {
    let n = j.ambient_dim();
    let mut p = SdpProblem::new(vec![n * n, n, 1]);
    p.set_objective(2, SparseHermitian::scalar(1.0));
    let units = unit_basis(n);
    let id = identity(n);
    for jb in sparse_basis(j.basis()) {
        let jbar = conj(&jb);
        for h in &units {
            p.add_constraint(Constraint::new(clean(-pairing(&jb, h))).with_block(0, SparseHermitian::kron(&jbar, h)));
        }
    }
    for h in &units {
        let tr = trace_of(h);
        p.add_constraint(
            Constraint::new(-tr)
                .with_block(1, h.clone())
                .with_block(0, SparseHermitian::kron(&id, h))
                .with_block(2, SparseHermitian::scalar(-tr)),
        );
    }
    let sol = solve_logged(&p, opts, "coindex")?;
    let mu = sol.primal_blocks[2].get(0, 0).re;
    Ok(IndexResult::from_solution(&p, sol, |obj| obj, mu, 1.0 / mu))
}

/// Combined index of a tensor inclusion against the product of its factors.
#[derive(Clone, Debug)]
pub struct MultiplicativityReport {
    pub combined: IndexResult,
    pub first: IndexResult,
    pub second: IndexResult,
    pub product: f64,
    /// `|combined − product| / product`.
    pub relative_deviation: f64,
}

/// Compares `Ind_CP(S ⊗ T : S₀ ⊗ T₀)` with `Ind_CP(S : S₀)·Ind_CP(T : T₀)`.
pub fn multiplicativity_check(
    s: &MatricialSystem,
    s0: &MatricialSystem,
    t: &MatricialSystem,
    t0: &MatricialSystem,
    opts: SolverOptions,
) -> Result<MultiplicativityReport> {
    let nk = s.ambient_dim() * t.ambient_dim();
    if nk > TENSOR_SIZE_CAP {
        return Err(Error::SizeGuard { dim: nk, cap: TENSOR_SIZE_CAP });
    }
    let first = ind_cp(s, s0, opts)?;
    let second = ind_cp(t, t0, opts)?;
    let combined = ind_cp(&s.tensor_min(t), &s0.tensor_min(t0), opts)?;
    let product = first.value * second.value;
    Ok(MultiplicativityReport {
        relative_deviation: (combined.value - product).abs() / product,
        combined,
        first,
        second,
        product,
    })
}
