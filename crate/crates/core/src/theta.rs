//! Lovász theta in two SDP forms, the quantum theta ϑ̃ in two forms, the
//! relative theta, and an eigenvalue-ratio lower-bound heuristic.

use std::fmt;

use nalgebra::DVector;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::compile::{describe, entry_selector, identity, re, sparse, unit_basis};
use crate::herm::{eig_hermitian, max_entangled, HermitianMatrix};
use crate::indices::{cp_index_relative, lambda_program, traceless_part, PrimalTrace};
use crate::opsys::{Graph, GraphSystemKind, MatricialSystem};
use crate::sdp::{solve_with, Constraint, Residuals, SdpProblem, SdpSolution, SolverOptions, SparseHermitian, Status};
use crate::{Error, Result};

/// Which program produced a [`ThetaResult`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ThetaForm {
    /// `min A₁₁` over `A ∈ E_Γ`, `A ⪰ J`.
    EGammaForm,
    /// `min maxᵢ Bᵢᵢ` over `B ∈ S_Γ`, `B ⪰ J`.
    SGammaForm,
    /// `max ⟨I ⊗ X + Y, Δ⟩` over `tr X = 1`, `Y ∈ S^⊥ ⊗ Mₙ`, `I ⊗ X + Y ⪰ 0`.
    DswDual,
    /// `1/λ*` for `max λ` with `(id ⊗ tr)(X) = (1 − λ)I`, `X + λΔ ∈ Mₙ ⊗ S`.
    DswPrimal,
    /// `Ind_CP(S_Γ : S_Λ)` through the CP-extension program.
    RelativeIndex,
}

impl ThetaForm {
    pub fn as_str(self) -> &'static str {
        match self {
            ThetaForm::EGammaForm => "E_gamma_form",
            ThetaForm::SGammaForm => "S_gamma_form",
            ThetaForm::DswDual => "dsw_dual",
            ThetaForm::DswPrimal => "dsw_primal",
            ThetaForm::RelativeIndex => "relative_index",
        }
    }
}

impl fmt::Display for ThetaForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Debug)]
pub struct ThetaResult {
    pub value: f64,
    pub form_used: ThetaForm,
    /// The value as implied by the dual objective.
    pub dual_value: f64,
    /// Optimal blocks of the program that was solved.
    pub certificate: Vec<HermitianMatrix>,
    /// Difference between the values implied by the primal and dual objectives.
    pub gap: f64,
    pub status: Status,
    pub iterations: usize,
    pub residuals: Residuals,
}

impl ThetaResult {
    fn new(form: ThetaForm, sol: SdpSolution, value: f64, value_of: impl Fn(f64) -> f64) -> Self {
        if !sol.is_optimal() {
            log::warn!("{form}: {}", describe(&sol));
        }
        let dual_value = value_of(sol.dual_value);
        Self {
            value,
            form_used: form,
            dual_value,
            gap: (value_of(sol.primal_value) - dual_value).abs(),
            status: sol.status,
            iterations: sol.iterations,
            residuals: sol.residuals,
            certificate: sol.primal_blocks,
        }
    }

    pub fn is_optimal(&self) -> bool {
        self.status == Status::Optimal
    }
}

fn non_adjacent_pairs(g: &Graph) -> impl Iterator<Item = (usize, usize)> + '_ {
    let n = g.vertex_count();
    (0..n).flat_map(move |i| ((i + 1)..n).map(move |j| (i, j))).filter(|&(i, j)| !g.has_edge(i, j))
}

/// Lovász theta of `g` by the chosen classical form. Certificate: `[A − J]`
/// for the `E_Γ` form, `[B − J, s₁, …, sₙ]` (slacks `t − Bᵢᵢ`) for the `S_Γ` form.
pub fn lovasz_theta(g: &Graph, form: ThetaForm, opts: SolverOptions) -> Result<ThetaResult> {
    let n = g.vertex_count();
    if n == 0 {
        return Err(Error::InvalidInput("graph has no vertices".into()));
    }
    match form {
        ThetaForm::EGammaForm => {
            let mut p = SdpProblem::new(vec![n]);
            p.set_objective(0, entry_selector(n, 0, 0));
            for i in 1..n {
                p.add_constraint(Constraint::new(0.0).with_block(
                    0,
                    SparseHermitian::from_upper(n, [(0, 0, re(-1.0)), (i, i, re(1.0))]),
                ));
            }
            for (i, j) in non_adjacent_pairs(g) {
                p.add_constraint(Constraint::new(-1.0).with_block(0, entry_selector(n, i, j)));
            }
            let sol = solve_with(&p, opts)?;
            let value = sol.primal_blocks[0].get(0, 0).re + 1.0;
            Ok(ThetaResult::new(form, sol, value, |obj| obj + 1.0))
        }
        ThetaForm::SGammaForm => {
            let mut blocks = vec![n];
            blocks.extend(std::iter::repeat_n(1, n));
            let mut p = SdpProblem::new(blocks);
            let t = p.add_free(1.0);
            for i in 0..n {
                p.add_constraint(
                    Constraint::new(1.0)
                        .with_free(t, 1.0)
                        .with_block(0, entry_selector(n, i, i).scale(-1.0))
                        .with_block(1 + i, SparseHermitian::scalar(-1.0)),
                );
            }
            for (i, j) in non_adjacent_pairs(g) {
                p.add_constraint(Constraint::new(-1.0).with_block(0, entry_selector(n, i, j)));
            }
            let sol = solve_with(&p, opts)?;
            let value = sol.free_values[t];
            Ok(ThetaResult::new(form, sol, value, |obj| obj))
        }
        other => Err(Error::InvalidInput(format!("{other} is not a graph form"))),
    }
}

/// `ϑ̃(S)` by the chosen program. Certificate: `[Z]` with `Z = I ⊗ X + Y` for
/// the dual form, `[X, λ]` for the primal form.
pub fn quantum_theta(s: &MatricialSystem, form: ThetaForm, opts: SolverOptions) -> Result<ThetaResult> {
    let n = s.ambient_dim();
    match form {
        ThetaForm::DswDual => {
            let mut p = SdpProblem::new(vec![n * n]);
            p.set_objective(0, sparse(&max_entangled(n)).scale(-1.0));
            let id = identity(n);
            p.add_constraint(Constraint::new(n as f64).with_block(0, SparseHermitian::kron(&id, &id)));
            let units = unit_basis(n);
            for sb in traceless_part(s).iter().map(sparse) {
                for h in &units {
                    p.add_constraint(Constraint::new(0.0).with_block(0, SparseHermitian::kron(&sb, h)));
                }
            }
            let sol = solve_with(&p, opts)?;
            let value = -sol.primal_value;
            Ok(ThetaResult::new(form, sol, value, |obj| -obj))
        }
        ThetaForm::DswPrimal => {
            let p = lambda_program(s, PrimalTrace::Second);
            let sol = solve_with(&p, opts)?;
            let value = 1.0 / sol.primal_blocks[1].get(0, 0).re;
            Ok(ThetaResult::new(form, sol, value, |obj| -1.0 / obj))
        }
        other => Err(Error::InvalidInput(format!("{other} is not a quantum theta form"))),
    }
}

/// `ϑ(Γ : Λ) = Ind_CP(S_Γ : S_Λ)` for a spanning subgraph `Λ` of `Γ`.
pub fn relative_theta(gamma: &Graph, lambda: &Graph, opts: SolverOptions) -> Result<ThetaResult> {
    if !lambda.is_subgraph_of(gamma) {
        return Err(Error::InvalidInput(
            "second graph must be a spanning subgraph of the first".into(),
        ));
    }
    let s = MatricialSystem::from_graph(gamma, GraphSystemKind::SGamma);
    let s0 = MatricialSystem::from_graph(lambda, GraphSystemKind::SGamma);
    let r = cp_index_relative(&s, &s0, opts)?;
    Ok(ThetaResult {
        value: r.value,
        form_used: ThetaForm::RelativeIndex,
        dual_value: r.dual_value,
        certificate: r.primal_certificate,
        gap: r.gap,
        status: r.status,
        iterations: r.iterations,
        residuals: r.residuals,
    })
}

/// Best `1 + λmax(x)/|λmin(x)|` found over Hermitian `x ∈ S^⊥`.
#[derive(Clone, Debug)]
pub struct HoffmanReport {
    /// `1 + λmax` of the witness, recomputed from its spectrum.
    pub value: f64,
    /// Normalized so that `λmin = −1`.
    pub witness: HermitianMatrix,
    pub lambda_min: f64,
    pub lambda_max: f64,
    pub restarts: usize,
}

const ASCENT_STEPS: usize = 300;

/// Eigenvalue-ratio lower bound by projected gradient ascent on the unit
/// sphere of `S^⊥`, restarted from `restarts` random points drawn from `seed`.
pub fn hoffman_heuristic(s: &MatricialSystem, restarts: usize, seed: u64) -> Result<HoffmanReport> {
    let perp = s.perp();
    if perp.is_zero() {
        return Err(Error::EmptyComplement);
    }
    let basis = perp.basis().elements();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let combine = |c: &DVector<f64>| {
        basis
            .iter()
            .zip(c.iter())
            .fold(HermitianMatrix::zeros(s.ambient_dim()), |acc, (b, &w)| acc.axpy(w, b))
    };
    // ratio and its gradient in the coordinates of S^⊥
    let eval = |c: &DVector<f64>| {
        let x = combine(c);
        let (vals, vecs) = eig_hermitian(&x);
        let (lo, hi) = (vals[0], vals[vals.len() - 1]);
        let u_lo = vecs.column(0);
        let u_hi = vecs.column(vals.len() - 1);
        let expect = |u: &nalgebra::DVectorView<'_, num_complex::Complex64>, b: &HermitianMatrix| {
            (u.adjoint() * b.as_matrix() * u)[(0, 0)].re
        };
        let f = hi / -lo;
        let grad = DVector::from_iterator(
            basis.len(),
            basis.iter().map(|b| {
                let (d_hi, d_lo) = (expect(&u_hi, b), expect(&u_lo, b));
                (d_hi * -lo + hi * d_lo) / (lo * lo)
            }),
        );
        (f, grad)
    };

    let mut best: Option<(f64, DVector<f64>)> = None;
    for _ in 0..restarts.max(1) {
        let mut c = DVector::from_fn(basis.len(), |_, _| StandardNormal.sample(&mut rng));
        c /= c.norm();
        let (mut f, mut grad) = eval(&c);
        let mut step = 0.5;
        for _ in 0..ASCENT_STEPS {
            // project the gradient onto the tangent space of the sphere
            let tangent = &grad - &c * c.dot(&grad);
            if tangent.norm() < 1e-12 {
                break;
            }
            let mut trial = &c + &tangent * step;
            trial /= trial.norm();
            let (ft, gt) = eval(&trial);
            if ft > f {
                c = trial;
                f = ft;
                grad = gt;
                step *= 1.5;
            } else {
                step *= 0.5;
                if step < 1e-12 {
                    break;
                }
            }
        }
        if best.as_ref().is_none_or(|(bf, _)| f > *bf) {
            best = Some((f, c));
        }
    }
    let (_, c) = best.expect("at least one restart");
    let x = combine(&c);
    let witness = x.scale(-1.0 / x.min_eigenvalue());
    let (lambda_min, lambda_max) = (witness.min_eigenvalue(), witness.max_eigenvalue());
    Ok(HoffmanReport {
        value: 1.0 + lambda_max / -lambda_min,
        witness,
        lambda_min,
        lambda_max,
        restarts: restarts.max(1),
    })
}

#[cfg(test)]
mod tests;
