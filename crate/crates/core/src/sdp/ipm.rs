//! Infeasible-start primal-dual interior-point method on real symmetric blocks.
//!
//! Standard form: minimize `Σ_b ⟨C_b, X_b⟩ + c_fᵀ x_f` subject to
//! `Σ_b ⟨A_ib, X_b⟩ + f_iᵀ x_f = b_i`, `X_b ⪰ 0`, `x_f` free. The dual is
//! maximize `bᵀy` subject to `C_b - Σ_i y_i A_ib = Z_b ⪰ 0`, `Fᵀy = c_f`.
//!
//! Search directions use the HKM scaling with a Mehrotra predictor-corrector.
//! Free variables enter through the bordered Schur system
//! `[M F; Fᵀ 0]`. Infeasibility is detected from diverging iterates whose
//! normalized rays satisfy the Farkas conditions.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn, SymmetricEigen, LU};

use super::real::{RealProblem, SymSparse};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum IpmStatus {
    Optimal,
    PrimalInfeasible,
    DualInfeasible,
    MaxIterations,
    NumericalBreakdown,
}

pub(crate) struct IpmOutput {
    pub status: IpmStatus,
    pub x: Vec<DMatrix<f64>>,
    pub xf: DVector<f64>,
    pub y: DVector<f64>,
    pub iterations: usize,
    /// Farkas ray `y` (bᵀy = 1, Σ y_i A_i ⪯ 0, Fᵀy = 0) for primal infeasibility.
    pub primal_ray: Option<DVector<f64>>,
    /// Ray `(X, x_f)` (A(X) + F x_f = 0, ⟨C, X⟩ + c_fᵀ x_f = -1) for dual infeasibility.
    pub dual_ray: Option<(Vec<DMatrix<f64>>, DVector<f64>)>,
}

pub(crate) struct IpmSettings {
    pub tol: f64,
    pub max_iter: usize,
}

/// Merit, `X`, `x_f` and `y` of an iterate.
type BestIterate = (f64, Vec<DMatrix<f64>>, DVector<f64>, DVector<f64>);

/// Rows grouped per block for Schur complement assembly.
struct BlockRows<'a> {
    rows: Vec<(usize, &'a SymSparse)>,
    /// Dense copies of rows too full for the rank-one path.
    dense: Vec<Option<DMatrix<f64>>>,
}

struct Residuals {
    rp: DVector<f64>,
    rd: Vec<DMatrix<f64>>,
    rf: DVector<f64>,
}

pub(crate) fn solve(p: &RealProblem, settings: &IpmSettings) -> IpmOutput {
    let m = p.rows.len();
    let nf = p.cf.len();
    let nb = p.dims.len();
    let b = DVector::from_iterator(m, p.rows.iter().map(|r| r.rhs));
    let cf = DVector::from_column_slice(&p.cf);
    let mut fmat = DMatrix::zeros(m, nf);
    for (i, row) in p.rows.iter().enumerate() {
        for &(j, v) in &row.free {
            fmat[(i, j)] += v;
        }
    }

    let mut per_block: Vec<BlockRows> = (0..nb)
        .map(|_| BlockRows {
            rows: Vec::new(),
            dense: Vec::new(),
        })
        .collect();
    for (i, row) in p.rows.iter().enumerate() {
        for (blk, a) in &row.parts {
            per_block[*blk].rows.push((i, a));
        }
    }
    for (blk, br) in per_block.iter_mut().enumerate() {
        let n = p.dims[blk];
        br.dense = br
            .rows
            .iter()
            .map(|(_, a)| (a.nnz() > n / 2 + 1).then(|| a.to_dense(n)))
            .collect();
    }

    // Barrier parameter normalization.
    let nu: f64 = p.dims.iter().sum::<usize>().max(1) as f64;
    let norm_b = b.norm();
    let norm_c = (p.c.iter().map(|c| c.norm_squared()).sum::<f64>() + cf.norm_squared()).sqrt();

    let row_norms: Vec<f64> = p.rows.iter().map(|r| r.norm()).collect();
    let max_dim = p.dims.iter().copied().max().unwrap_or(1) as f64;
    let mut xi = 10.0_f64.max(max_dim.sqrt());
    let mut eta = 10.0_f64.max(max_dim.sqrt()).max(norm_c);
    for i in 0..m {
        xi = xi.max(max_dim * (1.0 + b[i].abs()) / (1.0 + row_norms[i]));
        eta = eta.max(row_norms[i]);
    }

    let mut x: Vec<DMatrix<f64>> = p.dims.iter().map(|&n| DMatrix::identity(n, n) * xi).collect();
    let mut z: Vec<DMatrix<f64>> = p.dims.iter().map(|&n| DMatrix::identity(n, n) * eta).collect();
    let mut y = DVector::zeros(m);
    let mut xf = DVector::zeros(nf);

    let mut best: Option<BestIterate> = None;
    let mut status = IpmStatus::MaxIterations;
    let mut iterations = 0;
    let mut primal_ray = None;
    let mut dual_ray = None;
    let mut small_steps = 0;

    for iter in 0..settings.max_iter {
        iterations = iter;
        let res = residuals(p, &per_block, &fmat, &b, &cf, &x, &xf, &y, &z);
        let pobj = objective(p, &x) + cf.dot(&xf);
        let dobj = b.dot(&y);
        let relp = res.rp.norm() / (1.0 + norm_b);
        let reld = (res.rd.iter().map(|r| r.norm_squared()).sum::<f64>() + res.rf.norm_squared())
            .sqrt()
            / (1.0 + norm_c);
        let relgap = (pobj - dobj).abs() / (1.0 + pobj.abs() + dobj.abs());
        let xz: f64 = x.iter().zip(&z).map(|(a, c)| a.dot(c)).sum();
        let mu = xz / nu;

        let merit = relp.max(reld).max(relgap);
        if best.as_ref().is_none_or(|(bm, ..)| merit < *bm) {
            best = Some((merit, x.clone(), xf.clone(), y.clone()));
        }
        log::trace!(
            "iter {iter}: pobj {pobj:.10e} dobj {dobj:.10e} relp {relp:.2e} reld {reld:.2e} gap {relgap:.2e} mu {mu:.2e}"
        );
        if relp <= settings.tol && reld <= settings.tol && relgap <= settings.tol {
            status = IpmStatus::Optimal;
            break;
        }

        // Divergence checks.
        if dobj > 1e4 * (1.0 + pobj.abs().min(1e4)) || relp > 1e-3 && dobj > 1e2 {
            if let Some(ray) = primal_farkas(p, &per_block, &fmat, &b, &y, settings.tol) {
                primal_ray = Some(ray);
                status = IpmStatus::PrimalInfeasible;
                break;
            }
        }
        if -pobj > 1e4 * (1.0 + dobj.abs().min(1e4)) || reld > 1e-3 && -pobj > 1e2 {
            if let Some(ray) = dual_farkas(p, &per_block, &fmat, &cf, &x, &xf, settings.tol) {
                dual_ray = Some(ray);
                status = IpmStatus::DualInfeasible;
                break;
            }
        }

        let zinv: Vec<DMatrix<f64>> = match z.iter().map(spd_inverse).collect::<Option<Vec<_>>>() {
            Some(v) => v,
            None => {
                status = IpmStatus::NumericalBreakdown;
                break;
            }
        };
        let schur = schur_complement(p, &per_block, &x, &zinv, m);
        let Some(solver) = SchurSolver::new(schur, &fmat) else {
            status = IpmStatus::NumericalBreakdown;
            break;
        };

        // Predictor.
        let g_aff: Vec<DMatrix<f64>> = (0..nb)
            .map(|k| -&x[k] - &x[k] * &res.rd[k] * &zinv[k])
            .collect();
        let (dx_a, dxf_a, dy_a, dz_a) =
            direction(p, &per_block, &solver, &res, &x, &zinv, &fmat, g_aff);
        let ap = step_length(&x, &dx_a);
        let ad = step_length(&z, &dz_a);
        let ap_a = ap.min(1.0);
        let ad_a = ad.min(1.0);
        let mu_aff: f64 = (0..nb)
            .map(|k| (&x[k] + &dx_a[k] * ap_a).dot(&(&z[k] + &dz_a[k] * ad_a)))
            .sum::<f64>()
            / nu;
        let sigma = if mu > 0.0 {
            (mu_aff / mu).clamp(0.0, 1.0).powi(3)
        } else {
            0.0
        };

        // Corrector.
        let g_cor: Vec<DMatrix<f64>> = (0..nb)
            .map(|k| {
                let mut g = &zinv[k] * (sigma * mu) - &x[k] - &x[k] * &res.rd[k] * &zinv[k];
                g -= &dx_a[k] * &dz_a[k] * &zinv[k];
                g
            })
            .collect();
        let (dx, dxf, dy, dz) = direction(p, &per_block, &solver, &res, &x, &zinv, &fmat, g_cor);
        let _ = (dxf_a, dy_a);
        let gamma = 0.9 + 0.09 * ap_a.min(ad_a);
        let ap = (gamma * step_length(&x, &dx)).min(1.0);
        let ad = (gamma * step_length(&z, &dz)).min(1.0);
        if !(ap.is_finite() && ad.is_finite()) {
            status = IpmStatus::NumericalBreakdown;
            break;
        }
        if ap < 1e-10 && ad < 1e-10 {
            small_steps += 1;
            if small_steps > 5 {
                status = IpmStatus::NumericalBreakdown;
                break;
            }
        } else {
            small_steps = 0;
        }
        for k in 0..nb {
            x[k] += &dx[k] * ap;
            symmetrize(&mut x[k]);
            z[k] += &dz[k] * ad;
            symmetrize(&mut z[k]);
        }
        xf += &dxf * ap;
        y += &dy * ad;
        iterations = iter + 1;
    }

    if status == IpmStatus::Optimal || status == IpmStatus::PrimalInfeasible || status == IpmStatus::DualInfeasible {
        return IpmOutput {
            status,
            x,
            xf,
            y,
            iterations,
            primal_ray,
            dual_ray,
        };
    }
    // Report the best iterate seen.
    let (_, bx, bxf, by) = best.unwrap_or((f64::INFINITY, x, xf, y));
    IpmOutput {
        status,
        x: bx,
        xf: bxf,
        y: by,
        iterations,
        primal_ray: None,
        dual_ray: None,
    }
}

fn symmetrize(a: &mut DMatrix<f64>) {
    let t = a.transpose();
    *a += t;
    *a *= 0.5;
}

fn objective(p: &RealProblem, x: &[DMatrix<f64>]) -> f64 {
    p.c.iter().zip(x).map(|(c, x)| c.dot(x)).sum()
}

/// `A(X)` over all rows (without free terms).
fn apply_a(p: &RealProblem, per_block: &[BlockRows], x: &[DMatrix<f64>]) -> DVector<f64> {
    let mut out = DVector::zeros(p.rows.len());
    for (blk, br) in per_block.iter().enumerate() {
        for (&(i, a), dense) in br.rows.iter().zip(&br.dense) {
            out[i] += match dense {
                Some(d) => d.dot(&x[blk]),
                None => a.dot(&x[blk]),
            };
        }
    }
    out
}

/// `Σ_i y_i A_i` per block.
fn apply_at(p: &RealProblem, per_block: &[BlockRows], y: &DVector<f64>) -> Vec<DMatrix<f64>> {
    per_block
        .iter()
        .enumerate()
        .map(|(blk, br)| {
            let n = p.dims[blk];
            let mut out = DMatrix::zeros(n, n);
            for (&(i, a), dense) in br.rows.iter().zip(&br.dense) {
                if y[i] == 0.0 {
                    continue;
                }
                match dense {
                    Some(d) => out += d * y[i],
                    None => a.add_to(&mut out, y[i]),
                }
            }
            out
        })
        .collect()
}

#[allow(clippy::too_many_arguments)]
fn residuals(
    p: &RealProblem,
    per_block: &[BlockRows],
    fmat: &DMatrix<f64>,
    b: &DVector<f64>,
    cf: &DVector<f64>,
    x: &[DMatrix<f64>],
    xf: &DVector<f64>,
    y: &DVector<f64>,
    z: &[DMatrix<f64>],
) -> Residuals {
    let rp = b - apply_a(p, per_block, x) - fmat * xf;
    let aty = apply_at(p, per_block, y);
    let rd = (0..p.dims.len()).map(|k| &p.c[k] - &aty[k] - &z[k]).collect();
    let rf = cf - fmat.transpose() * y;
    Residuals { rp, rd, rf }
}

fn spd_inverse(a: &DMatrix<f64>) -> Option<DMatrix<f64>> {
    let chol = Cholesky::new(a.clone())?;
    let mut inv = chol.inverse();
    symmetrize(&mut inv);
    Some(inv)
}

/// `M_ij = Σ_b tr(A_ib X_b A_jb Z_b⁻¹)`.
fn schur_complement(
    p: &RealProblem,
    per_block: &[BlockRows],
    x: &[DMatrix<f64>],
    zinv: &[DMatrix<f64>],
    m: usize,
) -> DMatrix<f64> {
    let mut schur = DMatrix::zeros(m, m);
    for (blk, br) in per_block.iter().enumerate() {
        let n = p.dims[blk];
        let xb = &x[blk];
        let zb = &zinv[blk];
        let mut w = DMatrix::zeros(n, n);
        for (q, (&(j, aj), dj)) in br.rows.iter().zip(&br.dense).enumerate() {
            match dj {
                Some(d) => w = xb * d * zb,
                None => {
                    w.fill(0.0);
                    for &(k, l, a) in &aj.entries {
                        w.ger(a, &xb.column(k), &zb.row(l).transpose(), 1.0);
                        if k != l {
                            w.ger(a, &xb.column(l), &zb.row(k).transpose(), 1.0);
                        }
                    }
                }
            }
            for (&(i, ai), di) in br.rows[..=q].iter().zip(&br.dense[..=q]) {
                let v = match di {
                    Some(d) => d.dot(&w.transpose()),
                    None => ai.dot_general(&w),
                };
                schur[(i, j)] += v;
            }
        }
    }
    // Fill the lower triangle from the accumulated upper part.
    for j in 0..m {
        for i in (j + 1)..m {
            let v = schur[(j, i)] + schur[(i, j)];
            schur[(j, i)] = v;
            schur[(i, j)] = v;
        }
    }
    schur
}

/// Solver for the bordered system `[M F; Fᵀ 0]`.
struct SchurSolver {
    chol: Cholesky<f64, Dyn>,
    minv_f: DMatrix<f64>,
    border: Option<LU<f64, Dyn, Dyn>>,
}

impl SchurSolver {
    fn new(mut schur: DMatrix<f64>, fmat: &DMatrix<f64>) -> Option<Self> {
        let m = schur.nrows();
        let max_diag = (0..m).map(|i| schur[(i, i)]).fold(0.0_f64, f64::max).max(1e-300);
        let mut chol = Cholesky::new(schur.clone());
        let mut reg = 1e-14 * max_diag;
        let mut attempts = 0;
        while chol.is_none() && attempts < 6 {
            for i in 0..m {
                schur[(i, i)] += reg;
            }
            chol = Cholesky::new(schur.clone());
            reg *= 100.0;
            attempts += 1;
        }
        let chol = chol?;
        let minv_f = chol.solve(fmat);
        let border = if fmat.ncols() > 0 {
            let s = fmat.transpose() * &minv_f;
            Some(s.lu())
        } else {
            None
        };
        Some(Self {
            chol,
            minv_f,
            border,
        })
    }

    fn solve(&self, fmat: &DMatrix<f64>, r: &DVector<f64>, rf: &DVector<f64>) -> (DVector<f64>, DVector<f64>) {
        let minv_r = self.chol.solve(r);
        match &self.border {
            None => (minv_r, DVector::zeros(0)),
            Some(lu) => {
                let rhs = fmat.transpose() * &minv_r - rf;
                let dxf = lu.solve(&rhs).unwrap_or_else(|| DVector::zeros(rf.len()));
                let dy = minv_r - &self.minv_f * &dxf;
                (dy, dxf)
            }
        }
    }
}

type Direction = (Vec<DMatrix<f64>>, DVector<f64>, DVector<f64>, Vec<DMatrix<f64>>);

/// Given `G` with `ΔX = sym(G + X (Aᵀ Δy) Z⁻¹)`, solves for the full direction.
#[allow(clippy::too_many_arguments)]
fn direction(
    p: &RealProblem,
    per_block: &[BlockRows],
    solver: &SchurSolver,
    res: &Residuals,
    x: &[DMatrix<f64>],
    zinv: &[DMatrix<f64>],
    fmat: &DMatrix<f64>,
    mut g: Vec<DMatrix<f64>>,
) -> Direction {
    // Rows are read from one triangle, so they must only ever see symmetric input.
    g.iter_mut().for_each(symmetrize);
    let ag = apply_a(p, per_block, &g);
    let rhs = &res.rp - &ag;
    let (mut dy, mut dxf) = solver.solve(fmat, &rhs, &res.rf);
    let mut atdy = apply_at(p, per_block, &dy);
    // Iterative refinement against the exact operator: the factorization may
    // carry a diagonal shift, which otherwise leaks into primal infeasibility.
    let scale = 1.0 + rhs.norm();
    for _ in 0..3 {
        let dx_trial: Vec<DMatrix<f64>> = (0..p.dims.len())
            .map(|k| {
                let mut d = &g[k] + &x[k] * &atdy[k] * &zinv[k];
                symmetrize(&mut d);
                d
            })
            .collect();
        let r = &res.rp - apply_a(p, per_block, &dx_trial) - fmat * &dxf;
        let rf = &res.rf - fmat.transpose() * &dy;
        if r.norm() <= 1e-14 * scale && rf.norm() <= 1e-14 * scale {
            break;
        }
        let (ddy, ddxf) = solver.solve(fmat, &r, &rf);
        dy += ddy;
        dxf += ddxf;
        atdy = apply_at(p, per_block, &dy);
    }
    let nb = p.dims.len();
    let mut dz = Vec::with_capacity(nb);
    let mut dx = Vec::with_capacity(nb);
    for (k, gk) in g.into_iter().enumerate() {
        let dzk = &res.rd[k] - &atdy[k];
        let mut dxk = gk + &x[k] * &atdy[k] * &zinv[k];
        symmetrize(&mut dxk);
        dz.push(dzk);
        dx.push(dxk);
    }
    (dx, dxf, dy, dz)
}

/// Largest `α` with `X + α ΔX ⪰ 0` (infinite if unbounded).
fn step_length(x: &[DMatrix<f64>], dx: &[DMatrix<f64>]) -> f64 {
    let mut alpha = f64::INFINITY;
    for (xk, dk) in x.iter().zip(dx) {
        let n = xk.nrows();
        if n == 1 {
            if dk[(0, 0)] < 0.0 {
                alpha = alpha.min(-xk[(0, 0)] / dk[(0, 0)]);
            }
            continue;
        }
        let Some(chol) = Cholesky::new(xk.clone()) else {
            return 0.0;
        };
        let l = chol.l();
        let Some(linv) = l.clone().try_inverse() else {
            return 0.0;
        };
        let mut w = &linv * dk * linv.transpose();
        symmetrize(&mut w);
        let lmin = SymmetricEigen::new(w).eigenvalues.min();
        if lmin < 0.0 {
            alpha = alpha.min(-1.0 / lmin);
        }
    }
    alpha
}

fn min_eig(a: &DMatrix<f64>) -> f64 {
    if a.nrows() == 1 {
        return a[(0, 0)];
    }
    SymmetricEigen::new(a.clone()).eigenvalues.min()
}

/// Checks whether `y / bᵀy` is an approximate Farkas ray.
fn primal_farkas(
    p: &RealProblem,
    per_block: &[BlockRows],
    fmat: &DMatrix<f64>,
    b: &DVector<f64>,
    y: &DVector<f64>,
    tol: f64,
) -> Option<DVector<f64>> {
    let by = b.dot(y);
    if by <= 0.0 {
        return None;
    }
    let ray = y / by;
    let aty = apply_at(p, per_block, &ray);
    let viol = aty.iter().map(|s| min_eig(&-s)).fold(0.0_f64, |acc, e| acc.max(-e));
    let free_viol = (fmat.transpose() * &ray).amax();
    (viol <= tol.max(1e-9) && free_viol <= tol.max(1e-9)).then_some(ray)
}

fn dual_farkas(
    p: &RealProblem,
    per_block: &[BlockRows],
    fmat: &DMatrix<f64>,
    cf: &DVector<f64>,
    x: &[DMatrix<f64>],
    xf: &DVector<f64>,
    tol: f64,
) -> Option<(Vec<DMatrix<f64>>, DVector<f64>)> {
    let cx = objective(p, x) + cf.dot(xf);
    if cx >= 0.0 {
        return None;
    }
    let s = -1.0 / cx;
    let rx: Vec<DMatrix<f64>> = x.iter().map(|a| a * s).collect();
    let rxf = xf * s;
    let r = apply_a(p, per_block, &rx) + fmat * &rxf;
    (r.amax() <= tol.max(1e-9)).then_some((rx, rxf))
}
