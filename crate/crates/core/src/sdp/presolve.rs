//! Detection of linearly dependent equality rows.
//!
//! Rows are normalized and orthogonalized in order (modified Gram–Schmidt,
//! re-orthogonalizing when cancellation is large). A row whose residual falls
//! below [`DEPENDENCY_TOL`] is dropped; its right-hand side is compared with
//! the combination of kept rows that reproduces it, and an inconsistency
//! yields a Farkas vector proving primal infeasibility.

use nalgebra::DVector;

use super::real::RealProblem;

pub(crate) const DEPENDENCY_TOL: f64 = 1e-10;

pub(crate) struct Presolved {
    pub kept: Vec<usize>,
    pub dropped: Vec<usize>,
    /// `y` over all rows with `Σ y_i a_i ≈ 0` and `bᵀy = 1`.
    pub inconsistency: Option<Vec<f64>>,
}

/// Flattened coordinates of one row in the space of all block entries.
fn row_vector(p: &RealProblem, offsets: &[usize], total: usize, i: usize) -> DVector<f64> {
    let row = &p.rows[i];
    let mut v = DVector::zeros(total);
    for (b, a) in &row.parts {
        let n = p.dims[*b];
        for &(k, l, val) in &a.entries {
            // symmetric storage: off-diagonal entries carry weight √2
            let idx = offsets[*b] + tri_index(k, l, n);
            v[idx] += if k == l { val } else { std::f64::consts::SQRT_2 * val };
        }
    }
    let free_off = offsets[p.dims.len()];
    for &(j, f) in &row.free {
        v[free_off + j] += f;
    }
    v
}

fn tri_index(k: usize, l: usize, n: usize) -> usize {
    // row-major upper triangle
    k * n - k * (k + 1) / 2 + l
}

pub(crate) fn presolve(p: &RealProblem) -> Presolved {
    let m = p.rows.len();
    let mut offsets = Vec::with_capacity(p.dims.len() + 1);
    let mut total = 0;
    for &n in &p.dims {
        offsets.push(total);
        total += n * (n + 1) / 2;
    }
    offsets.push(total);
    total += p.cf.len();

    // Kept normalized rows satisfy a_k / |a_k| = Σ_{j<=k} r[k][j] q_j.
    let mut q: Vec<DVector<f64>> = Vec::new();
    let mut r_cols: Vec<Vec<f64>> = Vec::new();
    let mut norms: Vec<f64> = Vec::new();
    let mut qb: Vec<f64> = Vec::new();
    let mut kept = Vec::new();
    let mut dropped = Vec::new();
    let mut inconsistency = None;

    for i in 0..m {
        let a = row_vector(p, &offsets, total, i);
        let norm0 = a.norm();
        if norm0 == 0.0 {
            if p.rows[i].rhs != 0.0 && inconsistency.is_none() {
                let mut y = vec![0.0; m];
                y[i] = 1.0 / p.rows[i].rhs;
                inconsistency = Some(y);
            }
            dropped.push(i);
            continue;
        }
        let mut r = a / norm0;
        let mut rb = p.rows[i].rhs / norm0;
        let mut c = vec![0.0; q.len()];
        for _pass in 0..2 {
            let before = r.norm();
            for (j, qj) in q.iter().enumerate() {
                let d = qj.dot(&r);
                if d != 0.0 {
                    r.axpy(-d, qj, 1.0);
                    rb -= d * qb[j];
                    c[j] += d;
                }
            }
            if r.norm() > 0.5 * before {
                break;
            }
        }
        let nr = r.norm();
        if nr > DEPENDENCY_TOL {
            c.push(nr);
            r_cols.push(c);
            q.push(r / nr);
            qb.push(rb / nr);
            norms.push(norm0);
            kept.push(i);
        } else {
            let scale = 1.0 + (p.rows[i].rhs / norm0).abs();
            if rb.abs() > 1e-8 * scale && inconsistency.is_none() {
                // a_i/|a_i| ≈ Q c = Σ_k w_k a_k/|a_k| with R w = c
                let w = back_substitute(&r_cols, &c);
                let mut y = vec![0.0; m];
                y[i] += 1.0 / norm0;
                for (k, &wk) in w.iter().enumerate() {
                    y[kept[k]] -= wk / norms[k];
                }
                let by: f64 = y.iter().zip(&p.rows).map(|(yi, row)| yi * row.rhs).sum();
                for v in &mut y {
                    *v /= by;
                }
                inconsistency = Some(y);
            }
            dropped.push(i);
        }
    }

    Presolved {
        kept,
        dropped,
        inconsistency,
    }
}

/// Solves `R w = c` where column `k` of the upper triangular `R` is `r_cols[k]`.
fn back_substitute(r_cols: &[Vec<f64>], c: &[f64]) -> Vec<f64> {
    let k = r_cols.len();
    let mut w = c.to_vec();
    for j in (0..k).rev() {
        w[j] /= r_cols[j][j];
        let wj = w[j];
        for i in 0..j {
            w[i] -= r_cols[j][i] * wj;
        }
    }
    w
}
