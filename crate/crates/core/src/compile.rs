//! Shared pieces for turning subspace conditions into SDP rows.

use num_complex::Complex64;

use crate::herm::{standard_basis_element, HermitianBasis, HermitianMatrix};
use crate::sdp::{SdpSolution, SparseHermitian};

/// Sparse copies of the orthonormal matrix-unit basis of `Mₙ`.
pub(crate) fn unit_basis(n: usize) -> Vec<SparseHermitian> {
    (0..n * n)
        .map(|k| SparseHermitian::from_dense(&standard_basis_element(n, k)))
        .collect()
}

/// A basis of the trace-zero Hermitian matrices: off-diagonal units and
/// `E_ii − E_{i+1,i+1}`.
pub(crate) fn traceless_basis(n: usize) -> Vec<SparseHermitian> {
    let mut out: Vec<SparseHermitian> = (n..n * n)
        .map(|k| SparseHermitian::from_dense(&standard_basis_element(n, k)))
        .collect();
    for i in 0..n.saturating_sub(1) {
        out.push(SparseHermitian::from_upper(
            n,
            [(i, i, re(1.0)), (i + 1, i + 1, re(-1.0))],
        ));
    }
    out
}

pub(crate) fn sparse_basis(b: &HermitianBasis) -> Vec<SparseHermitian> {
    b.elements().iter().map(sparse).collect()
}

/// Drops entries below `1e-15` times the largest before converting.
pub(crate) fn sparse(a: &HermitianMatrix) -> SparseHermitian {
    let scale = a.as_matrix().iter().map(|z| z.norm()).fold(0.0, f64::max);
    let n = a.dim();
    let m = a.as_matrix();
    SparseHermitian::from_upper(
        n,
        (0..n)
            .flat_map(|r| (r..n).map(move |c| (r, c)))
            .filter(|&(r, c)| m[(r, c)].norm() > 1e-15 * scale)
            .map(|(r, c)| (r, c, m[(r, c)])),
    )
}

pub(crate) fn identity(n: usize) -> SparseHermitian {
    SparseHermitian::from_upper(n, (0..n).map(|i| (i, i, re(1.0))))
}

pub(crate) fn re(v: f64) -> Complex64 {
    Complex64::new(v, 0.0)
}

/// Symmetric unit `(E_ij + E_ji)/2`, or `E_ii`, so that `⟨·, P⟩ = Re P_ij`.
pub(crate) fn entry_selector(n: usize, i: usize, j: usize) -> SparseHermitian {
    let v = if i == j { 1.0 } else { 0.5 };
    SparseHermitian::from_upper(n, [(i.min(j), i.max(j), re(v))])
}

pub(crate) fn trace_of(a: &SparseHermitian) -> f64 {
    a.entries()
        .iter()
        .filter(|(r, c, _)| r == c)
        .map(|e| e.2.re)
        .sum()
}

/// `tr(Δₙ (B ⊗ G)) = Σ_ij B_ji G_ji`.
pub(crate) fn delta_pairing(b: &SparseHermitian, g: &SparseHermitian) -> f64 {
    // both sorted by (row, col)
    let ge = g.entries();
    b.entries()
        .iter()
        .map(|&(r, c, z)| {
            ge.binary_search_by_key(&(r, c), |e| (e.0, e.1))
                .map(|k| (z * ge[k].2).re)
                .unwrap_or(0.0)
        })
        .sum()
}

/// `tr(x g)` for sparse Hermitian `x` and `g`.
pub(crate) fn pairing(x: &SparseHermitian, g: &SparseHermitian) -> f64 {
    let ge = g.entries();
    x.entries()
        .iter()
        .map(|&(r, c, z)| {
            ge.binary_search_by_key(&(c, r), |e| (e.0, e.1))
                .map(|k| (z * ge[k].2).re)
                .unwrap_or(0.0)
        })
        .sum()
}

/// Entrywise complex conjugate, which equals the transpose for Hermitian input.
pub(crate) fn conj(a: &SparseHermitian) -> SparseHermitian {
    SparseHermitian::from_upper(
        a.dim(),
        a.entries()
            .iter()
            .filter(|(r, c, _)| r <= c)
            .map(|&(r, c, z)| (r, c, z.conj())),
    )
}

/// Short description of a non-optimal solve for error messages.
pub(crate) fn describe(sol: &SdpSolution) -> String {
    format!(
        "status {} after {} iterations (primal_feas {:.2e}, dual_feas {:.2e}, gap {:.2e})",
        sol.status, sol.iterations, sol.residuals.primal_feas, sol.residuals.dual_feas, sol.residuals.gap
    )
}

