//! Real symmetric form of a Hermitian SDP.
//!
//! Complex blocks are mapped through `R + iK ↦ ½ [[R, -K], [K, R]]` on the
//! data side and `X ↦ [[Re X, -Im X], [Im X, Re X]]` on the variable side,
//! which preserves every pairing `tr(HX)`. Blocks whose data is real in every
//! row stay at their original size: the real part of any feasible Hermitian
//! block is feasible with the same objective.

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::{SdpProblem, SparseHermitian};
use crate::herm::{CMatrix, HermitianMatrix};

/// Upper-triangle entries `(k, l, a)` with `k <= l` of a real symmetric matrix.
#[derive(Clone, Debug, Default)]
pub(crate) struct SymSparse {
    pub entries: Vec<(usize, usize, f64)>,
}

impl SymSparse {
    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    /// `tr(A X)` for symmetric `X`.
    pub fn dot(&self, x: &DMatrix<f64>) -> f64 {
        self.entries
            .iter()
            .map(|&(k, l, a)| if k == l { a * x[(k, k)] } else { 2.0 * a * x[(k, l)] })
            .sum()
    }

    /// `tr(A W)` for a general square `W`.
    pub fn dot_general(&self, w: &DMatrix<f64>) -> f64 {
        self.entries
            .iter()
            .map(|&(k, l, a)| {
                if k == l {
                    a * w[(k, k)]
                } else {
                    a * (w[(k, l)] + w[(l, k)])
                }
            })
            .sum()
    }

    pub fn add_to(&self, out: &mut DMatrix<f64>, scale: f64) {
        for &(k, l, a) in &self.entries {
            out[(k, l)] += scale * a;
            if k != l {
                out[(l, k)] += scale * a;
            }
        }
    }

    pub fn to_dense(&self, n: usize) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(n, n);
        self.add_to(&mut m, 1.0);
        m
    }

    pub fn norm_sq(&self) -> f64 {
        self.entries
            .iter()
            .map(|&(k, l, a)| if k == l { a * a } else { 2.0 * a * a })
            .sum()
    }
}

#[derive(Clone, Debug)]
pub(crate) struct RealRow {
    pub parts: Vec<(usize, SymSparse)>,
    pub free: Vec<(usize, f64)>,
    pub rhs: f64,
}

impl RealRow {
    pub fn norm(&self) -> f64 {
        let s: f64 = self.parts.iter().map(|(_, a)| a.norm_sq()).sum::<f64>()
            + self.free.iter().map(|(_, f)| f * f).sum::<f64>();
        s.sqrt()
    }
}

#[derive(Clone, Debug)]
pub(crate) struct RealProblem {
    pub dims: Vec<usize>,
    pub c: Vec<DMatrix<f64>>,
    pub cf: Vec<f64>,
    pub rows: Vec<RealRow>,
}

/// How one Hermitian block is represented in the real problem.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum BlockMode {
    Real,
    Realified,
}

/// The real problem plus what is needed to map solutions back.
pub(crate) struct Realification {
    pub problem: RealProblem,
    pub modes: Vec<BlockMode>,
    /// Original constraint index of each real row.
    pub row_origin: Vec<usize>,
}

fn entry_parts(z: Complex64) -> (bool, bool) {
    (z.re != 0.0, z.im != 0.0)
}

/// Classifies a sparse Hermitian matrix: (has real part, has imaginary part).
fn classify(a: &SparseHermitian) -> (bool, bool) {
    a.entries().iter().fold((false, false), |(r, i), &(_, _, z)| {
        let (zr, zi) = entry_parts(z);
        (r || zr, i || zi)
    })
}

pub(crate) fn realify(p: &SdpProblem) -> Realification {
    let nblocks = p.blocks.len();

    // A problem is conjugation symmetric when its objective is real and each
    // row is either purely real or purely imaginary with zero right-hand side
    // and no free coefficients. Imaginary rows then vanish on real blocks.
    let objective_real = p.objective.iter().all(|c| !classify(c).1);
    let mut row_kind = Vec::with_capacity(p.constraints.len());
    let mut symmetric = objective_real;
    for c in &p.constraints {
        let (mut has_re, mut has_im) = (false, false);
        for (_, a) in &c.terms {
            let (r, i) = classify(a);
            has_re |= r;
            has_im |= i;
        }
        let kind = match (has_re, has_im) {
            (_, false) => RowKind::Real,
            (false, true) if c.rhs == 0.0 && c.free.iter().all(|&(_, f)| f == 0.0) => {
                RowKind::Imaginary
            }
            _ => RowKind::Mixed,
        };
        if kind == RowKind::Mixed {
            symmetric = false;
        }
        row_kind.push(kind);
    }

    let mut modes = vec![BlockMode::Real; nblocks];
    if !symmetric {
        for (b, c) in p.objective.iter().enumerate() {
            if classify(c).1 {
                modes[b] = BlockMode::Realified;
            }
        }
        for c in &p.constraints {
            for (b, a) in &c.terms {
                if classify(a).1 {
                    modes[*b] = BlockMode::Realified;
                }
            }
        }
    }

    let dims: Vec<usize> = p
        .blocks
        .iter()
        .zip(&modes)
        .map(|(&n, m)| match m {
            BlockMode::Real => n,
            BlockMode::Realified => 2 * n,
        })
        .collect();

    let c = p
        .objective
        .iter()
        .enumerate()
        .map(|(b, a)| convert(a, p.blocks[b], modes[b]).to_dense(dims[b]))
        .collect();

    let mut rows = Vec::new();
    let mut row_origin = Vec::new();
    for (i, con) in p.constraints.iter().enumerate() {
        if symmetric && row_kind[i] == RowKind::Imaginary {
            continue;
        }
        let parts = con
            .terms
            .iter()
            .map(|(b, a)| (*b, convert(a, p.blocks[*b], modes[*b])))
            .filter(|(_, s)| s.nnz() > 0)
            .collect();
        rows.push(RealRow {
            parts,
            free: con.free.clone(),
            rhs: con.rhs,
        });
        row_origin.push(i);
    }

    Realification {
        problem: RealProblem {
            dims,
            c,
            cf: p.free_objective.clone(),
            rows,
        },
        modes,
        row_origin,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum RowKind {
    Real,
    Imaginary,
    Mixed,
}

fn convert(a: &SparseHermitian, n: usize, mode: BlockMode) -> SymSparse {
    let mut entries = Vec::new();
    for &(r, c, z) in a.entries() {
        if r > c {
            continue;
        }
        match mode {
            BlockMode::Real => {
                if z.re != 0.0 {
                    entries.push((r, c, z.re));
                }
            }
            BlockMode::Realified => {
                if r == c {
                    if z.re != 0.0 {
                        entries.push((r, r, 0.5 * z.re));
                        entries.push((n + r, n + r, 0.5 * z.re));
                    }
                } else {
                    if z.re != 0.0 {
                        entries.push((r, c, 0.5 * z.re));
                        entries.push((n + r, n + c, 0.5 * z.re));
                    }
                    if z.im != 0.0 {
                        entries.push((r, n + c, -0.5 * z.im));
                        entries.push((c, n + r, 0.5 * z.im));
                    }
                }
            }
        }
    }
    SymSparse { entries }
}

/// Maps a real block back to a Hermitian matrix of the original size.
pub(crate) fn recover_block(x: &DMatrix<f64>, n: usize, mode: BlockMode) -> HermitianMatrix {
    match mode {
        BlockMode::Real => HermitianMatrix::symmetrized(x.map(|v| Complex64::new(v, 0.0))),
        BlockMode::Realified => {
            let m = CMatrix::from_fn(n, n, |i, j| {
                let re = 0.5 * (x[(i, j)] + x[(n + i, n + j)]);
                let im = 0.5 * (x[(n + i, j)] - x[(i, n + j)]);
                Complex64::new(re, im)
            });
            HermitianMatrix::symmetrized(m)
        }
    }
}
