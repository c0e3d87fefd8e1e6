//! Seeded random generators for test matrices, maps and systems.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::choi::LinearMapOnMatrices;
use crate::herm::{eig_hermitian, CMatrix, HermitianMatrix};
use num_complex::Complex64;

fn gaussian_matrix(n: usize, m: usize, rng: &mut impl Rng) -> CMatrix {
    CMatrix::from_fn(n, m, |_, _| {
        Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    })
}

/// Hermitian part of a complex Gaussian matrix.
pub fn hermitian(n: usize, rng: &mut impl Rng) -> HermitianMatrix {
    let g = gaussian_matrix(n, n, rng);
    HermitianMatrix::symmetrized((&g + g.adjoint()) * Complex64::new(0.5, 0.0))
}

/// Real symmetric Gaussian matrix.
pub fn real_symmetric(n: usize, rng: &mut impl Rng) -> HermitianMatrix {
    let g = nalgebra::DMatrix::from_fn(n, n, |_, _| rng.sample::<f64, _>(StandardNormal));
    HermitianMatrix::from_real(&((&g + g.transpose()) * 0.5)).expect("symmetric by construction")
}

/// `G G*` for a square complex Gaussian `G`.
pub fn psd(n: usize, rng: &mut impl Rng) -> HermitianMatrix {
    let g = gaussian_matrix(n, n, rng);
    HermitianMatrix::symmetrized(&g * g.adjoint())
}

/// Real PSD `G Gᵀ`.
pub fn real_psd(n: usize, rng: &mut impl Rng) -> HermitianMatrix {
    let g = nalgebra::DMatrix::from_fn(n, n, |_, _| rng.sample::<f64, _>(StandardNormal));
    HermitianMatrix::from_real(&(&g * g.transpose())).expect("symmetric by construction")
}

/// CP map with a random PSD Choi matrix.
pub fn cp_map(n: usize, m: usize, rng: &mut impl Rng) -> LinearMapOnMatrices {
    LinearMapOnMatrices::from_choi(n, m, psd(n * m, rng)).expect("dims match")
}

/// ∗-preserving map with a random Hermitian Choi matrix.
pub fn hermitian_map(n: usize, m: usize, rng: &mut impl Rng) -> LinearMapOnMatrices {
    LinearMapOnMatrices::from_choi(n, m, hermitian(n * m, rng)).expect("dims match")
}

/// Unital CP map `X ↦ A^{-1/2} Ψ(X) A^{-1/2}` with `A = Ψ(I)` for random CP `Ψ`.
pub fn unital_cp_map(n: usize, m: usize, rng: &mut impl Rng) -> LinearMapOnMatrices {
    let psi = cp_map(n, m, rng);
    let a = psi.apply(&HermitianMatrix::identity(n)).expect("dims match");
    let (vals, vecs) = eig_hermitian(&a);
    let d = CMatrix::from_diagonal(&vals.map(|v| Complex64::new(v.max(1e-300).powf(-0.5), 0.0)));
    let s = &vecs * d * vecs.adjoint();
    LinearMapOnMatrices::from_action(n, m, |i, j| &s * psi.image_of_unit(i, j) * &s)
        .expect("congruence preserves ∗-linearity")
}
