//! Linear maps `Mₙ → Mₘ` stored by their Choi matrix.
//!
//! The Choi matrix of `Φ` is `Σ_ij E_ij ⊗ Φ(E_ij)`, so with the lexicographic
//! Kronecker convention `choi[(i,k),(j,l)] = Φ(E_ij)[k,l]`. It is Hermitian
//! exactly when `Φ` is ∗-preserving, and PSD exactly when `Φ` is completely
//! positive.

use crate::error::{Error, Result};
use crate::herm::{c64, matrix_unit, CMatrix, HermitianMatrix};

/// Relative tolerance for complete positivity checks.
pub const CP_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub struct LinearMapOnMatrices {
    in_dim: usize,
    out_dim: usize,
    choi: HermitianMatrix,
}

impl LinearMapOnMatrices {
    pub fn from_choi(in_dim: usize, out_dim: usize, choi: HermitianMatrix) -> Result<Self> {
        if choi.dim() != in_dim * out_dim {
            return Err(Error::Factorization {
                dim: choi.dim(),
                n: in_dim,
                m: out_dim,
            });
        }
        Ok(Self {
            in_dim,
            out_dim,
            choi,
        })
    }

    /// Builds the map from its action on matrix units: `action(i, j) = Φ(E_ij)`.
    pub fn from_action(
        in_dim: usize,
        out_dim: usize,
        mut action: impl FnMut(usize, usize) -> CMatrix,
    ) -> Result<Self> {
        let (n, m) = (in_dim, out_dim);
        let mut c = CMatrix::zeros(n * m, n * m);
        for i in 0..n {
            for j in 0..n {
                let img = action(i, j);
                if img.nrows() != m || img.ncols() != m {
                    return Err(Error::DimensionMismatch {
                        expected: m,
                        found: img.nrows().max(img.ncols()),
                    });
                }
                c.view_mut((i * m, j * m), (m, m)).copy_from(&img);
            }
        }
        Self::from_choi(n, m, HermitianMatrix::new(c)?)
    }

    /// The identity map on `Mₙ`; its Choi matrix is `Δₙ`.
    pub fn identity(n: usize) -> Self {
        Self::from_action(n, n, |i, j| matrix_unit(n, i, j)).expect("identity is ∗-linear")
    }

    /// `X ↦ tr(X) Iₘ`.
    pub fn trace_map(n: usize, m: usize) -> Self {
        Self::from_action(n, m, |i, j| {
            if i == j {
                CMatrix::identity(m, m)
            } else {
                CMatrix::zeros(m, m)
            }
        })
        .expect("trace map is ∗-linear")
    }

    /// The transpose on `Mₙ`; its Choi matrix is the swap operator.
    pub fn transpose(n: usize) -> Self {
        Self::from_action(n, n, |i, j| matrix_unit(n, j, i)).expect("transpose is ∗-linear")
    }

    /// `Tₙ(x) = c·τₙ(x)·1 − x` with `τₙ` the normalized trace.
    pub fn trace_deviation(n: usize, c: f64) -> Self {
        Self::from_action(n, n, |i, j| {
            let mut img = -matrix_unit(n, i, j);
            if i == j {
                img += CMatrix::identity(n, n) * c64(c / n as f64);
            }
            img
        })
        .expect("Tₙ is ∗-linear")
    }

    /// The Schur multiplier `δ_A(X) = A ∘ X`.
    pub fn schur_multiplier(a: &HermitianMatrix) -> Self {
        let n = a.dim();
        Self::from_action(n, n, |i, j| matrix_unit(n, i, j) * a.get(i, j))
            .expect("Schur multiplier by a Hermitian matrix is ∗-linear")
    }

    pub fn in_dim(&self) -> usize {
        self.in_dim
    }

    pub fn out_dim(&self) -> usize {
        self.out_dim
    }

    pub fn choi(&self) -> &HermitianMatrix {
        &self.choi
    }

    /// `Φ(E_ij)`, block `(i, j)` of the Choi matrix.
    pub fn image_of_unit(&self, i: usize, j: usize) -> CMatrix {
        let m = self.out_dim;
        self.choi.as_matrix().view((i * m, j * m), (m, m)).into_owned()
    }

    /// `Φ(X) = Σ_ij X_ij Φ(E_ij)` for an arbitrary square `X`.
    pub fn apply_general(&self, x: &CMatrix) -> Result<CMatrix> {
        let (n, m) = (self.in_dim, self.out_dim);
        if x.nrows() != n || x.ncols() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: x.nrows(),
            });
        }
        let c = self.choi.as_matrix();
        let mut out = CMatrix::zeros(m, m);
        for i in 0..n {
            for j in 0..n {
                let s = x[(i, j)];
                if s.norm() != 0.0 {
                    out += c.view((i * m, j * m), (m, m)) * s;
                }
            }
        }
        Ok(out)
    }

    pub fn apply(&self, x: &HermitianMatrix) -> Result<HermitianMatrix> {
        Ok(HermitianMatrix::symmetrized(self.apply_general(x.as_matrix())?))
    }

    /// Smallest Choi eigenvalue.
    pub fn min_choi_eigenvalue(&self) -> f64 {
        self.choi.min_eigenvalue()
    }

    /// `λmin(choi) ≥ −tol·(1 + ‖choi‖)`.
    pub fn is_cp(&self, tol: f64) -> bool {
        self.choi.is_psd(tol)
    }

    /// The trace dual `Φ†: Mₘ → Mₙ` with `tr(Φ(X) Y) = tr(X Φ†(Y))`.
    pub fn dual(&self) -> Self {
        let (n, m) = (self.in_dim, self.out_dim);
        let c = self.choi.as_matrix();
        // C†[(l,i),(k,j)] = conj C[(i,l),(j,k)]
        let d = CMatrix::from_fn(n * m, n * m, |r, s| {
            let (l, i) = (r / n, r % n);
            let (k, j) = (s / n, s % n);
            c[(i * m + l, j * m + k)].conj()
        });
        Self {
            in_dim: m,
            out_dim: n,
            choi: HermitianMatrix::symmetrized(d),
        }
    }

    /// `A_ij = Φ(E_ij)_ij`; PSD with `max_i A_ii ≤ ‖Φ(I)‖` for CP `Φ`.
    pub fn choi_expectation_matrix(&self) -> Result<HermitianMatrix> {
        if self.in_dim != self.out_dim {
            return Err(Error::DimensionMismatch {
                expected: self.in_dim,
                found: self.out_dim,
            });
        }
        if !self.is_cp(CP_TOL) {
            return Err(Error::NotCompletelyPositive {
                min_eigenvalue: self.min_choi_eigenvalue(),
            });
        }
        let n = self.in_dim;
        let c = self.choi.as_matrix();
        let a = CMatrix::from_fn(n, n, |i, j| c[(i * n + i, j * n + j)]);
        Ok(HermitianMatrix::symmetrized(a))
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.same_shape(other)?;
        Ok(Self {
            choi: self.choi.add(&other.choi),
            ..*self
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.same_shape(other)?;
        Ok(Self {
            choi: self.choi.sub(&other.choi),
            ..*self
        })
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            choi: self.choi.scale(s),
            ..*self
        }
    }

    fn same_shape(&self, other: &Self) -> Result<()> {
        if (self.in_dim, self.out_dim) != (other.in_dim, other.out_dim) {
            return Err(Error::DimensionMismatch {
                expected: self.in_dim * self.out_dim,
                found: other.in_dim * other.out_dim,
            });
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::herm::{kron, max_entangled, partial_trace, TraceSide};
    use crate::random;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn identity_choi_is_max_entangled() {
        for n in 1..5 {
            let id = LinearMapOnMatrices::identity(n);
            assert!(id.choi().max_abs_diff(&max_entangled(n)) < 1e-15);
        }
    }

    #[test]
    fn trace_map_choi_is_identity() {
        let t = LinearMapOnMatrices::trace_map(3, 3);
        assert!(t.choi().max_abs_diff(&HermitianMatrix::identity(9)) < 1e-15);
    }

    #[test]
    fn trace_deviation_choi() {
        // Σ (c/n) E_ii ⊗ E_jj − E_ij ⊗ E_ij
        let (n, c) = (3, 2.5);
        let t = LinearMapOnMatrices::trace_deviation(n, c);
        let expected = HermitianMatrix::identity(n * n)
            .scale(c / n as f64)
            .sub(&max_entangled(n));
        assert!(t.choi().max_abs_diff(&expected) < 1e-15);
    }

    #[test]
    fn apply_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let x = random::hermitian(3, &mut rng);
        let id = LinearMapOnMatrices::identity(3);
        assert!(id.apply(&x).unwrap().max_abs_diff(&x) < 1e-15);
        let tr = LinearMapOnMatrices::trace_map(3, 3);
        let expected = HermitianMatrix::identity(3).scale(x.trace());
        assert!(tr.apply(&x).unwrap().max_abs_diff(&expected) < 1e-14);
        assert!(id.apply(&HermitianMatrix::identity(2)).is_err());
    }

    #[test]
    fn apply_matches_partial_trace_formula() {
        // Φ(X) = (tr ⊗ id)((Xᵀ ⊗ I) C)
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let map = random::cp_map(2, 3, &mut rng);
        let x = random::hermitian(2, &mut rng);
        let xt = HermitianMatrix::symmetrized(x.as_matrix().transpose());
        let prod = kron(&xt, &HermitianMatrix::identity(3)).as_matrix() * map.choi().as_matrix();
        let lhs = crate::herm::partial_trace_c(&prod, TraceSide::First, 2, 3).unwrap();
        let rhs = map.apply(&x).unwrap();
        assert!((lhs - rhs.as_matrix()).camax() < 1e-12);
        let _ = partial_trace;
    }

    #[test]
    fn transpose_is_not_cp() {
        let t = LinearMapOnMatrices::transpose(2);
        assert!((t.min_choi_eigenvalue() + 1.0).abs() < 1e-12);
        assert!(!t.is_cp(CP_TOL));
        assert!(LinearMapOnMatrices::identity(2).is_cp(CP_TOL));
    }

    #[test]
    fn trace_deviation_cp_threshold() {
        // λmin of (c/n) I − Δₙ is c/n − n, so the threshold sits at c = n².
        for n in [2, 3] {
            let sq = (n * n) as f64;
            assert!(LinearMapOnMatrices::trace_deviation(n, sq).is_cp(CP_TOL));
            assert!(!LinearMapOnMatrices::trace_deviation(n, sq - 1e-6).is_cp(CP_TOL));
            assert!(!LinearMapOnMatrices::trace_deviation(n, n as f64).is_cp(CP_TOL));
            let lmin = LinearMapOnMatrices::trace_deviation(n, 1.5).min_choi_eigenvalue();
            assert!((lmin - (1.5 / n as f64 - n as f64)).abs() < 1e-12);
        }
    }

    #[test]
    fn schur_multiplier_examples() {
        let n = 3;
        let j = LinearMapOnMatrices::schur_multiplier(&HermitianMatrix::all_ones(n));
        assert!(j.choi().max_abs_diff(LinearMapOnMatrices::identity(n).choi()) < 1e-15);

        let psd = HermitianMatrix::from_real(&nalgebra::dmatrix![2.0, 1.0; 1.0, 2.0]).unwrap();
        let indef = HermitianMatrix::from_real(&nalgebra::dmatrix![1.0, 2.0; 2.0, 1.0]).unwrap();
        assert!(LinearMapOnMatrices::schur_multiplier(&psd).is_cp(CP_TOL));
        assert!(!LinearMapOnMatrices::schur_multiplier(&indef).is_cp(CP_TOL));

        let d = LinearMapOnMatrices::schur_multiplier(&psd)
            .apply(&HermitianMatrix::identity(2))
            .unwrap();
        assert!(d.max_abs_diff(&HermitianMatrix::diagonal(&[2.0, 2.0])) < 1e-15);
    }

    #[test]
    fn dual_examples() {
        let id = LinearMapOnMatrices::identity(3);
        assert_eq!(id.dual(), id);
        let tr = LinearMapOnMatrices::trace_map(3, 3);
        assert!(tr.dual().choi().max_abs_diff(tr.choi()) < 1e-15);
    }

    #[test]
    fn dual_of_unital_cp_is_trace_preserving() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let phi = random::unital_cp_map(3, 2, &mut rng);
        let unit = phi.apply(&HermitianMatrix::identity(3)).unwrap();
        assert!(unit.max_abs_diff(&HermitianMatrix::identity(2)) < 1e-10);
        let d = phi.dual();
        assert!(d.is_cp(CP_TOL));
        for _ in 0..5 {
            let y = random::hermitian(2, &mut rng);
            assert!((d.apply(&y).unwrap().trace() - y.trace()).abs() < 1e-10);
        }
        // trace preservation is (tr ⊗ ·)-side identity on the dual's Choi matrix
        let pt = partial_trace(d.choi(), TraceSide::Second, 2, 3).unwrap();
        assert!(pt.max_abs_diff(&HermitianMatrix::identity(2)) < 1e-10);
    }

    #[test]
    fn expectation_matrix_examples() {
        let id = LinearMapOnMatrices::identity(3);
        let a = id.choi_expectation_matrix().unwrap();
        assert!(a.max_abs_diff(&HermitianMatrix::all_ones(3)) < 1e-15);

        let psd = HermitianMatrix::from_real(&nalgebra::dmatrix![2.0, 1.0; 1.0, 2.0]).unwrap();
        let a = LinearMapOnMatrices::schur_multiplier(&psd)
            .choi_expectation_matrix()
            .unwrap();
        assert!(a.max_abs_diff(&psd) < 1e-15);

        assert!(matches!(
            LinearMapOnMatrices::transpose(2).choi_expectation_matrix(),
            Err(Error::NotCompletelyPositive { .. })
        ));
    }

    fn seed() -> impl Strategy<Value = u64> {
        any::<u64>()
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn functional_equation(s in seed(), n in 1usize..4, m in 1usize..4) {
            let mut rng = ChaCha8Rng::seed_from_u64(s);
            let phi = random::cp_map(n, m, &mut rng);
            let x = random::hermitian(n, &mut rng);
            let y = random::hermitian(m, &mut rng);
            let lhs = phi.apply(&x).unwrap().inner(&y);
            let rhs = x.inner(&phi.dual().apply(&y).unwrap());
            prop_assert!((lhs - rhs).abs() < 1e-10 * (1.0 + lhs.abs()));
        }

        #[test]
        fn dual_is_involution(s in seed(), n in 1usize..4, m in 1usize..4) {
            let mut rng = ChaCha8Rng::seed_from_u64(s);
            let phi = random::hermitian_map(n, m, &mut rng);
            prop_assert!(phi.dual().dual().choi().max_abs_diff(phi.choi()) < 1e-12);
        }

        #[test]
        fn choi_round_trip(s in seed(), n in 1usize..4, m in 1usize..4) {
            let mut rng = ChaCha8Rng::seed_from_u64(s);
            let phi = random::hermitian_map(n, m, &mut rng);
            let back = LinearMapOnMatrices::from_action(n, m, |i, j| {
                phi.apply_general(&matrix_unit(n, i, j)).unwrap()
            })
            .unwrap();
            prop_assert!(back.choi().max_abs_diff(phi.choi()) < 1e-10);
        }

        /// CP ⟺ the n-th amplification maps PSD inputs to PSD outputs.
        #[test]
        fn cp_iff_amplification_positive(s in seed(), n in 2usize..4) {
            let mut rng = ChaCha8Rng::seed_from_u64(s);
            let phi = random::hermitian_map(n, n, &mut rng);
            let cp = phi.is_cp(CP_TOL);
            // (id ⊗ Φ)(Δₙ) is the Choi matrix itself
            let mut all_positive = amplify(&phi, &max_entangled(n)).is_psd(CP_TOL);
            for _ in 0..20 {
                let z = random::psd(n * n, &mut rng);
                all_positive &= amplify(&phi, &z).is_psd(CP_TOL);
            }
            prop_assert_eq!(cp, all_positive);
        }

        #[test]
        fn expectation_matrix_is_psd(s in seed(), n in 1usize..5) {
            let mut rng = ChaCha8Rng::seed_from_u64(s);
            let phi = random::cp_map(n, n, &mut rng);
            let a = phi.choi_expectation_matrix().unwrap();
            prop_assert!(a.min_eigenvalue() >= -1e-8);
            let unit_norm = phi.apply(&HermitianMatrix::identity(n)).unwrap().operator_norm();
            let max_diag = (0..n).map(|i| a.get(i, i).re).fold(f64::MIN, f64::max);
            prop_assert!(max_diag <= unit_norm + 1e-8);
        }
    }

    /// `(id_n ⊗ Φ)(Z)` for `Z ∈ Mₙ ⊗ Mₙ`.
    fn amplify(phi: &LinearMapOnMatrices, z: &HermitianMatrix) -> HermitianMatrix {
        let (n, m) = (phi.in_dim(), phi.out_dim());
        let k = z.dim() / n;
        let zm = z.as_matrix();
        let mut out = CMatrix::zeros(k * m, k * m);
        for a in 0..k {
            for b in 0..k {
                let block = zm.view((a * n, b * n), (n, n)).into_owned();
                let img = phi.apply_general(&block).unwrap();
                out.view_mut((a * m, b * m), (m, m)).copy_from(&img);
            }
        }
        HermitianMatrix::symmetrized(out)
    }
}
