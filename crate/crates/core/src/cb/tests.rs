use super::*;
use crate::choi::LinearMapOnMatrices;
use crate::random;
use proptest::prelude::{prop_assert, proptest, ProptestConfig};
use rand::Rng;

fn opts() -> SolverOptions {
    SolverOptions::default()
}

fn transpose_map(n: usize) -> SubspaceMap {
    SubspaceMap::from_fn(&OperatorSubspace::full(n), n, |x| x.transpose()).unwrap()
}

fn random_map(n: usize, rng: &mut ChaCha8Rng) -> SubspaceMap {
    let g = |rng: &mut ChaCha8Rng| {
        CMatrix::from_fn(n, n, |_, _| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
    };
    let images = (0..n * n).map(|_| g(rng)).collect();
    SubspaceMap::new(OperatorSubspace::full(n), n, images).unwrap()
}

#[test]
fn identity_has_norm_one() {
    for sub in [OperatorSubspace::full(2), OperatorSubspace::diagonal(3), OperatorSubspace::scalars(2)] {
        let r = cb_norm(&SubspaceMap::identity(&sub), opts()).unwrap();
        assert!(r.is_optimal());
        assert!((r.value - 1.0).abs() < 1e-7, "{}", r.value);
    }
}

#[test]
fn transpose_on_m2_has_norm_two() {
    let r = cb_norm(&transpose_map(2), opts()).unwrap();
    assert!((r.value - 2.0).abs() < 1e-5, "{}", r.value);
    // brute-force the feasibility side of the same encoding
    assert_eq!(paulsen_extension_feasible(&transpose_map(2), 2.05, opts()).unwrap(), Status::Optimal);
    assert_eq!(paulsen_extension_feasible(&transpose_map(2), 1.9, opts()).unwrap(), Status::PrimalInfeasible);
}

#[test]
fn schur_multiplier_norm_is_largest_diagonal_entry() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for _ in 0..3 {
        let a = random::real_psd(3, &mut rng);
        let phi = LinearMapOnMatrices::schur_multiplier(&a);
        let u = SubspaceMap::from_fn(&OperatorSubspace::full(3), 3, |x| phi.apply_general(x).unwrap()).unwrap();
        let r = cb_norm(&u, opts()).unwrap();
        let expected = (0..3).map(|i| a.get(i, i).re).fold(f64::MIN, f64::max);
        assert!((r.value - expected).abs() < 1e-6 * (1.0 + expected), "{} vs {expected}", r.value);
    }
}

#[test]
fn subadditive_and_homogeneous() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..10 {
        let u = random_map(2, &mut rng);
        let v = random_map(2, &mut rng);
        let nu = cb_norm(&u, opts()).unwrap().value;
        let nv = cb_norm(&v, opts()).unwrap().value;
        let nuv = cb_norm(&u.add(&v).unwrap(), opts()).unwrap().value;
        assert!(nuv <= nu + nv + 1e-6 * (1.0 + nu + nv));
        let s = Complex64::new(-1.5, 0.7);
        let ns = cb_norm(&u.scale(s), opts()).unwrap().value;
        assert!((ns - s.norm() * nu).abs() < 1e-6 * (1.0 + ns), "{ns} vs {}", s.norm() * nu);
    }
}

#[test]
fn norm_dominates_operator_norm_on_units() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let u = random_map(2, &mut rng);
    let r = cb_norm(&u, opts()).unwrap().value;
    for x in OperatorSubspace::full(2).basis() {
        let y = u.apply(x).unwrap();
        let top = nalgebra::linalg::SVD::new(y, false, false).singular_values.max();
        assert!(top <= r + 1e-6);
    }
}

#[test]
fn dependent_basis_rejected() {
    let e = crate::herm::matrix_unit(2, 0, 1);
    assert!(OperatorSubspace::new(2, vec![e.clone(), e * Complex64::new(2.0, 0.0)]).is_err());
}

#[test]
fn zero_map_is_never_a_witness() {
    for sub in [OperatorSubspace::full(2), OperatorSubspace::diagonal(2)] {
        let zero = SubspaceMap::identity(&sub).scale(Complex64::new(0.0, 0.0));
        assert!(verify_cb_witness(&zero, opts()).unwrap().is_none());
    }
}

#[test]
fn cb_index_of_equal_spaces_is_one() {
    let x = OperatorSubspace::diagonal(2);
    let r = cb_index_dc(&x, &x, 1, 0, opts()).unwrap();
    assert!((r.value.unwrap() - 1.0).abs() < 1e-6, "{:?}", r.value);
}

#[test]
fn cb_index_witnesses_reverify() {
    let x = OperatorSubspace::full(2);
    let x0 = OperatorSubspace::scalars(2);
    let r = cb_index_dc(&x, &x0, 3, 5, opts()).unwrap();
    let value = r.value.expect("a feasible witness");
    let u = r.witness.unwrap();
    let (norm, dev) = verify_cb_witness(&u, opts()).unwrap().unwrap();
    assert!((norm - value).abs() < 1e-6);
    assert!(dev <= norm - 1.0 + WITNESS_TOL);
    for im in u.images() {
        assert!(x0.coordinates(im).1 < 1e-8);
    }
    // 4τ(·)I is feasible with ‖u‖cb = 4, so the search never does worse
    assert!(value <= 4.0 + 1e-6, "{value}");
}

#[test]
fn scaled_trace_witness_is_not_feasible() {
    // u = 2τ(·)I has ‖u‖cb = 2 but u − id is a unitary conjugate of the
    // transpose, so ‖u − id‖cb = 2 > 1.
    let x = OperatorSubspace::full(2);
    let u = SubspaceMap::from_fn(&x, 2, |m| CMatrix::identity(2, 2) * m.trace()).unwrap();
    let norm = cb_norm(&u, opts()).unwrap().value;
    let dev = cb_norm(&u.sub(&SubspaceMap::identity(&x)).unwrap(), opts()).unwrap().value;
    assert!((norm - 2.0).abs() < 1e-6, "{norm}");
    assert!((dev - 2.0).abs() < 1e-6, "{dev}");
}

#[test]
fn paulsen_feasibility_matches_cb_norm_on_a_grid() {
    // u with ‖u‖cb = 1; ũ₁ − λ id is ṽ_{1−λ} for v = u − λ id
    let x = OperatorSubspace::full(2);
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let psi = random::unital_cp_map(2, 2, &mut rng);
    let u = SubspaceMap::from_fn(&x, 2, |m| psi.apply_general(m).unwrap()).unwrap();
    assert!((cb_norm(&u, opts()).unwrap().value - 1.0).abs() < 1e-6);
    for lambda in [0.05, 0.3, 0.6] {
        let v = u.sub(&SubspaceMap::identity(&x).scale(Complex64::new(lambda, 0.0))).unwrap();
        let nv = cb_norm(&v, opts()).unwrap().value;
        let status = paulsen_extension_feasible(&v, 1.0 - lambda, opts()).unwrap();
        if (nv - (1.0 - lambda)).abs() > 1e-4 {
            assert_eq!(status == Status::Optimal, nv <= 1.0 - lambda, "λ = {lambda}: ‖v‖cb = {nv}");
        }
    }
}

#[test]
fn bounded_index_small_cases() {
    for n in 2..=6 {
        let r = bounded_index_linf(n).unwrap();
        assert!((r.value - n as f64).abs() < 1e-9, "{n}: {}", r.value);
        assert!((r.deviation - (n as f64 - 1.0)).abs() < 1e-9);
    }
    assert!(bounded_index_linf(1).is_err());
}

#[test]
fn averaging_map_deviation() {
    // E(x) = mean(x)·1: ‖E − λ id‖ = 1 − λ + (n−1)/n·… evaluated directly
    for n in 2..=5 {
        let e = vec![1.0 / n as f64; n];
        let (norm, _) = linf_norms(&e);
        assert!((norm - 1.0).abs() < 1e-12);
        let scaled: Vec<f64> = e.iter().map(|v| v * n as f64).collect();
        let (ns, dev) = linf_norms(&scaled);
        assert!((ns - n as f64).abs() < 1e-12 && (dev - (n as f64 - 1.0)).abs() < 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]
    #[test]
    fn feasible_constant_maps_have_norm_at_least_n(c in proptest::collection::vec(-3.0f64..3.0, 2..=6)) {
        let n = c.len() as f64;
        if linf_feasible(&c) {
            prop_assert!(linf_norms(&c).0 >= n - 1e-9);
        }
    }
}

