use super::*;
use crate::indices::{cp_index_primal, lambda_tilde};
use crate::opsys::random_unital_system;

fn opts() -> SolverOptions {
    SolverOptions::default()
}

fn both_forms(g: &Graph) -> (f64, f64) {
    let a = lovasz_theta(g, ThetaForm::EGammaForm, opts()).unwrap();
    let b = lovasz_theta(g, ThetaForm::SGammaForm, opts()).unwrap();
    assert!(a.is_optimal() && b.is_optimal(), "{g:?}: {} {}", a.status, b.status);
    (a.value, b.value)
}

fn sys(g: &Graph) -> MatricialSystem {
    MatricialSystem::from_graph(g, GraphSystemKind::SGamma)
}

#[test]
fn complete_and_edgeless_graphs() {
    for n in 1..=6 {
        let (a, b) = both_forms(&Graph::complete(n));
        assert!((a - 1.0).abs() < 1e-7 && (b - 1.0).abs() < 1e-7, "K{n}: {a} {b}");
        let (a, b) = both_forms(&Graph::edgeless(n));
        let t = n as f64;
        assert!((a - t).abs() < 1e-6 && (b - t).abs() < 1e-6, "edgeless {n}: {a} {b}");
    }
}

#[test]
fn pentagon_is_root_five() {
    let (a, b) = both_forms(&Graph::cycle(5));
    assert!((a - 5f64.sqrt()).abs() < 1e-6, "{a}");
    assert!((b - 5f64.sqrt()).abs() < 1e-6, "{b}");
}

#[test]
fn forms_agree_on_small_corpus() {
    let corpus = Graph::small_graphs(6, 8);
    assert!(corpus.len() > 100);
    for g in &corpus {
        let (a, b) = both_forms(g);
        assert!((a - b).abs() < 1e-6, "{g:?}: {a} vs {b}");
        assert!(a >= 1.0 - 1e-7);
        let (ca, _) = both_forms(&g.complement());
        assert!(a * ca >= g.vertex_count() as f64 - 1e-4, "{g:?}: {a}·{ca}");
    }
}

#[test]
fn quantum_theta_trivial_and_agreeing() {
    for n in 2..=3 {
        let full = MatricialSystem::full(n);
        for form in [ThetaForm::DswDual, ThetaForm::DswPrimal] {
            let r = quantum_theta(&full, form, opts()).unwrap();
            assert!((r.value - 1.0).abs() < 1e-6, "{form} {}", r.value);
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for k in 0..10 {
        let s = random_unital_system(3, 1 + k % 5, &mut rng);
        let d = quantum_theta(&s, ThetaForm::DswDual, opts()).unwrap();
        let p = quantum_theta(&s, ThetaForm::DswPrimal, opts()).unwrap();
        assert!(d.is_optimal() && p.is_optimal());
        assert!((d.value - p.value).abs() < 1e-6, "{} vs {}", d.value, p.value);
    }
}

#[test]
fn quantum_theta_on_graph_systems_recorded() {
    let s = sys(&Graph::cycle(5));
    let d = quantum_theta(&s, ThetaForm::DswDual, opts()).unwrap();
    let p = quantum_theta(&s, ThetaForm::DswPrimal, opts()).unwrap();
    assert!((d.value - p.value).abs() < 1e-6);
    log::info!("quantum theta of the pentagon system: {}", d.value);
    let c = quantum_theta(&MatricialSystem::scalars(3), ThetaForm::DswDual, opts()).unwrap();
    assert!(c.value >= 1.0 - 1e-7);
    log::info!("quantum theta of scalars in M3: {}", c.value);
}

#[test]
fn wrong_forms_rejected() {
    assert!(lovasz_theta(&Graph::cycle(5), ThetaForm::DswDual, opts()).is_err());
    assert!(quantum_theta(&MatricialSystem::full(2), ThetaForm::EGammaForm, opts()).is_err());
}

#[test]
fn relative_theta_examples() {
    let c5 = Graph::cycle(5);
    let same = relative_theta(&c5, &c5, opts()).unwrap();
    assert!((same.value - 1.0).abs() < 1e-7);

    let k4 = Graph::complete(4);
    for lam in [Graph::path(4), Graph::cycle(4), Graph::edgeless(4)] {
        let r = relative_theta(&k4, &lam, opts()).unwrap();
        let (t, _) = both_forms(&lam);
        assert!((r.value - t).abs() < 1e-5, "{lam:?}: {} vs {t}", r.value);
    }

    let p5 = Graph::path(5);
    let r = relative_theta(&c5, &p5, opts()).unwrap();
    let (t, _) = both_forms(&p5);
    assert!(r.value <= t + 1e-6 && r.value >= 1.0 - 1e-7, "{} vs {t}", r.value);

    assert!(relative_theta(&p5, &c5, opts()).is_err());
}

#[test]
fn lambda_tilde_of_e_gamma_is_theta_of_complement() {
    for g in [Graph::path(3), Graph::cycle(4), Graph::cycle(5)] {
        let e = MatricialSystem::from_graph(&g, GraphSystemKind::EGamma);
        let lt = lambda_tilde(&e, opts()).unwrap().value;
        let (t, _) = both_forms(&g.complement());
        assert!((lt - t).abs() < 1e-5, "{g:?}: {lt} vs {t}");
    }
}

#[test]
fn primal_index_equals_theta_on_graph_systems() {
    for g in [Graph::complete(3), Graph::path(3), Graph::cycle(4), Graph::cycle(5)] {
        let v = cp_index_primal(&sys(&g), opts()).unwrap().value;
        let (t, _) = both_forms(&g);
        assert!((v - t).abs() < 1e-5, "{g:?}: {v} vs {t}");
    }
}

#[test]
fn hoffman_on_diagonal_algebra() {
    let r = hoffman_heuristic(&MatricialSystem::diagonal(3), 4, 1).unwrap();
    assert!(r.value >= 2.0 - 1e-9, "{}", r.value);
    assert!((r.lambda_min + 1.0).abs() < 1e-12);
    // the witness is a genuine element of the complement
    assert!(MatricialSystem::diagonal(3).project(&r.witness).frobenius_norm() < 1e-9);
}

#[test]
fn hoffman_bounded_by_theta() {
    let c5 = Graph::cycle(5);
    let r = hoffman_heuristic(&sys(&c5), 8, 7).unwrap();
    assert!(r.value >= 2.0 && r.value <= 5f64.sqrt() + 1e-6, "{}", r.value);
    for g in Graph::small_graphs(5, 6).into_iter().filter(|g| g.edge_count() < 10) {
        let s = sys(&g);
        if s.is_full() {
            continue;
        }
        let h = hoffman_heuristic(&s, 3, 0).unwrap();
        let (t, _) = both_forms(&g);
        assert!(h.lambda_min < 0.0);
        assert!(h.value <= t + 1e-6, "{g:?}: {} > {t}", h.value);
    }
}

#[test]
fn hoffman_is_deterministic_and_rejects_full() {
    let s = sys(&Graph::path(4));
    let a = hoffman_heuristic(&s, 3, 42).unwrap();
    let b = hoffman_heuristic(&s, 3, 42).unwrap();
    assert_eq!(a.value.to_bits(), b.value.to_bits());
    assert!(matches!(
        hoffman_heuristic(&MatricialSystem::full(3), 1, 0),
        Err(Error::EmptyComplement)
    ));
}
