//! Acceptance criteria 1–12. Each test prints one `[PASS]`/`[FAIL]` line on
//! stderr (bypassing output capture) and fails when its criterion does.

use std::fmt::Write as _;
use std::io::Write as _;
use std::time::{Duration, Instant};

use opsys_index::cb::{bounded_index_linf, cb_norm, OperatorSubspace, SubspaceMap};
use opsys_index::choi::LinearMapOnMatrices;
use opsys_index::indices::{
    coindex, cp_index, cp_index_dual, cp_index_primal, cp_index_relative, lambda_tilde, multiplicativity_check,
};
use opsys_index::opsys::{random_unital_system, Graph, GraphSystemKind, MatricialSystem};
use opsys_index::random;
use opsys_index::sdp::SolverOptions;
use opsys_index::theta::{lovasz_theta, quantum_theta, ThetaForm};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn opts() -> SolverOptions {
    SolverOptions::default()
}

fn report(id: u32, title: &str, pass: bool, detail: &str) {
    let verdict = if pass { "PASS" } else { "FAIL" };
    let mut err = std::io::stderr().lock();
    let _ = writeln!(err, "[{verdict}] criterion {id:>2} ({title}): {detail}");
    assert!(pass, "criterion {id} failed: {detail}");
}

fn emit_table(title: &str, body: &str) {
    let _ = write!(std::io::stderr().lock(), "--- {title} ---\n{body}");
}

/// K₃, P₃, C₄, C₅ and the induced subgraphs of the Petersen graph on 2 to 6
/// vertices, up to isomorphism.
fn corpus() -> Vec<(String, Graph)> {
    let mut out = vec![
        ("K3".to_string(), Graph::complete(3)),
        ("P3".to_string(), Graph::path(3)),
        ("C4".to_string(), Graph::cycle(4)),
        ("C5".to_string(), Graph::cycle(5)),
    ];
    for g in Graph::petersen().induced_subgraphs(2, 6) {
        let edges: Vec<String> = g.edges().map(|(i, j)| format!("{i}{j}")).collect();
        out.push((format!("pet{}[{}]", g.vertex_count(), edges.join(" ")), g));
    }
    out
}

fn s_gamma(g: &Graph) -> MatricialSystem {
    MatricialSystem::from_graph(g, GraphSystemKind::SGamma)
}

#[test]
fn criterion_01_lambda_tilde_of_full_matrices() {
    let mut pass = true;
    let mut detail = String::new();
    for n in 2..=5 {
        let start = Instant::now();
        let r = cp_index_relative(&MatricialSystem::full(n), &MatricialSystem::scalars(n), opts()).unwrap();
        let elapsed = start.elapsed();
        let ok = r.is_optimal() && (r.value - n as f64).abs() <= 1e-5 && elapsed <= Duration::from_secs(10);
        pass &= ok;
        let _ = write!(detail, "n={n}: {:.8} in {:.2}s; ", r.value, elapsed.as_secs_f64());
    }
    report(1, "lambda-tilde(M_n) = n", pass, &detail);
}

#[test]
fn criterion_02_lambda_tilde_of_diagonals() {
    let mut pass = true;
    let mut detail = String::new();
    for n in 2..=5 {
        let r = lambda_tilde(&MatricialSystem::diagonal(n), opts()).unwrap();
        pass &= r.is_optimal() && (r.value - n as f64).abs() <= 1e-5;
        let _ = write!(detail, "n={n}: {:.8}; ", r.value);
    }
    report(2, "lambda-tilde(D_n) = n", pass, &detail);
}

#[test]
fn criterion_03_index_of_graph_systems_is_theta() {
    let mut pass = true;
    let mut worst: f64 = 0.0;
    let graphs = corpus();
    for (name, g) in &graphs {
        let ind = cp_index_primal(&s_gamma(g), opts()).unwrap();
        let te = lovasz_theta(g, ThetaForm::EGammaForm, opts()).unwrap();
        let ts = lovasz_theta(g, ThetaForm::SGammaForm, opts()).unwrap();
        let dev = (ind.value - te.value).abs().max((ind.value - ts.value).abs()).max((te.value - ts.value).abs());
        worst = worst.max(dev);
        if dev > 1e-5 || !(ind.is_optimal() && te.is_optimal() && ts.is_optimal()) {
            pass = false;
            eprintln!("{name}: index {} theta {} / {}", ind.value, te.value, ts.value);
        }
    }
    let c5 = lovasz_theta(&Graph::cycle(5), ThetaForm::EGammaForm, opts()).unwrap().value;
    pass &= (c5 - 5f64.sqrt()).abs() <= 1e-5;
    report(
        3,
        "Ind_CP(M_n:S_G) = theta(G)",
        pass,
        &format!("{} graphs, worst pairwise deviation {worst:.2e}, theta(C5) = {c5:.8}", graphs.len()),
    );
}

#[test]
fn criterion_04_lambda_tilde_of_e_gamma_is_complement_theta() {
    let mut pass = true;
    let mut worst: f64 = 0.0;
    let graphs = corpus();
    for (name, g) in &graphs {
        let lt = lambda_tilde(&MatricialSystem::from_graph(g, GraphSystemKind::EGamma), opts()).unwrap();
        let th = lovasz_theta(&g.complement(), ThetaForm::EGammaForm, opts()).unwrap();
        let dev = (lt.value - th.value).abs();
        worst = worst.max(dev);
        if dev > 1e-5 || !(lt.is_optimal() && th.is_optimal()) {
            pass = false;
            eprintln!("{name}: lambda-tilde {} theta of complement {}", lt.value, th.value);
        }
    }
    report(
        4,
        "lambda-tilde(E_G) = theta(complement)",
        pass,
        &format!("{} graphs, worst deviation {worst:.2e}", graphs.len()),
    );
}

#[test]
fn criterion_05_primal_dual_agreement() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut systems: Vec<MatricialSystem> = (0..10).map(|k| random_unital_system(3, 1 + k % 4, &mut rng)).collect();
    systems.extend(corpus().iter().map(|(_, g)| s_gamma(g)));
    let mut worst: f64 = 0.0;
    let mut all_optimal = true;
    for s in &systems {
        let p = cp_index_primal(s, opts()).unwrap();
        let d = cp_index_dual(s, opts()).unwrap();
        all_optimal &= p.is_optimal() && d.is_optimal();
        worst = worst.max((p.value - d.value).abs());
    }
    report(
        5,
        "primal/dual agreement",
        all_optimal && worst <= 1e-6,
        &format!("{} systems, worst |primal - dual| {worst:.2e}", systems.len()),
    );
}

#[test]
fn criterion_06_multiplicativity() {
    let pool = [
        ("CI2", MatricialSystem::scalars(2)),
        ("D2", MatricialSystem::diagonal(2)),
        ("M2", MatricialSystem::full(2)),
    ];
    let m2 = MatricialSystem::full(2);
    let mut pass = true;
    let mut detail = String::new();
    for (sn, s) in &pool {
        for (tn, t) in &pool {
            let r = multiplicativity_check(&m2, s, &m2, t, opts()).unwrap();
            let ok = r.relative_deviation <= 1e-4;
            pass &= ok;
            let _ = write!(detail, "{sn}x{tn}: {:.6} vs {:.6}; ", r.combined.value, r.product);
        }
    }
    let mixed = multiplicativity_check(
        &m2,
        &MatricialSystem::scalars(2),
        &MatricialSystem::full(3),
        &MatricialSystem::scalars(3),
        opts(),
    )
    .unwrap();
    let mixed_ok = (mixed.combined.value - 6.0).abs() <= 1e-4;
    pass &= mixed_ok;
    let _ = write!(
        detail,
        "(M2:CI2)x(M3:CI3): {:.6} (product {:.6}, target 6)",
        mixed.combined.value, mixed.product
    );
    report(6, "multiplicativity", pass, &detail);
}

#[test]
fn criterion_07_coindex_bounded_by_theta() {
    let mut pass = true;
    let mut table = String::from("graph                         coindex        theta          diff\n");
    for (name, g) in corpus() {
        let s = s_gamma(&g);
        let co = coindex(&s.perp(), opts()).unwrap();
        let th = lovasz_theta(&g, ThetaForm::EGammaForm, opts()).unwrap();
        pass &= co.is_optimal() && co.value <= th.value + 1e-6;
        let _ = writeln!(table, "{name:<29} {:<14.9} {:<14.9} {:+.2e}", co.value, th.value, co.value - th.value);
    }
    emit_table("co-index vs theta", &table);
    report(7, "coindex(M_n, S_G^perp) <= theta(G)", pass, "table above");
}

#[test]
fn criterion_08_quantum_theta_forms() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut worst: f64 = 0.0;
    let mut all_optimal = true;
    for k in 0..10 {
        let s = random_unital_system(3, 1 + k % 4, &mut rng);
        let d = quantum_theta(&s, ThetaForm::DswDual, opts()).unwrap();
        let p = quantum_theta(&s, ThetaForm::DswPrimal, opts()).unwrap();
        all_optimal &= d.is_optimal() && p.is_optimal();
        worst = worst.max((d.value - p.value).abs());
    }
    let mut table = String::from("graph                         qtheta         theta          Ind_CP\n");
    for (name, g) in corpus() {
        let s = s_gamma(&g);
        let q = quantum_theta(&s, ThetaForm::DswDual, opts()).unwrap();
        let th = lovasz_theta(&g, ThetaForm::EGammaForm, opts()).unwrap();
        let ind = cp_index(&s, opts()).unwrap();
        let _ = writeln!(table, "{name:<29} {:<14.9} {:<14.9} {:<14.9}", q.value, th.value, ind.value);
    }
    emit_table("quantum theta vs theta and Ind_CP", &table);
    report(
        8,
        "quantum theta forms agree",
        all_optimal && worst <= 1e-6,
        &format!("10 random systems in M3, worst form deviation {worst:.2e}"),
    );
}

#[test]
fn criterion_09_choi_calculus() {
    let mut pass = true;
    let mut detail = String::new();
    for n in [2usize, 3] {
        let c = n as f64;
        let above = LinearMapOnMatrices::trace_deviation(n, c + 1e-6).min_choi_eigenvalue();
        let below = LinearMapOnMatrices::trace_deviation(n, c - 1e-6).min_choi_eigenvalue();
        let ok = above >= 0.0 && below < 0.0;
        pass &= ok;
        // where the Choi matrix actually turns PSD, reported for the record
        let sq = c * c;
        let (hi, lo) = (
            LinearMapOnMatrices::trace_deviation(n, sq + 1e-6).min_choi_eigenvalue(),
            LinearMapOnMatrices::trace_deviation(n, sq - 1e-6).min_choi_eigenvalue(),
        );
        let _ = write!(
            detail,
            "T_{n}: min Choi eig {above:.3e} at c=n+1e-6, {below:.3e} at c=n-1e-6 (at c=n^2±1e-6: {hi:.1e}, {lo:.1e}); "
        );
    }
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut worst = f64::INFINITY;
    for _ in 0..50 {
        let phi = random::cp_map(3, 3, &mut rng);
        worst = worst.min(phi.choi_expectation_matrix().unwrap().min_eigenvalue());
    }
    pass &= worst >= -1e-8;
    let _ = write!(detail, "choi-expectation min eigenvalue over 50 maps {worst:.3e}");
    report(9, "T_n CP iff c >= n; choi-expectation PSD", pass, &detail);
}

#[test]
fn criterion_10_cb_norms() {
    let m2 = OperatorSubspace::full(2);
    let t = SubspaceMap::from_fn(&m2, 2, |x| x.transpose()).unwrap();
    let tn = cb_norm(&t, opts()).unwrap().value;
    let mut pass = (tn - 2.0).abs() <= 1e-5;
    let mut worst: f64 = 0.0;
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let m3 = OperatorSubspace::full(3);
    for _ in 0..5 {
        let a = random::psd(3, &mut rng);
        let phi = LinearMapOnMatrices::schur_multiplier(&a);
        let u = SubspaceMap::from_fn(&m3, 3, |x| phi.apply_general(x).unwrap()).unwrap();
        let expected = (0..3).map(|i| a.get(i, i).re).fold(f64::MIN, f64::max);
        worst = worst.max((cb_norm(&u, opts()).unwrap().value - expected).abs());
    }
    pass &= worst <= 1e-6;
    report(
        10,
        "cb norms via Paulsen systems",
        pass,
        &format!("transpose on M2 {tn:.8}; Schur multipliers worst deviation {worst:.2e}"),
    );
}

#[test]
fn criterion_11_bounded_index_of_linf() {
    let mut pass = true;
    let mut detail = String::new();
    for n in 2..=6 {
        let start = Instant::now();
        let r = bounded_index_linf(n).unwrap();
        let elapsed = start.elapsed();
        pass &= (r.value - n as f64).abs() <= 1e-9 && elapsed <= Duration::from_secs(1);
        let _ = write!(detail, "n={n}: {} in {:.1}ms; ", r.value, elapsed.as_secs_f64() * 1e3);
    }
    report(11, "Ind_B(l_inf(n):C1) = n", pass, &detail);
}

#[test]
fn criterion_12_proper_subsystems_have_index_above_one() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let mut least = f64::INFINITY;
    let mut pass = true;
    for k in 0..10 {
        let s = random_unital_system(3, 1 + k % 5, &mut rng);
        assert!(!s.is_full());
        let r = cp_index(&s, opts()).unwrap();
        pass &= r.is_optimal() && r.value > 1.0 + 1e-6;
        least = least.min(r.value);
    }
    report(12, "proper subsystems have index > 1", pass, &format!("10 systems in M3, least index {least:.8}"));
}
