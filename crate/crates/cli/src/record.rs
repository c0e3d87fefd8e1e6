//! The JSON run record and the canonical input digest.

use std::collections::BTreeMap;
use std::time::{SystemTime, UNIX_EPOCH};

use opsys_index::cb::{OperatorSubspace, SubspaceMap};
use opsys_index::herm::{matrix_unit, standard_basis_element, CMatrix};
use opsys_index::opsys::{Graph, MatricialSystem};
use opsys_index::sdp::{Residuals, Status};
use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

/// Significant digits kept in every emitted real.
pub const SIGNIFICANT_DIGITS: usize = 12;

pub fn round_sig(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    format!("{:.*e}", SIGNIFICANT_DIGITS - 1, x).parse().unwrap_or(x)
}

/// Non-finite values have no JSON encoding and become `None`.
fn round_opt(x: Option<f64>) -> Option<f64> {
    x.filter(|v| v.is_finite()).map(round_sig)
}

fn round_value(v: &mut Value) {
    match v {
        Value::Number(num) if num.is_f64() => {
            *v = num.as_f64().map(round_sig).and_then(serde_json::Number::from_f64).map_or(Value::Null, Value::Number);
        }
        Value::Array(items) => items.iter_mut().for_each(round_value),
        Value::Object(map) => map.values_mut().for_each(round_value),
        _ => {}
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResidualStats {
    pub primal_feas: f64,
    pub dual_feas: f64,
    pub gap: f64,
}

impl From<Residuals> for ResidualStats {
    fn from(r: Residuals) -> Self {
        Self {
            primal_feas: r.primal_feas,
            dual_feas: r.dual_feas,
            gap: r.gap,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverStats {
    pub iterations: usize,
    pub tol: f64,
    pub max_iter: usize,
    pub residuals: Option<ResidualStats>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub command: String,
    /// Hex SHA-256 of the canonical inputs.
    pub inputs: String,
    pub value: Option<f64>,
    pub dual_value: Option<f64>,
    pub gap: Option<f64>,
    pub status: String,
    pub solver: SolverStats,
    pub certificates_path: Option<String>,
    /// Seconds since the Unix epoch.
    pub timestamp: u64,
    pub details: BTreeMap<String, Value>,
}

impl RunRecord {
    pub fn new(command: &str, inputs: String, status: &str, solver: SolverStats) -> Self {
        Self {
            command: command.to_string(),
            inputs,
            value: None,
            dual_value: None,
            gap: None,
            status: status.to_string(),
            solver,
            certificates_path: None,
            timestamp: SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs()),
            details: BTreeMap::new(),
        }
    }

    pub fn detail(&mut self, key: &str, v: impl Into<Value>) {
        self.details.insert(key.to_string(), v.into());
    }

    /// Rounds every real to [`SIGNIFICANT_DIGITS`]; applied before emitting.
    pub fn rounded(mut self) -> Self {
        self.value = round_opt(self.value);
        self.dual_value = round_opt(self.dual_value);
        self.gap = round_opt(self.gap);
        self.solver.tol = round_sig(self.solver.tol);
        if let Some(r) = self.solver.residuals.as_mut() {
            for x in [&mut r.primal_feas, &mut r.dual_feas, &mut r.gap] {
                *x = round_sig(*x);
            }
        }
        self.details.values_mut().for_each(round_value);
        self
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("records contain only finite numbers")
    }

    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("records contain only finite numbers")
    }

    /// Process exit code for the status: 0 optimal, 2 infeasible, 3 iteration
    /// limit or numerical failure, 1 anything else.
    pub fn exit_code(&self) -> i32 {
        status_exit_code(&self.status)
    }
}

pub fn status_exit_code(status: &str) -> i32 {
    match status {
        "optimal" => 0,
        "primal_infeasible" | "dual_infeasible" | "infeasible" => 2,
        "max_iterations" | "numerical_breakdown" => 3,
        _ => 1,
    }
}

/// The worse of two statuses by exit code, preferring the first on ties.
pub fn worst_status(a: Status, b: Status) -> Status {
    if status_exit_code(b.as_str()) > status_exit_code(a.as_str()) {
        b
    } else {
        a
    }
}

/// Order-insensitive text for hashing: reals are fixed to 9 decimals with
/// negative zero folded into zero.
fn fixed(x: f64) -> String {
    let v = (x * 1e9).round();
    if v == 0.0 {
        "0".into()
    } else {
        format!("{v:.0}")
    }
}

fn matrix_text(m: &CMatrix) -> String {
    m.iter().map(|z| format!("{},{}", fixed(z.re), fixed(z.im))).collect::<Vec<_>>().join(";")
}

pub fn canonical_graph(g: &Graph) -> String {
    let edges: Vec<String> = g.edges().map(|(i, j)| format!("{i}-{j}")).collect();
    format!("graph[{}]{{{}}}", g.vertex_count(), edges.join(","))
}

/// The orthogonal projector onto the span, which does not depend on the basis.
pub fn canonical_system(s: &MatricialSystem) -> String {
    let n = s.ambient_dim();
    let cols: Vec<String> = (0..n * n)
        .map(|k| matrix_text(s.project(&standard_basis_element(n, k)).as_matrix()))
        .collect();
    format!("system[{n}]{{{}}}", cols.join("|"))
}

fn projected_units(x: &OperatorSubspace) -> impl Iterator<Item = CMatrix> + '_ {
    let n = x.ambient_dim();
    (0..n * n).map(move |k| x.combine(&x.coordinates(&matrix_unit(n, k / n, k % n)).0))
}

pub fn canonical_subspace(x: &OperatorSubspace) -> String {
    let cols: Vec<String> = projected_units(x).map(|m| matrix_text(&m)).collect();
    format!("subspace[{}]{{{}}}", x.ambient_dim(), cols.join("|"))
}

/// The domain projector and the map composed with it.
pub fn canonical_map(u: &SubspaceMap) -> String {
    let images: Vec<String> = projected_units(u.domain())
        .map(|m| u.apply(&m).map_or_else(|e| e.to_string(), |y| matrix_text(&y)))
        .collect();
    format!("map[{}]{{{}}}", canonical_subspace(u.domain()), images.join("|"))
}

/// SHA-256 over `command` and named canonical parts, in hex.
pub fn digest(command: &str, parts: &[(&str, String)]) -> String {
    let mut h = Sha256::new();
    h.update(command.as_bytes());
    for (name, text) in parts {
        h.update(b"\n");
        h.update(name.as_bytes());
        h.update(b"=");
        h.update(text.as_bytes());
    }
    hex(&h.finalize())
}

pub(crate) fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use opsys_index::herm::HermitianMatrix;
    use opsys_index::num_complex::Complex64;

    proptest::proptest! {
        #[test]
        fn graph_digest_invariant_under_edge_permutation(
            pairs in proptest::collection::vec((0usize..7, 0usize..7), 0..20),
            seed in 0u64..1000,
        ) {
            let pairs: Vec<_> = pairs.into_iter().filter(|(a, b)| a != b).collect();
            let mut shuffled: Vec<_> = pairs.iter().map(|&(a, b)| if seed % 2 == 0 { (b, a) } else { (a, b) }).collect();
            let k = shuffled.len().max(1);
            shuffled.rotate_left(seed as usize % k);
            let a = Graph::new(7, pairs).unwrap();
            let b = Graph::new(7, shuffled).unwrap();
            proptest::prop_assert_eq!(
                digest("theta", &[("graph", canonical_graph(&a))]),
                digest("theta", &[("graph", canonical_graph(&b))])
            );
        }

        #[test]
        fn rounded_values_survive_json(x in proptest::num::f64::NORMAL) {
            let r = round_sig(x);
            let back: f64 = serde_json::from_str(&serde_json::to_string(&r).unwrap()).unwrap();
            proptest::prop_assert_eq!(back, r);
            proptest::prop_assert!(((r - x) / x).abs() <= 1e-11);
        }
    }

    #[test]
    fn rounding_keeps_twelve_digits() {
        assert_eq!(round_sig(2.0 / 3.0), 0.666666666667);
        assert_eq!(round_sig(-1.0e-7 / 3.0), -3.33333333333e-8);
        assert_eq!(round_sig(0.0), 0.0);
    }

    #[test]
    fn exit_codes() {
        assert_eq!(status_exit_code("optimal"), 0);
        assert_eq!(status_exit_code("primal_infeasible"), 2);
        assert_eq!(status_exit_code("max_iterations"), 3);
        assert_eq!(status_exit_code("numerical_breakdown"), 3);
        assert_eq!(worst_status(Status::Optimal, Status::MaxIterations), Status::MaxIterations);
    }

    #[test]
    fn graph_digest_ignores_edge_order() {
        let a = Graph::new(4, [(0, 1), (2, 3), (1, 2)]).unwrap();
        let b = Graph::new(4, [(3, 2), (1, 0), (2, 1), (0, 1)]).unwrap();
        assert_eq!(canonical_graph(&a), canonical_graph(&b));
        let c = Graph::new(4, [(0, 1), (2, 3)]).unwrap();
        assert_ne!(canonical_graph(&a), canonical_graph(&c));
    }

    #[test]
    fn system_digest_ignores_basis_choice() {
        let x = HermitianMatrix::new(CMatrix::from_fn(3, 3, |i, j| {
            Complex64::new(if i == j { i as f64 } else { 0.3 }, if i < j { 0.2 } else if i > j { -0.2 } else { 0.0 })
        }))
        .unwrap();
        let id = HermitianMatrix::identity(3);
        let a = MatricialSystem::new(3, &[id.clone(), x.clone()]).unwrap();
        let b = MatricialSystem::new(3, &[x.axpy(2.0, &id), id.scale(-1.0)]).unwrap();
        assert_eq!(canonical_system(&a), canonical_system(&b));
        assert_ne!(canonical_system(&a), canonical_system(&MatricialSystem::scalars(3)));
    }

    #[test]
    fn subspace_digest_ignores_basis_choice() {
        let e = |i, j| matrix_unit(2, i, j);
        let a = OperatorSubspace::new(2, vec![e(0, 1), e(1, 0)]).unwrap();
        let b = OperatorSubspace::new(2, vec![e(0, 1) + e(1, 0), e(1, 0) * Complex64::new(0.0, 3.0)]).unwrap();
        assert_eq!(canonical_subspace(&a), canonical_subspace(&b));
    }

    #[test]
    fn record_round_trips_byte_identically() {
        let mut r = RunRecord::new(
            "theta",
            digest("theta", &[("graph", "x".into())]),
            "optimal",
            SolverStats { iterations: 12, tol: 1e-8, max_iter: 500, residuals: Some(ResidualStats { primal_feas: 1.234567890123456e-11, dual_feas: 0.0, gap: 3e-9 }) },
        );
        r.value = Some(5f64.sqrt());
        r.dual_value = Some(5f64.sqrt() + 1e-10);
        r.gap = Some(1e-10);
        r.detail("table", serde_json::json!([0.1 + 0.2, 1.0 / 3.0, {"x": -2.0f64.sqrt()}]));
        let text = r.rounded().to_json();
        let back: RunRecord = serde_json::from_str(&text).unwrap();
        assert_eq!(back.to_json(), text);
        assert_eq!(back.value, Some(2.2360679775));
    }
}
