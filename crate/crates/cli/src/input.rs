//! Graph files, JSON system files, and the `@name:n` built-ins.

use std::fs;
use std::path::Path;

use clap::ValueEnum;
use opsys_index::cb::{OperatorSubspace, SubspaceMap};
use opsys_index::herm::{CMatrix, HermitianMatrix};
use opsys_index::num_complex::Complex64;
use opsys_index::opsys::{Graph, GraphSystemKind, MatricialSystem};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum)]
pub enum GraphFormat {
    /// `p edge n m` header and 1-indexed `e i j` lines.
    #[default]
    Dimacs,
    /// Vertex count on the first line, then 0-indexed `i j` pairs.
    Edgelist,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum)]
pub enum SystemKind {
    #[default]
    #[value(name = "s-gamma")]
    SGamma,
    #[value(name = "e-gamma")]
    EGamma,
    #[value(name = "e-n")]
    En,
    #[value(name = "d-n")]
    Dn,
}

impl From<SystemKind> for GraphSystemKind {
    fn from(k: SystemKind) -> Self {
        match k {
            SystemKind::SGamma => GraphSystemKind::SGamma,
            SystemKind::EGamma => GraphSystemKind::EGamma,
            SystemKind::En => GraphSystemKind::En,
            SystemKind::Dn => GraphSystemKind::Dn,
        }
    }
}

fn malformed(line: usize, msg: impl std::fmt::Display) -> CliError {
    CliError::Input(format!("line {line}: {msg}"))
}

fn parse_index(tok: Option<&str>, line: usize) -> Result<usize, CliError> {
    let tok = tok.ok_or_else(|| malformed(line, "missing vertex"))?;
    tok.parse().map_err(|_| malformed(line, format!("bad integer {tok:?}")))
}

/// Duplicate and reversed edges are merged; self-loops and out-of-range
/// vertices are errors.
pub fn parse_graph(text: &str, format: GraphFormat) -> Result<Graph, CliError> {
    let mut n: Option<usize> = None;
    let mut edges = Vec::new();
    let content = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty());
    for (line, l) in content {
        let mut toks = l.split_whitespace();
        match format {
            GraphFormat::Dimacs => match toks.next() {
                Some("c") => continue,
                Some("p") => {
                    if n.is_some() {
                        return Err(malformed(line, "second problem line"));
                    }
                    if !matches!(toks.next(), Some("edge" | "col")) {
                        return Err(malformed(line, "expected `p edge n m`"));
                    }
                    n = Some(parse_index(toks.next(), line)?);
                    parse_index(toks.next(), line)?;
                }
                Some("e") => {
                    let count = n.ok_or_else(|| malformed(line, "edge before the problem line"))?;
                    let (a, b) = (parse_index(toks.next(), line)?, parse_index(toks.next(), line)?);
                    if a == 0 || b == 0 || a > count || b > count {
                        return Err(malformed(line, format!("vertex out of range 1..={count}")));
                    }
                    edges.push((a - 1, b - 1, line));
                }
                Some(other) => return Err(malformed(line, format!("unknown line type {other:?}"))),
                None => {}
            },
            GraphFormat::Edgelist => {
                if l.starts_with('#') {
                    continue;
                }
                match n {
                    None => n = Some(parse_index(toks.next(), line)?),
                    Some(count) => {
                        let (a, b) = (parse_index(toks.next(), line)?, parse_index(toks.next(), line)?);
                        if a >= count || b >= count {
                            return Err(malformed(line, format!("vertex out of range 0..{count}")));
                        }
                        edges.push((a, b, line));
                    }
                }
            }
        }
        if toks.next().is_some() {
            return Err(malformed(line, "trailing tokens"));
        }
    }
    let n = n.ok_or_else(|| CliError::Input("missing header".into()))?;
    if let Some(&(_, _, line)) = edges.iter().find(|(a, b, _)| a == b) {
        return Err(malformed(line, "self-loop"));
    }
    Ok(Graph::new(n, edges.into_iter().map(|(a, b, _)| (a, b)))?)
}

pub fn read_graph(path: &Path, format: GraphFormat) -> Result<Graph, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Io(path.display().to_string(), e))?;
    parse_graph(&text, format)
}

/// One matrix as rows of `[re, im]` pairs.
pub type MatrixJson = Vec<Vec<[f64; 2]>>;

/// `{ "ambient_dim": n, "basis": [matrix, ...] }`.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemFile {
    pub ambient_dim: usize,
    pub basis: Vec<MatrixJson>,
}

/// `{ "domain": system file, "out_dim": m, "images": [matrix, ...] }`.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MapFile {
    pub domain: SystemFile,
    pub out_dim: usize,
    pub images: Vec<MatrixJson>,
}

pub fn matrix_from_json(m: &MatrixJson, n: usize) -> Result<CMatrix, CliError> {
    if m.len() != n || m.iter().any(|row| row.len() != n) {
        return Err(CliError::Input(format!("expected a {n}×{n} matrix")));
    }
    Ok(CMatrix::from_fn(n, n, |i, j| Complex64::new(m[i][j][0], m[i][j][1])))
}

pub fn matrix_to_json(m: &CMatrix) -> MatrixJson {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
        .collect()
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &str) -> Result<T, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Io(path.to_string(), e))?;
    serde_json::from_str(&text).map_err(|e| CliError::Input(format!("{path}: {e}")))
}

/// `@full:n`, `@scalar:n` or `@diag:n` split into name and size.
fn builtin(spec: &str) -> Result<Option<(&str, usize)>, CliError> {
    let Some(rest) = spec.strip_prefix('@') else {
        return Ok(None);
    };
    let (name, n) = rest
        .split_once(':')
        .ok_or_else(|| CliError::Input(format!("built-in {spec:?} needs a size, as in @full:3")))?;
    let n: usize = n.parse().map_err(|_| CliError::Input(format!("bad size in {spec:?}")))?;
    if n == 0 {
        return Err(CliError::Input("size must be positive".into()));
    }
    Ok(Some((name, n)))
}

fn unknown_builtin(spec: &str) -> CliError {
    CliError::Input(format!("unknown built-in {spec:?}; expected @full:n, @scalar:n or @diag:n"))
}

pub fn load_system(spec: &str) -> Result<MatricialSystem, CliError> {
    if let Some((name, n)) = builtin(spec)? {
        return match name {
            "full" => Ok(MatricialSystem::full(n)),
            "scalar" => Ok(MatricialSystem::scalars(n)),
            "diag" => Ok(MatricialSystem::diagonal(n)),
            _ => Err(unknown_builtin(spec)),
        };
    }
    system_from_file(&read_json(spec)?)
}

pub fn system_from_file(f: &SystemFile) -> Result<MatricialSystem, CliError> {
    let spanning = f
        .basis
        .iter()
        .map(|m| Ok(HermitianMatrix::new(matrix_from_json(m, f.ambient_dim)?)?))
        .collect::<Result<Vec<_>, CliError>>()?;
    Ok(MatricialSystem::new(f.ambient_dim, &spanning)?)
}

pub fn load_subspace(spec: &str) -> Result<OperatorSubspace, CliError> {
    if let Some((name, n)) = builtin(spec)? {
        return match name {
            "full" => Ok(OperatorSubspace::full(n)),
            "scalar" => Ok(OperatorSubspace::scalars(n)),
            "diag" => Ok(OperatorSubspace::diagonal(n)),
            _ => Err(unknown_builtin(spec)),
        };
    }
    subspace_from_file(&read_json(spec)?)
}

fn subspace_from_file(f: &SystemFile) -> Result<OperatorSubspace, CliError> {
    let basis = f
        .basis
        .iter()
        .map(|m| matrix_from_json(m, f.ambient_dim))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(OperatorSubspace::new(f.ambient_dim, basis)?)
}

/// `@identity:n`, `@transpose:n`, `@trace:n:c` (the map `x ↦ c·tr(x)/n·I`
/// on `Mₙ`), or a JSON map file.
pub fn load_map(spec: &str) -> Result<SubspaceMap, CliError> {
    if let Some(rest) = spec.strip_prefix('@') {
        let parts: Vec<&str> = rest.split(':').collect();
        let size = |s: &str| -> Result<usize, CliError> {
            s.parse().ok().filter(|&n| n > 0).ok_or_else(|| CliError::Input(format!("bad size in {spec:?}")))
        };
        return match parts.as_slice() {
            ["identity", n] => Ok(SubspaceMap::identity(&OperatorSubspace::full(size(n)?))),
            ["transpose", n] => {
                let n = size(n)?;
                Ok(SubspaceMap::from_fn(&OperatorSubspace::full(n), n, |x| x.transpose())?)
            }
            ["trace", n, c] => {
                let n = size(n)?;
                let c: f64 = c.parse().map_err(|_| CliError::Input(format!("bad scale in {spec:?}")))?;
                let s = Complex64::new(c / n as f64, 0.0);
                Ok(SubspaceMap::from_fn(&OperatorSubspace::full(n), n, |x| CMatrix::identity(n, n) * (x.trace() * s))?)
            }
            _ => Err(CliError::Input(format!(
                "unknown built-in map {spec:?}; expected @identity:n, @transpose:n or @trace:n:c"
            ))),
        };
    }
    let f: MapFile = read_json(spec)?;
    let domain = subspace_from_file(&f.domain)?;
    let images = f
        .images
        .iter()
        .map(|m| matrix_from_json(m, f.out_dim))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(SubspaceMap::new(domain, f.out_dim, images)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dimacs_pentagon() {
        let g = parse_graph("c pentagon\np edge 5 5\ne 1 2\ne 2 3\ne 3 4\ne 4 5\ne 5 1\n", GraphFormat::Dimacs).unwrap();
        assert_eq!(g.edges().collect::<Vec<_>>(), Graph::cycle(5).edges().collect::<Vec<_>>());
    }

    #[test]
    fn edgelist_with_isolated_vertex() {
        let g = parse_graph("3\n0 1\n", GraphFormat::Edgelist).unwrap();
        assert_eq!(g.vertex_count(), 3);
        assert_eq!(g.edges().collect::<Vec<_>>(), vec![(0, 1)]);
    }

    #[test]
    fn duplicates_and_reversals_merge() {
        let g = parse_graph("p edge 3 3\ne 1 2\ne 2 1\ne 1 2\n", GraphFormat::Dimacs).unwrap();
        assert_eq!(g.edge_count(), 1);
    }

    #[test]
    fn malformed_graphs_rejected() {
        for (text, format) in [
            ("p edge 3 1\ne 1 1\n", GraphFormat::Dimacs),
            ("e 1 2\n", GraphFormat::Dimacs),
            ("p edge 3 1\ne 1 4\n", GraphFormat::Dimacs),
            ("p node 3 1\n", GraphFormat::Dimacs),
            ("p edge 3 1\ne 1 2 3\n", GraphFormat::Dimacs),
            ("", GraphFormat::Dimacs),
            ("3\n0 3\n", GraphFormat::Edgelist),
            ("3\n1 1\n", GraphFormat::Edgelist),
            ("x\n", GraphFormat::Edgelist),
        ] {
            assert!(matches!(parse_graph(text, format), Err(CliError::Input(_))), "{text:?}");
        }
    }

    #[test]
    fn builtins() {
        assert!(load_system("@full:3").unwrap().is_full());
        assert_eq!(load_system("@diag:4").unwrap().dim(), 4);
        assert_eq!(load_subspace("@scalar:2").unwrap().dim(), 1);
        assert!(load_system("@bogus:2").is_err());
        assert!(load_system("@full").is_err());
        assert!(load_map("@trace:2:4").is_ok());
        assert!(load_map("@transpose:0").is_err());
    }

    #[test]
    fn system_file_round_trip() {
        let f = SystemFile {
            ambient_dim: 2,
            basis: vec![
                matrix_to_json(&CMatrix::identity(2, 2)),
                vec![vec![[0.0, 0.0], [0.0, -1.0]], vec![[0.0, 1.0], [0.0, 0.0]]],
            ],
        };
        let s = system_from_file(&f).unwrap();
        assert_eq!(s.dim(), 2);
        let text = serde_json::to_string(&f).unwrap();
        let back: SystemFile = serde_json::from_str(&text).unwrap();
        assert_eq!(system_from_file(&back).unwrap().dim(), 2);
    }

    #[test]
    fn non_hermitian_system_rejected() {
        let f = SystemFile {
            ambient_dim: 2,
            basis: vec![vec![vec![[1.0, 0.0], [1.0, 0.0]], vec![[0.0, 0.0], [1.0, 0.0]]]],
        };
        assert!(system_from_file(&f).is_err());
    }
}
