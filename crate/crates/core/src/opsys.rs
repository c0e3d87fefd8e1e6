//! Concrete operator systems and kernels inside `Mₙ`, and the graphs that
//! generate them.
//!
//! Every subspace is stored by an orthonormal Hermitian basis under
//! `⟨A, B⟩ = tr(AB)`. Membership, complements and inclusions are all
//! computed through orthogonal projection in [`hvec`] coordinates.

use std::collections::BTreeSet;
use std::fmt;

use itertools::Itertools;
use nalgebra::{DMatrix, DVector};
use rand::Rng;

use crate::error::{Error, Result};
use crate::herm::{
    gram_schmidt, hunvec, hvec, kron, orthonormalize_in, standard_basis_element, HermitianBasis,
    HermitianMatrix,
};

/// Projection residual below which a matrix counts as lying in a subspace.
pub const MEMBERSHIP_TOL: f64 = 1e-9;

/// Simple undirected graph on vertices `0..n`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Graph {
    n: usize,
    edges: BTreeSet<(usize, usize)>,
}

impl fmt::Debug for Graph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Graph(n={}, edges={:?})", self.n, self.edges)
    }
}

impl Graph {
    /// Duplicate and reversed edges are merged; self-loops and out-of-range
    /// vertices are rejected.
    pub fn new(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut set = BTreeSet::new();
        for (a, b) in edges {
            if a == b {
                return Err(Error::InvalidInput(format!("self-loop at vertex {a}")));
            }
            if a >= n || b >= n {
                return Err(Error::InvalidInput(format!(
                    "edge ({a}, {b}) out of range for {n} vertices"
                )));
            }
            set.insert((a.min(b), a.max(b)));
        }
        Ok(Self { n, edges: set })
    }

    pub fn edgeless(n: usize) -> Self {
        Self {
            n,
            edges: BTreeSet::new(),
        }
    }

    pub fn complete(n: usize) -> Self {
        Self {
            n,
            edges: (0..n).flat_map(|i| ((i + 1)..n).map(move |j| (i, j))).collect(),
        }
    }

    pub fn path(n: usize) -> Self {
        Self::new(n, (1..n).map(|i| (i - 1, i))).expect("valid path")
    }

    pub fn cycle(n: usize) -> Self {
        assert!(n >= 3, "cycle needs at least 3 vertices");
        Self::new(n, (0..n).map(|i| (i, (i + 1) % n))).expect("valid cycle")
    }

    /// Outer 5-cycle `0..5`, inner pentagram `5..10`, spokes `i ~ i+5`.
    pub fn petersen() -> Self {
        let outer = (0..5).map(|i| (i, (i + 1) % 5));
        let inner = (0..5).map(|i| (5 + i, 5 + (i + 2) % 5));
        let spokes = (0..5).map(|i| (i, i + 5));
        Self::new(10, outer.chain(inner).chain(spokes)).expect("valid Petersen graph")
    }

    /// Subgraph induced on `vertices`, relabelled in the given order.
    pub fn induced(&self, vertices: &[usize]) -> Result<Self> {
        let pos = |v: usize| vertices.iter().position(|&w| w == v);
        let edges = self
            .edges
            .iter()
            .filter_map(|&(a, b)| Some((pos(a)?, pos(b)?)));
        Self::new(vertices.len(), edges)
    }

    pub fn vertex_count(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Edges `(i, j)` with `i < j`, sorted.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.edges.iter().copied()
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.edges.contains(&(i.min(j), i.max(j)))
    }

    /// `i ∼ j`: equal or joined by an edge.
    pub fn adjacent(&self, i: usize, j: usize) -> bool {
        i == j || self.has_edge(i, j)
    }

    pub fn complement(&self) -> Self {
        let n = self.n;
        Self {
            n,
            edges: (0..n)
                .flat_map(|i| ((i + 1)..n).map(move |j| (i, j)))
                .filter(|&(i, j)| !self.has_edge(i, j))
                .collect(),
        }
    }

    pub fn is_subgraph_of(&self, other: &Self) -> bool {
        self.n == other.n && self.edges.is_subset(&other.edges)
    }

    /// Lexicographically least relabelling, so isomorphic graphs compare equal.
    /// Tries all `n!` orders; intended for `n ≤ 8`.
    pub fn canonical_form(&self) -> Self {
        let n = self.n;
        let mut best: Option<Vec<(usize, usize)>> = None;
        for perm in (0..n).permutations(n) {
            let mut e: Vec<_> = self
                .edges
                .iter()
                .map(|&(a, b)| (perm[a].min(perm[b]), perm[a].max(perm[b])))
                .collect();
            e.sort_unstable();
            if best.as_ref().is_none_or(|b| e < *b) {
                best = Some(e);
            }
        }
        Self::new(n, best.unwrap_or_default()).expect("relabelling keeps validity")
    }

    /// One representative per isomorphism class of graphs with
    /// `1 ≤ n ≤ max_n` vertices and at most `max_edges` edges.
    pub fn small_graphs(max_n: usize, max_edges: usize) -> Vec<Self> {
        let mut out = Vec::new();
        for n in 1..=max_n {
            let pairs: Vec<_> = (0..n).tuple_combinations::<(usize, usize)>().collect();
            let mut seen = BTreeSet::new();
            for k in 0..=max_edges.min(pairs.len()) {
                for chosen in pairs.iter().copied().combinations(k) {
                    let g = Self::new(n, chosen).expect("valid pairs").canonical_form();
                    if seen.insert(g.edges.clone()) {
                        out.push(g);
                    }
                }
            }
        }
        out
    }

    /// Induced subgraphs of `self` on `min_n..=max_n` vertices, up to isomorphism.
    pub fn induced_subgraphs(&self, min_n: usize, max_n: usize) -> Vec<Self> {
        let mut seen = BTreeSet::new();
        let mut out = Vec::new();
        for k in min_n..=max_n.min(self.n) {
            for vs in (0..self.n).combinations(k) {
                let g = self.induced(&vs).expect("vertices in range").canonical_form();
                if seen.insert((k, g.edges.clone())) {
                    out.push(g);
                }
            }
        }
        out
    }

    /// 0/1 adjacency matrix without diagonal.
    pub fn adjacency_matrix(&self) -> HermitianMatrix {
        let a = DMatrix::from_fn(self.n, self.n, |i, j| if self.has_edge(i, j) { 1.0 } else { 0.0 });
        HermitianMatrix::from_real(&a).expect("symmetric")
    }
}

/// Systems attached to a graph.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GraphSystemKind {
    /// Matrices supported on `i ∼ j`.
    SGamma,
    /// Constant-diagonal matrices supported on `i ∼ j`.
    EGamma,
    /// Constant-diagonal matrices.
    En,
    /// Diagonal matrices.
    Dn,
}

/// Position of `(E_ij + E_ji)/√2` in [`standard_basis_element`] order; the
/// imaginary partner follows at the next index.
fn offdiag_index(n: usize, i: usize, j: usize) -> usize {
    let (i, j) = (i.min(j), i.max(j));
    // pairs (a, b) with a < i, plus offset within row i
    let before = i * n - i * (i + 1) / 2;
    n + 2 * (before + (j - i - 1))
}

fn offdiag_pair(n: usize, i: usize, j: usize) -> [HermitianMatrix; 2] {
    let k = offdiag_index(n, i, j);
    [standard_basis_element(n, k), standard_basis_element(n, k + 1)]
}

/// Orthonormal basis elements shared by systems and kernels.
#[derive(Clone, Debug)]
struct Span {
    basis: HermitianBasis,
    /// hvec coordinates of the basis, one column per element.
    coords: DMatrix<f64>,
}

impl Span {
    fn new(basis: HermitianBasis) -> Self {
        let coords = basis.coordinate_matrix();
        Self { basis, coords }
    }

    fn from_spanning(n: usize, spanning: &[HermitianMatrix]) -> Result<Self> {
        Ok(Self::new(orthonormalize_in(n, spanning)?))
    }

    fn dim(&self) -> usize {
        self.basis.len()
    }

    fn ambient(&self) -> usize {
        self.basis.ambient_dim()
    }

    fn project_coords(&self, x: &HermitianMatrix) -> DVector<f64> {
        let v = hvec(x);
        &self.coords * (self.coords.transpose() * &v)
    }

    fn residual(&self, x: &HermitianMatrix) -> f64 {
        (hvec(x) - self.project_coords(x)).norm()
    }

    fn complement(&self) -> HermitianBasis {
        let n = self.ambient();
        let d = n * n;
        let mut vecs: Vec<DVector<f64>> = self.coords.column_iter().map(|c| c.into_owned()).collect();
        let k = vecs.len();
        vecs.extend((0..d).map(|i| {
            let mut e = DVector::zeros(d);
            e[i] = 1.0;
            e
        }));
        let q = gram_schmidt(&vecs);
        HermitianBasis::from_orthonormal(n, q[k..].iter().map(|v| hunvec(v, n)).collect())
    }
}

/// A unital ∗-closed subspace `S ⊆ Mₙ`.
#[derive(Clone, Debug)]
pub struct MatricialSystem {
    span: Span,
}

/// A ∗-closed subspace of `Mₙ` not containing the identity.
#[derive(Clone, Debug)]
pub struct KernelSpace {
    span: Span,
}

fn unit_residual(span: &Span) -> f64 {
    span.residual(&HermitianMatrix::identity(span.ambient()))
}

impl MatricialSystem {
    /// Span of `spanning`, which must contain `Iₙ`.
    pub fn new(n: usize, spanning: &[HermitianMatrix]) -> Result<Self> {
        Self::from_span(Span::from_spanning(n, spanning)?)
    }

    /// Span of `Iₙ` together with `generators`.
    pub fn generated_by(n: usize, generators: &[HermitianMatrix]) -> Result<Self> {
        let mut all = vec![HermitianMatrix::identity(n)];
        all.extend_from_slice(generators);
        Self::new(n, &all)
    }

    fn from_span(span: Span) -> Result<Self> {
        if unit_residual(&span) > MEMBERSHIP_TOL {
            return Err(Error::NotUnital);
        }
        Ok(Self { span })
    }

    fn from_orthonormal(n: usize, elements: Vec<HermitianMatrix>) -> Self {
        Self {
            span: Span::new(HermitianBasis::from_orthonormal(n, elements)),
        }
    }

    /// `Mₙ`.
    pub fn full(n: usize) -> Self {
        Self::from_orthonormal(n, (0..n * n).map(|k| standard_basis_element(n, k)).collect())
    }

    /// `ℂIₙ`.
    pub fn scalars(n: usize) -> Self {
        Self::from_orthonormal(n, vec![HermitianMatrix::identity(n).scale(1.0 / (n as f64).sqrt())])
    }

    /// Diagonal matrices `Dₙ`.
    pub fn diagonal(n: usize) -> Self {
        Self::from_graph(&Graph::edgeless(n), GraphSystemKind::Dn)
    }

    pub fn from_graph(g: &Graph, kind: GraphSystemKind) -> Self {
        let n = g.vertex_count();
        let unit = || HermitianMatrix::identity(n).scale(1.0 / (n as f64).sqrt());
        let pairs = |keep: &dyn Fn(usize, usize) -> bool| -> Vec<HermitianMatrix> {
            (0..n)
                .flat_map(|i| ((i + 1)..n).map(move |j| (i, j)))
                .filter(|&(i, j)| keep(i, j))
                .flat_map(|(i, j)| offdiag_pair(n, i, j))
                .collect()
        };
        let elements = match kind {
            GraphSystemKind::SGamma => {
                let mut e: Vec<_> = (0..n).map(|k| standard_basis_element(n, k)).collect();
                e.extend(pairs(&|i, j| g.has_edge(i, j)));
                e
            }
            GraphSystemKind::EGamma => {
                let mut e = vec![unit()];
                e.extend(pairs(&|i, j| g.has_edge(i, j)));
                e
            }
            GraphSystemKind::En => {
                let mut e = vec![unit()];
                e.extend(pairs(&|_, _| true));
                e
            }
            GraphSystemKind::Dn => (0..n).map(|k| standard_basis_element(n, k)).collect(),
        };
        Self::from_orthonormal(n, elements)
    }

    pub fn ambient_dim(&self) -> usize {
        self.span.ambient()
    }

    pub fn dim(&self) -> usize {
        self.span.dim()
    }

    pub fn basis(&self) -> &HermitianBasis {
        &self.span.basis
    }

    pub fn contains_unit(&self) -> bool {
        true
    }

    pub fn is_full(&self) -> bool {
        self.dim() == self.ambient_dim() * self.ambient_dim()
    }

    /// Orthogonal projection onto the system.
    pub fn project(&self, x: &HermitianMatrix) -> HermitianMatrix {
        hunvec(&self.span.project_coords(x), self.ambient_dim())
    }

    /// `‖X − proj(X)‖₂`.
    pub fn residual(&self, x: &HermitianMatrix) -> f64 {
        self.span.residual(x)
    }

    /// `‖X − proj(X)‖ ≤ tol·(1 + ‖X‖)`.
    pub fn contains(&self, x: &HermitianMatrix, tol: f64) -> Result<bool> {
        check_dim(self.ambient_dim(), x.dim())?;
        Ok(self.residual(x) <= tol * (1.0 + x.frobenius_norm()))
    }

    /// The orthogonal complement, which is trace-free and hence a kernel.
    pub fn perp(&self) -> KernelSpace {
        KernelSpace {
            span: Span::new(self.span.complement()),
        }
    }

    /// Largest projection residual of a basis element of `self` in `other`.
    pub fn inclusion_residual(&self, other: &Self) -> f64 {
        self.basis()
            .elements()
            .iter()
            .map(|b| other.residual(b))
            .fold(0.0, f64::max)
    }

    /// Errors unless `self ⊆ other` within [`MEMBERSHIP_TOL`].
    pub fn check_subsystem_of(&self, other: &Self) -> Result<()> {
        check_dim(other.ambient_dim(), self.ambient_dim())?;
        let residual = self.inclusion_residual(other);
        if residual > MEMBERSHIP_TOL {
            return Err(Error::NotContained { residual });
        }
        Ok(())
    }

    /// Equality as spans, within [`MEMBERSHIP_TOL`] in both directions.
    pub fn same_span(&self, other: &Self) -> bool {
        self.ambient_dim() == other.ambient_dim()
            && self.inclusion_residual(other) <= MEMBERSHIP_TOL
            && other.inclusion_residual(self) <= MEMBERSHIP_TOL
    }

    /// `span{s ⊗ t}` inside `M_{nk}`.
    pub fn tensor_min(&self, other: &Self) -> Self {
        let (n, k) = (self.ambient_dim(), other.ambient_dim());
        let elements = self
            .basis()
            .elements()
            .iter()
            .flat_map(|s| other.basis().elements().iter().map(move |t| kron(s, t)))
            .collect();
        Self::from_orthonormal(n * k, elements)
    }

    /// Block-diagonal direct sum `{s ⊕ t}` inside `M_{n+k}`.
    pub fn direct_sum(&self, other: &Self) -> Self {
        let (n, k) = (self.ambient_dim(), other.ambient_dim());
        let embed = |a: &HermitianMatrix, offset: usize| {
            let mut m = crate::herm::CMatrix::zeros(n + k, n + k);
            m.view_mut((offset, offset), (a.dim(), a.dim())).copy_from(a.as_matrix());
            HermitianMatrix::symmetrized(m)
        };
        let mut elements: Vec<_> = self.basis().elements().iter().map(|a| embed(a, 0)).collect();
        elements.extend(other.basis().elements().iter().map(|b| embed(b, n)));
        Self::from_orthonormal(n + k, elements)
    }
}

impl KernelSpace {
    /// Span of `spanning`, which must not contain `Iₙ`.
    pub fn new(n: usize, spanning: &[HermitianMatrix]) -> Result<Self> {
        let span = Span::from_spanning(n, spanning)?;
        if span.dim() > 0 && unit_residual(&span) <= MEMBERSHIP_TOL {
            return Err(Error::ContainsUnit);
        }
        Ok(Self { span })
    }

    pub fn zero(n: usize) -> Self {
        Self {
            span: Span::new(HermitianBasis::empty(n)),
        }
    }

    pub fn ambient_dim(&self) -> usize {
        self.span.ambient()
    }

    pub fn dim(&self) -> usize {
        self.span.dim()
    }

    pub fn basis(&self) -> &HermitianBasis {
        &self.span.basis
    }

    pub fn is_zero(&self) -> bool {
        self.dim() == 0
    }

    pub fn residual(&self, x: &HermitianMatrix) -> f64 {
        self.span.residual(x)
    }

    /// The orthogonal complement; errors unless it contains `Iₙ`.
    pub fn perp(&self) -> Result<MatricialSystem> {
        MatricialSystem::from_span(Span::new(self.span.complement()))
    }
}

fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::DimensionMismatch { expected, found });
    }
    Ok(())
}

/// `span{I, h₁, …, h_k}` for random Hermitian `hᵢ`.
pub fn random_unital_system(n: usize, extra: usize, rng: &mut impl Rng) -> MatricialSystem {
    let gens: Vec<_> = (0..extra).map(|_| crate::random::hermitian(n, rng)).collect();
    MatricialSystem::generated_by(n, &gens).expect("contains the unit")
}

/// `span{I, x₁, …, x_k}` with `xᵢ` random elements of `s`.
pub fn random_subsystem(s: &MatricialSystem, extra: usize, rng: &mut impl Rng) -> MatricialSystem {
    let n = s.ambient_dim();
    let gens: Vec<_> = (0..extra)
        .map(|_| {
            let coeffs = DVector::from_fn(s.dim(), |_, _| rng.sample::<f64, _>(rand_distr::StandardNormal));
            hunvec(&(s.span.coords.clone() * coeffs), n)
        })
        .collect();
    MatricialSystem::generated_by(n, &gens).expect("contains the unit")
}
