//! Metric graph model: unit edges with ±1 weights, piecewise-constant
//! potentials and co-normal vertex conditions.
//!
//! Every vertex condition is held in co-normal form: Dirichlet-like
//! constraint rows acting on the values at the incident endpoints, plus an
//! endpoint function `f` that generates the remaining (natural) conditions
//! through the boundary term of the form.

mod potential;
mod spec;

use std::collections::{BTreeMap, HashMap, HashSet};

use serde::Serialize;

pub use potential::PiecewisePotential;
pub use spec::{ConditionSpec, EdgeSpec, GraphSpec, PotentialSpec, VertexSpec};

use crate::error::{Error, Result};
use crate::linalg::{Matrix, RowEchelon};
use crate::scalar::Real;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum WeightSign {
    Positive,
    Negative,
}

impl WeightSign {
    pub fn value<T: Real>(self) -> T {
        match self {
            WeightSign::Positive => T::one(),
            WeightSign::Negative => -T::one(),
        }
    }

    pub fn flipped(self) -> Self {
        match self {
            WeightSign::Positive => WeightSign::Negative,
            WeightSign::Negative => WeightSign::Positive,
        }
    }

    pub fn is_positive(self) -> bool {
        self == WeightSign::Positive
    }
}

/// Which end of a unit edge: `Start` is `x = 0`, `Terminal` is `x = 1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum End {
    Start,
    Terminal,
}

impl End {
    /// Sign carried by the boundary measure: −1 at `x = 0`, +1 at `x = 1`.
    pub fn sign<T: Real>(self) -> T {
        match self {
            End::Start => -T::one(),
            End::Terminal => T::one(),
        }
    }

    pub fn index(self) -> usize {
        match self {
            End::Start => 0,
            End::Terminal => 1,
        }
    }

    pub fn opposite(self) -> Self {
        match self {
            End::Start => End::Terminal,
            End::Terminal => End::Start,
        }
    }
}

/// An edge endpoint, addressed by edge position in the graph.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct EndpointRef {
    pub edge: usize,
    pub end: End,
}

impl EndpointRef {
    pub fn new(edge: usize, end: End) -> Self {
        Self { edge, end }
    }

    /// Position among the `2K` endpoints: `2·edge + end`.
    pub fn flat(self) -> usize {
        2 * self.edge + self.end.index()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Edge<T> {
    pub id: String,
    pub start: String,
    pub end: String,
    pub weight: WeightSign,
    pub potential: PiecewisePotential<T>,
    /// Number of uniform subintervals used by the finite-element mesh.
    pub mesh: usize,
}

impl<T: Real> Edge<T> {
    pub fn new(id: &str, start: &str, end: &str, weight: WeightSign, potential: PiecewisePotential<T>, mesh: usize) -> Self {
        Self {
            id: id.to_string(),
            start: start.to_string(),
            end: end.to_string(),
            weight,
            potential,
            mesh,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum VertexCondition<T> {
    /// Every incident endpoint value vanishes.
    Dirichlet,
    /// Continuity across incident endpoints and `f ≡ 0`.
    Kirchhoff,
    /// No constraint rows; natural condition with the given `f`
    /// (missing endpoints default to 0).
    Robin { f: BTreeMap<EndpointRef, T> },
    /// Explicit constraint rows over incident endpoint values, columns in
    /// incident order (see [`MetricGraph::incident`]), plus `f`.
    Custom {
        rows: Vec<Vec<T>>,
        f: BTreeMap<EndpointRef, T>,
    },
}

impl<T: Real> VertexCondition<T> {
    pub fn kind(&self) -> &'static str {
        match self {
            VertexCondition::Dirichlet => "dirichlet",
            VertexCondition::Kirchhoff => "kirchhoff",
            VertexCondition::Robin { .. } => "robin",
            VertexCondition::Custom { .. } => "custom",
        }
    }

    /// Constraint rows for a vertex of the given degree.
    pub fn constraint_rows(&self, degree: usize) -> Vec<Vec<T>> {
        match self {
            VertexCondition::Dirichlet => (0..degree)
                .map(|i| (0..degree).map(|j| if i == j { T::one() } else { T::zero() }).collect())
                .collect(),
            VertexCondition::Kirchhoff => (1..degree)
                .map(|k| {
                    (0..degree)
                        .map(|j| {
                            if j == 0 {
                                T::one()
                            } else if j == k {
                                -T::one()
                            } else {
                                T::zero()
                            }
                        })
                        .collect()
                })
                .collect(),
            VertexCondition::Robin { .. } => Vec::new(),
            VertexCondition::Custom { rows, .. } => rows.clone(),
        }
    }

    /// The endpoint function `f` at `p` (zero when not given).
    pub fn f_at(&self, p: EndpointRef) -> T {
        match self {
            VertexCondition::Robin { f } | VertexCondition::Custom { f, .. } => {
                f.get(&p).copied().unwrap_or_else(T::zero)
            }
            _ => T::zero(),
        }
    }

    fn f_map(&self) -> Option<&BTreeMap<EndpointRef, T>> {
        match self {
            VertexCondition::Robin { f } | VertexCondition::Custom { f, .. } => Some(f),
            _ => None,
        }
    }

    fn f_map_mut(&mut self) -> Option<&mut BTreeMap<EndpointRef, T>> {
        match self {
            VertexCondition::Robin { f } | VertexCondition::Custom { f, .. } => Some(f),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Vertex<T> {
    pub id: String,
    pub condition: VertexCondition<T>,
}

impl<T: Real> Vertex<T> {
    pub fn new(id: &str, condition: VertexCondition<T>) -> Self {
        Self {
            id: id.to_string(),
            condition,
        }
    }
}

/// Finite metric graph with unit edges.
///
/// Edges with positive weight form `G⁺`, the rest `G⁻`. Immutable once
/// built; the `with_*` methods return modified copies.
#[derive(Clone, Debug, PartialEq)]
pub struct MetricGraph<T> {
    edges: Vec<Edge<T>>,
    vertices: Vec<Vertex<T>>,
}

#[derive(Clone, Debug, Serialize)]
pub struct InvariantCheck {
    pub invariant: &'static str,
    pub passed: bool,
    pub details: Vec<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct VertexCount {
    pub vertex: String,
    pub degree: usize,
    pub constraint_rows: usize,
    pub natural_conditions: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct ValidationReport {
    pub checks: Vec<InvariantCheck>,
    /// `K`
    pub edge_count: usize,
    /// `n`
    pub positive_edges: usize,
    /// `J`, the number of Dirichlet-like constraint rows.
    pub constraint_rows: usize,
    pub natural_conditions: usize,
    pub vertices: Vec<VertexCount>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn violations(&self) -> Vec<String> {
        self.checks
            .iter()
            .filter(|c| !c.passed)
            .flat_map(|c| c.details.iter().map(move |d| format!("{}: {d}", c.invariant)))
            .collect()
    }

    pub fn vertex(&self, id: &str) -> Option<&VertexCount> {
        self.vertices.iter().find(|v| v.vertex == id)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EndpointEntry {
    pub endpoint: EndpointRef,
    pub edge_id: String,
    /// Global nodal index in the unconstrained edge-wise numbering.
    pub dof: usize,
    pub sign: i8,
}

/// The `2K` edge endpoints with their unconstrained dof and `dσ` sign.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EndpointMap {
    pub entries: Vec<EndpointEntry>,
}

impl EndpointMap {
    pub fn get(&self, p: EndpointRef) -> &EndpointEntry {
        &self.entries[p.flat()]
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// `∫∂G y dσ` for nodal values `y` in unconstrained numbering.
    pub fn boundary_integral<T: Real>(&self, y: &[T]) -> T {
        self.entries
            .iter()
            .map(|e| T::from_i8(e.sign).unwrap() * y[e.dof])
            .sum()
    }
}

impl<T: Real> MetricGraph<T> {
    /// Builds and validates.
    pub fn new(edges: Vec<Edge<T>>, vertices: Vec<Vertex<T>>) -> Result<Self> {
        let g = Self::from_parts(edges, vertices);
        g.ensure_valid()?;
        Ok(g)
    }

    /// Builds without validation; see [`MetricGraph::validate`].
    pub fn from_parts(edges: Vec<Edge<T>>, vertices: Vec<Vertex<T>>) -> Self {
        Self { edges, vertices }
    }

    pub fn edges(&self) -> &[Edge<T>] {
        &self.edges
    }

    pub fn vertices(&self) -> &[Vertex<T>] {
        &self.vertices
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn positive_edge_count(&self) -> usize {
        self.edges.iter().filter(|e| e.weight.is_positive()).count()
    }

    /// Total length of `G⁺`; edges have unit length.
    pub fn positive_length(&self) -> T {
        T::from_usize_lossy(self.positive_edge_count())
    }

    pub fn edge_index(&self, id: &str) -> Option<usize> {
        self.edges.iter().position(|e| e.id == id)
    }

    pub fn vertex_index(&self, id: &str) -> Option<usize> {
        self.vertices.iter().position(|v| v.id == id)
    }

    /// Vertex at the given endpoint.
    pub fn vertex_at(&self, p: EndpointRef) -> &str {
        let e = &self.edges[p.edge];
        match p.end {
            End::Start => &e.start,
            End::Terminal => &e.end,
        }
    }

    /// Incident endpoints of a vertex in canonical order: by edge position,
    /// `Start` before `Terminal` for loops.
    pub fn incident(&self, vertex: &str) -> Vec<EndpointRef> {
        let mut out = Vec::new();
        for (i, e) in self.edges.iter().enumerate() {
            if e.start == vertex {
                out.push(EndpointRef::new(i, End::Start));
            }
            if e.end == vertex {
                out.push(EndpointRef::new(i, End::Terminal));
            }
        }
        out
    }

    /// Condition at the vertex carrying endpoint `p`.
    pub fn condition_at(&self, p: EndpointRef) -> Option<&VertexCondition<T>> {
        let vid = self.vertex_at(p);
        self.vertices.iter().find(|v| v.id == vid).map(|v| &v.condition)
    }

    /// Form-convention `f` at endpoint `p`.
    pub fn endpoint_f(&self, p: EndpointRef) -> T {
        self.condition_at(p).map_or_else(T::zero, |c| c.f_at(p))
    }

    /// All Dirichlet-like rows stacked into a `J × 2K` matrix over endpoint
    /// values (columns indexed by [`EndpointRef::flat`]).
    pub fn constraint_matrix(&self) -> Matrix<T> {
        let k2 = 2 * self.edges.len();
        let mut rows: Vec<Vec<T>> = Vec::new();
        for v in &self.vertices {
            let inc = self.incident(&v.id);
            for local in v.condition.constraint_rows(inc.len()) {
                let mut row = vec![T::zero(); k2];
                for (c, p) in local.iter().zip(&inc) {
                    row[p.flat()] += *c;
                }
                rows.push(row);
            }
        }
        if rows.is_empty() {
            Matrix::zeros(0, k2)
        } else {
            Matrix::from_rows(&rows)
        }
    }

    pub fn validate(&self) -> ValidationReport {
        let mut checks = Vec::new();
        let k = self.edges.len();
        let mut push = |invariant: &'static str, details: Vec<String>| {
            checks.push(InvariantCheck {
                invariant,
                passed: details.is_empty(),
                details,
            });
        };

        push(
            "edge count K >= 1",
            if k == 0 { vec!["graph has no edges".into()] } else { vec![] },
        );

        let mut dup = Vec::new();
        let mut seen = HashSet::new();
        for e in &self.edges {
            if !seen.insert(e.id.as_str()) {
                dup.push(format!("duplicate edge id {}", e.id));
            }
        }
        let mut seen = HashSet::new();
        for v in &self.vertices {
            if !seen.insert(v.id.as_str()) {
                dup.push(format!("vertex {} declared more than once", v.id));
            }
        }
        push("unique ids, one condition per vertex", dup);

        let declared: HashSet<&str> = self.vertices.iter().map(|v| v.id.as_str()).collect();
        let mut missing = Vec::new();
        for e in &self.edges {
            for vid in [&e.start, &e.end] {
                if !declared.contains(vid.as_str()) {
                    missing.push(format!("edge {} references undeclared vertex {vid}", e.id));
                }
            }
        }
        push("edge vertices declared", missing);

        push(
            "mesh_count >= 2",
            self.edges
                .iter()
                .filter(|e| e.mesh < 2)
                .map(|e| format!("edge {} has mesh_count {}", e.id, e.mesh))
                .collect(),
        );

        push(
            "potential well-formed",
            self.edges
                .iter()
                .flat_map(|e| {
                    PiecewisePotential::check(e.potential.breakpoints(), e.potential.values())
                        .into_iter()
                        .map(move |p| format!("edge {}: {p}", e.id))
                })
                .collect(),
        );

        let mut isolated = Vec::new();
        let mut count_problems = Vec::new();
        let mut rank_problems = Vec::new();
        let mut f_problems = Vec::new();
        let mut counts = Vec::new();
        let mut total_rows = 0usize;
        let mut total_natural = 0usize;
        for v in &self.vertices {
            let inc = self.incident(&v.id);
            let degree = inc.len();
            if degree == 0 {
                isolated.push(format!("vertex {} has no incident edges", v.id));
            }
            let rows = v.condition.constraint_rows(degree);
            if rows.len() > degree {
                count_problems.push(format!(
                    "condition count exceeds degree at vertex {} ({} rows, degree {degree})",
                    v.id,
                    rows.len()
                ));
            }
            if let Some(bad) = rows.iter().find(|r| r.len() != degree) {
                count_problems.push(format!(
                    "constraint row at vertex {} has {} entries, degree {degree}",
                    v.id,
                    bad.len()
                ));
            } else if !rows.is_empty() && rows.len() <= degree {
                if rows.iter().flatten().any(|x| !x.is_finite()) {
                    rank_problems.push(format!("non-finite constraint entry at vertex {}", v.id));
                } else if RowEchelon::new(&Matrix::from_rows(&rows)).rank() < rows.len() {
                    rank_problems.push(format!("constraints not independent at vertex {}", v.id));
                }
            }
            if let Some(f) = v.condition.f_map() {
                for (p, val) in f {
                    if !inc.contains(p) {
                        f_problems.push(format!(
                            "f at vertex {} names endpoint {}:{} that is not incident",
                            v.id,
                            self.edges.get(p.edge).map_or("?", |e| e.id.as_str()),
                            p.end.index()
                        ));
                    }
                    if !val.is_finite() {
                        f_problems.push(format!("non-finite f at vertex {}", v.id));
                    }
                }
            }
            let r = rows.len().min(degree);
            total_rows += r;
            total_natural += degree - r;
            counts.push(VertexCount {
                vertex: v.id.clone(),
                degree,
                constraint_rows: r,
                natural_conditions: degree - r,
            });
        }
        push("vertex has incident edges", isolated);
        push("condition count equals degree", count_problems);
        push("constraint rows have full row rank", rank_problems);
        push("f defined on incident endpoints", f_problems);
        push(
            "J <= 2K",
            if total_rows > 2 * k {
                vec![format!("J = {total_rows} exceeds 2K = {}", 2 * k)]
            } else {
                vec![]
            },
        );

        ValidationReport {
            checks,
            edge_count: k,
            positive_edges: self.positive_edge_count(),
            constraint_rows: total_rows,
            natural_conditions: total_natural,
            vertices: counts,
        }
    }

    pub fn ensure_valid(&self) -> Result<()> {
        let report = self.validate();
        if report.is_valid() {
            Ok(())
        } else {
            Err(Error::InvalidGraph(report.violations()))
        }
    }

    /// Endpoint-to-dof map in the unconstrained edge-wise numbering, where
    /// edge `i` owns nodes `offset_i ..= offset_i + mesh_i`.
    pub fn endpoint_map(&self) -> EndpointMap {
        let mut entries = Vec::with_capacity(2 * self.edges.len());
        let mut offset = 0;
        for (i, e) in self.edges.iter().enumerate() {
            for end in [End::Start, End::Terminal] {
                entries.push(EndpointEntry {
                    endpoint: EndpointRef::new(i, end),
                    edge_id: e.id.clone(),
                    dof: offset + if end == End::Start { 0 } else { e.mesh },
                    sign: if end == End::Start { -1 } else { 1 },
                });
            }
            offset += e.mesh + 1;
        }
        EndpointMap { entries }
    }

    pub fn with_mesh(&self, mesh: usize) -> Self {
        let mut g = self.clone();
        for e in &mut g.edges {
            e.mesh = mesh;
        }
        g
    }

    pub fn with_mesh_scaled(&self, factor: usize) -> Self {
        let mut g = self.clone();
        for e in &mut g.edges {
            e.mesh *= factor;
        }
        g
    }

    /// Same graph with every weight negated.
    pub fn with_weights_negated(&self) -> Self {
        let mut g = self.clone();
        for e in &mut g.edges {
            e.weight = e.weight.flipped();
        }
        g
    }

    /// Adds a constant to every potential.
    pub fn with_potential_shift(&self, c: T) -> Self {
        let mut g = self.clone();
        for e in &mut g.edges {
            e.potential = e.potential.shifted(c);
        }
        g
    }

    /// Reverses edge `index` and carries its endpoint data along: `f`
    /// changes sign with the boundary measure, loop columns are swapped.
    pub fn with_edge_reversed(&self, index: usize) -> Self {
        let mut g = self.clone();
        let e = &mut g.edges[index];
        std::mem::swap(&mut e.start, &mut e.end);
        e.potential = e.potential.reversed();
        let is_loop = e.start == e.end;
        for v in &mut g.vertices {
            if let Some(f) = v.condition.f_map_mut() {
                let moved: Vec<(EndpointRef, T)> = f
                    .iter()
                    .filter(|(p, _)| p.edge == index)
                    .map(|(p, &val)| (*p, val))
                    .collect();
                for (p, _) in &moved {
                    f.remove(p);
                }
                for (p, val) in moved {
                    f.insert(EndpointRef::new(index, p.end.opposite()), -val);
                }
            }
        }
        if is_loop {
            let vid = g.edges[index].start.clone();
            let inc = g.incident(&vid);
            let cols: Vec<usize> = inc
                .iter()
                .enumerate()
                .filter(|(_, p)| p.edge == index)
                .map(|(c, _)| c)
                .collect();
            if let Some(v) = g.vertices.iter_mut().find(|v| v.id == vid) {
                if let VertexCondition::Custom { rows, .. } = &mut v.condition {
                    for row in rows.iter_mut() {
                        row.swap(cols[0], cols[1]);
                    }
                }
            }
        }
        g
    }

    /// Map from edge id to position.
    pub fn edge_positions(&self) -> HashMap<&str, usize> {
        self.edges.iter().enumerate().map(|(i, e)| (e.id.as_str(), i)).collect()
    }

    /// Converts to another scalar type.
    pub fn cast<U: Real>(&self) -> MetricGraph<U> {
        let c = |x: T| U::lit(x.to_f64_lossy());
        let cast_f = |f: &BTreeMap<EndpointRef, T>| f.iter().map(|(p, &v)| (*p, c(v))).collect();
        MetricGraph {
            edges: self
                .edges
                .iter()
                .map(|e| Edge {
                    id: e.id.clone(),
                    start: e.start.clone(),
                    end: e.end.clone(),
                    weight: e.weight,
                    potential: PiecewisePotential::new(
                        e.potential.breakpoints().iter().map(|&b| c(b)).collect(),
                        e.potential.values().iter().map(|&v| c(v)).collect(),
                    )
                    .expect("cast preserves potential shape"),
                    mesh: e.mesh,
                })
                .collect(),
            vertices: self
                .vertices
                .iter()
                .map(|v| Vertex {
                    id: v.id.clone(),
                    condition: match &v.condition {
                        VertexCondition::Dirichlet => VertexCondition::Dirichlet,
                        VertexCondition::Kirchhoff => VertexCondition::Kirchhoff,
                        VertexCondition::Robin { f } => VertexCondition::Robin { f: cast_f(f) },
                        VertexCondition::Custom { rows, f } => VertexCondition::Custom {
                            rows: rows.iter().map(|r| r.iter().map(|&x| c(x)).collect()).collect(),
                            f: cast_f(f),
                        },
                    },
                })
                .collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dirichlet_edge(mesh: usize) -> MetricGraph<f64> {
        MetricGraph::new(
            vec![Edge::new("e1", "a", "b", WeightSign::Positive, PiecewisePotential::zero(), mesh)],
            vec![
                Vertex::new("a", VertexCondition::Dirichlet),
                Vertex::new("b", VertexCondition::Dirichlet),
            ],
        )
        .unwrap()
    }

    fn pm_path() -> MetricGraph<f64> {
        MetricGraph::new(
            vec![
                Edge::new("e1", "a", "c", WeightSign::Positive, PiecewisePotential::zero(), 4),
                Edge::new("e2", "c", "b", WeightSign::Negative, PiecewisePotential::zero(), 4),
            ],
            vec![
                Vertex::new("a", VertexCondition::Dirichlet),
                Vertex::new("c", VertexCondition::Kirchhoff),
                Vertex::new("b", VertexCondition::Dirichlet),
            ],
        )
        .unwrap()
    }

    #[test]
    fn single_dirichlet_edge_counts() {
        let r = dirichlet_edge(4).validate();
        assert!(r.is_valid());
        assert_eq!((r.constraint_rows, r.edge_count, r.positive_edges), (2, 1, 1));
    }

    #[test]
    fn kirchhoff_center_counts() {
        let r = pm_path().validate();
        assert!(r.is_valid());
        let c = r.vertex("c").unwrap();
        assert_eq!((c.degree, c.constraint_rows, c.natural_conditions), (2, 1, 1));
        assert_eq!(r.constraint_rows + r.natural_conditions, 4);
    }

    #[test]
    fn too_many_custom_rows() {
        let g = MetricGraph::from_parts(
            vec![
                Edge::new("e1", "a", "c", WeightSign::Positive, PiecewisePotential::zero(), 4),
                Edge::new("e2", "c", "b", WeightSign::Positive, PiecewisePotential::zero(), 4),
            ],
            vec![
                Vertex::new("a", VertexCondition::Dirichlet),
                Vertex::new(
                    "c",
                    VertexCondition::Custom {
                        rows: vec![vec![1.0, 0.0], vec![0.0, 1.0], vec![1.0, 1.0]],
                        f: BTreeMap::new(),
                    },
                ),
                Vertex::new("b", VertexCondition::Dirichlet),
            ],
        );
        let r = g.validate();
        assert!(!r.is_valid());
        assert!(r.violations().iter().any(|v| v.contains("condition count exceeds degree")));
    }

    #[test]
    fn reports_every_violation() {
        let g: MetricGraph<f64> = MetricGraph::from_parts(
            vec![
                Edge::new("e1", "a", "zz", WeightSign::Positive, PiecewisePotential::zero(), 1),
                Edge::new("e1", "a", "a", WeightSign::Positive, PiecewisePotential::zero(), 3),
            ],
            vec![
                Vertex::new("a", VertexCondition::Custom { rows: vec![vec![1.0, -1.0, 0.0], vec![-2.0, 2.0, 0.0]], f: BTreeMap::new() }),
                Vertex::new("lonely", VertexCondition::Dirichlet),
            ],
        );
        let v = g.validate().violations();
        for needle in ["duplicate edge id", "undeclared vertex zz", "mesh_count 1", "no incident edges", "not independent"] {
            assert!(v.iter().any(|s| s.contains(needle)), "missing {needle} in {v:?}");
        }
    }

    #[test]
    fn endpoint_map_signs_and_dofs() {
        let m = dirichlet_edge(4).endpoint_map();
        assert_eq!(m.len(), 2);
        assert_eq!((m.entries[0].dof, m.entries[0].sign), (0, -1));
        assert_eq!((m.entries[1].dof, m.entries[1].sign), (4, 1));
        let m = pm_path().endpoint_map();
        assert_eq!(m.len(), 4);
        // The shared vertex keeps two distinct dofs.
        assert_ne!(m.entries[1].dof, m.entries[2].dof);
        // ∫∂G y dσ = Σ y(1) − y(0) = ∫ y'.
        let y: Vec<f64> = (0..10).map(|i| i as f64).collect();
        assert_eq!(m.boundary_integral(&y), (4.0 - 0.0) + (9.0 - 5.0));
    }

    #[test]
    fn constraint_matrix_shape() {
        let c = pm_path().constraint_matrix();
        assert_eq!((c.rows(), c.cols()), (3, 4));
    }

    #[test]
    fn reversal_moves_f_with_sign() {
        let mut f = BTreeMap::new();
        f.insert(EndpointRef::new(0, End::Terminal), 2.0);
        let g = MetricGraph::new(
            vec![Edge::new("e1", "a", "b", WeightSign::Positive, PiecewisePotential::zero(), 4)],
            vec![
                Vertex::new("a", VertexCondition::Dirichlet),
                Vertex::new("b", VertexCondition::Robin { f }),
            ],
        )
        .unwrap();
        let r = g.with_edge_reversed(0);
        assert_eq!(r.edges()[0].start, "b");
        assert_eq!(r.endpoint_f(EndpointRef::new(0, End::Start)), -2.0);
        assert!(r.validate().is_valid());
    }
}
