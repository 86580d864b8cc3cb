//! Piecewise-linear finite-element assembly of the form `F`, the signed
//! mass `(B·,·)` and the unsigned mass `(·,·)` on the constraint-reduced
//! space.
//!
//! Reduced coordinates are ordered edge by edge (interior nodes of every
//! edge, contiguous), followed by the boundary coordinates spanning the
//! nullspace of each vertex's constraint rows. Endpoint values are never
//! merged across edges; continuity lives in the nullspace basis.

use std::io::{self, Write};
use std::ops::Range;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::format::fmt_float;
use crate::graph::{Edge, End, EndpointMap, EndpointRef, MetricGraph, PiecewisePotential, WeightSign};
use crate::linalg::{Cholesky, Matrix, RowEchelon, SymmetricEigen};
use crate::scalar::Real;

/// Tridiagonal P1 element matrices of one edge, `m + 1` nodes.
#[derive(Clone, Debug, PartialEq)]
pub struct EdgeMatrices<T> {
    pub stiffness_diag: Vec<T>,
    pub stiffness_off: Vec<T>,
    pub mass_diag: Vec<T>,
    pub mass_off: Vec<T>,
}

impl<T: Real> EdgeMatrices<T> {
    /// `∫ y'φ' + q y φ` and `∫ y φ` with hat functions on a uniform mesh;
    /// `q` is integrated exactly piece by piece.
    pub fn new(potential: &PiecewisePotential<T>, mesh: usize) -> Self {
        assert!(mesh >= 1);
        let m = T::from_usize_lossy(mesh);
        let h = T::one() / m;
        let inv_h = m;
        let six = T::lit(6.0);
        let mut kd = vec![T::zero(); mesh + 1];
        let mut ko = vec![T::zero(); mesh];
        let mut md = vec![T::zero(); mesh + 1];
        let mut mo = vec![T::zero(); mesh];
        for k in 0..mesh {
            let xl = T::from_usize_lossy(k) / m;
            let xr = T::from_usize_lossy(k + 1) / m;
            kd[k] += inv_h;
            kd[k + 1] += inv_h;
            ko[k] -= inv_h;
            md[k] += T::lit(2.0) * h / six;
            md[k + 1] += T::lit(2.0) * h / six;
            mo[k] += h / six;

            // Potential term over the pieces overlapping this element.
            let phi_l = |x: T| (xr - x) / h;
            let phi_r = |x: T| (x - xl) / h;
            for (a, b, c) in potential.pieces() {
                if c == T::zero() {
                    continue;
                }
                let s = a.max(xl);
                let t = b.min(xr);
                if !(t > s) {
                    continue;
                }
                let mid = (s + t) * T::lit(0.5);
                // Simpson's rule is exact for the quadratic φᵢφⱼ.
                let simpson = |g: &dyn Fn(T) -> T| (t - s) / six * (g(s) + T::lit(4.0) * g(mid) + g(t));
                kd[k] += c * simpson(&|x| phi_l(x) * phi_l(x));
                kd[k + 1] += c * simpson(&|x| phi_r(x) * phi_r(x));
                ko[k] += c * simpson(&|x| phi_l(x) * phi_r(x));
            }
        }
        Self {
            stiffness_diag: kd,
            stiffness_off: ko,
            mass_diag: md,
            mass_off: mo,
        }
    }

    pub fn nodes(&self) -> usize {
        self.mass_diag.len()
    }

    fn mass_mul(&self, v: &[T], out: &mut [T]) {
        let n = self.nodes();
        for i in 0..n {
            let mut s = self.mass_diag[i] * v[i];
            if i > 0 {
                s += self.mass_off[i - 1] * v[i - 1];
            }
            if i + 1 < n {
                s += self.mass_off[i] * v[i + 1];
            }
            out[i] = s;
        }
    }
}

fn tridiag_dense<T: Real>(diag: &[T], off: &[T]) -> Matrix<T> {
    let n = diag.len();
    let mut m = Matrix::zeros(n, n);
    for i in 0..n {
        m[(i, i)] = diag[i];
        if i + 1 < n {
            m[(i, i + 1)] = off[i];
            m[(i + 1, i)] = off[i];
        }
    }
    m
}

/// Dense `(m+1)×(m+1)` stiffness (with potential) and mass of one edge.
pub fn assemble_edge<T: Real>(edge: &Edge<T>) -> (Matrix<T>, Matrix<T>) {
    let em = EdgeMatrices::new(&edge.potential, edge.mesh);
    (
        tridiag_dense(&em.stiffness_diag, &em.stiffness_off),
        tridiag_dense(&em.mass_diag, &em.mass_off),
    )
}

/// Symmetric matrix on reduced coordinates with the interior/boundary
/// block structure: one tridiagonal for all interior nodes (zero coupling
/// across edges), a dense interior-to-boundary coupling and a dense
/// boundary block.
#[derive(Clone, Debug, PartialEq)]
pub struct BlockSparse<T> {
    pub interior_diag: Vec<T>,
    /// `interior_off[i]` couples interior dofs `i` and `i + 1`.
    pub interior_off: Vec<T>,
    /// `interior × boundary`
    pub coupling: Matrix<T>,
    /// `boundary × boundary`
    pub boundary: Matrix<T>,
}

impl<T: Real> BlockSparse<T> {
    fn zeros(interior: usize, boundary: usize) -> Self {
        Self {
            interior_diag: vec![T::zero(); interior],
            interior_off: vec![T::zero(); interior.saturating_sub(1)],
            coupling: Matrix::zeros(interior, boundary),
            boundary: Matrix::zeros(boundary, boundary),
        }
    }

    pub fn interior_dim(&self) -> usize {
        self.interior_diag.len()
    }

    pub fn boundary_dim(&self) -> usize {
        self.boundary.rows()
    }

    pub fn dim(&self) -> usize {
        self.interior_dim() + self.boundary_dim()
    }

    /// `self + s·other` (same block pattern).
    pub fn combine(&self, s: T, other: &Self) -> Self {
        let lin = |a: &[T], b: &[T]| a.iter().zip(b).map(|(&x, &y)| x + s * y).collect();
        Self {
            interior_diag: lin(&self.interior_diag, &other.interior_diag),
            interior_off: lin(&self.interior_off, &other.interior_off),
            coupling: self.coupling.add(&other.coupling.scale(s)),
            boundary: self.boundary.add(&other.boundary.scale(s)),
        }
    }

    pub fn to_dense(&self) -> Matrix<T> {
        let ni = self.interior_dim();
        let n = self.dim();
        let mut m = Matrix::zeros(n, n);
        for i in 0..ni {
            m[(i, i)] = self.interior_diag[i];
            if i + 1 < ni {
                m[(i, i + 1)] = self.interior_off[i];
                m[(i + 1, i)] = self.interior_off[i];
            }
            for c in 0..self.boundary_dim() {
                let v = self.coupling[(i, c)];
                m[(i, ni + c)] = v;
                m[(ni + c, i)] = v;
            }
        }
        for a in 0..self.boundary_dim() {
            for b in 0..self.boundary_dim() {
                m[(ni + a, ni + b)] = self.boundary[(a, b)];
            }
        }
        m
    }
}

/// Reduced expression of one edge node.
enum NodeExpr<'a, T> {
    Interior(usize),
    Boundary(&'a [(usize, T)]),
}

fn add_entry<T: Real>(bs: &mut BlockSparse<T>, x: &NodeExpr<T>, y: &NodeExpr<T>, v: T, diagonal: bool) {
    if v == T::zero() {
        return;
    }
    match (x, y) {
        (NodeExpr::Interior(i), NodeExpr::Interior(k)) => {
            if diagonal {
                bs.interior_diag[*i] += v;
            } else {
                let lo = (*i).min(*k);
                debug_assert_eq!((*i).max(*k), lo + 1);
                bs.interior_off[lo] += v;
            }
        }
        (NodeExpr::Interior(i), NodeExpr::Boundary(list)) | (NodeExpr::Boundary(list), NodeExpr::Interior(i)) => {
            for &(c, coeff) in *list {
                bs.coupling[(*i, c)] += v * coeff;
            }
        }
        (NodeExpr::Boundary(la), NodeExpr::Boundary(lb)) => {
            for &(a, ca) in *la {
                for &(b, cb) in *lb {
                    bs.boundary[(a, b)] += v * ca * cb;
                    if !diagonal {
                        bs.boundary[(b, a)] += v * ca * cb;
                    }
                }
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EdgeLayout {
    pub id: String,
    pub weight: WeightSign,
    pub mesh: usize,
    /// Reduced indices of the interior nodes `1..mesh`.
    pub interior: Range<usize>,
    /// Unconstrained (edge-wise) indices of nodes `0..=mesh`.
    pub nodes: Range<usize>,
}

/// Coordinate bookkeeping between reduced and edge-wise representations.
#[derive(Clone, Debug, PartialEq)]
pub struct Layout<T> {
    pub edges: Vec<EdgeLayout>,
    /// `2K × r` nullspace basis of the constraint rows, block-diagonal by
    /// vertex, rows indexed by [`EndpointRef::flat`].
    pub endpoint_basis: Matrix<T>,
    pub boundary_offset: usize,
    pub dof_count: usize,
    pub full_dim: usize,
    pub endpoint_map: EndpointMap,
    /// `J × 2K` Dirichlet-like rows.
    pub constraint_rows: Matrix<T>,
    /// `σ·f` per endpoint (flat index).
    pub boundary_weights: Vec<T>,
    edge_matrices: Vec<EdgeMatrices<T>>,
}

impl<T: Real> Layout<T> {
    pub fn boundary_dim(&self) -> usize {
        self.dof_count - self.boundary_offset
    }

    pub fn edge_matrices(&self, e: usize) -> &EdgeMatrices<T> {
        &self.edge_matrices[e]
    }

    /// Nodal values on every edge (unconstrained numbering) of a reduced vector.
    pub fn embed(&self, u: &[T]) -> Vec<T> {
        assert_eq!(u.len(), self.dof_count);
        let mut out = vec![T::zero(); self.full_dim];
        let boundary = &u[self.boundary_offset..];
        for (e, el) in self.edges.iter().enumerate() {
            let nodes = &mut out[el.nodes.clone()];
            nodes[1..el.mesh].copy_from_slice(&u[el.interior.clone()]);
            for end in [End::Start, End::Terminal] {
                let p = EndpointRef::new(e, end).flat();
                let row = self.endpoint_basis.row(p);
                let val = row.iter().zip(boundary).map(|(&a, &b)| a * b).sum();
                let j = if end == End::Start { 0 } else { el.mesh };
                nodes[j] = val;
            }
        }
        out
    }

    /// Transpose of [`Layout::embed`].
    pub fn restrict(&self, w: &[T]) -> Vec<T> {
        assert_eq!(w.len(), self.full_dim);
        let mut out = vec![T::zero(); self.dof_count];
        for (e, el) in self.edges.iter().enumerate() {
            let nodes = &w[el.nodes.clone()];
            out[el.interior.clone()].copy_from_slice(&nodes[1..el.mesh]);
            for end in [End::Start, End::Terminal] {
                let p = EndpointRef::new(e, end).flat();
                let j = if end == End::Start { 0 } else { el.mesh };
                for c in 0..self.boundary_dim() {
                    out[self.boundary_offset + c] += self.endpoint_basis[(p, c)] * nodes[j];
                }
            }
        }
        out
    }

    /// Dense `full_dim × dof_count` embedding matrix (the constraint basis).
    pub fn constraint_basis(&self) -> Matrix<T> {
        let mut z = Matrix::zeros(self.full_dim, self.dof_count);
        let mut unit = vec![T::zero(); self.dof_count];
        for j in 0..self.dof_count {
            unit[j] = T::one();
            z.set_column(j, &self.embed(&unit));
            unit[j] = T::zero();
        }
        z
    }

    /// Block-diagonal unconstrained mass applied to an edge-wise vector.
    pub fn full_mass_mul(&self, v: &[T]) -> Vec<T> {
        let mut out = vec![T::zero(); self.full_dim];
        for (el, em) in self.edges.iter().zip(&self.edge_matrices) {
            em.mass_mul(&v[el.nodes.clone()], &mut out[el.nodes.clone()]);
        }
        out
    }

    pub fn full_mass_inner(&self, u: &[T], v: &[T]) -> T {
        crate::linalg::dot(u, &self.full_mass_mul(v))
    }

    /// Keeps the nodes of edges with the given weight, zeroes the rest.
    pub fn mask(&self, v: &[T], weight: WeightSign) -> Vec<T> {
        let mut out = v.to_vec();
        for el in &self.edges {
            if el.weight != weight {
                out[el.nodes.clone()].iter_mut().for_each(|x| *x = T::zero());
            }
        }
        out
    }

    /// Endpoint values (flat order) of an edge-wise vector.
    pub fn endpoint_values(&self, w: &[T]) -> Vec<T> {
        self.endpoint_map.entries.iter().map(|e| w[e.dof]).collect()
    }

    /// Edge-wise nodal values of edge `e`.
    pub fn edge_values<'a>(&self, w: &'a [T], e: usize) -> &'a [T] {
        &w[self.edges[e].nodes.clone()]
    }
}

/// Block-sparse discrete form, signed mass and unsigned mass.
#[derive(Clone, Debug, PartialEq)]
pub struct StructuredForm<T> {
    pub layout: Layout<T>,
    pub form: BlockSparse<T>,
    pub signed_mass: BlockSparse<T>,
    pub unsigned_mass: BlockSparse<T>,
}

/// The discrete variational objects as dense matrices.
#[derive(Clone, Debug, PartialEq)]
pub struct DiscreteForm<T> {
    pub form_matrix: Matrix<T>,
    pub signed_mass: Matrix<T>,
    pub unsigned_mass: Matrix<T>,
    pub structured: StructuredForm<T>,
}

impl<T: Real> DiscreteForm<T> {
    pub fn dof_count(&self) -> usize {
        self.structured.layout.dof_count
    }

    pub fn layout(&self) -> &Layout<T> {
        &self.structured.layout
    }

    /// Reduced index ranges of each edge's interior nodes.
    pub fn edge_dof_slices(&self) -> Vec<Range<usize>> {
        self.layout().edges.iter().map(|e| e.interior.clone()).collect()
    }

    pub fn endpoint_dofs(&self) -> &EndpointMap {
        &self.layout().endpoint_map
    }

    /// `F(u, v)`
    pub fn form(&self, u: &[T], v: &[T]) -> T {
        self.form_matrix.bilinear(u, v)
    }

    /// `[u, v] = (Bu, v)`
    pub fn krein(&self, u: &[T], v: &[T]) -> T {
        self.signed_mass.bilinear(u, v)
    }

    /// `(u, v)`
    pub fn l2(&self, u: &[T], v: &[T]) -> T {
        self.unsigned_mass.bilinear(u, v)
    }

    pub fn mesh_counts(&self) -> Vec<usize> {
        self.layout().edges.iter().map(|e| e.mesh).collect()
    }
}

/// Builds the block-sparse reduced matrices without densifying.
pub fn assemble_structured<T: Real>(g: &MetricGraph<T>) -> Result<StructuredForm<T>> {
    g.ensure_valid()?;
    let k = g.edge_count();

    // Per-vertex nullspaces of the constraint rows.
    let mut basis_cols: Vec<Vec<(usize, T)>> = Vec::new();
    for v in g.vertices() {
        let inc = g.incident(&v.id);
        let rows = v.condition.constraint_rows(inc.len());
        let ns = if rows.is_empty() {
            Matrix::identity(inc.len())
        } else {
            let rre = RowEchelon::new(&Matrix::from_rows(&rows));
            if rre.rank() < rows.len() {
                return Err(Error::DependentConstraints { vertex: v.id.clone() });
            }
            rre.nullspace()
        };
        for c in 0..ns.cols() {
            basis_cols.push(
                inc.iter()
                    .enumerate()
                    .filter(|(i, _)| ns[(*i, c)] != T::zero())
                    .map(|(i, p)| (p.flat(), ns[(i, c)]))
                    .collect(),
            );
        }
    }
    let r = basis_cols.len();
    let mut endpoint_basis = Matrix::zeros(2 * k, r);
    for (c, col) in basis_cols.iter().enumerate() {
        for &(p, v) in col {
            endpoint_basis[(p, c)] = v;
        }
    }

    let mut edges = Vec::with_capacity(k);
    let mut interior_offset = 0;
    let mut node_offset = 0;
    for e in g.edges() {
        edges.push(EdgeLayout {
            id: e.id.clone(),
            weight: e.weight,
            mesh: e.mesh,
            interior: interior_offset..interior_offset + e.mesh - 1,
            nodes: node_offset..node_offset + e.mesh + 1,
        });
        interior_offset += e.mesh - 1;
        node_offset += e.mesh + 1;
    }
    let dof_count = interior_offset + r;
    if dof_count == 0 {
        return Err(Error::OverConstrained);
    }

    // Sparse rows of the endpoint basis, reused per node.
    let endpoint_rows: Vec<Vec<(usize, T)>> = (0..2 * k)
        .map(|p| {
            (0..r)
                .filter(|&c| endpoint_basis[(p, c)] != T::zero())
                .map(|c| (c, endpoint_basis[(p, c)]))
                .collect()
        })
        .collect();

    let mut form = BlockSparse::zeros(interior_offset, r);
    let mut signed = BlockSparse::zeros(interior_offset, r);
    let mut unsigned = BlockSparse::zeros(interior_offset, r);
    let mut edge_matrices = Vec::with_capacity(k);
    for (ei, (e, el)) in g.edges().iter().zip(&edges).enumerate() {
        let em = EdgeMatrices::new(&e.potential, e.mesh);
        let sign: T = e.weight.value();
        let expr = |j: usize| -> NodeExpr<T> {
            if j == 0 {
                NodeExpr::Boundary(&endpoint_rows[EndpointRef::new(ei, End::Start).flat()])
            } else if j == e.mesh {
                NodeExpr::Boundary(&endpoint_rows[EndpointRef::new(ei, End::Terminal).flat()])
            } else {
                NodeExpr::Interior(el.interior.start + j - 1)
            }
        };
        for j in 0..=e.mesh {
            let x = expr(j);
            add_entry(&mut form, &x, &x, em.stiffness_diag[j], true);
            add_entry(&mut signed, &x, &x, sign * em.mass_diag[j], true);
            add_entry(&mut unsigned, &x, &x, em.mass_diag[j], true);
            if j < e.mesh {
                let y = expr(j + 1);
                add_entry(&mut form, &x, &y, em.stiffness_off[j], false);
                add_entry(&mut signed, &x, &y, sign * em.mass_off[j], false);
                add_entry(&mut unsigned, &x, &y, em.mass_off[j], false);
            }
        }
        edge_matrices.push(em);
    }

    // Boundary term: +f(1)·x(1)y(1) at terminal, −f(0)·x(0)y(0) at initial points.
    let mut boundary_weights = vec![T::zero(); 2 * k];
    for ei in 0..k {
        for end in [End::Start, End::Terminal] {
            let p = EndpointRef::new(ei, end);
            let w = end.sign::<T>() * g.endpoint_f(p);
            boundary_weights[p.flat()] = w;
            let row = NodeExpr::Boundary(&endpoint_rows[p.flat()]);
            add_entry(&mut form, &row, &row, w, true);
        }
    }

    Ok(StructuredForm {
        layout: Layout {
            edges,
            endpoint_basis,
            boundary_offset: interior_offset,
            dof_count,
            full_dim: node_offset,
            endpoint_map: g.endpoint_map(),
            constraint_rows: g.constraint_matrix(),
            boundary_weights,
            edge_matrices,
        },
        form,
        signed_mass: signed,
        unsigned_mass: unsigned,
    })
}

/// Assembles the dense reduced form, signed mass and unsigned mass.
pub fn assemble_global<T: Real>(g: &MetricGraph<T>) -> Result<DiscreteForm<T>> {
    let structured = assemble_structured(g)?;
    Ok(DiscreteForm {
        form_matrix: structured.form.to_dense(),
        signed_mass: structured.signed_mass.to_dense(),
        unsigned_mass: structured.unsigned_mass.to_dense(),
        structured,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct PositivityReport<T> {
    pub positive_definite: bool,
    /// Smallest eigenvalue of `F u = ρ (·,·) u`.
    pub rho1: T,
    pub dof_count: usize,
}

/// Checks that the form matrix is positive definite and reports `ρ₁`.
pub fn check_positivity<T: Real>(d: &DiscreteForm<T>) -> Result<PositivityReport<T>> {
    if let Err(e) = Cholesky::new(&d.form_matrix) {
        return Err(Error::NotPositiveDefinite {
            detail: format!("Cholesky breakdown at pivot {}", e.pivot),
        });
    }
    let mass = Cholesky::new(&d.unsigned_mass).map_err(|_| Error::NoConvergence)?;
    let c = mass.whiten(&d.form_matrix);
    let eig = SymmetricEigen::new(&c).map_err(|_| Error::NoConvergence)?;
    let rho1 = eig.values[0];
    let floor = T::epsilon() * T::lit(1e3) * eig.values.last().copied().unwrap_or(T::one()).abs();
    if !(rho1 > floor) {
        return Err(Error::NotPositiveDefinite {
            detail: format!("rho1 = {:e}", rho1.to_f64_lossy()),
        });
    }
    Ok(PositivityReport {
        positive_definite: true,
        rho1,
        dof_count: d.dof_count(),
    })
}

/// Writes `i j value` lines (0-based) for every nonzero entry.
pub fn write_matrix_dump<T: Real, W: Write>(m: &Matrix<T>, mut w: W) -> io::Result<()> {
    for (i, j, v) in m.triplets() {
        writeln!(w, "{i} {j} {}", fmt_float(v))?;
    }
    Ok(())
}
