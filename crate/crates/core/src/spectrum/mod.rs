//! Eigenpairs of the discrete pencil `F y = λ (B·,·) y`.

mod slicing;

use std::io::{self, Write};

use serde::Serialize;

pub use slicing::{inertia, DefiniteSlicer, Inertia, PencilSlicer};

use crate::assembly::DiscreteForm;
use crate::error::{Error, Result};
use crate::format::fmt_float;
use crate::linalg::{dot, Cholesky, SymmetricEigen};
use crate::scalar::Real;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Normalization {
    /// `F(y_n, y_m) = δ_nm`
    FOrthonormal,
    /// `[y_n, y_m] = ±δ_nm`
    BOrthonormalSigned,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Eigenpair<T> {
    /// `1, 2, …` on the positive branch, `−1, −2, …` on the negative one.
    pub index: i64,
    pub lambda: T,
    pub vector: Vec<T>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SpectrumResult<T> {
    /// Ascending `0 < λ₁ ≤ λ₂ ≤ …`
    pub positive: Vec<Eigenpair<T>>,
    /// Descending `0 > λ₋₁ ≥ λ₋₂ ≥ …`
    pub negative: Vec<Eigenpair<T>>,
    /// F-orthonormal basis of the kernel of the signed mass: directions
    /// whose eigenvalue sits at infinity at this resolution.
    pub kernel: Vec<Vec<T>>,
    pub normalization: Normalization,
    pub reduced_dimension: usize,
}

impl<T: Real> SpectrumResult<T> {
    pub fn get(&self, index: i64) -> Result<&Eigenpair<T>> {
        let branch = if index > 0 { &self.positive } else { &self.negative };
        let k = index.unsigned_abs() as usize;
        if k == 0 || k > branch.len() {
            return Err(Error::UnknownIndex(index));
        }
        Ok(&branch[k - 1])
    }

    pub fn positive_values(&self) -> Vec<T> {
        self.positive.iter().map(|p| p.lambda).collect()
    }

    pub fn negative_values(&self) -> Vec<T> {
        self.negative.iter().map(|p| p.lambda).collect()
    }

    /// Positive branch first, then the negative branch.
    pub fn iter(&self) -> impl Iterator<Item = &Eigenpair<T>> {
        self.positive.iter().chain(&self.negative)
    }

    pub fn len(&self) -> usize {
        self.positive.len() + self.negative.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Number of eigenvalues in the open window `(lo, hi)`.
    pub fn count_in(&self, lo: T, hi: T) -> usize {
        self.iter().filter(|p| p.lambda > lo && p.lambda < hi).count()
    }

    /// Rescales eigenvectors to `[y, y] = ±1`.
    pub fn b_normalized(&self, d: &DiscreteForm<T>) -> Self {
        let rescale = |p: &Eigenpair<T>| {
            let s = d.krein(&p.vector, &p.vector).abs().sqrt();
            Eigenpair {
                index: p.index,
                lambda: p.lambda,
                vector: p.vector.iter().map(|&v| v / s).collect(),
            }
        };
        Self {
            positive: self.positive.iter().map(rescale).collect(),
            negative: self.negative.iter().map(rescale).collect(),
            kernel: self.kernel.clone(),
            normalization: Normalization::BOrthonormalSigned,
            reduced_dimension: self.reduced_dimension,
        }
    }
}

/// Solves the pencil by Cholesky reduction `F = LLᵀ`, `C = L⁻¹ B L⁻ᵀ`;
/// eigenvalues `μ` of `C` give `λ = 1/μ` and `y = L⁻ᵀ v` is F-orthonormal.
///
/// `|μ| ≤ 1e-12·‖C‖` is an eigenvalue at infinity; such directions exist
/// when the discrete signed mass is singular (e.g. mirror-symmetric meshes
/// around a vertex joining edges of opposite sign) and are returned in
/// [`SpectrumResult::kernel`]. More of them than boundary coordinates is
/// impossible for a correct assembly and is reported as an error.
pub fn solve_pencil<T: Real>(d: &DiscreteForm<T>) -> Result<SpectrumResult<T>> {
    let chol = Cholesky::new(&d.form_matrix).map_err(|e| Error::NotPositiveDefinite {
        detail: format!("Cholesky breakdown at pivot {}", e.pivot),
    })?;
    let c = chol.whiten(&d.signed_mass);
    let eig = SymmetricEigen::new(&c).map_err(|_| Error::NoConvergence)?;
    let scale = eig.values.iter().fold(T::zero(), |m, v| m.max(v.abs()));
    let floor = T::lit(1e-12) * scale;
    let mut positive = Vec::new();
    let mut negative = Vec::new();
    let mut kernel = Vec::new();
    let mut smallest = scale;
    // Ascending μ: the most negative μ is λ₋₁, the largest μ is λ₁.
    for (k, &mu) in eig.values.iter().enumerate() {
        let vector = chol.solve_upper(&eig.vector(k));
        if !(mu.abs() > floor) {
            smallest = smallest.min(mu.abs());
            kernel.push(vector);
        } else if mu < T::zero() {
            negative.push((T::one() / mu, vector));
        } else {
            positive.push((T::one() / mu, vector));
        }
    }
    if kernel.len() > d.layout().boundary_dim() {
        return Err(Error::SingularSignedMass { mu: smallest.to_f64_lossy() });
    }
    positive.reverse();
    let tag = |list: Vec<(T, Vec<T>)>, sign: i64| {
        list.into_iter()
            .enumerate()
            .map(|(k, (lambda, vector))| Eigenpair {
                index: sign * (k as i64 + 1),
                lambda,
                vector,
            })
            .collect()
    };
    Ok(SpectrumResult {
        positive: tag(positive, 1),
        negative: tag(negative, -1),
        kernel,
        normalization: Normalization::FOrthonormal,
        reduced_dimension: d.dof_count(),
    })
}

/// Nodal samples of one eigenfunction on one edge.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EdgeSamples<T> {
    pub edge_id: String,
    pub x: Vec<T>,
    pub values: Vec<T>,
}

/// Expands a reduced eigenvector to nodal values on every edge.
pub fn eigenfunction_values<T: Real>(s: &SpectrumResult<T>, d: &DiscreteForm<T>, index: i64) -> Result<Vec<EdgeSamples<T>>> {
    let pair = s.get(index)?;
    Ok(expand(d, &pair.vector))
}

pub fn expand<T: Real>(d: &DiscreteForm<T>, u: &[T]) -> Vec<EdgeSamples<T>> {
    let lay = d.layout();
    let full = lay.embed(u);
    lay.edges
        .iter()
        .enumerate()
        .map(|(e, el)| {
            let m = T::from_usize_lossy(el.mesh);
            EdgeSamples {
                edge_id: el.id.clone(),
                x: (0..=el.mesh).map(|j| T::from_usize_lossy(j) / m).collect(),
                values: lay.edge_values(&full, e).to_vec(),
            }
        })
        .collect()
}

/// Diagnostics of the returned basis against the two bilinear forms.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct BasisDiagnostics {
    pub max_form_offdiag: f64,
    pub max_form_diag_defect: f64,
    pub max_krein_offdiag: f64,
    /// `max |F(y,y) − λ[y,y]|`
    pub max_rayleigh_defect: f64,
    /// `max ‖F y − λ B y‖ / (‖F‖ + |λ|‖B‖)`
    pub max_pencil_residual: f64,
}

pub fn basis_diagnostics<T: Real>(s: &SpectrumResult<T>, d: &DiscreteForm<T>) -> BasisDiagnostics {
    let pairs: Vec<&Eigenpair<T>> = s.iter().collect();
    let fy: Vec<Vec<T>> = pairs.iter().map(|p| d.form_matrix.mul_vec(&p.vector)).collect();
    let by: Vec<Vec<T>> = pairs.iter().map(|p| d.signed_mass.mul_vec(&p.vector)).collect();
    let fnorm = d.form_matrix.frobenius_norm();
    let bnorm = d.signed_mass.frobenius_norm();
    let mut out = BasisDiagnostics::default();
    let upd = |slot: &mut f64, v: T| *slot = slot.max(v.abs().to_f64_lossy());
    for (i, p) in pairs.iter().enumerate() {
        for (j, q) in pairs.iter().enumerate() {
            let f = dot(&q.vector, &fy[i]);
            let b = dot(&q.vector, &by[i]);
            if i == j {
                let fd = if s.normalization == Normalization::FOrthonormal { f - T::one() } else { T::zero() };
                upd(&mut out.max_form_diag_defect, fd);
                upd(&mut out.max_rayleigh_defect, f - p.lambda * b);
            } else {
                upd(&mut out.max_form_offdiag, f);
                upd(&mut out.max_krein_offdiag, b);
            }
        }
        let r: Vec<T> = fy[i].iter().zip(&by[i]).map(|(&a, &b)| a - p.lambda * b).collect();
        let res = crate::linalg::norm2(&r) / (fnorm + p.lambda.abs() * bnorm);
        upd(&mut out.max_pencil_residual, res);
    }
    out
}

/// `branch_index,lambda` rows, positive branch then negative branch.
pub fn write_spectrum_csv<T: Real, W: Write>(s: &SpectrumResult<T>, mut w: W) -> io::Result<()> {
    writeln!(w, "branch_index,lambda")?;
    for p in s.iter() {
        writeln!(w, "{},{}", p.index, fmt_float(p.lambda))?;
    }
    Ok(())
}

pub fn write_eigenfunction_csv<T: Real, W: Write>(samples: &[EdgeSamples<T>], mut w: W) -> io::Result<()> {
    writeln!(w, "edge_id,x,value")?;
    for s in samples {
        for (x, v) in s.x.iter().zip(&s.values) {
            writeln!(w, "{},{},{}", s.edge_id, fmt_float(*x), fmt_float(*v))?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::assembly::{assemble_global, assemble_structured};
    use crate::graph::{Edge, MetricGraph, PiecewisePotential, Vertex, VertexCondition, WeightSign};
    use crate::linalg::Matrix;

    fn diag_form(f: &[f64], b: &[f64]) -> DiscreteForm<f64> {
        let g = MetricGraph::new(
            vec![Edge::new("e", "a", "b", WeightSign::Positive, PiecewisePotential::zero(), f.len() + 1)],
            vec![Vertex::new("a", VertexCondition::Dirichlet), Vertex::new("b", VertexCondition::Dirichlet)],
        )
        .unwrap();
        let mut d = assemble_global(&g).unwrap();
        d.form_matrix = Matrix::from_diagonal(f);
        d.signed_mass = Matrix::from_diagonal(b);
        d
    }

    fn dirichlet_edge(mesh: usize) -> MetricGraph<f64> {
        MetricGraph::new(
            vec![Edge::new("e1", "a", "b", WeightSign::Positive, PiecewisePotential::zero(), mesh)],
            vec![Vertex::new("a", VertexCondition::Dirichlet), Vertex::new("b", VertexCondition::Dirichlet)],
        )
        .unwrap()
    }

    #[test]
    fn diagonal_pencil() {
        let d = diag_form(&[2.0, 3.0], &[1.0, -1.0]);
        let s = solve_pencil(&d).unwrap();
        assert_eq!(s.positive.len(), 1);
        assert!((s.get(1).unwrap().lambda - 2.0).abs() < 1e-14);
        assert!((s.get(-1).unwrap().lambda + 3.0).abs() < 1e-14);
        assert!(matches!(s.get(2), Err(Error::UnknownIndex(2))));
        assert!(matches!(s.get(0), Err(Error::UnknownIndex(0))));
    }

    #[test]
    fn singular_signed_mass_rejected() {
        // Three interior dofs, no boundary coordinates: no kernel is allowed.
        let d = diag_form(&[2.0, 3.0, 1.0], &[1.0, 0.0, -1.0]);
        assert!(matches!(solve_pencil(&d), Err(Error::SingularSignedMass { .. })));
    }

    #[test]
    fn mirrored_path_has_one_direction_at_infinity() {
        let g = MetricGraph::new(
            vec![
                Edge::new("e1", "a", "c", WeightSign::Positive, PiecewisePotential::<f64>::zero(), 8),
                Edge::new("e2", "c", "b", WeightSign::Negative, PiecewisePotential::zero(), 8),
            ],
            vec![
                Vertex::new("a", VertexCondition::Dirichlet),
                Vertex::new("c", VertexCondition::Kirchhoff),
                Vertex::new("b", VertexCondition::Dirichlet),
            ],
        )
        .unwrap();
        let d = assemble_global(&g).unwrap();
        let s = solve_pencil(&d).unwrap();
        assert_eq!(s.kernel.len(), 1);
        assert_eq!(s.positive.len(), s.negative.len());
        assert_eq!(s.len() + s.kernel.len(), s.reduced_dimension);
        let bk = d.signed_mass.mul_vec(&s.kernel[0]);
        assert!(crate::linalg::norm2(&bk) < 1e-12);
    }

    #[test]
    fn dirichlet_edge_modes() {
        let d = assemble_global(&dirichlet_edge(64)).unwrap();
        let s = solve_pencil(&d).unwrap();
        let pi2 = std::f64::consts::PI.powi(2);
        assert!((s.positive[0].lambda - pi2).abs() / pi2 <= 5e-4);
        assert!((s.positive[1].lambda - 4.0 * pi2).abs() / (4.0 * pi2) <= 2e-3);
        assert!(s.negative.is_empty());
        let diag = basis_diagnostics(&s, &d);
        assert!(diag.max_form_offdiag < 1e-10 && diag.max_form_diag_defect < 1e-10);
        assert!(diag.max_pencil_residual < 1e-9);

        let f = eigenfunction_values(&s, &d, 1).unwrap();
        let vals = &f[0].values;
        let peak = vals.iter().fold(0.0f64, |m, v| if v.abs() > m.abs() { *v } else { m });
        for (x, v) in f[0].x.iter().zip(vals) {
            assert!((v / peak - (std::f64::consts::PI * x).sin()).abs() <= 1e-3);
        }
        assert_eq!(vals[0], 0.0);
        assert_eq!(vals[64], 0.0);
    }

    #[test]
    fn slicer_matches_dense() {
        let g = MetricGraph::new(
            vec![
                Edge::new("e1", "a", "c", WeightSign::Positive, PiecewisePotential::constant(1.0), 16),
                Edge::new("e2", "c", "b", WeightSign::Negative, PiecewisePotential::constant(0.5), 12),
            ],
            vec![
                Vertex::new("a", VertexCondition::Dirichlet),
                Vertex::new("c", VertexCondition::Kirchhoff),
                Vertex::new("b", VertexCondition::Dirichlet),
            ],
        )
        .unwrap();
        let d = assemble_global(&g).unwrap();
        let s = solve_pencil(&d).unwrap();
        let st = assemble_structured(&g).unwrap();
        let sl = PencilSlicer::new(&st.form, &st.signed_mass).unwrap();
        let pos: Vec<f64> = sl.positive(6).unwrap();
        let neg: Vec<f64> = sl.negative(6).unwrap();
        for k in 0..6 {
            assert!((pos[k] - s.positive[k].lambda).abs() <= 1e-11 * pos[k].abs());
            assert!((neg[k] - s.negative[k].lambda).abs() <= 1e-11 * neg[k].abs());
        }
        assert_eq!(sl.count_in(-50.0, 50.0).unwrap(), s.count_in(-50.0, 50.0));
        assert_eq!(sl.positive_available(), s.positive.len());
    }
}
