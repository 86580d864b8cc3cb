//! Eigenvalues by inertia counting and bisection on the block-sparse
//! matrices, for meshes where the dense path is too slow.
//!
//! The inertia of `A − σB` is obtained from an `LDLᵀ` factorization of the
//! tridiagonal interior block and the Schur complement on the small
//! boundary block.

use crate::assembly::BlockSparse;
use crate::error::{Error, Result};
use crate::linalg::{Matrix, SymmetricEigen};
use crate::scalar::Real;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Inertia {
    pub negative: usize,
    pub zero: usize,
    pub positive: usize,
}

/// Inertia of `a − s·b`.
pub fn inertia<T: Real>(a: &BlockSparse<T>, s: T, b: &BlockSparse<T>) -> Result<Inertia> {
    let ni = a.interior_dim();
    let r = a.boundary_dim();
    let mut out = Inertia::default();

    let mut d = vec![T::zero(); ni];
    let mut l = vec![T::zero(); ni];
    for i in 0..ni {
        let diag = a.interior_diag[i] - s * b.interior_diag[i];
        let mut piv = diag;
        if i > 0 {
            let off = a.interior_off[i - 1] - s * b.interior_off[i - 1];
            l[i] = off / d[i - 1];
            piv -= l[i] * off;
        }
        if piv == T::zero() {
            let left = if i > 0 { (a.interior_off[i - 1] - s * b.interior_off[i - 1]).abs() } else { T::zero() };
            let right = if i + 1 < ni { (a.interior_off[i] - s * b.interior_off[i]).abs() } else { T::zero() };
            piv = T::epsilon() * (diag.abs() + left + right + T::min_positive_value());
        }
        if piv < T::zero() {
            out.negative += 1;
        } else {
            out.positive += 1;
        }
        d[i] = piv;
    }
    if r == 0 {
        return Ok(out);
    }

    // Schur complement S = D − Xᵀ T⁻¹ X on the boundary block.
    let x = a.coupling.sub(&b.coupling.scale(s));
    let mut y = x.clone();
    for c in 0..r {
        for i in 1..ni {
            let prev = y[(i - 1, c)];
            y[(i, c)] -= l[i] * prev;
        }
        for i in 0..ni {
            y[(i, c)] /= d[i];
        }
        for i in (0..ni.saturating_sub(1)).rev() {
            let next = y[(i + 1, c)];
            y[(i, c)] -= l[i + 1] * next;
        }
    }
    let mut schur = a.boundary.sub(&b.boundary.scale(s));
    for p in 0..r {
        for q in 0..r {
            let mut acc = T::zero();
            for i in 0..ni {
                acc += x[(i, p)] * y[(i, q)];
            }
            schur[(p, q)] -= acc;
        }
    }
    schur.symmetrize();
    let eig = SymmetricEigen::new(&schur).map_err(|_| Error::NoConvergence)?;
    let floor = T::epsilon() * T::from_usize_lossy(r) * eig.values.iter().fold(T::zero(), |m, v| m.max(v.abs()));
    for &v in &eig.values {
        if v.abs() <= floor {
            out.zero += 1;
        } else if v < T::zero() {
            out.negative += 1;
        } else {
            out.positive += 1;
        }
    }
    Ok(out)
}

const MAX_STEPS: usize = 400;

fn bisect<T: Real>(mut lo: T, mut hi: T, k: usize, count: impl Fn(T) -> Result<usize>) -> Result<T> {
    let abs_floor = T::lit(1e-15) * lo.abs().max(hi.abs()).max(T::one());
    for _ in 0..MAX_STEPS {
        let width = hi - lo;
        if width <= T::lit(2.0) * T::epsilon() * lo.abs().max(hi.abs()) || width <= abs_floor {
            break;
        }
        let mid = (lo + hi) * T::lit(0.5);
        if count(mid)? >= k {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok((lo + hi) * T::lit(0.5))
}

/// Indefinite pencil `F y = λ B y` with `F` positive definite.
pub struct PencilSlicer<'a, T> {
    form: &'a BlockSparse<T>,
    signed: &'a BlockSparse<T>,
    positive_available: usize,
    negative_available: usize,
}

impl<'a, T: Real> PencilSlicer<'a, T> {
    pub fn new(form: &'a BlockSparse<T>, signed: &'a BlockSparse<T>) -> Result<Self> {
        let zero = BlockSparse::zero_like(form);
        let fi = inertia(form, T::zero(), &zero)?;
        if fi.negative + fi.zero > 0 {
            return Err(Error::NotPositiveDefinite {
                detail: format!("form has {} nonpositive inertia directions", fi.negative + fi.zero),
            });
        }
        let bi = inertia(signed, T::zero(), &zero)?;
        Ok(Self {
            form,
            signed,
            positive_available: bi.positive,
            negative_available: bi.negative,
        })
    }

    pub fn positive_available(&self) -> usize {
        self.positive_available
    }

    pub fn negative_available(&self) -> usize {
        self.negative_available
    }

    /// `#{λ ∈ (0, σ)}` for `σ > 0`, `#{λ ∈ (σ, 0)}` for `σ < 0`.
    pub fn count_towards(&self, sigma: T) -> Result<usize> {
        if sigma == T::zero() {
            return Ok(0);
        }
        Ok(inertia(self.form, sigma, self.signed)?.negative)
    }

    /// Eigenvalues in the open window `(lo, hi)`.
    pub fn count_in(&self, lo: T, hi: T) -> Result<usize> {
        let side = |x: T| self.count_towards(x);
        Ok(if lo >= T::zero() {
            side(hi)? - side(lo)?
        } else if hi <= T::zero() {
            side(lo)? - side(hi)?
        } else {
            side(lo)? + side(hi)?
        })
    }

    fn branch(&self, n: usize, sign: T, available: usize) -> Result<Vec<T>> {
        if n > available {
            return Err(Error::NotEnoughEigenvalues { requested: n, available });
        }
        let count = |t: T| self.count_towards(sign * t);
        let mut out = Vec::with_capacity(n);
        let mut lo = T::zero();
        let mut hi = T::one();
        for k in 1..=n {
            while count(hi)? < k {
                lo = hi;
                hi *= T::lit(2.0);
            }
            let t = bisect(lo, hi, k, count)?;
            out.push(sign * t);
            lo = t * (T::one() - T::lit(1e-9));
        }
        Ok(out)
    }

    /// `λ₁ ≤ … ≤ λ_n`
    pub fn positive(&self, n: usize) -> Result<Vec<T>> {
        self.branch(n, T::one(), self.positive_available)
    }

    /// `λ₋₁ ≥ … ≥ λ₋n`
    pub fn negative(&self, n: usize) -> Result<Vec<T>> {
        self.branch(n, -T::one(), self.negative_available)
    }
}

/// Definite pencil `A y = ν M y` with `M` positive definite.
pub struct DefiniteSlicer<'a, T> {
    a: &'a BlockSparse<T>,
    m: &'a BlockSparse<T>,
}

impl<'a, T: Real> DefiniteSlicer<'a, T> {
    pub fn new(a: &'a BlockSparse<T>, m: &'a BlockSparse<T>) -> Self {
        Self { a, m }
    }

    /// `#{ν < σ}`
    pub fn count_below(&self, sigma: T) -> Result<usize> {
        Ok(inertia(self.a, sigma, self.m)?.negative)
    }

    /// The `n` smallest eigenvalues, ascending.
    pub fn smallest(&self, n: usize) -> Result<Vec<T>> {
        let dim = self.a.dim();
        if n > dim {
            return Err(Error::NotEnoughEigenvalues { requested: n, available: dim });
        }
        let count = |t: T| self.count_below(t);
        let mut lo = -T::one();
        while count(lo)? > 0 {
            lo *= T::lit(2.0);
        }
        let mut out = Vec::with_capacity(n);
        let mut hi = T::one();
        for k in 1..=n {
            while count(hi)? < k {
                lo = hi;
                hi *= T::lit(2.0);
            }
            let t = bisect(lo, hi, k, count)?;
            out.push(t);
            let back = T::lit(1e-9) * t.abs().max(T::one());
            lo = t - back;
        }
        Ok(out)
    }
}

impl<T: Real> BlockSparse<T> {
    pub fn zero_like(other: &Self) -> Self {
        Self {
            interior_diag: vec![T::zero(); other.interior_dim()],
            interior_off: vec![T::zero(); other.interior_off.len()],
            coupling: Matrix::zeros(other.interior_dim(), other.boundary_dim()),
            boundary: Matrix::zeros(other.boundary_dim(), other.boundary_dim()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::assembly::assemble_structured;
    use crate::graph::{Edge, MetricGraph, PiecewisePotential, Vertex, VertexCondition, WeightSign};
    use crate::linalg::SymmetricEigen;
    use std::collections::BTreeMap;

    fn star(mesh: usize) -> MetricGraph<f64> {
        let edges = (0..3)
            .map(|i| {
                let w = if i == 2 { WeightSign::Negative } else { WeightSign::Positive };
                Edge::new(&format!("e{i}"), "c", &format!("t{i}"), w, PiecewisePotential::constant(0.3 * i as f64), mesh)
            })
            .collect();
        let mut vertices = vec![Vertex::new("c", VertexCondition::Kirchhoff)];
        vertices.push(Vertex::new("t0", VertexCondition::Dirichlet));
        vertices.push(Vertex::new("t1", VertexCondition::Robin { f: BTreeMap::new() }));
        vertices.push(Vertex::new("t2", VertexCondition::Dirichlet));
        MetricGraph::new(edges, vertices).unwrap()
    }

    #[test]
    fn inertia_matches_dense_eigenvalues() {
        let st = assemble_structured(&star(7)).unwrap();
        for sigma in [-40.0, -3.0, 0.5, 12.0, 90.0] {
            let dense = st.form.to_dense().sub(&st.signed_mass.to_dense().scale(sigma));
            let ev = SymmetricEigen::new(&dense).unwrap();
            let neg = ev.values.iter().filter(|v| **v < 0.0).count();
            let got = inertia(&st.form, sigma, &st.signed_mass).unwrap();
            assert_eq!(got.negative, neg, "sigma = {sigma}");
            assert_eq!(got.negative + got.zero + got.positive, dense.rows());
        }
    }

    #[test]
    fn exact_zero_pivot_stays_finite() {
        let g = MetricGraph::new(
            vec![Edge::new("e", "a", "b", WeightSign::Positive, PiecewisePotential::<f64>::zero(), 16)],
            vec![Vertex::new("a", VertexCondition::Dirichlet), Vertex::new("b", VertexCondition::Robin { f: BTreeMap::new() })],
        )
        .unwrap();
        let st = assemble_structured(&g).unwrap();
        // 2/h − σ·4h/6 vanishes at σ = 768.
        let got = inertia(&st.form, 768.0, &st.unsigned_mass).unwrap();
        assert_eq!(got.negative + got.zero + got.positive, st.form.dim());
    }

    #[test]
    fn definite_slicer_finds_neumann_zero() {
        let robin = || VertexCondition::Robin { f: BTreeMap::new() };
        let g = MetricGraph::new(
            vec![Edge::new("e", "a", "b", WeightSign::Positive, PiecewisePotential::<f64>::zero(), 32)],
            vec![Vertex::new("a", robin()), Vertex::new("b", robin())],
        )
        .unwrap();
        let st = assemble_structured(&g).unwrap();
        let ev = DefiniteSlicer::new(&st.form, &st.unsigned_mass).smallest(3).unwrap();
        assert!(ev[0].abs() < 1e-9);
        let pi2 = std::f64::consts::PI.powi(2);
        assert!((ev[1] - pi2).abs() / pi2 < 1e-3);
        assert!((ev[2] - 4.0 * pi2).abs() / (4.0 * pi2) < 5e-3);
    }
}
