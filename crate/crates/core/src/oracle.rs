//! Transfer-matrix eigenvalue oracle, independent of the finite-element path.
//!
//! On each constant piece `y'' = c y` with `c = q − bλ` is solved in closed
//! form. The unknowns are `(y_i(0), y_i'(0))` per edge; each vertex
//! contributes its constraint rows and the natural rows
//! `Nᵀ diag(σ) (f y + y')`, `N` spanning the nullspace of the constraints.

use std::io::{self, Write};

use serde::Serialize;

use crate::error::Result;
use crate::format::fmt_float;
use crate::graph::{Edge, End, EndpointRef, MetricGraph};
use crate::linalg::{determinant, singular_values, Matrix, RowEchelon};
use crate::scalar::Real;

/// Maps `(y, y')` at the left end of an interval to the right end.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TransferMatrix<T>(pub [[T; 2]; 2]);

impl<T: Real> TransferMatrix<T> {
    pub fn identity() -> Self {
        Self([[T::one(), T::zero()], [T::zero(), T::one()]])
    }

    pub fn det(&self) -> T {
        let m = &self.0;
        m[0][0] * m[1][1] - m[0][1] * m[1][0]
    }

    /// `self · rhs` (apply `rhs` first).
    pub fn then_after(&self, rhs: &Self) -> Self {
        let (a, b) = (&self.0, &rhs.0);
        let mut out = [[T::zero(); 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                out[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
            }
        }
        Self(out)
    }

    pub fn apply(&self, v: [T; 2]) -> [T; 2] {
        let m = &self.0;
        [m[0][0] * v[0] + m[0][1] * v[1], m[1][0] * v[0] + m[1][1] * v[1]]
    }
}

/// Closed-form propagator of `y'' = c y` over a length `length`.
pub fn edge_transfer<T: Real>(c: T, length: T) -> TransferMatrix<T> {
    let l = length;
    if c == T::zero() {
        return TransferMatrix([[T::one(), l], [T::zero(), T::one()]]);
    }
    let z = c * l * l;
    if z.abs() < T::lit(1e-8) {
        let six = T::lit(6.0);
        return TransferMatrix([
            [T::one() + z * T::lit(0.5), l * (T::one() + z / six)],
            [c * l * (T::one() + z / six), T::one() + z * T::lit(0.5)],
        ]);
    }
    if c > T::zero() {
        let w = c.sqrt();
        let (s, ch) = ((w * l).sinh(), (w * l).cosh());
        TransferMatrix([[ch, s / w], [w * s, ch]])
    } else {
        let w = (-c).sqrt();
        let (s, co) = ((w * l).sin(), (w * l).cos());
        TransferMatrix([[co, s / w], [-w * s, co]])
    }
}

/// Propagator across a whole edge for spectral parameter `lambda`.
pub fn edge_propagator<T: Real>(edge: &Edge<T>, lambda: T) -> TransferMatrix<T> {
    let b: T = edge.weight.value();
    edge.potential
        .pieces()
        .fold(TransferMatrix::identity(), |acc, (a, r, q)| edge_transfer(q - b * lambda, r - a).then_after(&acc))
}

/// Row-scaled `2K × 2K` secular matrix at `lambda`.
pub fn secular_matrix<T: Real>(g: &MetricGraph<T>, lambda: T) -> Matrix<T> {
    let k = g.edge_count();
    let props: Vec<TransferMatrix<T>> = g.edges().iter().map(|e| edge_propagator(e, lambda)).collect();
    // Coefficients of (value, derivative) at an endpoint in the unknowns.
    let endpoint = |p: EndpointRef| -> ([T; 2], [T; 2]) {
        match p.end {
            End::Start => ([T::one(), T::zero()], [T::zero(), T::one()]),
            End::Terminal => {
                let m = props[p.edge].0;
                (m[0], m[1])
            }
        }
    };
    let mut rows: Vec<Vec<T>> = Vec::with_capacity(2 * k);
    for v in g.vertices() {
        let inc = g.incident(&v.id);
        let cons = v.condition.constraint_rows(inc.len());
        let null = if cons.is_empty() {
            Matrix::identity(inc.len())
        } else {
            RowEchelon::new(&Matrix::from_rows(&cons)).nullspace()
        };
        for r in &cons {
            let mut row = vec![T::zero(); 2 * k];
            for (coef, &p) in r.iter().zip(&inc) {
                let (val, _) = endpoint(p);
                row[2 * p.edge] += *coef * val[0];
                row[2 * p.edge + 1] += *coef * val[1];
            }
            rows.push(row);
        }
        for c in 0..null.cols() {
            let mut row = vec![T::zero(); 2 * k];
            for (i, &p) in inc.iter().enumerate() {
                let n = null[(i, c)];
                if n == T::zero() {
                    continue;
                }
                let w = n * p.end.sign::<T>();
                let f = g.endpoint_f(p);
                let (val, der) = endpoint(p);
                row[2 * p.edge] += w * (f * val[0] + der[0]);
                row[2 * p.edge + 1] += w * (f * val[1] + der[1]);
            }
            rows.push(row);
        }
    }
    for row in &mut rows {
        let s = row.iter().fold(T::zero(), |m, v| m.max(v.abs()));
        if s > T::zero() {
            row.iter_mut().for_each(|v| *v /= s);
        }
    }
    Matrix::from_rows(&rows)
}

/// Determinant of the row-scaled secular matrix.
pub fn secular_det<T: Real>(g: &MetricGraph<T>, lambda: T) -> T {
    determinant(&secular_matrix(g, lambda))
}

/// Number of singular values of the secular matrix below `rel_tol·σ_max`.
pub fn secular_nullity<T: Real>(g: &MetricGraph<T>, lambda: T, rel_tol: T) -> usize {
    let sv = singular_values(&secular_matrix(g, lambda));
    let top = sv.first().copied().unwrap_or(T::zero());
    sv.iter().filter(|&&s| s <= rel_tol * top).count()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum RootKind {
    /// Bracketed by a sign change of the determinant.
    SignChange,
    /// Located at a local minimum of `|det|` without a sign change.
    Tangent,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Root<T> {
    pub lambda: T,
    pub multiplicity: usize,
    pub kind: RootKind,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct RootScan<T> {
    pub roots: Vec<Root<T>>,
    pub warnings: Vec<String>,
}

impl<T: Real> RootScan<T> {
    /// Root count with multiplicity.
    pub fn count(&self) -> usize {
        self.roots.iter().map(|r| r.multiplicity).sum()
    }

    /// Ascending values, repeated by multiplicity.
    pub fn values(&self) -> Vec<T> {
        self.roots.iter().flat_map(|r| std::iter::repeat_n(r.lambda, r.multiplicity)).collect()
    }
}

const NULLITY_TOL: f64 = 1e-6;

/// Scans `(lo, hi)` on a uniform grid of `grid` cells.
///
/// Sign changes are bisected to machine precision. Local minima of `|det|`
/// without a sign change are refined by golden-section search and kept as
/// roots when the secular matrix is numerically singular there; the
/// multiplicity of every root is its numerical nullity.
pub fn scan_roots<T: Real>(g: &MetricGraph<T>, lo: T, hi: T, grid: usize) -> Result<RootScan<T>> {
    g.ensure_valid()?;
    let grid = grid.max(2);
    let step = (hi - lo) / T::from_usize_lossy(grid);
    let xs: Vec<T> = (0..=grid).map(|i| lo + step * T::from_usize_lossy(i)).collect();
    let fs: Vec<T> = xs.iter().map(|&x| secular_det(g, x)).collect();
    let tol = T::lit(NULLITY_TOL);
    let mut out = RootScan::default();

    for i in 0..grid {
        let (a, b) = (xs[i], xs[i + 1]);
        let (fa, fb) = (fs[i], fs[i + 1]);
        if fa == T::zero() && i > 0 {
            // Exact hit, counted once from the cell on its left.
            continue;
        }
        if fa == T::zero() || fb == T::zero() || (fa < T::zero()) != (fb < T::zero()) {
            let x = if fb == T::zero() && i + 1 < grid {
                b
            } else if fa == T::zero() {
                a
            } else {
                bisect_sign(g, a, b, fa)
            };
            if x <= lo || x >= hi {
                continue;
            }
            let nullity = secular_nullity(g, x, tol).max(1);
            out.roots.push(Root {
                lambda: x,
                multiplicity: nullity,
                kind: RootKind::SignChange,
            });
        } else if i > 0 {
            let fp = fs[i - 1];
            let same = (fp < T::zero()) == (fa < T::zero());
            if same && fa.abs() < fp.abs() && fa.abs() < fb.abs() {
                let x = golden_min(g, xs[i - 1], b);
                let nullity = secular_nullity(g, x, tol);
                if nullity > 0 {
                    out.roots.push(Root {
                        lambda: x,
                        multiplicity: nullity,
                        kind: RootKind::Tangent,
                    });
                } else if secular_nullity(g, x, T::lit(1e-3)) > 0 {
                    out.warnings.push(format!(
                        "possible double root or tangency near lambda = {}; refine grid",
                        fmt_float(x)
                    ));
                }
            }
        }
    }
    out.roots.sort_by(|a, b| a.lambda.partial_cmp(&b.lambda).unwrap());
    Ok(out)
}

fn bisect_sign<T: Real>(g: &MetricGraph<T>, mut a: T, mut b: T, mut fa: T) -> T {
    for _ in 0..200 {
        let m = (a + b) * T::lit(0.5);
        if !(m > a && m < b) {
            break;
        }
        let fm = secular_det(g, m);
        if fm == T::zero() {
            return m;
        }
        if (fm < T::zero()) == (fa < T::zero()) {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    (a + b) * T::lit(0.5)
}

fn golden_min<T: Real>(g: &MetricGraph<T>, mut a: T, mut b: T) -> T {
    let f = |x: T| secular_det(g, x).abs();
    let r = T::lit(0.5 * (5f64.sqrt() - 1.0));
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..200 {
        if b - a <= T::epsilon() * T::lit(4.0) * a.abs().max(b.abs()).max(T::one()) {
            break;
        }
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d);
        }
    }
    (a + b) * T::lit(0.5)
}

/// `index,lambda` rows, one per root counted with multiplicity.
pub fn write_roots_csv<T: Real, W: Write>(scan: &RootScan<T>, mut w: W) -> io::Result<()> {
    writeln!(w, "index,lambda")?;
    for (i, x) in scan.values().iter().enumerate() {
        writeln!(w, "{},{}", i + 1, fmt_float(*x))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{PiecewisePotential, Vertex, VertexCondition, WeightSign};
    use std::f64::consts::PI;

    fn dirichlet_edge() -> MetricGraph<f64> {
        MetricGraph::new(
            vec![Edge::new("e1", "a", "b", WeightSign::Positive, PiecewisePotential::zero(), 8)],
            vec![Vertex::new("a", VertexCondition::Dirichlet), Vertex::new("b", VertexCondition::Dirichlet)],
        )
        .unwrap()
    }

    fn close(a: &TransferMatrix<f64>, b: [[f64; 2]; 2], tol: f64) -> bool {
        (0..2).all(|i| (0..2).all(|j| (a.0[i][j] - b[i][j]).abs() <= tol))
    }

    #[test]
    fn closed_form_transfers() {
        assert!(close(&edge_transfer(0.0, 1.0), [[1.0, 1.0], [0.0, 1.0]], 0.0));
        assert!(close(&edge_transfer(-PI * PI, 1.0), [[-1.0, 0.0], [0.0, -1.0]], 1e-15));
        let t = edge_transfer(1.0f64, 1.0);
        let (c, s) = (1f64.cosh(), 1f64.sinh());
        assert!(close(&t, [[c, s], [s, c]], 1e-15));
        assert!((t.det() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn small_c_series_is_continuous() {
        let a = edge_transfer(1e-9, 1.0);
        let b = edge_transfer(-1e-9, 1.0);
        assert!(close(&a, b.0, 1e-8));
        assert!((a.det() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn dirichlet_roots() {
        let scan = scan_roots(&dirichlet_edge(), 0.0, 100.0, 400).unwrap();
        let v = scan.values();
        assert_eq!(v.len(), 3);
        for (k, x) in v.iter().enumerate() {
            let exact = ((k + 1) as f64 * PI).powi(2);
            assert!((x - exact).abs() <= 1e-8 * exact);
        }
        assert!(secular_det(&dirichlet_edge(), 20.0).abs() > 1e-3);
    }
}
