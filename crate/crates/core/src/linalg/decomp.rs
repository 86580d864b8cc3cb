//! Smaller factorizations: LU determinant, one-sided Jacobi singular values,
//! Gauss–Jordan nullspaces and orthogonal complements.

use super::eigen::SymmetricEigen;
use super::matrix::{axpy, dot, norm2, Matrix};
use crate::scalar::Real;

/// Determinant by LU with partial pivoting.
pub fn determinant<T: Real>(a: &Matrix<T>) -> T {
    assert!(a.is_square());
    let n = a.rows();
    let mut m = a.clone();
    let mut det = T::one();
    for col in 0..n {
        let pivot_row = (col..n)
            .max_by(|&i, &j| {
                m[(i, col)]
                    .abs()
                    .partial_cmp(&m[(j, col)].abs())
                    .unwrap_or(std::cmp::Ordering::Equal)
            })
            .expect("non-empty pivot range");
        let pivot = m[(pivot_row, col)];
        if pivot == T::zero() {
            return T::zero();
        }
        if pivot_row != col {
            for j in 0..n {
                let tmp = m[(col, j)];
                m[(col, j)] = m[(pivot_row, j)];
                m[(pivot_row, j)] = tmp;
            }
            det = -det;
        }
        det *= pivot;
        for i in (col + 1)..n {
            let factor = m[(i, col)] / pivot;
            if factor == T::zero() {
                continue;
            }
            for j in col..n {
                let v = m[(col, j)];
                m[(i, j)] -= factor * v;
            }
        }
    }
    det
}

/// Singular values in descending order (one-sided Jacobi on columns).
pub fn singular_values<T: Real>(a: &Matrix<T>) -> Vec<T> {
    let (rows, cols) = (a.rows(), a.cols());
    // Work on the orientation with more rows than columns.
    let mut cols_data: Vec<Vec<T>> = if rows >= cols {
        (0..cols).map(|j| a.column(j)).collect()
    } else {
        (0..rows).map(|i| a.row(i).to_vec()).collect()
    };
    let k = cols_data.len();
    let tol = T::epsilon() * T::lit(4.0);
    for _sweep in 0..80 {
        let mut rotated = false;
        for p in 0..k {
            for q in (p + 1)..k {
                let alpha = dot(&cols_data[p], &cols_data[p]);
                let beta = dot(&cols_data[q], &cols_data[q]);
                let gamma = dot(&cols_data[p], &cols_data[q]);
                if gamma == T::zero() || gamma.abs() <= tol * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (T::lit(2.0) * gamma);
                let t = zeta.signum() / (zeta.abs() + (T::one() + zeta * zeta).sqrt());
                let c = T::one() / (T::one() + t * t).sqrt();
                let s = c * t;
                let (lo, hi) = cols_data.split_at_mut(q);
                for (x, y) in lo[p].iter_mut().zip(hi[0].iter_mut()) {
                    let (xp, yq) = (*x, *y);
                    *x = c * xp - s * yq;
                    *y = s * xp + c * yq;
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let mut sv: Vec<T> = cols_data.iter().map(|c| norm2(c)).collect();
    sv.sort_by(|a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));
    sv
}

/// Reduced row echelon form of a constraint matrix.
#[derive(Clone, Debug)]
pub struct RowEchelon<T> {
    pub reduced: Matrix<T>,
    pub pivot_cols: Vec<usize>,
}

impl<T: Real> RowEchelon<T> {
    /// Gauss–Jordan reduction with partial pivoting; entries below
    /// `tol·max|A|` are treated as zero.
    pub fn new(a: &Matrix<T>) -> Self {
        let (rows, cols) = (a.rows(), a.cols());
        let mut m = a.clone();
        let scale = a.max_abs().max(T::min_positive_value());
        let tol = scale * T::epsilon() * T::lit(64.0) * T::from_usize_lossy(rows.max(cols).max(1));
        let mut pivot_cols = Vec::new();
        let mut r = 0;
        for c in 0..cols {
            if r == rows {
                break;
            }
            let (best, best_val) = (r..rows)
                .map(|i| (i, m[(i, c)].abs()))
                .fold((r, T::zero()), |acc, x| if x.1 > acc.1 { x } else { acc });
            if best_val <= tol {
                for i in r..rows {
                    m[(i, c)] = T::zero();
                }
                continue;
            }
            if best != r {
                for j in 0..cols {
                    let tmp = m[(r, j)];
                    m[(r, j)] = m[(best, j)];
                    m[(best, j)] = tmp;
                }
            }
            let p = m[(r, c)];
            for j in 0..cols {
                m[(r, j)] /= p;
            }
            for i in 0..rows {
                if i == r {
                    continue;
                }
                let factor = m[(i, c)];
                if factor == T::zero() {
                    continue;
                }
                for j in 0..cols {
                    let v = m[(r, j)];
                    m[(i, j)] -= factor * v;
                }
                m[(i, c)] = T::zero();
            }
            pivot_cols.push(c);
            r += 1;
        }
        Self {
            reduced: m,
            pivot_cols,
        }
    }

    pub fn rank(&self) -> usize {
        self.pivot_cols.len()
    }

    /// Nullspace basis with one column per free variable: the free
    /// variable is 1, other free variables 0, pivots solved for.
    pub fn nullspace(&self) -> Matrix<T> {
        let cols = self.reduced.cols();
        let free: Vec<usize> = (0..cols).filter(|c| !self.pivot_cols.contains(c)).collect();
        let mut basis = Matrix::zeros(cols, free.len());
        for (k, &fc) in free.iter().enumerate() {
            basis[(fc, k)] = T::one();
            for (r, &pc) in self.pivot_cols.iter().enumerate() {
                let v = -self.reduced[(r, fc)];
                // Snap rounding noise so exact rows give exact bases.
                basis[(pc, k)] = if v.abs() <= T::epsilon() * T::lit(8.0) { T::zero() } else { v };
            }
        }
        basis
    }
}

/// Orthonormal basis (columns) of `{x : aᵀ·x = 0}` where `a` is `n × k`.
pub fn orthogonal_complement<T: Real>(a: &Matrix<T>) -> Matrix<T> {
    let n = a.rows();
    // Orthonormalize the columns of `a` (modified Gram–Schmidt, two passes).
    let mut q: Vec<Vec<T>> = Vec::new();
    for j in 0..a.cols() {
        let mut v = a.column(j);
        let orig = norm2(&v);
        for _ in 0..2 {
            for qi in &q {
                let c = dot(qi, &v);
                axpy(-c, qi, &mut v);
            }
        }
        let nv = norm2(&v);
        if orig > T::zero() && nv > orig * T::epsilon() * T::lit(1e3) {
            q.push(v.iter().map(|&x| x / nv).collect());
        }
    }
    // Eigenvectors of I − QQᵀ with eigenvalue 1 span the complement.
    let mut p = Matrix::identity(n);
    for qi in &q {
        for i in 0..n {
            for j in 0..n {
                p[(i, j)] -= qi[i] * qi[j];
            }
        }
    }
    p.symmetrize();
    let eig = SymmetricEigen::new(&p).expect("projector eigendecomposition converges");
    let keep: Vec<usize> = (0..n).filter(|&k| eig.values[k] > T::lit(0.5)).collect();
    eig.vectors.columns(&keep)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn determinant_with_pivoting() {
        let a = Matrix::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]);
        assert_eq!(determinant(&a), -1.0);
        let b = Matrix::<f64>::from_rows(&[
            vec![2.0, -1.0, 0.0],
            vec![-1.0, 2.0, -1.0],
            vec![0.0, -1.0, 2.0],
        ]);
        assert!((determinant(&b) - 4.0).abs() < 1e-14);
    }

    #[test]
    fn singular_values_of_rank_one() {
        let a = Matrix::from_rows(&[vec![1.0, 2.0], vec![2.0, 4.0], vec![3.0, 6.0]]);
        let sv = singular_values(&a);
        assert!((sv[0] - (70.0f64).sqrt()).abs() < 1e-13);
        assert!(sv[1].abs() < 1e-14);
    }

    #[test]
    fn continuity_rows_give_shared_value_basis() {
        let rows = Matrix::from_rows(&[vec![1.0, -1.0, 0.0], vec![1.0, 0.0, -1.0]]);
        let rre = RowEchelon::new(&rows);
        assert_eq!(rre.rank(), 2);
        let ns = rre.nullspace();
        assert_eq!(ns.cols(), 1);
        assert_eq!(ns.column(0), vec![1.0, 1.0, 1.0]);
    }

    #[test]
    fn rank_deficient_rows_detected() {
        let rows = Matrix::from_rows(&[vec![1.0, -1.0], vec![-2.0, 2.0]]);
        assert_eq!(RowEchelon::new(&rows).rank(), 1);
    }

    #[test]
    fn complement_is_orthonormal_and_annihilated() {
        let a = Matrix::from_rows(&[vec![1.0], vec![1.0], vec![0.0], vec![2.0]]);
        let z = orthogonal_complement(&a);
        assert_eq!(z.cols(), 3);
        assert!(z.transpose().matmul(&z).sub(&Matrix::identity(3)).max_abs() < 1e-13);
        assert!(a.transpose().matmul(&z).max_abs() < 1e-13);
    }
}
