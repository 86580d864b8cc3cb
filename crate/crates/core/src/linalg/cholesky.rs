use super::matrix::Matrix;
use crate::scalar::Real;

/// Lower-triangular factor `L` with `A = L·Lᵀ`.
#[derive(Clone, Debug)]
pub struct Cholesky<T> {
    l: Matrix<T>,
}

/// Pivot index at which the factorization broke down.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct NotPositiveDefinite {
    pub pivot: usize,
}

impl<T: Real> Cholesky<T> {
    /// Factors a symmetric matrix. A pivot that is not strictly above
    /// `n·ε·max|aᵢᵢ|` counts as a breakdown, so numerically singular
    /// semidefinite matrices are rejected.
    pub fn new(a: &Matrix<T>) -> Result<Self, NotPositiveDefinite> {
        assert!(a.is_square(), "Cholesky of non-square matrix");
        let n = a.rows();
        let max_diag = a.diagonal().into_iter().fold(T::zero(), |m, x| m.max(x.abs()));
        let floor = T::from_usize_lossy(n.max(1)) * T::epsilon() * max_diag * T::lit(16.0);
        let mut l = Matrix::zeros(n, n);
        for j in 0..n {
            let mut d = a[(j, j)];
            for k in 0..j {
                d -= l[(j, k)] * l[(j, k)];
            }
            if !(d > floor) || !d.is_finite() {
                return Err(NotPositiveDefinite { pivot: j });
            }
            let djj = d.sqrt();
            l[(j, j)] = djj;
            for i in (j + 1)..n {
                let mut s = a[(i, j)];
                let (ri, rj) = (l.row(i), l.row(j));
                for k in 0..j {
                    s -= ri[k] * rj[k];
                }
                l[(i, j)] = s / djj;
            }
        }
        Ok(Self { l })
    }

    pub fn factor(&self) -> &Matrix<T> {
        &self.l
    }

    pub fn dim(&self) -> usize {
        self.l.rows()
    }

    /// Solves `L·x = b`.
    pub fn solve_lower(&self, b: &[T]) -> Vec<T> {
        let n = self.dim();
        let mut x = b.to_vec();
        for i in 0..n {
            let row = self.l.row(i);
            let mut s = x[i];
            for k in 0..i {
                s -= row[k] * x[k];
            }
            x[i] = s / row[i];
        }
        x
    }

    /// Solves `Lᵀ·x = b`.
    pub fn solve_upper(&self, b: &[T]) -> Vec<T> {
        let n = self.dim();
        let mut x = b.to_vec();
        for i in (0..n).rev() {
            x[i] /= self.l[(i, i)];
            let xi = x[i];
            let row = self.l.row(i);
            for k in 0..i {
                x[k] -= row[k] * xi;
            }
        }
        x
    }

    /// Solves `A·x = b`.
    pub fn solve(&self, b: &[T]) -> Vec<T> {
        self.solve_upper(&self.solve_lower(b))
    }

    /// `A⁻¹·B` column by column.
    pub fn solve_matrix(&self, b: &Matrix<T>) -> Matrix<T> {
        let mut out = Matrix::zeros(b.rows(), b.cols());
        for j in 0..b.cols() {
            out.set_column(j, &self.solve(&b.column(j)));
        }
        out
    }

    /// `L⁻¹·S·L⁻ᵀ` for symmetric `S`, symmetrized after formation.
    pub fn whiten(&self, s: &Matrix<T>) -> Matrix<T> {
        let n = self.dim();
        assert_eq!((s.rows(), s.cols()), (n, n));
        // X = L⁻¹ S, then C = L⁻¹ Xᵀ = L⁻¹ S L⁻ᵀ.
        let mut x = Matrix::zeros(n, n);
        for j in 0..n {
            x.set_column(j, &self.solve_lower(&s.column(j)));
        }
        let xt = x.transpose();
        let mut c = Matrix::zeros(n, n);
        for j in 0..n {
            c.set_column(j, &self.solve_lower(&xt.column(j)));
        }
        c.symmetrize();
        c
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn factor_and_solve() {
        let a = Matrix::<f64>::from_rows(&[
            vec![4.0, 2.0, 0.4],
            vec![2.0, 5.0, 1.0],
            vec![0.4, 1.0, 3.0],
        ]);
        let ch = Cholesky::new(&a).unwrap();
        let l = ch.factor();
        let rebuilt = l.matmul(&l.transpose());
        assert!(rebuilt.sub(&a).max_abs() < 1e-14);
        let x = ch.solve(&[1.0, 2.0, 3.0]);
        let r = a.mul_vec(&x);
        for (ri, bi) in r.iter().zip([1.0, 2.0, 3.0]) {
            assert!((ri - bi).abs() < 1e-13);
        }
    }

    #[test]
    fn rejects_semidefinite() {
        let a = Matrix::from_rows(&[vec![1.0, -1.0], vec![-1.0, 1.0]]);
        assert_eq!(Cholesky::new(&a).unwrap_err().pivot, 1);
        let b = Matrix::from_rows(&[vec![1.0, 0.0], vec![0.0, -1.0]]);
        assert!(Cholesky::new(&b).is_err());
    }
}
