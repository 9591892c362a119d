//! Minimal dense linear algebra.
//!
//! The feature matrices in this crate are small (tens of columns at most), so
//! a column-major matrix with a Cholesky solve covers every need without
//! pulling in a matrix library.

use crate::error::{Error, Result};
use crate::float::Float;

/// Dense column-major matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Matrix<F> {
    rows: usize,
    cols: usize,
    data: Vec<F>,
}

impl<F: Float> Matrix<F> {
    /// Builds a matrix from columns; all columns must share one length.
    pub fn from_columns(columns: Vec<Vec<F>>) -> Self {
        assert!(!columns.is_empty(), "matrix needs at least one column");
        let rows = columns[0].len();
        assert!(columns.iter().all(|c| c.len() == rows));
        let cols = columns.len();
        let mut data = Vec::with_capacity(rows * cols);
        for col in columns {
            data.extend(col);
        }
        Matrix { rows, cols, data }
    }

    /// Builds a matrix from rows.
    pub fn from_rows(rows: Vec<Vec<F>>) -> Self {
        assert!(!rows.is_empty(), "matrix needs at least one row");
        let ncols = rows[0].len();
        assert!(rows.iter().all(|r| r.len() == ncols));
        let nrows = rows.len();
        let mut data = vec![F::zero(); nrows * ncols];
        for (i, row) in rows.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                data[j * nrows + i] = v;
            }
        }
        Matrix {
            rows: nrows,
            cols: ncols,
            data,
        }
    }

    /// Identity-column matrix of the given size.
    pub fn identity(n: usize) -> Self {
        let mut m = Matrix {
            rows: n,
            cols: n,
            data: vec![F::zero(); n * n],
        };
        for i in 0..n {
            m.data[i * n + i] = F::one();
        }
        m
    }

    pub fn nrows(&self) -> usize {
        self.rows
    }

    pub fn ncols(&self) -> usize {
        self.cols
    }

    /// Column `j` as a slice.
    pub fn col(&self, j: usize) -> &[F] {
        &self.data[j * self.rows..(j + 1) * self.rows]
    }

    pub fn col_mut(&mut self, j: usize) -> &mut [F] {
        &mut self.data[j * self.rows..(j + 1) * self.rows]
    }

    /// `X v`.
    pub fn matvec(&self, v: &[F]) -> Vec<F> {
        assert_eq!(v.len(), self.cols);
        let mut out = vec![F::zero(); self.rows];
        for (j, &vj) in v.iter().enumerate() {
            if vj != F::zero() {
                for (o, &x) in out.iter_mut().zip(self.col(j)) {
                    *o += x * vj;
                }
            }
        }
        out
    }

    /// `X^T v`.
    pub fn tr_matvec(&self, v: &[F]) -> Vec<F> {
        assert_eq!(v.len(), self.rows);
        (0..self.cols).map(|j| dot(self.col(j), v)).collect()
    }

    /// Gram matrix `X_S^T X_S` of the selected columns, column-major.
    pub fn gram_of(&self, support: &[usize]) -> Vec<F> {
        let k = support.len();
        let mut g = vec![F::zero(); k * k];
        for a in 0..k {
            for b in a..k {
                let v = dot(self.col(support[a]), self.col(support[b]));
                g[b * k + a] = v;
                g[a * k + b] = v;
            }
        }
        g
    }
}

/// Euclidean inner product.
pub fn dot<F: Float>(a: &[F], b: &[F]) -> F {
    a.iter().zip(b).map(|(&x, &y)| x * y).sum()
}

/// Euclidean norm.
pub fn norm2<F: Float>(a: &[F]) -> F {
    dot(a, a).sqrt()
}

/// Max-magnitude norm.
pub fn norm_inf<F: Float>(a: &[F]) -> F {
    a.iter().fold(F::zero(), |m, &x| m.max(x.abs()))
}

/// In-place Cholesky factorization of a column-major SPD matrix.
///
/// Returns `false` when a pivot is not strictly positive.
fn cholesky_in_place<F: Float>(a: &mut [F], n: usize) -> bool {
    for j in 0..n {
        let mut d = a[j * n + j];
        for k in 0..j {
            d -= a[k * n + j] * a[k * n + j];
        }
        if d <= F::zero() || !d.is_finite() {
            return false;
        }
        let l_jj = d.sqrt();
        a[j * n + j] = l_jj;
        for i in j + 1..n {
            let mut s = a[j * n + i];
            for k in 0..j {
                s -= a[k * n + i] * a[k * n + j];
            }
            a[j * n + i] = s / l_jj;
        }
    }
    true
}

/// Solves `L L^T x = b` given the factor from [`cholesky_in_place`].
fn cholesky_solve_factored<F: Float>(l: &[F], n: usize, b: &[F]) -> Vec<F> {
    let mut x = b.to_vec();
    for i in 0..n {
        let mut s = x[i];
        for k in 0..i {
            s -= l[k * n + i] * x[k];
        }
        x[i] = s / l[i * n + i];
    }
    for i in (0..n).rev() {
        let mut s = x[i];
        for k in i + 1..n {
            s -= l[i * n + k] * x[k];
        }
        x[i] = s / l[i * n + i];
    }
    x
}

/// Solves the SPD system `A x = b` by Cholesky factorization.
///
/// On a failed factorization the diagonal is jittered once by
/// `1e-12 * trace(A) / n` before giving up with [`Error::SingularGram`].
pub fn spd_solve<F: Float>(a: &[F], n: usize, b: &[F]) -> Result<Vec<F>> {
    debug_assert_eq!(a.len(), n * n);
    debug_assert_eq!(b.len(), n);
    let mut l = a.to_vec();
    if cholesky_in_place(&mut l, n) {
        return Ok(cholesky_solve_factored(&l, n, b));
    }
    let trace: F = (0..n).map(|i| a[i * n + i]).sum();
    let jitter = F::cast(1e-12) * trace / F::cast(n);
    l.copy_from_slice(a);
    for i in 0..n {
        l[i * n + i] += jitter;
    }
    if cholesky_in_place(&mut l, n) {
        return Ok(cholesky_solve_factored(&l, n, b));
    }
    Err(Error::SingularGram)
}

/// Linear-independence test for unit-norm columns by modified
/// Gram-Schmidt: every column must keep a component of norm above `tol`
/// orthogonal to its predecessors.
///
/// This works on the singular-value scale of `X` itself, which separates
/// exact column dependence (residual at rounding level) from the benign
/// ill-conditioning of high-order polynomial feature bases, where Gram
/// pivots sit near machine precision while singular values do not.
pub fn columns_independent<F: Float>(x: &Matrix<F>, tol: F) -> bool {
    let n = x.nrows();
    let m = x.ncols();
    if n < m {
        return false;
    }
    let mut basis: Vec<Vec<F>> = Vec::with_capacity(m);
    for j in 0..m {
        let mut v = x.col(j).to_vec();
        for q in &basis {
            let proj = dot(q, &v);
            for (vi, &qi) in v.iter_mut().zip(q) {
                *vi -= proj * qi;
            }
        }
        // second orthogonalization pass for numerical stability
        for q in &basis {
            let proj = dot(q, &v);
            for (vi, &qi) in v.iter_mut().zip(q) {
                *vi -= proj * qi;
            }
        }
        let norm = norm2(&v);
        if norm <= tol {
            return false;
        }
        for vi in &mut v {
            *vi /= norm;
        }
        basis.push(v);
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn matvec_and_transpose() {
        let x = Matrix::from_rows(vec![vec![1.0, 2.0], vec![3.0, 4.0], vec![5.0, 6.0]]);
        assert_eq!(x.matvec(&[1.0, -1.0]), vec![-1.0, -1.0, -1.0]);
        assert_eq!(x.tr_matvec(&[1.0, 1.0, 1.0]), vec![9.0, 12.0]);
        assert_eq!(x.col(1), &[2.0, 4.0, 6.0]);
    }

    #[test]
    fn spd_solve_recovers_known_solution() {
        // A = [[4,1],[1,3]], x = (1, -2), b = A x.
        let a = vec![4.0, 1.0, 1.0, 3.0];
        let b = vec![2.0, -5.0];
        let x = spd_solve(&a, 2, &b).unwrap();
        assert_relative_eq!(x[0], 1.0, max_relative = 1e-14);
        assert_relative_eq!(x[1], -2.0, max_relative = 1e-14);
    }

    #[test]
    fn spd_solve_rejects_indefinite() {
        let a = vec![1.0, 2.0, 2.0, 1.0]; // eigenvalues 3, -1
        assert!(matches!(
            spd_solve(&a, 2, &[1.0, 1.0]),
            Err(Error::SingularGram)
        ));
    }

    #[test]
    fn gram_of_subset() {
        let x = Matrix::<f64>::from_columns(vec![
            vec![1.0, 0.0, 0.0],
            vec![0.0, 1.0, 0.0],
            vec![3.0, 4.0, 0.0],
        ]);
        let g = x.gram_of(&[0, 2]);
        assert_eq!(g, vec![1.0, 3.0, 3.0, 25.0]);
    }
}
