//! Small dense linear algebra shared by the geometry modules.
//!
//! Jet-valued systems (frame construction, screen projections) are solved by
//! an in-crate LU factorization generic over [`DiffScalar`]: pivots are chosen
//! by value-part magnitude only, so one evaluation follows a single smooth
//! branch and derivatives flow through the solve exactly.  Plain-`f64`
//! spectral work (kernel detection, nullspaces, least squares) is delegated
//! to nalgebra.

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

use crate::jetcalc::DiffScalar;

#[derive(Debug, Error)]
pub(crate) enum LinalgError {
    #[error("linear system is singular to working precision")]
    Singular,
}

/// Dense row-major matrix of jets.
#[derive(Debug, Clone)]
pub struct JetMatrix {
    pub rows: usize,
    pub cols: usize,
    data: Vec<DiffScalar>,
}

impl JetMatrix {
    pub fn zeros(rows: usize, cols: usize, depth: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![DiffScalar::c(0.0, depth); rows * cols],
        }
    }

    pub fn from_fn<F: FnMut(usize, usize) -> DiffScalar>(
        rows: usize,
        cols: usize,
        mut f: F,
    ) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        Self { rows, cols, data }
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> DiffScalar {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: DiffScalar) {
        self.data[r * self.cols + c] = v;
    }

    /// Transposed matrix-vector product.
    #[allow(clippy::needless_range_loop)]
    pub fn tr_mul_vec(&self, x: &[DiffScalar]) -> Vec<DiffScalar> {
        assert_eq!(self.rows, x.len());
        (0..self.cols)
            .map(|c| {
                let mut acc = self.get(0, c) * x[0];
                for r in 1..self.rows {
                    acc = acc + self.get(r, c) * x[r];
                }
                acc
            })
            .collect()
    }

    /// Matrix product.
    pub fn mul(&self, rhs: &JetMatrix) -> JetMatrix {
        assert_eq!(self.cols, rhs.rows);
        JetMatrix::from_fn(self.rows, rhs.cols, |r, c| {
            let mut acc = self.get(r, 0) * rhs.get(0, c);
            for k in 1..self.cols {
                acc = acc + self.get(r, k) * rhs.get(k, c);
            }
            acc
        })
    }

    /// Gram matrix `A A^T`.
    pub fn aat(&self) -> JetMatrix {
        JetMatrix::from_fn(self.rows, self.rows, |i, j| {
            let mut acc = self.get(i, 0) * self.get(j, 0);
            for k in 1..self.cols {
                acc = acc + self.get(i, k) * self.get(j, k);
            }
            acc
        })
    }

    /// Value parts as an nalgebra matrix.
    pub fn value_matrix(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.rows, self.cols, |r, c| self.get(r, c).value())
    }
}

/// Solve a square jet-valued system by LU with value-part partial pivoting.
///
/// The singularity test is relative to the largest value-part magnitude of
/// the input matrix.
#[allow(clippy::needless_range_loop)]
pub(crate) fn lu_solve(a: &JetMatrix, b: &[DiffScalar]) -> Result<Vec<DiffScalar>, LinalgError> {
    let n = a.rows;
    assert_eq!(a.cols, n, "lu_solve needs a square matrix");
    assert_eq!(b.len(), n);
    let mut m = a.clone();
    let mut x = b.to_vec();
    let scale = (0..n)
        .flat_map(|r| (0..n).map(move |c| (r, c)))
        .map(|(r, c)| m.get(r, c).value().abs())
        .fold(0.0_f64, f64::max);
    let floor = 1e-13 * scale.max(f64::MIN_POSITIVE);
    for col in 0..n {
        let pivot_row = (col..n)
            .max_by(|&r1, &r2| {
                m.get(r1, col)
                    .value()
                    .abs()
                    .total_cmp(&m.get(r2, col).value().abs())
            })
            .expect("non-empty pivot range");
        if m.get(pivot_row, col).value().abs() <= floor {
            return Err(LinalgError::Singular);
        }
        if pivot_row != col {
            for c in 0..n {
                let tmp = m.get(col, c);
                m.set(col, c, m.get(pivot_row, c));
                m.set(pivot_row, c, tmp);
            }
            x.swap(col, pivot_row);
        }
        let pivot = m.get(col, col);
        for r in col + 1..n {
            let factor = m.get(r, col) / pivot;
            for c in col..n {
                let v = m.get(r, c) - factor * m.get(col, c);
                m.set(r, c, v);
            }
            x[r] = x[r] - factor * x[col];
        }
    }
    for r in (0..n).rev() {
        let mut acc = x[r];
        for c in r + 1..n {
            acc = acc - m.get(r, c) * x[c];
        }
        x[r] = acc / m.get(r, r);
    }
    Ok(x)
}

/// Minimum-Euclidean-norm solution of an underdetermined system `A z = b`.
///
/// Computed as `z = A^T (A A^T)^{-1} b`.  Any two solutions of the system
/// differ by a kernel vector of `A`, and the callers rely on the documented
/// invariance of their constructions under that ambiguity.
pub(crate) fn min_norm_solve(
    a: &JetMatrix,
    b: &[DiffScalar],
) -> Result<Vec<DiffScalar>, LinalgError> {
    assert!(a.rows <= a.cols, "system must be underdetermined or square");
    let y = lu_solve(&a.aat(), b)?;
    Ok(a.tr_mul_vec(&y))
}

/// Eigen-decomposition of a symmetric value matrix, ascending eigenvalues.
///
/// Returns `(eigenvalues, eigenvectors)` with `eigenvectors[k]` the unit
/// eigenvector of `eigenvalues[k]`.
pub(crate) fn sym_eigen_ascending(m: &DMatrix<f64>) -> (Vec<f64>, Vec<DVector<f64>>) {
    let eig = nalgebra::SymmetricEigen::new(m.clone());
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = order
        .iter()
        .map(|&i| eig.eigenvectors.column(i).into_owned())
        .collect();
    (values, vectors)
}

/// Orthonormal nullspace of a real matrix with two columns.
///
/// A right singular vector belongs to the nullspace when its singular value
/// is at most `rel_tol` times the largest one (everything is kernel for the
/// zero matrix).
pub(crate) fn nullspace_2(m: &DMatrix<f64>, rel_tol: f64) -> Vec<[f64; 2]> {
    assert_eq!(m.ncols(), 2);
    let svd = nalgebra::SVD::new(m.clone(), false, true);
    let v_t = svd.v_t.expect("right singular vectors requested");
    let sigma_max = svd.singular_values.iter().cloned().fold(0.0_f64, f64::max);
    let mut kernel = Vec::new();
    for (k, &s) in svd.singular_values.iter().enumerate() {
        if s <= rel_tol * sigma_max || sigma_max == 0.0 {
            kernel.push([v_t[(k, 0)], v_t[(k, 1)]]);
        }
    }
    // A wide matrix can have fewer singular triples than columns.
    if svd.singular_values.len() < 2 && kernel.len() < 2 - svd.singular_values.len() {
        // Only possible for a 1 x 2 input: complete with the orthogonal
        // complement of the row space.
        let row = m.row(0);
        let norm = (row[0] * row[0] + row[1] * row[1]).sqrt();
        if norm == 0.0 {
            return vec![[1.0, 0.0], [0.0, 1.0]];
        }
        kernel.push([-row[1] / norm, row[0] / norm]);
    }
    kernel
}

/// Orthonormal basis of the row space of a real matrix with two columns.
///
/// A right singular vector spans part of the row space when its singular
/// value exceeds `rel_tol` times the largest one.
pub(crate) fn rowspace_2(m: &DMatrix<f64>, rel_tol: f64) -> Vec<[f64; 2]> {
    assert_eq!(m.ncols(), 2);
    let svd = nalgebra::SVD::new(m.clone(), false, true);
    let v_t = svd.v_t.expect("right singular vectors requested");
    let sigma_max = svd.singular_values.iter().cloned().fold(0.0_f64, f64::max);
    let mut basis = Vec::new();
    for (k, &s) in svd.singular_values.iter().enumerate() {
        if sigma_max > 0.0 && s > rel_tol * sigma_max {
            basis.push([v_t[(k, 0)], v_t[(k, 1)]]);
        }
    }
    basis
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jetcalc::lift;

    fn c(x: f64) -> DiffScalar {
        DiffScalar::c(x, 0)
    }

    #[test]
    fn lu_solves_a_plain_system() {
        let a = JetMatrix::from_fn(2, 2, |r, cix| c([[2.0, 1.0], [1.0, 3.0]][r][cix]));
        let x = lu_solve(&a, &[c(5.0), c(10.0)]).unwrap();
        assert!((x[0].value() - 1.0).abs() < 1e-14);
        assert!((x[1].value() - 3.0).abs() < 1e-14);
    }

    #[test]
    fn lu_propagates_derivatives() {
        // Solve [[t, 0], [0, 1]] x = [1, 1]; x0 = 1/t, so dx0/dt = -1/t^2.
        let t = lift(2.0, 1).unwrap();
        let one = DiffScalar::c(1.0, 1);
        let zero = DiffScalar::c(0.0, 1);
        let a = JetMatrix::from_fn(2, 2, |r, cix| match (r, cix) {
            (0, 0) => t,
            (1, 1) => one,
            _ => zero,
        });
        let x = lu_solve(&a, &[one, one]).unwrap();
        let (_, dx0) = x[0].extract();
        assert!((x[0].value() - 0.5).abs() < 1e-14);
        assert!((dx0.value() + 0.25).abs() < 1e-14);
    }

    #[test]
    fn singular_systems_are_rejected() {
        let a = JetMatrix::from_fn(2, 2, |r, cix| c([[1.0, 2.0], [2.0, 4.0]][r][cix]));
        assert!(lu_solve(&a, &[c(1.0), c(1.0)]).is_err());
    }

    #[test]
    fn min_norm_picks_the_shortest_solution() {
        // Single equation x + y = 2; minimum-norm solution is (1, 1).
        let a = JetMatrix::from_fn(1, 2, |_, _| c(1.0));
        let z = min_norm_solve(&a, &[c(2.0)]).unwrap();
        assert!((z[0].value() - 1.0).abs() < 1e-14);
        assert!((z[1].value() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn eigenvalues_come_back_sorted() {
        let m = DMatrix::from_row_slice(3, 3, &[0.0, 0.0, 0.0, 0.0, 4.0, 0.0, 0.0, 0.0, 9.0]);
        let (vals, vecs) = sym_eigen_ascending(&m);
        assert!((vals[0] - 0.0).abs() < 1e-12);
        assert!((vals[1] - 4.0).abs() < 1e-12);
        assert!((vals[2] - 9.0).abs() < 1e-12);
        assert!((vecs[0][0].abs() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn nullspace_of_rank_one_two_column_matrix() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 4.0]);
        let kernel = nullspace_2(&m, 1e-10);
        assert_eq!(kernel.len(), 1);
        let [a, b] = kernel[0];
        assert!((a + 2.0 * b).abs() < 1e-12);
    }

    #[test]
    fn nullspace_of_zero_matrix_is_everything() {
        let m = DMatrix::zeros(4, 2);
        assert_eq!(nullspace_2(&m, 1e-10).len(), 2);
    }
}
