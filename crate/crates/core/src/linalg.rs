//! Small dense helpers bridging ndarray storage and nalgebra decompositions.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use ndarray::Array2;

use crate::error::{Error, Result};

pub(crate) fn to_na(a: &Array2<f64>) -> DMatrix<f64> {
    DMatrix::from_fn(a.nrows(), a.ncols(), |i, j| a[[i, j]])
}

pub(crate) fn from_na(m: &DMatrix<f64>) -> Array2<f64> {
    Array2::from_shape_fn((m.nrows(), m.ncols()), |(i, j)| m[(i, j)])
}

/// Eigen-decomposition of a symmetric matrix, eigenvalues descending,
/// eigenvectors as columns.
pub(crate) fn sym_eig_desc(m: &DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let sym = (m + m.transpose()) * 0.5;
    let eig = SymmetricEigen::new(sym);
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = DMatrix::from_fn(m.nrows(), order.len(), |r, c| eig.eigenvectors[(r, order[c])]);
    (values, vectors)
}

/// `(M Mᵀ)^{-1/2} M`, the symmetric decorrelation used by FastICA.
pub(crate) fn symmetric_decorrelation(w: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let (vals, vecs) = sym_eig_desc(&(w * w.transpose()));
    if vals.iter().any(|&v| !(v > 0.0)) {
        return Err(Error::Numerical("rank-deficient unmixing estimate".into()));
    }
    let d = DVector::from_iterator(vals.len(), vals.iter().map(|v| 1.0 / v.sqrt()));
    Ok(&vecs * DMatrix::from_diagonal(&d) * vecs.transpose() * w)
}

/// Solves `A v = λ B v` for symmetric `A` and symmetric positive-definite
/// `B`. Eigenvalues descending; eigenvectors as columns, `B`-orthonormal.
pub(crate) fn generalized_eig(a: &DMatrix<f64>, b: &DMatrix<f64>) -> Result<(Vec<f64>, DMatrix<f64>)> {
    let chol = b
        .clone()
        .cholesky()
        .ok_or_else(|| Error::Numerical("composite covariance is not positive definite".into()))?;
    let l = chol.l();
    let l_inv = l
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::Numerical("singular Cholesky factor".into()))?;
    let m = &l_inv * a * l_inv.transpose();
    let (vals, u) = sym_eig_desc(&m);
    let v = l_inv.transpose() * u;
    Ok((vals, v))
}
