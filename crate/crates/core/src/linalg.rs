//! Thin wrappers over nalgebra's dense decompositions, specialised to the
//! complex matrices used throughout the crate.

use nalgebra::{DMatrix, DVector, SymmetricEigen, SVD};

use crate::error::{Error, Result};
use crate::scalar::{CMatrix, Complex, Real};

const MAX_SWEEPS: usize = 50_000;

pub fn frobenius<T: Real>(m: &CMatrix<T>) -> T {
    m.iter().fold(T::zero(), |acc, z| acc + z.norm_sqr()).sqrt()
}

pub fn adjoint<T: Real>(m: &CMatrix<T>) -> CMatrix<T> {
    m.adjoint()
}

pub fn commutator<T: Real>(a: &CMatrix<T>, b: &CMatrix<T>) -> CMatrix<T> {
    a * b - b * a
}

/// Frobenius inner product `tr(B* A)`.
pub fn frobenius_inner<T: Real>(a: &CMatrix<T>, b: &CMatrix<T>) -> Complex<T> {
    a.iter()
        .zip(b.iter())
        .fold(Complex::new(T::zero(), T::zero()), |acc, (x, y)| acc + x * y.conj())
}

/// Singular values in descending order.
pub fn singular_values<T: Real>(m: &CMatrix<T>) -> Result<Vec<T>> {
    if m.is_empty() {
        return Ok(Vec::new());
    }
    let svd = SVD::try_new(m.clone(), false, false, T::default_epsilon(), MAX_SWEEPS)
        .ok_or(Error::NoConvergence("singular value decomposition"))?;
    let mut s: Vec<T> = svd.singular_values.iter().copied().collect();
    s.sort_by(|a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));
    Ok(s)
}

pub fn spectral_norm<T: Real>(m: &CMatrix<T>) -> Result<T> {
    Ok(singular_values(m)?.first().copied().unwrap_or_else(T::zero))
}

/// Full right-singular system of `m`: singular values (descending, padded with
/// zeros up to the column count) and the matching right singular vectors.
pub struct RightSingular<T: Real> {
    pub values: Vec<T>,
    pub vectors: Vec<DVector<Complex<T>>>,
}

pub fn right_singular<T: Real>(m: &CMatrix<T>) -> Result<RightSingular<T>> {
    let cols = m.ncols();
    // a wide matrix has a thin V; pad with zero rows so V is square
    let work = if m.nrows() < cols {
        let mut padded = CMatrix::<T>::zeros(cols, cols);
        padded.view_mut((0, 0), (m.nrows(), cols)).copy_from(m);
        padded
    } else {
        m.clone()
    };
    let svd = SVD::try_new(work, false, true, T::default_epsilon(), MAX_SWEEPS)
        .ok_or(Error::NoConvergence("singular value decomposition"))?;
    let v_t = svd.v_t.expect("requested right singular vectors");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| {
        svd.singular_values[b]
            .partial_cmp(&svd.singular_values[a])
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let values = order.iter().map(|&k| svd.singular_values[k]).collect();
    let vectors = order
        .iter()
        .map(|&k| v_t.row(k).transpose().map(|z| z.conj()))
        .collect();
    Ok(RightSingular { values, vectors })
}

/// Eigen-decomposition of a Hermitian matrix, eigenvalues ascending.
pub fn hermitian_eigen<T: Real>(m: &CMatrix<T>) -> Result<(Vec<T>, CMatrix<T>)> {
    let herm = (m + m.adjoint()).scale(T::lit(0.5));
    let eig = SymmetricEigen::try_new(herm, T::default_epsilon(), MAX_SWEEPS)
        .ok_or(Error::NoConvergence("Hermitian eigen-decomposition"))?;
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| {
        eig.eigenvalues[a]
            .partial_cmp(&eig.eigenvalues[b])
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vectors = DMatrix::from_fn(m.nrows(), order.len(), |i, j| eig.eigenvectors[(i, order[j])]);
    Ok((values, vectors))
}

/// Column-major vectorisation, matching `vec(X)` in `(Bᵀ ⊗ A) vec(X) = vec(A X B)`.
pub fn vectorize<T: Real>(m: &CMatrix<T>) -> DVector<Complex<T>> {
    DVector::from_iterator(m.len(), m.iter().copied())
}

pub fn unvectorize<T: Real>(v: &DVector<Complex<T>>, rows: usize, cols: usize) -> CMatrix<T> {
    CMatrix::from_iterator(rows, cols, v.iter().copied())
}

/// Projection of `x` onto the span of Frobenius-orthonormal `basis`, and the
/// Frobenius norm of the remainder.
pub fn span_residual<T: Real>(x: &CMatrix<T>, basis: &[CMatrix<T>]) -> T {
    let mut rem = x.clone();
    for b in basis {
        let coeff = frobenius_inner(x, b);
        rem -= b * coeff;
    }
    frobenius(&rem)
}
