//! Truncated matrices of shifts, shift powers and multiplication operators.
//!
//! Every matrix is the compression of the infinite operator to the basis
//! window `[lo, hi]`: a column whose image would leave the window is cut off.
//! Two coordinate systems are in play and the type records which one a
//! matrix lives in. The orthogonal basis is the monomials `z^m`; the
//! orthonormal basis is `e_m = z^m / β(m)`. Adjoints are conjugate
//! transposes only in the orthonormal basis.

use std::fmt::Write as _;
use std::io::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Annulus;
use crate::linalg;
use crate::scalar::{c, cabs, cis, CMatrix, Complex, Real};
use crate::spaces::{LaurentSeries, WeightSequence, Window};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BasisMode {
    Orthogonal,
    Orthonormal,
}

#[derive(Clone, Debug)]
pub struct TruncatedOperator<T: Real> {
    matrix: CMatrix<T>,
    window: Window,
    mode: BasisMode,
    weights: Option<WeightSequence<T>>,
}

impl<T: Real> TruncatedOperator<T> {
    /// Wraps an arbitrary square matrix labelled by `window`.
    pub fn from_matrix(matrix: CMatrix<T>, window: Window, mode: BasisMode) -> Result<Self> {
        if !matrix.is_square() || matrix.nrows() != window.len() {
            return Err(Error::InvalidParameter(format!(
                "{}x{} matrix does not match window {window}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        Ok(TruncatedOperator { matrix, window, mode, weights: None })
    }

    pub fn identity(window: Window, mode: BasisMode) -> Self {
        let d = window.len();
        TruncatedOperator { matrix: CMatrix::identity(d, d), window, mode, weights: None }
    }

    pub fn matrix(&self) -> &CMatrix<T> {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix<T> {
        self.matrix
    }

    pub fn window(&self) -> Window {
        self.window
    }

    pub fn mode(&self) -> BasisMode {
        self.mode
    }

    pub fn weights(&self) -> Option<&WeightSequence<T>> {
        self.weights.as_ref()
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// Entry `(m, k)` addressed by basis labels.
    pub fn entry(&self, m: i64, k: i64) -> Complex<T> {
        self.matrix[(self.window.offset(m), self.window.offset(k))]
    }

    pub fn require_orthonormal(&self) -> Result<()> {
        match self.mode {
            BasisMode::Orthonormal => Ok(()),
            BasisMode::Orthogonal => Err(Error::BasisMode),
        }
    }

    /// Conjugate transpose; only meaningful in the orthonormal basis.
    pub fn adjoint(&self) -> Result<CMatrix<T>> {
        self.require_orthonormal()?;
        Ok(self.matrix.adjoint())
    }

    /// Rows `(row, col, re, im)` with basis labels, one per nonzero entry.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("row,col,re,im\n");
        for (j, k) in self.window.indices().enumerate() {
            for (i, m) in self.window.indices().enumerate() {
                let z = self.matrix[(i, j)];
                if z.re != T::zero() || z.im != T::zero() {
                    let _ = writeln!(out, "{m},{k},{:e},{:e}", z.re.as_f64(), z.im.as_f64());
                }
            }
        }
        out
    }

    pub fn write_csv(&self, path: &std::path::Path) -> Result<()> {
        let mut f = std::fs::File::create(path)?;
        f.write_all(self.to_csv().as_bytes())?;
        Ok(())
    }
}

/// A multiplier symbol `φ` together with a grid estimate of `sup |φ|`.
#[derive(Clone, Debug, PartialEq)]
pub struct MultiplierSymbol<T: Real> {
    pub series: LaurentSeries<T>,
    pub sup_estimate: Option<T>,
}

impl<T: Real> MultiplierSymbol<T> {
    pub fn new(series: LaurentSeries<T>) -> Self {
        MultiplierSymbol { series, sup_estimate: None }
    }

    /// Attaches `max |φ|` over a polar grid of `annulus`.
    pub fn with_sup(mut self, annulus: Annulus<T>, radial: usize, angular: usize) -> Self {
        self.sup_estimate = Some(grid_sup(&self.series, annulus, radial, angular));
        self
    }
}

pub fn grid_sup<T: Real>(phi: &LaurentSeries<T>, annulus: Annulus<T>, radial: usize, angular: usize) -> T {
    let radial = radial.max(2);
    let mut best = T::zero();
    for i in 0..radial {
        let t = T::from_usize(i).unwrap() / T::from_usize(radial - 1).unwrap();
        let rho = annulus.inner + (annulus.outer - annulus.inner) * t;
        for j in 0..angular.max(1) {
            let theta = T::two_pi() * T::from_usize(j).unwrap() / T::from_usize(angular.max(1)).unwrap();
            let v = cabs(phi.eval(cis(theta) * rho));
            if v > best {
                best = v;
            }
        }
    }
    best
}

/// Truncated `M_z` in the orthonormal basis: `(m+1, m) ↦ λ_m`.
pub fn shift_matrix<T: Real>(w: &WeightSequence<T>) -> Result<TruncatedOperator<T>> {
    if w.len() < 2 {
        return Err(Error::WindowTooShort { need: 2, have: w.len() });
    }
    let d = w.len();
    let mut matrix = CMatrix::zeros(d, d);
    for (j, lambda) in w.lambdas().into_iter().enumerate() {
        matrix[(j + 1, j)] = c(lambda);
    }
    Ok(TruncatedOperator { matrix, window: w.window(), mode: BasisMode::Orthonormal, weights: Some(w.clone()) })
}

/// `Aⁿ` by repeated multiplication.
pub fn power_matrix<T: Real>(a: &TruncatedOperator<T>, n: usize) -> Result<TruncatedOperator<T>> {
    if n < 1 {
        return Err(Error::InvalidParameter("power must be at least 1".into()));
    }
    let mut matrix = a.matrix.clone();
    for _ in 1..n {
        matrix = &matrix * &a.matrix;
    }
    Ok(TruncatedOperator { matrix, ..a.clone() })
}

/// Truncated `M_φ`. In the orthogonal basis entry `(m, k)` is `φ̂(m-k)`; in the
/// orthonormal basis it is `φ̂(m-k)·β(m)/β(k)`.
pub fn multiplier_matrix<T: Real>(
    phi: &LaurentSeries<T>,
    w: &WeightSequence<T>,
    mode: BasisMode,
) -> Result<TruncatedOperator<T>> {
    let window = w.window();
    let span = (window.len() - 1) as i64;
    let clipped: Vec<i64> = phi.iter().map(|(p, _)| p).filter(|p| p.abs() > span).collect();
    if !clipped.is_empty() {
        return Err(Error::SupportOverflow(clipped));
    }
    let d = window.len();
    let betas = w.betas();
    let mut matrix = CMatrix::zeros(d, d);
    for (p, coeff) in phi.iter() {
        for j in 0..d {
            let i = j as i64 + p;
            if i < 0 || i >= d as i64 {
                continue;
            }
            let i = i as usize;
            matrix[(i, j)] = match mode {
                BasisMode::Orthogonal => coeff,
                BasisMode::Orthonormal => coeff * (betas[i] / betas[j]),
            };
        }
    }
    Ok(TruncatedOperator { matrix, window, mode, weights: Some(w.clone()) })
}

/// `[A*, A] = A*A − AA*`.
pub fn self_commutator<T: Real>(a: &TruncatedOperator<T>) -> Result<TruncatedOperator<T>> {
    let adj = a.adjoint()?;
    let matrix = &adj * &a.matrix - &a.matrix * &adj;
    Ok(TruncatedOperator { matrix, ..a.clone() })
}

/// Largest singular value.
pub fn operator_norm<T: Real>(a: &TruncatedOperator<T>) -> Result<T> {
    linalg::spectral_norm(&a.matrix)
}

/// Diagonal 0/1 projection onto the indices `≡ k (mod n)` of `window`.
pub fn residue_projection<T: Real>(window: Window, n: usize, k: usize) -> CMatrix<T> {
    let d = window.len();
    let mut p = CMatrix::zeros(d, d);
    for (i, m) in window.indices().enumerate() {
        if m.rem_euclid(n as i64) as usize == k {
            p[(i, i)] = c(T::one());
        }
    }
    p
}

/// Conjugates an orthonormal-basis matrix into monomial coordinates,
/// `X_mono = D⁻¹ X D` with `D = diag(β)`.
pub fn to_monomial<T: Real>(x: &CMatrix<T>, w: &WeightSequence<T>) -> CMatrix<T> {
    let b = w.betas();
    CMatrix::from_fn(x.nrows(), x.ncols(), |i, j| x[(i, j)] * (b[j] / b[i]))
}

/// Inverse of [`to_monomial`].
pub fn to_orthonormal<T: Real>(x: &CMatrix<T>, w: &WeightSequence<T>) -> CMatrix<T> {
    let b = w.betas();
    CMatrix::from_fn(x.nrows(), x.ncols(), |i, j| x[(i, j)] * (b[i] / b[j]))
}
