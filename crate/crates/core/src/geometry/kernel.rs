use serde::{Deserialize, Serialize};

use super::spectrum_estimate;
use crate::error::{Error, Result};
use crate::operators::{power_matrix, shift_matrix};
use crate::scalar::{cabs, Complex, Real};
use crate::spaces::{LaurentSeries, WeightSequence, Window};

/// Relative size of the edge terms of `‖k_ω‖²` below which the window is
/// considered to hold the kernel.
pub const KERNEL_TAIL_TOL: f64 = 1e-12;

/// Relative margin kept from the estimated spectral radii.
const KERNEL_MARGIN: f64 = 0.02;

/// Truncated reproducing kernel `k_ω = Σ ω̄^m / β(m)² · z^m`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KernelVector<T> {
    pub omega: Complex<T>,
    pub window: Window,
    /// Monomial coefficients `k̂(m)`.
    pub coeffs: Vec<Complex<T>>,
    /// `Σ |ω|^{2m} / β(m)²` over the window.
    pub norm_sq: T,
    /// Largest edge term of `norm_sq` relative to `norm_sq`.
    pub tail_ratio: T,
}

impl<T: Real> KernelVector<T> {
    /// Coordinates in the orthonormal basis `e_m = z^m/β(m)`: `ω̄^m / β(m)`.
    pub fn orthonormal(&self, w: &WeightSequence<T>) -> nalgebra::DVector<Complex<T>> {
        nalgebra::DVector::from_iterator(
            self.coeffs.len(),
            self.coeffs.iter().zip(w.betas()).map(|(k, &b)| k * b),
        )
    }

    /// `(f, k_ω) = Σ f̂(m) conj(k̂(m)) β(m)²`, which reproduces `f(ω)` for `f`
    /// supported in the window.
    pub fn pair(&self, f: &LaurentSeries<T>, w: &WeightSequence<T>) -> Complex<T> {
        let k = LaurentSeries::from_pairs(self.window.indices().zip(self.coeffs.iter().copied()));
        f.inner(&k, w)
    }

    /// Edge terms are below [`KERNEL_TAIL_TOL`] of the accumulated norm.
    pub fn tail_ok(&self) -> bool {
        self.tail_ratio < T::lit(KERNEL_TAIL_TOL)
    }
}

/// `ln(|ω|^{2m}/β(m)²)`.
fn log_term<T: Real>(omega: Complex<T>, m: i64, beta: T) -> T {
    T::lit(2.0) * (T::from_index(m) * cabs(omega).ln() - beta.ln())
}

pub(crate) fn kernel_unchecked<T: Real>(w: &WeightSequence<T>, omega: Complex<T>) -> Result<KernelVector<T>> {
    let modulus = cabs(omega);
    if modulus == T::zero() {
        return Err(Error::Domain("kernel at the origin".into()));
    }
    let theta = omega.im.atan2(omega.re);
    let mut coeffs = Vec::with_capacity(w.len());
    let mut norm_sq = T::zero();
    for (m, &beta) in w.window().indices().zip(w.betas()) {
        let mf = T::from_index(m);
        let magnitude = (mf * modulus.ln() - T::lit(2.0) * beta.ln()).exp();
        coeffs.push(Complex::new((mf * theta).cos(), -(mf * theta).sin()) * magnitude);
        norm_sq += log_term(omega, m, beta).exp();
    }
    let edge = log_term(omega, w.lo(), w.betas()[0]).exp().max(log_term(omega, w.hi(), *w.betas().last().unwrap()).exp());
    Ok(KernelVector { omega, window: w.window(), coeffs, norm_sq, tail_ratio: edge / norm_sq })
}

/// Reproducing kernel at `ω`, which must sit strictly inside the estimated
/// spectral annulus with a 2% margin on each radius.
pub fn kernel<T: Real>(w: &WeightSequence<T>, omega: Complex<T>) -> Result<KernelVector<T>> {
    let spec = spectrum_estimate(w)?;
    let modulus = cabs(omega);
    if !spec.admits(modulus, T::lit(KERNEL_MARGIN)) {
        return Err(Error::Domain(format!(
            "|ω| = {modulus} outside the admissible annulus ({}, {})",
            spec.inner_radius,
            spec.outer_radius
        )));
    }
    kernel_unchecked(w, omega)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NullspaceReport<T> {
    pub lambda: Complex<T>,
    pub n: usize,
    /// `‖(A − λⁿ)* k_{λω_k}‖ / ‖k_{λω_k}‖` for each root `ω_k`.
    pub residuals: Vec<T>,
    pub max_residual: T,
    pub tol: T,
    pub passed: bool,
    /// `λ` lies outside the kernel margin; residuals are then expected to be
    /// large and only reported.
    pub out_of_margin: bool,
}

/// Checks that the kernels at the `n` points `λω_k` lie in `ker (A − λⁿ)*`
/// for the truncated `A = M_{z^n}`.
pub fn kernel_nullspace_check<T: Real>(
    w: &WeightSequence<T>,
    n: usize,
    lambda: Complex<T>,
    tol: T,
) -> Result<NullspaceReport<T>> {
    let a = power_matrix(&shift_matrix(w)?, n)?;
    let adj = a.adjoint()?;
    let lam_n = lambda.powi(n as i32).conj();
    let spec = spectrum_estimate(w)?;
    let out_of_margin = !spec.admits(cabs(lambda), T::lit(KERNEL_MARGIN));
    let mut residuals = Vec::with_capacity(n);
    for root in crate::scalar::roots_of_unity::<T>(n) {
        let k = kernel_unchecked(w, lambda * root)?;
        let v = k.orthonormal(w);
        let image: nalgebra::DVector<Complex<T>> = &adj * &v - &v * lam_n;
        residuals.push(image.norm() / v.norm());
    }
    let max_residual = residuals.iter().fold(T::zero(), |a, &b| a.max(b));
    Ok(NullspaceReport { lambda, n, residuals, max_residual, tol, passed: max_residual <= tol, out_of_margin })
}
