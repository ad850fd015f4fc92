//! Unitary invariants of weighted shifts: weight alignment, restriction
//! sub-shifts, spectral radii, reproducing kernels and line-bundle curvature.

mod align;
mod curvature;
mod kernel;

pub use align::{restriction_shift, restriction_weights, weights_align, IndexedWeights};
pub use curvature::{
    curvature_at, curvature_exact, curvature_field, log_kernel_norm_sq, restriction_curvatures_distinct, richardson_ratio,
    stencil_error, CurvatureField, CurvatureSample, GridSpec, RestrictionCurvatureReport, RESTRICTION_TAIL_TOL,
};
pub use kernel::{kernel, kernel_nullspace_check, KernelVector, NullspaceReport, KERNEL_TAIL_TOL};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::spaces::WeightSequence;

/// Closed annulus `{inner ≤ |z| ≤ outer}`; `inner = 0` is a disk.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Annulus<T> {
    pub inner: T,
    pub outer: T,
}

impl<T: Real> Annulus<T> {
    pub fn new(inner: T, outer: T) -> Result<Self> {
        if !(inner >= T::zero() && inner <= outer) {
            return Err(Error::Domain(format!("invalid annulus radii {inner}, {outer}")));
        }
        Ok(Annulus { inner, outer })
    }

    /// The unit-outer annulus `{r < |z| < 1}`.
    pub fn unit(r: T) -> Self {
        Annulus { inner: r, outer: T::one() }
    }

    /// Shrinks by `δ` on both sides.
    pub fn shrink(&self, delta: T) -> Self {
        Annulus { inner: self.inner + delta, outer: self.outer - delta }
    }
}

/// Estimated spectral radii: `outer ≈ r(M_z)`, `inner ≈ 1/r(M_z⁻¹)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectrumEstimate<T> {
    pub inner_radius: T,
    pub outer_radius: T,
}

impl<T: Real> SpectrumEstimate<T> {
    pub fn annulus(&self) -> Annulus<T> {
        Annulus { inner: self.inner_radius, outer: self.outer_radius }
    }

    /// `|ω|` strictly inside, with a relative margin on both radii.
    pub fn admits(&self, modulus: T, margin: T) -> bool {
        modulus > self.inner_radius * (T::one() + margin) && modulus < self.outer_radius * (T::one() - margin)
    }
}

/// Extreme geometric means of `λ` over sliding blocks of a quarter of the
/// window. Powers `‖Aᵏ‖^{1/k}` are useless here because truncation makes the
/// matrix nilpotent.
pub fn spectrum_estimate<T: Real>(w: &WeightSequence<T>) -> Result<SpectrumEstimate<T>> {
    if w.len() < 2 {
        return Err(Error::WindowTooShort { need: 2, have: w.len() });
    }
    let logs: Vec<T> = w.lambdas().iter().map(|l| l.ln()).collect();
    let k = (w.len() / 4).clamp(1, logs.len());
    let scale = T::from_usize(k).unwrap();
    let mut sum: T = logs[..k].iter().fold(T::zero(), |a, &b| a + b);
    let (mut lo, mut hi) = (sum, sum);
    for j in k..logs.len() {
        sum += logs[j] - logs[j - k];
        lo = lo.min(sum);
        hi = hi.max(sum);
    }
    Ok(SpectrumEstimate { inner_radius: (lo / scale).exp(), outer_radius: (hi / scale).exp() })
}

/// Rows `(x, y, value)` for external plotting.
pub fn field_csv<T: Real>(points: &[crate::scalar::Complex<T>], values: &[T]) -> String {
    use std::fmt::Write as _;
    let mut out = String::from("x,y,value\n");
    for (p, v) in points.iter().zip(values) {
        let _ = writeln!(out, "{:e},{:e},{:e}", p.re.as_f64(), p.im.as_f64(), v.as_f64());
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spaces::{make_weights, SpaceKind, Window};

    #[test]
    fn spectrum_examples() {
        let flat = make_weights::<f64>(&SpaceKind::Flat, Window::symmetric(32)).unwrap();
        let s = spectrum_estimate(&flat).unwrap();
        assert!((s.inner_radius - 1.0).abs() < 1e-15 && (s.outer_radius - 1.0).abs() < 1e-15);

        let geo = make_weights(&SpaceKind::Geometric { s: 0.7 }, Window::symmetric(32)).unwrap();
        let s = spectrum_estimate(&geo).unwrap();
        assert!((s.inner_radius - 0.7f64).abs() < 1e-12 && (s.outer_radius - 0.7f64).abs() < 1e-12);

        let berg = make_weights(&SpaceKind::BergmanAnnulus { r: 0.5 }, Window::symmetric(128)).unwrap();
        let s = spectrum_estimate(&berg).unwrap();
        assert!((s.inner_radius - 0.5f64).abs() < 0.02, "{}", s.inner_radius);
        assert!((s.outer_radius - 1.0f64).abs() < 0.02, "{}", s.outer_radius);
        assert!(s.inner_radius <= s.outer_radius);
    }
}
