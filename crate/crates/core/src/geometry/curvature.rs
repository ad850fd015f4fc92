//! Curvature of the line bundle spanned by the reproducing kernels.
//!
//! We report `K(ω) = −Δ log ‖k_ω‖²` with the real Laplacian `Δ = ∂²_x + ∂²_y`,
//! evaluated by the 5-point stencil. This is `−4 ∂∂̄ log ‖k_ω‖²`; only signs and
//! differences are compared, so the factor is fixed here once.

use serde::{Deserialize, Serialize};

use super::kernel::kernel_unchecked;
use super::{restriction_shift, spectrum_estimate, Annulus};
use crate::error::{Error, Result};
use crate::scalar::{cabs, cis, Complex, Real};
use crate::spaces::WeightSequence;

/// Polar sample grid: `radial` radii from `inner_radius` to `outer_radius`
/// (one radius if `radial == 1`), `angular` equally spaced angles.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec<T> {
    pub inner_radius: T,
    pub outer_radius: T,
    pub radial: usize,
    pub angular: usize,
}

impl<T: Real> GridSpec<T> {
    pub fn single(omega_modulus: T) -> Self {
        GridSpec { inner_radius: omega_modulus, outer_radius: omega_modulus, radial: 1, angular: 1 }
    }

    pub fn points(&self) -> Vec<Complex<T>> {
        let radial = self.radial.max(1);
        let angular = self.angular.max(1);
        let mut pts = Vec::with_capacity(radial * angular);
        for i in 0..radial {
            let rho = if radial == 1 {
                self.inner_radius
            } else {
                let t = T::from_usize(i).unwrap() / T::from_usize(radial - 1).unwrap();
                self.inner_radius + (self.outer_radius - self.inner_radius) * t
            };
            for j in 0..angular {
                let theta = T::two_pi() * T::from_usize(j).unwrap() / T::from_usize(angular).unwrap();
                pts.push(cis(theta) * rho);
            }
        }
        pts
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurvatureField<T> {
    pub grid: Vec<Complex<T>>,
    pub values: Vec<T>,
    pub stencil_h: T,
}

impl<T: Real> CurvatureField<T> {
    pub fn max_value(&self) -> T {
        self.values.iter().fold(T::min_value().unwrap(), |a, &b| a.max(b))
    }

    pub fn to_csv(&self) -> String {
        super::field_csv(&self.grid, &self.values)
    }
}

/// `log Σ_m |ω|^{2m} / β(m)²` by log-sum-exp.
pub fn log_kernel_norm_sq<T: Real>(w: &WeightSequence<T>, omega: Complex<T>) -> Result<T> {
    let modulus = cabs(omega);
    if modulus == T::zero() {
        // only the constant term survives
        return match w.get(0) {
            Some(b) if w.lo() == 0 => Ok(-T::lit(2.0) * b.ln()),
            _ => Err(Error::Domain("kernel norm is infinite at the origin for this window".into())),
        };
    }
    let log_mod = modulus.ln();
    let two = T::lit(2.0);
    let exps: Vec<T> = w
        .window()
        .indices()
        .zip(w.betas())
        .map(|(m, &b)| two * (T::from_index(m) * log_mod - b.ln()))
        .collect();
    let top = exps.iter().fold(T::min_value().unwrap(), |a, &b| a.max(b));
    let sum = exps.iter().fold(T::zero(), |acc, &e| acc + (e - top).exp());
    Ok(top + sum.ln())
}

/// Exact `−Δ log ‖k_ω‖²` for the radial kernel: with `x = |ω|²` and
/// `S(x) = Σ x^m/β(m)²`, `Δ log S = 4 (x S'/S)' = 4 Var(m)/x`, where `m` is
/// distributed with weights `x^m/β(m)²`.
pub fn curvature_exact<T: Real>(w: &WeightSequence<T>, omega: Complex<T>) -> Result<T> {
    let modulus = cabs(omega);
    if modulus == T::zero() {
        return Err(Error::Domain("closed form needs ω ≠ 0".into()));
    }
    let two = T::lit(2.0);
    let exps: Vec<T> = w
        .window()
        .indices()
        .zip(w.betas())
        .map(|(m, &b)| two * (T::from_index(m) * modulus.ln() - b.ln()))
        .collect();
    let top = exps.iter().fold(T::min_value().unwrap(), |a, &b| a.max(b));
    let p: Vec<T> = exps.iter().map(|&e| (e - top).exp()).collect();
    let total = p.iter().fold(T::zero(), |a, &b| a + b);
    let mean = w.window().indices().zip(&p).fold(T::zero(), |a, (m, &q)| a + T::from_index(m) * q) / total;
    let var = w.window().indices().zip(&p).fold(T::zero(), |a, (m, &q)| {
        let d = T::from_index(m) - mean;
        a + d * d * q
    }) / total;
    Ok(-T::lit(4.0) * var / (modulus * modulus))
}

/// 5-point `−Δ log ‖k_ω‖²` with step `h`.
pub fn curvature_at<T: Real>(w: &WeightSequence<T>, omega: Complex<T>, h: T) -> Result<T> {
    let l = |z: Complex<T>| log_kernel_norm_sq(w, z);
    let hx = Complex::new(h, T::zero());
    let hy = Complex::new(T::zero(), h);
    let lap = l(omega + hx)? + l(omega - hx)? + l(omega + hy)? + l(omega - hy)? - l(omega)? * T::lit(4.0);
    Ok(-lap / (h * h))
}

/// `(K_h − K_{h/2}) / (K_{h/2} − K_{h/4})`; about 4 for a second-order stencil.
pub fn richardson_ratio<T: Real>(w: &WeightSequence<T>, omega: Complex<T>, h: T) -> Result<T> {
    let two = T::lit(2.0);
    let k1 = curvature_at(w, omega, h)?;
    let k2 = curvature_at(w, omega, h / two)?;
    let k4 = curvature_at(w, omega, h / (two * two))?;
    Ok((k1 - k2) / (k2 - k4))
}

/// Richardson estimate of the error in `K_h`: `(4/3)|K_h − K_{h/2}|`.
pub fn stencil_error<T: Real>(w: &WeightSequence<T>, omega: Complex<T>, h: T) -> Result<T> {
    let k1 = curvature_at(w, omega, h)?;
    let k2 = curvature_at(w, omega, h / T::lit(2.0))?;
    Ok((k1 - k2).abs() * T::lit(4.0 / 3.0))
}

/// Curvature on a grid; every stencil must stay `2h` inside `domain`
/// (no inner constraint for a disk, `domain.inner == 0`).
pub fn curvature_field<T: Real>(
    w: &WeightSequence<T>,
    domain: Annulus<T>,
    grid: &GridSpec<T>,
    h: T,
) -> Result<CurvatureField<T>> {
    if !(h > T::zero()) {
        return Err(Error::InvalidParameter("stencil step must be positive".into()));
    }
    let margin = h * T::lit(2.0);
    let points = grid.points();
    for p in &points {
        let rho = cabs(*p);
        let inner_ok = domain.inner == T::zero() || rho >= domain.inner + margin;
        if !inner_ok || rho > domain.outer - margin {
            return Err(Error::Domain(format!(
                "stencil at |ω| = {rho} leaves the annulus [{}, {}] (h = {h})",
                domain.inner,
                domain.outer
            )));
        }
    }
    let values = points.iter().map(|&p| curvature_at(w, p, h)).collect::<Result<Vec<_>>>()?;
    Ok(CurvatureField { grid: points, values, stencil_h: h })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurvatureSample<T> {
    pub omega: Complex<T>,
    /// `K_i(ω)` for each residue class `i`.
    pub curvatures: Vec<T>,
    /// Richardson error estimate for each `K_i(ω)`.
    pub errors: Vec<T>,
    pub min_gap: T,
    /// `10 ×` the largest error estimate.
    pub threshold: T,
    /// Largest relative edge term among the restricted kernels.
    pub tail_ratio: T,
    /// The stencil sits inside every restriction's estimated spectral annulus
    /// and the restricted kernels are converged on the window.
    pub in_domain: bool,
    pub separated: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RestrictionCurvatureReport<T> {
    pub n: usize,
    pub samples: Vec<CurvatureSample<T>>,
    pub passed: bool,
}

/// Edge-term bound for a restriction sample to count: beyond it the gap
/// between restricted curvatures is dominated by truncation.
pub const RESTRICTION_TAIL_TOL: f64 = 1e-8;

/// Compares the curvatures of the restrictions `M_{z^n}|S_i` at each sample
/// point; passes when some point separates every pair by more than ten times
/// the stencil error estimate.
pub fn restriction_curvatures_distinct<T: Real>(
    w: &WeightSequence<T>,
    n: usize,
    omegas: &[Complex<T>],
    h: T,
) -> Result<RestrictionCurvatureReport<T>> {
    let subs = (0..n).map(|i| restriction_shift(w, n, i)).collect::<Result<Vec<_>>>()?;
    let spectra = subs.iter().map(spectrum_estimate).collect::<Result<Vec<_>>>()?;
    let margin = h * T::lit(2.0);
    let mut samples = Vec::with_capacity(omegas.len());
    for &omega in omegas {
        let curvatures = subs.iter().map(|s| curvature_at(s, omega, h)).collect::<Result<Vec<_>>>()?;
        let errors = subs.iter().map(|s| stencil_error(s, omega, h)).collect::<Result<Vec<_>>>()?;
        let mut min_gap = T::max_value().unwrap();
        for i in 0..n {
            for j in i + 1..n {
                min_gap = min_gap.min((curvatures[i] - curvatures[j]).abs());
            }
        }
        let threshold = errors.iter().fold(T::zero(), |a, &b| a.max(b)) * T::lit(10.0);
        let tail_ratio = subs
            .iter()
            .map(|s| kernel_unchecked(s, omega).map(|k| k.tail_ratio))
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .fold(T::zero(), |a, b| a.max(b));
        let rho = cabs(omega);
        let in_domain = tail_ratio < T::lit(RESTRICTION_TAIL_TOL)
            && spectra.iter().all(|s| rho - margin > s.inner_radius && rho + margin < s.outer_radius);
        samples.push(CurvatureSample {
            omega,
            curvatures,
            errors,
            min_gap,
            threshold,
            tail_ratio,
            in_domain,
            separated: in_domain && min_gap > threshold,
        });
    }
    let passed = n <= 1 || samples.iter().any(|s| s.separated);
    Ok(RestrictionCurvatureReport { n, samples, passed })
}
