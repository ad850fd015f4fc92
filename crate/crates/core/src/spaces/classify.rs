use serde::{Deserialize, Serialize};

use super::WeightSequence;
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Shape of a weight sequence, read off its `λ` scan.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeightClass<T> {
    pub monotone_increasing: bool,
    pub strictly_increasing: bool,
    pub inner_limit_estimate: T,
    pub outer_limit_estimate: T,
    /// Monotone weights running from the inner radius up to 1.
    pub is_monotonic_ar: bool,
}

#[derive(Clone, Copy, Debug)]
pub struct ClassifyOptions<T> {
    /// Slack allowed in `λ_{m+1} ≥ λ_m`.
    pub monotone_tol: T,
    /// Tolerance on the limit estimates and the `(r, 1)` range.
    pub limit_tol: T,
    /// Fraction of the `λ` scan averaged at each end.
    pub tail_fraction: T,
}

impl<T: Real> Default for ClassifyOptions<T> {
    fn default() -> Self {
        ClassifyOptions { monotone_tol: T::lit(1e-8), limit_tol: T::lit(1e-2), tail_fraction: T::lit(0.1) }
    }
}

pub fn classify_weights<T: Real>(w: &WeightSequence<T>, r_hint: T) -> Result<WeightClass<T>> {
    classify_weights_with(w, r_hint, &ClassifyOptions::default())
}

pub fn classify_weights_with<T: Real>(
    w: &WeightSequence<T>,
    r_hint: T,
    opts: &ClassifyOptions<T>,
) -> Result<WeightClass<T>> {
    if w.len() < 3 {
        return Err(Error::WindowTooShort { need: 3, have: w.len() });
    }
    let lambdas = w.lambdas();
    let monotone_increasing = lambdas.windows(2).all(|p| p[1] >= p[0] - opts.monotone_tol);
    let strictly_increasing = lambdas.windows(2).all(|p| p[1] > p[0]);

    let count = lambdas.len();
    let tail = ((T::from_usize(count).unwrap() * opts.tail_fraction).floor().to_usize().unwrap_or(0)).max(1);
    let mean = |xs: &[T]| xs.iter().fold(T::zero(), |a, &b| a + b) / T::from_usize(xs.len()).unwrap();
    let inner_limit_estimate = mean(&lambdas[..tail]);
    let outer_limit_estimate = mean(&lambdas[count - tail..]);

    let tol = opts.limit_tol;
    let in_range = lambdas.iter().all(|&l| l > r_hint - tol && l < T::one() + tol);
    let is_monotonic_ar = monotone_increasing
        && in_range
        && (inner_limit_estimate - r_hint).abs() <= tol
        && (outer_limit_estimate - T::one()).abs() <= tol;

    Ok(WeightClass {
        monotone_increasing,
        strictly_increasing,
        inner_limit_estimate,
        outer_limit_estimate,
        is_monotonic_ar,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spaces::{make_weights, SpaceKind, Window};

    #[test]
    fn bergman_is_monotonic_ar() {
        let w = make_weights(&SpaceKind::BergmanAnnulus { r: 0.5 }, Window::symmetric(64)).unwrap();
        let class = classify_weights(&w, 0.5).unwrap();
        assert!(class.strictly_increasing && class.monotone_increasing);
        assert!((class.inner_limit_estimate - 0.5f64).abs() < 1e-2);
        assert!((class.outer_limit_estimate - 1.0f64).abs() < 1e-2);
        assert!(class.is_monotonic_ar);
    }

    #[test]
    fn flat_is_monotone_but_not_ar() {
        let w = make_weights::<f64>(&SpaceKind::Flat, Window::symmetric(16)).unwrap();
        let class = classify_weights(&w, 0.5).unwrap();
        assert!(class.monotone_increasing && !class.strictly_increasing);
        assert_eq!(class.inner_limit_estimate, 1.0);
        assert_eq!(class.outer_limit_estimate, 1.0);
        assert!(!class.is_monotonic_ar);
    }

    #[test]
    fn alternating_is_not_monotone() {
        let w = make_weights(&SpaceKind::Alternating { a: 0.5, b: 2.0 }, Window::symmetric(16)).unwrap();
        let class = classify_weights(&w, 0.5).unwrap();
        assert!(!class.monotone_increasing && !class.is_monotonic_ar);
    }

    #[test]
    fn short_window_rejected() {
        let w = make_weights::<f64>(&SpaceKind::Flat, Window::new(0, 1).unwrap()).unwrap();
        assert!(matches!(classify_weights(&w, 0.5), Err(Error::WindowTooShort { .. })));
    }

    #[test]
    fn annulus_lambdas_strictly_increase_inside_unit_interval() {
        for &r in &[0.3, 0.5, 0.7, 0.85] {
            // Hardy gaps shrink like r^{2|m|}; stay where they are representable
            for (kind, half) in [
                (SpaceKind::BergmanAnnulus { r }, 64),
                (SpaceKind::HardyAnnulus { r }, 10),
            ] {
                let w = make_weights(&kind, Window::symmetric(half)).unwrap();
                let lambdas = w.lambdas();
                for (i, p) in lambdas.windows(2).enumerate() {
                    assert!(p[1] > p[0], "{} not increasing at {}", kind.label(), w.lo() + i as i64);
                }
                assert!(lambdas.iter().all(|&l| l > r && l < 1.0), "{}", kind.label());
            }
        }
    }
}
