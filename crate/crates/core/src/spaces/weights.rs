use serde::{Deserialize, Serialize};

use super::Window;
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Parameterises the weight data of a space `L²(β)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SpaceKind<T> {
    /// Bergman space of `{r < |z| < 1}`, area measure divided by π.
    BergmanAnnulus { r: T },
    /// Hardy space of `{r < |z| < 1}`, unit mass on each boundary circle.
    HardyAnnulus { r: T },
    /// `β ≡ 1`: the unweighted (unitary) bilateral shift.
    Flat,
    /// `β(m) = s^m`.
    Geometric { s: T },
    /// Shift weights cycling `a, b, a, b, …` with `λ_m = a` for even `m`.
    Alternating { a: T, b: T },
    /// Explicit `β` values, one per window index.
    Custom { beta: Vec<T> },
}

impl<T: Real> SpaceKind<T> {
    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: T| {
            if v > T::zero() && v.is_finite() {
                Ok(())
            } else {
                Err(Error::InvalidParameter(format!("{name} must be positive, got {v}")))
            }
        };
        match self {
            SpaceKind::BergmanAnnulus { r } | SpaceKind::HardyAnnulus { r } => check_radius(*r),
            SpaceKind::Flat => Ok(()),
            SpaceKind::Geometric { s } => positive("s", *s),
            SpaceKind::Alternating { a, b } => positive("a", *a).and(positive("b", *b)),
            SpaceKind::Custom { beta } => beta.iter().try_for_each(|&b| positive("beta", b)),
        }
    }

    pub fn label(&self) -> String {
        match self {
            SpaceKind::BergmanAnnulus { r } => format!("bergman_annulus(r={r})"),
            SpaceKind::HardyAnnulus { r } => format!("hardy_annulus(r={r})"),
            SpaceKind::Flat => "flat".into(),
            SpaceKind::Geometric { s } => format!("geometric(s={s})"),
            SpaceKind::Alternating { a, b } => format!("alternating(a={a}, b={b})"),
            SpaceKind::Custom { beta } => format!("custom({} values)", beta.len()),
        }
    }

    /// Radius hint used by classification: the inner radius of the annulus
    /// where one is known.
    pub fn radius_hint(&self) -> Option<T> {
        match self {
            SpaceKind::BergmanAnnulus { r } | SpaceKind::HardyAnnulus { r } => Some(*r),
            _ => None,
        }
    }
}

fn check_radius<T: Real>(r: T) -> Result<()> {
    if r > T::zero() && r < T::one() {
        Ok(())
    } else {
        Err(Error::Domain(format!("annulus radius must lie in (0, 1), got {r}")))
    }
}

/// `‖z^m‖²` in the Bergman space of the annulus (normalised area measure).
pub fn bergman_norm_sq<T: Real>(m: i64, r: T) -> Result<T> {
    check_radius(r)?;
    if m == -1 {
        return Ok(-T::lit(2.0) * r.ln());
    }
    let k = T::from_index(m + 1);
    Ok((T::one() - r.powi((2 * m + 2) as i32)) / k)
}

/// `‖z^m‖²` in the Hardy space of the annulus: `1 + r^{2m}`.
pub fn hardy_norm_sq<T: Real>(m: i64, r: T) -> Result<T> {
    check_radius(r)?;
    Ok(T::one() + r.powi((2 * m) as i32))
}

/// Two-sided weights `β(m) = ‖z^m‖` over a finite window.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeightSequence<T> {
    window: Window,
    beta: Vec<T>,
    label: String,
}

impl<T: Real> WeightSequence<T> {
    pub fn new(window: Window, beta: Vec<T>, label: impl Into<String>) -> Result<Self> {
        if beta.len() != window.len() {
            return Err(Error::InvalidParameter(format!(
                "{} weights supplied for window {window} of length {}",
                beta.len(),
                window.len()
            )));
        }
        if let Some((i, b)) = beta.iter().enumerate().find(|(_, b)| !(**b > T::zero() && b.is_finite())) {
            return Err(Error::InvalidParameter(format!(
                "beta({}) = {b} is not a positive finite number",
                window.lo + i as i64
            )));
        }
        Ok(WeightSequence { window, beta, label: label.into() })
    }

    pub fn window(&self) -> Window {
        self.window
    }

    pub fn lo(&self) -> i64 {
        self.window.lo
    }

    pub fn hi(&self) -> i64 {
        self.window.hi
    }

    pub fn len(&self) -> usize {
        self.beta.len()
    }

    pub fn is_empty(&self) -> bool {
        self.beta.is_empty()
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn betas(&self) -> &[T] {
        &self.beta
    }

    pub fn get(&self, m: i64) -> Option<T> {
        self.window.contains(m).then(|| self.beta[self.window.offset(m)])
    }

    pub fn beta(&self, m: i64) -> Result<T> {
        self.get(m).ok_or(Error::OutOfWindow { index: m, lo: self.lo(), hi: self.hi() })
    }

    /// `λ_m = β(m+1)/β(m)` for `m` in `[lo, hi-1]`.
    pub fn lambdas(&self) -> Vec<T> {
        self.beta.windows(2).map(|p| p[1] / p[0]).collect()
    }

    /// Weights restricted to a sub-window.
    pub fn restrict(&self, window: Window) -> Result<Self> {
        if !(self.window.contains(window.lo) && self.window.contains(window.hi)) {
            return Err(Error::OutOfWindow { index: window.lo.min(window.hi), lo: self.lo(), hi: self.hi() });
        }
        let a = self.window.offset(window.lo);
        let b = self.window.offset(window.hi);
        Ok(WeightSequence { window, beta: self.beta[a..=b].to_vec(), label: self.label.clone() })
    }
}

/// `λ_m = β(m+1)/β(m)`; needs at least two indices.
pub fn lambda_weights<T: Real>(w: &WeightSequence<T>) -> Result<Vec<T>> {
    if w.len() < 2 {
        return Err(Error::WindowTooShort { need: 2, have: w.len() });
    }
    Ok(w.lambdas())
}

pub fn make_weights<T: Real>(kind: &SpaceKind<T>, window: Window) -> Result<WeightSequence<T>> {
    kind.validate()?;
    let label = kind.label();
    let beta: Vec<T> = match kind {
        SpaceKind::BergmanAnnulus { r } => window
            .indices()
            .map(|m| bergman_norm_sq(m, *r).map(|v| v.sqrt()))
            .collect::<Result<_>>()?,
        SpaceKind::HardyAnnulus { r } => window
            .indices()
            .map(|m| hardy_norm_sq(m, *r).map(|v| v.sqrt()))
            .collect::<Result<_>>()?,
        SpaceKind::Flat => vec![T::one(); window.len()],
        SpaceKind::Geometric { s } => window.indices().map(|m| s.powi(m as i32)).collect(),
        SpaceKind::Alternating { a, b } => {
            let lambda = |m: i64| if m.rem_euclid(2) == 0 { *a } else { *b };
            // anchored at β(0) = 1
            window
                .indices()
                .map(|m| {
                    let mut beta = T::one();
                    if m > 0 {
                        for j in 0..m {
                            beta *= lambda(j);
                        }
                    } else {
                        for j in m..0 {
                            beta /= lambda(j);
                        }
                    }
                    beta
                })
                .collect()
        }
        SpaceKind::Custom { beta } => beta.clone(),
    };
    WeightSequence::new(window, beta, label)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Midpoint-rule quadrature of `∫_{A_r} |z|^{2m} dA / π` in polar form.
    fn bergman_quadrature(m: i64, r: f64) -> f64 {
        // 2 ∫_r^1 ρ^{2m+1} dρ, composite Gauss-Legendre 5-point on 200 panels
        let nodes = [
            (0.0, 128.0 / 225.0),
            (-0.538_469_310_105_683_1, 0.478_628_670_499_366_5),
            (0.538_469_310_105_683_1, 0.478_628_670_499_366_5),
            (-0.906_179_845_938_664, 0.236_926_885_056_189_1),
            (0.906_179_845_938_664, 0.236_926_885_056_189_1),
        ];
        let panels = 200;
        let h = (1.0 - r) / panels as f64;
        let mut total = 0.0;
        for p in 0..panels {
            let mid = r + (p as f64 + 0.5) * h;
            for (x, wt) in nodes {
                let rho: f64 = mid + 0.5 * h * x;
                total += wt * 0.5 * h * 2.0 * rho.powi((2 * m + 1) as i32);
            }
        }
        total
    }

    /// Unit mass on each boundary circle: mean of |z|^{2m} over |z|=1 plus over |z|=r.
    fn hardy_quadrature(m: i64, r: f64) -> f64 {
        let samples = 64;
        let mut total = 0.0;
        for k in 0..samples {
            let t = 2.0 * std::f64::consts::PI * k as f64 / samples as f64;
            let outer = nalgebra::Complex::new(t.cos(), t.sin());
            let inner = outer * r;
            total += outer.norm().powi(2 * m as i32) + inner.norm().powi(2 * m as i32);
        }
        total / samples as f64
    }

    #[test]
    fn bergman_examples() {
        assert!((bergman_norm_sq(1, 0.5f64).unwrap() - 0.46875).abs() < 1e-15);
        assert!((bergman_norm_sq(0, 0.5f64).unwrap() - 0.75).abs() < 1e-15);
        assert!((bergman_norm_sq(-1, 0.5).unwrap() - 2.0 * 2f64.ln()).abs() < 1e-15);
        assert!((bergman_quadrature(1, 0.5) - 0.46875).abs() < 1e-12);
        assert!((bergman_quadrature(0, 0.5) - 0.75).abs() < 1e-12);
        assert!((bergman_quadrature(-1, 0.5) - 1.386_294_361_119_890_6).abs() < 1e-12);
    }

    #[test]
    fn hardy_examples() {
        assert_eq!(hardy_norm_sq(0, 0.3).unwrap(), 2.0);
        assert!((hardy_norm_sq(2, 0.5f64).unwrap() - 1.0625).abs() < 1e-15);
        assert!((hardy_norm_sq(-1, 0.5f64).unwrap() - 5.0).abs() < 1e-15);
        assert!((hardy_quadrature(2, 0.5) - 1.0625).abs() < 1e-14);
    }

    #[test]
    fn norms_match_quadrature_over_range() {
        for &r in &[0.3, 0.5, 0.7] {
            for m in -10..=10 {
                let closed = bergman_norm_sq(m, r).unwrap();
                let quad = bergman_quadrature(m, r);
                assert!((closed - quad).abs() <= 1e-8 * closed.max(1.0), "bergman m={m} r={r}");
                let closed = hardy_norm_sq(m, r).unwrap();
                let quad = hardy_quadrature(m, r);
                assert!((closed - quad).abs() <= 1e-8 * closed.max(1.0), "hardy m={m} r={r}");
            }
        }
    }

    #[test]
    fn radius_outside_unit_interval_is_domain_error() {
        assert!(matches!(bergman_norm_sq(0, 1.0), Err(Error::Domain(_))));
        assert!(matches!(hardy_norm_sq(0, 0.0), Err(Error::Domain(_))));
        assert!(make_weights(&SpaceKind::Geometric { s: -1.0 }, Window::symmetric(2)).is_err());
    }

    #[test]
    fn bergman_weights_window() {
        let w = make_weights(&SpaceKind::BergmanAnnulus { r: 0.5f64 }, Window::symmetric(2)).unwrap();
        assert!((w.beta(-1).unwrap().powi(2) - 2.0 * 2f64.ln()).abs() < 1e-14);
        for m in [-2i64, 0, 1, 2] {
            let expect = (1.0 - 0.5f64.powi((2 * m + 2) as i32)) / (m + 1) as f64;
            assert!((w.beta(m).unwrap().powi(2) - expect).abs() < 1e-14);
        }
    }

    #[test]
    fn flat_and_alternating() {
        let w = make_weights::<f64>(&SpaceKind::Flat, Window::symmetric(3)).unwrap();
        assert!(w.betas().iter().all(|&b| b == 1.0));
        assert!(lambda_weights(&w).unwrap().iter().all(|&l| l == 1.0));

        let w = make_weights(&SpaceKind::Alternating { a: 0.5, b: 2.0 }, Window::symmetric(2)).unwrap();
        assert_eq!(w.beta(0).unwrap(), 1.0);
        let lambdas = w.lambdas();
        // m = -2, -1, 0, 1
        assert_eq!(lambdas, vec![0.5, 2.0, 0.5, 2.0]);
    }

    #[test]
    fn lambda_examples() {
        let w = make_weights(&SpaceKind::BergmanAnnulus { r: 0.5 }, Window::new(0, 1).unwrap()).unwrap();
        assert!((w.lambdas()[0] - (0.46875f64 / 0.75).sqrt()).abs() < 1e-15);
        assert!((w.lambdas()[0] - 0.790_569_4).abs() < 1e-7);

        let w = make_weights(&SpaceKind::BergmanAnnulus { r: 0.5 }, Window::new(200, 201).unwrap()).unwrap();
        assert!((w.lambdas()[0] - 1.0f64).abs() < 1e-2);

        let short = make_weights::<f64>(&SpaceKind::Flat, Window::new(0, 0).unwrap()).unwrap();
        assert!(lambda_weights(&short).is_err());
    }

    #[test]
    fn custom_length_must_match() {
        let kind = SpaceKind::Custom { beta: vec![1.0, 2.0] };
        assert!(make_weights(&kind, Window::symmetric(2)).is_err());
        assert!(make_weights(&kind, Window::new(0, 1).unwrap()).is_ok());
    }
}
