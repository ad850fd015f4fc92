use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::WeightSequence;
use crate::scalar::{Complex, Real};

/// Finitely supported Laurent series `Σ f̂(m) z^m`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct LaurentSeries<T> {
    coeffs: BTreeMap<i64, Complex<T>>,
}

impl<T: Real> LaurentSeries<T> {
    pub fn zero() -> Self {
        LaurentSeries { coeffs: BTreeMap::new() }
    }

    pub fn monomial(m: i64, c: Complex<T>) -> Self {
        let mut s = Self::zero();
        s.set(m, c);
        s
    }

    pub fn one() -> Self {
        Self::monomial(0, Complex::new(T::one(), T::zero()))
    }

    pub fn from_pairs<I: IntoIterator<Item = (i64, Complex<T>)>>(pairs: I) -> Self {
        let mut s = Self::zero();
        for (m, c) in pairs {
            let cur = s.coeff(m);
            s.set(m, cur + c);
        }
        s
    }

    /// Real coefficients `coeffs[k]` on `z^{lo + k}`.
    pub fn from_real(lo: i64, coeffs: &[T]) -> Self {
        Self::from_pairs(
            coeffs.iter().enumerate().map(|(k, &c)| (lo + k as i64, Complex::new(c, T::zero()))),
        )
    }

    pub fn coeff(&self, m: i64) -> Complex<T> {
        self.coeffs.get(&m).copied().unwrap_or_else(|| Complex::new(T::zero(), T::zero()))
    }

    /// Sets a coefficient; exact zeros are not stored.
    pub fn set(&mut self, m: i64, c: Complex<T>) {
        if c.re == T::zero() && c.im == T::zero() {
            self.coeffs.remove(&m);
        } else {
            self.coeffs.insert(m, c);
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (i64, Complex<T>)> + '_ {
        self.coeffs.iter().map(|(&m, &c)| (m, c))
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn support(&self) -> Option<(i64, i64)> {
        let lo = *self.coeffs.keys().next()?;
        let hi = *self.coeffs.keys().next_back()?;
        Some((lo, hi))
    }

    pub fn eval(&self, z: Complex<T>) -> Complex<T> {
        self.iter().fold(Complex::new(T::zero(), T::zero()), |acc, (m, c)| acc + c * z.powi(m as i32))
    }

    pub fn add(&self, other: &Self) -> Self {
        Self::from_pairs(self.iter().chain(other.iter()))
    }

    pub fn scale(&self, s: Complex<T>) -> Self {
        Self::from_pairs(self.iter().map(|(m, c)| (m, c * s)))
    }

    /// `z^k · f`.
    pub fn shift(&self, k: i64) -> Self {
        LaurentSeries { coeffs: self.coeffs.iter().map(|(&m, &c)| (m + k, c)).collect() }
    }

    /// Largest coefficient modulus difference against `other`.
    pub fn max_diff(&self, other: &Self) -> T {
        self.coeffs
            .keys()
            .chain(other.coeffs.keys())
            .map(|&m| {
                let d = self.coeff(m) - other.coeff(m);
                d.norm_sqr().sqrt()
            })
            .fold(T::zero(), |a, b| if b > a { b } else { a })
    }

    /// `(f, g) = Σ f̂(m) conj(ĝ(m)) β(m)²`; coefficients outside the window
    /// of `w` are ignored.
    pub fn inner(&self, other: &Self, w: &WeightSequence<T>) -> Complex<T> {
        self.iter().fold(Complex::new(T::zero(), T::zero()), |acc, (m, c)| match w.get(m) {
            Some(b) => acc + c * other.coeff(m).conj() * (b * b),
            None => acc,
        })
    }
}

/// Splits `f = f_0 + … + f_{n-1}` where `f_k` keeps the indices `≡ k (mod n)`.
pub fn residue_decompose<T: Real>(f: &LaurentSeries<T>, n: usize) -> Vec<LaurentSeries<T>> {
    let n = n.max(1);
    let mut parts = vec![LaurentSeries::zero(); n];
    for (m, c) in f.iter() {
        parts[m.rem_euclid(n as i64) as usize].set(m, c);
    }
    parts
}

/// Exact convolution `ĥ(m) = Σ_k f̂(k) ĝ(m-k)`.
pub fn series_multiply<T: Real>(f: &LaurentSeries<T>, g: &LaurentSeries<T>) -> LaurentSeries<T> {
    let mut out: BTreeMap<i64, Complex<T>> = BTreeMap::new();
    for (a, x) in f.iter() {
        for (b, y) in g.iter() {
            let e = out.entry(a + b).or_insert_with(|| Complex::new(T::zero(), T::zero()));
            *e += x * y;
        }
    }
    LaurentSeries::from_pairs(out)
}
