use nalgebra::{DMatrix, RealField};
use num_traits::{FromPrimitive, ToPrimitive};

pub use nalgebra::Complex;

/// Real scalar the whole crate is generic over (`f32` or `f64`).
pub trait Real: RealField + Copy + FromPrimitive + ToPrimitive + Default {
    /// Converts an `f64` literal. Never fails for the supported types.
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable")
    }

    fn from_index(m: i64) -> Self {
        Self::from_i64(m).expect("index representable")
    }

    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Dense complex matrix.
pub type CMatrix<T> = DMatrix<Complex<T>>;

pub(crate) fn c<T: Real>(re: T) -> Complex<T> {
    Complex::new(re, T::zero())
}

/// `exp(i·theta)`.
pub(crate) fn cis<T: Real>(theta: T) -> Complex<T> {
    Complex::new(theta.cos(), theta.sin())
}

pub(crate) fn cabs<T: Real>(z: Complex<T>) -> T {
    z.norm_sqr().sqrt()
}

/// The n-th roots of unity `exp(2πik/n)`, `k = 0..n`.
pub fn roots_of_unity<T: Real>(n: usize) -> Vec<Complex<T>> {
    let step = T::two_pi() / T::from_usize(n).expect("n representable");
    (0..n)
        .map(|k| cis(step * T::from_usize(k).expect("k representable")))
        .collect()
}
