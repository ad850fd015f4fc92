use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::spaces::{WeightSequence, Window};

/// Shift weights `v_m` for `m = lo, lo+1, …`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IndexedWeights<T> {
    pub lo: i64,
    pub values: Vec<T>,
}

impl<T: Real> IndexedWeights<T> {
    pub fn new(lo: i64, values: Vec<T>) -> Self {
        IndexedWeights { lo, values }
    }

    pub fn hi(&self) -> i64 {
        self.lo + self.values.len() as i64 - 1
    }

    pub fn get(&self, m: i64) -> Option<T> {
        (m >= self.lo && m <= self.hi()).then(|| self.values[(m - self.lo) as usize])
    }

    /// The sequence `w` with `w_{m+k} = v_m`.
    pub fn shifted(&self, k: i64) -> Self {
        IndexedWeights { lo: self.lo + k, values: self.values.clone() }
    }
}

/// Smallest `|k|` with `| |v_m| − |w_{m+k}| | ≤ tol` on the overlap; ties go
/// to the positive shift. Only shifts whose overlap covers at least half of
/// the shorter list are tried.
pub fn weights_align<T: Real>(v: &IndexedWeights<T>, w: &IndexedWeights<T>, tol: T) -> Result<Option<i64>> {
    let shorter = v.values.len().min(w.values.len());
    let required = shorter.div_ceil(2).max(1);
    let reach = v.values.len().max(w.values.len()) as i64 / 2;
    let mut any_overlap = false;
    for step in 0..=reach {
        for k in if step == 0 { vec![0] } else { vec![step, -step] } {
            let lo = v.lo.max(w.lo - k);
            let hi = v.hi().min(w.hi() - k);
            let overlap = if hi >= lo { (hi - lo + 1) as usize } else { 0 };
            if overlap < required {
                continue;
            }
            any_overlap = true;
            let worst = (lo..=hi)
                .map(|m| (v.get(m).unwrap().abs() - w.get(m + k).unwrap().abs()).abs())
                .fold(T::zero(), |a, b| a.max(b));
            if worst <= tol {
                return Ok(Some(k));
            }
        }
    }
    if !any_overlap {
        return Err(Error::InsufficientOverlap { overlap: 0, required });
    }
    Ok(None)
}

/// Weights `β_i(k) = β(nk + i)` of `M_{z^n}` restricted to the residue class
/// `i`, re-indexed by `k`.
pub fn restriction_shift<T: Real>(w: &WeightSequence<T>, n: usize, i: usize) -> Result<WeightSequence<T>> {
    if n == 0 || i >= n {
        return Err(Error::InvalidParameter(format!("residue {i} not in 0..{n}")));
    }
    let (n, i) = (n as i64, i as i64);
    let k_lo = (w.lo() - i).div_euclid(n) + i64::from((w.lo() - i).rem_euclid(n) != 0);
    let k_hi = (w.hi() - i).div_euclid(n);
    if k_hi < k_lo {
        return Err(Error::WindowTooShort { need: n as usize, have: w.len() });
    }
    let beta = (k_lo..=k_hi).map(|k| w.beta(n * k + i)).collect::<Result<Vec<_>>>()?;
    WeightSequence::new(Window::new(k_lo, k_hi)?, beta, format!("{} | class {i} mod {n}", w.label()))
}

/// Shift weights `λ_k = β(n(k+1)+i)/β(nk+i)` of the restriction to class `i`.
pub fn restriction_weights<T: Real>(w: &WeightSequence<T>, n: usize, i: usize) -> Result<IndexedWeights<T>> {
    let sub = restriction_shift(w, n, i)?;
    if sub.len() < 2 {
        return Err(Error::WindowTooShort { need: 2 * n, have: w.len() });
    }
    Ok(IndexedWeights::new(sub.lo(), sub.lambdas()))
}
