//! Weight sequences `β(m)` for the concrete spaces, Laurent-series arithmetic
//! and weight classification.

mod classify;
mod laurent;
mod weights;

pub use classify::{classify_weights, ClassifyOptions, WeightClass};
pub use laurent::{residue_decompose, series_multiply, LaurentSeries};
pub use weights::{
    bergman_norm_sq, hardy_norm_sq, lambda_weights, make_weights, SpaceKind, WeightSequence,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Closed index range `[lo, hi]` of retained basis vectors.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Window {
    pub lo: i64,
    pub hi: i64,
}

impl Window {
    pub fn new(lo: i64, hi: i64) -> Result<Self> {
        if lo > hi {
            return Err(Error::InvalidParameter(format!("window [{lo}, {hi}] is empty")));
        }
        Ok(Window { lo, hi })
    }

    /// `[-half, half]`.
    pub fn symmetric(half: i64) -> Self {
        Window { lo: -half, hi: half }
    }

    pub fn len(&self) -> usize {
        (self.hi - self.lo + 1) as usize
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, m: i64) -> bool {
        self.lo <= m && m <= self.hi
    }

    /// Position of index `m` in the window.
    pub fn offset(&self, m: i64) -> usize {
        debug_assert!(self.contains(m));
        (m - self.lo) as usize
    }

    pub fn indices(&self) -> std::ops::RangeInclusive<i64> {
        self.lo..=self.hi
    }

    /// Drops indices from the top until the length is a multiple of `n`, so
    /// that every residue class mod `n` has the same number of members.
    pub fn aligned_to(&self, n: usize) -> Result<Self> {
        let n = n.max(1);
        let keep = self.len() / n * n;
        if keep == 0 {
            return Err(Error::WindowTooShort { need: n, have: self.len() });
        }
        Ok(Window { lo: self.lo, hi: self.lo + keep as i64 - 1 })
    }
}

impl std::fmt::Display for Window {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "[{}, {}]", self.lo, self.hi)
    }
}
