//! Numerical laboratory for truncated bilateral weighted shifts.
//!
//! The crate builds finite compressions of multiplication operators on
//! weighted sequence spaces `L²(β)` (Bergman and Hardy spaces of the annulus
//! `{r < |z| < 1}` among them), computes commutants and *-commutants of shift
//! powers, enumerates the lattice of reducing subspaces, and evaluates
//! reproducing kernels and the curvature of the associated line bundle.
//!
//! Everything numeric is generic over a [`Real`] scalar. The `*64` aliases
//! below fix the scalar to `f64`, which is what the CLI and the acceptance
//! suite use; `f32` works but most default tolerances assume double precision.

pub mod cli;
pub mod commutant;
pub mod error;
pub mod geometry;
pub mod lattice;
pub mod linalg;
pub mod operators;
pub mod scalar;
pub mod spaces;

pub use error::{Error, Result};
pub use scalar::{CMatrix, Complex, Real};

pub use commutant::{CommutantBasis, TwistCoefficients};
pub use geometry::{Annulus, CurvatureField, GridSpec, IndexedWeights, KernelVector, SpectrumEstimate};
pub use lattice::{LatticeKind, ReducingLattice, ShiftPowerSetup};
pub use operators::{BasisMode, MultiplierSymbol, TruncatedOperator};
pub use spaces::{LaurentSeries, SpaceKind, WeightClass, WeightSequence, Window};

pub type WeightSequence64 = WeightSequence<f64>;
pub type WeightSequence32 = WeightSequence<f32>;
pub type LaurentSeries64 = LaurentSeries<f64>;
pub type LaurentSeries32 = LaurentSeries<f32>;
pub type TruncatedOperator64 = TruncatedOperator<f64>;
pub type TruncatedOperator32 = TruncatedOperator<f32>;
pub type CommutantBasis64 = CommutantBasis<f64>;
pub type ReducingLattice64 = ReducingLattice<f64>;
pub type KernelVector64 = KernelVector<f64>;
pub type CurvatureField64 = CurvatureField<f64>;
pub type SpaceKind64 = SpaceKind<f64>;
pub type CMatrix64 = CMatrix<f64>;
pub type CMatrix32 = CMatrix<f32>;
