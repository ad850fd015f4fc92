use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;
use crate::geometry::{Annulus, CurvatureSample, GridSpec, SpectrumEstimate};
use crate::lattice::LatticeKind;
use crate::spaces::WeightClass;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    /// `value ≤ tol`
    AtMost,
    /// `value ≥ tol`
    AtLeast,
    /// `value < tol`
    Below,
    /// `|value − target| ≤ tol`
    Near { target: f64 },
}

/// A verified number together with the bound it was held to. Non-finite
/// values are stored as `null` and never pass.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Measured {
    pub value: Option<f64>,
    pub tol: f64,
    pub relation: Relation,
    pub passed: bool,
}

impl Measured {
    pub fn new(value: f64, tol: f64, relation: Relation) -> Self {
        let passed = value.is_finite()
            && match relation {
                Relation::AtMost => value <= tol,
                Relation::AtLeast => value >= tol,
                Relation::Below => value < tol,
                Relation::Near { target } => (value - target).abs() <= tol,
            };
        Measured { value: value.is_finite().then_some(value), tol, relation, passed }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub measured: Measured,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Skipped {
    pub section: String,
    pub reason: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WindowEcho {
    pub requested: [i64; 2],
    /// Requested window trimmed at the top to a multiple of `n`.
    pub effective: [i64; 2],
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassifySection {
    pub label: String,
    pub radius_hint: f64,
    pub class: WeightClass<f64>,
    pub spectrum: SpectrumEstimate<f64>,
    /// Diagonal of `[T*, T]` with the two edge entries dropped.
    pub self_commutator_min: f64,
    pub self_commutator_max: f64,
    /// `min ≥ −verify_tol`.
    pub hyponormal: Measured,
    pub weights_csv: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CommutantSummary {
    pub dim: usize,
    pub gap_ratio: f64,
    pub smallest_kept: Option<f64>,
    pub largest_dropped: f64,
    pub rank_tol: f64,
    pub ill_conditioned: bool,
    /// Largest `‖XA − AX‖_F` over the basis.
    pub residual: Measured,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MemberSummary {
    pub bitmask: u64,
    /// Worst of the four reducing identities.
    pub residual: Measured,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MatchSummary {
    pub projection: usize,
    pub residue: usize,
    pub distance: Measured,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LatticeSection {
    pub n: usize,
    pub commutant: CommutantSummary,
    pub star_commutant: CommutantSummary,
    pub kind: LatticeKind,
    pub member_count: usize,
    pub members: Vec<MemberSummary>,
    /// Block sizes of the *-commutant as a direct sum of matrix algebras.
    pub algebra_dims: Vec<usize>,
    pub projection_residual: Option<Measured>,
    pub residue_matching: Vec<MatchSummary>,
    pub clustering_attempts: usize,
    /// Largest `‖X − Σ M_{F_i} P_i‖_F` over the commutant basis.
    pub symbol_round_trip: Measured,
    /// Largest coefficient error of symbols → twist → symbols.
    pub twist_round_trip: Measured,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairAlignment {
    pub i: usize,
    pub j: usize,
    pub shift: Option<i64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShiftRecovery {
    pub applied: i64,
    pub recovered: Option<i64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EquivalenceSection {
    pub n: usize,
    pub align_tol: f64,
    pub pairs: Vec<PairAlignment>,
    /// No pair of restrictions aligns.
    pub pairwise_inequivalent: bool,
    /// Random sequences aligned against shifted copies of themselves.
    pub control: Vec<ShiftRecovery>,
    /// Number of control shifts not recovered exactly.
    pub control_failures: Measured,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KernelPoint {
    pub omega: [f64; 2],
    pub admissible: bool,
    pub tail_ratio: Option<f64>,
    pub reproducing: Option<Measured>,
    pub nullspace: Option<Measured>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KernelSection {
    pub window: [i64; 2],
    pub spectrum: SpectrumEstimate<f64>,
    pub margin: f64,
    pub points: Vec<KernelPoint>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RestrictionSummary {
    pub n: usize,
    pub h: f64,
    pub samples: Vec<CurvatureSample<f64>>,
    pub separated: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurvatureSection {
    pub window: [i64; 2],
    pub domain: Annulus<f64>,
    pub grid: GridSpec<f64>,
    pub h: f64,
    pub max_value: Measured,
    pub richardson_point: [f64; 2],
    pub richardson_ratio: Measured,
    /// `K(0)` of the unit-disk kernel against the closed form `−4`.
    pub disk_control: Measured,
    pub restrictions: Option<RestrictionSummary>,
    pub field_csv: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema_version: u32,
    pub command: String,
    pub seed: u64,
    pub config: ExperimentConfig,
    pub window: WindowEcho,
    pub classification: Option<ClassifySection>,
    pub lattice: Option<LatticeSection>,
    pub equivalence: Option<EquivalenceSection>,
    pub kernel: Option<KernelSection>,
    pub curvature: Option<CurvatureSection>,
    pub skipped: Vec<Skipped>,
    pub checks: Vec<Check>,
    pub side_files: Vec<String>,
    pub passed: bool,
}

impl Report {
    pub fn failed_checks(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.measured.passed)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> crate::Result<Self> {
        serde_json::from_str(text).map_err(|e| crate::Error::Config(format!("report: {e}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn measured_relations() {
        assert!(Measured::new(1e-9, 1e-8, Relation::AtMost).passed);
        assert!(!Measured::new(1e-7, 1e-8, Relation::AtMost).passed);
        assert!(Measured::new(2e4, 1e4, Relation::AtLeast).passed);
        assert!(!Measured::new(0.0, 0.0, Relation::Below).passed);
        assert!(Measured::new(4.5, 0.8, Relation::Near { target: 4.0 }).passed);
        let nan = Measured::new(f64::NAN, 1.0, Relation::AtMost);
        assert!(!nan.passed && nan.value.is_none());
    }
}
