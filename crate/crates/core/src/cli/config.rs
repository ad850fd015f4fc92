use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Annulus, GridSpec};
use crate::scalar::Complex;
use crate::spaces::{SpaceKind, Window};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    /// Relative singular-value cutoff for commutant null spaces.
    #[serde(default = "defaults::rank_tol")]
    pub rank_tol: f64,
    /// Residual bound for reducing-projection and round-trip identities.
    #[serde(default = "defaults::verify_tol")]
    pub verify_tol: f64,
    /// Entrywise tolerance for weight alignment.
    #[serde(default = "defaults::align_tol")]
    pub align_tol: f64,
    /// Frobenius distance from a minimal projection to its residue class.
    #[serde(default = "defaults::match_tol")]
    pub match_tol: f64,
    /// Relative error of the reproducing property.
    #[serde(default = "defaults::kernel_tol")]
    pub kernel_tol: f64,
    /// Relative residual of kernels in `ker (A − λⁿ)*`.
    #[serde(default = "defaults::nullspace_tol")]
    pub nullspace_tol: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            rank_tol: defaults::rank_tol(),
            verify_tol: defaults::verify_tol(),
            align_tol: defaults::align_tol(),
            match_tol: defaults::match_tol(),
            kernel_tol: defaults::kernel_tol(),
            nullspace_tol: defaults::nullspace_tol(),
        }
    }
}

mod defaults {
    pub fn rank_tol() -> f64 {
        1e-8
    }
    pub fn verify_tol() -> f64 {
        1e-8
    }
    pub fn align_tol() -> f64 {
        1e-6
    }
    pub fn match_tol() -> f64 {
        1e-6
    }
    pub fn kernel_tol() -> f64 {
        1e-6
    }
    pub fn nullspace_tol() -> f64 {
        1e-4
    }
    pub fn h() -> f64 {
        1e-2
    }
    pub fn restriction_h() -> f64 {
        2.5e-4
    }
    pub fn radial() -> usize {
        5
    }
    pub fn angular() -> usize {
        8
    }
}

/// Points and window for the kernel checks.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelConfig {
    /// Defaults to the main window.
    pub window: Option<[i64; 2]>,
    /// `[re, im]` pairs; empty means three points spread over the annulus.
    #[serde(default)]
    pub points: Vec<[f64; 2]>,
}

/// Curvature grid and stencil settings.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    /// Defaults to the kernel window.
    pub window: Option<[i64; 2]>,
    /// Radii default to 10% inside the domain on each side.
    pub inner_radius: Option<f64>,
    pub outer_radius: Option<f64>,
    #[serde(default = "defaults::radial")]
    pub radial: usize,
    #[serde(default = "defaults::angular")]
    pub angular: usize,
    #[serde(default = "defaults::h")]
    pub h: f64,
    /// Where the Richardson ratio is measured; defaults to mid-grid.
    pub richardson_point: Option<[f64; 2]>,
    /// Sample points for the restriction comparison; empty means six radii
    /// spread over the restrictions' annulus.
    #[serde(default)]
    pub restriction_points: Vec<[f64; 2]>,
    #[serde(default = "defaults::restriction_h")]
    pub restriction_h: f64,
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig {
            window: None,
            inner_radius: None,
            outer_radius: None,
            radial: defaults::radial(),
            angular: defaults::angular(),
            h: defaults::h(),
            richardson_point: None,
            restriction_points: Vec::new(),
            restriction_h: defaults::restriction_h(),
        }
    }
}

impl GridConfig {
    pub fn spec(&self, domain: Annulus<f64>) -> GridSpec<f64> {
        let pad = 0.1 * (domain.outer - domain.inner);
        GridSpec {
            inner_radius: self.inner_radius.unwrap_or(domain.inner + pad),
            outer_radius: self.outer_radius.unwrap_or(domain.outer - pad),
            radial: self.radial,
            angular: self.angular,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub space: SpaceKind<f64>,
    pub n: usize,
    pub window: [i64; 2],
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub kernel: KernelConfig,
    #[serde(default)]
    pub grid: GridConfig,
}

fn window_of(pair: [i64; 2], field: &str) -> Result<Window> {
    Window::new(pair[0], pair[1]).map_err(|e| Error::Config(format!("{field}: {e}")))
}

pub(crate) fn point(p: [f64; 2]) -> Complex<f64> {
    Complex::new(p[0], p[1])
}

impl ExperimentConfig {
    pub fn new(space: SpaceKind<f64>, n: usize, window: Window) -> Self {
        ExperimentConfig {
            space,
            n,
            window: [window.lo, window.hi],
            seed: 0,
            tolerances: Tolerances::default(),
            kernel: KernelConfig::default(),
            grid: GridConfig::default(),
        }
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let config: ExperimentConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if self.n < 1 {
            return bad("n: must be at least 1".into());
        }
        self.space.validate().map_err(|e| Error::Config(format!("space: {e}")))?;
        let window = self.main_window()?;
        if window.len() < 6 * self.n {
            return bad(format!("window: length {} is below 6n = {}", window.len(), 6 * self.n));
        }
        if let SpaceKind::Custom { beta } = &self.space {
            if beta.len() != window.len() {
                return bad(format!("space.beta: {} values for a window of {}", beta.len(), window.len()));
            }
            if self.kernel.window.is_some() || self.grid.window.is_some() {
                return bad("custom weights are only defined on the main window".into());
            }
        }
        let t = &self.tolerances;
        for (name, v) in [
            ("rank_tol", t.rank_tol),
            ("verify_tol", t.verify_tol),
            ("align_tol", t.align_tol),
            ("match_tol", t.match_tol),
            ("kernel_tol", t.kernel_tol),
            ("nullspace_tol", t.nullspace_tol),
            ("grid.h", self.grid.h),
            ("grid.restriction_h", self.grid.restriction_h),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return bad(format!("{name}: must be positive, got {v}"));
            }
        }
        self.kernel_window()?;
        self.grid_window()?;
        if self.grid.radial == 0 || self.grid.angular == 0 {
            return bad("grid: radial and angular counts must be positive".into());
        }
        Ok(())
    }

    pub fn main_window(&self) -> Result<Window> {
        window_of(self.window, "window")
    }

    pub fn kernel_window(&self) -> Result<Window> {
        match self.kernel.window {
            Some(w) => window_of(w, "kernel.window"),
            None => self.main_window(),
        }
    }

    pub fn grid_window(&self) -> Result<Window> {
        match self.grid.window {
            Some(w) => window_of(w, "grid.window"),
            None => self.kernel_window(),
        }
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }
}
