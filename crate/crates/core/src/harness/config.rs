//! Experiment configuration, read from TOML.
//!
//! Every key is optional; omitted keys take the defaults of
//! [`ExperimentConfig::default`]. Unknown keys are rejected, and every error
//! names the offending key path (e.g. `eta_list[2]`).

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Grid1D, PiecewiseConstantProfile};
use crate::kernel::{KernelFamily, KernelSpec, Orientation};
use crate::velocity::{Monotonicity, VelocityLaw, VelocityModel};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridSpec {
    pub x_min: f64,
    pub x_max: f64,
    /// Base resolution; sweeps refine it per η.
    pub n_cells: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            x_min: -1.0,
            x_max: 2.0,
            n_cells: 4096,
        }
    }
}

/// Piecewise-constant initial datum: `levels[0]` left of `breakpoints[0]`,
/// `levels[k]` between `breakpoints[k-1]` and `breakpoints[k]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ProfileSpec {
    pub breakpoints: Vec<f64>,
    pub levels: Vec<f64>,
}

impl Default for ProfileSpec {
    fn default() -> Self {
        let p = PiecewiseConstantProfile::platoon_gap_jam();
        Self {
            breakpoints: p.breakpoints().to_vec(),
            levels: p.levels().to_vec(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModeSpec {
    Decreasing,
    Increasing,
    SignedProduct,
}

impl From<ModeSpec> for Monotonicity {
    fn from(m: ModeSpec) -> Self {
        match m {
            ModeSpec::Decreasing => Monotonicity::Decreasing,
            ModeSpec::Increasing => Monotonicity::Increasing,
            ModeSpec::SignedProduct => Monotonicity::SignedProduct,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LawName {
    /// `v_max (1 - s / s_max)`
    Linear,
    /// `v_max (1 - (s / s_max)^2)`
    Quadratic,
    /// `v`
    Constant,
    /// `intercept + slope * s`
    Affine,
}

/// Velocity law by name plus the parameters that law uses.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VelocitySpec {
    pub model: LawName,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub v_max: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s_max: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub v: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub intercept: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub slope: Option<f64>,
    /// Admissible density range `[s_min, s_max]`.
    #[serde(default = "default_range")]
    pub range: [f64; 2],
    #[serde(default = "default_mode")]
    pub mode: ModeSpec,
}

impl VelocitySpec {
    pub fn law(&self) -> Result<VelocityLaw> {
        let need = |value: Option<f64>, key: &str| {
            value.ok_or_else(|| {
                Error::config(
                    format!("velocity.{key}"),
                    format!("required by the {:?} model", self.model),
                )
            })
        };
        let used: &[&str] = match self.model {
            LawName::Linear | LawName::Quadratic => &["v_max", "s_max"],
            LawName::Constant => &["v"],
            LawName::Affine => &["intercept", "slope"],
        };
        for (key, value) in [
            ("v_max", self.v_max),
            ("s_max", self.s_max),
            ("v", self.v),
            ("intercept", self.intercept),
            ("slope", self.slope),
        ] {
            if value.is_some() && !used.contains(&key) {
                return Err(Error::config(
                    format!("velocity.{key}"),
                    format!("not a parameter of the {:?} model", self.model),
                ));
            }
        }
        Ok(match self.model {
            LawName::Linear => VelocityLaw::Linear {
                v_max: need(self.v_max, "v_max")?,
                s_max: need(self.s_max, "s_max")?,
            },
            LawName::Quadratic => VelocityLaw::Quadratic {
                v_max: need(self.v_max, "v_max")?,
                s_max: need(self.s_max, "s_max")?,
            },
            LawName::Constant => VelocityLaw::Constant {
                v: need(self.v, "v")?,
            },
            LawName::Affine => VelocityLaw::Affine {
                intercept: need(self.intercept, "intercept")?,
                slope: need(self.slope, "slope")?,
            },
        })
    }
}

fn default_range() -> [f64; 2] {
    [0.0, 1.0]
}

fn default_mode() -> ModeSpec {
    ModeSpec::Decreasing
}

impl Default for VelocitySpec {
    fn default() -> Self {
        Self {
            model: LawName::Linear,
            v_max: Some(1.0),
            s_max: Some(1.0),
            v: None,
            intercept: None,
            slope: None,
            range: default_range(),
            mode: default_mode(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KernelName {
    Exponential,
    Constant,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OrientationName {
    Downstream,
    Upstream,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub grid: GridSpec,
    pub profile: ProfileSpec,
    pub velocity: VelocitySpec,
    pub kernel: KernelName,
    pub orientation: OrientationName,
    pub eta_list: Vec<f64>,
    pub cfl: f64,
    pub t_end: f64,
    pub snapshot_times: Vec<f64>,
    pub window: [f64; 2],
    pub reference_refinement: usize,
    pub output_dir: PathBuf,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            grid: GridSpec::default(),
            profile: ProfileSpec::default(),
            velocity: VelocitySpec::default(),
            kernel: KernelName::Exponential,
            orientation: OrientationName::Downstream,
            eta_list: vec![0.1, 0.01, 0.001],
            cfl: 0.5,
            t_end: 1.5,
            snapshot_times: (0..=30).map(|k| 0.05 * k as f64).collect(),
            window: [-1.0, 2.0],
            reference_refinement: 8,
            output_dir: PathBuf::from("out"),
        }
    }
}

/// Parses and validates a TOML document.
pub fn parse_config(document: &str) -> Result<ExperimentConfig> {
    let de = toml::Deserializer::parse(document).map_err(|e| Error::config("", e.message()))?;
    let cfg: ExperimentConfig = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        Error::config(
            if path == "." { String::new() } else { path },
            e.into_inner().message(),
        )
    })?;
    cfg.validate()?;
    Ok(cfg)
}

/// TOML text that [`parse_config`] maps back to `cfg`.
pub fn to_toml(cfg: &ExperimentConfig) -> Result<String> {
    toml::to_string(cfg).map_err(|e| Error::config("", e.to_string()))
}

impl ExperimentConfig {
    /// Checks every invariant; errors carry the key path.
    pub fn validate(&self) -> Result<()> {
        if self.eta_list.is_empty() {
            return Err(Error::config("eta_list", "must not be empty"));
        }
        for (i, &eta) in self.eta_list.iter().enumerate() {
            if !(eta.is_finite() && eta > 0.0) {
                return Err(Error::config(
                    format!("eta_list[{i}]"),
                    format!("must be positive and finite, got {eta}"),
                ));
            }
            if i > 0 && eta >= self.eta_list[i - 1] {
                return Err(Error::config(
                    format!("eta_list[{i}]"),
                    format!("must be below the previous entry {}", self.eta_list[i - 1]),
                ));
            }
        }
        if !(self.cfl > 0.0 && self.cfl <= 1.0) {
            return Err(Error::config(
                "cfl",
                format!("must lie in (0, 1], got {}", self.cfl),
            ));
        }
        if !(self.t_end.is_finite() && self.t_end > 0.0) {
            return Err(Error::config(
                "t_end",
                format!("must be positive, got {}", self.t_end),
            ));
        }
        for (i, &t) in self.snapshot_times.iter().enumerate() {
            if !(t.is_finite() && t >= 0.0 && t <= self.t_end * (1.0 + 1e-12)) {
                return Err(Error::config(
                    format!("snapshot_times[{i}]"),
                    format!("must lie in [0, t_end], got {t}"),
                ));
            }
            if i > 0 && t <= self.snapshot_times[i - 1] {
                return Err(Error::config(
                    format!("snapshot_times[{i}]"),
                    "must be strictly increasing",
                ));
            }
        }
        if self.reference_refinement < 4 {
            return Err(Error::config(
                "reference_refinement",
                format!("must be at least 4, got {}", self.reference_refinement),
            ));
        }
        let grid = self.base_grid()?;
        let [lo, hi] = self.window;
        if !(lo < hi && lo >= grid.x_min() && hi <= grid.x_max()) {
            return Err(Error::config(
                "window",
                format!(
                    "must satisfy x_min <= lo < hi <= x_max, got [{lo}, {hi}] in [{}, {}]",
                    grid.x_min(),
                    grid.x_max()
                ),
            ));
        }
        let velocity = self.velocity_model()?;
        let profile = self.profile()?;
        let (lo, hi) = profile
            .levels()
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| {
                (a.min(v), b.max(v))
            });
        if !velocity.covers(lo, hi) {
            return Err(Error::config(
                "profile.levels",
                format!("levels span [{lo}, {hi}], outside velocity.range"),
            ));
        }
        self.kernel_spec(self.eta_list[0])?
            .check_pairing(&velocity)
            .map_err(|e| Error::config("orientation", e.to_string()))?;
        Ok(())
    }

    pub fn base_grid(&self) -> Result<Grid1D> {
        let p = self.profile()?;
        Grid1D::new(
            self.grid.x_min,
            self.grid.x_max,
            self.grid.n_cells,
            p.left_level(),
            p.right_level(),
        )
        .map_err(|e| Error::config("grid", e.to_string()))
    }

    pub fn profile(&self) -> Result<PiecewiseConstantProfile> {
        let new = match self.velocity.mode {
            ModeSpec::SignedProduct => PiecewiseConstantProfile::new_signed,
            _ => PiecewiseConstantProfile::new,
        };
        new(
            self.profile.breakpoints.clone(),
            self.profile.levels.clone(),
        )
        .map_err(|e| Error::config("profile", e.to_string()))
    }

    pub fn velocity_model(&self) -> Result<VelocityModel> {
        let [s_min, s_max] = self.velocity.range;
        VelocityModel::new(
            self.velocity.law()?,
            s_min,
            s_max,
            self.velocity.mode.into(),
        )
        .map_err(|e| Error::config("velocity", e.to_string()))
    }

    pub fn kernel_family(&self) -> KernelFamily {
        match self.kernel {
            KernelName::Exponential => KernelFamily::Exponential,
            KernelName::Constant => KernelFamily::Constant,
        }
    }

    pub fn kernel_orientation(&self) -> Orientation {
        match self.orientation {
            OrientationName::Downstream => Orientation::Downstream,
            OrientationName::Upstream => Orientation::Upstream,
        }
    }

    pub fn kernel_spec(&self, eta: f64) -> Result<KernelSpec> {
        KernelSpec::new(self.kernel_family(), eta, self.kernel_orientation())
            .map_err(|e| Error::config("eta_list", e.to_string()))
    }
}
