//! Run configuration: one structured TOML file covering the surface, the
//! perturbation family, the observable, integrator and quadrature settings,
//! and per-experiment parameters. Flags only override the top-level scalars.

use serde::{Deserialize, Serialize};

use horolab_core::experiments::{
    BoundsConfig, EquidistConfig, HorocycleRateConfig, LiouvilleConfig, ReductionConfig,
    ShadowingConfig,
};
use horolab_core::fields::{FamilySpec, ObservableSpec};
use horolab_core::flows::IntegratorConfig;
use horolab_core::functionals::{GridSpec, QuadratureConfig};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    pub master_seed: u64,
    /// Worker threads; zero uses every core.
    pub workers: usize,
    pub out_dir: String,
    pub surface: SurfaceConfig,
    /// `None` selects the built-in default family.
    pub family: Option<FamilySpec>,
    /// `None` selects the built-in default observable.
    pub observable: Option<ObservableSpec>,
    pub integrator: IntegratorConfig,
    pub quadrature: QuadratureConfig,
    pub liouville: LiouvilleConfig,
    pub equidist: EquidistConfig,
    pub admissibility: GridSpec,
    pub horocycle_rate: HorocycleRateConfig,
    pub reduction: ReductionConfig,
    pub shadowing: ShadowingExperimentConfig,
    pub bounds: BoundsConfig,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct SurfaceConfig {
    /// "bolza" or "file".
    pub kind: String,
    /// Definition file path when `kind = "file"`.
    pub path: Option<String>,
}

impl Default for SurfaceConfig {
    fn default() -> Self {
        Self {
            kind: "bolza".to_string(),
            path: None,
        }
    }
}

/// Shadowing experiment sweep: magnitudes and states.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct ShadowingExperimentConfig {
    pub eps_magnitudes: Vec<f64>,
    pub n_states: usize,
    pub state_seed: u64,
    pub search: ShadowingConfig,
}

impl Default for ShadowingExperimentConfig {
    fn default() -> Self {
        Self {
            eps_magnitudes: vec![1e-4, 3e-4, 1e-3, 3e-3, 1e-2],
            n_states: 10,
            state_seed: 0x5ade,
            search: ShadowingConfig::default(),
        }
    }
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            master_seed: 1,
            workers: 0,
            out_dir: "horolab-out".to_string(),
            surface: SurfaceConfig::default(),
            family: None,
            observable: None,
            integrator: IntegratorConfig::default(),
            quadrature: QuadratureConfig::default(),
            liouville: LiouvilleConfig::default(),
            equidist: EquidistConfig::default(),
            admissibility: GridSpec::default(),
            horocycle_rate: HorocycleRateConfig::default(),
            reduction: ReductionConfig::default(),
            shadowing: ShadowingExperimentConfig::default(),
            bounds: BoundsConfig::default(),
        }
    }
}

impl RunConfig {
    pub fn from_file(path: &str) -> Result<Self, String> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| format!("cannot read config '{path}': {e}"))?;
        let mut cfg: RunConfig =
            toml::from_str(&text).map_err(|e| format!("config '{path}': {e}"))?;
        cfg.reseed();
        cfg.validate()?;
        Ok(cfg)
    }

    /// Derives every experiment seed from the master seed so one scalar
    /// reproduces a whole run.
    pub fn reseed(&mut self) {
        let derive = |tag: u64| -> u64 {
            self.master_seed
                .wrapping_mul(0x9E37_79B9_7F4A_7C15)
                .wrapping_add(tag)
        };
        self.liouville.seed = derive(1);
        self.equidist.base_point_seed = derive(2);
        self.equidist.box_seed = derive(3);
        self.horocycle_rate.seed = derive(4);
        self.reduction.seed = derive(5);
        self.shadowing.state_seed = derive(6);
        self.bounds.seed = derive(7);
        self.bounds.box_seed = derive(8);
    }

    pub fn validate(&self) -> Result<(), String> {
        match self.surface.kind.as_str() {
            "bolza" => {}
            "file" => {
                if self.surface.path.is_none() {
                    return Err("surface.kind = \"file\" requires surface.path".into());
                }
            }
            other => return Err(format!("surface.kind: unknown kind '{other}'")),
        }
        if !(self.integrator.h > 0.0) {
            return Err("integrator.h: must be positive".into());
        }
        if !(self.quadrature.t_max > 0.0) {
            return Err("quadrature.t_max: must be positive".into());
        }
        if !(self.equidist.t > 1.0 && self.equidist.t < 1.5) {
            return Err("equidist.t: critical exponent must lie in (1, 3/2)".into());
        }
        if !(self.equidist.t_subcritical < 1.0) {
            return Err("equidist.t_subcritical: must be below 1".into());
        }
        if !self
            .equidist
            .b0_list
            .windows(2)
            .all(|w| w[1] < w[0])
        {
            return Err("equidist.b0_list: must be strictly decreasing".into());
        }
        if !(self.reduction.t > 1.0 && self.reduction.t < 1.5) {
            return Err("reduction.t: critical exponent must lie in (1, 3/2)".into());
        }
        if !self
            .horocycle_rate
            .t_list
            .windows(2)
            .all(|w| w[1] > w[0])
        {
            return Err("horocycle_rate.t_list: must be strictly increasing".into());
        }
        Ok(())
    }
}
