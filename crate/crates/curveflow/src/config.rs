//! Declarative run configuration: a TOML file format, named presets, and
//! validation shared by the CLI and by tests.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::flow::FlowModel;
use crate::geometry::{sample_initial_curve, InitialCurveSpec, PolygonalCurve};
use crate::redistribution::RedistributionParams;
use crate::simulation::{StopMode, StopRule};

/// Normal-velocity model selector as it appears in configuration files.
///
/// The affine model reads its curvature regularization from the top-level
/// `delta` field of [`SimulationConfig`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum FlowSpec {
    CurveShortening,
    Affine,
    Anisotropic { a: f64, m: u32, nu0: f64 },
    ForcedElliptic { p: f64, q: f64 },
    ForcedRadial { p: f64, q: f64 },
}

/// Which condition ends a configured run.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum StopModeSpec {
    ShrinkToPoint {
        #[serde(default = "default_stop_threshold")]
        area_ratio_threshold: f64,
    },
    SteadyState {
        #[serde(default = "default_stop_threshold")]
        rel_change_threshold: f64,
    },
}

/// Stop condition plus hard guards against runaway runs.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StopSpec {
    #[serde(flatten)]
    pub mode: StopModeSpec,
    #[serde(default = "default_max_steps")]
    pub max_steps: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_time: Option<f64>,
}

/// One complete run description, loadable from a TOML file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulationConfig {
    pub flow: FlowSpec,
    pub initial_curve: InitialCurveSpec,
    pub n: usize,
    pub tau: f64,
    #[serde(default)]
    pub epsilon: f64,
    #[serde(default)]
    pub kappa1: f64,
    #[serde(default)]
    pub kappa2: f64,
    #[serde(default = "default_delta")]
    pub delta: f64,
    pub stop: StopSpec,
    #[serde(default = "default_snapshot_every")]
    pub snapshot_every: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
    #[serde(default)]
    pub emit_svg: bool,
}

fn default_stop_threshold() -> f64 {
    1e-5
}

fn default_max_steps() -> u64 {
    StopRule::DEFAULT_MAX_STEPS
}

fn default_delta() -> f64 {
    1e-6
}

fn default_snapshot_every() -> u64 {
    10
}

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("cannot parse configuration: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("invalid configuration: {0}")]
    Validation(String),
    #[error("unknown preset {name:?}; available presets: {}", PRESET_NAMES.join(", "))]
    UnknownPreset { name: String },
}

fn validation(message: impl std::fmt::Display) -> ConfigError {
    ConfigError::Validation(message.to_string())
}

impl SimulationConfig {
    /// Check every invariant the file format promises. Builders for the
    /// model, parameters, and initial curve are exercised so their
    /// constraints surface here as well.
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.n < 4 {
            return Err(validation(format!(
                "grid size must be at least 4, got {}",
                self.n
            )));
        }
        if !(self.tau > 0.0 && self.tau.is_finite()) {
            return Err(validation(format!(
                "time step must be positive and finite, got {}",
                self.tau
            )));
        }
        if !(0.0..1.0).contains(&self.epsilon) {
            return Err(validation(format!(
                "epsilon must lie in [0, 1), got {}",
                self.epsilon
            )));
        }
        if !(self.delta > 0.0 && self.delta.is_finite()) {
            return Err(validation(format!(
                "delta must be positive and finite, got {}",
                self.delta
            )));
        }
        let threshold = match self.stop.mode {
            StopModeSpec::ShrinkToPoint {
                area_ratio_threshold,
            } => area_ratio_threshold,
            StopModeSpec::SteadyState {
                rel_change_threshold,
            } => rel_change_threshold,
        };
        if !(threshold > 0.0 && threshold.is_finite()) {
            return Err(validation(format!(
                "stop threshold must be positive and finite, got {threshold}"
            )));
        }
        if self.stop.max_steps == 0 {
            return Err(validation("max_steps must be at least 1"));
        }
        if let Some(max_time) = self.stop.max_time {
            if !(max_time > 0.0) {
                return Err(validation(format!(
                    "max_time must be positive, got {max_time}"
                )));
            }
        }
        if self.snapshot_every == 0 {
            return Err(validation("snapshot_every must be at least 1"));
        }
        self.build_params()?;
        self.build_model()?;
        self.build_initial_curve()?;
        Ok(())
    }

    pub fn build_model(&self) -> Result<FlowModel, ConfigError> {
        let model = match &self.flow {
            FlowSpec::CurveShortening => FlowModel::curve_shortening(),
            FlowSpec::Affine => FlowModel::affine(self.delta).map_err(validation)?,
            FlowSpec::Anisotropic { a, m, nu0 } => {
                FlowModel::anisotropic(*a, *m, *nu0).map_err(validation)?
            }
            FlowSpec::ForcedElliptic { p, q } => FlowModel::forced_elliptic(*p, *q),
            FlowSpec::ForcedRadial { p, q } => FlowModel::forced_radial(*p, *q),
        };
        Ok(model)
    }

    pub fn build_params(&self) -> Result<RedistributionParams, ConfigError> {
        RedistributionParams::new(self.epsilon, self.kappa1, self.kappa2).map_err(validation)
    }

    pub fn build_initial_curve(&self) -> Result<PolygonalCurve, ConfigError> {
        sample_initial_curve(&self.initial_curve, self.n).map_err(validation)
    }

    pub fn stop_rule(&self) -> StopRule {
        let mode = match self.stop.mode {
            StopModeSpec::ShrinkToPoint {
                area_ratio_threshold,
            } => StopMode::ShrinkToPoint {
                area_ratio_threshold,
            },
            StopModeSpec::SteadyState {
                rel_change_threshold,
            } => StopMode::SteadyState {
                rel_change_threshold,
            },
        };
        StopRule {
            mode,
            max_steps: self.stop.max_steps,
            max_time: self.stop.max_time.unwrap_or(f64::INFINITY),
        }
    }
}

/// Parse a configuration from TOML text and validate it.
pub fn parse_config(text: &str) -> Result<SimulationConfig, ConfigError> {
    let config: SimulationConfig = toml::from_str(text)?;
    config.validate()?;
    Ok(config)
}

/// Read and validate a configuration file.
pub fn load_config(path: &Path) -> Result<SimulationConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_config(&text)
}

/// Names accepted by [`preset`], in display order.
pub const PRESET_NAMES: &[&str] = &[
    "circle_shortening",
    "affine_ellipse_3to1",
    "affine_ellipse_3to1_uniform",
    "weighted",
    "forced_circle",
    "forced_ellipse_2to1",
    "affine_star",
];

/// A ready-made configuration for one of the named experiments.
pub fn preset(name: &str) -> Result<SimulationConfig, ConfigError> {
    let shrink = |threshold: f64| StopSpec {
        mode: StopModeSpec::ShrinkToPoint {
            area_ratio_threshold: threshold,
        },
        max_steps: StopRule::DEFAULT_MAX_STEPS,
        max_time: None,
    };
    let steady = |threshold: f64| StopSpec {
        mode: StopModeSpec::SteadyState {
            rel_change_threshold: threshold,
        },
        max_steps: StopRule::DEFAULT_MAX_STEPS,
        max_time: None,
    };
    let base = |flow: FlowSpec,
                initial_curve: InitialCurveSpec,
                tau: f64,
                epsilon: f64,
                kappa1: f64,
                kappa2: f64,
                stop: StopSpec| SimulationConfig {
        flow,
        initial_curve,
        n: 100,
        tau,
        epsilon,
        kappa1,
        kappa2,
        delta: default_delta(),
        stop,
        snapshot_every: default_snapshot_every(),
        output_dir: None,
        emit_svg: false,
    };

    let config = match name {
        // Unit circle under beta = k; shrinks to a point at t = 1/2.
        "circle_shortening" => base(
            FlowSpec::CurveShortening,
            InitialCurveSpec::Circle { radius: 1.0 },
            1e-4,
            0.0,
            10.0,
            0.0,
            shrink(1e-5),
        ),
        // 3:1 ellipse under beta = k^(1/3): shape-preserving shrinking with
        // points concentrated at the tips.
        "affine_ellipse_3to1" => base(
            FlowSpec::Affine,
            InitialCurveSpec::Ellipse { a: 1.5, b: 0.5 },
            1e-3,
            0.9,
            100.0,
            100.0,
            shrink(1e-5),
        ),
        // Same flow with uniform redistribution for comparison.
        "affine_ellipse_3to1_uniform" => base(
            FlowSpec::Affine,
            InitialCurveSpec::Ellipse { a: 1.5, b: 0.5 },
            1e-3,
            0.0,
            100.0,
            100.0,
            shrink(1e-5),
        ),
        // Fourfold anisotropic weight; the circle develops four flat sides
        // and kinks between them as it shrinks.
        "weighted" => base(
            FlowSpec::Anisotropic {
                a: 0.8,
                m: 4,
                nu0: std::f64::consts::FRAC_PI_4,
            },
            InitialCurveSpec::Circle { radius: 1.0 },
            1e-3,
            0.1,
            100.0,
            100.0,
            shrink(1e-5),
        ),
        // External forcing with elliptic level sets; the circle loses
        // convexity and settles into a steady shape. The forcing drives an
        // early outward transient with strongly negative mean curvature
        // velocity, so the kappa2 feedback term would make the redistribution
        // rate negative and unravel the mesh; a constant kappa1 keeps the
        // relaxation rate positive throughout.
        "forced_circle" => {
            let mut config = base(
                FlowSpec::ForcedElliptic { p: 1.25, q: 3.0 },
                InitialCurveSpec::Circle { radius: 1.0 },
                1e-4,
                0.0,
                1000.0,
                0.0,
                steady(1e-6),
            );
            config.snapshot_every = 500;
            config
        }
        // Radially forced flow started from a 2:1 ellipse; the equilibrium
        // is reached only after the curve passes through nonconvex shapes.
        "forced_ellipse_2to1" => {
            let mut config = base(
                FlowSpec::ForcedRadial { p: 1.956, q: 1.15 },
                InitialCurveSpec::Ellipse { a: 2.0, b: 1.0 },
                1e-4,
                0.0,
                1000.0,
                0.0,
                steady(1e-6),
            );
            config.snapshot_every = 500;
            config
        }
        // Nonconvex star under the affine flow; stops while the mesh is
        // still comfortably resolved.
        "affine_star" => base(
            FlowSpec::Affine,
            InitialCurveSpec::FourierStar {
                base_radius: 1.0,
                amplitudes: vec![0.18, 0.07],
                modes: vec![3, 5],
            },
            1e-3,
            0.1,
            100.0,
            100.0,
            shrink(1e-2),
        ),
        other => {
            return Err(ConfigError::UnknownPreset {
                name: other.to_string(),
            })
        }
    };
    Ok(config)
}
