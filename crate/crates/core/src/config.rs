//! Run configuration: strict TOML with sections mirroring the module
//! parameter structs. Unknown keys are rejected so hyperparameter typos
//! fail loudly, and every run echoes its fully resolved configuration next
//! to its outputs.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::cmdp::TrainConfig;
use crate::error::{Error, Result};
use crate::inner_loop::ControlParams;
use crate::quadrotor::QuadParams;
use crate::transfer::{GainGrid, InitialStateSampler};
use crate::types::{ActionBounds, SafeSetSpec};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PlantSection {
    pub mass: f64,
    pub gravity: f64,
    pub inertia: f64,
    pub dt: f64,
    pub noise_sigma: f64,
    pub delta_thrust_max: f64,
    pub theta_ref_max: f64,
    pub moment_max: f64,
    pub filter_time_constant: f64,
    pub safe_boundary: f64,
}

impl Default for PlantSection {
    fn default() -> Self {
        let quad = QuadParams::default();
        let bounds = ActionBounds::default();
        let ctrl = ControlParams::default();
        Self {
            mass: quad.mass,
            gravity: quad.gravity,
            inertia: quad.inertia,
            dt: quad.dt,
            noise_sigma: quad.noise_sigma,
            delta_thrust_max: bounds.delta_thrust_max,
            theta_ref_max: bounds.theta_ref_max,
            moment_max: ctrl.moment_max,
            filter_time_constant: ctrl.filter_time_constant,
            safe_boundary: SafeSetSpec::default().boundary,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrainSection {
    pub delta: f64,
    pub gamma: f64,
    pub lambda0: f64,
    pub eta_lambda: f64,
    pub learning_rate: f64,
    pub clip_range: f64,
    pub gae_lambda: f64,
    pub horizon: usize,
    pub iterations: usize,
    pub episodes_per_iteration: usize,
    pub epochs_per_iteration: usize,
    pub minibatch_size: usize,
    pub goal_x: f64,
    pub goal_z: f64,
}

impl Default for TrainSection {
    fn default() -> Self {
        let cfg = TrainConfig::default();
        Self {
            delta: cfg.delta,
            gamma: cfg.gamma,
            lambda0: cfg.lambda0,
            eta_lambda: cfg.eta_lambda,
            learning_rate: cfg.learning_rate,
            clip_range: cfg.clip_range,
            gae_lambda: cfg.gae_lambda,
            horizon: cfg.horizon,
            iterations: cfg.iterations,
            episodes_per_iteration: cfg.episodes_per_iteration,
            epochs_per_iteration: cfg.epochs_per_iteration,
            minibatch_size: cfg.minibatch_size,
            goal_x: cfg.goal.0,
            goal_z: cfg.goal.1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepSection {
    pub omega_n: Vec<f64>,
    pub zeta: Vec<f64>,
    pub episodes: usize,
    pub p_x_values: Vec<f64>,
    pub p_z_values: Vec<f64>,
    pub velocity_min: f64,
    pub velocity_max: f64,
    pub deterministic_policy: bool,
}

impl Default for SweepSection {
    fn default() -> Self {
        let grid = GainGrid::default();
        let sampler = InitialStateSampler::default();
        Self {
            omega_n: grid.omega_n,
            zeta: grid.zeta,
            episodes: sampler.episodes,
            p_x_values: sampler.p_x_values,
            p_z_values: sampler.p_z_values,
            velocity_min: sampler.velocity_range.0,
            velocity_max: sampler.velocity_range.1,
            deterministic_policy: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CertifySection {
    pub omega_n: f64,
    pub zeta: f64,
    /// Process noise used for certification; must be positive.
    pub noise_sigma: f64,
    pub episodes: usize,
    /// Alpha grid resolution for the contraction fit.
    pub alpha_step: f64,
    /// Scalar weight of the pitch tracking norm.
    pub p_weight: f64,
    /// Overrides the training failure tolerance when set.
    pub delta: Option<f64>,
    /// Initial-state grids; defaults to the deployment sampler's.
    pub p_x_values: Vec<f64>,
    pub p_z_values: Vec<f64>,
    pub velocity_min: f64,
    pub velocity_max: f64,
}

impl Default for CertifySection {
    fn default() -> Self {
        let sampler = InitialStateSampler::default();
        Self {
            omega_n: 12.0,
            zeta: 1.0,
            noise_sigma: 0.05,
            episodes: 500,
            alpha_step: 1e-3,
            p_weight: 1.0,
            delta: None,
            p_x_values: sampler.p_x_values,
            p_z_values: sampler.p_z_values,
            velocity_min: sampler.velocity_range.0,
            velocity_max: sampler.velocity_range.1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct IoSection {
    pub out_dir: String,
}

impl Default for IoSection {
    fn default() -> Self {
        Self {
            out_dir: "runs/out".into(),
        }
    }
}

/// The complete run configuration.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub master_seed: u64,
    pub io: IoSection,
    pub plant: PlantSection,
    pub train: TrainSection,
    pub sweep: SweepSection,
    pub certify: CertifySection,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        self.quad_params().validate().map_err(|e| Error::Config(e.to_string()))?;
        self.train_config().validate()?;
        self.sweep_sampler().validate()?;
        if self.sweep.omega_n.is_empty() || self.sweep.zeta.is_empty() {
            return Err(Error::Config("sweep gain grid must be non-empty".into()));
        }
        if !(self.certify.alpha_step > 0.0 && self.certify.alpha_step < 1.0) {
            return Err(Error::Config("certify.alpha_step must lie in (0, 1)".into()));
        }
        Ok(())
    }

    /// Fully resolved TOML echo.
    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }

    pub fn quad_params(&self) -> QuadParams {
        QuadParams {
            mass: self.plant.mass,
            gravity: self.plant.gravity,
            inertia: self.plant.inertia,
            dt: self.plant.dt,
            noise_sigma: self.plant.noise_sigma,
        }
    }

    pub fn action_bounds(&self) -> ActionBounds {
        ActionBounds {
            delta_thrust_max: self.plant.delta_thrust_max,
            theta_ref_max: self.plant.theta_ref_max,
        }
    }

    pub fn control_params(&self) -> ControlParams {
        ControlParams {
            moment_max: self.plant.moment_max,
            filter_time_constant: self.plant.filter_time_constant,
        }
    }

    pub fn safe_set(&self) -> SafeSetSpec {
        SafeSetSpec::new(self.plant.safe_boundary)
    }

    pub fn train_config(&self) -> TrainConfig {
        TrainConfig {
            delta: self.train.delta,
            gamma: self.train.gamma,
            lambda0: self.train.lambda0,
            eta_lambda: self.train.eta_lambda,
            learning_rate: self.train.learning_rate,
            clip_range: self.train.clip_range,
            gae_lambda: self.train.gae_lambda,
            horizon: self.train.horizon,
            iterations: self.train.iterations,
            episodes_per_iteration: self.train.episodes_per_iteration,
            epochs_per_iteration: self.train.epochs_per_iteration,
            minibatch_size: self.train.minibatch_size,
            goal: (self.train.goal_x, self.train.goal_z),
            master_seed: self.master_seed,
        }
    }

    pub fn goal(&self) -> (f64, f64) {
        (self.train.goal_x, self.train.goal_z)
    }

    pub fn gain_grid(&self) -> GainGrid {
        GainGrid {
            omega_n: self.sweep.omega_n.clone(),
            zeta: self.sweep.zeta.clone(),
        }
    }

    pub fn sweep_sampler(&self) -> InitialStateSampler {
        InitialStateSampler {
            p_x_values: self.sweep.p_x_values.clone(),
            p_z_values: self.sweep.p_z_values.clone(),
            velocity_range: (self.sweep.velocity_min, self.sweep.velocity_max),
            episodes: self.sweep.episodes,
            seed: self.master_seed,
        }
    }

    pub fn certify_sampler(&self) -> InitialStateSampler {
        InitialStateSampler {
            p_x_values: self.certify.p_x_values.clone(),
            p_z_values: self.certify.p_z_values.clone(),
            velocity_range: (self.certify.velocity_min, self.certify.velocity_max),
            episodes: self.certify.episodes,
            seed: self.master_seed,
        }
    }

    /// Plant parameters with the certification noise level applied.
    pub fn certify_quad_params(&self) -> QuadParams {
        QuadParams {
            noise_sigma: self.certify.noise_sigma,
            ..self.quad_params()
        }
    }

    pub fn certify_delta(&self) -> f64 {
        self.certify.delta.unwrap_or(self.train.delta)
    }
}
