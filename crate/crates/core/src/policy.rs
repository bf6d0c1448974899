//! Stochastic feedforward policy and critic over the outer state.
//!
//! The actor maps the (fixed-scaled) outer state to the mean of a diagonal
//! Gaussian in a normalized action square; samples are clipped to the square
//! and then scaled to the physical bounds, which implements the projection
//! of references onto the admissible set. Log-probabilities are evaluated
//! pre-clip. The critic shares the trunk shape and predicts the value in
//! units of [`VALUE_SCALE`] to keep regression targets well conditioned.

use ndarray::Array1;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::nn::Mlp;
use crate::types::{ActionBounds, OuterState, PolicyAction};

pub const OBS_DIM: usize = 4;
pub const ACTION_DIM: usize = 2;
pub const HIDDEN_WIDTH: usize = 64;
/// The critic outputs value / VALUE_SCALE.
pub const VALUE_SCALE: f64 = 100.0;
pub const LOG_STD_MIN: f64 = -5.0;
pub const LOG_STD_MAX: f64 = 1.0;
pub const LOG_STD_INIT: f64 = -0.5;

const LN_2PI: f64 = 1.8378770664093453;

/// Actor and critic weights plus the state-independent log standard
/// deviations of the action Gaussian.
#[derive(Debug, Clone, PartialEq)]
pub struct PolicyParameters {
    pub actor: Mlp,
    pub log_std: Array1<f64>,
    pub critic: Mlp,
}

/// Fixed affine featurization of the outer state. Part of the architecture,
/// not a learned parameter.
pub fn observe(s: &OuterState) -> [f64; OBS_DIM] {
    [s.p_x / 5.0 - 1.0, s.v_x / 2.0, s.p_z / 5.0 - 1.0, s.v_z / 2.0]
}

impl PolicyParameters {
    pub fn init(rng: &mut ChaCha8Rng) -> Self {
        let actor = Mlp::init(&[OBS_DIM, HIDDEN_WIDTH, HIDDEN_WIDTH, ACTION_DIM], 0.01, rng);
        let critic = Mlp::init(&[OBS_DIM, HIDDEN_WIDTH, HIDDEN_WIDTH, 1], 1.0, rng);
        Self {
            actor,
            log_std: Array1::from_elem(ACTION_DIM, LOG_STD_INIT),
            critic,
        }
    }

    /// A policy whose mean action is identically zero (hover); useful as a
    /// deterministic baseline in tests.
    pub fn zeroed() -> Self {
        let mut rng = crate::rng::stream_rng(0, crate::rng::StreamDomain::PolicyInit, u64::MAX);
        let mut p = Self::init(&mut rng);
        for w in p.actor.weights.iter_mut().chain(p.critic.weights.iter_mut()) {
            w.fill(0.0);
        }
        for b in p.actor.biases.iter_mut().chain(p.critic.biases.iter_mut()) {
            b.fill(0.0);
        }
        p
    }

    pub fn is_finite(&self) -> bool {
        let nets = self
            .actor
            .weights
            .iter()
            .chain(self.critic.weights.iter())
            .all(|w| w.iter().all(|v| v.is_finite()));
        nets && self.log_std.iter().all(|v| v.is_finite())
    }

    /// Mean of the action Gaussian in the normalized square.
    pub fn action_mean(&self, s: &OuterState) -> [f64; ACTION_DIM] {
        let out = self.actor.forward_one(&observe(s));
        [out[0], out[1]]
    }

    /// Critic value estimate for the penalized return.
    pub fn value(&self, s: &OuterState) -> f64 {
        VALUE_SCALE * self.critic.forward_one(&observe(s))[0]
    }

    /// Deterministic (mean) action projected onto the admissible box.
    pub fn deterministic_action(&self, s: &OuterState, bounds: &ActionBounds) -> PolicyAction {
        let mean = self.action_mean(s);
        scale_to_bounds(&mean, bounds)
    }

    /// Sample an action. Returns the physical action, the pre-clip sample in
    /// the normalized square, and its log-probability.
    pub fn sample_action(
        &self,
        s: &OuterState,
        bounds: &ActionBounds,
        rng: &mut ChaCha8Rng,
    ) -> (PolicyAction, [f64; ACTION_DIM], f64) {
        let mean = self.action_mean(s);
        let mut raw = [0.0; ACTION_DIM];
        for d in 0..ACTION_DIM {
            let noise: f64 = rng.sample(StandardNormal);
            raw[d] = mean[d] + self.log_std[d].exp() * noise;
        }
        let logp = log_prob(&mean, &self.log_std, &raw);
        (scale_to_bounds(&raw, bounds), raw, logp)
    }

    /// Number of scalar parameters across actor, log-std, and critic.
    pub fn param_count(&self) -> usize {
        self.actor.param_count() + ACTION_DIM + self.critic.param_count()
    }

    /// Flat parameter access in the order actor, log_std, critic.
    pub fn get_param(&self, idx: usize) -> f64 {
        let na = self.actor.param_count();
        if idx < na {
            self.actor.get_param(idx)
        } else if idx < na + ACTION_DIM {
            self.log_std[idx - na]
        } else {
            self.critic.get_param(idx - na - ACTION_DIM)
        }
    }

    pub fn set_param(&mut self, idx: usize, value: f64) {
        let na = self.actor.param_count();
        if idx < na {
            self.actor.set_param(idx, value);
        } else if idx < na + ACTION_DIM {
            self.log_std[idx - na] = value;
        } else {
            self.critic.set_param(idx - na - ACTION_DIM, value);
        }
    }

    /// Geometric structure summary used in training logs: mean of the
    /// per-dimension standard deviations.
    pub fn mean_std(&self) -> f64 {
        self.log_std.iter().map(|l| l.exp()).sum::<f64>() / ACTION_DIM as f64
    }
}

/// Clip a normalized sample to the unit square and scale to physical units.
pub fn scale_to_bounds(raw: &[f64; ACTION_DIM], bounds: &ActionBounds) -> PolicyAction {
    PolicyAction {
        delta_thrust: raw[0].clamp(-1.0, 1.0) * bounds.delta_thrust_max,
        theta_ref: raw[1].clamp(-1.0, 1.0) * bounds.theta_ref_max,
    }
}

/// Diagonal-Gaussian log-density of `raw` under (`mean`, `exp(log_std)`).
pub fn log_prob(mean: &[f64; ACTION_DIM], log_std: &Array1<f64>, raw: &[f64; ACTION_DIM]) -> f64 {
    let mut lp = 0.0;
    for d in 0..ACTION_DIM {
        let std = log_std[d].exp();
        let z = (raw[d] - mean[d]) / std;
        lp += -0.5 * z * z - log_std[d] - 0.5 * LN_2PI;
    }
    lp
}
