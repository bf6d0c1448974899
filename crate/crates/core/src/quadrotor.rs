//! Planar-quadrotor dynamics: the full-order plant and the reduced-order
//! training model, discretized with semi-implicit Euler.
//!
//! Both models share one translational update, so the reduced model matches
//! the full model's outer transition exactly whenever the physical pitch
//! equals the commanded reference. Accelerations are evaluated at the
//! pre-step attitude; velocities update first and positions integrate the
//! updated velocities. The optional process noise enters the velocity stage
//! as an i.i.d. Gaussian disturbance per translational channel, which keeps
//! the transition kernel a fixed-covariance Gaussian in the velocities.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::rng::{stream_rng, StreamDomain};
use crate::types::{ActionBounds, FullState, InnerState, OuterState, PolicyAction};

/// Physical parameters of the planar quadrotor and its discretization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadParams {
    /// Vehicle mass (kg).
    pub mass: f64,
    /// Gravitational acceleration (m/s²).
    pub gravity: f64,
    /// Pitch moment of inertia (kg·m²).
    pub inertia: f64,
    /// Sampling time (s).
    pub dt: f64,
    /// Standard deviation of the per-step Gaussian disturbance added to each
    /// translational velocity (m/s). Zero disables process noise.
    pub noise_sigma: f64,
}

impl Default for QuadParams {
    fn default() -> Self {
        Self {
            mass: 1.0,
            gravity: 9.81,
            inertia: 0.02,
            dt: 0.05,
            noise_sigma: 0.0,
        }
    }
}

impl QuadParams {
    /// Nominal hover thrust, always `mass * gravity`.
    pub fn hover_thrust(&self) -> f64 {
        self.mass * self.gravity
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.mass > 0.0) {
            return Err(Error::InvalidInput(format!("mass must be positive, got {}", self.mass)));
        }
        if !(self.inertia > 0.0) {
            return Err(Error::InvalidInput(format!(
                "inertia must be positive, got {}",
                self.inertia
            )));
        }
        if !(self.dt > 0.0) {
            return Err(Error::InvalidInput(format!("dt must be positive, got {}", self.dt)));
        }
        if !(self.noise_sigma >= 0.0) {
            return Err(Error::InvalidInput(format!(
                "noise_sigma must be nonnegative, got {}",
                self.noise_sigma
            )));
        }
        Ok(())
    }
}

/// Semi-implicit translational update shared by the full and reduced models.
/// `theta` is the physical pitch for the full model and the commanded
/// reference for the reduced one.
fn translational_step(s: &OuterState, thrust: f64, theta: f64, p: &QuadParams, rng: &mut ChaCha8Rng) -> OuterState {
    let ax = thrust / p.mass * theta.sin();
    let az = thrust / p.mass * theta.cos() - p.gravity;
    let (wx, wz) = if p.noise_sigma > 0.0 {
        let nx: f64 = rng.sample(StandardNormal);
        let nz: f64 = rng.sample(StandardNormal);
        (p.noise_sigma * nx, p.noise_sigma * nz)
    } else {
        (0.0, 0.0)
    };
    let v_x = s.v_x + ax * p.dt + wx;
    let v_z = s.v_z + az * p.dt + wz;
    OuterState {
        p_x: s.p_x + v_x * p.dt,
        v_x,
        p_z: s.p_z + v_z * p.dt,
        v_z,
    }
}

/// One step of the full-order plant under collective thrust `thrust` and
/// pitch moment `moment`.
pub fn full_step(
    s: &FullState,
    thrust: f64,
    moment: f64,
    p: &QuadParams,
    rng: &mut ChaCha8Rng,
) -> Result<FullState> {
    if !s.is_finite() || !thrust.is_finite() || !moment.is_finite() {
        return Err(Error::InvalidState("non-finite state or input".into()));
    }
    if thrust < 0.0 {
        return Err(Error::InvalidInput(format!("negative thrust {thrust}")));
    }
    let outer = translational_step(&s.outer, thrust, s.inner.theta, p, rng);
    let theta_ddot = moment / p.inertia;
    let theta_dot = s.inner.theta_dot + theta_ddot * p.dt;
    let theta = s.inner.theta + theta_dot * p.dt;
    let next = FullState {
        outer,
        inner: InnerState { theta, theta_dot },
    };
    if !next.is_finite() {
        return Err(Error::Numerical(format!("non-finite state after full step: {next:?}")));
    }
    Ok(next)
}

/// One step of the reduced-order model: the commanded pitch reference acts
/// in place of the physical attitude. Thrust is clamped at zero from below.
pub fn reduced_step(s: &OuterState, a: &PolicyAction, p: &QuadParams, rng: &mut ChaCha8Rng) -> Result<OuterState> {
    if !s.is_finite() {
        return Err(Error::InvalidState("non-finite outer state".into()));
    }
    let thrust = (p.hover_thrust() + a.delta_thrust).max(0.0);
    let next = translational_step(s, thrust, a.theta_ref, p, rng);
    if !next.is_finite() {
        return Err(Error::Numerical(format!("non-finite state after reduced step: {next:?}")));
    }
    Ok(next)
}

/// Report from the outer-state matching check between the two models.
#[derive(Debug, Clone)]
pub struct MatchReport {
    pub samples: usize,
    pub max_deviation: f64,
    pub violations: Vec<String>,
}

impl MatchReport {
    pub fn holds(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Verify that the full model with pitch pinned to the commanded reference
/// reproduces the reduced model's outer transition. Noise draws are shared
/// between the two paths, so the comparison is exact even with sigma > 0.
pub fn check_outer_matching(
    p: &QuadParams,
    bounds: &ActionBounds,
    samples: usize,
    seed: u64,
) -> Result<MatchReport> {
    const TOL: f64 = 1e-12;
    let mut rng = stream_rng(seed, StreamDomain::PropertyCheck, 1);
    let mut max_dev = 0.0f64;
    let mut violations = Vec::new();
    for i in 0..samples {
        let s = OuterState::new(
            rng.random_range(-10.0..10.0),
            rng.random_range(-3.0..3.0),
            rng.random_range(-10.0..10.0),
            rng.random_range(-3.0..3.0),
        );
        let a = PolicyAction::new(
            rng.random_range(-bounds.delta_thrust_max..bounds.delta_thrust_max),
            rng.random_range(-bounds.theta_ref_max..bounds.theta_ref_max),
        );
        let theta_dot = rng.random_range(-2.0..2.0);
        let full = FullState::new(s, InnerState::new(a.theta_ref, theta_dot));
        let thrust = (p.hover_thrust() + a.delta_thrust).max(0.0);
        // Clone the stream so both models consume identical noise draws.
        let mut rng_full = rng.clone();
        let mut rng_reduced = rng.clone();
        let next_full = full_step(&full, thrust, 0.0, p, &mut rng_full)?;
        let next_reduced = reduced_step(&s, &a, p, &mut rng_reduced)?;
        let dev = (next_full.outer.p_x - next_reduced.p_x)
            .abs()
            .max((next_full.outer.v_x - next_reduced.v_x).abs())
            .max((next_full.outer.p_z - next_reduced.p_z).abs())
            .max((next_full.outer.v_z - next_reduced.v_z).abs());
        max_dev = max_dev.max(dev);
        if dev > TOL {
            violations.push(format!("sample {i}: outer deviation {dev:.3e} exceeds {TOL:.0e}"));
        }
        // Advance the shared stream past the draws the clones consumed.
        if p.noise_sigma > 0.0 {
            let _: f64 = rng.sample(StandardNormal);
            let _: f64 = rng.sample(StandardNormal);
        }
    }
    Ok(MatchReport {
        samples,
        max_deviation: max_dev,
        violations,
    })
}
