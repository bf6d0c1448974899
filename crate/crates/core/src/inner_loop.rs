//! PD attitude controller with filtered reference-rate estimation.
//!
//! The controller tracks the commanded pitch reference with a
//! proportional-derivative law on the pitch moment. The reference rate is
//! reconstructed locally: a backward difference of consecutive references
//! followed by a first-order low-pass filter.

use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::quadrotor::{full_step, QuadParams};
use crate::types::{FullState, InnerInput, InnerState, PolicyAction};

/// Inner-loop gains parameterized by natural frequency and damping ratio.
/// `kp` and `kd` are derived at construction and never mutated, so they can
/// not go stale with respect to `(omega_n, zeta)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GainSpec {
    omega_n: f64,
    zeta: f64,
    kp: f64,
    kd: f64,
}

impl GainSpec {
    /// `kp = J * omega_n^2`, `kd = 2 * J * zeta * omega_n`.
    pub fn new(omega_n: f64, zeta: f64, inertia: f64) -> Result<Self> {
        if !(omega_n > 0.0) || !(zeta > 0.0) || !(inertia > 0.0) {
            return Err(Error::InvalidInput(format!(
                "gains require positive omega_n, zeta, inertia; got ({omega_n}, {zeta}, {inertia})"
            )));
        }
        Ok(Self {
            omega_n,
            zeta,
            kp: inertia * omega_n * omega_n,
            kd: 2.0 * inertia * zeta * omega_n,
        })
    }

    pub fn omega_n(&self) -> f64 {
        self.omega_n
    }

    pub fn zeta(&self) -> f64 {
        self.zeta
    }

    pub fn kp(&self) -> f64 {
        self.kp
    }

    pub fn kd(&self) -> f64 {
        self.kd
    }
}

/// Controller-side parameters that are not plant physics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ControlParams {
    /// Saturation limit on the pitch moment (N·m).
    pub moment_max: f64,
    /// Low-pass filter time constant for the reference rate (s).
    pub filter_time_constant: f64,
}

impl Default for ControlParams {
    fn default() -> Self {
        Self {
            moment_max: 10.0,
            filter_time_constant: 0.1,
        }
    }
}

/// State of the reference-rate estimator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FilterState {
    /// Last commanded reference (rad).
    pub prev_ref: f64,
    /// Filtered reference-rate estimate (rad/s).
    pub rate_est: f64,
    /// Filter pole, `exp(-dt / T_f)`.
    pub alpha_f: f64,
}

impl FilterState {
    /// Initialize with the first commanded reference so the first backward
    /// difference evaluates to zero.
    pub fn new(initial_ref: f64, dt: f64, time_constant: f64) -> Self {
        Self {
            prev_ref: initial_ref,
            rate_est: 0.0,
            alpha_f: (-dt / time_constant).exp(),
        }
    }
}

/// Backward-difference the reference and low-pass the result. Returns the
/// advanced filter state and the rate estimate to feed the PD law.
pub fn filter_update(fs: &FilterState, theta_ref: f64, dt: f64) -> (FilterState, f64) {
    let raw = (theta_ref - fs.prev_ref) / dt;
    let rate_est = fs.alpha_f * fs.rate_est + (1.0 - fs.alpha_f) * raw;
    (
        FilterState {
            prev_ref: theta_ref,
            rate_est,
            alpha_f: fs.alpha_f,
        },
        rate_est,
    )
}

/// PD law on the pitch moment, saturated to `moment_max`. The second return
/// value reports whether the saturation was active.
pub fn pd_control(
    x: &InnerState,
    theta_ref: f64,
    rate_est: f64,
    gains: &GainSpec,
    moment_max: f64,
) -> (InnerInput, bool) {
    let raw = -gains.kp * (x.theta - theta_ref) - gains.kd * (x.theta_dot - rate_est);
    let moment = raw.clamp(-moment_max, moment_max);
    (InnerInput { moment }, raw.abs() > moment_max)
}

/// Result of one closed-loop step: the advanced plant and filter states plus
/// whether the moment saturated.
#[derive(Debug, Clone, Copy)]
pub struct ClosedLoopOutput {
    pub state: FullState,
    pub filter: FilterState,
    pub saturated: bool,
}

/// One step of the full-order plant behind the inner loop: update the rate
/// estimate, compute the PD moment, then step the plant with
/// `thrust = hover + delta_thrust`.
pub fn closed_loop_step(
    s: &FullState,
    a: &PolicyAction,
    fs: &FilterState,
    gains: &GainSpec,
    quad: &QuadParams,
    ctrl: &ControlParams,
    rng: &mut ChaCha8Rng,
) -> Result<ClosedLoopOutput> {
    let (filter, rate_est) = filter_update(fs, a.theta_ref, quad.dt);
    let (input, saturated) = pd_control(&s.inner, a.theta_ref, rate_est, gains, ctrl.moment_max);
    let thrust = (quad.hover_thrust() + a.delta_thrust).max(0.0);
    let state = full_step(s, thrust, input.moment, quad, rng)?;
    Ok(ClosedLoopOutput {
        state,
        filter,
        saturated,
    })
}
