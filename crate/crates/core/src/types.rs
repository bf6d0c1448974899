//! Shared state, action, and episode record types for the cascade system.
//!
//! All types here are immutable value objects; they are `Copy`/`Clone` and
//! safe to share across parallel rollout workers.

use std::io::Write;

use crate::error::{Error, Result};

/// Translational state of the vehicle (the outer subsystem).
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct OuterState {
    /// Horizontal position (m).
    pub p_x: f64,
    /// Horizontal velocity (m/s).
    pub v_x: f64,
    /// Vertical position (m).
    pub p_z: f64,
    /// Vertical velocity (m/s).
    pub v_z: f64,
}

impl OuterState {
    pub fn new(p_x: f64, v_x: f64, p_z: f64, v_z: f64) -> Self {
        Self { p_x, v_x, p_z, v_z }
    }

    pub fn is_finite(&self) -> bool {
        self.p_x.is_finite() && self.v_x.is_finite() && self.p_z.is_finite() && self.v_z.is_finite()
    }
}

/// Attitude state (the inner subsystem): pitch angle and pitch rate.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct InnerState {
    /// Pitch angle (rad).
    pub theta: f64,
    /// Pitch rate (rad/s).
    pub theta_dot: f64,
}

impl InnerState {
    pub fn new(theta: f64, theta_dot: f64) -> Self {
        Self { theta, theta_dot }
    }

    pub fn is_finite(&self) -> bool {
        self.theta.is_finite() && self.theta_dot.is_finite()
    }
}

/// Full-order plant state: outer translational state plus inner attitude.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct FullState {
    pub outer: OuterState,
    pub inner: InnerState,
}

impl FullState {
    pub fn new(outer: OuterState, inner: InnerState) -> Self {
        Self { outer, inner }
    }

    pub fn is_finite(&self) -> bool {
        self.outer.is_finite() && self.inner.is_finite()
    }
}

/// Box bounds on the policy action; references outside the box are projected
/// back onto it when the action is constructed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ActionBounds {
    /// Largest admissible thrust increment magnitude (N).
    pub delta_thrust_max: f64,
    /// Largest admissible commanded pitch magnitude (rad).
    pub theta_ref_max: f64,
}

impl Default for ActionBounds {
    fn default() -> Self {
        Self {
            delta_thrust_max: 5.0,
            theta_ref_max: 0.5,
        }
    }
}

/// Policy action: thrust increment about hover plus a commanded pitch
/// reference for the inner loop.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PolicyAction {
    /// Thrust increment about hover (N).
    pub delta_thrust: f64,
    /// Commanded pitch reference (rad).
    pub theta_ref: f64,
}

impl PolicyAction {
    pub fn new(delta_thrust: f64, theta_ref: f64) -> Self {
        Self { delta_thrust, theta_ref }
    }

    /// Project a raw action onto the admissible box.
    pub fn clamped(delta_thrust: f64, theta_ref: f64, bounds: &ActionBounds) -> Self {
        Self {
            delta_thrust: delta_thrust.clamp(-bounds.delta_thrust_max, bounds.delta_thrust_max),
            theta_ref: theta_ref.clamp(-bounds.theta_ref_max, bounds.theta_ref_max),
        }
    }

    pub fn within(&self, bounds: &ActionBounds) -> bool {
        self.delta_thrust.abs() <= bounds.delta_thrust_max && self.theta_ref.abs() <= bounds.theta_ref_max
    }
}

/// Inner-loop input: the body pitch moment.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct InnerInput {
    /// Pitch moment (N·m).
    pub moment: f64,
}

/// Half-space safe set on the horizontal position: `p_x <= boundary`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SafeSetSpec {
    /// Threshold on `p_x` (m). The boundary itself is safe.
    pub boundary: f64,
}

impl Default for SafeSetSpec {
    fn default() -> Self {
        Self { boundary: 9.0 }
    }
}

impl SafeSetSpec {
    pub fn new(boundary: f64) -> Self {
        Self { boundary }
    }

    /// Pure membership test; depends on `p_x` only.
    pub fn contains(&self, s: &OuterState) -> bool {
        s.p_x <= self.boundary
    }
}

/// Safe-set membership. The instantaneous safety cost is `1 - indicator`.
pub fn is_safe(s: &OuterState, spec: &SafeSetSpec) -> Result<bool> {
    if !s.is_finite() {
        return Err(Error::InvalidState(format!("non-finite outer state {s:?}")));
    }
    Ok(spec.contains(s))
}

/// Instantaneous safety cost: 1 when the state lies outside the safe set.
pub fn safety_cost(s: &OuterState, spec: &SafeSetSpec) -> Result<u8> {
    Ok(if is_safe(s, spec)? { 0 } else { 1 })
}

/// One recorded step of an episode. The inner state is present for
/// full-order rollouts and absent for reduced-order ones.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Step {
    pub outer: OuterState,
    pub inner: Option<InnerState>,
    pub action: PolicyAction,
    pub reward: f64,
    pub cost: u8,
}

/// An episode record: `horizon + 1` states connected by `horizon` transitions.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub steps: Vec<Step>,
    /// Number of transitions (the step count T).
    pub horizon: usize,
    /// Identifier of the RNG stream that produced the episode.
    pub seed: u64,
}

impl Trajectory {
    pub fn new(steps: Vec<Step>, horizon: usize, seed: u64) -> Result<Self> {
        let traj = Self { steps, horizon, seed };
        traj.validate()?;
        Ok(traj)
    }

    pub fn validate(&self) -> Result<()> {
        if self.steps.is_empty() {
            return Err(Error::InvalidTrajectory("empty trajectory".into()));
        }
        if self.steps.len() != self.horizon + 1 {
            return Err(Error::InvalidTrajectory(format!(
                "expected {} records for horizon {}, got {}",
                self.horizon + 1,
                self.horizon,
                self.steps.len()
            )));
        }
        for (t, step) in self.steps.iter().enumerate() {
            if step.cost > 1 {
                return Err(Error::InvalidTrajectory(format!(
                    "cost at step {t} is {}, must be 0 or 1",
                    step.cost
                )));
            }
        }
        Ok(())
    }

    /// Whether every record carries an inner state (full-order rollout).
    pub fn has_inner(&self) -> bool {
        self.steps.iter().all(|s| s.inner.is_some())
    }
}

/// True iff any step of the episode incurred a safety cost.
pub fn episode_is_unsafe(traj: &Trajectory) -> Result<bool> {
    if traj.steps.is_empty() {
        return Err(Error::InvalidTrajectory("empty trajectory".into()));
    }
    Ok(traj.steps.iter().any(|s| s.cost >= 1))
}

/// Export an episode as CSV. Absent inner states serialize as empty fields.
pub fn write_trajectory_csv<W: Write>(traj: &Trajectory, w: &mut W) -> Result<()> {
    writeln!(w, "t,p_x,v_x,p_z,v_z,theta,theta_dot,dF,theta_ref,reward,cost")?;
    for (t, s) in traj.steps.iter().enumerate() {
        let (theta, theta_dot) = match s.inner {
            Some(x) => (x.theta.to_string(), x.theta_dot.to_string()),
            None => (String::new(), String::new()),
        };
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{},{},{}",
            t,
            s.outer.p_x,
            s.outer.v_x,
            s.outer.p_z,
            s.outer.v_z,
            theta,
            theta_dot,
            s.action.delta_thrust,
            s.action.theta_ref,
            s.reward,
            s.cost
        )?;
    }
    Ok(())
}
