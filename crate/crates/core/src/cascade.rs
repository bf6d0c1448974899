//! Abstract cascade-system interfaces and the structural property check.
//!
//! A cascade system is one where the inner subsystem drives the outer one
//! but not conversely: given the inner state and inner input, the inner
//! transition is independent of the outer variables.

use rand_chacha::ChaCha8Rng;

use rand::Rng;

use crate::error::Result;
use crate::quadrotor::{full_step, reduced_step, QuadParams};
use crate::rng::{stream_rng, StreamDomain};
use crate::types::{FullState, InnerState, OuterState, PolicyAction};

/// Full-order plant: steps the joint (outer, inner) state under a collective
/// thrust and an inner input.
pub trait FullOrderModel {
    fn step_full(&self, s: &FullState, thrust: f64, moment: f64, rng: &mut ChaCha8Rng) -> Result<FullState>;
}

/// Reduced-order model: steps the outer state only, treating the inner-state
/// reference as an input.
pub trait ReducedOrderModel {
    fn step_reduced(&self, s: &OuterState, a: &PolicyAction, rng: &mut ChaCha8Rng) -> Result<OuterState>;
}

impl FullOrderModel for QuadParams {
    fn step_full(&self, s: &FullState, thrust: f64, moment: f64, rng: &mut ChaCha8Rng) -> Result<FullState> {
        full_step(s, thrust, moment, self, rng)
    }
}

impl ReducedOrderModel for QuadParams {
    fn step_reduced(&self, s: &OuterState, a: &PolicyAction, rng: &mut ChaCha8Rng) -> Result<OuterState> {
        reduced_step(s, a, self, rng)
    }
}

#[derive(Debug, Clone)]
pub struct CascadeViolation {
    pub sample: usize,
    pub detail: String,
}

/// Outcome of the cascade-structure check.
#[derive(Debug, Clone)]
pub struct CascadeReport {
    pub samples: usize,
    pub violations: Vec<CascadeViolation>,
}

impl CascadeReport {
    pub fn holds(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Sample (inner state, inner input) pairs and verify that the inner-state
/// transition does not depend on the outer state. For deterministic inner
/// dynamics the comparison is exact equality.
pub fn check_cascade_property<M: FullOrderModel>(model: &M, samples: usize, seed: u64) -> Result<CascadeReport> {
    let mut rng = stream_rng(seed, StreamDomain::PropertyCheck, 0);
    let mut violations = Vec::new();
    for i in 0..samples {
        let inner = InnerState::new(rng.random_range(-0.5..0.5), rng.random_range(-2.0..2.0));
        let thrust = rng.random_range(0.0..15.0);
        let moment = rng.random_range(-10.0..10.0);
        let outer_a = OuterState::new(
            rng.random_range(-10.0..10.0),
            rng.random_range(-3.0..3.0),
            rng.random_range(-10.0..10.0),
            rng.random_range(-3.0..3.0),
        );
        let outer_b = OuterState::new(
            rng.random_range(-10.0..10.0),
            rng.random_range(-3.0..3.0),
            rng.random_range(-10.0..10.0),
            rng.random_range(-3.0..3.0),
        );
        // Matched noise draws so any process noise cancels in the comparison.
        let mut rng_a = rng.clone();
        let mut rng_b = rng.clone();
        let next_a = model.step_full(&FullState::new(outer_a, inner), thrust, moment, &mut rng_a)?;
        let next_b = model.step_full(&FullState::new(outer_b, inner), thrust, moment, &mut rng_b)?;
        if next_a.inner != next_b.inner {
            violations.push(CascadeViolation {
                sample: i,
                detail: format!(
                    "inner transition differs across outer states: {:?} vs {:?}",
                    next_a.inner, next_b.inner
                ),
            });
        }
    }
    Ok(CascadeReport { samples, violations })
}
