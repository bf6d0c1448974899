//! Exhaustive finite-MDP oracle for the trajectory-divergence chain.
//!
//! On small state/action spaces every trajectory can be enumerated, so the
//! joint total variation between two kernels, event probabilities, and
//! expected cumulative costs are all exact. The oracle checks that
//!
//! 1. the joint trajectory divergence is at most the summed one-step
//!    mismatches,
//! 2. the probability gap of the all-safe event is at most the trajectory
//!    divergence,
//! 3. the probability of ever leaving the safe set is at most the expected
//!    cumulative cost, and
//! 4. the event gap is at most the summed one-step mismatches (the chained
//!    inequality used by the safety bound).
//!
//! Total variation uses the half-L1 convention throughout.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::rng::{stream_rng, StreamDomain};

const MAX_JOINT_SPACE: usize = 64;
const MAX_HORIZON: usize = 6;
const TOL: f64 = 1e-12;

/// Row-stochastic transition kernel on a finite state/action space.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteMdp {
    pub n_states: usize,
    pub n_actions: usize,
    /// `kernel[(s * n_actions + a) * n_states + s2] = P(s2 | s, a)`.
    pub kernel: Vec<f64>,
}

impl FiniteMdp {
    pub fn prob(&self, s: usize, a: usize, s2: usize) -> f64 {
        self.kernel[(s * self.n_actions + a) * self.n_states + s2]
    }

    pub fn random(n_states: usize, n_actions: usize, rng: &mut ChaCha8Rng) -> Self {
        let mut kernel = vec![0.0; n_states * n_actions * n_states];
        for row in kernel.chunks_mut(n_states) {
            let mut sum = 0.0;
            for v in row.iter_mut() {
                *v = rng.random_range(0.05..1.0);
                sum += *v;
            }
            for v in row.iter_mut() {
                *v /= sum;
            }
        }
        Self {
            n_states,
            n_actions,
            kernel,
        }
    }

    /// Shift probability mass `eps` within one row (total variation `eps`).
    pub fn perturb_row(&mut self, s: usize, a: usize, from: usize, to: usize, eps: f64) {
        let base = (s * self.n_actions + a) * self.n_states;
        assert!(self.kernel[base + from] >= eps, "not enough mass to move");
        self.kernel[base + from] -= eps;
        self.kernel[base + to] += eps;
    }
}

/// A pair of kernels sharing a policy, initial distribution, and safe set.
#[derive(Debug, Clone)]
pub struct OraclePair {
    /// Closed-loop kernel P_K.
    pub closed: FiniteMdp,
    /// Reduced-order kernel P_R.
    pub reduced: FiniteMdp,
    /// `policy[s * n_actions + a] = pi(a | s)`.
    pub policy: Vec<f64>,
    pub initial: Vec<f64>,
    pub safe: Vec<bool>,
    pub horizon: usize,
}

/// One verified inequality.
#[derive(Debug, Clone)]
pub struct OracleCheck {
    pub name: &'static str,
    pub lhs: f64,
    pub rhs: f64,
    pub ok: bool,
}

/// Enumeration results and the inequality checklist.
#[derive(Debug, Clone)]
pub struct OracleReport {
    /// Joint trajectory divergence over the horizon.
    pub delta_p: f64,
    /// Per-step worst-case one-step mismatch, t = 1..=T.
    pub delta_steps: Vec<f64>,
    pub p_safe_closed: f64,
    pub p_safe_reduced: f64,
    pub p_unsafe_union_reduced: f64,
    pub expected_cost_reduced: f64,
    pub checks: Vec<OracleCheck>,
}

impl OracleReport {
    pub fn all_hold(&self) -> bool {
        self.checks.iter().all(|c| c.ok)
    }
}

struct Accumulator {
    l1: f64,
    pk_safe: f64,
    pr_safe: f64,
    pr_unsafe_union: f64,
    pr_cost: f64,
}

fn enumerate(pair: &OraclePair, t: usize, s: usize, pk: f64, pr: f64, unsafe_count: usize, acc: &mut Accumulator) {
    let n_actions = pair.closed.n_actions;
    let n_states = pair.closed.n_states;
    for a in 0..n_actions {
        let pa = pair.policy[s * n_actions + a];
        let pk_a = pk * pa;
        let pr_a = pr * pa;
        if t == pair.horizon {
            acc.l1 += (pk_a - pr_a).abs();
            if unsafe_count == 0 {
                acc.pk_safe += pk_a;
                acc.pr_safe += pr_a;
            } else {
                acc.pr_unsafe_union += pr_a;
            }
            acc.pr_cost += pr_a * unsafe_count as f64;
        } else {
            for s2 in 0..n_states {
                let next_unsafe = unsafe_count + usize::from(!pair.safe[s2]);
                enumerate(
                    pair,
                    t + 1,
                    s2,
                    pk_a * pair.closed.prob(s, a, s2),
                    pr_a * pair.reduced.prob(s, a, s2),
                    next_unsafe,
                    acc,
                );
            }
        }
    }
}

/// Exhaustively verify the divergence chain on one kernel pair. With
/// `mutant` the first bound is applied with the wrong sign, as a self-test
/// that the harness detects violations.
pub fn finite_mdp_oracle(pair: &OraclePair, mutant: bool) -> Result<OracleReport> {
    let n_states = pair.closed.n_states;
    let n_actions = pair.closed.n_actions;
    if n_states * n_actions > MAX_JOINT_SPACE || pair.horizon > MAX_HORIZON {
        return Err(Error::SpaceTooLarge(format!(
            "|S| * |A| = {} (max {MAX_JOINT_SPACE}), horizon {} (max {MAX_HORIZON})",
            n_states * n_actions,
            pair.horizon
        )));
    }
    if pair.reduced.n_states != n_states || pair.reduced.n_actions != n_actions {
        return Err(Error::InvalidInput("kernel shapes differ".into()));
    }
    if pair.safe.len() != n_states || pair.initial.len() != n_states {
        return Err(Error::InvalidInput("safe set or initial distribution has wrong length".into()));
    }

    let mut acc = Accumulator {
        l1: 0.0,
        pk_safe: 0.0,
        pr_safe: 0.0,
        pr_unsafe_union: 0.0,
        pr_cost: 0.0,
    };
    for s0 in 0..n_states {
        let mu = pair.initial[s0];
        if mu > 0.0 {
            let unsafe0 = usize::from(!pair.safe[s0]);
            enumerate(pair, 0, s0, mu, mu, unsafe0, &mut acc);
        }
    }
    let delta_p = 0.5 * acc.l1;

    // Worst-case one-step mismatch; the kernels are time-homogeneous so the
    // per-step value repeats across the horizon.
    let mut delta_one = 0.0f64;
    for s in 0..n_states {
        for a in 0..n_actions {
            let tv = 0.5
                * (0..n_states)
                    .map(|s2| (pair.closed.prob(s, a, s2) - pair.reduced.prob(s, a, s2)).abs())
                    .sum::<f64>();
            delta_one = delta_one.max(tv);
        }
    }
    let delta_steps = vec![delta_one; pair.horizon];
    let delta_sum: f64 = delta_steps.iter().sum();

    let lemma1_rhs = if mutant { -delta_sum } else { delta_sum };
    let event_gap = (acc.pk_safe - acc.pr_safe).abs();
    let checks = vec![
        OracleCheck {
            name: "trajectory_divergence_le_sum_of_steps",
            lhs: delta_p,
            rhs: lemma1_rhs,
            ok: delta_p <= lemma1_rhs + TOL,
        },
        OracleCheck {
            name: "event_gap_le_trajectory_divergence",
            lhs: event_gap,
            rhs: delta_p,
            ok: event_gap <= delta_p + TOL,
        },
        OracleCheck {
            name: "union_probability_le_expected_cost",
            lhs: acc.pr_unsafe_union,
            rhs: acc.pr_cost,
            ok: acc.pr_unsafe_union <= acc.pr_cost + TOL,
        },
        OracleCheck {
            name: "event_gap_le_sum_of_steps",
            lhs: event_gap,
            rhs: delta_sum,
            ok: event_gap <= delta_sum + TOL,
        },
    ];

    Ok(OracleReport {
        delta_p,
        delta_steps,
        p_safe_closed: acc.pk_safe,
        p_safe_reduced: acc.pr_safe,
        p_unsafe_union_reduced: acc.pr_unsafe_union,
        expected_cost_reduced: acc.pr_cost,
        checks,
    })
}

/// Random kernel pair with a shared stochastic policy and initial
/// distribution, derived deterministically from `seed`.
pub fn random_pair(seed: u64, n_states: usize, n_actions: usize, horizon: usize) -> OraclePair {
    let mut rng = stream_rng(seed, StreamDomain::Oracle, 0);
    let closed = FiniteMdp::random(n_states, n_actions, &mut rng);
    let reduced = FiniteMdp::random(n_states, n_actions, &mut rng);
    let mut policy = vec![0.0; n_states * n_actions];
    for row in policy.chunks_mut(n_actions) {
        let mut sum = 0.0;
        for v in row.iter_mut() {
            *v = rng.random_range(0.05..1.0);
            sum += *v;
        }
        for v in row.iter_mut() {
            *v /= sum;
        }
    }
    let mut initial = vec![0.0; n_states];
    let mut sum = 0.0;
    for v in initial.iter_mut() {
        *v = rng.random_range(0.05..1.0);
        sum += *v;
    }
    for v in initial.iter_mut() {
        *v /= sum;
    }
    let mut safe = vec![true; n_states];
    // At least one unsafe and one safe state so the event is nontrivial.
    let unsafe_state = rng.random_range(0..n_states);
    safe[unsafe_state] = false;
    OraclePair {
        closed,
        reduced,
        policy,
        initial,
        safe,
        horizon,
    }
}
