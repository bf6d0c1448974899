//! Constrained-MDP training on the reduced-order model.
//!
//! The policy maximizes a multiplier-penalized reward with a clipped
//! surrogate objective (PPO) while the multiplier follows projected dual
//! ascent on the normalized discounted episode cost. A single critic
//! regresses the penalized return; advantages come from generalized
//! advantage estimation and are normalized per batch. All gradients are
//! computed analytically and are validated against finite differences in
//! the test suite.

use ndarray::{Array1, Array2};
use rand::seq::SliceRandom;

use crate::error::{Error, Result};
use crate::exec::indexed_map;
use crate::nn::Adam;
use crate::policy::{log_prob, observe, PolicyParameters, ACTION_DIM, OBS_DIM, VALUE_SCALE};
use crate::policy::{LOG_STD_MAX, LOG_STD_MIN};
use crate::quadrotor::{reduced_step, QuadParams};
use crate::rng::{stream_rng, StreamDomain};
use crate::transfer::InitialStateSampler;
use crate::types::{ActionBounds, OuterState, SafeSetSpec, Step, Trajectory};

/// Weight of the critic regression term in the joint loss.
const VALUE_LOSS_COEF: f64 = 0.5;

/// Hyperparameters of the PPO-Lagrangian trainer.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    /// Failure tolerance of the chance constraint.
    pub delta: f64,
    /// Discount factor.
    pub gamma: f64,
    /// Initial Lagrange multiplier.
    pub lambda0: f64,
    /// Dual-ascent step size.
    pub eta_lambda: f64,
    pub learning_rate: f64,
    pub clip_range: f64,
    pub gae_lambda: f64,
    /// Episode length in steps.
    pub horizon: usize,
    pub iterations: usize,
    pub episodes_per_iteration: usize,
    pub epochs_per_iteration: usize,
    pub minibatch_size: usize,
    /// Goal position (p_x, p_z).
    pub goal: (f64, f64),
    pub master_seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            delta: 0.025,
            gamma: 0.994,
            lambda0: 1.0,
            eta_lambda: 0.02,
            learning_rate: 4e-4,
            clip_range: 0.05,
            gae_lambda: 0.95,
            horizon: 300,
            iterations: 300,
            episodes_per_iteration: 32,
            epochs_per_iteration: 10,
            minibatch_size: 1024,
            goal: (9.0, 9.0),
            master_seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.gamma > 0.0 && self.gamma <= 1.0) {
            return Err(Error::Config(format!("gamma must be in (0, 1], got {}", self.gamma)));
        }
        if !(self.clip_range > 0.0) {
            return Err(Error::Config(format!(
                "clip_range must be positive, got {}",
                self.clip_range
            )));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(Error::Config(format!("delta must be in (0, 1), got {}", self.delta)));
        }
        if self.horizon == 0 || self.episodes_per_iteration == 0 || self.minibatch_size == 0 {
            return Err(Error::Config(
                "horizon, episodes_per_iteration, and minibatch_size must be positive".into(),
            ));
        }
        if !(self.lambda0 >= 0.0) {
            return Err(Error::Config(format!("lambda0 must be nonnegative, got {}", self.lambda0)));
        }
        Ok(())
    }
}

/// Projected Lagrange multiplier.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DualState {
    lambda: f64,
}

impl DualState {
    pub fn new(lambda0: f64) -> Self {
        Self {
            lambda: lambda0.max(0.0),
        }
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }
}

/// Task reward: quadratic pull toward the goal plus a bonus strictly inside
/// a 0.1 m neighborhood.
pub fn reward(s: &OuterState, goal: (f64, f64)) -> f64 {
    let dx = s.p_x - goal.0;
    let dz = s.p_z - goal.1;
    let sq = dx * dx + dz * dz;
    let bonus = if sq.sqrt() < 0.1 { 10.0 } else { 0.0 };
    -sq / 100.0 + bonus
}

/// Multiplier-penalized reward.
pub fn penalized_reward(r: f64, cost: u8, lambda: f64) -> f64 {
    debug_assert!(lambda >= 0.0);
    r - lambda * cost as f64
}

/// Normalized discounted episode cost over the first `horizon` records.
pub fn episode_discounted_cost(traj: &Trajectory, gamma: f64, horizon: usize) -> Result<f64> {
    if traj.horizon != horizon || traj.steps.len() != horizon + 1 {
        return Err(Error::HorizonMismatch {
            expected: horizon,
            got: traj.horizon,
        });
    }
    let mut sum = 0.0;
    let mut disc = 1.0;
    for step in traj.steps.iter().take(horizon) {
        sum += disc * step.cost as f64;
        disc *= gamma;
    }
    Ok(sum / horizon as f64)
}

/// Largest value `episode_discounted_cost` can attain for `(gamma, horizon)`.
pub fn max_discounted_cost(gamma: f64, horizon: usize) -> f64 {
    if (gamma - 1.0).abs() < 1e-15 {
        1.0
    } else {
        (1.0 - gamma.powi(horizon as i32)) / (horizon as f64 * (1.0 - gamma))
    }
}

/// Projected dual-ascent step on the multiplier.
pub fn dual_update(d: &DualState, mean_cost: f64, cfg: &TrainConfig) -> DualState {
    DualState {
        lambda: (d.lambda + cfg.eta_lambda * (mean_cost - cfg.delta)).max(0.0),
    }
}

/// One reduced-order episode together with the sampled pre-clip actions and
/// their log-probabilities.
#[derive(Debug, Clone)]
pub struct ReducedRollout {
    pub trajectory: Trajectory,
    pub raw_actions: Vec<[f64; ACTION_DIM]>,
    pub log_probs: Vec<f64>,
}

/// Roll one episode of the reduced model from `initial`. With
/// `deterministic` the mean action is used and log-probabilities are zero.
#[allow(clippy::too_many_arguments)]
pub fn rollout_reduced(
    policy: &PolicyParameters,
    quad: &QuadParams,
    safe: &SafeSetSpec,
    bounds: &ActionBounds,
    goal: (f64, f64),
    horizon: usize,
    initial: OuterState,
    deterministic: bool,
    seed_id: u64,
    rng: &mut rand_chacha::ChaCha8Rng,
) -> Result<ReducedRollout> {
    let mut steps = Vec::with_capacity(horizon + 1);
    let mut raw_actions = Vec::with_capacity(horizon + 1);
    let mut log_probs = Vec::with_capacity(horizon + 1);
    let mut s = initial;
    for t in 0..=horizon {
        let (action, raw, logp) = if deterministic {
            let a = policy.deterministic_action(&s, bounds);
            let mean = policy.action_mean(&s);
            (a, mean, 0.0)
        } else {
            policy.sample_action(&s, bounds, rng)
        };
        steps.push(Step {
            outer: s,
            inner: None,
            action,
            reward: reward(&s, goal),
            cost: crate::types::safety_cost(&s, safe)?,
        });
        raw_actions.push(raw);
        log_probs.push(logp);
        if t < horizon {
            s = reduced_step(&s, &action, quad, rng)?;
        }
    }
    Ok(ReducedRollout {
        trajectory: Trajectory::new(steps, horizon, seed_id)?,
        raw_actions,
        log_probs,
    })
}

/// A batch of reduced-model rollouts with advantages ready for PPO.
#[derive(Debug, Clone)]
pub struct RolloutBatch {
    pub trajectories: Vec<Trajectory>,
    /// Featurized observations of the first `horizon` records per episode.
    pub obs: Array2<f64>,
    pub raw_actions: Array2<f64>,
    pub old_log_probs: Array1<f64>,
    /// Batch-normalized GAE advantages of the penalized reward.
    pub advantages: Array1<f64>,
    /// Critic regression targets in scaled (value / VALUE_SCALE) units.
    pub value_targets: Array1<f64>,
    /// Batch mean raw undiscounted episode return.
    pub mean_return: f64,
    /// Batch mean normalized discounted episode cost.
    pub mean_cost: f64,
    /// Batch mean undiscounted cost fraction, logged for comparison with the
    /// discounted surrogate.
    pub mean_undiscounted_cost: f64,
}

impl RolloutBatch {
    pub fn transitions(&self) -> usize {
        self.obs.nrows()
    }
}

/// Collect one on-policy batch from randomized initial states. Episodes run
/// in parallel on independent RNG streams keyed by (iteration, episode), so
/// the batch is identical regardless of thread count.
pub fn collect_rollouts(
    policy: &PolicyParameters,
    quad: &QuadParams,
    safe: &SafeSetSpec,
    bounds: &ActionBounds,
    sampler: &InitialStateSampler,
    cfg: &TrainConfig,
    lambda: f64,
    iteration: u64,
) -> Result<RolloutBatch> {
    let episodes = cfg.episodes_per_iteration;
    let horizon = cfg.horizon;
    let rollouts: Vec<Result<ReducedRollout>> = indexed_map(episodes, |ep| {
        let stream_id = iteration * episodes as u64 + ep as u64;
        let mut rng = stream_rng(cfg.master_seed, StreamDomain::TrainRollout, stream_id);
        let initial = sampler.draw(&mut rng);
        rollout_reduced(
            policy, quad, safe, bounds, cfg.goal, horizon, initial, false, stream_id, &mut rng,
        )
    });
    let rollouts: Vec<ReducedRollout> = rollouts.into_iter().collect::<Result<_>>()?;

    // Critic values for every record, batched across all episodes.
    let total_records = episodes * (horizon + 1);
    let mut all_obs = Array2::zeros((total_records, OBS_DIM));
    for (ep, rollout) in rollouts.iter().enumerate() {
        for (t, step) in rollout.trajectory.steps.iter().enumerate() {
            let f = observe(&step.outer);
            for (d, v) in f.iter().enumerate() {
                all_obs[[ep * (horizon + 1) + t, d]] = *v;
            }
        }
    }
    let values = policy.critic.forward(&all_obs);
    let value_at = |ep: usize, t: usize| VALUE_SCALE * values.output()[[ep * (horizon + 1) + t, 0]];

    let transitions = episodes * horizon;
    let mut obs = Array2::zeros((transitions, OBS_DIM));
    let mut raw_actions = Array2::zeros((transitions, ACTION_DIM));
    let mut old_log_probs = Array1::zeros(transitions);
    let mut advantages = Array1::zeros(transitions);
    let mut value_targets = Array1::zeros(transitions);

    let mut mean_return = 0.0;
    let mut mean_cost = 0.0;
    let mut mean_undiscounted = 0.0;
    let cost_cap = max_discounted_cost(cfg.gamma, horizon);

    for (ep, rollout) in rollouts.iter().enumerate() {
        let traj = &rollout.trajectory;
        let ep_cost = episode_discounted_cost(traj, cfg.gamma, horizon)?;
        if !(0.0..=cost_cap + 1e-12).contains(&ep_cost) {
            return Err(Error::Numerical(format!(
                "episode discounted cost {ep_cost} outside [0, {cost_cap}]"
            )));
        }
        mean_cost += ep_cost;
        mean_return += traj.steps.iter().map(|s| s.reward).sum::<f64>();
        mean_undiscounted +=
            traj.steps.iter().take(horizon).map(|s| s.cost as f64).sum::<f64>() / horizon as f64;

        // GAE over the penalized reward; the transition reward is the
        // penalized reward of the successor record, and the value beyond the
        // horizon is zero because the objective stops at T.
        let mut gae = 0.0;
        for t in (0..horizon).rev() {
            let succ = &traj.steps[t + 1];
            let rho = penalized_reward(succ.reward, succ.cost, lambda);
            let next_value = if t + 1 < horizon { value_at(ep, t + 1) } else { 0.0 };
            let delta = rho + cfg.gamma * next_value - value_at(ep, t);
            gae = delta + cfg.gamma * cfg.gae_lambda * gae;
            let row = ep * horizon + t;
            advantages[row] = gae;
            value_targets[row] = (gae + value_at(ep, t)) / VALUE_SCALE;
            old_log_probs[row] = rollout.log_probs[t];
            for d in 0..ACTION_DIM {
                raw_actions[[row, d]] = rollout.raw_actions[t][d];
            }
            for d in 0..OBS_DIM {
                obs[[row, d]] = all_obs[[ep * (horizon + 1) + t, d]];
            }
        }
    }
    mean_return /= episodes as f64;
    mean_cost /= episodes as f64;
    mean_undiscounted /= episodes as f64;

    // Batch normalization of the advantages.
    let mean = advantages.sum() / transitions as f64;
    let var = advantages.iter().map(|a| (a - mean) * (a - mean)).sum::<f64>() / transitions as f64;
    let std = var.sqrt();
    advantages.mapv_inplace(|a| (a - mean) / (std + 1e-8));

    for arr in [&advantages, &value_targets, &old_log_probs] {
        if arr.iter().any(|v| !v.is_finite()) {
            return Err(Error::Numerical("non-finite value in rollout batch".into()));
        }
    }

    Ok(RolloutBatch {
        trajectories: rollouts.into_iter().map(|r| r.trajectory).collect(),
        obs,
        raw_actions,
        old_log_probs,
        advantages,
        value_targets,
        mean_return,
        mean_cost,
        mean_undiscounted_cost: mean_undiscounted,
    })
}

/// Mean clipped surrogate on a batch, forward pass only.
pub fn clipped_surrogate(
    policy: &PolicyParameters,
    obs: &Array2<f64>,
    raw_actions: &Array2<f64>,
    old_log_probs: &Array1<f64>,
    advantages: &Array1<f64>,
    clip_range: f64,
) -> f64 {
    let n = obs.nrows();
    let cache = policy.actor.forward(obs);
    let means = cache.output();
    let mut total = 0.0;
    for i in 0..n {
        let mean_i = [means[[i, 0]], means[[i, 1]]];
        let raw_i = [raw_actions[[i, 0]], raw_actions[[i, 1]]];
        let ratio = (log_prob(&mean_i, &policy.log_std, &raw_i) - old_log_probs[i]).exp();
        let adv = advantages[i];
        total += (ratio * adv).min(ratio.clamp(1.0 - clip_range, 1.0 + clip_range) * adv);
    }
    total / n as f64
}

/// Joint loss and flat gradient of one PPO minibatch; gradient layout is
/// actor tensors, log_std, critic tensors, matching
/// [`PolicyParameters::get_param`].
pub struct PpoLossGrads {
    pub loss: f64,
    /// Mean clipped surrogate (the quantity being ascended).
    pub surrogate: f64,
    pub value_loss: f64,
    pub grad: Vec<f64>,
}

/// Evaluate the clipped-surrogate-plus-critic loss and its exact gradient on
/// a minibatch.
pub fn ppo_loss_and_grads(
    policy: &PolicyParameters,
    obs: &Array2<f64>,
    raw_actions: &Array2<f64>,
    old_log_probs: &Array1<f64>,
    advantages: &Array1<f64>,
    value_targets: &Array1<f64>,
    clip_range: f64,
) -> Result<PpoLossGrads> {
    let n = obs.nrows();
    if n == 0 {
        return Err(Error::InvalidInput("empty minibatch".into()));
    }
    let n_f = n as f64;

    // Actor pass.
    let actor_cache = policy.actor.forward(obs);
    let means = actor_cache.output();
    let mut surrogate = 0.0;
    let mut grad_mean = Array2::zeros((n, ACTION_DIM));
    let mut grad_log_std = vec![0.0; ACTION_DIM];
    for i in 0..n {
        let mean_i = [means[[i, 0]], means[[i, 1]]];
        let raw_i = [raw_actions[[i, 0]], raw_actions[[i, 1]]];
        let logp_new = log_prob(&mean_i, &policy.log_std, &raw_i);
        let ratio = (logp_new - old_log_probs[i]).exp();
        let adv = advantages[i];
        let unclipped = ratio * adv;
        let clipped = ratio.clamp(1.0 - clip_range, 1.0 + clip_range) * adv;
        if unclipped <= clipped {
            surrogate += unclipped;
            // d surrogate / d logp = ratio * adv on the active branch; the
            // loss descends -surrogate / n.
            let dl_dlogp = -unclipped / n_f;
            for d in 0..ACTION_DIM {
                let std = policy.log_std[d].exp();
                let z = (raw_i[d] - mean_i[d]) / std;
                grad_mean[[i, d]] = dl_dlogp * z / std;
                grad_log_std[d] += dl_dlogp * (z * z - 1.0);
            }
        } else {
            surrogate += clipped;
            // Clipped branch: constant in the parameters.
        }
    }
    surrogate /= n_f;
    let actor_grad = policy.actor.backward(&actor_cache, &grad_mean);

    // Critic pass in scaled units.
    let critic_cache = policy.critic.forward(obs);
    let preds = critic_cache.output();
    let mut value_loss = 0.0;
    let mut grad_pred = Array2::zeros((n, 1));
    for i in 0..n {
        let err = preds[[i, 0]] - value_targets[i];
        value_loss += err * err;
        grad_pred[[i, 0]] = 2.0 * VALUE_LOSS_COEF * err / n_f;
    }
    value_loss = VALUE_LOSS_COEF * value_loss / n_f;
    let critic_grad = policy.critic.backward(&critic_cache, &grad_pred);

    if !actor_grad.is_finite() || !critic_grad.is_finite() || !grad_log_std.iter().all(|v| v.is_finite()) {
        return Err(Error::Numerical("NaN gradient in PPO update".into()));
    }

    let mut grad = crate::nn::Mlp::flat_grad(&actor_grad);
    grad.extend_from_slice(&grad_log_std);
    grad.extend(crate::nn::Mlp::flat_grad(&critic_grad));

    Ok(PpoLossGrads {
        loss: -surrogate + value_loss,
        surrogate,
        value_loss,
        grad,
    })
}

/// Per-update diagnostics.
#[derive(Debug, Clone)]
pub struct UpdateStats {
    /// Full-batch clipped surrogate evaluated before each epoch and after
    /// the last one.
    pub surrogates: Vec<f64>,
    pub minibatches: usize,
}

fn tensor_sizes(policy: &PolicyParameters) -> Vec<usize> {
    let mut sizes = Vec::new();
    for l in 0..policy.actor.n_layers() {
        sizes.push(policy.actor.weights[l].len());
        sizes.push(policy.actor.biases[l].len());
    }
    sizes.push(ACTION_DIM);
    for l in 0..policy.critic.n_layers() {
        sizes.push(policy.critic.weights[l].len());
        sizes.push(policy.critic.biases[l].len());
    }
    sizes
}

/// Build the Adam optimizer matching the policy's tensor layout.
pub fn optimizer_for(policy: &PolicyParameters, learning_rate: f64) -> Adam {
    Adam::new(learning_rate, &tensor_sizes(policy))
}

fn apply_grads(policy: &mut PolicyParameters, opt: &mut Adam, flat_grad: &[f64]) {
    opt.begin_step();
    let mut offset = 0;
    let mut slot = 0;
    {
        let actor = &mut policy.actor;
        for l in 0..actor.n_layers() {
            let w = actor.weights[l].as_slice_mut().unwrap();
            opt.update(slot, w, &flat_grad[offset..offset + w.len()]);
            offset += w.len();
            slot += 1;
            let b = actor.biases[l].as_slice_mut().unwrap();
            opt.update(slot, b, &flat_grad[offset..offset + b.len()]);
            offset += b.len();
            slot += 1;
        }
    }
    {
        let ls = policy.log_std.as_slice_mut().unwrap();
        opt.update(slot, ls, &flat_grad[offset..offset + ACTION_DIM]);
        offset += ACTION_DIM;
        slot += 1;
        for v in ls.iter_mut() {
            *v = v.clamp(LOG_STD_MIN, LOG_STD_MAX);
        }
    }
    {
        let critic = &mut policy.critic;
        for l in 0..critic.n_layers() {
            let w = critic.weights[l].as_slice_mut().unwrap();
            opt.update(slot, w, &flat_grad[offset..offset + w.len()]);
            offset += w.len();
            slot += 1;
            let b = critic.biases[l].as_slice_mut().unwrap();
            opt.update(slot, b, &flat_grad[offset..offset + b.len()]);
            offset += b.len();
            slot += 1;
        }
    }
    debug_assert_eq!(offset, flat_grad.len());
}

fn gather_rows(src: &Array2<f64>, idx: &[usize]) -> Array2<f64> {
    let mut out = Array2::zeros((idx.len(), src.ncols()));
    for (row, &i) in idx.iter().enumerate() {
        out.row_mut(row).assign(&src.row(i));
    }
    out
}

fn gather(src: &Array1<f64>, idx: &[usize]) -> Array1<f64> {
    Array1::from_iter(idx.iter().map(|&i| src[i]))
}

/// Run `epochs_per_iteration` passes of minibatch PPO over a fixed batch.
pub fn ppo_update(
    policy: &mut PolicyParameters,
    opt: &mut Adam,
    batch: &RolloutBatch,
    cfg: &TrainConfig,
    iteration: u64,
) -> Result<UpdateStats> {
    let n = batch.transitions();
    if n == 0 {
        return Err(Error::InvalidInput("empty rollout batch".into()));
    }
    let full_surrogate = |policy: &PolicyParameters| -> f64 {
        clipped_surrogate(
            policy,
            &batch.obs,
            &batch.raw_actions,
            &batch.old_log_probs,
            &batch.advantages,
            cfg.clip_range,
        )
    };

    let mut shuffle_rng = stream_rng(cfg.master_seed, StreamDomain::TrainShuffle, iteration);
    let mut indices: Vec<usize> = (0..n).collect();
    let mut surrogates = Vec::with_capacity(cfg.epochs_per_iteration + 1);
    let mut minibatches = 0;
    for _epoch in 0..cfg.epochs_per_iteration {
        surrogates.push(full_surrogate(policy));
        indices.shuffle(&mut shuffle_rng);
        for chunk in indices.chunks(cfg.minibatch_size) {
            let obs = gather_rows(&batch.obs, chunk);
            let raw = gather_rows(&batch.raw_actions, chunk);
            let old_logp = gather(&batch.old_log_probs, chunk);
            let adv = gather(&batch.advantages, chunk);
            let targets = gather(&batch.value_targets, chunk);
            let out = ppo_loss_and_grads(policy, &obs, &raw, &old_logp, &adv, &targets, cfg.clip_range)?;
            apply_grads(policy, opt, &out.grad);
            minibatches += 1;
        }
    }
    surrogates.push(full_surrogate(policy));
    if !policy.is_finite() {
        return Err(Error::Numerical("non-finite policy parameters after update".into()));
    }
    Ok(UpdateStats {
        surrogates,
        minibatches,
    })
}

/// One row of the training log.
#[derive(Debug, Clone, Copy)]
pub struct TrainLogRow {
    pub iter: usize,
    pub mean_return: f64,
    pub mean_cost: f64,
    /// Multiplier after the iteration's dual update.
    pub lambda: f64,
    pub policy_std: f64,
}

/// Serialize the training log in the pinned CSV layout.
pub fn write_training_log_csv<W: std::io::Write>(rows: &[TrainLogRow], w: &mut W) -> Result<()> {
    writeln!(w, "iter,mean_return,mean_cost,lambda,policy_std")?;
    for r in rows {
        writeln!(
            w,
            "{},{},{},{},{}",
            r.iter, r.mean_return, r.mean_cost, r.lambda, r.policy_std
        )?;
    }
    Ok(())
}

/// Full training output.
pub struct TrainOutput {
    pub policy: PolicyParameters,
    pub log: Vec<TrainLogRow>,
}

/// Alternate rollout collection, PPO updates, and dual ascent for
/// `cfg.iterations` rounds.
pub fn train(
    cfg: &TrainConfig,
    quad: &QuadParams,
    safe: &SafeSetSpec,
    bounds: &ActionBounds,
    sampler: &InitialStateSampler,
) -> Result<TrainOutput> {
    cfg.validate()?;
    quad.validate()?;
    let mut policy = PolicyParameters::init(&mut stream_rng(cfg.master_seed, StreamDomain::PolicyInit, 0));
    let mut opt = optimizer_for(&policy, cfg.learning_rate);
    let mut dual = DualState::new(cfg.lambda0);
    let mut log = Vec::with_capacity(cfg.iterations);
    for k in 0..cfg.iterations {
        let batch = collect_rollouts(&policy, quad, safe, bounds, sampler, cfg, dual.lambda(), k as u64)?;
        ppo_update(&mut policy, &mut opt, &batch, cfg, k as u64)?;
        dual = dual_update(&dual, batch.mean_cost, cfg);
        assert!(dual.lambda() >= 0.0, "multiplier projection violated");
        log.push(TrainLogRow {
            iter: k,
            mean_return: batch.mean_return,
            mean_cost: batch.mean_cost,
            lambda: dual.lambda(),
            policy_std: policy.mean_std(),
        });
    }
    Ok(TrainOutput { policy, log })
}
