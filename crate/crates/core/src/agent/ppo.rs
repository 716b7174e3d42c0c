use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::mlp::{Cache, Mlp};
use crate::env::{CircuitEnv, HistoryEntry, StepRecord};
use crate::error::{parse_err, Error, Result};
use crate::optim::Minimizer;

/// PPO and network hyperparameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PpoConfig {
    pub gamma: f64,
    pub gae_lambda: f64,
    pub clip_epsilon: f64,
    pub pi_lr: f64,
    pub vf_lr: f64,
    pub train_pi_iters: usize,
    pub train_v_iters: usize,
    pub steps_per_epoch: usize,
    pub total_steps: usize,
    pub target_kl: f64,
    pub hidden: Vec<usize>,
}

impl Default for PpoConfig {
    fn default() -> Self {
        PpoConfig::block()
    }
}

impl PpoConfig {
    /// Block-variant values.
    pub fn block() -> Self {
        PpoConfig {
            gamma: 0.99,
            gae_lambda: 0.97,
            clip_epsilon: 0.2,
            pi_lr: 3e-4,
            vf_lr: 1e-3,
            train_pi_iters: 80,
            train_v_iters: 80,
            steps_per_epoch: 25,
            total_steps: 250,
            target_kl: 0.01,
            hidden: vec![64, 64],
        }
    }

    /// Global-variant values: 3000 steps, the rest at reference PPO defaults
    /// with 300 steps per epoch.
    pub fn global() -> Self {
        PpoConfig {
            steps_per_epoch: 300,
            total_steps: 3000,
            ..PpoConfig::block()
        }
    }

    pub fn epochs(&self) -> usize {
        self.total_steps.div_ceil(self.steps_per_epoch)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.steps_per_epoch == 0 || self.total_steps < self.steps_per_epoch {
            return bad(format!(
                "need total_steps >= steps_per_epoch >= 1, got {} and {}",
                self.total_steps, self.steps_per_epoch
            ));
        }
        if !(self.gamma > 0.0 && self.gamma <= 1.0) {
            return bad(format!("gamma {} outside (0, 1]", self.gamma));
        }
        if !(0.0..=1.0).contains(&self.gae_lambda) {
            return bad(format!("gae_lambda {} outside [0, 1]", self.gae_lambda));
        }
        if !(self.pi_lr > 0.0 && self.vf_lr > 0.0 && self.clip_epsilon > 0.0) {
            return bad("learning rates and clip_epsilon must be positive".into());
        }
        Ok(())
    }
}

/// Independent policy and value networks over the same input width.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActorCritic {
    pub policy: Mlp,
    pub value: Mlp,
}

impl ActorCritic {
    /// Orthogonal hidden layers (gain √2), policy head at gain 0.01 so the
    /// initial policy is close to uniform, value head at gain 1.
    pub fn new<R: Rng + ?Sized>(obs_dim: usize, n_actions: usize, hidden: &[usize], rng: &mut R) -> Self {
        let sizes = |out: usize| {
            let mut s = vec![obs_dim];
            s.extend_from_slice(hidden);
            s.push(out);
            s
        };
        let g = std::f64::consts::SQRT_2;
        ActorCritic {
            policy: Mlp::orthogonal(&sizes(n_actions), g, 0.01, rng),
            value: Mlp::orthogonal(&sizes(1), g, 1.0, rng),
        }
    }

    /// Text checkpoint: `actor-critic` line, then both networks.
    pub fn to_text(&self) -> String {
        format!("actor-critic\n{}{}", self.policy.to_text(), self.value.to_text())
    }

    pub fn from_text(text: &str) -> Result<ActorCritic> {
        let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
        match lines.next() {
            Some((_, "actor-critic")) => {}
            _ => return Err(parse_err(1, "expected `actor-critic` header")),
        }
        let policy = Mlp::from_lines(&mut lines)?;
        let value = Mlp::from_lines(&mut lines)?;
        if let Some((ln, _)) = lines.find(|(_, l)| !l.trim().is_empty()) {
            return Err(parse_err(ln, "trailing data after checkpoint"));
        }
        if policy.input_dim() != value.input_dim() || value.output_dim() != 1 {
            return Err(parse_err(1, "inconsistent network shapes"));
        }
        Ok(ActorCritic { policy, value })
    }
}

/// Numerically stable softmax.
pub fn softmax(logits: &[f64]) -> Vec<f64> {
    let m = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let e: Vec<f64> = logits.iter().map(|l| (l - m).exp()).collect();
    let s: f64 = e.iter().sum();
    e.into_iter().map(|x| x / s).collect()
}

fn log_softmax_at(logits: &[f64], a: usize) -> f64 {
    let m = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let lse = m + logits.iter().map(|l| (l - m).exp()).sum::<f64>().ln();
    logits[a] - lse
}

/// Action distribution for one observation.
pub fn policy_forward(policy: &Mlp, observation: &[f64]) -> Result<Vec<f64>> {
    Ok(softmax(policy.forward(observation)?.output()))
}

pub fn value_forward(value: &Mlp, observation: &[f64]) -> Result<f64> {
    Ok(value.forward(observation)?.output()[0])
}

/// Draws an index from `probs` by inverse CDF.
pub fn sample_action<R: Rng + ?Sized>(probs: &[f64], rng: &mut R) -> Result<usize> {
    let total: f64 = probs.iter().sum();
    if (total - 1.0).abs() > 1e-6 || probs.iter().any(|p| p.is_nan() || *p < 0.0) {
        return Err(Error::NotNormalized(total));
    }
    let u = rng.gen::<f64>() * total;
    let mut acc = 0.0;
    let mut last = 0;
    for (i, &p) in probs.iter().enumerate() {
        if p > 0.0 {
            last = i;
            acc += p;
            if u < acc {
                return Ok(i);
            }
        }
    }
    Ok(last)
}

/// One agent-environment interaction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Transition {
    pub observation: Vec<f64>,
    pub action: usize,
    pub reward: f64,
    pub value: f64,
    pub log_prob: f64,
    /// The episode ended with this step.
    pub done: bool,
}

/// Rollout buffer for one epoch.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub steps: Vec<Transition>,
    /// Value estimate of the state after the last step when that step did
    /// not end an episode (the epoch cut an episode short).
    pub bootstrap: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Advantages {
    /// GAE(λ) advantages before normalisation.
    pub raw: Vec<f64>,
    /// Advantages shifted and scaled to mean 0, standard deviation 1.
    pub normalized: Vec<f64>,
    /// Value targets: raw advantage plus the stored value estimate.
    pub returns: Vec<f64>,
}

/// GAE(λ) over a buffer holding one or more episode segments. Terminal
/// steps bootstrap with 0; a trailing unfinished segment uses
/// `trajectory.bootstrap`.
pub fn compute_advantages(trajectory: &Trajectory, gamma: f64, lambda: f64) -> Result<Advantages> {
    let steps = &trajectory.steps;
    if steps.is_empty() {
        return Err(Error::EmptyTrajectory);
    }
    let mut raw = vec![0.0; steps.len()];
    let mut next_value = trajectory.bootstrap;
    let mut next_adv = 0.0;
    for t in (0..steps.len()).rev() {
        let s = &steps[t];
        if s.done {
            next_value = 0.0;
            next_adv = 0.0;
        }
        let delta = s.reward + gamma * next_value - s.value;
        next_adv = delta + gamma * lambda * next_adv;
        raw[t] = next_adv;
        next_value = s.value;
    }
    let returns = raw.iter().zip(steps).map(|(a, s)| a + s.value).collect();
    let n = raw.len() as f64;
    let mean = raw.iter().sum::<f64>() / n;
    let std = (raw.iter().map(|a| (a - mean).powi(2)).sum::<f64>() / n).sqrt();
    let normalized = raw.iter().map(|a| (a - mean) / std.max(1e-8)).collect();
    Ok(Advantages {
        raw,
        normalized,
        returns,
    })
}

/// Per-sample clipped surrogate `min(ρ Â, clip(ρ, 1-ε, 1+ε) Â)`.
pub fn clipped_objective(ratio: f64, advantage: f64, epsilon: f64) -> f64 {
    let clipped = ratio.clamp(1.0 - epsilon, 1.0 + epsilon);
    (ratio * advantage).min(clipped * advantage)
}

/// Fixed batch fed to the loss functions.
#[derive(Debug, Clone)]
pub struct Batch {
    pub observations: Vec<Vec<f64>>,
    pub actions: Vec<usize>,
    pub old_log_probs: Vec<f64>,
    pub advantages: Vec<f64>,
    pub returns: Vec<f64>,
}

impl Batch {
    pub fn from_trajectory(trajectory: &Trajectory, adv: &Advantages) -> Batch {
        Batch {
            observations: trajectory.steps.iter().map(|s| s.observation.clone()).collect(),
            actions: trajectory.steps.iter().map(|s| s.action).collect(),
            old_log_probs: trajectory.steps.iter().map(|s| s.log_prob).collect(),
            advantages: adv.normalized.clone(),
            returns: adv.returns.clone(),
        }
    }

    pub fn len(&self) -> usize {
        self.actions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.actions.is_empty()
    }
}

/// Policy loss `-mean L^CLIP`, its gradient, and the approximate KL
/// `mean(log π_old - log π)`.
pub fn policy_loss(policy: &Mlp, batch: &Batch, epsilon: f64) -> Result<(f64, Vec<f64>, f64)> {
    let n = batch.len() as f64;
    let mut grad = vec![0.0; policy.params.len()];
    let mut loss = 0.0;
    let mut kl = 0.0;
    for t in 0..batch.len() {
        let cache: Cache = policy.forward(&batch.observations[t])?;
        let logits = cache.output();
        let a = batch.actions[t];
        let logp = log_softmax_at(logits, a);
        let ratio = (logp - batch.old_log_probs[t]).exp();
        let adv = batch.advantages[t];
        loss -= clipped_objective(ratio, adv, epsilon) / n;
        kl += (batch.old_log_probs[t] - logp) / n;
        // The unclipped branch carries the gradient when it is the minimum.
        let clipped = ratio.clamp(1.0 - epsilon, 1.0 + epsilon);
        if ratio * adv <= clipped * adv {
            let dlogp = -ratio * adv / n;
            let probs = softmax(logits);
            let g: Vec<f64> = probs
                .iter()
                .enumerate()
                .map(|(i, p)| dlogp * (f64::from(u8::from(i == a)) - p))
                .collect();
            policy.backward(&cache, &g, &mut grad);
        }
    }
    Ok((loss, grad, kl))
}

/// `mean (V(s) - R)^2` and its gradient.
pub fn value_loss(value: &Mlp, batch: &Batch) -> Result<(f64, Vec<f64>)> {
    let n = batch.len() as f64;
    let mut grad = vec![0.0; value.params.len()];
    let mut loss = 0.0;
    for t in 0..batch.len() {
        let cache = value.forward(&batch.observations[t])?;
        let err = cache.output()[0] - batch.returns[t];
        loss += err * err / n;
        value.backward(&cache, &[2.0 * err / n], &mut grad);
    }
    Ok((loss, grad))
}

/// Adam with the usual defaults (β1 = 0.9, β2 = 0.999, ε = 1e-8).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Adam {
    pub lr: f64,
    m: Vec<f64>,
    v: Vec<f64>,
    t: u64,
}

impl Adam {
    pub fn new(lr: f64, n: usize) -> Adam {
        Adam {
            lr,
            m: vec![0.0; n],
            v: vec![0.0; n],
            t: 0,
        }
    }

    pub fn step(&mut self, params: &mut [f64], grad: &[f64]) {
        const B1: f64 = 0.9;
        const B2: f64 = 0.999;
        self.t += 1;
        let c1 = 1.0 - B1.powi(self.t as i32);
        let c2 = 1.0 - B2.powi(self.t as i32);
        for i in 0..params.len() {
            self.m[i] = B1 * self.m[i] + (1.0 - B1) * grad[i];
            self.v[i] = B2 * self.v[i] + (1.0 - B2) * grad[i] * grad[i];
            params[i] -= self.lr * (self.m[i] / c1) / ((self.v[i] / c2).sqrt() + 1e-8);
        }
    }
}

/// Per-epoch update diagnostics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UpdateStats {
    pub epoch: usize,
    pub policy_loss: f64,
    pub value_loss: f64,
    pub kl: f64,
    pub pi_iters: usize,
    pub v_iters: usize,
    pub stopped_early: bool,
    pub mean_reward: f64,
}

/// Optimizer state carried across epochs.
#[derive(Debug, Clone)]
pub struct Learner {
    pub nets: ActorCritic,
    pi_opt: Adam,
    vf_opt: Adam,
}

impl Learner {
    pub fn new(nets: ActorCritic, config: &PpoConfig) -> Learner {
        Learner {
            pi_opt: Adam::new(config.pi_lr, nets.policy.params.len()),
            vf_opt: Adam::new(config.vf_lr, nets.value.params.len()),
            nets,
        }
    }

    /// Up to `train_pi_iters` policy steps on the clipped surrogate, stopping
    /// before any step once the KL exceeds `1.5 · target_kl`, then
    /// `train_v_iters` value steps.
    pub fn ppo_update(&mut self, trajectory: &Trajectory, config: &PpoConfig) -> Result<UpdateStats> {
        let adv = compute_advantages(trajectory, config.gamma, config.gae_lambda)?;
        let batch = Batch::from_trajectory(trajectory, &adv);
        let mut stats = UpdateStats {
            epoch: 0,
            policy_loss: 0.0,
            value_loss: 0.0,
            kl: 0.0,
            pi_iters: 0,
            v_iters: 0,
            stopped_early: false,
            mean_reward: trajectory.steps.iter().map(|s| s.reward).sum::<f64>()
                / trajectory.steps.len() as f64,
        };
        for i in 0..config.train_pi_iters {
            let (loss, grad, kl) = policy_loss(&self.nets.policy, &batch, config.clip_epsilon)?;
            if i == 0 {
                stats.policy_loss = loss;
            }
            stats.kl = kl;
            if kl > 1.5 * config.target_kl {
                stats.stopped_early = true;
                break;
            }
            if grad.iter().any(|g| !g.is_finite()) {
                return Err(Error::NonFiniteGradient);
            }
            self.pi_opt.step(&mut self.nets.policy.params, &grad);
            stats.pi_iters += 1;
        }
        for i in 0..config.train_v_iters {
            let (loss, grad) = value_loss(&self.nets.value, &batch)?;
            if i == 0 {
                stats.value_loss = loss;
            }
            if grad.iter().any(|g| !g.is_finite()) {
                return Err(Error::NonFiniteGradient);
            }
            self.vf_opt.step(&mut self.nets.value.params, &grad);
            stats.v_iters += 1;
        }
        if !self.nets.policy.is_finite() || !self.nets.value.is_finite() {
            return Err(Error::NonFiniteGradient);
        }
        Ok(stats)
    }
}

/// Everything a training run produced.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingRun {
    /// Every circuit built, one per interaction step.
    pub history: Vec<HistoryEntry>,
    pub steps: Vec<StepRecord>,
    pub updates: Vec<UpdateStats>,
    pub nets: ActorCritic,
}

/// Derives an independent child seed for `stream` (SplitMix64 finaliser
/// over `master` mixed with the stream id).
pub fn child_seed(master: u64, stream: u64) -> u64 {
    let mut z = master ^ stream.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed streams split from a run's master seed.
pub mod streams {
    pub const SHOTS: u64 = 1;
    pub const ACTIONS: u64 = 2;
    pub const NETWORK_INIT: u64 = 3;
}

/// Runs `config.total_steps` interactions in epochs of `steps_per_epoch`,
/// resetting the environment whenever an episode ends, with one PPO update
/// per epoch. `seed` drives network initialisation and action sampling.
pub fn train<M: Minimizer>(env: &mut CircuitEnv<M>, config: &PpoConfig, seed: u64) -> Result<TrainingRun> {
    config.validate()?;
    let mut init_rng = ChaCha8Rng::seed_from_u64(child_seed(seed, streams::NETWORK_INIT));
    let mut act_rng = ChaCha8Rng::seed_from_u64(child_seed(seed, streams::ACTIONS));
    let nets = ActorCritic::new(
        env.observation_dim(),
        env.action_space().len(),
        &config.hidden,
        &mut init_rng,
    );
    let mut learner = Learner::new(nets, config);
    let mut history = Vec::with_capacity(config.total_steps);
    let mut steps = Vec::with_capacity(config.total_steps);
    let mut updates = Vec::with_capacity(config.epochs());

    let mut obs = env.reset()?.probs;
    let mut done_steps = 0;
    for epoch in 0..config.epochs() {
        let len = config.steps_per_epoch.min(config.total_steps - done_steps);
        let mut traj = Trajectory::default();
        for _ in 0..len {
            let cache = learner.nets.policy.forward(&obs)?;
            let probs = softmax(cache.output());
            let action = sample_action(&probs, &mut act_rng)?;
            let log_prob = log_softmax_at(cache.output(), action);
            let value = value_forward(&learner.nets.value, &obs)?;
            let out = env.step(action)?;
            history.push(HistoryEntry {
                episode: out.record.episode,
                step: out.record.step,
                reward: out.reward,
                expectation: out.record.expectation,
                circuit: env.state().circuit.clone(),
            });
            steps.push(out.record);
            traj.steps.push(Transition {
                observation: std::mem::take(&mut obs),
                action,
                reward: out.reward,
                value,
                log_prob,
                done: out.done,
            });
            obs = if out.done {
                env.reset()?.probs
            } else {
                out.observation.probs
            };
        }
        done_steps += len;
        if !traj.steps.last().is_some_and(|s| s.done) {
            traj.bootstrap = value_forward(&learner.nets.value, &obs)?;
        }
        let mut stats = learner.ppo_update(&traj, config)?;
        stats.epoch = epoch;
        updates.push(stats);
    }
    Ok(TrainingRun {
        history,
        steps,
        updates,
        nets: learner.nets,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn step(reward: f64, value: f64, done: bool) -> Transition {
        Transition {
            observation: vec![],
            action: 0,
            reward,
            value,
            log_prob: 0.0,
            done,
        }
    }

    #[test]
    fn one_step_advantage() {
        let traj = Trajectory {
            steps: vec![step(2.5, 0.75, true)],
            bootstrap: 99.0,
        };
        let a = compute_advantages(&traj, 1.0, 0.97).unwrap();
        assert_eq!(a.raw, vec![1.75]);
        assert_eq!(a.returns, vec![2.5]);
    }

    #[test]
    fn discounted_returns() {
        let traj = Trajectory {
            steps: vec![step(1.0, 0.0, false), step(1.0, 0.0, true)],
            bootstrap: 0.0,
        };
        let a = compute_advantages(&traj, 0.5, 1.0).unwrap();
        assert_eq!(a.returns, vec![1.5, 1.0]);
        let mean: f64 = a.normalized.iter().sum::<f64>() / 2.0;
        assert!(mean.abs() < 1e-12);
    }

    #[test]
    fn lambda_zero_is_td_residual() {
        let traj = Trajectory {
            steps: vec![step(1.0, 0.3, false), step(-2.0, 0.8, false), step(0.5, -0.1, false)],
            bootstrap: 0.4,
        };
        let g = 0.9;
        let a = compute_advantages(&traj, g, 0.0).unwrap();
        let expect = [1.0 + g * 0.8 - 0.3, -2.0 + g * -0.1 - 0.8, 0.5 + g * 0.4 + 0.1];
        for (x, y) in a.raw.iter().zip(expect) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn segments_do_not_leak_across_episodes() {
        let traj = Trajectory {
            steps: vec![step(1.0, 0.0, true), step(5.0, 0.0, true)],
            bootstrap: 0.0,
        };
        let a = compute_advantages(&traj, 0.99, 0.97).unwrap();
        assert_eq!(a.raw, vec![1.0, 5.0]);
        assert!(compute_advantages(&Trajectory::default(), 0.9, 0.9).is_err());
    }

    #[test]
    fn clip_examples() {
        assert!((clipped_objective(1.5, 2.0, 0.2) - 2.4).abs() < 1e-12);
        assert_eq!(clipped_objective(1.0, -3.0, 0.2), -3.0);
        assert!((clipped_objective(0.5, -1.0, 0.2) + 0.8).abs() < 1e-12);
    }

    #[test]
    fn softmax_properties() {
        let p = softmax(&[0.0; 4]);
        assert!(p.iter().all(|&x| (x - 0.25).abs() < 1e-15));
        let a = softmax(&[0.3, -1.2, 2.0]);
        let b = softmax(&[100.3, 98.8, 102.0]);
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-12);
        }
        assert!((a.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn sample_action_rules() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for _ in 0..100 {
            assert_eq!(sample_action(&[0.0, 0.0, 1.0, 0.0], &mut rng).unwrap(), 2);
        }
        assert!(matches!(sample_action(&[0.5, 0.4], &mut rng), Err(Error::NotNormalized(_))));
        let a: Vec<usize> = (0..20)
            .map(|_| sample_action(&[0.25; 4], &mut ChaCha8Rng::seed_from_u64(5)).unwrap())
            .collect();
        assert!(a.windows(2).all(|w| w[0] == w[1]));
    }

    #[test]
    fn uniform_sampling_frequencies() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let mut counts = [0usize; 4];
        for _ in 0..100_000 {
            counts[sample_action(&[0.25; 4], &mut rng).unwrap()] += 1;
        }
        for c in counts {
            let f = c as f64 / 1e5;
            assert!((f - 0.25).abs() <= 0.01, "{f}");
        }
    }

    #[test]
    fn child_seeds_differ() {
        let a = child_seed(7, streams::SHOTS);
        let b = child_seed(7, streams::ACTIONS);
        assert_ne!(a, b);
        assert_eq!(a, child_seed(7, streams::SHOTS));
    }

    #[test]
    fn configs() {
        assert_eq!(PpoConfig::block().epochs(), 10);
        assert_eq!(PpoConfig::global().epochs(), 10);
        let bad = PpoConfig {
            steps_per_epoch: 500,
            total_steps: 100,
            ..PpoConfig::block()
        };
        assert!(bad.validate().is_err());
    }
}
