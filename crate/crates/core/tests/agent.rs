mod common;

use common::gradcheck::{policy_gradient_error, toy_batch, toy_networks, value_gradient_error, EPSILON};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rlvqc::agent::{
    compute_advantages, softmax, train, value_loss, ActorCritic, Learner, PpoConfig, Trajectory, Transition,
};
use rlvqc::env::{CircuitEnv, EnvConfig, EnvMode};
use rlvqc::problems::{maxcut_qubo, Graph};

#[test]
fn clipped_surrogate_gradient_matches_finite_differences() {
    for seed in 0..5 {
        let (pi, _) = toy_networks(seed);
        let batch = toy_batch(&pi);
        let err = policy_gradient_error(&pi, &batch);
        assert!(err <= 1e-4, "seed {seed}: relative error {err}");
    }
}

#[test]
fn toy_batch_exercises_both_clip_branches() {
    let (pi, _) = toy_networks(0);
    let batch = toy_batch(&pi);
    let ratios: Vec<f64> = (0..batch.len())
        .map(|t| {
            let p = softmax(pi.forward(&batch.observations[t]).unwrap().output())[batch.actions[t]];
            (p.ln() - batch.old_log_probs[t]).exp()
        })
        .collect();
    let outside = ratios.iter().filter(|r| (**r - 1.0).abs() > EPSILON).count();
    assert!(outside > 0 && outside < ratios.len(), "{ratios:?}");
}

#[test]
fn value_gradient_matches_finite_differences() {
    for seed in 0..5 {
        let (pi, v) = toy_networks(seed);
        let batch = toy_batch(&pi);
        let err = value_gradient_error(&v, &batch);
        assert!(err <= 1e-4, "seed {seed}: relative error {err}");
    }
}

fn toy_trajectory(obs_dim: usize, n_actions: usize, seed: u64) -> Trajectory {
    let steps = (0..12)
        .map(|t| Transition {
            observation: (0..obs_dim).map(|k| ((t * 7 + k + seed as usize) as f64).sin()).collect(),
            action: t % n_actions,
            reward: (t as f64 * 0.9).cos(),
            value: 0.0,
            log_prob: -(n_actions as f64).ln(),
            done: t % 5 == 4,
        })
        .collect();
    Trajectory { steps, bootstrap: 0.3 }
}

fn learner(config: &PpoConfig) -> Learner {
    let nets = ActorCritic::new(4, 3, &[8, 8], &mut ChaCha8Rng::seed_from_u64(1));
    Learner::new(nets, config)
}

fn with_current_log_probs(learner: &Learner, mut traj: Trajectory) -> Trajectory {
    for s in &mut traj.steps {
        let probs = softmax(learner.nets.policy.forward(&s.observation).unwrap().output());
        s.log_prob = probs[s.action].ln();
    }
    traj
}

#[test]
fn kl_early_stop_halts_policy_updates() {
    let config = PpoConfig {
        pi_lr: 0.05,
        target_kl: 1e-9,
        ..PpoConfig::block()
    };
    let mut l = learner(&config);
    let traj = with_current_log_probs(&l, toy_trajectory(4, 3, 0));
    let stats = l.ppo_update(&traj, &config).unwrap();
    assert!(stats.stopped_early);
    assert!(stats.pi_iters < config.train_pi_iters);
    assert!(stats.kl > 1.5 * config.target_kl);
    assert_eq!(stats.v_iters, config.train_v_iters);
}

#[test]
fn no_early_stop_with_loose_target() {
    let config = PpoConfig {
        target_kl: 1e9,
        ..PpoConfig::block()
    };
    let mut l = learner(&config);
    let traj = with_current_log_probs(&l, toy_trajectory(4, 3, 1));
    let stats = l.ppo_update(&traj, &config).unwrap();
    assert!(!stats.stopped_early);
    assert_eq!(stats.pi_iters, config.train_pi_iters);
}

#[test]
fn value_loss_does_not_increase() {
    let config = PpoConfig::block();
    for seed in 0..4 {
        let mut l = learner(&config);
        let traj = with_current_log_probs(&l, toy_trajectory(4, 3, seed));
        let adv = compute_advantages(&traj, config.gamma, config.gae_lambda).unwrap();
        let batch = rlvqc::agent::Batch::from_trajectory(&traj, &adv);
        let before = value_loss(&l.nets.value, &batch).unwrap().0;
        l.ppo_update(&traj, &config).unwrap();
        let after = value_loss(&l.nets.value, &batch).unwrap().0;
        assert!(after <= before, "seed {seed}: {before} -> {after}");
    }
}

#[test]
fn initial_policy_is_near_uniform() {
    let nets = ActorCritic::new(16, 10, &[64, 64], &mut ChaCha8Rng::seed_from_u64(3));
    let obs = vec![1.0 / 16.0; 16];
    let probs = softmax(nets.policy.forward(&obs).unwrap().output());
    assert!(probs.iter().all(|p| (p - 0.1).abs() < 0.01), "{probs:?}");
}

#[test]
fn checkpoint_round_trip() {
    let nets = ActorCritic::new(4, 3, &[5], &mut ChaCha8Rng::seed_from_u64(8));
    let text = nets.to_text();
    assert_eq!(ActorCritic::from_text(&text).unwrap(), nets);
    assert!(ActorCritic::from_text("actor-critic\nmlp 2 1\n0.5\n").is_err());
}

fn triangle_env(seed: u64) -> CircuitEnv {
    let q = maxcut_qubo(&Graph::new(3, [(0, 1), (1, 2), (0, 2)]));
    let cfg = EnvConfig {
        n_runs: 200,
        ..EnvConfig::default()
    };
    CircuitEnv::new(q, EnvMode::Block, cfg, seed).unwrap()
}

#[test]
fn training_runs_the_step_budget_and_is_reproducible() {
    let config = PpoConfig {
        total_steps: 23,
        steps_per_epoch: 10,
        train_pi_iters: 5,
        train_v_iters: 5,
        ..PpoConfig::block()
    };
    let a = train(&mut triangle_env(4), &config, 11).unwrap();
    assert_eq!(a.history.len(), 23);
    assert_eq!(a.steps.len(), 23);
    assert_eq!(a.updates.len(), 3);
    let b = train(&mut triangle_env(4), &config, 11).unwrap();
    assert_eq!(a, b);
    let c = train(&mut triangle_env(4), &config, 12).unwrap();
    assert_ne!(a.steps, c.steps);
}
