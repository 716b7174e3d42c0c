use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::config::{ExperimentConfig, InstanceId, Method};
use crate::agent::{child_seed, streams, train, PpoConfig};
use crate::baseline::{build_qaoa, optimize_qaoa, MAX_LAYERS};
use crate::env::CircuitEnv;
use crate::error::{Error, Result};
use crate::exec::{self, ExecMode};
use crate::optim::LinearTrustRegion;
use crate::problems::QuboInstance;

/// Recorded in every search output.
pub const SEARCH_NOTE: &str =
    "random search over the stated priors, used in place of Bayesian optimization; same priors and budget";

pub const LR_RANGE: (f64, f64) = (5e-6, 3e-3);
pub const STEPS_PER_EPOCH_RANGE: (usize, usize) = (100, 600);
pub const ITERS_RANGE: (usize, usize) = (4, 4096);
pub const DEFAULT_BUDGET: usize = 50;

/// `exp(U(ln lo, ln hi))`.
pub fn log_uniform<R: Rng + ?Sized>(rng: &mut R, lo: f64, hi: f64) -> f64 {
    rng.gen_range(lo.ln()..=hi.ln()).exp()
}

/// Hyperparameters drawn for one trial.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sample {
    Ppo {
        steps_per_epoch: usize,
        pi_lr: f64,
        vf_lr: f64,
        train_pi_iters: usize,
        train_v_iters: usize,
    },
    Qaoa {
        p: usize,
    },
}

impl Sample {
    pub fn draw<R: Rng + ?Sized>(method: Method, rng: &mut R) -> Result<Sample> {
        match method {
            Method::RlvqcGlobal => Ok(Sample::Ppo {
                steps_per_epoch: rng.gen_range(STEPS_PER_EPOCH_RANGE.0..=STEPS_PER_EPOCH_RANGE.1),
                pi_lr: log_uniform(rng, LR_RANGE.0, LR_RANGE.1),
                vf_lr: log_uniform(rng, LR_RANGE.0, LR_RANGE.1),
                train_pi_iters: rng.gen_range(ITERS_RANGE.0..=ITERS_RANGE.1),
                train_v_iters: rng.gen_range(ITERS_RANGE.0..=ITERS_RANGE.1),
            }),
            Method::Qaoa => Ok(Sample::Qaoa {
                p: rng.gen_range(1..=MAX_LAYERS),
            }),
            Method::RlvqcBlock => Err(Error::Config(
                "block variant uses the default PPO hyperparameters; search global or qaoa".into(),
            )),
        }
    }

    /// `base` with this sample applied.
    pub fn apply(&self, base: &ExperimentConfig) -> ExperimentConfig {
        let mut cfg = base.resolved();
        match *self {
            Sample::Ppo {
                steps_per_epoch,
                pi_lr,
                vf_lr,
                train_pi_iters,
                train_v_iters,
            } => {
                let ppo = cfg.ppo.get_or_insert_with(PpoConfig::global);
                ppo.steps_per_epoch = steps_per_epoch;
                ppo.pi_lr = pi_lr;
                ppo.vf_lr = vf_lr;
                ppo.train_pi_iters = train_pi_iters;
                ppo.train_v_iters = train_v_iters;
                ppo.total_steps = ppo.total_steps.max(steps_per_epoch);
            }
            Sample::Qaoa { p } => cfg.qaoa.p = Some(p),
        }
        cfg
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trial {
    pub sample: Sample,
    /// Best reward per instance, in instance order.
    pub rewards: Vec<f64>,
    /// Mean of `rewards`.
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HpoReport {
    pub method: Method,
    pub note: String,
    pub instances: Vec<InstanceId>,
    pub seed: u64,
    pub trials: Vec<Trial>,
    pub best_trial: usize,
    pub best_config: ExperimentConfig,
}

/// Best reward one configuration reaches on one instance: the highest
/// reward of any circuit built during training, or `-estimate` for QAOA.
fn trial_reward(cfg: &ExperimentConfig, q: &QuboInstance, seed: u64) -> Result<f64> {
    match cfg.method.env_mode() {
        None => {
            let qaoa = &cfg.qaoa;
            let circuit = build_qaoa(q, qaoa.p.expect("sampled depth"))?;
            let mut rng = ChaCha8Rng::seed_from_u64(child_seed(seed, streams::SHOTS));
            Ok(-optimize_qaoa(&circuit, q, &LinearTrustRegion, qaoa, &mut rng)?.estimate)
        }
        Some(mode) => {
            let mut env = CircuitEnv::new(q.clone(), mode, cfg.env.clone(), child_seed(seed, streams::SHOTS))?;
            let run = train(&mut env, &cfg.ppo_config().expect("rl method"), seed)?;
            Ok(run.history.iter().map(|h| h.reward).fold(f64::NEG_INFINITY, f64::max))
        }
    }
}

/// Draws `budget` configurations for `base.method`, scores each by its mean
/// best reward over `instances`, and returns the highest-scoring one
/// (earliest on ties).
pub fn hpo_random_search(
    base: &ExperimentConfig,
    instances: &[(InstanceId, QuboInstance)],
    budget: usize,
    seed: u64,
    mode: ExecMode,
) -> Result<HpoReport> {
    if budget == 0 {
        return Err(Error::Config("empty search budget".into()));
    }
    if instances.is_empty() {
        return Err(Error::Config("no instances to tune on".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(child_seed(seed, 0));
    let samples = (0..budget)
        .map(|_| Sample::draw(base.method, &mut rng))
        .collect::<Result<Vec<_>>>()?;
    let jobs: Vec<(usize, Sample)> = samples.into_iter().enumerate().collect();
    let trials = exec::map(mode, jobs, |(i, sample)| -> Result<Trial> {
        let cfg = sample.apply(base);
        cfg.validate()?;
        let trial_seed = child_seed(seed, 1 + i as u64);
        let rewards = instances
            .iter()
            .map(|(_, q)| trial_reward(&cfg, q, trial_seed))
            .collect::<Result<Vec<_>>>()?;
        let score = rewards.iter().sum::<f64>() / rewards.len() as f64;
        Ok(Trial { sample, rewards, score })
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    let mut best_trial = 0;
    for (i, t) in trials.iter().enumerate() {
        if t.score > trials[best_trial].score {
            best_trial = i;
        }
    }
    Ok(HpoReport {
        method: base.method,
        note: SEARCH_NOTE.to_string(),
        instances: instances.iter().map(|(id, _)| *id).collect(),
        seed,
        best_config: trials[best_trial].sample.apply(base),
        trials,
        best_trial,
    })
}
