//! PPO actor-critic with hand-written backpropagation.

mod mlp;
mod ppo;

pub use mlp::{Cache, Mlp};
pub use ppo::{
    child_seed, clipped_objective, compute_advantages, policy_forward, policy_loss, sample_action,
    softmax, streams, train, value_forward, value_loss, ActorCritic, Adam, Advantages, Batch,
    Learner, PpoConfig, TrainingRun, Trajectory, Transition, UpdateStats,
};
