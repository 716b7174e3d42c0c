//! Reinforcement-learning construction of variational quantum circuits for
//! QUBO problems, with a QAOA baseline and an experiment harness.

pub mod agent;
pub mod baseline;
pub mod env;
pub mod error;
pub mod exec;
pub mod harness;
pub mod optim;
pub mod problems;
pub mod sim;

pub use error::{Error, Result};
