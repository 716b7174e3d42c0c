//! Circuit-construction environments.
//!
//! An episode starts from a Hadamard layer. Each step appends the gate(s)
//! of one action at θ = 0, tunes the new parameters with a derivative-free
//! optimizer against the shot-estimated energy, then measures the circuit
//! to produce the next observation and the reward
//! `-<H>* - β · depth`. A patience counter ends episodes that stop
//! improving.

mod actions;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub use actions::{ActionDesc, ActionSpace, EnvMode};

use crate::error::{Error, Result};
use crate::optim::{LinearTrustRegion, Minimizer, OptimizerBudget};
use crate::problems::QuboInstance;
use crate::sim::{circuit_depth, Angle, Circuit, GateInstance, Histogram, StateVector};

/// Default number of shots behind every estimate.
pub const DEFAULT_RUNS: usize = 1000;
pub const DEFAULT_PATIENCE: u32 = 3;
/// Depth penalty for global mode; block mode divides it by the pair count.
pub const BASE_BETA: f64 = 0.1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EnvConfig {
    /// Depth penalty; `None` picks the mode default.
    pub beta: Option<f64>,
    pub n_runs: usize,
    pub patience_init: u32,
    /// Step cap per episode; `None` picks the mode default.
    pub max_ep_len: Option<usize>,
    pub inner_budget: OptimizerBudget,
    pub fine_tune_budget: OptimizerBudget,
    /// Use exact probabilities and expectations instead of shots.
    pub exact: bool,
    /// Re-optimize every parameter at each step instead of only the new ones.
    pub refit_all: bool,
}

impl Default for EnvConfig {
    fn default() -> Self {
        EnvConfig {
            beta: None,
            n_runs: DEFAULT_RUNS,
            patience_init: DEFAULT_PATIENCE,
            max_ep_len: None,
            inner_budget: OptimizerBudget::inner(),
            fine_tune_budget: OptimizerBudget::fine_tune(),
            exact: false,
            refit_all: false,
        }
    }
}

impl EnvConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_runs == 0 {
            return Err(Error::ZeroShots);
        }
        if let Some(b) = self.beta {
            if b.is_nan() || b < 0.0 {
                return Err(Error::Config(format!("beta must be >= 0, got {b}")));
            }
        }
        if self.patience_init == 0 {
            return Err(Error::Config("patience_init must be >= 1".into()));
        }
        if self.max_ep_len == Some(0) {
            return Err(Error::Config("max_ep_len must be >= 1".into()));
        }
        Ok(())
    }
}

/// Step cap: `2n` in global mode, `5` in block mode.
pub fn max_episode_steps(mode: EnvMode, n: usize) -> usize {
    match mode {
        EnvMode::Global => 2 * n,
        EnvMode::Block => 5,
    }
}

/// Depth penalty: 0.1 globally, 0.1 / |pairs| for blocks.
pub fn default_beta(mode: EnvMode, n_pairs: usize) -> f64 {
    match mode {
        EnvMode::Global => BASE_BETA,
        EnvMode::Block => BASE_BETA / n_pairs.max(1) as f64,
    }
}

/// `-<H>* - β d`.
pub fn reward(expectation: f64, depth: usize, beta: f64) -> f64 {
    -expectation - beta * depth as f64
}

/// Mean energy over `n_runs` sampled measurements.
pub fn estimate_expectation<R: rand::Rng + ?Sized>(
    circuit: &Circuit,
    energies: &[f64],
    n_runs: usize,
    rng: &mut R,
) -> Result<f64> {
    let hist = circuit.run_shots(n_runs, rng)?;
    Ok(histogram_expectation(&hist, energies))
}

/// `Σ_i p̂_i E_i` over a histogram.
pub fn histogram_expectation(hist: &Histogram, energies: &[f64]) -> f64 {
    let total: f64 = hist
        .counts
        .iter()
        .zip(energies)
        .filter(|(&c, _)| c > 0)
        .map(|(&c, &e)| c as f64 * e)
        .sum();
    total / hist.shots as f64
}

/// `Σ_i |c_i|^2 E_i`.
pub fn exact_expectation(probs: &[f64], energies: &[f64]) -> f64 {
    probs.iter().zip(energies).map(|(p, e)| p * e).sum()
}

/// Probability vector handed to the agent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Observation {
    pub probs: Vec<f64>,
}

/// Mutable episode state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnvState {
    pub circuit: Circuit,
    pub best_episode_reward: f64,
    pub patience: u32,
    pub step_count: usize,
    /// Abstract block gates chosen so far (block mode only).
    pub block_gates: Vec<ActionDesc>,
}

/// One line of an episode trace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub episode: usize,
    pub step: usize,
    pub action: usize,
    pub reward: f64,
    pub depth: usize,
    pub expectation: f64,
    pub patience: u32,
    pub done: bool,
    pub inner_evals: usize,
}

/// A circuit produced during training and the reward it earned.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistoryEntry {
    pub episode: usize,
    pub step: usize,
    pub reward: f64,
    pub expectation: f64,
    pub circuit: Circuit,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepOutcome {
    pub observation: Observation,
    pub reward: f64,
    pub done: bool,
    pub record: StepRecord,
}

/// For each abstract block gate, one concrete gate per pair (role 0 → `i`,
/// role 1 → `j`), pairs in the given order, each with its own parameter.
/// Gates are grouped block-gate-major after a Hadamard layer.
pub fn instantiate_block(
    block_gates: &[ActionDesc],
    interacting_pairs: &[(usize, usize)],
    n: usize,
) -> Result<Circuit> {
    if interacting_pairs.is_empty() {
        return Err(Error::InvalidActionSpace("no interacting pairs".into()));
    }
    let mut c = Circuit::hadamard_layer(n);
    for desc in block_gates {
        append_block_gate(&mut c, desc, interacting_pairs);
    }
    Ok(c)
}

fn append_block_gate(c: &mut Circuit, desc: &ActionDesc, pairs: &[(usize, usize)]) {
    for &(i, j) in pairs {
        let role = |r: usize| if r == 0 { i } else { j };
        let q = [role(desc.qubits[0]), role(desc.qubits[1])];
        c.push_rotation(desc.kind, q);
    }
}

/// The environment for one QUBO instance.
pub struct CircuitEnv<M: Minimizer = LinearTrustRegion> {
    instance: QuboInstance,
    energies: Vec<f64>,
    space: ActionSpace,
    config: EnvConfig,
    beta: f64,
    max_ep_len: usize,
    optimizer: M,
    rng: ChaCha8Rng,
    state: EnvState,
    episode: usize,
    started: bool,
}

impl CircuitEnv<LinearTrustRegion> {
    pub fn new(instance: QuboInstance, mode: EnvMode, config: EnvConfig, seed: u64) -> Result<Self> {
        Self::with_optimizer(instance, mode, config, seed, LinearTrustRegion)
    }
}

impl<M: Minimizer> CircuitEnv<M> {
    pub fn with_optimizer(
        instance: QuboInstance,
        mode: EnvMode,
        config: EnvConfig,
        seed: u64,
        optimizer: M,
    ) -> Result<Self> {
        config.validate()?;
        let n = instance.n;
        let pairs = instance.interacting_pairs();
        let space = ActionSpace::enumerate(mode, n, &pairs)?;
        let beta = config.beta.unwrap_or_else(|| default_beta(mode, pairs.len()));
        let max_ep_len = config.max_ep_len.unwrap_or_else(|| max_episode_steps(mode, n));
        let energies = instance.energy_table();
        Ok(CircuitEnv {
            state: EnvState {
                circuit: Circuit::hadamard_layer(n),
                best_episode_reward: f64::NEG_INFINITY,
                patience: config.patience_init,
                step_count: 0,
                block_gates: Vec::new(),
            },
            instance,
            energies,
            space,
            config,
            beta,
            max_ep_len,
            optimizer,
            rng: ChaCha8Rng::seed_from_u64(seed),
            episode: 0,
            started: false,
        })
    }

    pub fn action_space(&self) -> &ActionSpace {
        &self.space
    }

    pub fn observation_dim(&self) -> usize {
        1 << self.instance.n
    }

    pub fn state(&self) -> &EnvState {
        &self.state
    }

    pub fn instance(&self) -> &QuboInstance {
        &self.instance
    }

    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    pub fn config(&self) -> &EnvConfig {
        &self.config
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn max_ep_len(&self) -> usize {
        self.max_ep_len
    }

    pub fn episode(&self) -> usize {
        self.episode
    }

    pub fn is_terminal(&self) -> bool {
        self.state.patience == 0 || self.state.step_count >= self.max_ep_len
    }

    /// Starts a new episode from the Hadamard layer.
    pub fn reset(&mut self) -> Result<Observation> {
        if self.started {
            self.episode += 1;
        }
        self.started = true;
        self.state = EnvState {
            circuit: Circuit::hadamard_layer(self.instance.n),
            best_episode_reward: f64::NEG_INFINITY,
            patience: self.config.patience_init,
            step_count: 0,
            block_gates: Vec::new(),
        };
        let (obs, _) = self.measure(&self.state.circuit.clone())?;
        Ok(obs)
    }

    /// Measures `circuit`: observation plus its energy estimate.
    fn measure(&mut self, circuit: &Circuit) -> Result<(Observation, f64)> {
        let probs = circuit.exact_probabilities()?;
        if self.config.exact {
            let e = exact_expectation(&probs, &self.energies);
            return Ok((Observation { probs }, e));
        }
        let hist = Histogram::sample(&probs, self.config.n_runs, &mut self.rng)?;
        let e = histogram_expectation(&hist, &self.energies);
        Ok((
            Observation {
                probs: hist.frequencies(),
            },
            e,
        ))
    }

    /// Appends `action`, tunes it and returns the next observation and reward.
    pub fn step(&mut self, action: usize) -> Result<StepOutcome> {
        if !self.started || self.is_terminal() {
            return Err(Error::EpisodeTerminated);
        }
        let desc = self.space.get(action)?;
        let prefix_len = self.state.circuit.gates.len();
        let first_new = self.state.circuit.params.len();
        match self.space.mode {
            EnvMode::Global => {
                self.state.circuit.push_rotation(desc.kind, desc.qubits);
            }
            EnvMode::Block => {
                append_block_gate(&mut self.state.circuit, &desc, &self.space.interacting_pairs);
                self.state.block_gates.push(desc);
            }
        }

        let inner_evals = self.tune(prefix_len, first_new)?;
        let circuit = self.state.circuit.clone();
        let (observation, expectation) = self.measure(&circuit)?;
        let depth = circuit_depth(&circuit);
        let r = reward(expectation, depth, self.beta);

        let s = &mut self.state;
        if r < s.best_episode_reward {
            s.patience = s.patience.saturating_sub(1);
        } else {
            s.patience = (s.patience + 1).min(self.config.patience_init);
        }
        s.best_episode_reward = s.best_episode_reward.max(r);
        s.step_count += 1;
        let done = self.is_terminal();
        let record = StepRecord {
            episode: self.episode,
            step: self.state.step_count,
            action,
            reward: r,
            depth,
            expectation,
            patience: self.state.patience,
            done,
            inner_evals,
        };
        Ok(StepOutcome {
            observation,
            reward: r,
            done,
            record,
        })
    }

    /// Optimizes the parameters added since `first_new` (or all of them with
    /// `refit_all`). Returns the number of objective evaluations.
    fn tune(&mut self, prefix_len: usize, first_new: usize) -> Result<usize> {
        let refit = self.config.refit_all;
        let start = if refit { 0 } else { first_new };
        let circuit = &self.state.circuit;
        let x0: Vec<f64> = circuit.params[start..].to_vec();
        // Frozen prefix is simulated once.
        let prefix = if refit {
            StateVector::zero(circuit.n_qubits)
        } else {
            Circuit {
                n_qubits: circuit.n_qubits,
                gates: circuit.gates[..prefix_len].to_vec(),
                params: circuit.params.clone(),
            }
            .simulate()?
        };
        let suffix: &[GateInstance] = if refit {
            &circuit.gates
        } else {
            &circuit.gates[prefix_len..]
        };
        let mut params = circuit.params.clone();
        let energies = &self.energies;
        let exact = self.config.exact;
        let n_runs = self.config.n_runs;
        let rng = &mut self.rng;
        let mut objective = |x: &[f64]| -> f64 {
            params[start..].copy_from_slice(x);
            let mut state = prefix.clone();
            for g in suffix {
                let theta = g.angle.map_or(0.0, |a: Angle| a.resolve(&params));
                state
                    .apply(g.kind, &g.qubits, theta)
                    .expect("gates validated on insertion");
            }
            let probs = state.probabilities();
            if exact {
                exact_expectation(&probs, energies)
            } else {
                let hist = Histogram::sample(&probs, n_runs, rng).expect("n_runs >= 1");
                histogram_expectation(&hist, energies)
            }
        };
        let best = self
            .optimizer
            .minimize(&mut objective, &x0, &self.config.inner_budget);
        self.state.circuit.params[start..].copy_from_slice(&best.x);
        Ok(best.evals)
    }

    /// Re-optimizes every parameter of `circuit` from its stored values with
    /// the fine-tune budget; returns the tuned circuit and a fresh estimate.
    pub fn fine_tune(&mut self, circuit: &Circuit) -> Result<(Circuit, f64)> {
        let mut tuned = circuit.clone();
        let energies = &self.energies;
        let exact = self.config.exact;
        let n_runs = self.config.n_runs;
        let rng = &mut self.rng;
        let mut objective = |x: &[f64]| -> f64 {
            let probs = tuned_probs(circuit, x);
            if exact {
                exact_expectation(&probs, energies)
            } else {
                let hist = Histogram::sample(&probs, n_runs, rng).expect("n_runs >= 1");
                histogram_expectation(&hist, energies)
            }
        };
        let best = self
            .optimizer
            .minimize(&mut objective, &circuit.params, &self.config.fine_tune_budget);
        tuned.params = best.x;
        let (_, estimate) = self.measure(&tuned)?;
        Ok((tuned, estimate))
    }
}

fn tuned_probs(circuit: &Circuit, params: &[f64]) -> Vec<f64> {
    circuit
        .simulate_with(params)
        .expect("validated circuit")
        .probabilities()
}

/// Result of re-optimizing the best circuit of a training run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Finalized {
    /// Index into the history of the selected circuit.
    pub source: usize,
    pub source_reward: f64,
    pub circuit: Circuit,
    pub estimate: f64,
}

/// Index of the highest-reward entry; ties go to the earliest.
pub fn select_best(history: &[HistoryEntry]) -> Result<usize> {
    if history.is_empty() {
        return Err(Error::EmptyHistory);
    }
    let mut best = 0;
    for (i, h) in history.iter().enumerate() {
        if h.reward > history[best].reward {
            best = i;
        }
    }
    Ok(best)
}

/// Picks the best circuit seen across all episodes and fine-tunes all of
/// its parameters.
pub fn finalize<M: Minimizer>(history: &[HistoryEntry], env: &mut CircuitEnv<M>) -> Result<Finalized> {
    let source = select_best(history)?;
    let (circuit, estimate) = env.fine_tune(&history[source].circuit)?;
    Ok(Finalized {
        source,
        source_reward: history[source].reward,
        circuit,
        estimate,
    })
}
