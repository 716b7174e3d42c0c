//! QAOA baseline and evaluation metrics.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::agent::child_seed;
use crate::env::{exact_expectation, histogram_expectation};
use crate::error::{Error, Result};
use crate::exec::{self, ExecMode};
use crate::optim::{Minimizer, OptimizerBudget};
use crate::problems::QuboInstance;
use crate::sim::{circuit_depth, gate_census, Angle, BasisGate, Circuit, GateInstance, GateKind, Histogram};

/// Largest layer count considered by the depth search.
pub const MAX_LAYERS: usize = 10;
/// Configurations tried by the depth search.
pub const SEARCH_CONFIGS: usize = 50;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct QaoaConfig {
    /// Layer count `p`; `None` runs the random depth search.
    pub p: Option<usize>,
    pub max_evals: usize,
    pub search_configs: usize,
    pub n_runs: usize,
    /// Optimize the exact expectation instead of shot estimates.
    pub exact: bool,
}

impl Default for QaoaConfig {
    fn default() -> Self {
        QaoaConfig {
            p: None,
            max_evals: 1000,
            search_configs: SEARCH_CONFIGS,
            n_runs: crate::env::DEFAULT_RUNS,
            exact: false,
        }
    }
}

impl QaoaConfig {
    pub fn validate(&self) -> Result<()> {
        if let Some(p) = self.p {
            if p == 0 {
                return Err(Error::InvalidDepth);
            }
        }
        if self.n_runs == 0 {
            return Err(Error::ZeroShots);
        }
        if self.search_configs == 0 {
            return Err(Error::Config("search_configs must be at least 1".into()));
        }
        Ok(())
    }

    pub fn budget(&self) -> OptimizerBudget {
        OptimizerBudget::with_evals(self.max_evals)
    }
}

/// `p` layers of cost and mixer unitaries after a Hadamard layer. Slot `2l`
/// holds γ_l and slot `2l + 1` holds β_l; all start at 0.
pub fn build_qaoa(instance: &QuboInstance, p: usize) -> Result<Circuit> {
    if p == 0 {
        return Err(Error::InvalidDepth);
    }
    let ising = instance.to_ising();
    let n = instance.n;
    let mut c = Circuit::hadamard_layer(n);
    for _ in 0..p {
        let gamma = c.push_param(0.0);
        let beta = c.push_param(0.0);
        for (q, &h) in ising.h.iter().enumerate() {
            if h.abs() > 1e-12 {
                let angle = Angle::Param { slot: gamma, scale: 2.0 * h };
                c.gates.push(GateInstance::single(GateKind::Rz, q, angle));
            }
        }
        for (&(a, b), &j) in &ising.j {
            if j.abs() > 1e-12 {
                let angle = Angle::Param { slot: gamma, scale: 2.0 * j };
                c.gates.push(GateInstance::double(GateKind::Rzz, a, b, angle));
            }
        }
        for q in 0..n {
            let angle = Angle::Param { slot: beta, scale: 2.0 };
            c.gates.push(GateInstance::single(GateKind::Rx, q, angle));
        }
    }
    Ok(c)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QaoaResult {
    pub p: usize,
    /// The ansatz with optimized parameters.
    pub circuit: Circuit,
    /// Final energy estimate: a fresh `n_runs`-shot measurement, or the
    /// exact expectation in exact mode.
    pub estimate: f64,
    pub evals: usize,
}

/// Minimizes the energy estimate over all parameters from zeros.
pub fn optimize_qaoa<M: Minimizer, R: Rng + ?Sized>(
    circuit: &Circuit,
    instance: &QuboInstance,
    optimizer: &M,
    config: &QaoaConfig,
    rng: &mut R,
) -> Result<QaoaResult> {
    config.validate()?;
    circuit.validate()?;
    let energies = instance.energy_table();
    let x0 = vec![0.0; circuit.params.len()];
    let mut objective = |x: &[f64]| -> f64 {
        let probs = circuit.simulate_with(x).expect("validated circuit").probabilities();
        if config.exact {
            exact_expectation(&probs, &energies)
        } else {
            let hist = Histogram::sample(&probs, config.n_runs, rng).expect("n_runs >= 1");
            histogram_expectation(&hist, &energies)
        }
    };
    let best = optimizer.minimize(&mut objective, &x0, &config.budget());
    let mut tuned = circuit.clone();
    tuned.params = best.x;
    let probs = tuned.exact_probabilities()?;
    let estimate = if config.exact {
        exact_expectation(&probs, &energies)
    } else {
        histogram_expectation(&Histogram::sample(&probs, config.n_runs, rng)?, &energies)
    };
    Ok(QaoaResult {
        p: tuned.params.len() / 2,
        circuit: tuned,
        estimate,
        evals: best.evals,
    })
}

/// Outcome of the random depth search.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QaoaSearch {
    /// `(p, estimate)` per sampled configuration, in sampling order.
    pub trials: Vec<(usize, f64)>,
    /// Index of the winning trial (lowest estimate, earliest on ties).
    pub best_trial: usize,
    pub best: QaoaResult,
}

/// Draws `config.search_configs` layer counts uniformly from `1..=10`,
/// optimizes each from scratch, and keeps the lowest final estimate. With
/// `config.p` set, runs that single depth instead.
pub fn qaoa_search<M: Minimizer>(
    instance: &QuboInstance,
    optimizer: &M,
    config: &QaoaConfig,
    seed: u64,
    mode: ExecMode,
) -> Result<QaoaSearch> {
    config.validate()?;
    let depths: Vec<usize> = match config.p {
        Some(p) => vec![p],
        None => {
            let mut rng = ChaCha8Rng::seed_from_u64(child_seed(seed, 0));
            (0..config.search_configs)
                .map(|_| rng.gen_range(1..=MAX_LAYERS))
                .collect()
        }
    };
    let jobs: Vec<(usize, usize)> = depths.into_iter().enumerate().collect();
    let results = exec::map(mode, jobs, |(i, p)| -> Result<QaoaResult> {
        let circuit = build_qaoa(instance, p)?;
        let mut rng = ChaCha8Rng::seed_from_u64(child_seed(seed, 1 + i as u64));
        optimize_qaoa(&circuit, instance, optimizer, config, &mut rng)
    });
    let results: Vec<QaoaResult> = results.into_iter().collect::<Result<_>>()?;
    let mut best_trial = 0;
    for (i, r) in results.iter().enumerate() {
        if r.estimate < results[best_trial].estimate {
            best_trial = i;
        }
    }
    Ok(QaoaSearch {
        trials: results.iter().map(|r| (r.p, r.estimate)).collect(),
        best_trial,
        best: results[best_trial].clone(),
    })
}

/// Normalized approximation ratio, raw and clamped to `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ApproxRatio {
    pub raw: f64,
    pub clamped: f64,
}

/// `(estimate - h_max) / (h_min - h_max)`.
pub fn approximation_ratio(estimate: f64, h_min: f64, h_max: f64) -> Result<ApproxRatio> {
    if h_min.is_nan() || h_max.is_nan() || h_min >= h_max {
        return Err(Error::DegenerateInstance(h_min));
    }
    let raw = (estimate - h_max) / (h_min - h_max);
    Ok(ApproxRatio {
        raw,
        clamped: raw.clamp(0.0, 1.0),
    })
}

/// Gate counts in the census basis and depth in the native basis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Composition {
    pub gate_count: usize,
    pub depth: usize,
    /// Count per basis gate name (`H`, `Rx`, `Ry`, `Rz`, `CX`), zeros included.
    pub census: BTreeMap<String, usize>,
    pub fractions: BTreeMap<String, f64>,
}

impl Composition {
    pub fn fraction(&self, gate: BasisGate) -> f64 {
        self.fractions.get(gate.name()).copied().unwrap_or(0.0)
    }
}

pub fn composition_report(circuit: &Circuit) -> Composition {
    let counts = gate_census(circuit);
    let total: usize = counts.values().sum();
    let mut census = BTreeMap::new();
    let mut fractions = BTreeMap::new();
    for g in BasisGate::ALL {
        let c = counts.get(&g).copied().unwrap_or(0);
        census.insert(g.name().to_string(), c);
        let f = if total == 0 { 0.0 } else { c as f64 / total as f64 };
        fractions.insert(g.name().to_string(), f);
    }
    Composition {
        gate_count: total,
        depth: circuit_depth(circuit),
        census,
        fractions,
    }
}

/// Approximation ratio together with circuit composition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub approximation_ratio: f64,
    pub approximation_ratio_raw: f64,
    pub estimate: f64,
    pub h_min: f64,
    pub h_max: f64,
    pub composition: Composition,
}

pub fn metrics_report(circuit: &Circuit, estimate: f64, h_min: f64, h_max: f64) -> Result<MetricsReport> {
    let ar = approximation_ratio(estimate, h_min, h_max)?;
    Ok(MetricsReport {
        approximation_ratio: ar.clamped,
        approximation_ratio_raw: ar.raw,
        estimate,
        h_min,
        h_max,
        composition: composition_report(circuit),
    })
}
