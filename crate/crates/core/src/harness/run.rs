use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::config::{ExperimentConfig, InstanceId, Method};
use super::instances::{build_instance, load_instance};
use crate::agent::{child_seed, streams, train, PpoConfig, UpdateStats};
use crate::baseline::{metrics_report, qaoa_search, MetricsReport, QaoaConfig};
use crate::env::{finalize, CircuitEnv, EnvConfig, StepRecord};
use crate::error::{Error, Result};
use crate::exec::{self, ExecMode};
use crate::optim::LinearTrustRegion;
use crate::problems::QuboInstance;
use crate::sim::Circuit;

/// Everything that determines a single run's outcome.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSpec {
    pub method: Method,
    pub instance: InstanceId,
    pub seed: u64,
    pub ppo: Option<PpoConfig>,
    pub env: EnvConfig,
    pub qaoa: QaoaConfig,
}

/// Result of one (instance, seed) run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub spec: RunSpec,
    /// Per-step trace of all training episodes (empty for QAOA).
    pub trace: Vec<StepRecord>,
    pub updates: Vec<UpdateStats>,
    /// `(p, estimate)` of every QAOA depth trial (empty for RLVQC).
    pub qaoa_trials: Vec<(usize, f64)>,
    /// Reward of the selected circuit before fine-tuning (RLVQC only).
    pub source_reward: Option<f64>,
    /// Final circuit in the text format of [`Circuit::to_text`].
    pub circuit: String,
    pub metrics: MetricsReport,
    pub wall_time_s: f64,
}

impl RunRecord {
    pub fn circuit(&self) -> Result<Circuit> {
        Circuit::from_text(&self.circuit)
    }

    /// Equality ignoring wall time.
    pub fn same_payload(&self, other: &RunRecord) -> bool {
        let mut a = self.clone();
        a.wall_time_s = other.wall_time_s;
        &a == other
    }

    /// `<dir>/<method>/<instance>/seed-<seed>.json`.
    pub fn path_in(&self, dir: &Path) -> PathBuf {
        dir.join(self.spec.method.key())
            .join(self.spec.instance.to_string())
            .join(format!("seed-{}.json", self.spec.seed))
    }

    pub fn write(&self, dir: &Path) -> Result<PathBuf> {
        let path = self.path_in(dir);
        fs::create_dir_all(path.parent().expect("nested path"))?;
        fs::write(&path, serde_json::to_string(self)?)?;
        Ok(path)
    }
}

/// Runs one method on one instance. Deterministic in `spec`.
pub fn run_one(spec: &RunSpec, instance: &QuboInstance) -> Result<RunRecord> {
    let start = Instant::now();
    let extrema = instance.brute_force_extrema(ExecMode::Sequential)?;
    let mut trace = vec![];
    let mut updates = vec![];
    let mut qaoa_trials = vec![];
    let mut source_reward = None;
    let (circuit, estimate) = match spec.method.env_mode() {
        None => {
            let search = qaoa_search(instance, &LinearTrustRegion, &spec.qaoa, spec.seed, ExecMode::Sequential)?;
            qaoa_trials = search.trials;
            (search.best.circuit, search.best.estimate)
        }
        Some(mode) => {
            let ppo = spec.ppo.clone().or_else(|| spec.method.default_ppo()).expect("rl method");
            let mut env = CircuitEnv::new(
                instance.clone(),
                mode,
                spec.env.clone(),
                child_seed(spec.seed, streams::SHOTS),
            )?;
            let run = train(&mut env, &ppo, spec.seed)?;
            let fin = finalize(&run.history, &mut env)?;
            trace = run.steps;
            updates = run.updates;
            source_reward = Some(fin.source_reward);
            (fin.circuit, fin.estimate)
        }
    };
    Ok(RunRecord {
        spec: spec.clone(),
        trace,
        updates,
        qaoa_trials,
        source_reward,
        metrics: metrics_report(&circuit, estimate, extrema.min_energy, extrema.max_energy)?,
        circuit: circuit.to_text(),
        wall_time_s: start.elapsed().as_secs_f64(),
    })
}
/// Where run inputs come from and where records go.
#[derive(Debug, Clone, Default)]
pub struct RunPaths {
    /// Directory written by `gen_instances`; `None` builds instances in memory.
    pub instances: Option<PathBuf>,
    /// Directory receiving one record file per run as it completes.
    pub records: Option<PathBuf>,
}

/// The run specs of a config, one per (instance, seed), instance-major.
pub fn run_specs(config: &ExperimentConfig) -> Vec<RunSpec> {
    let ppo = config.ppo_config();
    let mut out = vec![];
    for instance in config.instances() {
        for &seed in &config.seeds {
            out.push(RunSpec {
                method: config.method,
                instance,
                seed,
                ppo: ppo.clone(),
                env: config.env.clone(),
                qaoa: config.qaoa.clone(),
            });
        }
    }
    out
}

/// Runs every (instance, seed) pair of `config`.
pub fn run_experiment(config: &ExperimentConfig, paths: &RunPaths, mode: ExecMode) -> Result<Vec<RunRecord>> {
    config.validate()?;
    let mut instances = vec![];
    for id in config.instances() {
        let q = match &paths.instances {
            Some(dir) => load_instance(dir, id)?,
            None => build_instance(id)?,
        };
        instances.push((id, q));
    }
    let specs = run_specs(config);
    let results = exec::map(mode, specs, |spec| -> Result<RunRecord> {
        let q = &instances.iter().find(|(id, _)| *id == spec.instance).expect("loaded").1;
        let record = run_one(&spec, q)?;
        if let Some(dir) = &paths.records {
            record.write(dir)?;
        }
        Ok(record)
    });
    results.into_iter().collect()
}

/// Reads every `*.json` record under `dir`, sorted by path.
pub fn load_records(dir: &Path) -> Result<Vec<RunRecord>> {
    if !dir.exists() {
        return Err(Error::MissingFile(dir.to_path_buf()));
    }
    let mut files = vec![];
    for entry in walkdir::WalkDir::new(dir) {
        let entry = entry.map_err(|e| Error::Io(e.into()))?;
        if entry.file_type().is_file() && entry.path().extension().is_some_and(|e| e == "json") {
            files.push(entry.into_path());
        }
    }
    files.sort();
    files
        .iter()
        .map(|f| Ok(serde_json::from_str(&fs::read_to_string(f)?)?))
        .collect()
}
