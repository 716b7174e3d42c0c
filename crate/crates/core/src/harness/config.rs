use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::agent::PpoConfig;
use crate::baseline::QaoaConfig;
use crate::env::{EnvConfig, EnvMode};
use crate::error::{Error, Result};
use crate::problems::{ProblemKind, TopologyClass};

/// Environment variable naming the default output root.
pub const OUTPUT_ENV: &str = "RLVQC_OUT";
/// Output root used when [`OUTPUT_ENV`] is unset.
pub const DEFAULT_OUTPUT: &str = "rlvqc-out";
/// Problem sizes of the full benchmark grid.
pub const GRID_SIZES: [usize; 3] = [8, 12, 16];

/// The output root: `$RLVQC_OUT` if set, else `rlvqc-out`.
pub fn output_root() -> std::path::PathBuf {
    std::env::var_os(OUTPUT_ENV)
        .map(Into::into)
        .unwrap_or_else(|| DEFAULT_OUTPUT.into())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Qaoa,
    RlvqcGlobal,
    RlvqcBlock,
}

impl Method {
    pub const ALL: [Method; 3] = [Method::RlvqcGlobal, Method::RlvqcBlock, Method::Qaoa];

    pub fn key(self) -> &'static str {
        match self {
            Method::Qaoa => "qaoa",
            Method::RlvqcGlobal => "rlvqc_global",
            Method::RlvqcBlock => "rlvqc_block",
        }
    }

    pub fn env_mode(self) -> Option<EnvMode> {
        match self {
            Method::Qaoa => None,
            Method::RlvqcGlobal => Some(EnvMode::Global),
            Method::RlvqcBlock => Some(EnvMode::Block),
        }
    }

    /// PPO defaults of the method; `None` for QAOA.
    pub fn default_ppo(self) -> Option<PpoConfig> {
        match self.env_mode()? {
            EnvMode::Global => Some(PpoConfig::global()),
            EnvMode::Block => Some(PpoConfig::block()),
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.key())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.key() == s)
            .ok_or_else(|| Error::Config(format!("unknown method `{s}`")))
    }
}

/// Identifies one QUBO instance of the grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct InstanceId {
    pub problem: ProblemKind,
    pub topology: TopologyClass,
    pub n: usize,
}

impl fmt::Display for InstanceId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}_{}_n{}", self.problem, self.topology, self.n)
    }
}

/// One experiment: a method over a selection of instances and seeds.
///
/// Every field has a default, so a config file only lists overrides:
///
/// ```toml
/// method = "rlvqc_block"
/// problems = ["maxclique"]
/// topologies = ["2d-grid-4", "star"]
/// sizes = [8]
/// seeds = [0, 1, 2]
///
/// [ppo]          # omitted: the method's defaults
/// total_steps = 250
///
/// [env]
/// n_runs = 1000
///
/// [qaoa]
/// max_evals = 1000
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub method: Method,
    pub problems: Vec<ProblemKind>,
    pub topologies: Vec<TopologyClass>,
    pub sizes: Vec<usize>,
    pub seeds: Vec<u64>,
    /// PPO settings; `None` uses the method's defaults.
    pub ppo: Option<PpoConfig>,
    pub env: EnvConfig,
    pub qaoa: QaoaConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            method: Method::RlvqcBlock,
            problems: ProblemKind::ALL.to_vec(),
            topologies: TopologyClass::ALL.to_vec(),
            sizes: vec![8],
            seeds: (0..5).collect(),
            ppo: None,
            env: EnvConfig::default(),
            qaoa: QaoaConfig::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        if !path.exists() {
            return Err(Error::MissingFile(path.to_path_buf()));
        }
        Self::from_toml(&std::fs::read_to_string(path)?)
    }

    /// TOML text with every field resolved.
    pub fn to_toml(&self) -> String {
        toml::to_string(&self.resolved()).expect("config is serializable")
    }

    /// The same config with method defaults filled in.
    pub fn resolved(&self) -> Self {
        let mut c = self.clone();
        if c.ppo.is_none() {
            c.ppo = c.method.default_ppo();
        }
        c
    }

    pub fn ppo_config(&self) -> Option<PpoConfig> {
        self.ppo.clone().or_else(|| self.method.default_ppo())
    }

    pub fn validate(&self) -> Result<()> {
        if self.problems.is_empty() || self.topologies.is_empty() || self.sizes.is_empty() {
            return Err(Error::Config("empty instance selection".into()));
        }
        if self.seeds.is_empty() {
            return Err(Error::Config("no seeds".into()));
        }
        if let Some(&n) = self.sizes.iter().find(|&&n| n < 2) {
            return Err(Error::Config(format!("size {n} too small")));
        }
        self.env.validate()?;
        self.qaoa.validate()?;
        if let Some(ppo) = self.ppo_config() {
            ppo.validate()?;
        }
        Ok(())
    }

    /// Instances in selection order: problem, then topology, then size.
    pub fn instances(&self) -> Vec<InstanceId> {
        let mut out = vec![];
        for &problem in &self.problems {
            for &topology in &self.topologies {
                for &n in &self.sizes {
                    out.push(InstanceId { problem, topology, n });
                }
            }
        }
        out
    }
}
