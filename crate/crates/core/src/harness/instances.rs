use std::fs;
use std::path::{Path, PathBuf};

use super::config::{InstanceId, GRID_SIZES};
use crate::error::{Error, Result};
use crate::problems::{build_qubo, generate_graph, Graph, ProblemKind, QuboInstance, TopologyClass};

pub fn graph_path(dir: &Path, topology: TopologyClass, n: usize) -> PathBuf {
    dir.join("graphs").join(format!("{topology}_n{n}.txt"))
}

pub fn qubo_path(dir: &Path, id: InstanceId) -> PathBuf {
    dir.join("qubo").join(format!("{id}.txt"))
}

/// The deterministic graph of a topology class and size.
pub fn grid_graph(topology: TopologyClass, n: usize) -> Result<Graph> {
    Ok(generate_graph(&topology.spec(n))?.0)
}

/// Builds an instance in memory, without touching the filesystem.
pub fn build_instance(id: InstanceId) -> Result<QuboInstance> {
    build_qubo(&grid_graph(id.topology, id.n)?, id.problem)
}

/// Reads an instance written by [`gen_instances`].
pub fn load_instance(dir: &Path, id: InstanceId) -> Result<QuboInstance> {
    let path = qubo_path(dir, id);
    if !path.exists() {
        return Err(Error::MissingFile(path));
    }
    QuboInstance::from_text(&fs::read_to_string(path)?)
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeneratedInstances {
    pub graphs: Vec<PathBuf>,
    pub qubos: Vec<PathBuf>,
}

/// Writes every topology × size graph and its three QUBO encodings.
pub fn gen_instances(dir: &Path) -> Result<GeneratedInstances> {
    fs::create_dir_all(dir.join("graphs"))?;
    fs::create_dir_all(dir.join("qubo"))?;
    let mut out = GeneratedInstances {
        graphs: vec![],
        qubos: vec![],
    };
    for topology in TopologyClass::ALL {
        for n in GRID_SIZES {
            let graph = grid_graph(topology, n)?;
            let path = graph_path(dir, topology, n);
            fs::write(&path, graph.to_text())?;
            out.graphs.push(path);
            for problem in ProblemKind::ALL {
                let id = InstanceId { problem, topology, n };
                let path = qubo_path(dir, id);
                fs::write(&path, build_qubo(&graph, problem)?.to_text())?;
                out.qubos.push(path);
            }
        }
    }
    Ok(out)
}
