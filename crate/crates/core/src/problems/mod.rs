//! Graph instances, QUBO encodings, spin conversion and exact oracles.

mod graph;
mod qubo;

pub use graph::{generate_graph, Graph, GraphSpec, Topology, TopologyClass, SEED_SEARCH_BOUND};
pub use qubo::{
    build_qubo, default_penalty, is_feasible, maxclique_qubo, maxcut_qubo, mvc_qubo, Extrema,
    IsingHamiltonian, ProblemKind, QuboInstance, BRUTE_FORCE_LIMIT,
};
