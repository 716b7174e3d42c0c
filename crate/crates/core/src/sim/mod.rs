//! Statevector simulation of parameterized circuits.

mod circuit;
mod gate;
mod metrics;
mod state;

pub use circuit::{bitstring, parse_bitstring, Circuit, Histogram};
pub use gate::{decompose_rab, Angle, Axis, GateInstance, GateKind};
pub use metrics::{circuit_depth, expand_rab, gate_census, rzz_as_cx, BasisGate};
pub use state::StateVector;

/// Applies one gate to `state`, returning the new state.
pub fn apply_gate(mut state: StateVector, gate: &GateInstance, theta: f64) -> crate::Result<StateVector> {
    state.apply(gate.kind, &gate.qubits, theta)?;
    Ok(state)
}
