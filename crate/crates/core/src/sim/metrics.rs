use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::circuit::Circuit;
use super::gate::{decompose_rab, Angle, GateInstance, GateKind};

/// Gate types of the census basis `{H, Rx, Ry, Rz, CX}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum BasisGate {
    H,
    Rx,
    Ry,
    Rz,
    Cx,
}

impl BasisGate {
    pub const ALL: [BasisGate; 5] = [
        BasisGate::H,
        BasisGate::Rx,
        BasisGate::Ry,
        BasisGate::Rz,
        BasisGate::Cx,
    ];

    pub fn name(self) -> &'static str {
        match self {
            BasisGate::H => "H",
            BasisGate::Rx => "Rx",
            BasisGate::Ry => "Ry",
            BasisGate::Rz => "Rz",
            BasisGate::Cx => "CX",
        }
    }
}

/// Rewrites every `Rab` into its basis-change form, leaving `Rzz` native.
pub fn expand_rab(gates: &[GateInstance]) -> Vec<GateInstance> {
    let mut out = Vec::with_capacity(gates.len());
    for g in gates {
        match g.kind {
            GateKind::Rab(a, b) => out.extend(decompose_rab(
                a,
                b,
                g.qubits[0],
                g.qubits[1],
                g.angle.unwrap_or(Angle::Fixed(0.0)),
            )),
            _ => out.push(*g),
        }
    }
    out
}

/// Longest path through the gate dependency DAG, counted over the basis
/// `{H, Rx, Ry, Rz, Rzz}` (each `Rab` expanded, each `CX` one gate).
pub fn circuit_depth(circuit: &Circuit) -> usize {
    let mut level = vec![0usize; circuit.n_qubits];
    let mut depth = 0;
    for g in expand_rab(&circuit.gates) {
        let t = g.targets();
        let l = t.iter().map(|&q| level[q]).max().unwrap_or(0) + 1;
        for &q in t {
            level[q] = l;
        }
        depth = depth.max(l);
    }
    depth
}

/// Per-type counts in the basis `{H, Rx, Ry, Rz, CX}` after rewriting
/// `Rab` and then `Rzz -> CX, Rz, CX`. No simplification is applied.
pub fn gate_census(circuit: &Circuit) -> BTreeMap<BasisGate, usize> {
    let mut census = BTreeMap::new();
    let mut bump = |g: BasisGate, k: usize| *census.entry(g).or_insert(0) += k;
    for g in expand_rab(&circuit.gates) {
        match g.kind {
            GateKind::H => bump(BasisGate::H, 1),
            GateKind::Rx => bump(BasisGate::Rx, 1),
            GateKind::Ry => bump(BasisGate::Ry, 1),
            GateKind::Rz => bump(BasisGate::Rz, 1),
            GateKind::Cx => bump(BasisGate::Cx, 1),
            GateKind::Rzz => {
                bump(BasisGate::Cx, 2);
                bump(BasisGate::Rz, 1);
            }
            GateKind::Rab(..) => unreachable!("expanded above"),
        }
    }
    census
}

/// The `CX, Rz(θ) on target, CX` form of `Rzz(θ)` on `(q0, q1)`.
pub fn rzz_as_cx(q0: usize, q1: usize, angle: Angle) -> [GateInstance; 3] {
    [
        GateInstance::cx(q0, q1),
        GateInstance::single(GateKind::Rz, q1, angle),
        GateInstance::cx(q0, q1),
    ]
}
