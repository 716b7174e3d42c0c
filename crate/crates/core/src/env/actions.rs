use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sim::{Axis, GateKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EnvMode {
    /// Gates on any qubit or qubit pair of the full register.
    Global,
    /// Gates inside a 2-qubit block that is replicated on every interacting pair.
    Block,
}

/// One entry of the action set. For [`EnvMode::Global`] `qubits` are
/// register indices; for [`EnvMode::Block`] they are block roles (0 or 1).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ActionDesc {
    pub kind: GateKind,
    pub qubits: [usize; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActionSpace {
    pub mode: EnvMode,
    pub n_qubits: usize,
    pub interacting_pairs: Vec<(usize, usize)>,
    pub actions: Vec<ActionDesc>,
}

impl ActionSpace {
    /// Single-qubit rotations ordered by axis then qubit, followed by
    /// two-qubit `R_ab` ordered by axis pair then pair index.
    pub fn enumerate(
        mode: EnvMode,
        n_qubits: usize,
        interacting_pairs: &[(usize, usize)],
    ) -> Result<ActionSpace> {
        let width = match mode {
            EnvMode::Global => {
                if n_qubits < 2 {
                    return Err(Error::InvalidActionSpace(format!(
                        "global mode needs at least 2 qubits, got {n_qubits}"
                    )));
                }
                n_qubits
            }
            EnvMode::Block => {
                if interacting_pairs.is_empty() {
                    return Err(Error::InvalidActionSpace(
                        "block mode needs at least one interacting pair".into(),
                    ));
                }
                2
            }
        };
        let mut actions = Vec::new();
        for axis in Axis::ALL {
            for q in 0..width {
                actions.push(ActionDesc {
                    kind: GateKind::rotation(axis),
                    qubits: [q, q],
                });
            }
        }
        let pairs: Vec<(usize, usize)> = (0..width)
            .flat_map(|i| (i + 1..width).map(move |j| (i, j)))
            .collect();
        for a in Axis::ALL {
            for b in Axis::ALL {
                for &(i, j) in &pairs {
                    actions.push(ActionDesc {
                        kind: GateKind::Rab(a, b),
                        qubits: [i, j],
                    });
                }
            }
        }
        Ok(ActionSpace {
            mode,
            n_qubits,
            interacting_pairs: interacting_pairs.to_vec(),
            actions,
        })
    }

    pub fn len(&self) -> usize {
        self.actions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.actions.is_empty()
    }

    pub fn get(&self, action: usize) -> Result<ActionDesc> {
        self.actions
            .get(action)
            .copied()
            .ok_or(Error::ActionOutOfRange {
                action,
                len: self.actions.len(),
            })
    }
}
