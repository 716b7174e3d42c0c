use std::f64::consts::FRAC_PI_2;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// Pauli axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub const ALL: [Axis; 3] = [Axis::X, Axis::Y, Axis::Z];

    pub fn as_char(self) -> char {
        match self {
            Axis::X => 'x',
            Axis::Y => 'y',
            Axis::Z => 'z',
        }
    }

    pub fn from_char(c: char) -> Option<Axis> {
        match c {
            'x' => Some(Axis::X),
            'y' => Some(Axis::Y),
            'z' => Some(Axis::Z),
            _ => None,
        }
    }
}

/// Gate kinds understood by the simulator.
///
/// Rotations follow `R_a(θ) = exp(-i θ/2 σ_a)`; `Rzz` and `Rab` are
/// `exp(-i θ/2 σ_a ⊗ σ_b)` on (first, second) qubit. `Cx` uses the first
/// qubit as control.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum GateKind {
    H,
    Rx,
    Ry,
    Rz,
    Rzz,
    Rab(Axis, Axis),
    Cx,
}

impl GateKind {
    pub fn rotation(axis: Axis) -> GateKind {
        match axis {
            Axis::X => GateKind::Rx,
            Axis::Y => GateKind::Ry,
            Axis::Z => GateKind::Rz,
        }
    }

    pub fn arity(self) -> usize {
        match self {
            GateKind::H | GateKind::Rx | GateKind::Ry | GateKind::Rz => 1,
            GateKind::Rzz | GateKind::Rab(..) | GateKind::Cx => 2,
        }
    }

    pub fn is_parameterized(self) -> bool {
        !matches!(self, GateKind::H | GateKind::Cx)
    }
}

impl fmt::Display for GateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GateKind::H => f.write_str("h"),
            GateKind::Rx => f.write_str("rx"),
            GateKind::Ry => f.write_str("ry"),
            GateKind::Rz => f.write_str("rz"),
            GateKind::Rzz => f.write_str("rzz"),
            GateKind::Rab(a, b) => write!(f, "rab_{}{}", a.as_char(), b.as_char()),
            GateKind::Cx => f.write_str("cx"),
        }
    }
}

impl FromStr for GateKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "h" => GateKind::H,
            "rx" => GateKind::Rx,
            "ry" => GateKind::Ry,
            "rz" => GateKind::Rz,
            "rzz" => GateKind::Rzz,
            "cx" => GateKind::Cx,
            _ => {
                let axes = s.strip_prefix("rab_").map(|t| {
                    let mut chars = t.chars().map(Axis::from_char);
                    (chars.next(), chars.next(), chars.next())
                });
                match axes {
                    Some((Some(Some(a)), Some(Some(b)), None)) => GateKind::Rab(a, b),
                    _ => return Err(format!("unknown gate kind `{s}`")),
                }
            }
        })
    }
}

/// Where a gate's rotation angle comes from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Angle {
    /// Constant angle, used for basis changes produced by decompositions.
    Fixed(f64),
    /// `scale * params[slot]` of the owning circuit.
    Param { slot: usize, scale: f64 },
}

impl Angle {
    pub fn slot(slot: usize) -> Angle {
        Angle::Param { slot, scale: 1.0 }
    }

    pub fn resolve(self, params: &[f64]) -> f64 {
        match self {
            Angle::Fixed(v) => v,
            Angle::Param { slot, scale } => scale * params[slot],
        }
    }
}

/// One gate placed on concrete qubits.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GateInstance {
    pub kind: GateKind,
    /// Target qubits; only the first `kind.arity()` entries are meaningful.
    pub qubits: [usize; 2],
    pub angle: Option<Angle>,
}

impl GateInstance {
    pub fn h(q: usize) -> Self {
        Self::fixed_free(GateKind::H, [q, q])
    }

    pub fn cx(control: usize, target: usize) -> Self {
        Self::fixed_free(GateKind::Cx, [control, target])
    }

    fn fixed_free(kind: GateKind, qubits: [usize; 2]) -> Self {
        GateInstance {
            kind,
            qubits,
            angle: None,
        }
    }

    pub fn single(kind: GateKind, q: usize, angle: Angle) -> Self {
        debug_assert_eq!(kind.arity(), 1);
        GateInstance {
            kind,
            qubits: [q, q],
            angle: Some(angle),
        }
    }

    pub fn double(kind: GateKind, q0: usize, q1: usize, angle: Angle) -> Self {
        debug_assert_eq!(kind.arity(), 2);
        GateInstance {
            kind,
            qubits: [q0, q1],
            angle: Some(angle),
        }
    }

    pub fn targets(&self) -> &[usize] {
        &self.qubits[..self.kind.arity()]
    }

    pub fn param_slot(&self) -> Option<usize> {
        match self.angle {
            Some(Angle::Param { slot, .. }) => Some(slot),
            _ => None,
        }
    }

    pub fn theta(&self, params: &[f64]) -> f64 {
        self.angle.map_or(0.0, |a| a.resolve(params))
    }
}

/// Basis change that maps `axis` onto the z-axis: `U_x = H`, `U_y = Rx(π/2)`,
/// `U_z = I` (returned as `None`). The second element is the inverse.
fn basis_change(axis: Axis, q: usize) -> Option<(GateInstance, GateInstance)> {
    match axis {
        Axis::X => Some((GateInstance::h(q), GateInstance::h(q))),
        Axis::Y => Some((
            GateInstance::single(GateKind::Rx, q, Angle::Fixed(FRAC_PI_2)),
            GateInstance::single(GateKind::Rx, q, Angle::Fixed(-FRAC_PI_2)),
        )),
        Axis::Z => None,
    }
}

/// Rewrites `R_ab(θ)` on `(q0, q1)` as `(U_a ⊗ U_b)`, `Rzz(θ)`, `(U_a† ⊗ U_b†)`.
/// `U_a` acts on `q0`, `U_b` on `q1`; identity basis changes are omitted.
pub fn decompose_rab(a: Axis, b: Axis, q0: usize, q1: usize, angle: Angle) -> Vec<GateInstance> {
    let ua = basis_change(a, q0);
    let ub = basis_change(b, q1);
    let mut out = Vec::with_capacity(5);
    out.extend(ua.map(|(u, _)| u));
    out.extend(ub.map(|(u, _)| u));
    out.push(GateInstance::double(GateKind::Rzz, q0, q1, angle));
    out.extend(ua.map(|(_, u)| u));
    out.extend(ub.map(|(_, u)| u));
    out
}
