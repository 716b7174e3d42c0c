use num_complex::Complex64;

use super::gate::{Axis, GateKind};
use crate::error::{Error, Result};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Amplitudes over the `2^n` computational basis states.
///
/// Basis index `i` holds qubit `k` in bit `k` (little-endian), so qubit 0
/// is the least significant bit.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    n_qubits: usize,
    amplitudes: Vec<Complex64>,
}

impl StateVector {
    /// `|0...0>` on `n_qubits` qubits.
    pub fn zero(n_qubits: usize) -> Self {
        let mut amplitudes = vec![ZERO; 1 << n_qubits];
        amplitudes[0] = ONE;
        StateVector {
            n_qubits,
            amplitudes,
        }
    }

    /// Wraps raw amplitudes. Panics if the length is not a power of two.
    pub fn from_amplitudes(amplitudes: Vec<Complex64>) -> Self {
        assert!(amplitudes.len().is_power_of_two(), "length must be 2^n");
        StateVector {
            n_qubits: amplitudes.len().trailing_zeros() as usize,
            amplitudes,
        }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|a| a.norm_sqr()).collect()
    }

    fn check(&self, kind: GateKind, qubits: &[usize]) -> Result<()> {
        for &q in &qubits[..kind.arity()] {
            if q >= self.n_qubits {
                return Err(Error::QubitOutOfRange {
                    qubit: q,
                    n_qubits: self.n_qubits,
                });
            }
        }
        if kind.arity() == 2 && qubits[0] == qubits[1] {
            return Err(Error::DuplicateQubits(qubits[0]));
        }
        Ok(())
    }

    /// Applies `kind` on `qubits` in place. `theta` is ignored for `H` and `Cx`.
    pub fn apply(&mut self, kind: GateKind, qubits: &[usize], theta: f64) -> Result<()> {
        self.check(kind, qubits)?;
        let half = 0.5 * theta;
        let (s, c) = half.sin_cos();
        match kind {
            GateKind::H => {
                let r = std::f64::consts::FRAC_1_SQRT_2;
                self.apply_1q(qubits[0], [[r.into(), r.into()], [r.into(), (-r).into()]]);
            }
            GateKind::Rx => {
                let m = Complex64::new(0.0, -s);
                self.apply_1q(qubits[0], [[c.into(), m], [m, c.into()]]);
            }
            GateKind::Ry => {
                self.apply_1q(qubits[0], [[c.into(), (-s).into()], [s.into(), c.into()]]);
            }
            GateKind::Rz => {
                let bit = 1 << qubits[0];
                let p0 = Complex64::new(c, -s);
                let p1 = Complex64::new(c, s);
                for (i, a) in self.amplitudes.iter_mut().enumerate() {
                    *a *= if i & bit == 0 { p0 } else { p1 };
                }
            }
            GateKind::Rzz => self.apply_zz(qubits[0], qubits[1], c, s),
            GateKind::Rab(a, b) => self.apply_pauli_rotation(a, b, qubits[0], qubits[1], c, s),
            GateKind::Cx => {
                let cb = 1 << qubits[0];
                let tb = 1 << qubits[1];
                for i in 0..self.amplitudes.len() {
                    if i & cb != 0 && i & tb == 0 {
                        self.amplitudes.swap(i, i | tb);
                    }
                }
            }
        }
        Ok(())
    }

    /// Stride-indexed 2x2 update on qubit `q`; `m` is row-major.
    fn apply_1q(&mut self, q: usize, m: [[Complex64; 2]; 2]) {
        let stride = 1 << q;
        let len = self.amplitudes.len();
        let mut base = 0;
        while base < len {
            for i in base..base + stride {
                let a0 = self.amplitudes[i];
                let a1 = self.amplitudes[i + stride];
                self.amplitudes[i] = m[0][0] * a0 + m[0][1] * a1;
                self.amplitudes[i + stride] = m[1][0] * a0 + m[1][1] * a1;
            }
            base += 2 * stride;
        }
    }

    fn apply_zz(&mut self, q0: usize, q1: usize, c: f64, s: f64) {
        let even = Complex64::new(c, -s);
        let odd = Complex64::new(c, s);
        for (i, a) in self.amplitudes.iter_mut().enumerate() {
            let parity = ((i >> q0) ^ (i >> q1)) & 1;
            *a *= if parity == 0 { even } else { odd };
        }
    }

    /// `exp(-i θ/2 σ_a⊗σ_b) = cos(θ/2) I - i sin(θ/2) σ_a⊗σ_b`, using the
    /// fact that a Pauli string maps each basis state to a phased basis state.
    fn apply_pauli_rotation(&mut self, a: Axis, b: Axis, q0: usize, q1: usize, c: f64, s: f64) {
        if a == Axis::Z && b == Axis::Z {
            self.apply_zz(q0, q1, c, s);
            return;
        }
        let flips = |axis: Axis| axis != Axis::Z;
        let mask = (usize::from(flips(a)) << q0) | (usize::from(flips(b)) << q1);
        // Phase picked up by |i> under σ_a⊗σ_b.
        let phase = |i: usize| -> Complex64 {
            pauli_phase(a, (i >> q0) & 1) * pauli_phase(b, (i >> q1) & 1)
        };
        let cc = Complex64::new(c, 0.0);
        let ms = Complex64::new(0.0, -s);
        for i in 0..self.amplitudes.len() {
            let j = i ^ mask;
            if j < i {
                continue;
            }
            let ai = self.amplitudes[i];
            let aj = self.amplitudes[j];
            // P|i> = phase(i)|j>, P|j> = phase(j)|i>
            self.amplitudes[i] = cc * ai + ms * phase(j) * aj;
            self.amplitudes[j] = cc * aj + ms * phase(i) * ai;
        }
    }
}

/// Phase of `σ_axis |bit>` relative to the flipped (or unflipped) basis state.
fn pauli_phase(axis: Axis, bit: usize) -> Complex64 {
    match (axis, bit) {
        (Axis::X, _) => ONE,
        (Axis::Y, 0) => Complex64::new(0.0, 1.0),
        (Axis::Y, _) => Complex64::new(0.0, -1.0),
        (Axis::Z, 0) => ONE,
        (Axis::Z, _) => -ONE,
    }
}
