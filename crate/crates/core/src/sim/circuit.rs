use std::collections::BTreeMap;
use std::fmt::Write as _;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::gate::{Angle, GateInstance, GateKind};
use super::state::StateVector;
use crate::error::{parse_err, Error, Result};

/// Ordered gate list over `n_qubits` with a shared parameter vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Circuit {
    pub n_qubits: usize,
    pub gates: Vec<GateInstance>,
    /// Rotation angles in radians, one per parameter slot.
    pub params: Vec<f64>,
}

impl Circuit {
    pub fn new(n_qubits: usize) -> Self {
        Circuit {
            n_qubits,
            gates: Vec::new(),
            params: Vec::new(),
        }
    }

    /// A single layer of Hadamards on every qubit.
    pub fn hadamard_layer(n_qubits: usize) -> Self {
        let mut c = Circuit::new(n_qubits);
        c.gates.extend((0..n_qubits).map(GateInstance::h));
        c
    }

    /// Appends a fresh parameter initialised to `value`, returning its slot.
    pub fn push_param(&mut self, value: f64) -> usize {
        self.params.push(value);
        self.params.len() - 1
    }

    /// Appends `kind` on `qubits` with a new parameter at θ = 0. Returns the slot.
    pub fn push_rotation(&mut self, kind: GateKind, qubits: [usize; 2]) -> usize {
        let slot = self.push_param(0.0);
        self.gates.push(GateInstance {
            kind,
            qubits,
            angle: Some(Angle::slot(slot)),
        });
        slot
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    /// Checks qubit indices and parameter references.
    pub fn validate(&self) -> Result<()> {
        for g in &self.gates {
            for &q in g.targets() {
                if q >= self.n_qubits {
                    return Err(Error::QubitOutOfRange {
                        qubit: q,
                        n_qubits: self.n_qubits,
                    });
                }
            }
            if g.kind.arity() == 2 && g.qubits[0] == g.qubits[1] {
                return Err(Error::DuplicateQubits(g.qubits[0]));
            }
            if let Some(slot) = g.param_slot() {
                if slot >= self.params.len() {
                    return Err(Error::ParamSlotOutOfRange {
                        slot,
                        len: self.params.len(),
                    });
                }
            }
        }
        Ok(())
    }

    /// Runs the circuit from `|0...0>` with the stored parameters.
    pub fn simulate(&self) -> Result<StateVector> {
        self.simulate_with(&self.params)
    }

    /// Runs the circuit with `params` substituted for the stored ones.
    pub fn simulate_with(&self, params: &[f64]) -> Result<StateVector> {
        let mut state = StateVector::zero(self.n_qubits);
        for g in &self.gates {
            if let Some(slot) = g.param_slot() {
                if slot >= params.len() {
                    return Err(Error::ParamSlotOutOfRange {
                        slot,
                        len: params.len(),
                    });
                }
            }
            state.apply(g.kind, &g.qubits, g.theta(params))?;
        }
        Ok(state)
    }

    /// `|c_i|^2` for every basis index.
    pub fn exact_probabilities(&self) -> Result<Vec<f64>> {
        Ok(self.simulate()?.probabilities())
    }

    /// Samples `n_runs` measurements in the computational basis.
    pub fn run_shots<R: Rng + ?Sized>(&self, n_runs: usize, rng: &mut R) -> Result<Histogram> {
        let probs = self.exact_probabilities()?;
        Histogram::sample(&probs, n_runs, rng)
    }

    /// Line-oriented text form: a `circuit <n_qubits> <n_params>` header, one
    /// `param <slot> <value>` line per parameter, then one line per gate:
    /// kind, qubit indices, the resolved angle, and its source (`@slot*scale`
    /// or `fixed`). Floats use the shortest round-trip representation.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        writeln!(out, "circuit {} {}", self.n_qubits, self.params.len()).unwrap();
        for (i, p) in self.params.iter().enumerate() {
            writeln!(out, "param {i} {p:?}").unwrap();
        }
        for g in &self.gates {
            write!(out, "{}", g.kind).unwrap();
            for q in g.targets() {
                write!(out, " {q}").unwrap();
            }
            match g.angle {
                None => {}
                Some(Angle::Fixed(v)) => write!(out, " {v:?} fixed").unwrap(),
                Some(a @ Angle::Param { slot, scale }) => {
                    write!(out, " {:?} @{slot}*{scale:?}", a.resolve(&self.params)).unwrap()
                }
            }
            out.push('\n');
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Circuit> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
        let (ln, header) = lines.next().ok_or_else(|| parse_err(1, "empty input"))?;
        let h: Vec<&str> = header.split_whitespace().collect();
        if h.len() != 3 || h[0] != "circuit" {
            return Err(parse_err(ln, "expected `circuit <n_qubits> <n_params>`"));
        }
        let n_qubits = parse_num::<usize>(h[1], ln)?;
        let n_params = parse_num::<usize>(h[2], ln)?;
        let mut circuit = Circuit::new(n_qubits);
        for (ln, line) in lines {
            let tok: Vec<&str> = line.split_whitespace().collect();
            if tok[0] == "param" {
                if tok.len() != 3 {
                    return Err(parse_err(ln, "expected `param <slot> <value>`"));
                }
                let slot = parse_num::<usize>(tok[1], ln)?;
                if slot != circuit.params.len() {
                    return Err(parse_err(ln, "parameters must be listed in slot order"));
                }
                circuit.params.push(parse_num::<f64>(tok[2], ln)?);
                continue;
            }
            let kind: GateKind = tok[0].parse().map_err(|e: String| parse_err(ln, e))?;
            let arity = kind.arity();
            let expected = 1 + arity + if kind.is_parameterized() { 2 } else { 0 };
            if tok.len() != expected {
                return Err(parse_err(ln, format!("expected {expected} fields for `{kind}`")));
            }
            let mut qubits = [0usize; 2];
            for k in 0..arity {
                qubits[k] = parse_num(tok[1 + k], ln)?;
            }
            if arity == 1 {
                qubits[1] = qubits[0];
            }
            let angle = if kind.is_parameterized() {
                let value: f64 = parse_num(tok[1 + arity], ln)?;
                let src = tok[2 + arity];
                Some(if src == "fixed" {
                    Angle::Fixed(value)
                } else {
                    let (slot, scale) = src
                        .strip_prefix('@')
                        .and_then(|s| s.split_once('*'))
                        .ok_or_else(|| parse_err(ln, "expected `fixed` or `@slot*scale`"))?;
                    Angle::Param {
                        slot: parse_num(slot, ln)?,
                        scale: parse_num(scale, ln)?,
                    }
                })
            } else {
                None
            };
            circuit.gates.push(GateInstance {
                kind,
                qubits,
                angle,
            });
        }
        if circuit.params.len() != n_params {
            return Err(parse_err(ln, "parameter count does not match header"));
        }
        circuit.validate()?;
        Ok(circuit)
    }
}

fn parse_num<T: std::str::FromStr>(s: &str, line: usize) -> Result<T> {
    s.parse()
        .map_err(|_| parse_err(line, format!("invalid number `{s}`")))
}

/// Measurement counts indexed by basis state.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Histogram {
    pub n_qubits: usize,
    pub counts: Vec<u64>,
    pub shots: u64,
}

impl Histogram {
    /// Draws `n_runs` samples from `probs` by inverse-CDF lookup.
    pub fn sample<R: Rng + ?Sized>(probs: &[f64], n_runs: usize, rng: &mut R) -> Result<Histogram> {
        if n_runs == 0 {
            return Err(Error::ZeroShots);
        }
        let mut cdf = Vec::with_capacity(probs.len());
        let mut acc = 0.0;
        for p in probs {
            acc += p;
            cdf.push(acc);
        }
        let total = acc;
        let mut counts = vec![0u64; probs.len()];
        for _ in 0..n_runs {
            let u = rng.gen::<f64>() * total;
            let mut idx = cdf.partition_point(|&c| c <= u);
            // Guard against rounding at the top of the CDF and zero-probability tails.
            if idx >= probs.len() {
                idx = probs.len() - 1;
            }
            while probs[idx] == 0.0 && idx > 0 {
                idx -= 1;
            }
            counts[idx] += 1;
        }
        Ok(Histogram {
            n_qubits: probs.len().trailing_zeros() as usize,
            counts,
            shots: n_runs as u64,
        })
    }

    /// Empirical frequencies `n_i / n_runs`.
    pub fn frequencies(&self) -> Vec<f64> {
        let n = self.shots as f64;
        self.counts.iter().map(|&c| c as f64 / n).collect()
    }

    /// Non-zero counts keyed by bitstring (see [`bitstring`]).
    pub fn to_map(&self) -> BTreeMap<String, u64> {
        self.counts
            .iter()
            .enumerate()
            .filter(|(_, &c)| c > 0)
            .map(|(i, &c)| (bitstring(i, self.n_qubits), c))
            .collect()
    }
}

/// Renders basis index `index` as a bitstring with qubit `n-1` first and
/// qubit 0 last, i.e. the ordinary binary representation of the index.
pub fn bitstring(index: usize, n_qubits: usize) -> String {
    format!("{index:0width$b}", width = n_qubits)
}

/// Inverse of [`bitstring`].
pub fn parse_bitstring(s: &str) -> Option<usize> {
    if s.is_empty() || !s.bytes().all(|b| b == b'0' || b == b'1') {
        return None;
    }
    usize::from_str_radix(s, 2).ok()
}

#[cfg(test)]
mod tests {
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    use super::*;
    use crate::sim::gate::Axis;

    #[test]
    fn empty_circuit_all_shots_on_zero() {
        let c = Circuit::new(2);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let h = c.run_shots(100, &mut rng).unwrap();
        assert_eq!(h.to_map(), BTreeMap::from([("00".to_string(), 100)]));
    }

    #[test]
    fn zero_shots_is_error() {
        let c = Circuit::new(1);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert!(matches!(c.run_shots(0, &mut rng), Err(Error::ZeroShots)));
    }

    #[test]
    fn hadamard_shots_within_five_sigma() {
        let c = Circuit::hadamard_layer(1);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let h = c.run_shots(10_000, &mut rng).unwrap();
        let f0 = h.frequencies()[0];
        assert!((0.45..=0.55).contains(&f0), "{f0}");
    }

    #[test]
    fn shots_are_seed_deterministic() {
        let mut c = Circuit::hadamard_layer(3);
        c.push_rotation(GateKind::Rab(Axis::X, Axis::Y), [0, 2]);
        c.params[0] = 0.7;
        let a = c.run_shots(500, &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
        let b = c.run_shots(500, &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn exact_probabilities_examples() {
        let p = Circuit::hadamard_layer(2).exact_probabilities().unwrap();
        for x in p {
            assert!((x - 0.25).abs() < 1e-12);
        }
        assert_eq!(Circuit::new(1).exact_probabilities().unwrap(), vec![1.0, 0.0]);
        let mut c = Circuit::new(2);
        c.push_rotation(GateKind::Rab(Axis::X, Axis::X), [0, 1]);
        c.params[0] = std::f64::consts::PI;
        let p = c.exact_probabilities().unwrap();
        assert!(p[..3].iter().all(|&x| x < 1e-24));
        assert!((p[3] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn text_round_trip_is_exact() {
        let mut c = Circuit::hadamard_layer(3);
        let s = c.push_rotation(GateKind::Ry, [1, 1]);
        c.params[s] = 0.1 + 0.2;
        c.push_rotation(GateKind::Rab(Axis::Y, Axis::Z), [0, 2]);
        c.params[1] = -1.0e-17;
        c.gates.push(GateInstance::cx(2, 0));
        c.gates.push(GateInstance::single(
            GateKind::Rx,
            1,
            Angle::Fixed(std::f64::consts::FRAC_PI_2),
        ));
        c.gates.push(GateInstance::double(
            GateKind::Rzz,
            0,
            1,
            Angle::Param { slot: 0, scale: -2.5 },
        ));
        let text = c.to_text();
        let back = Circuit::from_text(&text).unwrap();
        assert_eq!(back, c);
        assert_eq!(back.to_text(), text);
    }

    #[test]
    fn from_text_rejects_bad_input() {
        assert!(Circuit::from_text("").is_err());
        assert!(Circuit::from_text("circuit 2 0\nrx 5 0.0 @0*1.0\n").is_err());
        assert!(Circuit::from_text("circuit 2 1\nparam 0 0.5\nfoo 0\n").is_err());
        assert!(Circuit::from_text("circuit 2 2\nparam 0 0.5\n").is_err());
    }

    #[test]
    fn bitstring_convention() {
        assert_eq!(bitstring(1, 2), "01");
        assert_eq!(bitstring(6, 4), "0110");
        assert_eq!(parse_bitstring("0110"), Some(6));
        assert_eq!(parse_bitstring("01a"), None);
    }
}
