use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::graph::Graph;
use crate::error::{parse_err, Error, Result};
use crate::exec::{self, ExecMode};

/// Largest variable count accepted by [`QuboInstance::brute_force_extrema`].
pub const BRUTE_FORCE_LIMIT: usize = 24;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum ProblemKind {
    MaxCut,
    MinVertexCover,
    MaxClique,
}

impl ProblemKind {
    pub const ALL: [ProblemKind; 3] = [
        ProblemKind::MaxCut,
        ProblemKind::MaxClique,
        ProblemKind::MinVertexCover,
    ];

    pub fn key(self) -> &'static str {
        match self {
            ProblemKind::MaxCut => "maxcut",
            ProblemKind::MinVertexCover => "mvc",
            ProblemKind::MaxClique => "maxclique",
        }
    }

    pub fn is_constrained(self) -> bool {
        self != ProblemKind::MaxCut
    }
}

impl fmt::Display for ProblemKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.key())
    }
}

impl From<ProblemKind> for String {
    fn from(p: ProblemKind) -> String {
        p.key().to_string()
    }
}

impl TryFrom<String> for ProblemKind {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl FromStr for ProblemKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ProblemKind::ALL
            .into_iter()
            .find(|p| p.key() == s)
            .ok_or_else(|| Error::Config(format!("unknown problem `{s}`")))
    }
}

/// `E(x) = x^T Q x + offset` over `x ∈ {0,1}^n`, lower is better.
///
/// `q` is dense row-major `n x n` and upper-triangular: the diagonal holds
/// linear coefficients (since `x_i^2 = x_i`), entries above it the pair
/// couplings. `offset` carries constants such as the `P·|E|` term of the
/// vertex-cover penalty.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuboInstance {
    pub n: usize,
    pub q: Vec<f64>,
    pub offset: f64,
    pub problem: ProblemKind,
    pub penalty: f64,
}

/// Exact energy extrema by enumeration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Extrema {
    pub min_energy: f64,
    /// Basis index of the minimiser; ties go to the smallest index.
    pub argmin: usize,
    pub max_energy: f64,
}

impl QuboInstance {
    pub fn zeros(n: usize, problem: ProblemKind, penalty: f64) -> Self {
        QuboInstance {
            n,
            q: vec![0.0; n * n],
            offset: 0.0,
            problem,
            penalty,
        }
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (a, b) = (i.min(j), i.max(j));
        self.q[a * self.n + b]
    }

    /// Adds `v` to the coefficient of `x_i x_j` (or `x_i` when `i == j`).
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        let (a, b) = (i.min(j), i.max(j));
        self.q[a * self.n + b] += v;
    }

    /// Pairs `(i, j)`, `i < j`, with a non-zero coupling, lexicographic.
    pub fn interacting_pairs(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for i in 0..self.n {
            for j in i + 1..self.n {
                if self.get(i, j) != 0.0 {
                    out.push((i, j));
                }
            }
        }
        out
    }

    /// Energy of a basis index; bit `k` of `index` is `x_k`.
    pub fn energy_index(&self, index: usize) -> f64 {
        let n = self.n;
        let mut e = self.offset;
        for i in 0..n {
            if index >> i & 1 == 0 {
                continue;
            }
            let row = &self.q[i * n..(i + 1) * n];
            e += row[i];
            for (j, &v) in row.iter().enumerate().skip(i + 1) {
                if index >> j & 1 == 1 {
                    e += v;
                }
            }
        }
        e
    }

    /// Energy of an explicit assignment `x[k] = x_k`.
    pub fn energy(&self, x: &[bool]) -> Result<f64> {
        if x.len() != self.n {
            return Err(Error::LengthMismatch {
                expected: self.n,
                got: x.len(),
            });
        }
        let index = x
            .iter()
            .enumerate()
            .fold(0usize, |acc, (k, &b)| acc | (usize::from(b) << k));
        Ok(self.energy_index(index))
    }

    /// Energy of a bitstring written qubit `n-1` first (see [`crate::sim::bitstring`]).
    pub fn energy_str(&self, bits: &str) -> Result<f64> {
        if bits.len() != self.n {
            return Err(Error::LengthMismatch {
                expected: self.n,
                got: bits.len(),
            });
        }
        let index = crate::sim::parse_bitstring(bits).ok_or_else(|| parse_err(1, "bad bitstring"))?;
        Ok(self.energy_index(index))
    }

    /// Energies of all `2^n` basis states.
    pub fn energy_table(&self) -> Vec<f64> {
        (0..1usize << self.n).map(|i| self.energy_index(i)).collect()
    }

    /// Exhaustive minimum, argmin and maximum. Splits the enumeration into
    /// independent chunks over the high bits and walks each chunk in
    /// Gray-code order with O(n) incremental updates.
    pub fn brute_force_extrema(&self, mode: ExecMode) -> Result<Extrema> {
        let n = self.n;
        if n > BRUTE_FORCE_LIMIT {
            return Err(Error::TooManyVariables {
                n,
                limit: BRUTE_FORCE_LIMIT,
            });
        }
        let high = n.saturating_sub(12).min(8);
        let low = n - high;
        let chunks = exec::map_range(mode, 1 << high, |c| self.scan_chunk(c << low, low));
        let mut best = chunks[0];
        for c in &chunks[1..] {
            if c.min_energy < best.min_energy {
                best.min_energy = c.min_energy;
                best.argmin = c.argmin;
            }
            best.max_energy = best.max_energy.max(c.max_energy);
        }
        Ok(best)
    }

    fn scan_chunk(&self, base: usize, low: usize) -> Extrema {
        let n = self.n;
        let mut x = base;
        let mut e = self.energy_index(x);
        // field[i] = Q_ii + Σ_{j≠i} Q_ij x_j
        let mut field: Vec<f64> = (0..n)
            .map(|i| {
                self.get(i, i)
                    + (0..n)
                        .filter(|&j| j != i && x >> j & 1 == 1)
                        .map(|j| self.get(i, j))
                        .sum::<f64>()
            })
            .collect();
        let mut best = Extrema {
            min_energy: e,
            argmin: x,
            max_energy: e,
        };
        for step in 1..1usize << low {
            let bit = step.trailing_zeros() as usize;
            let on = x >> bit & 1 == 0;
            e += if on { field[bit] } else { -field[bit] };
            x ^= 1 << bit;
            let sign = if on { 1.0 } else { -1.0 };
            for (j, f) in field.iter_mut().enumerate() {
                if j != bit {
                    *f += sign * self.get(bit, j);
                }
            }
            if e < best.min_energy || (e == best.min_energy && x < best.argmin) {
                best.min_energy = e;
                best.argmin = x;
            }
            best.max_energy = best.max_energy.max(e);
        }
        // Incremental sums drift; report energies recomputed from scratch.
        best.min_energy = self.energy_index(best.argmin);
        best
    }

    /// Spin form under `x_i = (1 - z_i) / 2` (bit 0 ↔ z = +1).
    pub fn to_ising(&self) -> IsingHamiltonian {
        let n = self.n;
        let mut h = vec![0.0; n];
        let mut j = BTreeMap::new();
        let mut c = self.offset;
        for a in 0..n {
            let d = self.get(a, a);
            c += d / 2.0;
            h[a] -= d / 2.0;
            for b in a + 1..n {
                let v = self.get(a, b);
                if v == 0.0 {
                    continue;
                }
                c += v / 4.0;
                h[a] -= v / 4.0;
                h[b] -= v / 4.0;
                j.insert((a, b), v / 4.0);
            }
        }
        IsingHamiltonian { h, j, c }
    }

    /// Sparse triplet text: header `qubo <n> <problem> <penalty> <offset>`,
    /// then `i j value` for every non-zero entry with `i <= j`.
    pub fn to_text(&self) -> String {
        let mut s = format!(
            "qubo {} {} {:?} {:?}\n",
            self.n, self.problem, self.penalty, self.offset
        );
        for i in 0..self.n {
            for j in i..self.n {
                let v = self.get(i, j);
                if v != 0.0 {
                    s.push_str(&format!("{i} {j} {v:?}\n"));
                }
            }
        }
        s
    }

    pub fn from_text(text: &str) -> Result<QuboInstance> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let (_, header) = lines.next().ok_or_else(|| parse_err(1, "empty QUBO file"))?;
        let h: Vec<&str> = header.split_whitespace().collect();
        if h.len() != 5 || h[0] != "qubo" {
            return Err(parse_err(1, "expected `qubo <n> <problem> <penalty> <offset>`"));
        }
        let num = |s: &str, ln: usize| s.parse::<f64>().map_err(|_| parse_err(ln, format!("bad number `{s}`")));
        let n: usize = h[1].parse().map_err(|_| parse_err(1, "bad variable count"))?;
        let mut qubo = QuboInstance::zeros(n, h[2].parse()?, num(h[3], 1)?);
        qubo.offset = num(h[4], 1)?;
        for (i, line) in lines {
            let t: Vec<&str> = line.split_whitespace().collect();
            if t.len() != 3 {
                return Err(parse_err(i + 1, "expected `i j value`"));
            }
            let a: usize = t[0].parse().map_err(|_| parse_err(i + 1, "bad index"))?;
            let b: usize = t[1].parse().map_err(|_| parse_err(i + 1, "bad index"))?;
            if a > b || b >= n {
                return Err(parse_err(i + 1, format!("index pair ({a}, {b}) invalid")));
            }
            qubo.q[a * n + b] = num(t[2], i + 1)?;
        }
        Ok(qubo)
    }
}

/// `H(z) = Σ h_i z_i + Σ J_ij z_i z_j + c` over spins `z_i ∈ {+1, -1}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IsingHamiltonian {
    pub h: Vec<f64>,
    pub j: BTreeMap<(usize, usize), f64>,
    pub c: f64,
}

impl IsingHamiltonian {
    pub fn energy_spins(&self, z: &[i8]) -> f64 {
        let mut e = self.c;
        for (i, &hi) in self.h.iter().enumerate() {
            e += hi * f64::from(z[i]);
        }
        for (&(a, b), &v) in &self.j {
            e += v * f64::from(z[a]) * f64::from(z[b]);
        }
        e
    }

    /// Energy of basis index `index` with `z_k = 1 - 2 x_k`.
    pub fn energy_index(&self, index: usize) -> f64 {
        let z: Vec<i8> = (0..self.h.len())
            .map(|k| if index >> k & 1 == 0 { 1 } else { -1 })
            .collect();
        self.energy_spins(&z)
    }
}

/// `-Σ_{(i,j)∈E} (x_i + x_j - 2 x_i x_j)`: the negated cut size.
pub fn maxcut_qubo(graph: &Graph) -> QuboInstance {
    let mut q = QuboInstance::zeros(graph.n, ProblemKind::MaxCut, 0.0);
    for &(i, j) in &graph.edges {
        q.add(i, i, -1.0);
        q.add(j, j, -1.0);
        q.add(i, j, 2.0);
    }
    q
}

/// `Σ x_i + P Σ_{(i,j)∈E} (1 - x_i - x_j + x_i x_j)`.
pub fn mvc_qubo(graph: &Graph, penalty: f64) -> Result<QuboInstance> {
    if penalty.is_nan() || penalty <= 0.0 {
        return Err(Error::NonPositivePenalty(penalty));
    }
    let mut q = QuboInstance::zeros(graph.n, ProblemKind::MinVertexCover, penalty);
    for i in 0..graph.n {
        q.add(i, i, 1.0);
    }
    for &(i, j) in &graph.edges {
        q.offset += penalty;
        q.add(i, i, -penalty);
        q.add(j, j, -penalty);
        q.add(i, j, penalty);
    }
    Ok(q)
}

/// `-Σ x_i + P Σ_{(i,j)∉E} x_i x_j`.
pub fn maxclique_qubo(graph: &Graph, penalty: f64) -> Result<QuboInstance> {
    if penalty.is_nan() || penalty <= 0.0 {
        return Err(Error::NonPositivePenalty(penalty));
    }
    let mut q = QuboInstance::zeros(graph.n, ProblemKind::MaxClique, penalty);
    for i in 0..graph.n {
        q.add(i, i, -1.0);
    }
    for (i, j) in graph.non_edges() {
        q.add(i, j, penalty);
    }
    Ok(q)
}

/// `P = n + 1`, which exceeds the largest objective gain any violation can buy.
pub fn default_penalty(graph: &Graph, problem: ProblemKind) -> Result<f64> {
    if !problem.is_constrained() {
        return Err(Error::UnconstrainedProblem);
    }
    Ok(graph.n as f64 + 1.0)
}

/// Builds `problem` on `graph` with the default penalty.
pub fn build_qubo(graph: &Graph, problem: ProblemKind) -> Result<QuboInstance> {
    match problem {
        ProblemKind::MaxCut => Ok(maxcut_qubo(graph)),
        ProblemKind::MinVertexCover => mvc_qubo(graph, default_penalty(graph, problem)?),
        ProblemKind::MaxClique => maxclique_qubo(graph, default_penalty(graph, problem)?),
    }
}

/// Whether basis index `x` satisfies the constraints of `problem` on `graph`.
pub fn is_feasible(graph: &Graph, problem: ProblemKind, x: usize) -> bool {
    let on = |v: usize| x >> v & 1 == 1;
    match problem {
        ProblemKind::MaxCut => true,
        ProblemKind::MinVertexCover => graph.edges.iter().all(|&(u, v)| on(u) || on(v)),
        ProblemKind::MaxClique => graph.non_edges().iter().all(|&(u, v)| !(on(u) && on(v))),
    }
}
