use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{parse_err, Error, Result};

/// Largest number of seeds tried when searching for a connected sample.
pub const SEED_SEARCH_BOUND: u64 = 10_000;

/// Graph family with its shape parameter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Topology {
    ThreeRegular,
    ErdosRenyi { p: f64 },
    BarabasiAlbert { m: usize },
    Grid2d { side: usize },
    Star,
    Cycle,
}

impl Topology {
    fn is_random(self) -> bool {
        matches!(
            self,
            Topology::ThreeRegular | Topology::ErdosRenyi { .. } | Topology::BarabasiAlbert { .. }
        )
    }
}

/// A topology, a vertex count and the first seed to try.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GraphSpec {
    pub topology: Topology,
    pub n: usize,
    pub seed: u64,
}

/// Simple undirected graph. Edges are stored as `(u, v)` with `u < v`, sorted.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Graph {
    pub n: usize,
    pub edges: Vec<(usize, usize)>,
}

impl Graph {
    pub fn new(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Graph {
        let set: BTreeSet<(usize, usize)> = edges
            .into_iter()
            .map(|(u, v)| (u.min(v), u.max(v)))
            .collect();
        Graph {
            n,
            edges: set.into_iter().collect(),
        }
    }

    pub fn degrees(&self) -> Vec<usize> {
        let mut d = vec![0; self.n];
        for &(u, v) in &self.edges {
            d[u] += 1;
            d[v] += 1;
        }
        d
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.edges.binary_search(&(u.min(v), u.max(v))).is_ok()
    }

    /// Unordered non-adjacent pairs `(i, j)`, `i < j`, in lexicographic order.
    pub fn non_edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for i in 0..self.n {
            for j in i + 1..self.n {
                if !self.has_edge(i, j) {
                    out.push((i, j));
                }
            }
        }
        out
    }

    pub fn is_connected(&self) -> bool {
        if self.n == 0 {
            return true;
        }
        let mut adj = vec![Vec::new(); self.n];
        for &(u, v) in &self.edges {
            adj[u].push(v);
            adj[v].push(u);
        }
        let mut seen = vec![false; self.n];
        let mut stack = vec![0];
        seen[0] = true;
        let mut count = 1;
        while let Some(u) = stack.pop() {
            for &v in &adj[u] {
                if !seen[v] {
                    seen[v] = true;
                    count += 1;
                    stack.push(v);
                }
            }
        }
        count == self.n
    }

    /// `n m` header followed by one `u v` line per edge.
    pub fn to_text(&self) -> String {
        let mut s = format!("{} {}\n", self.n, self.edges.len());
        for (u, v) in &self.edges {
            s.push_str(&format!("{u} {v}\n"));
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Graph> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let (_, header) = lines.next().ok_or_else(|| parse_err(1, "empty graph file"))?;
        let (n, m) = parse_pair(header, 1)?;
        let mut edges = Vec::with_capacity(m);
        for (i, line) in lines {
            let (u, v) = parse_pair(line, i + 1)?;
            if u >= n || v >= n || u == v {
                return Err(parse_err(i + 1, format!("invalid edge {u} {v}")));
            }
            edges.push((u, v));
        }
        let g = Graph::new(n, edges);
        if g.edges.len() != m {
            return Err(parse_err(1, format!("header declares {m} edges, found {}", g.edges.len())));
        }
        Ok(g)
    }
}

fn parse_pair(line: &str, ln: usize) -> Result<(usize, usize)> {
    let mut it = line.split_whitespace().map(|t| t.parse::<usize>());
    match (it.next(), it.next(), it.next()) {
        (Some(Ok(a)), Some(Ok(b)), None) => Ok((a, b)),
        _ => Err(parse_err(ln, format!("expected two integers, got `{line}`"))),
    }
}

/// Generates the graph for `spec`. Random topologies try seeds
/// `spec.seed, spec.seed + 1, ...` and keep the first connected sample.
/// Returns the graph and the seed that produced it.
pub fn generate_graph(spec: &GraphSpec) -> Result<(Graph, u64)> {
    check_feasible(spec)?;
    if !spec.topology.is_random() {
        return Ok((deterministic(spec), spec.seed));
    }
    for seed in spec.seed..spec.seed.saturating_add(SEED_SEARCH_BOUND) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = match spec.topology {
            Topology::ThreeRegular => match random_regular(3, spec.n, &mut rng) {
                Some(g) => g,
                None => continue,
            },
            Topology::ErdosRenyi { p } => erdos_renyi(spec.n, p, &mut rng),
            Topology::BarabasiAlbert { m } => barabasi_albert(spec.n, m, &mut rng),
            _ => unreachable!(),
        };
        if g.is_connected() {
            return Ok((g, seed));
        }
    }
    Err(Error::NoConnectedGraph(SEED_SEARCH_BOUND))
}

fn check_feasible(spec: &GraphSpec) -> Result<()> {
    let n = spec.n;
    let fail = |msg: String| Err(Error::InfeasibleGraph(msg));
    if n < 2 {
        return fail(format!("need at least 2 vertices, got {n}"));
    }
    match spec.topology {
        Topology::ThreeRegular if n % 2 == 1 || n < 4 => {
            fail(format!("3-regular graph needs an even n >= 4, got {n}"))
        }
        Topology::ErdosRenyi { p } if !(p > 0.0 && p <= 1.0) => {
            fail(format!("edge probability {p} outside (0, 1]"))
        }
        Topology::BarabasiAlbert { m } if m < 1 || m >= n => {
            fail(format!("attachment count m={m} must satisfy 1 <= m < n={n}"))
        }
        Topology::Grid2d { side } if side < 1 || !n.is_multiple_of(side) => {
            fail(format!("grid side {side} does not divide n={n}"))
        }
        Topology::Cycle if n < 3 => fail("cycle needs at least 3 vertices".into()),
        _ => Ok(()),
    }
}

fn deterministic(spec: &GraphSpec) -> Graph {
    let n = spec.n;
    match spec.topology {
        Topology::Star => Graph::new(n, (1..n).map(|v| (0, v))),
        Topology::Cycle => Graph::new(n, (0..n).map(|v| (v, (v + 1) % n))),
        Topology::Grid2d { side } => {
            let rows = n / side;
            let mut edges = Vec::new();
            for r in 0..rows {
                for c in 0..side {
                    let v = r * side + c;
                    if c + 1 < side {
                        edges.push((v, v + 1));
                    }
                    if r + 1 < rows {
                        edges.push((v, v + side));
                    }
                }
            }
            Graph::new(n, edges)
        }
        _ => unreachable!(),
    }
}

fn erdos_renyi<R: Rng>(n: usize, p: f64, rng: &mut R) -> Graph {
    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if rng.gen::<f64>() < p {
                edges.push((i, j));
            }
        }
    }
    Graph::new(n, edges)
}

/// Preferential attachment starting from a star on `m + 1` vertices; each
/// new vertex links to `m` distinct targets drawn proportionally to degree.
fn barabasi_albert<R: Rng>(n: usize, m: usize, rng: &mut R) -> Graph {
    let mut edges: Vec<(usize, usize)> = (1..=m).map(|v| (0, v)).collect();
    let mut repeated: Vec<usize> = edges.iter().flat_map(|&(u, v)| [u, v]).collect();
    for source in m + 1..n {
        let mut targets = BTreeSet::new();
        while targets.len() < m {
            targets.insert(*repeated.choose(rng).expect("non-empty"));
        }
        for &t in &targets {
            edges.push((t, source));
            repeated.push(t);
            repeated.push(source);
        }
    }
    Graph::new(n, edges)
}

/// Configuration-model pairing with rejection of loops and multi-edges.
fn random_regular<R: Rng>(d: usize, n: usize, rng: &mut R) -> Option<Graph> {
    let mut points: Vec<usize> = (0..n).flat_map(|v| std::iter::repeat_n(v, d)).collect();
    'attempt: for _ in 0..1000 {
        points.shuffle(rng);
        let mut set = BTreeSet::new();
        for pair in points.chunks(2) {
            let (u, v) = (pair[0].min(pair[1]), pair[0].max(pair[1]));
            if u == v || !set.insert((u, v)) {
                continue 'attempt;
            }
        }
        return Some(Graph {
            n,
            edges: set.into_iter().collect(),
        });
    }
    None
}

/// The eight graph families of the benchmark grid. Serialized by key.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum TopologyClass {
    ThreeRegular,
    ErdosRenyiSparse,
    ErdosRenyiDense,
    BarabasiAlbertSparse,
    BarabasiAlbertDense,
    Grid2d,
    Star,
    Cycle,
}

impl TopologyClass {
    pub const ALL: [TopologyClass; 8] = [
        TopologyClass::Grid2d,
        TopologyClass::ThreeRegular,
        TopologyClass::BarabasiAlbertSparse,
        TopologyClass::BarabasiAlbertDense,
        TopologyClass::Cycle,
        TopologyClass::ErdosRenyiSparse,
        TopologyClass::ErdosRenyiDense,
        TopologyClass::Star,
    ];

    pub fn key(self) -> &'static str {
        match self {
            TopologyClass::ThreeRegular => "3-reg",
            TopologyClass::ErdosRenyiSparse => "erdos-renyi-0.2",
            TopologyClass::ErdosRenyiDense => "erdos-renyi-0.7",
            TopologyClass::BarabasiAlbertSparse => "barabasi-albert-0.2n",
            TopologyClass::BarabasiAlbertDense => "barabasi-albert-0.5n",
            TopologyClass::Grid2d => "2d-grid-4",
            TopologyClass::Star => "star",
            TopologyClass::Cycle => "cycle",
        }
    }

    /// Concrete topology for `n` vertices. Attachment counts are
    /// `round(0.2 n)` and `round(0.5 n)`, at least 1.
    pub fn topology(self, n: usize) -> Topology {
        let ba = |frac: f64| Topology::BarabasiAlbert {
            m: ((frac * n as f64).round() as usize).max(1),
        };
        match self {
            TopologyClass::ThreeRegular => Topology::ThreeRegular,
            TopologyClass::ErdosRenyiSparse => Topology::ErdosRenyi { p: 0.2 },
            TopologyClass::ErdosRenyiDense => Topology::ErdosRenyi { p: 0.7 },
            TopologyClass::BarabasiAlbertSparse => ba(0.2),
            TopologyClass::BarabasiAlbertDense => ba(0.5),
            TopologyClass::Grid2d => Topology::Grid2d { side: 4 },
            TopologyClass::Star => Topology::Star,
            TopologyClass::Cycle => Topology::Cycle,
        }
    }

    pub fn spec(self, n: usize) -> GraphSpec {
        GraphSpec {
            topology: self.topology(n),
            n,
            seed: 0,
        }
    }
}

impl fmt::Display for TopologyClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.key())
    }
}

impl From<TopologyClass> for String {
    fn from(t: TopologyClass) -> String {
        t.key().to_string()
    }
}

impl TryFrom<String> for TopologyClass {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl FromStr for TopologyClass {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        TopologyClass::ALL
            .into_iter()
            .find(|t| t.key() == s)
            .ok_or_else(|| Error::Config(format!("unknown topology `{s}`")))
    }
}
