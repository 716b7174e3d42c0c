//! Dense-matrix reference for small registers. Independent of the stride
//! kernels: every unitary is built from Pauli matrices and a Taylor-series
//! matrix exponential.

#![allow(dead_code)]

use num_complex::Complex64 as C;
use rlvqc::sim::{Axis, GateInstance, GateKind};

pub type Mat = Vec<Vec<C>>;

pub fn identity(d: usize) -> Mat {
    (0..d)
        .map(|i| (0..d).map(|j| if i == j { C::new(1.0, 0.0) } else { C::new(0.0, 0.0) }).collect())
        .collect()
}

pub fn pauli(axis: Axis) -> Mat {
    let z = C::new(0.0, 0.0);
    let o = C::new(1.0, 0.0);
    let i = C::new(0.0, 1.0);
    match axis {
        Axis::X => vec![vec![z, o], vec![o, z]],
        Axis::Y => vec![vec![z, -i], vec![i, z]],
        Axis::Z => vec![vec![o, z], vec![z, -o]],
    }
}

pub fn hadamard() -> Mat {
    let r = C::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    vec![vec![r, r], vec![r, -r]]
}

pub fn matmul(a: &Mat, b: &Mat) -> Mat {
    let n = a.len();
    let mut out = vec![vec![C::new(0.0, 0.0); n]; n];
    for i in 0..n {
        for k in 0..n {
            for j in 0..n {
                out[i][j] += a[i][k] * b[k][j];
            }
        }
    }
    out
}

pub fn scale(a: &Mat, s: C) -> Mat {
    a.iter().map(|r| r.iter().map(|x| x * s).collect()).collect()
}

pub fn add(a: &Mat, b: &Mat) -> Mat {
    a.iter()
        .zip(b)
        .map(|(r, s)| r.iter().zip(s).map(|(x, y)| x + y).collect())
        .collect()
}

pub fn kron(a: &Mat, b: &Mat) -> Mat {
    let (n, m) = (a.len(), b.len());
    let mut out = vec![vec![C::new(0.0, 0.0); n * m]; n * m];
    for i in 0..n {
        for j in 0..n {
            for k in 0..m {
                for l in 0..m {
                    out[i * m + k][j * m + l] = a[i][j] * b[k][l];
                }
            }
        }
    }
    out
}

/// exp(A) by scaling and squaring with a 30-term Taylor series.
pub fn expm(a: &Mat) -> Mat {
    let n = a.len();
    let norm: f64 = a.iter().flatten().map(|x| x.norm()).sum();
    let mut squarings = 0;
    let mut s = 1.0;
    while norm * s > 0.5 {
        s *= 0.5;
        squarings += 1;
    }
    let a = scale(a, C::new(s, 0.0));
    let mut result = identity(n);
    let mut term = identity(n);
    for k in 1..30 {
        term = scale(&matmul(&term, &a), C::new(1.0 / k as f64, 0.0));
        result = add(&result, &term);
    }
    for _ in 0..squarings {
        result = matmul(&result, &result);
    }
    result
}

/// exp(-i θ/2 G).
pub fn rotation(generator: &Mat, theta: f64) -> Mat {
    expm(&scale(generator, C::new(0.0, -theta / 2.0)))
}

/// Embeds a single-qubit matrix on qubit `q` of an `n`-qubit register
/// (little-endian: qubit 0 is the least significant bit).
pub fn embed1(m: &Mat, q: usize, n: usize) -> Mat {
    let mut out = vec![vec![C::new(1.0, 0.0)]];
    for k in (0..n).rev() {
        out = kron(&out, &if k == q { m.clone() } else { identity(2) });
    }
    out
}

/// Embeds `A ⊗ B` with A on qubit `qa` and B on qubit `qb`.
pub fn embed2(a: &Mat, qa: usize, b: &Mat, qb: usize, n: usize) -> Mat {
    let mut out = vec![vec![C::new(1.0, 0.0)]];
    for k in (0..n).rev() {
        let f = if k == qa {
            a.clone()
        } else if k == qb {
            b.clone()
        } else {
            identity(2)
        };
        out = kron(&out, &f);
    }
    out
}

/// Pauli string generator σ_a(qa) σ_b(qb).
pub fn pauli_pair(a: Axis, qa: usize, b: Axis, qb: usize, n: usize) -> Mat {
    embed2(&pauli(a), qa, &pauli(b), qb, n)
}

/// Dense unitary of one gate with angle `theta`.
pub fn gate_matrix(g: &GateInstance, theta: f64, n: usize) -> Mat {
    let q = g.qubits;
    match g.kind {
        GateKind::H => embed1(&hadamard(), q[0], n),
        GateKind::Rx => rotation(&embed1(&pauli(Axis::X), q[0], n), theta),
        GateKind::Ry => rotation(&embed1(&pauli(Axis::Y), q[0], n), theta),
        GateKind::Rz => rotation(&embed1(&pauli(Axis::Z), q[0], n), theta),
        GateKind::Rzz => rotation(&pauli_pair(Axis::Z, q[0], Axis::Z, q[1], n), theta),
        GateKind::Rab(a, b) => rotation(&pauli_pair(a, q[0], b, q[1], n), theta),
        GateKind::Cx => {
            let d = 1 << n;
            let mut m = vec![vec![C::new(0.0, 0.0); d]; d];
            for i in 0..d {
                let j = if i >> q[0] & 1 == 1 { i ^ (1 << q[1]) } else { i };
                m[j][i] = C::new(1.0, 0.0);
            }
            m
        }
    }
}

/// Product of gate matrices in circuit order.
pub fn sequence_matrix(gates: &[GateInstance], params: &[f64], n: usize) -> Mat {
    let mut u = identity(1 << n);
    for g in gates {
        u = matmul(&gate_matrix(g, g.theta(params), n), &u);
    }
    u
}

pub fn apply(m: &Mat, v: &[C]) -> Vec<C> {
    m.iter()
        .map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum())
        .collect()
}

/// Max entrywise distance between `a` and `b` after removing the global
/// phase that best aligns them.
pub fn dist_up_to_phase(a: &Mat, b: &Mat) -> f64 {
    let mut phase = C::new(1.0, 0.0);
    'outer: for (ra, rb) in a.iter().zip(b) {
        for (x, y) in ra.iter().zip(rb) {
            if x.norm() > 1e-6 && y.norm() > 1e-6 {
                phase = (x / y) / (x / y).norm();
                break 'outer;
            }
        }
    }
    a.iter()
        .flatten()
        .zip(b.iter().flatten())
        .map(|(x, y)| (x - y * phase).norm())
        .fold(0.0, f64::max)
}
