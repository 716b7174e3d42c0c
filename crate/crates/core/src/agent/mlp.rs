use std::fmt::Write as _;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{parse_err, Error, Result};

/// Fully connected network with tanh hidden layers and a linear output.
///
/// Parameters live in one flat vector: for each layer, the `out x in`
/// weight matrix (row-major) followed by the `out` biases.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mlp {
    sizes: Vec<usize>,
    pub params: Vec<f64>,
}

/// Activations kept from a forward pass for backpropagation.
#[derive(Debug, Clone)]
pub struct Cache {
    /// `acts[0]` is the input, `acts[k]` the output of layer `k`
    /// (post-tanh for hidden layers, raw for the last).
    acts: Vec<Vec<f64>>,
}

impl Cache {
    pub fn output(&self) -> &[f64] {
        self.acts.last().expect("at least the input")
    }
}

impl Mlp {
    /// All-zero parameters.
    pub fn zeros(sizes: &[usize]) -> Mlp {
        assert!(sizes.len() >= 2, "need input and output widths");
        let len = sizes.windows(2).map(|w| w[0] * w[1] + w[1]).sum();
        Mlp {
            sizes: sizes.to_vec(),
            params: vec![0.0; len],
        }
    }

    /// Orthogonal weights scaled by `hidden_gain` on hidden layers and
    /// `output_gain` on the last layer; zero biases.
    pub fn orthogonal<R: Rng + ?Sized>(
        sizes: &[usize],
        hidden_gain: f64,
        output_gain: f64,
        rng: &mut R,
    ) -> Mlp {
        let mut net = Mlp::zeros(sizes);
        let layers = net.n_layers();
        for l in 0..layers {
            let (inp, out) = (sizes[l], sizes[l + 1]);
            let gain = if l + 1 == layers { output_gain } else { hidden_gain };
            let w = orthogonal_matrix(out, inp, rng);
            let off = net.layer_offset(l);
            for (dst, v) in net.params[off..off + out * inp].iter_mut().zip(w) {
                *dst = gain * v;
            }
        }
        net
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn input_dim(&self) -> usize {
        self.sizes[0]
    }

    pub fn output_dim(&self) -> usize {
        *self.sizes.last().unwrap()
    }

    pub fn n_layers(&self) -> usize {
        self.sizes.len() - 1
    }

    fn layer_offset(&self, layer: usize) -> usize {
        self.sizes[..=layer]
            .windows(2)
            .take(layer)
            .map(|w| w[0] * w[1] + w[1])
            .sum()
    }

    /// Zeroes the final layer's weights and biases.
    pub fn zero_output_layer(&mut self) {
        let off = self.layer_offset(self.n_layers() - 1);
        for p in &mut self.params[off..] {
            *p = 0.0;
        }
    }

    pub fn forward(&self, input: &[f64]) -> Result<Cache> {
        if input.len() != self.input_dim() {
            return Err(Error::DimensionMismatch {
                expected: self.input_dim(),
                got: input.len(),
            });
        }
        let mut acts = Vec::with_capacity(self.sizes.len());
        acts.push(input.to_vec());
        let mut off = 0;
        let layers = self.n_layers();
        for l in 0..layers {
            let (inp, out) = (self.sizes[l], self.sizes[l + 1]);
            let w = &self.params[off..off + out * inp];
            let b = &self.params[off + out * inp..off + out * inp + out];
            let x = &acts[l];
            let mut y: Vec<f64> = (0..out)
                .map(|o| b[o] + dot(&w[o * inp..(o + 1) * inp], x))
                .collect();
            if l + 1 < layers {
                for v in &mut y {
                    *v = v.tanh();
                }
            }
            acts.push(y);
            off += out * inp + out;
        }
        Ok(Cache { acts })
    }

    /// Accumulates `d loss / d params` into `grad` given `d loss / d output`.
    pub fn backward(&self, cache: &Cache, grad_out: &[f64], grad: &mut [f64]) {
        let layers = self.n_layers();
        let mut delta = grad_out.to_vec();
        let mut off = self.params.len();
        for l in (0..layers).rev() {
            let (inp, out) = (self.sizes[l], self.sizes[l + 1]);
            off -= out * inp + out;
            let x = &cache.acts[l];
            let (gw, gb) = grad[off..off + out * inp + out].split_at_mut(out * inp);
            for o in 0..out {
                let d = delta[o];
                if d == 0.0 {
                    continue;
                }
                gb[o] += d;
                for (g, xi) in gw[o * inp..(o + 1) * inp].iter_mut().zip(x) {
                    *g += d * xi;
                }
            }
            if l == 0 {
                break;
            }
            let w = &self.params[off..off + out * inp];
            let mut prev = vec![0.0; inp];
            for o in 0..out {
                let d = delta[o];
                if d == 0.0 {
                    continue;
                }
                for (p, wi) in prev.iter_mut().zip(&w[o * inp..(o + 1) * inp]) {
                    *p += d * wi;
                }
            }
            // tanh' = 1 - y^2 on the hidden activation feeding this layer
            for (p, y) in prev.iter_mut().zip(x) {
                *p *= 1.0 - y * y;
            }
            delta = prev;
        }
    }

    pub fn is_finite(&self) -> bool {
        self.params.iter().all(|p| p.is_finite())
    }

    /// `mlp <sizes...>` header, then one parameter per line.
    pub fn to_text(&self) -> String {
        let mut s = String::from("mlp");
        for w in &self.sizes {
            write!(s, " {w}").unwrap();
        }
        s.push('\n');
        for p in &self.params {
            writeln!(s, "{p:?}").unwrap();
        }
        s
    }

    /// Parses the form written by [`Mlp::to_text`] from the front of
    /// `lines`, consuming exactly one network.
    pub fn from_lines<'a>(lines: &mut impl Iterator<Item = (usize, &'a str)>) -> Result<Mlp> {
        let (ln, header) = lines.next().ok_or_else(|| parse_err(0, "missing mlp header"))?;
        let mut tok = header.split_whitespace();
        if tok.next() != Some("mlp") {
            return Err(parse_err(ln, "expected `mlp <sizes...>`"));
        }
        let sizes: Vec<usize> = tok
            .map(|t| t.parse().map_err(|_| parse_err(ln, format!("bad width `{t}`"))))
            .collect::<Result<_>>()?;
        if sizes.len() < 2 {
            return Err(parse_err(ln, "need at least two layer widths"));
        }
        let mut net = Mlp::zeros(&sizes);
        for p in net.params.iter_mut() {
            let (ln, line) = lines.next().ok_or_else(|| parse_err(ln, "truncated parameters"))?;
            *p = line
                .trim()
                .parse()
                .map_err(|_| parse_err(ln, format!("bad parameter `{line}`")))?;
        }
        Ok(net)
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `rows x cols` matrix with orthonormal rows (if rows <= cols) or
/// orthonormal columns, from Gram-Schmidt on a Gaussian sample.
fn orthogonal_matrix<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> Vec<f64> {
    let (k, d) = if rows <= cols { (rows, cols) } else { (cols, rows) };
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(k);
    while basis.len() < k {
        let mut v: Vec<f64> = (0..d).map(|_| rng.sample(StandardNormal)).collect();
        for b in &basis {
            let c = dot(&v, b);
            for (vi, bi) in v.iter_mut().zip(b) {
                *vi -= c * bi;
            }
        }
        let n = dot(&v, &v).sqrt();
        if n > 1e-8 {
            basis.push(v.into_iter().map(|x| x / n).collect());
        }
    }
    let mut m = vec![0.0; rows * cols];
    for r in 0..rows {
        for c in 0..cols {
            m[r * cols + c] = if rows <= cols { basis[r][c] } else { basis[c][r] };
        }
    }
    m
}

#[cfg(test)]
mod tests {
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    use super::*;

    #[test]
    fn layout_and_dims() {
        let net = Mlp::zeros(&[4, 3, 2]);
        assert_eq!(net.params.len(), 4 * 3 + 3 + 3 * 2 + 2);
        assert_eq!(net.layer_offset(1), 15);
        assert!(matches!(
            net.forward(&[0.0; 3]),
            Err(Error::DimensionMismatch { expected: 4, got: 3 })
        ));
    }

    #[test]
    fn orthogonal_rows_are_orthonormal() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for (r, c) in [(3, 5), (5, 3), (4, 4)] {
            let m = orthogonal_matrix(r, c, &mut rng);
            let (k, stride, n) = if r <= c { (r, c, c) } else { (c, 1, r) };
            for a in 0..k {
                for b in 0..k {
                    let s: f64 = (0..n)
                        .map(|i| {
                            if r <= c {
                                m[a * stride + i] * m[b * stride + i]
                            } else {
                                m[i * c + a] * m[i * c + b]
                            }
                        })
                        .sum();
                    let want = if a == b { 1.0 } else { 0.0 };
                    assert!((s - want).abs() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn backward_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let net = Mlp::orthogonal(&[3, 5, 4, 2], 1.3, 0.7, &mut rng);
        let x = [0.3, -0.8, 0.5];
        let upstream = [0.7, -1.1];
        let loss = |n: &Mlp| -> f64 {
            let y = n.forward(&x).unwrap();
            dot(y.output(), &upstream)
        };
        let mut grad = vec![0.0; net.params.len()];
        net.backward(&net.forward(&x).unwrap(), &upstream, &mut grad);
        let h = 1e-6;
        for i in 0..net.params.len() {
            let mut p = net.clone();
            p.params[i] += h;
            let up = loss(&p);
            p.params[i] -= 2.0 * h;
            let down = loss(&p);
            let fd = (up - down) / (2.0 * h);
            assert!((fd - grad[i]).abs() <= 1e-7 * (1.0 + fd.abs()), "param {i}: {fd} vs {}", grad[i]);
        }
    }

    #[test]
    fn text_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let net = Mlp::orthogonal(&[4, 6, 3], 2f64.sqrt(), 0.01, &mut rng);
        let text = net.to_text();
        let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
        let back = Mlp::from_lines(&mut lines).unwrap();
        assert_eq!(back, net);
        assert!(lines.next().is_none());
    }
}
