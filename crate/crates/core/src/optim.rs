//! Derivative-free minimisation of noisy, cheap-to-moderate objectives.
//!
//! [`LinearTrustRegion`] keeps a simplex of `n + 1` evaluated points, fits
//! the linear model that interpolates them and steps a distance `ρ` down the
//! model gradient. Failed steps either repair the simplex geometry or halve
//! `ρ`; the run ends when `ρ` drops below the tolerance or the evaluation
//! budget is spent. This is the unconstrained core of Powell's COBYLA.

use serde::{Deserialize, Serialize};

/// Evaluation cap and trust-region radii for one optimizer run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptimizerBudget {
    /// Hard cap on objective calls.
    pub max_evals: usize,
    /// Initial trust-region radius (radians for gate angles).
    pub initial_step: f64,
    /// Final trust-region radius.
    pub tolerance: f64,
}

impl OptimizerBudget {
    pub const INNER_EVALS: usize = 50;
    pub const FINE_TUNE_EVALS: usize = 1000;

    pub fn with_evals(max_evals: usize) -> Self {
        OptimizerBudget {
            max_evals,
            initial_step: 0.5,
            tolerance: 1e-4,
        }
    }

    /// Per-step gate tuning budget.
    pub fn inner() -> Self {
        Self::with_evals(Self::INNER_EVALS)
    }

    /// Final re-optimization and QAOA budget.
    pub fn fine_tune() -> Self {
        Self::with_evals(Self::FINE_TUNE_EVALS)
    }
}

/// Best point seen during a run.
#[derive(Debug, Clone, PartialEq)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub f: f64,
    pub evals: usize,
}

/// Unconstrained derivative-free minimiser.
pub trait Minimizer: Sync {
    /// Returns the best evaluated point. NaN objective values count as +∞.
    fn minimize(
        &self,
        objective: &mut dyn FnMut(&[f64]) -> f64,
        x0: &[f64],
        budget: &OptimizerBudget,
    ) -> Minimum;
}

#[derive(Debug, Clone, Copy, Default)]
pub struct LinearTrustRegion;

const GOOD_RATIO: f64 = 0.1;
const MAX_EDGE: f64 = 2.1;
const MIN_HEIGHT: f64 = 0.25;

struct Tracker<'a> {
    objective: &'a mut dyn FnMut(&[f64]) -> f64,
    max_evals: usize,
    evals: usize,
    best: Minimum,
}

impl Tracker<'_> {
    fn exhausted(&self) -> bool {
        self.evals >= self.max_evals
    }

    fn eval(&mut self, x: &[f64]) -> f64 {
        debug_assert!(!self.exhausted());
        let mut f = (self.objective)(x);
        if f.is_nan() {
            f = f64::INFINITY;
        }
        self.evals += 1;
        if f < self.best.f || self.best.x.is_empty() && self.evals == 1 {
            self.best.x = x.to_vec();
            self.best.f = f;
        }
        f
    }

    fn finish(mut self, x0: &[f64]) -> Minimum {
        if self.best.x.is_empty() {
            self.best.x = x0.to_vec();
        }
        self.best.evals = self.evals;
        self.best
    }
}

impl Minimizer for LinearTrustRegion {
    fn minimize(
        &self,
        objective: &mut dyn FnMut(&[f64]) -> f64,
        x0: &[f64],
        budget: &OptimizerBudget,
    ) -> Minimum {
        let n = x0.len();
        let mut t = Tracker {
            objective,
            max_evals: budget.max_evals,
            evals: 0,
            best: Minimum {
                x: Vec::new(),
                f: f64::INFINITY,
                evals: 0,
            },
        };
        if t.exhausted() {
            return t.finish(x0);
        }
        let f0 = t.eval(x0);
        if n == 0 {
            return t.finish(x0);
        }

        let mut rho = budget.initial_step;
        let mut pts = vec![x0.to_vec()];
        let mut vals = vec![f0];
        for i in 0..n {
            if t.exhausted() {
                return t.finish(x0);
            }
            let mut p = x0.to_vec();
            p[i] += rho;
            vals.push(t.eval(&p));
            pts.push(p);
        }

        while !t.exhausted() {
            // Pole = lowest vertex, kept at index 0.
            let pole = argmin(&vals);
            pts.swap(0, pole);
            vals.swap(0, pole);

            let Some(simplex) = Simplex::new(&pts, &vals) else {
                // Degenerate: rebuild around the pole on the coordinate axes.
                for i in 1..=n {
                    if t.exhausted() {
                        break;
                    }
                    let mut p = pts[0].clone();
                    p[i - 1] += rho;
                    vals[i] = t.eval(&p);
                    pts[i] = p;
                }
                continue;
            };

            let gnorm = norm(&simplex.grad);
            let mut success = false;
            if gnorm.is_finite() && gnorm > 0.0 {
                let trial: Vec<f64> = pts[0]
                    .iter()
                    .zip(&simplex.grad)
                    .map(|(x, g)| x - rho * g / gnorm)
                    .collect();
                let ft = t.eval(&trial);
                let predicted = rho * gnorm;
                success = vals[0] - ft >= GOOD_RATIO * predicted;

                let step: Vec<f64> = trial.iter().zip(&pts[0]).map(|(a, b)| a - b).collect();
                let j = (1..=n)
                    .max_by(|&a, &b| {
                        let score = |k: usize| {
                            let c = dot(&simplex.dual[k - 1], &step).abs();
                            c * (simplex.edge_len[k - 1] / rho).max(1.0)
                        };
                        score(a).total_cmp(&score(b))
                    })
                    .expect("n >= 1");
                pts[j] = trial;
                vals[j] = ft;
            }
            if success || t.exhausted() {
                continue;
            }

            // Rebuild from the updated simplex to judge its geometry.
            let pole = argmin(&vals);
            pts.swap(0, pole);
            vals.swap(0, pole);
            match Simplex::new(&pts, &vals).and_then(|s| s.worst_vertex(rho).map(|j| (s, j))) {
                Some((s, j)) => {
                    let w = &s.dual[j - 1];
                    let wn = norm(w);
                    let sign = if dot(&s.grad, w) > 0.0 { -1.0 } else { 1.0 };
                    let p: Vec<f64> = pts[0]
                        .iter()
                        .zip(w)
                        .map(|(x, wi)| x + sign * rho * wi / wn)
                        .collect();
                    vals[j] = t.eval(&p);
                    pts[j] = p;
                }
                None if Simplex::new(&pts, &vals).is_none() => {}
                None => {
                    rho *= 0.5;
                    if rho < budget.tolerance {
                        break;
                    }
                }
            }
        }
        t.finish(x0)
    }
}

/// Interpolation data for a simplex with its pole at index 0.
struct Simplex {
    grad: Vec<f64>,
    /// `dual[j]` is column `j` of `D^{-1}` where row `j` of `D` is
    /// `p_{j+1} - p_0`; it is normal to the face opposite vertex `j + 1`
    /// and has length `1 / height`.
    dual: Vec<Vec<f64>>,
    edge_len: Vec<f64>,
}

impl Simplex {
    fn new(pts: &[Vec<f64>], vals: &[f64]) -> Option<Simplex> {
        let n = pts.len() - 1;
        let d: Vec<Vec<f64>> = (1..=n)
            .map(|i| pts[i].iter().zip(&pts[0]).map(|(a, b)| a - b).collect())
            .collect();
        let inv = invert(&d)?;
        let df: Vec<f64> = (1..=n).map(|i| vals[i] - vals[0]).collect();
        // g = D^{-1} df
        let grad: Vec<f64> = (0..n).map(|r| dot(&inv[r], &df)).collect();
        let dual = (0..n).map(|j| (0..n).map(|r| inv[r][j]).collect()).collect();
        let edge_len = d.iter().map(|e| norm(e)).collect();
        Some(Simplex {
            grad,
            dual,
            edge_len,
        })
    }

    /// Vertex (1-based) whose edge is too long or whose height is too
    /// small relative to `rho`, preferring the worst offender.
    fn worst_vertex(&self, rho: f64) -> Option<usize> {
        let mut worst = None;
        let mut worst_score = 1.0;
        for j in 0..self.edge_len.len() {
            let long = self.edge_len[j] / (MAX_EDGE * rho);
            let flat = (MIN_HEIGHT * rho) * norm(&self.dual[j]);
            let score = long.max(flat);
            if score > worst_score {
                worst_score = score;
                worst = Some(j + 1);
            }
        }
        worst
    }
}

fn argmin(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in v.iter().enumerate() {
        if x < v[best] {
            best = i;
        }
    }
    best
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Gauss-Jordan inverse with partial pivoting; `None` if (near) singular.
fn invert(m: &[Vec<f64>]) -> Option<Vec<Vec<f64>>> {
    let n = m.len();
    let scale = m.iter().flatten().fold(0.0f64, |a, &b| a.max(b.abs()));
    if scale == 0.0 || !scale.is_finite() {
        return None;
    }
    let mut a: Vec<Vec<f64>> = m.to_vec();
    let mut inv: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
        .collect();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col].abs() <= 1e-12 * scale {
            return None;
        }
        a.swap(col, piv);
        inv.swap(col, piv);
        let p = a[col][col];
        for k in 0..n {
            a[col][k] /= p;
            inv[col][k] /= p;
        }
        for r in 0..n {
            if r != col && a[r][col] != 0.0 {
                let f = a[r][col];
                for k in 0..n {
                    a[r][k] -= f * a[col][k];
                    inv[r][k] -= f * inv[col][k];
                }
            }
        }
    }
    Some(inv)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run(f: impl Fn(&[f64]) -> f64, x0: &[f64], evals: usize) -> (Minimum, usize) {
        let mut calls = 0;
        let mut seen = f64::INFINITY;
        let mut obj = |x: &[f64]| {
            calls += 1;
            let v = f(x);
            seen = seen.min(if v.is_nan() { f64::INFINITY } else { v });
            v
        };
        let m = LinearTrustRegion.minimize(&mut obj, x0, &OptimizerBudget::with_evals(evals));
        assert_eq!(m.f, seen, "reported best must equal minimum over evaluations");
        (m, calls)
    }

    #[test]
    fn one_dimensional_quadratic() {
        let (m, calls) = run(|x| (x[0] - 2.0).powi(2), &[0.0], 50);
        assert!((m.x[0] - 2.0).abs() <= 1e-2, "{:?}", m);
        assert!(calls <= 50);
        assert_eq!(m.evals, calls);
    }

    #[test]
    fn two_dimensional_quadratic() {
        let (m, calls) = run(|x| (x[0] - 1.0).powi(2) + 2.0 * (x[1] + 1.0).powi(2), &[0.0, 0.0], 100);
        assert!(m.f <= 1e-3, "{:?}", m);
        assert!(calls <= 100);
    }

    #[test]
    fn constant_objective() {
        let (m, _) = run(|_| 4.0, &[0.3, 0.1], 30);
        assert_eq!(m.f, 4.0);
    }

    #[test]
    fn empty_input_returns_x0() {
        let (m, calls) = run(|_| 1.5, &[], 10);
        assert!(m.x.is_empty());
        assert_eq!(m.f, 1.5);
        assert_eq!(calls, 1);
    }

    #[test]
    fn nan_is_treated_as_infinity() {
        let (m, _) = run(|x| if x[0] > 0.2 { f64::NAN } else { (x[0] + 1.0).powi(2) }, &[0.0], 60);
        assert!(m.f.is_finite());
        assert!(m.x[0] <= 0.2);
        assert!((m.x[0] + 1.0).abs() < 1e-2);
    }

    #[test]
    fn budget_is_never_exceeded() {
        for evals in [0, 1, 2, 3, 7, 20] {
            let (m, calls) = run(|x| x.iter().map(|v| (v - 3.0).powi(2)).sum(), &[0.0; 4], evals);
            assert!(calls <= evals);
            assert_eq!(m.evals, calls);
        }
    }

    #[test]
    fn deterministic() {
        let f = |x: &[f64]| (x[0] - 0.7).powi(2) + (x[0] * x[1]).sin() + x[1].powi(2);
        assert_eq!(run(f, &[0.1, 0.2], 80).0, run(f, &[0.1, 0.2], 80).0);
    }
}
