//! Central finite differences for the PPO losses on a fixed toy batch.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rlvqc::agent::{policy_loss, softmax, value_loss, Batch, Mlp};

pub const OBS_DIM: usize = 4;
pub const N_ACTIONS: usize = 3;
pub const EPSILON: f64 = 0.2;

/// Networks with unit output gain so every layer carries a sizeable gradient.
pub fn toy_networks(seed: u64) -> (Mlp, Mlp) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pi = Mlp::orthogonal(&[OBS_DIM, 5, 5, N_ACTIONS], 2f64.sqrt(), 1.0, &mut rng);
    let v = Mlp::orthogonal(&[OBS_DIM, 5, 5, 1], 2f64.sqrt(), 1.0, &mut rng);
    (pi, v)
}

/// Six samples whose old log-probabilities come from a perturbed copy of the
/// policy, so some ratios fall outside the clip range and some inside.
pub fn toy_batch(policy: &Mlp) -> Batch {
    let observations: Vec<Vec<f64>> = (0..6)
        .map(|t| {
            (0..OBS_DIM)
                .map(|k| ((t * OBS_DIM + k) as f64 * 0.37).sin())
                .collect()
        })
        .collect();
    let actions = vec![0, 1, 2, 1, 0, 2];
    let mut old = policy.clone();
    for (i, p) in old.params.iter_mut().enumerate() {
        *p += 0.4 * ((i as f64) * 1.3).cos();
    }
    let old_log_probs = observations
        .iter()
        .zip(&actions)
        .map(|(o, &a)| softmax(old.forward(o).unwrap().output())[a].ln())
        .collect();
    Batch {
        observations,
        actions,
        old_log_probs,
        advantages: vec![1.2, -0.7, 0.4, -1.5, 0.9, -0.3],
        returns: vec![0.5, -1.0, 2.0, 0.0, 1.5, -0.25],
    }
}

fn central_difference(params: &[f64], f: impl Fn(&[f64]) -> f64) -> Vec<f64> {
    let h = 1e-6;
    let mut x = params.to_vec();
    (0..params.len())
        .map(|i| {
            x[i] = params[i] + h;
            let up = f(&x);
            x[i] = params[i] - h;
            let down = f(&x);
            x[i] = params[i];
            (up - down) / (2.0 * h)
        })
        .collect()
}

/// Largest `|a - n| / max(|a|, |n|, 1e-6)` over all parameters.
pub fn max_relative_error(analytic: &[f64], numeric: &[f64]) -> f64 {
    analytic
        .iter()
        .zip(numeric)
        .map(|(a, n)| (a - n).abs() / a.abs().max(n.abs()).max(1e-6))
        .fold(0.0, f64::max)
}

/// Relative error of the clipped-surrogate gradient.
pub fn policy_gradient_error(policy: &Mlp, batch: &Batch) -> f64 {
    let (_, analytic, _) = policy_loss(policy, batch, EPSILON).unwrap();
    let numeric = central_difference(&policy.params, |x| {
        let mut net = policy.clone();
        net.params.copy_from_slice(x);
        policy_loss(&net, batch, EPSILON).unwrap().0
    });
    max_relative_error(&analytic, &numeric)
}

/// Relative error of the value-loss gradient.
pub fn value_gradient_error(value: &Mlp, batch: &Batch) -> f64 {
    let (_, analytic) = value_loss(value, batch).unwrap();
    let numeric = central_difference(&value.params, |x| {
        let mut net = value.clone();
        net.params.copy_from_slice(x);
        value_loss(&net, batch).unwrap().0
    });
    max_relative_error(&analytic, &numeric)
}
