//! Actor-critic loss and its exact gradient over one trajectory.

use serde::{Deserialize, Serialize};

use crate::scalar::Real;

use super::nn::{backward_sequence, forward_cached, log_softmax, HiddenState, NetworkParams, StepCache};
use super::returns::{discounted_returns, gae};
use super::DrlError;

/// One recorded step of a rollout.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryStep<T> {
    pub input: Vec<T>,
    pub action: usize,
    pub reward: f64,
    /// Critic estimate at collection time.
    pub value: f64,
}

/// Contiguous steps from one episode of one worker.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory<T> {
    /// Hidden state entering the first step.
    pub h0: HiddenState<T>,
    pub steps: Vec<TrajectoryStep<T>>,
    /// The episode ended at the last step.
    pub terminal: bool,
    /// Critic estimate of the state after the last step; unused when terminal.
    pub bootstrap: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossConfig {
    pub gamma: f64,
    pub value_coef: f64,
    pub entropy_coef: f64,
    /// `Some(λ)` switches advantages to GAE.
    pub gae_lambda: Option<f64>,
    /// `Some(ε)` clips the value prediction around its collection-time estimate.
    pub value_clip: Option<f64>,
    /// `None` disables gradient clipping.
    pub max_grad_norm: Option<f64>,
}

impl Default for LossConfig {
    fn default() -> Self {
        Self { gamma: 0.99, value_coef: 0.5, entropy_coef: 0.01, gae_lambda: None, value_clip: None, max_grad_norm: Some(0.5) }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossReport {
    pub policy_loss: f64,
    pub value_loss: f64,
    pub entropy: f64,
    pub total: f64,
    /// Global gradient norm before clipping.
    pub grad_norm: f64,
    pub clipped: bool,
}

/// Returns and advantages for a trajectory given current value predictions.
pub fn targets<T: Real>(traj: &Trajectory<T>, values: &[T], cfg: &LossConfig) -> (Vec<T>, Vec<T>) {
    let rewards: Vec<T> = traj.steps.iter().map(|s| T::of(s.reward)).collect();
    let gamma = T::of(cfg.gamma);
    let bootstrap = T::of(traj.bootstrap);
    let returns = discounted_returns(&rewards, bootstrap, gamma, traj.terminal);
    let advantages = match cfg.gae_lambda {
        Some(l) => gae(&rewards, values, bootstrap, gamma, T::of(l), traj.terminal),
        None => returns.iter().zip(values).map(|(&r, &v)| r - v).collect(),
    };
    (returns, advantages)
}

/// Writes the clipped loss gradient into `grads` (overwriting it).
///
/// Loss per step, averaged over the trajectory:
/// `-log π(a|s)·A + c_v·(R - V)² - β·H(π)`, with the advantage `A` held
/// constant.
pub fn compute_gradients<T: Real>(
    params: &NetworkParams<T>,
    traj: &Trajectory<T>,
    cfg: &LossConfig,
    grads: &mut NetworkParams<T>,
) -> Result<LossReport, DrlError> {
    let n = traj.steps.len();
    if n == 0 {
        return Err(DrlError::Shape("empty trajectory".into()));
    }
    let shape = params.shape();
    if grads.shape() != shape {
        return Err(DrlError::Shape("gradient buffer shape differs from parameters".into()));
    }
    if traj.h0.h.len() != shape.hidden {
        return Err(DrlError::Shape(format!("initial hidden has {} values, expected {}", traj.h0.h.len(), shape.hidden)));
    }

    let mut caches: Vec<StepCache<T>> = Vec::with_capacity(n);
    for (t, step) in traj.steps.iter().enumerate() {
        if step.action >= shape.actions {
            return Err(DrlError::Shape(format!("action {} out of range at step {t}", step.action)));
        }
        let h_prev = caches.last().map_or(&traj.h0.h, |c| &c.h);
        let c = forward_cached(params, &step.input, h_prev)?;
        caches.push(c);
    }
    let values: Vec<T> = caches.iter().map(|c| c.value).collect();
    let (returns, advantages) = targets(traj, &values, cfg);

    let inv_n = T::one() / T::of(n as f64);
    let beta = T::of(cfg.entropy_coef);
    let c_v = T::of(cfg.value_coef);
    let two = T::of(2.0);
    let (mut policy_loss, mut value_loss, mut entropy) = (T::zero(), T::zero(), T::zero());
    let mut d_logits = Vec::with_capacity(n);
    let mut d_values = Vec::with_capacity(n);
    for t in 0..n {
        let logp = log_softmax(&caches[t].logits);
        let p: Vec<T> = logp.iter().map(|l| l.exp()).collect();
        let h: T = -p.iter().zip(&logp).map(|(&pi, &li)| pi * li).sum::<T>();
        let a = traj.steps[t].action;
        let adv = advantages[t];
        policy_loss += -logp[a] * adv;
        entropy += h;

        let mut dl: Vec<T> = p.iter().map(|&pi| pi * adv * inv_n).collect();
        dl[a] -= adv * inv_n;
        for j in 0..p.len() {
            dl[j] += beta * p[j] * (logp[j] + h) * inv_n;
        }
        d_logits.push(dl);

        let v = values[t];
        let r = returns[t];
        let (vl, dv) = match cfg.value_clip {
            None => ((v - r) * (v - r), two * (v - r)),
            Some(eps) => {
                let v_old = T::of(traj.steps[t].value);
                let e = T::of(eps);
                let delta = v - v_old;
                let vc = v_old + delta.max(-e).min(e);
                let (l1, l2) = ((v - r) * (v - r), (vc - r) * (vc - r));
                if l1 >= l2 {
                    (l1, two * (v - r))
                } else if delta.abs() < e {
                    (l2, two * (vc - r))
                } else {
                    (l2, T::zero())
                }
            }
        };
        value_loss += vl;
        d_values.push(c_v * dv * inv_n);
    }
    policy_loss *= inv_n;
    value_loss *= inv_n;
    entropy *= inv_n;
    let total = policy_loss + c_v * value_loss - beta * entropy;
    if !total.is_finite() {
        return Err(DrlError::NonFinite {
            policy_loss: policy_loss.to_f64_lossless(),
            value_loss: value_loss.to_f64_lossless(),
            entropy: entropy.to_f64_lossless(),
        });
    }

    grads.fill_zero();
    backward_sequence(params, &caches, &d_logits, &d_values, grads);
    let norm = grads.l2_norm().to_f64_lossless();
    if !norm.is_finite() {
        return Err(DrlError::NonFinite {
            policy_loss: policy_loss.to_f64_lossless(),
            value_loss: value_loss.to_f64_lossless(),
            entropy: entropy.to_f64_lossless(),
        });
    }
    let clipped = clip_global_norm(grads.as_mut_slice(), norm, cfg.max_grad_norm);
    Ok(LossReport {
        policy_loss: policy_loss.to_f64_lossless(),
        value_loss: value_loss.to_f64_lossless(),
        entropy: entropy.to_f64_lossless(),
        total: total.to_f64_lossless(),
        grad_norm: norm,
        clipped,
    })
}

fn clip_global_norm<T: Real>(g: &mut [T], norm: f64, max: Option<f64>) -> bool {
    match max {
        Some(m) if norm > m => {
            let s = T::of(m / norm);
            g.iter_mut().for_each(|v| *v *= s);
            true
        }
        _ => false,
    }
}
