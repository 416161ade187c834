use crate::scalar::Real;

/// `R_t = r_t + γ·R_{t+1}`, seeded with 0 at a terminal end and with
/// `bootstrap` otherwise.
pub fn discounted_returns<T: Real>(rewards: &[T], bootstrap: T, gamma: T, terminal: bool) -> Vec<T> {
    let mut out = vec![T::zero(); rewards.len()];
    let mut acc = if terminal { T::zero() } else { bootstrap };
    for (o, &r) in out.iter_mut().zip(rewards).rev() {
        acc = r + gamma * acc;
        *o = acc;
    }
    out
}

/// Generalized advantage estimates over one trajectory.
pub fn gae<T: Real>(rewards: &[T], values: &[T], bootstrap: T, gamma: T, lambda: T, terminal: bool) -> Vec<T> {
    assert_eq!(rewards.len(), values.len());
    let mut out = vec![T::zero(); rewards.len()];
    let mut next_value = if terminal { T::zero() } else { bootstrap };
    let mut acc = T::zero();
    for t in (0..rewards.len()).rev() {
        let delta = rewards[t] + gamma * next_value - values[t];
        acc = delta + gamma * lambda * acc;
        out[t] = acc;
        next_value = values[t];
    }
    out
}
