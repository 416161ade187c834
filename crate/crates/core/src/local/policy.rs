use rand::Rng;

use crate::drl::{forward, softmax, DrlError, HiddenState, NetworkParams};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PolicyMode {
    Greedy,
    Sample,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PolicyDecision<T> {
    pub index: usize,
    pub probabilities: Vec<T>,
    pub value: T,
    pub hidden: HiddenState<T>,
}

/// Argmax with first-index ties, or a draw from the distribution.
pub fn select_action<T: Real, R: Rng + ?Sized>(probs: &[T], mode: PolicyMode, rng: &mut R) -> usize {
    match mode {
        PolicyMode::Greedy => {
            let mut best = 0;
            for (i, &p) in probs.iter().enumerate() {
                if p > probs[best] {
                    best = i;
                }
            }
            best
        }
        PolicyMode::Sample => {
            let u: f64 = rng.random();
            let mut acc = 0.0;
            for (i, p) in probs.iter().enumerate() {
                acc += p.to_f64_lossless();
                if u < acc {
                    return i;
                }
            }
            probs.len() - 1
        }
    }
}

/// One policy step on a prepared network input.
pub fn policy_plan<T: Real, R: Rng + ?Sized>(
    input: &[T],
    params: &NetworkParams<T>,
    hidden: &HiddenState<T>,
    mode: PolicyMode,
    rng: &mut R,
) -> Result<PolicyDecision<T>, DrlError> {
    let out = forward(params, input, hidden)?;
    let probabilities = softmax(&out.logits);
    let index = select_action(&probabilities, mode, rng);
    Ok(PolicyDecision { index, probabilities, value: out.value, hidden: out.hidden })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn uniform_greedy_takes_first() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert_eq!(select_action(&[0.25f64; 4], PolicyMode::Greedy, &mut rng), 0);
    }

    #[test]
    fn dominant_logit_wins_in_both_modes() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let p = softmax(&[0.0f64, 100.0, 0.0]);
        assert!(p[1] > 1.0 - 1e-9);
        for _ in 0..1000 {
            assert_eq!(select_action(&p, PolicyMode::Sample, &mut rng), 1);
        }
        assert_eq!(select_action(&p, PolicyMode::Greedy, &mut rng), 1);
    }
}
