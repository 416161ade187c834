use serde::{Deserialize, Serialize};

use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdamParams {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl Default for AdamParams {
    fn default() -> Self {
        Self { learning_rate: 0.00025, beta1: 0.9, beta2: 0.999, epsilon: 1e-5 }
    }
}

/// Adam with bias correction; moments are kept per parameter.
#[derive(Debug, Clone)]
pub struct Adam<T> {
    params: AdamParams,
    m: Vec<T>,
    v: Vec<T>,
    t: u64,
}

impl<T: Real> Adam<T> {
    pub fn new(params: AdamParams, n: usize) -> Self {
        Self { params, m: vec![T::zero(); n], v: vec![T::zero(); n], t: 0 }
    }

    pub fn steps(&self) -> u64 {
        self.t
    }

    pub fn step(&mut self, theta: &mut [T], grad: &[T]) {
        assert_eq!(theta.len(), self.m.len());
        assert_eq!(grad.len(), self.m.len());
        self.t += 1;
        let p = self.params;
        let b1 = T::of(p.beta1);
        let b2 = T::of(p.beta2);
        let one = T::one();
        let bc1 = 1.0 - p.beta1.powi(self.t as i32);
        let bc2 = 1.0 - p.beta2.powi(self.t as i32);
        let step_size = T::of(p.learning_rate / bc1);
        let bc2_sqrt = T::of(bc2.sqrt());
        let eps = T::of(p.epsilon);
        for i in 0..theta.len() {
            let g = grad[i];
            self.m[i] = b1 * self.m[i] + (one - b1) * g;
            self.v[i] = b2 * self.v[i] + (one - b2) * g * g;
            let denom = self.v[i].sqrt() / bc2_sqrt + eps;
            theta[i] -= step_size * self.m[i] / denom;
        }
    }
}
