//! Scalar reimplementation of the actor-critic and a finite-difference
//! gradient check built on it.

use nav_arena::drl::{compute_gradients, HiddenState, LossConfig, NetworkParams, NetworkShape, Trajectory, TrajectoryStep};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const TINY: NetworkShape = NetworkShape { input: 8, fc1: 4, fc2: 4, hidden: 4, actions: 3 };

/// Straightforward scalar reimplementation reading the flat layout.
pub struct Naive<'a> {
    pub s: NetworkShape,
    pub p: &'a [f64],
}

impl Naive<'_> {
    fn offsets(&self) -> Vec<usize> {
        let (i, a, b, h, k) = (self.s.input, self.s.fc1, self.s.fc2, self.s.hidden, self.s.actions);
        let lens = [a * i, a, b * a, b, h * b, h * b, h * b, h * h, h * h, h * h, h, h, h, h, k * h, k, h, 1];
        let mut o = vec![0];
        for l in lens {
            o.push(o.last().unwrap() + l);
        }
        o
    }

    fn w(&self, block: usize, row: usize, col: usize, cols: usize) -> f64 {
        self.p[self.offsets()[block] + row * cols + col]
    }

    fn b(&self, block: usize, i: usize) -> f64 {
        self.p[self.offsets()[block] + i]
    }

    pub fn step(&self, x: &[f64], h: &[f64]) -> (Vec<f64>, f64, Vec<f64>) {
        let s = self.s;
        let sig = |v: f64| 1.0 / (1.0 + (-v).exp());
        let a1: Vec<f64> = (0..s.fc1)
            .map(|r| (self.b(1, r) + (0..s.input).map(|c| self.w(0, r, c, s.input) * x[c]).sum::<f64>()).max(0.0))
            .collect();
        let a2: Vec<f64> = (0..s.fc2)
            .map(|r| (self.b(3, r) + (0..s.fc1).map(|c| self.w(2, r, c, s.fc1) * a1[c]).sum::<f64>()).max(0.0))
            .collect();
        let lin = |wb: usize, v: &[f64], r: usize| (0..v.len()).map(|c| self.w(wb, r, c, v.len()) * v[c]).sum::<f64>();
        let hn: Vec<f64> = (0..s.hidden)
            .map(|j| {
                let r = sig(lin(4, &a2, j) + lin(7, h, j) + self.b(10, j));
                let z = sig(lin(5, &a2, j) + lin(8, h, j) + self.b(11, j));
                let n = (lin(6, &a2, j) + self.b(12, j) + r * (lin(9, h, j) + self.b(13, j))).tanh();
                (1.0 - z) * n + z * h[j]
            })
            .collect();
        let logits: Vec<f64> = (0..s.actions).map(|k| self.b(15, k) + lin(14, &hn, k)).collect();
        let value = self.b(17, 0) + (0..s.hidden).map(|j| self.w(16, 0, j, s.hidden) * hn[j]).sum::<f64>();
        (logits, value, hn)
    }

    /// Loss with advantages frozen to `adv`.
    pub fn loss(&self, traj: &Trajectory<f64>, returns: &[f64], adv: &[f64], cfg: &LossConfig) -> f64 {
        let mut h = traj.h0.h.clone();
        let n = traj.steps.len() as f64;
        let mut total = 0.0;
        for (t, st) in traj.steps.iter().enumerate() {
            let (logits, v, hn) = self.step(&st.input, &h);
            h = hn;
            let m = logits.iter().cloned().fold(f64::MIN, f64::max);
            let z: f64 = logits.iter().map(|l| (l - m).exp()).sum();
            let logp: Vec<f64> = logits.iter().map(|l| l - m - z.ln()).collect();
            let ent: f64 = -logp.iter().map(|l| l.exp() * l).sum::<f64>();
            total += -logp[st.action] * adv[t] + cfg.value_coef * (returns[t] - v).powi(2) - cfg.entropy_coef * ent;
        }
        total / n
    }
}

pub fn setup(seed: u64) -> (NetworkParams<f64>, Trajectory<f64>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut p = NetworkParams::init(TINY, &mut rng);
    // Larger actor weights than the default init so policy gradients are not negligible.
    p.as_mut_slice().iter_mut().for_each(|v| *v += rng.random_range(-0.3..0.3));
    let traj = Trajectory {
        h0: HiddenState { h: (0..4).map(|_| rng.random_range(-0.6..0.6)).collect() },
        steps: (0..3)
            .map(|_| TrajectoryStep {
                input: (0..8).map(|_| rng.random_range(-1.0..1.0)).collect(),
                action: rng.random_range(0..3),
                reward: rng.random_range(-1.0..1.0),
                value: 0.0,
            })
            .collect(),
        terminal: false,
        bootstrap: 0.7,
    };
    (p, traj)
}

pub fn returns(traj: &Trajectory<f64>, gamma: f64) -> Vec<f64> {
    let mut acc = if traj.terminal { 0.0 } else { traj.bootstrap };
    let mut out: Vec<f64> = traj.steps.iter().rev().map(|s| {
        acc = s.reward + gamma * acc;
        acc
    }).collect();
    out.reverse();
    out
}

/// Central differences with step 1e-5; relative error `|a-b| / max(|a|, |b|, 1e-7)`.
pub fn max_relative_error(seed: u64, cfg: &LossConfig) -> f64 {
    let (p, traj) = setup(seed);
    let mut g = NetworkParams::zeros(TINY);
    compute_gradients(&p, &traj, cfg, &mut g).unwrap();

    let naive = Naive { s: TINY, p: p.as_slice() };
    let mut h = traj.h0.h.clone();
    let values: Vec<f64> = traj.steps.iter().map(|s| {
        let (_, v, hn) = naive.step(&s.input, &h);
        h = hn;
        v
    }).collect();
    let rets = returns(&traj, cfg.gamma);
    let adv: Vec<f64> = rets.iter().zip(&values).map(|(r, v)| r - v).collect();

    let step = 1e-5;
    let mut worst: f64 = 0.0;
    for i in 0..p.as_slice().len() {
        let mut plus = p.as_slice().to_vec();
        let mut minus = plus.clone();
        plus[i] += step;
        minus[i] -= step;
        let lp = Naive { s: TINY, p: &plus }.loss(&traj, &rets, &adv, cfg);
        let lm = Naive { s: TINY, p: &minus }.loss(&traj, &rets, &adv, cfg);
        let fd = (lp - lm) / (2.0 * step);
        let an = g.as_slice()[i];
        let rel = (fd - an).abs() / fd.abs().max(an.abs()).max(1e-7);
        worst = worst.max(rel);
    }
    worst
}

