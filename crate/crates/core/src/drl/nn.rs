//! Recurrent actor-critic network: two ReLU layers, a GRU cell and two
//! linear heads (action logits, state value) over the shared trunk.
//!
//! Parameters live in one flat buffer so the optimizer, gradient clipping
//! and checkpointing treat the network as a single vector.

use rand::Rng;
use rand_distr::{Distribution, Uniform};
use serde::{Deserialize, Serialize};

use crate::scalar::Real;

use super::DrlError;

/// Layer widths.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct NetworkShape {
    pub input: usize,
    pub fc1: usize,
    pub fc2: usize,
    pub hidden: usize,
    pub actions: usize,
}

/// Number of parameter blocks in the flat layout.
pub const BLOCKS: usize = 18;

impl NetworkShape {
    /// 344 lidar bins plus goal distance and angle.
    pub const fn navigation(actions: usize) -> Self {
        Self { input: 346, fc1: 128, fc2: 64, hidden: 64, actions }
    }

    /// Block lengths in storage order: fc1 (w, b), fc2 (w, b), GRU input
    /// weights (r, z, n), GRU recurrent weights (r, z, n), GRU biases
    /// (r, z, input-n, hidden-n), actor (w, b), critic (w, b).
    pub fn block_lens(&self) -> [usize; BLOCKS] {
        let (i, a, b, h, k) = (self.input, self.fc1, self.fc2, self.hidden, self.actions);
        [a * i, a, b * a, b, h * b, h * b, h * b, h * h, h * h, h * h, h, h, h, h, k * h, k, h, 1]
    }

    pub fn param_count(&self) -> usize {
        self.block_lens().iter().sum()
    }

    pub fn validate(&self) -> Result<(), DrlError> {
        if [self.input, self.fc1, self.fc2, self.hidden].contains(&0) || self.actions < 2 {
            return Err(DrlError::Shape(format!("degenerate network shape {self:?}")));
        }
        Ok(())
    }
}

/// Named views into a flat parameter (or gradient) buffer.
pub struct Parts<S> {
    pub w1: S,
    pub b1: S,
    pub w2: S,
    pub b2: S,
    pub w_r: S,
    pub w_z: S,
    pub w_n: S,
    pub u_r: S,
    pub u_z: S,
    pub u_n: S,
    pub b_r: S,
    pub b_z: S,
    pub b_in: S,
    pub b_hn: S,
    pub w_pi: S,
    pub b_pi: S,
    pub w_v: S,
    pub b_v: S,
}

impl<S> Parts<S> {
    fn from_array([w1, b1, w2, b2, w_r, w_z, w_n, u_r, u_z, u_n, b_r, b_z, b_in, b_hn, w_pi, b_pi, w_v, b_v]: [S; BLOCKS]) -> Self {
        Self { w1, b1, w2, b2, w_r, w_z, w_n, u_r, u_z, u_n, b_r, b_z, b_in, b_hn, w_pi, b_pi, w_v, b_v }
    }
}

fn split<'a, T>(mut data: &'a [T], lens: [usize; BLOCKS]) -> [&'a [T]; BLOCKS] {
    lens.map(|n| {
        let (head, tail) = data.split_at(n);
        data = tail;
        head
    })
}

fn split_mut<'a, T>(mut data: &'a mut [T], lens: [usize; BLOCKS]) -> [&'a mut [T]; BLOCKS] {
    lens.map(|n| {
        let (head, tail) = std::mem::take(&mut data).split_at_mut(n);
        data = tail;
        head
    })
}

/// All network weights and biases.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkParams<T> {
    shape: NetworkShape,
    data: Vec<T>,
}

impl<T: Real> NetworkParams<T> {
    pub fn zeros(shape: NetworkShape) -> Self {
        Self { shape, data: vec![T::zero(); shape.param_count()] }
    }

    pub fn from_flat(shape: NetworkShape, data: Vec<T>) -> Result<Self, DrlError> {
        shape.validate()?;
        if data.len() != shape.param_count() {
            return Err(DrlError::Shape(format!(
                "{} parameters for a shape needing {}",
                data.len(),
                shape.param_count()
            )));
        }
        Ok(Self { shape, data })
    }

    /// Uniform fan-in initialization; the actor head starts near zero so the
    /// initial policy is close to uniform.
    pub fn init<R: Rng + ?Sized>(shape: NetworkShape, rng: &mut R) -> Self {
        let mut p = Self::zeros(shape);
        let fill = |block: &mut [T], fan_in: usize, scale: f64, rng: &mut R| {
            let bound = scale / (fan_in as f64).sqrt();
            let dist = Uniform::new_inclusive(-bound, bound).expect("finite bound");
            for w in block.iter_mut() {
                *w = T::of(dist.sample(rng));
            }
        };
        let s = shape;
        let parts = p.parts_mut();
        fill(parts.w1, s.input, 1.0, rng);
        fill(parts.w2, s.fc1, 1.0, rng);
        fill(parts.w_r, s.hidden, 1.0, rng);
        fill(parts.w_z, s.hidden, 1.0, rng);
        fill(parts.w_n, s.hidden, 1.0, rng);
        fill(parts.u_r, s.hidden, 1.0, rng);
        fill(parts.u_z, s.hidden, 1.0, rng);
        fill(parts.u_n, s.hidden, 1.0, rng);
        fill(parts.w_pi, s.hidden, 0.01, rng);
        fill(parts.w_v, s.hidden, 1.0, rng);
        p
    }

    pub fn shape(&self) -> NetworkShape {
        self.shape
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [T] {
        &mut self.data
    }

    pub fn parts(&self) -> Parts<&[T]> {
        Parts::from_array(split(&self.data, self.shape.block_lens()))
    }

    pub fn parts_mut(&mut self) -> Parts<&mut [T]> {
        Parts::from_array(split_mut(&mut self.data, self.shape.block_lens()))
    }

    pub fn fill_zero(&mut self) {
        self.data.iter_mut().for_each(|v| *v = T::zero());
    }

    pub fn l2_norm(&self) -> T {
        self.data.iter().map(|&v| v * v).sum::<T>().sqrt()
    }

    pub fn cast<U: Real>(&self) -> NetworkParams<U> {
        NetworkParams {
            shape: self.shape,
            data: self.data.iter().map(|v| U::of(v.to_f64_lossless())).collect(),
        }
    }
}

/// Recurrent state carried between steps; all components stay in (-1, 1).
#[derive(Debug, Clone, PartialEq)]
pub struct HiddenState<T> {
    pub h: Vec<T>,
}

impl<T: Real> HiddenState<T> {
    pub fn zeros(size: usize) -> Self {
        Self { h: vec![T::zero(); size] }
    }
}

/// Everything a single step's backward pass needs.
#[derive(Debug, Clone)]
pub struct StepCache<T> {
    pub x: Vec<T>,
    pub a1: Vec<T>,
    pub a2: Vec<T>,
    pub h_prev: Vec<T>,
    pub r: Vec<T>,
    pub z: Vec<T>,
    pub n: Vec<T>,
    /// `U_n·h_prev + b_hn`.
    pub hn: Vec<T>,
    pub h: Vec<T>,
    pub logits: Vec<T>,
    pub value: T,
}

#[inline]
pub(crate) fn dot<T: Real>(a: &[T], b: &[T]) -> T {
    debug_assert_eq!(a.len(), b.len());
    // Independent accumulators let the compiler vectorize the reduction.
    let mut acc = [T::zero(); 8];
    let ca = a.chunks_exact(8);
    let cb = b.chunks_exact(8);
    let (ra, rb) = (ca.remainder(), cb.remainder());
    for (x, y) in ca.zip(cb) {
        for k in 0..8 {
            acc[k] += x[k] * y[k];
        }
    }
    let mut tail = T::zero();
    for (x, y) in ra.iter().zip(rb) {
        tail += *x * *y;
    }
    ((acc[0] + acc[4]) + (acc[1] + acc[5])) + ((acc[2] + acc[6]) + (acc[3] + acc[7])) + tail
}

/// `out = W·x + b` for row-major `W`.
#[inline]
fn affine<T: Real>(w: &[T], b: &[T], x: &[T], out: &mut [T]) {
    let cols = x.len();
    for (i, o) in out.iter_mut().enumerate() {
        *o = b[i] + dot(&w[i * cols..(i + 1) * cols], x);
    }
}

/// `out += W·x` for row-major `W`.
#[inline]
fn matvec_acc<T: Real>(w: &[T], x: &[T], out: &mut [T]) {
    let cols = x.len();
    for (i, o) in out.iter_mut().enumerate() {
        *o += dot(&w[i * cols..(i + 1) * cols], x);
    }
}

/// `dW += dy ⊗ x`, `dx += Wᵀ·dy`.
#[inline]
fn linear_backward<T: Real>(w: &[T], x: &[T], dy: &[T], dw: &mut [T], dx: Option<&mut [T]>) {
    let cols = x.len();
    for (i, &g) in dy.iter().enumerate() {
        if g == T::zero() {
            continue;
        }
        let row = &mut dw[i * cols..(i + 1) * cols];
        for (d, &xv) in row.iter_mut().zip(x) {
            *d += g * xv;
        }
    }
    if let Some(dx) = dx {
        for (i, &g) in dy.iter().enumerate() {
            if g == T::zero() {
                continue;
            }
            let row = &w[i * cols..(i + 1) * cols];
            for (d, &wv) in dx.iter_mut().zip(row) {
                *d += g * wv;
            }
        }
    }
}

#[inline]
fn sigmoid<T: Real>(x: T) -> T {
    T::one() / (T::one() + (-x).exp())
}

pub fn softmax<T: Real>(logits: &[T]) -> Vec<T> {
    let m = logits.iter().copied().fold(T::neg_infinity(), T::max);
    let e: Vec<T> = logits.iter().map(|&l| (l - m).exp()).collect();
    let s: T = e.iter().copied().sum();
    e.into_iter().map(|v| v / s).collect()
}

pub fn log_softmax<T: Real>(logits: &[T]) -> Vec<T> {
    let m = logits.iter().copied().fold(T::neg_infinity(), T::max);
    let lse = logits.iter().map(|&l| (l - m).exp()).sum::<T>().ln() + m;
    logits.iter().map(|&l| l - lse).collect()
}

/// One forward step, keeping intermediates for backpropagation.
pub fn forward_cached<T: Real>(params: &NetworkParams<T>, x: &[T], h_prev: &[T]) -> Result<StepCache<T>, DrlError> {
    let s = params.shape;
    if x.len() != s.input {
        return Err(DrlError::Shape(format!("input has {} values, network expects {}", x.len(), s.input)));
    }
    if h_prev.len() != s.hidden {
        return Err(DrlError::Shape(format!("hidden has {} values, network expects {}", h_prev.len(), s.hidden)));
    }
    let p = params.parts();
    let zero = T::zero();

    let mut a1 = vec![zero; s.fc1];
    affine(p.w1, p.b1, x, &mut a1);
    a1.iter_mut().for_each(|v| *v = v.max(zero));
    let mut a2 = vec![zero; s.fc2];
    affine(p.w2, p.b2, &a1, &mut a2);
    a2.iter_mut().for_each(|v| *v = v.max(zero));

    let hs = s.hidden;
    let mut r = vec![zero; hs];
    let mut z = vec![zero; hs];
    let mut n = vec![zero; hs];
    let mut hn = vec![zero; hs];
    affine(p.w_r, p.b_r, &a2, &mut r);
    matvec_acc(p.u_r, h_prev, &mut r);
    affine(p.w_z, p.b_z, &a2, &mut z);
    matvec_acc(p.u_z, h_prev, &mut z);
    affine(p.u_n, p.b_hn, h_prev, &mut hn);
    affine(p.w_n, p.b_in, &a2, &mut n);
    let mut h = vec![zero; hs];
    for j in 0..hs {
        r[j] = sigmoid(r[j]);
        z[j] = sigmoid(z[j]);
        n[j] = (n[j] + r[j] * hn[j]).tanh();
        h[j] = (T::one() - z[j]) * n[j] + z[j] * h_prev[j];
    }

    let mut logits = vec![zero; s.actions];
    affine(p.w_pi, p.b_pi, &h, &mut logits);
    let value = p.b_v[0] + dot(p.w_v, &h);

    Ok(StepCache { x: x.to_vec(), a1, a2, h_prev: h_prev.to_vec(), r, z, n, hn, h, logits, value })
}

/// Output of an inference step.
#[derive(Debug, Clone, PartialEq)]
pub struct StepOutput<T> {
    pub logits: Vec<T>,
    pub value: T,
    pub hidden: HiddenState<T>,
}

pub fn forward<T: Real>(params: &NetworkParams<T>, x: &[T], hidden: &HiddenState<T>) -> Result<StepOutput<T>, DrlError> {
    let c = forward_cached(params, x, &hidden.h)?;
    Ok(StepOutput { logits: c.logits, value: c.value, hidden: HiddenState { h: c.h } })
}

/// Backpropagation through time over a contiguous sequence of steps.
///
/// `d_logits[t]` and `d_values[t]` are the loss derivatives at the heads of
/// step `t`; gradients are accumulated into `grads`. The gradient flowing
/// into the sequence's initial hidden state is dropped (truncated BPTT).
pub fn backward_sequence<T: Real>(
    params: &NetworkParams<T>,
    caches: &[StepCache<T>],
    d_logits: &[Vec<T>],
    d_values: &[T],
    grads: &mut NetworkParams<T>,
) {
    let s = params.shape;
    let p = params.parts();
    let g = grads.parts_mut();
    let zero = T::zero();
    let one = T::one();
    let hs = s.hidden;

    let mut dh_next = vec![zero; hs];
    let mut dh = vec![zero; hs];
    let mut dh_prev = vec![zero; hs];
    let mut dr_pre = vec![zero; hs];
    let mut dz_pre = vec![zero; hs];
    let mut dn_pre = vec![zero; hs];
    let mut dhn = vec![zero; hs];
    let mut da2 = vec![zero; s.fc2];
    let mut da1 = vec![zero; s.fc1];

    for t in (0..caches.len()).rev() {
        let c = &caches[t];
        // Heads.
        dh.copy_from_slice(&dh_next);
        linear_backward(p.w_pi, &c.h, &d_logits[t], g.w_pi, Some(&mut dh));
        for (b, &d) in g.b_pi.iter_mut().zip(&d_logits[t]) {
            *b += d;
        }
        let dv = d_values[t];
        if dv != zero {
            for j in 0..hs {
                g.w_v[j] += dv * c.h[j];
                dh[j] += dv * p.w_v[j];
            }
            g.b_v[0] += dv;
        }

        // GRU cell.
        for j in 0..hs {
            let dn = dh[j] * (one - c.z[j]);
            let dz = dh[j] * (c.h_prev[j] - c.n[j]);
            dh_prev[j] = dh[j] * c.z[j];
            dn_pre[j] = dn * (one - c.n[j] * c.n[j]);
            let dr = dn_pre[j] * c.hn[j];
            dhn[j] = dn_pre[j] * c.r[j];
            dz_pre[j] = dz * c.z[j] * (one - c.z[j]);
            dr_pre[j] = dr * c.r[j] * (one - c.r[j]);
        }
        da2.iter_mut().for_each(|v| *v = zero);
        linear_backward(p.w_n, &c.a2, &dn_pre, g.w_n, Some(&mut da2));
        linear_backward(p.w_z, &c.a2, &dz_pre, g.w_z, Some(&mut da2));
        linear_backward(p.w_r, &c.a2, &dr_pre, g.w_r, Some(&mut da2));
        linear_backward(p.u_n, &c.h_prev, &dhn, g.u_n, Some(&mut dh_prev));
        linear_backward(p.u_z, &c.h_prev, &dz_pre, g.u_z, Some(&mut dh_prev));
        linear_backward(p.u_r, &c.h_prev, &dr_pre, g.u_r, Some(&mut dh_prev));
        for j in 0..hs {
            g.b_in[j] += dn_pre[j];
            g.b_hn[j] += dhn[j];
            g.b_z[j] += dz_pre[j];
            g.b_r[j] += dr_pre[j];
        }
        dh_next.copy_from_slice(&dh_prev);

        // Trunk.
        for (d, &a) in da2.iter_mut().zip(&c.a2) {
            if a <= zero {
                *d = zero;
            }
        }
        da1.iter_mut().for_each(|v| *v = zero);
        linear_backward(p.w2, &c.a1, &da2, g.w2, Some(&mut da1));
        for (b, &d) in g.b2.iter_mut().zip(&da2) {
            *b += d;
        }
        for (d, &a) in da1.iter_mut().zip(&c.a1) {
            if a <= zero {
                *d = zero;
            }
        }
        linear_backward(p.w1, &c.x, &da1, g.w1, None);
        for (b, &d) in g.b1.iter_mut().zip(&da1) {
            *b += d;
        }
    }
}
