use super::graph::{Gradients, ParamStore};
use super::tensor::Tensor;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdamConfig {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    /// Global gradient-norm ceiling; non-positive disables clipping.
    pub clip_norm: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        AdamConfig {
            lr: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            clip_norm: 5.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    pub step: u64,
    m: Vec<Tensor>,
    v: Vec<Tensor>,
}

impl AdamState {
    pub fn new(params: &ParamStore) -> Self {
        let zeros = || params.iter().map(|(_, _, t)| Tensor::zeros(t.shape())).collect();
        AdamState {
            step: 0,
            m: zeros(),
            v: zeros(),
        }
    }
}

/// One Adam update. Gradients are clipped to `clip_norm` by global norm before
/// the moment update. Returns the pre-clip global norm.
pub fn optimizer_step(
    params: &mut ParamStore,
    grads: &Gradients,
    state: &mut AdamState,
    hyper: &AdamConfig,
) -> Result<f64> {
    if state.m.len() != params.len() {
        return Err(Error::Shape(format!(
            "optimizer state tracks {} tensors, model has {}",
            state.m.len(),
            params.len()
        )));
    }
    grads.check_finite(params)?;
    let norm = grads.global_norm();
    let clip = if hyper.clip_norm > 0.0 && norm > hyper.clip_norm {
        hyper.clip_norm / norm
    } else {
        1.0
    };
    state.step += 1;
    let t = state.step as i32;
    let bc1 = 1.0 - hyper.beta1.powi(t);
    let bc2 = 1.0 - hyper.beta2.powi(t);
    let ids: Vec<_> = params.ids().collect();
    for id in ids {
        let g = grads.get(id).data();
        let (m, v) = (state.m[id.0].data_mut(), state.v[id.0].data_mut());
        let p = params.get_mut(id).data_mut();
        if g.len() != p.len() {
            return Err(Error::Shape(format!(
                "gradient/parameter size mismatch for tensor {}",
                id.0
            )));
        }
        for i in 0..p.len() {
            let gi = g[i] * clip;
            m[i] = hyper.beta1 * m[i] + (1.0 - hyper.beta1) * gi;
            v[i] = hyper.beta2 * v[i] + (1.0 - hyper.beta2) * gi * gi;
            let mhat = m[i] / bc1;
            let vhat = v[i] / bc2;
            p[i] -= hyper.lr * mhat / (vhat.sqrt() + hyper.eps);
        }
    }
    Ok(norm)
}
