use serde::{Deserialize, Serialize};

use super::{CnnModel, Gradients, Scalar};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum OptimizerConfig {
    Sgd {
        lr: f64,
    },
    Adam {
        lr: f64,
        #[serde(default = "default_beta1")]
        beta1: f64,
        #[serde(default = "default_beta2")]
        beta2: f64,
        #[serde(default = "default_eps")]
        eps: f64,
    },
}

fn default_beta1() -> f64 {
    0.9
}
fn default_beta2() -> f64 {
    0.999
}
fn default_eps() -> f64 {
    1e-8
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self::adam(1e-3)
    }
}

impl OptimizerConfig {
    pub fn adam(lr: f64) -> Self {
        Self::Adam {
            lr,
            beta1: default_beta1(),
            beta2: default_beta2(),
            eps: default_eps(),
        }
    }

    pub fn lr(&self) -> f64 {
        match *self {
            Self::Sgd { lr } | Self::Adam { lr, .. } => lr,
        }
    }

    pub fn with_lr(self, lr: f64) -> Self {
        match self {
            Self::Sgd { .. } => Self::Sgd { lr },
            Self::Adam { beta1, beta2, eps, .. } => Self::Adam { lr, beta1, beta2, eps },
        }
    }
}

/// `p <- p - lr * g`
pub fn sgd_update<T: Scalar>(params: &mut [T], grads: &[T], lr: f64) {
    let lr = T::from_f64(lr);
    for (p, &g) in params.iter_mut().zip(grads) {
        *p -= lr * g;
    }
}

/// First and second moment estimates for one parameter tensor.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamMoments<T> {
    pub m: Vec<T>,
    pub v: Vec<T>,
}

impl<T: Scalar> AdamMoments<T> {
    pub fn new(len: usize) -> Self {
        Self {
            m: vec![T::ZERO; len],
            v: vec![T::ZERO; len],
        }
    }

    /// One bias-corrected Adam update; `t` is the 1-based step number.
    #[allow(clippy::too_many_arguments)]
    pub fn update(&mut self, params: &mut [T], grads: &[T], t: u64, lr: f64, beta1: f64, beta2: f64, eps: f64) {
        let c1 = 1.0 - beta1.powi(t as i32);
        let c2 = 1.0 - beta2.powi(t as i32);
        let (b1, b2) = (T::from_f64(beta1), T::from_f64(beta2));
        let (ob1, ob2) = (T::from_f64(1.0 - beta1), T::from_f64(1.0 - beta2));
        let step = T::from_f64(lr / c1);
        let inv_c2 = T::from_f64(1.0 / c2);
        let eps = T::from_f64(eps);
        for i in 0..params.len() {
            let g = grads[i];
            self.m[i] = b1 * self.m[i] + ob1 * g;
            self.v[i] = b2 * self.v[i] + ob2 * g * g;
            params[i] -= step * self.m[i] / ((self.v[i] * inv_c2).sqrt() + eps);
        }
    }
}

/// Optimizer state for a whole model.
#[derive(Debug, Clone)]
pub struct Optimizer<T> {
    config: OptimizerConfig,
    steps: u64,
    moments: Vec<Option<(AdamMoments<T>, AdamMoments<T>)>>,
}

impl<T: Scalar> Optimizer<T> {
    pub fn new(config: OptimizerConfig) -> Self {
        Self {
            config,
            steps: 0,
            moments: Vec::new(),
        }
    }

    pub fn config(&self) -> OptimizerConfig {
        self.config
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }

    /// Applies `grads` to every non-frozen parameterized layer of `model`.
    pub fn step(&mut self, model: &mut CnnModel<T>, grads: &Gradients<T>) {
        self.steps += 1;
        if self.moments.len() < grads.layers.len() {
            self.moments.resize_with(grads.layers.len(), || None);
        }
        for (i, g) in grads.layers.iter().enumerate() {
            let Some(g) = g else { continue };
            if model.is_frozen(i) {
                continue;
            }
            let p = model.params_mut(i).expect("gradient for a layer without parameters");
            match self.config {
                OptimizerConfig::Sgd { lr } => {
                    sgd_update(&mut p.weight, &g.weight, lr);
                    sgd_update(&mut p.bias, &g.bias, lr);
                }
                OptimizerConfig::Adam { lr, beta1, beta2, eps } => {
                    let (mw, mb) = self.moments[i]
                        .get_or_insert_with(|| (AdamMoments::new(p.weight.len()), AdamMoments::new(p.bias.len())));
                    mw.update(&mut p.weight, &g.weight, self.steps, lr, beta1, beta2, eps);
                    mb.update(&mut p.bias, &g.bias, self.steps, lr, beta1, beta2, eps);
                }
            }
        }
    }
}
