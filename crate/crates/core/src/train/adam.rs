use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nn::{Grads, Params};
use crate::tensor::Tensor;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AdamConfig {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        Self {
            lr: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }
}

/// First and second moments for every trainable parameter. Frozen
/// parameters carry no state.
#[derive(Clone, Debug, PartialEq)]
pub struct AdamState {
    pub config: AdamConfig,
    pub m: Vec<Option<Tensor>>,
    pub v: Vec<Option<Tensor>>,
    pub t: u64,
}

impl AdamState {
    pub fn new(params: &Params, config: AdamConfig) -> Self {
        let m: Vec<Option<Tensor>> = params
            .iter()
            .map(|(_, p)| p.trainable.then(|| Tensor::zeros(p.value.shape())))
            .collect();
        Self {
            config,
            v: m.clone(),
            m,
            t: 0,
        }
    }

    /// One bias-corrected Adam update of every trainable parameter. A
    /// parameter with no recorded gradient is treated as having gradient 0.
    pub fn step(&mut self, params: &mut Params, grads: &Grads) -> Result<()> {
        if grads.len() != params.len() || self.m.len() != params.len() {
            return Err(Error::shape(
                "adam_step",
                format!(
                    "{} parameters, {} gradients, {} moment slots",
                    params.len(),
                    grads.len(),
                    self.m.len()
                ),
            ));
        }
        for (id, p) in params.iter() {
            if grads.shape(id) != p.value.shape() {
                return Err(Error::shape(
                    "adam_step",
                    format!("{}: gradient {:?} vs parameter {:?}", p.name, grads.shape(id), p.value.shape()),
                ));
            }
        }
        self.t += 1;
        let AdamConfig { lr, beta1, beta2, eps } = self.config;
        let c1 = 1.0 - beta1.powi(self.t as i32);
        let c2 = 1.0 - beta2.powi(self.t as i32);
        for (id, p) in params.iter_mut() {
            if !p.trainable {
                continue;
            }
            let i = id.index();
            let (Some(m), Some(v)) = (self.m[i].as_mut(), self.v[i].as_mut()) else {
                return Err(Error::shape(
                    "adam_step",
                    format!("{} became trainable after the optimizer was created", p.name),
                ));
            };
            let g = grads.get(id);
            let theta = p.value.data_mut();
            let moments = theta.iter_mut().zip(m.data_mut()).zip(v.data_mut());
            for (k, ((th, mk), vk)) in moments.enumerate() {
                let gk = g.map_or(0.0, |g| g.data()[k]);
                *mk = beta1 * *mk + (1.0 - beta1) * gk;
                *vk = beta2 * *vk + (1.0 - beta2) * gk * gk;
                *th -= lr * (*mk / c1) / ((*vk / c2).sqrt() + eps);
            }
        }
        Ok(())
    }
}
