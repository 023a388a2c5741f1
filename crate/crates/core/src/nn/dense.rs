use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nn::{Grads, ParamId, Params};
use crate::rng::Rng;
use crate::tensor::{Init, Tensor};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Relu,
    None,
}

/// Fully connected layer `y = act(W·x + b)` with `W` stored as `[out, in]`.
#[derive(Clone, Debug)]
pub struct Dense {
    pub weight: ParamId,
    pub bias: ParamId,
    pub activation: Activation,
}

#[derive(Clone, Debug)]
pub struct DenseCache {
    input: Vec<f64>,
    output: Vec<f64>,
}

impl Dense {
    pub fn new(
        params: &mut Params,
        prefix: &str,
        inputs: usize,
        outputs: usize,
        activation: Activation,
        rng: &mut Rng,
    ) -> Result<Self> {
        let weight = params.add(
            format!("{prefix}.weight"),
            Tensor::create(&[outputs, inputs], Init::Glorot(rng))?,
            true,
        );
        let bias = params.add(format!("{prefix}.bias"), Tensor::zeros(&[outputs]), true);
        Ok(Self {
            weight,
            bias,
            activation,
        })
    }

    pub fn forward(&self, params: &Params, x: &[f64]) -> Result<(Vec<f64>, DenseCache)> {
        let out = dense_forward(x, params.get(self.weight), params.get(self.bias), self.activation)?;
        Ok((
            out.clone(),
            DenseCache {
                input: x.to_vec(),
                output: out,
            },
        ))
    }

    pub fn backward(
        &self,
        params: &Params,
        cache: &DenseCache,
        grad_out: &[f64],
        grads: &mut Grads,
    ) -> Result<Vec<f64>> {
        let w = params.get(self.weight);
        let (m, n) = (w.rows(), w.cols());
        let g: Vec<f64> = match self.activation {
            Activation::Relu => grad_out
                .iter()
                .zip(&cache.output)
                .map(|(&g, &y)| if y > 0.0 { g } else { 0.0 })
                .collect(),
            Activation::None => grad_out.to_vec(),
        };
        let dw = grads.get_mut(self.weight).data_mut();
        for i in 0..m {
            for j in 0..n {
                dw[i * n + j] += g[i] * cache.input[j];
            }
        }
        let db = grads.get_mut(self.bias).data_mut();
        for (d, gv) in db.iter_mut().zip(&g) {
            *d += gv;
        }
        let wd = w.data();
        let mut dx = vec![0.0; n];
        for i in 0..m {
            for j in 0..n {
                dx[j] += wd[i * n + j] * g[i];
            }
        }
        Ok(dx)
    }

    pub fn outputs(&self, params: &Params) -> usize {
        params.get(self.weight).rows()
    }
}

/// `act(W·x + b)` for `W[m×n]`, `x[n]`, `b[m]`.
pub fn dense_forward(x: &[f64], w: &Tensor, b: &Tensor, activation: Activation) -> Result<Vec<f64>> {
    let (m, n) = (w.rows(), w.cols());
    if x.len() != n || b.len() != m {
        return Err(Error::shape(
            "dense",
            format!("W {:?}, x [{}], b {:?}", w.shape(), x.len(), b.shape()),
        ));
    }
    let wd = w.data();
    let mut out: Vec<f64> = (0..m)
        .map(|i| b.data()[i] + crate::tensor::dot(&wd[i * n..(i + 1) * n], x))
        .collect();
    if activation == Activation::Relu {
        out.iter_mut().for_each(|v| *v = v.max(0.0));
    }
    Ok(out)
}
