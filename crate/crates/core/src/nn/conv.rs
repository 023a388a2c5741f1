use crate::error::{Error, Result};
use crate::nn::{Grads, Mode, ParamId, Params};
use crate::rng::Rng;
use crate::tensor::{self, Init, Tensor};

/// Convolution over time followed by ReLU and inverted dropout.
#[derive(Clone, Debug)]
pub struct ConvBlock {
    pub kernels: ParamId,
    pub bias: ParamId,
    pub kernel_size: usize,
    pub filters: usize,
    pub dropout: f64,
}

#[derive(Clone, Debug)]
pub struct ConvCache {
    input: Tensor,
    /// Pre-activation sign, `true` where ReLU passed the value.
    active: Vec<bool>,
    /// Per-unit multiplier: 0 for dropped units, `1/(1-p)` for survivors.
    dropout_mask: Option<Vec<f64>>,
}

impl ConvBlock {
    pub fn new(
        params: &mut Params,
        prefix: &str,
        in_dim: usize,
        kernel_size: usize,
        filters: usize,
        dropout: f64,
        rng: &mut Rng,
    ) -> Result<Self> {
        if !(0.0..1.0).contains(&dropout) {
            return Err(Error::Config(format!("dropout {dropout} outside [0, 1)")));
        }
        let kernels = params.add(
            format!("{prefix}.conv.kernels"),
            Tensor::create(&[kernel_size, in_dim, filters], Init::Glorot(rng))?,
            true,
        );
        let bias = params.add(format!("{prefix}.conv.bias"), Tensor::zeros(&[filters]), true);
        Ok(Self {
            kernels,
            bias,
            kernel_size,
            filters,
            dropout,
        })
    }

    pub fn forward(
        &self,
        params: &Params,
        x: &Tensor,
        mode: Mode,
        rng: &mut Rng,
    ) -> Result<(Tensor, ConvCache)> {
        if x.rows() < self.kernel_size {
            return Err(Error::SequenceTooShort {
                len: x.rows(),
                required: self.kernel_size,
            });
        }
        let mut out = tensor::conv1d_valid(x, params.get(self.kernels), params.get(self.bias))?;
        let active: Vec<bool> = out.data().iter().map(|&v| v > 0.0).collect();
        for (v, &a) in out.data_mut().iter_mut().zip(&active) {
            if !a {
                *v = 0.0;
            }
        }
        let dropout_mask = match mode {
            Mode::Train => {
                let keep = 1.0 / (1.0 - self.dropout);
                let mask: Vec<f64> = (0..out.len())
                    .map(|_| if rng.next_f64() < self.dropout { 0.0 } else { keep })
                    .collect();
                for (v, m) in out.data_mut().iter_mut().zip(&mask) {
                    *v *= m;
                }
                Some(mask)
            }
            Mode::Infer => None,
        };
        Ok((
            out,
            ConvCache {
                input: x.clone(),
                active,
                dropout_mask,
            },
        ))
    }

    pub fn backward(
        &self,
        params: &Params,
        cache: &ConvCache,
        grad_out: &Tensor,
        grads: &mut Grads,
    ) -> Result<Tensor> {
        let mut g = grad_out.clone();
        if let Some(mask) = &cache.dropout_mask {
            for (v, m) in g.data_mut().iter_mut().zip(mask) {
                *v *= m;
            }
        }
        for (v, &a) in g.data_mut().iter_mut().zip(&cache.active) {
            if !a {
                *v = 0.0;
            }
        }
        let (d_input, d_kernels, d_bias) =
            tensor::conv1d_valid_backward(&cache.input, params.get(self.kernels), &g)?;
        grads.accumulate(self.kernels, &d_kernels)?;
        grads.accumulate(self.bias, &d_bias)?;
        Ok(d_input)
    }

    pub fn output_len(&self, input_len: usize) -> usize {
        input_len + 1 - self.kernel_size
    }
}

/// Non-overlapping max pooling over time.
#[derive(Clone, Debug)]
pub struct MaxPool {
    pub window: usize,
}

#[derive(Clone, Debug)]
pub struct PoolCache {
    input_shape: Vec<usize>,
    argmax: Vec<usize>,
}

impl MaxPool {
    pub fn forward(&self, x: &Tensor) -> Result<(Tensor, PoolCache)> {
        let (out, argmax) = tensor::maxpool1d(x, self.window)?;
        Ok((
            out,
            PoolCache {
                input_shape: x.shape().to_vec(),
                argmax,
            },
        ))
    }

    pub fn backward(&self, cache: &PoolCache, grad_out: &Tensor) -> Tensor {
        tensor::maxpool1d_backward(&cache.input_shape, &cache.argmax, grad_out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn block(params: &mut Params, dropout: f64) -> ConvBlock {
        let mut rng = Rng::new(11);
        ConvBlock::new(params, "t", 3, 2, 4, dropout, &mut rng).unwrap()
    }

    fn input(seed: u64, rows: usize) -> Tensor {
        let mut rng = Rng::new(seed);
        Tensor::create(&[rows, 3], Init::Uniform { lo: -1.0, hi: 1.0, rng: &mut rng }).unwrap()
    }

    #[test]
    fn relu_saturates_negative_preactivations() {
        let mut params = Params::new();
        let b = block(&mut params, 0.0);
        params.get_mut(b.kernels).fill(0.0);
        params.get_mut(b.bias).fill(-1.0);
        let (out, _) = b.forward(&params, &input(1, 5), Mode::Infer, &mut Rng::new(0)).unwrap();
        assert!(out.data().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn zero_dropout_train_equals_infer() {
        let mut params = Params::new();
        let b = block(&mut params, 0.0);
        let x = input(2, 6);
        let (train, _) = b.forward(&params, &x, Mode::Train, &mut Rng::new(3)).unwrap();
        let (infer, _) = b.forward(&params, &x, Mode::Infer, &mut Rng::new(3)).unwrap();
        assert_eq!(train, infer);
    }

    #[test]
    fn dropout_mask_is_seeded() {
        let mut params = Params::new();
        let b = block(&mut params, 0.5);
        let x = input(4, 8);
        let (a, _) = b.forward(&params, &x, Mode::Train, &mut Rng::new(9)).unwrap();
        let (c, _) = b.forward(&params, &x, Mode::Train, &mut Rng::new(9)).unwrap();
        assert_eq!(a, c);
    }

    #[test]
    fn dropout_rate_is_close_to_p() {
        let mut params = Params::new();
        let mut rng = Rng::new(5);
        let b = ConvBlock::new(&mut params, "t", 1, 1, 100, 0.5, &mut rng).unwrap();
        params.get_mut(b.kernels).fill(0.0);
        params.get_mut(b.bias).fill(1.0);
        let x = Tensor::zeros(&[200, 1]);
        let (out, _) = b.forward(&params, &x, Mode::Train, &mut rng).unwrap();
        let zeros = out.data().iter().filter(|&&v| v == 0.0).count() as f64 / out.len() as f64;
        assert!(out.len() >= 10_000);
        assert!((0.45..=0.55).contains(&zeros), "zero fraction {zeros}");
        assert!(out.data().iter().all(|&v| v == 0.0 || v == 2.0));
    }

    #[test]
    fn too_short_input() {
        let mut params = Params::new();
        let mut rng = Rng::new(5);
        let b = ConvBlock::new(&mut params, "t", 3, 4, 2, 0.0, &mut rng).unwrap();
        assert!(matches!(
            b.forward(&params, &input(1, 3), Mode::Infer, &mut rng),
            Err(Error::SequenceTooShort { len: 3, required: 4 })
        ));
    }
}
