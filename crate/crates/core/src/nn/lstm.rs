//! LSTM and bidirectional LSTM with full backpropagation through time.
//!
//! Gate pre-activations are laid out `[i | f | g | o]` in blocks of `units`:
//!
//! ```text
//! z = x_t·W_x + h_{t-1}·W_h + b
//! i = σ(z_i)  f = σ(z_f)  g = tanh(z_g)  o = σ(z_o)
//! c_t = f ⊙ c_{t-1} + i ⊙ g
//! h_t = o ⊙ tanh(c_t)
//! ```

use crate::error::{Error, Result};
use crate::nn::{Grads, ParamId, Params};
use crate::rng::Rng;
use crate::tensor::{Init, Tensor};

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// One cell step on explicit weights. Returns `(h, c, gates)` where `gates`
/// holds the activated `[i | f | g | o]` values.
pub fn lstm_cell_step(
    x: &[f64],
    h_prev: &[f64],
    c_prev: &[f64],
    w_x: &Tensor,
    w_h: &Tensor,
    b: &Tensor,
) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let units = h_prev.len();
    let width = 4 * units;
    let mut z = b.data().to_vec();
    for (p, &xv) in x.iter().enumerate() {
        if xv == 0.0 {
            continue;
        }
        for (zk, w) in z.iter_mut().zip(&w_x.data()[p * width..(p + 1) * width]) {
            *zk += xv * w;
        }
    }
    for (p, &hv) in h_prev.iter().enumerate() {
        if hv == 0.0 {
            continue;
        }
        for (zk, w) in z.iter_mut().zip(&w_h.data()[p * width..(p + 1) * width]) {
            *zk += hv * w;
        }
    }
    let mut gates = z;
    for (k, v) in gates.iter_mut().enumerate() {
        *v = if k / units == 2 { v.tanh() } else { sigmoid(*v) };
    }
    let mut h = vec![0.0; units];
    let mut c = vec![0.0; units];
    for u in 0..units {
        let (i, f, g, o) = (gates[u], gates[units + u], gates[2 * units + u], gates[3 * units + u]);
        c[u] = f * c_prev[u] + i * g;
        h[u] = o * c[u].tanh();
    }
    (h, c, gates)
}

/// One direction of an LSTM.
#[derive(Clone, Debug)]
pub struct LstmDirection {
    pub w_x: ParamId,
    pub w_h: ParamId,
    pub bias: ParamId,
    pub units: usize,
}

#[derive(Clone, Debug)]
pub struct LstmCache {
    inputs: Tensor,
    /// `h_t` for t = 0..T, with `hs[0]` the zero initial state.
    hs: Vec<Vec<f64>>,
    cs: Vec<Vec<f64>>,
    gates: Vec<Vec<f64>>,
}

impl LstmDirection {
    /// Glorot weights; forget-gate bias 1, other biases 0.
    pub fn new(params: &mut Params, prefix: &str, in_dim: usize, units: usize, rng: &mut Rng) -> Result<Self> {
        let w_x = params.add(
            format!("{prefix}.w_x"),
            Tensor::create(&[in_dim, 4 * units], Init::Glorot(rng))?,
            true,
        );
        let w_h = params.add(
            format!("{prefix}.w_h"),
            Tensor::create(&[units, 4 * units], Init::Glorot(rng))?,
            true,
        );
        let mut b = Tensor::zeros(&[4 * units]);
        b.data_mut()[units..2 * units].iter_mut().for_each(|v| *v = 1.0);
        let bias = params.add(format!("{prefix}.bias"), b, true);
        Ok(Self { w_x, w_h, bias, units })
    }

    /// Runs the sequence in the given order; returns `[T × units]`.
    pub fn forward(&self, params: &Params, x: &Tensor) -> Result<(Tensor, LstmCache)> {
        let t_len = x.rows();
        if t_len == 0 {
            return Err(Error::InvalidInput("empty sequence".into()));
        }
        let (w_x, w_h, b) = (params.get(self.w_x), params.get(self.w_h), params.get(self.bias));
        if w_x.rows() != x.cols() {
            return Err(Error::shape(
                "lstm",
                format!("input width {} vs W_x {:?}", x.cols(), w_x.shape()),
            ));
        }
        let mut hs = vec![vec![0.0; self.units]];
        let mut cs = vec![vec![0.0; self.units]];
        let mut gates = Vec::with_capacity(t_len);
        let mut out = Vec::with_capacity(t_len * self.units);
        for t in 0..t_len {
            let (h, c, g) = lstm_cell_step(x.row(t), &hs[t], &cs[t], w_x, w_h, b);
            out.extend_from_slice(&h);
            hs.push(h);
            cs.push(c);
            gates.push(g);
        }
        Ok((
            Tensor::new(vec![t_len, self.units], out)?,
            LstmCache {
                inputs: x.clone(),
                hs,
                cs,
                gates,
            },
        ))
    }

    pub fn backward(
        &self,
        params: &Params,
        cache: &LstmCache,
        grad_out: &Tensor,
        grads: &mut Grads,
    ) -> Result<Tensor> {
        let units = self.units;
        let width = 4 * units;
        let t_len = cache.inputs.rows();
        let in_dim = cache.inputs.cols();
        let (w_x, w_h) = (params.get(self.w_x).data(), params.get(self.w_h).data());
        let mut d_wx = vec![0.0; in_dim * width];
        let mut d_wh = vec![0.0; units * width];
        let mut d_b = vec![0.0; width];
        let mut d_x = vec![0.0; t_len * in_dim];
        let mut d_h_next = vec![0.0; units];
        let mut d_c_next = vec![0.0; units];
        for t in (0..t_len).rev() {
            let gates = &cache.gates[t];
            let c = &cache.cs[t + 1];
            let c_prev = &cache.cs[t];
            let h_prev = &cache.hs[t];
            let mut dz = vec![0.0; width];
            for u in 0..units {
                let (i, f, g, o) = (gates[u], gates[units + u], gates[2 * units + u], gates[3 * units + u]);
                let dh = grad_out.row(t)[u] + d_h_next[u];
                let tc = c[u].tanh();
                let dc = d_c_next[u] + dh * o * (1.0 - tc * tc);
                dz[u] = dc * g * i * (1.0 - i);
                dz[units + u] = dc * c_prev[u] * f * (1.0 - f);
                dz[2 * units + u] = dc * i * (1.0 - g * g);
                dz[3 * units + u] = dh * tc * o * (1.0 - o);
                d_c_next[u] = dc * f;
            }
            for (db, dzk) in d_b.iter_mut().zip(&dz) {
                *db += dzk;
            }
            let x = cache.inputs.row(t);
            for p in 0..in_dim {
                let w_row = &w_x[p * width..(p + 1) * width];
                let dw_row = &mut d_wx[p * width..(p + 1) * width];
                let mut acc = 0.0;
                for k in 0..width {
                    dw_row[k] += x[p] * dz[k];
                    acc += w_row[k] * dz[k];
                }
                d_x[t * in_dim + p] = acc;
            }
            for p in 0..units {
                let w_row = &w_h[p * width..(p + 1) * width];
                let dw_row = &mut d_wh[p * width..(p + 1) * width];
                let mut acc = 0.0;
                for k in 0..width {
                    dw_row[k] += h_prev[p] * dz[k];
                    acc += w_row[k] * dz[k];
                }
                d_h_next[p] = acc;
            }
        }
        grads.accumulate(self.w_x, &Tensor::new(vec![in_dim, width], d_wx)?)?;
        grads.accumulate(self.w_h, &Tensor::new(vec![units, width], d_wh)?)?;
        grads.accumulate(self.bias, &Tensor::new(vec![width], d_b)?)?;
        Tensor::new(vec![t_len, in_dim], d_x)
    }
}

fn reverse_rows(x: &Tensor) -> Tensor {
    let t_len = x.rows();
    let mut data = Vec::with_capacity(x.len());
    for t in (0..t_len).rev() {
        data.extend_from_slice(x.row(t));
    }
    Tensor::new(x.shape().to_vec(), data).expect("same shape")
}

/// Bidirectional LSTM. Output row `t` is `[forward h_t | backward h_t]`, where
/// the backward direction reads the sequence from the end.
#[derive(Clone, Debug)]
pub struct BiLstm {
    pub forward: LstmDirection,
    pub backward: LstmDirection,
}

#[derive(Clone, Debug)]
pub struct BiLstmCache {
    forward: LstmCache,
    backward: LstmCache,
}

impl BiLstm {
    pub fn new(params: &mut Params, prefix: &str, in_dim: usize, units: usize, rng: &mut Rng) -> Result<Self> {
        Ok(Self {
            forward: LstmDirection::new(params, &format!("{prefix}.bilstm.fwd"), in_dim, units, rng)?,
            backward: LstmDirection::new(params, &format!("{prefix}.bilstm.bwd"), in_dim, units, rng)?,
        })
    }

    pub fn units(&self) -> usize {
        self.forward.units
    }

    pub fn forward(&self, params: &Params, x: &Tensor) -> Result<(Tensor, BiLstmCache)> {
        let units = self.units();
        let (fwd, fwd_cache) = self.forward.forward(params, x)?;
        let (bwd_rev, bwd_cache) = self.backward.forward(params, &reverse_rows(x))?;
        let bwd = reverse_rows(&bwd_rev);
        let t_len = x.rows();
        let mut out = Vec::with_capacity(t_len * 2 * units);
        for t in 0..t_len {
            out.extend_from_slice(fwd.row(t));
            out.extend_from_slice(bwd.row(t));
        }
        Ok((
            Tensor::new(vec![t_len, 2 * units], out)?,
            BiLstmCache {
                forward: fwd_cache,
                backward: bwd_cache,
            },
        ))
    }

    pub fn backward(
        &self,
        params: &Params,
        cache: &BiLstmCache,
        grad_out: &Tensor,
        grads: &mut Grads,
    ) -> Result<Tensor> {
        let units = self.units();
        let t_len = grad_out.rows();
        let mut g_fwd = Vec::with_capacity(t_len * units);
        let mut g_bwd = Vec::with_capacity(t_len * units);
        for t in 0..t_len {
            g_fwd.extend_from_slice(&grad_out.row(t)[..units]);
        }
        for t in (0..t_len).rev() {
            g_bwd.extend_from_slice(&grad_out.row(t)[units..]);
        }
        let mut dx = self.forward.backward(
            params,
            &cache.forward,
            &Tensor::new(vec![t_len, units], g_fwd)?,
            grads,
        )?;
        let dx_rev = self.backward.backward(
            params,
            &cache.backward,
            &Tensor::new(vec![t_len, units], g_bwd)?,
            grads,
        )?;
        dx.add_assign(&reverse_rows(&dx_rev))?;
        Ok(dx)
    }
}
