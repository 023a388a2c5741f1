//! Capsule layer: squashing non-linearity and dynamic routing by agreement.
//!
//! Each timestep of the input sequence is treated as one lower-level capsule.
//! Predictions for every output capsule come from a transformation matrix
//! shared across positions:
//!
//! ```text
//! û[t, j, :] = x[t, :] · W[:, j·d .. (j+1)·d]
//! ```
//!
//! Routing starts from zero agreement logits `b` and, for each iteration,
//! computes couplings `c = softmax_j(b)`, weighted sums `s_j = Σ_i c_ij û_ij`,
//! outputs `v_j = squash(s_j)`, and (except after the last iteration) raises
//! `b_ij` by the agreement `û_ij · v_j`. The backward pass differentiates the
//! whole unrolled loop, couplings included.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nn::{Grads, ParamId, Params};
use crate::rng::Rng;
use crate::tensor::{self, dot, softmax_backward_slice, softmax_slice, Init, Tensor};

/// Added under the square root of the norm so that `squash(0) = 0`.
pub const SQUASH_EPS: f64 = 1e-9;

pub const DEFAULT_ROUTING_ITERATIONS: usize = 3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CapsuleLayerConfig {
    pub num_output_capsules: usize,
    pub capsule_dim: usize,
    pub routing_iterations: usize,
}

impl CapsuleLayerConfig {
    pub fn new(num_output_capsules: usize, capsule_dim: usize) -> Self {
        Self {
            num_output_capsules,
            capsule_dim,
            routing_iterations: DEFAULT_ROUTING_ITERATIONS,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.num_output_capsules == 0 || self.capsule_dim == 0 || self.routing_iterations == 0 {
            return Err(Error::Config(format!(
                "capsule config needs positive capsules, dim and iterations: {self:?}"
            )));
        }
        Ok(())
    }

    pub fn output_len(&self) -> usize {
        self.num_output_capsules * self.capsule_dim
    }
}

/// `v = (‖s‖² / (1 + ‖s‖²)) · s / sqrt(‖s‖² + ε)`
pub fn squash(s: &[f64]) -> Vec<f64> {
    let q: f64 = s.iter().map(|x| x * x).sum();
    let g = q / ((1.0 + q) * (q + SQUASH_EPS).sqrt());
    s.iter().map(|x| g * x).collect()
}

/// Vector-Jacobian product of [`squash`] at `s`.
///
/// With `q = ‖s‖²` and `v = g(q)·s`, the Jacobian is `g·I + 2g'(q)·s sᵀ`, so
/// `ds = g·dv + 2g'(q)·(s·dv)·s`.
pub fn squash_backward(s: &[f64], grad_v: &[f64]) -> Vec<f64> {
    let q: f64 = s.iter().map(|x| x * x).sum();
    let root = (q + SQUASH_EPS).sqrt();
    let g = q / ((1.0 + q) * root);
    // g'(q) simplified so it stays finite at q = 0.
    let g_prime = ((q + SQUASH_EPS) - 0.5 * q * (1.0 + q))
        / ((1.0 + q) * (1.0 + q) * (q + SQUASH_EPS) * root);
    let sd = dot(s, grad_v);
    s.iter()
        .zip(grad_v)
        .map(|(&si, &gi)| g * gi + 2.0 * g_prime * sd * si)
        .collect()
}

/// Final routing state: agreement logits, couplings and predictions.
#[derive(Clone, Debug, PartialEq)]
pub struct RoutingState {
    /// `[N_in × N_out]`
    pub logits: Tensor,
    /// `[N_in × N_out]`, each row a softmax of the matching logits row.
    pub couplings: Tensor,
    /// `[N_in × N_out × d]`
    pub predictions: Tensor,
}

/// Everything the backward pass needs: couplings, pre-squash sums and outputs
/// for each routing iteration.
#[derive(Clone, Debug)]
pub struct RoutingTrace {
    pub couplings: Vec<Vec<f64>>,
    pub sums: Vec<Vec<f64>>,
    pub outputs: Vec<Vec<f64>>,
}

fn routing_dims(u_hat: &Tensor) -> Result<(usize, usize, usize)> {
    match *u_hat.shape() {
        [n_in, n_out, d] => Ok((n_in, n_out, d)),
        ref s => Err(Error::shape(
            "dynamic_routing",
            format!("expected [N_in, N_out, d], got {s:?}"),
        )),
    }
}

/// Routing by agreement over predictions `û[N_in × N_out × d]`.
pub fn dynamic_routing(u_hat: &Tensor, iterations: usize) -> Result<(Tensor, RoutingState)> {
    let (v, state, _) = dynamic_routing_traced(u_hat, iterations)?;
    Ok((v, state))
}

pub fn dynamic_routing_traced(
    u_hat: &Tensor,
    iterations: usize,
) -> Result<(Tensor, RoutingState, RoutingTrace)> {
    if iterations == 0 {
        return Err(Error::InvalidInput("routing needs at least one iteration".into()));
    }
    let (n_in, n_out, d) = routing_dims(u_hat)?;
    let u = u_hat.data();
    let mut b = vec![0.0; n_in * n_out];
    let mut trace = RoutingTrace {
        couplings: Vec::with_capacity(iterations),
        sums: Vec::with_capacity(iterations),
        outputs: Vec::with_capacity(iterations),
    };
    for r in 0..iterations {
        let mut c = Vec::with_capacity(n_in * n_out);
        for i in 0..n_in {
            c.extend(softmax_slice(&b[i * n_out..(i + 1) * n_out]));
        }
        let mut s = vec![0.0; n_out * d];
        for i in 0..n_in {
            for j in 0..n_out {
                let cij = c[i * n_out + j];
                let pred = &u[(i * n_out + j) * d..(i * n_out + j + 1) * d];
                for (sk, pk) in s[j * d..(j + 1) * d].iter_mut().zip(pred) {
                    *sk += cij * pk;
                }
            }
        }
        let mut v = Vec::with_capacity(n_out * d);
        for j in 0..n_out {
            v.extend(squash(&s[j * d..(j + 1) * d]));
        }
        if r + 1 < iterations {
            for i in 0..n_in {
                for j in 0..n_out {
                    let pred = &u[(i * n_out + j) * d..(i * n_out + j + 1) * d];
                    b[i * n_out + j] += dot(pred, &v[j * d..(j + 1) * d]);
                }
            }
        }
        trace.couplings.push(c);
        trace.sums.push(s);
        trace.outputs.push(v);
    }
    let v = Tensor::new(vec![n_out, d], trace.outputs[iterations - 1].clone())?;
    let state = RoutingState {
        logits: Tensor::new(vec![n_in, n_out], b)?,
        couplings: Tensor::new(vec![n_in, n_out], trace.couplings[iterations - 1].clone())?,
        predictions: u_hat.clone(),
    };
    Ok((v, state, trace))
}

/// Gradient of the routed output with respect to the predictions `û`,
/// differentiating through every iteration's couplings.
pub fn dynamic_routing_backward(u_hat: &Tensor, trace: &RoutingTrace, grad_v: &[f64]) -> Result<Tensor> {
    let (n_in, n_out, d) = routing_dims(u_hat)?;
    let u = u_hat.data();
    let iterations = trace.outputs.len();
    let mut d_u = vec![0.0; n_in * n_out * d];
    // Gradient with respect to the logits entering the iteration after r.
    let mut d_b_next = vec![0.0; n_in * n_out];
    for r in (0..iterations).rev() {
        let c = &trace.couplings[r];
        let s = &trace.sums[r];
        let v = &trace.outputs[r];
        let mut d_v = if r + 1 == iterations {
            grad_v.to_vec()
        } else {
            vec![0.0; n_out * d]
        };
        if r + 1 < iterations {
            // b_next = b + û·v
            for i in 0..n_in {
                for j in 0..n_out {
                    let g = d_b_next[i * n_out + j];
                    if g == 0.0 {
                        continue;
                    }
                    let base = (i * n_out + j) * d;
                    for k in 0..d {
                        d_v[j * d + k] += g * u[base + k];
                        d_u[base + k] += g * v[j * d + k];
                    }
                }
            }
        }
        let mut d_s = Vec::with_capacity(n_out * d);
        for j in 0..n_out {
            d_s.extend(squash_backward(&s[j * d..(j + 1) * d], &d_v[j * d..(j + 1) * d]));
        }
        let mut d_c = vec![0.0; n_in * n_out];
        for i in 0..n_in {
            for j in 0..n_out {
                let base = (i * n_out + j) * d;
                let ds_j = &d_s[j * d..(j + 1) * d];
                d_c[i * n_out + j] = dot(&u[base..base + d], ds_j);
                let cij = c[i * n_out + j];
                for k in 0..d {
                    d_u[base + k] += cij * ds_j[k];
                }
            }
        }
        // b_next depends on b through the identity term as well.
        let mut d_b = d_b_next;
        for i in 0..n_in {
            let row = softmax_backward_slice(&c[i * n_out..(i + 1) * n_out], &d_c[i * n_out..(i + 1) * n_out]);
            for (db, g) in d_b[i * n_out..(i + 1) * n_out].iter_mut().zip(row) {
                *db += g;
            }
        }
        d_b_next = d_b;
    }
    Tensor::new(u_hat.shape().to_vec(), d_u)
}

/// Capsule layer over a `[T × d_in]` sequence with one transformation matrix
/// `W[d_in × (N_out·d)]` shared by every position.
#[derive(Clone, Debug)]
pub struct CapsuleLayer {
    pub weight: ParamId,
    pub config: CapsuleLayerConfig,
}

#[derive(Clone, Debug)]
pub struct CapsuleCache {
    input: Tensor,
    u_hat: Tensor,
    trace: RoutingTrace,
}

impl CapsuleCache {
    pub fn trace(&self) -> &RoutingTrace {
        &self.trace
    }
}

impl CapsuleLayer {
    pub fn new(
        params: &mut Params,
        prefix: &str,
        in_dim: usize,
        config: CapsuleLayerConfig,
        rng: &mut Rng,
    ) -> Result<Self> {
        config.validate()?;
        let weight = params.add(
            format!("{prefix}.capsule.weight"),
            Tensor::create(&[in_dim, config.output_len()], Init::Glorot(rng))?,
            true,
        );
        Ok(Self { weight, config })
    }

    pub fn forward(&self, params: &Params, x: &Tensor) -> Result<(Tensor, CapsuleCache)> {
        let (v, cache) = capsule_forward(x, params.get(self.weight), &self.config)?;
        Ok((v, cache))
    }

    pub fn backward(
        &self,
        params: &Params,
        cache: &CapsuleCache,
        grad_out: &Tensor,
        grads: &mut Grads,
    ) -> Result<Tensor> {
        let d_u = dynamic_routing_backward(&cache.u_hat, &cache.trace, grad_out.data())?;
        let t_len = cache.input.rows();
        let d_u = d_u.reshape(vec![t_len, self.config.output_len()])?;
        grads.accumulate(self.weight, &tensor::matmul_tn(&cache.input, &d_u)?)?;
        tensor::matmul_nt(&d_u, params.get(self.weight))
    }
}

/// Forward pass of the capsule layer on explicit weights.
pub fn capsule_forward(
    x: &Tensor,
    weight: &Tensor,
    config: &CapsuleLayerConfig,
) -> Result<(Tensor, CapsuleCache)> {
    config.validate()?;
    if x.shape().len() != 2 || x.rows() == 0 {
        return Err(Error::shape("capsule", format!("input shape {:?}", x.shape())));
    }
    if weight.shape() != [x.cols(), config.output_len()] {
        return Err(Error::shape(
            "capsule",
            format!(
                "weight {:?} does not map width {} to {}",
                weight.shape(),
                x.cols(),
                config.output_len()
            ),
        ));
    }
    let t_len = x.rows();
    let u_hat = tensor::matmul(x, weight)?.reshape(vec![
        t_len,
        config.num_output_capsules,
        config.capsule_dim,
    ])?;
    let (v, _, trace) = dynamic_routing_traced(&u_hat, config.routing_iterations)?;
    Ok((
        v,
        CapsuleCache {
            input: x.clone(),
            u_hat,
            trace,
        },
    ))
}
