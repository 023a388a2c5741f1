//! Dense row-major tensors and the handful of kernels the layers are built on.
//!
//! Everything is `f64`. Ops are pure: they never mutate their inputs and
//! never touch global state, so results are bitwise reproducible.

use crate::error::{Error, Result};
use crate::rng::Rng;

#[derive(Clone, Debug, PartialEq)]
pub struct Tensor {
    shape: Vec<usize>,
    data: Vec<f64>,
}

/// Initialisation scheme for [`Tensor::create`].
pub enum Init<'r> {
    Zeros,
    Constant(f64),
    Uniform { lo: f64, hi: f64, rng: &'r mut Rng },
    /// Uniform in `±sqrt(6 / (fan_in + fan_out))`.
    Glorot(&'r mut Rng),
}

fn check_shape(shape: &[usize]) -> Result<()> {
    if shape.is_empty() {
        return Err(Error::InvalidShape {
            shape: shape.to_vec(),
            reason: "shape must have at least one dimension".into(),
        });
    }
    if shape.contains(&0) {
        return Err(Error::InvalidShape {
            shape: shape.to_vec(),
            reason: "every dimension must be >= 1".into(),
        });
    }
    Ok(())
}

/// Fan-in and fan-out used by Glorot initialisation. Leading dimensions of a
/// rank >= 3 tensor are treated as the receptive field (conv kernels).
pub fn fans(shape: &[usize]) -> (usize, usize) {
    match shape.len() {
        0 => (1, 1),
        1 => (shape[0], shape[0]),
        n => {
            let receptive: usize = shape[..n - 2].iter().product();
            (receptive * shape[n - 2], receptive * shape[n - 1])
        }
    }
}

impl Tensor {
    pub fn new(shape: Vec<usize>, data: Vec<f64>) -> Result<Self> {
        check_shape(&shape)?;
        let n: usize = shape.iter().product();
        if n != data.len() {
            return Err(Error::InvalidShape {
                shape,
                reason: format!("data length {} does not match", data.len()),
            });
        }
        Ok(Self { shape, data })
    }

    pub fn create(shape: &[usize], init: Init<'_>) -> Result<Self> {
        check_shape(shape)?;
        let n: usize = shape.iter().product();
        let data = match init {
            Init::Zeros => vec![0.0; n],
            Init::Constant(c) => vec![c; n],
            Init::Uniform { lo, hi, rng } => (0..n).map(|_| rng.uniform(lo, hi)).collect(),
            Init::Glorot(rng) => {
                let (fan_in, fan_out) = fans(shape);
                let limit = (6.0 / (fan_in + fan_out) as f64).sqrt();
                (0..n).map(|_| rng.uniform(-limit, limit)).collect()
            }
        };
        Ok(Self {
            shape: shape.to_vec(),
            data,
        })
    }

    /// Zero tensor. Panics on an invalid shape; use [`Tensor::create`] for
    /// shapes that come from user input.
    pub fn zeros(shape: &[usize]) -> Self {
        Self::create(shape, Init::Zeros).expect("invalid shape for zeros")
    }

    pub fn from_vec(data: Vec<f64>) -> Self {
        let n = data.len();
        Self::new(vec![n], data).expect("empty vector")
    }

    pub fn matrix(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        Self::new(vec![rows, cols], data)
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn rows(&self) -> usize {
        self.shape[0]
    }

    pub fn cols(&self) -> usize {
        self.shape[1..].iter().product()
    }

    pub fn row(&self, r: usize) -> &[f64] {
        let c = self.cols();
        &self.data[r * c..(r + 1) * c]
    }

    pub fn reshape(mut self, shape: Vec<usize>) -> Result<Self> {
        check_shape(&shape)?;
        if shape.iter().product::<usize>() != self.data.len() {
            return Err(Error::shape(
                "reshape",
                format!("{:?} -> {:?}", self.shape, shape),
            ));
        }
        self.shape = shape;
        Ok(self)
    }

    pub fn fill(&mut self, value: f64) {
        self.data.iter_mut().for_each(|x| *x = value);
    }

    /// `self += other` elementwise; shapes must agree.
    pub fn add_assign(&mut self, other: &Tensor) -> Result<()> {
        if self.shape != other.shape {
            return Err(Error::shape(
                "add_assign",
                format!("{:?} vs {:?}", self.shape, other.shape),
            ));
        }
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += b;
        }
        Ok(())
    }

    pub fn scale(&mut self, factor: f64) {
        self.data.iter_mut().for_each(|x| *x *= factor);
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }
}

fn require_rank(t: &Tensor, rank: usize, op: &'static str) -> Result<()> {
    if t.shape.len() != rank {
        return Err(Error::shape(
            op,
            format!("expected rank {rank}, got shape {:?}", t.shape),
        ));
    }
    Ok(())
}

/// `a[m×k] · b[k×n]`.
pub fn matmul(a: &Tensor, b: &Tensor) -> Result<Tensor> {
    require_rank(a, 2, "matmul")?;
    require_rank(b, 2, "matmul")?;
    let (m, k) = (a.shape[0], a.shape[1]);
    let (k2, n) = (b.shape[0], b.shape[1]);
    if k != k2 {
        return Err(Error::shape(
            "matmul",
            format!("inner dims {k} and {k2} differ"),
        ));
    }
    let mut out = vec![0.0; m * n];
    for i in 0..m {
        let out_row = &mut out[i * n..(i + 1) * n];
        for p in 0..k {
            let aip = a.data[i * k + p];
            if aip == 0.0 {
                continue;
            }
            let b_row = &b.data[p * n..(p + 1) * n];
            for (o, bv) in out_row.iter_mut().zip(b_row) {
                *o += aip * bv;
            }
        }
    }
    Tensor::new(vec![m, n], out)
}

/// `aᵀ · b` for `a[k×m]`, `b[k×n]`, without materialising the transpose.
pub fn matmul_tn(a: &Tensor, b: &Tensor) -> Result<Tensor> {
    require_rank(a, 2, "matmul_tn")?;
    require_rank(b, 2, "matmul_tn")?;
    let (k, m) = (a.shape[0], a.shape[1]);
    let (k2, n) = (b.shape[0], b.shape[1]);
    if k != k2 {
        return Err(Error::shape("matmul_tn", format!("row counts {k} and {k2} differ")));
    }
    let mut out = vec![0.0; m * n];
    for p in 0..k {
        let a_row = &a.data[p * m..(p + 1) * m];
        let b_row = &b.data[p * n..(p + 1) * n];
        for (i, &av) in a_row.iter().enumerate() {
            if av == 0.0 {
                continue;
            }
            let out_row = &mut out[i * n..(i + 1) * n];
            for (o, bv) in out_row.iter_mut().zip(b_row) {
                *o += av * bv;
            }
        }
    }
    Tensor::new(vec![m, n], out)
}

/// `a · bᵀ` for `a[m×k]`, `b[n×k]`.
pub fn matmul_nt(a: &Tensor, b: &Tensor) -> Result<Tensor> {
    require_rank(a, 2, "matmul_nt")?;
    require_rank(b, 2, "matmul_nt")?;
    let (m, k) = (a.shape[0], a.shape[1]);
    let (n, k2) = (b.shape[0], b.shape[1]);
    if k != k2 {
        return Err(Error::shape("matmul_nt", format!("inner dims {k} and {k2} differ")));
    }
    let mut out = vec![0.0; m * n];
    for i in 0..m {
        let a_row = &a.data[i * k..(i + 1) * k];
        for j in 0..n {
            let b_row = &b.data[j * k..(j + 1) * k];
            out[i * n + j] = a_row.iter().zip(b_row).map(|(x, y)| x * y).sum();
        }
    }
    Tensor::new(vec![m, n], out)
}

/// Valid (unpadded) 1-D convolution over time.
///
/// `out[t, o] = bias[o] + Σ_{i<k, c<d_in} input[t+i, c] · kernels[i, c, o]`
pub fn conv1d_valid(input: &Tensor, kernels: &Tensor, bias: &Tensor) -> Result<Tensor> {
    require_rank(input, 2, "conv1d_valid")?;
    require_rank(kernels, 3, "conv1d_valid")?;
    let (t_len, d_in) = (input.shape[0], input.shape[1]);
    let (k, kd_in, d_out) = (kernels.shape[0], kernels.shape[1], kernels.shape[2]);
    if kd_in != d_in {
        return Err(Error::shape(
            "conv1d_valid",
            format!("kernel input width {kd_in} != input width {d_in}"),
        ));
    }
    if bias.shape != [d_out] {
        return Err(Error::shape(
            "conv1d_valid",
            format!("bias shape {:?} != [{d_out}]", bias.shape),
        ));
    }
    if t_len < k {
        return Err(Error::SequenceTooShort {
            len: t_len,
            required: k,
        });
    }
    let out_len = t_len - k + 1;
    let mut out = Vec::with_capacity(out_len * d_out);
    for _ in 0..out_len {
        out.extend_from_slice(&bias.data);
    }
    // The window [t, t+k) flattened over (i, c) is contiguous in row-major
    // input, and kernels flattened over (i, c) is a (k·d_in)×d_out matrix.
    let window = k * d_in;
    for t in 0..out_len {
        let patch = &input.data[t * d_in..t * d_in + window];
        let out_row = &mut out[t * d_out..(t + 1) * d_out];
        for (p, &x) in patch.iter().enumerate() {
            if x == 0.0 {
                continue;
            }
            let w_row = &kernels.data[p * d_out..(p + 1) * d_out];
            for (o, w) in out_row.iter_mut().zip(w_row) {
                *o += x * w;
            }
        }
    }
    Tensor::new(vec![out_len, d_out], out)
}

/// Gradients of [`conv1d_valid`] with respect to input, kernels and bias.
pub fn conv1d_valid_backward(
    input: &Tensor,
    kernels: &Tensor,
    grad_out: &Tensor,
) -> Result<(Tensor, Tensor, Tensor)> {
    let (t_len, d_in) = (input.shape[0], input.shape[1]);
    let (k, _, d_out) = (kernels.shape[0], kernels.shape[1], kernels.shape[2]);
    let out_len = t_len + 1 - k;
    if grad_out.shape != [out_len, d_out] {
        return Err(Error::shape(
            "conv1d_valid_backward",
            format!("grad shape {:?} != [{out_len}, {d_out}]", grad_out.shape),
        ));
    }
    let window = k * d_in;
    let mut d_input = vec![0.0; t_len * d_in];
    let mut d_kernels = vec![0.0; window * d_out];
    let mut d_bias = vec![0.0; d_out];
    for t in 0..out_len {
        let g = &grad_out.data[t * d_out..(t + 1) * d_out];
        for (db, gv) in d_bias.iter_mut().zip(g) {
            *db += gv;
        }
        let patch = &input.data[t * d_in..t * d_in + window];
        let d_patch = &mut d_input[t * d_in..t * d_in + window];
        for p in 0..window {
            let w_row = &kernels.data[p * d_out..(p + 1) * d_out];
            let dw_row = &mut d_kernels[p * d_out..(p + 1) * d_out];
            let x = patch[p];
            let mut acc = 0.0;
            for o in 0..d_out {
                acc += w_row[o] * g[o];
                dw_row[o] += x * g[o];
            }
            d_patch[p] += acc;
        }
    }
    Ok((
        Tensor::new(vec![t_len, d_in], d_input)?,
        Tensor::new(kernels.shape.clone(), d_kernels)?,
        Tensor::new(vec![d_out], d_bias)?,
    ))
}

/// Non-overlapping max pooling over time. Trailing rows that do not fill a
/// window are dropped. Returns the pooled tensor and, for each output element,
/// the flat index of the winning input element (first maximum on ties).
pub fn maxpool1d(input: &Tensor, window: usize) -> Result<(Tensor, Vec<usize>)> {
    require_rank(input, 2, "maxpool1d")?;
    if window == 0 {
        return Err(Error::InvalidInput("pool window must be >= 1".into()));
    }
    let (t_len, d) = (input.shape[0], input.shape[1]);
    if t_len < window {
        return Err(Error::SequenceTooShort {
            len: t_len,
            required: window,
        });
    }
    let out_len = t_len / window;
    let mut out = Vec::with_capacity(out_len * d);
    let mut argmax = Vec::with_capacity(out_len * d);
    for w in 0..out_len {
        for c in 0..d {
            let mut best = (w * window) * d + c;
            for t in w * window + 1..(w + 1) * window {
                let idx = t * d + c;
                if input.data[idx] > input.data[best] {
                    best = idx;
                }
            }
            out.push(input.data[best]);
            argmax.push(best);
        }
    }
    Ok((Tensor::new(vec![out_len, d], out)?, argmax))
}

/// Routes pooled gradients back to the winning positions.
pub fn maxpool1d_backward(input_shape: &[usize], argmax: &[usize], grad_out: &Tensor) -> Tensor {
    let mut d_input = Tensor::zeros(input_shape);
    for (&idx, g) in argmax.iter().zip(&grad_out.data) {
        d_input.data[idx] += g;
    }
    d_input
}

/// Numerically stable softmax of a slice (max subtraction).
pub fn softmax_slice(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|&x| (x - max).exp()).collect();
    let sum: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / sum).collect()
}

pub fn softmax(logits: &Tensor) -> Result<Tensor> {
    if logits.shape.len() != 1 {
        return Err(Error::shape(
            "softmax",
            format!("expected a vector, got {:?}", logits.shape),
        ));
    }
    Ok(Tensor::from_vec(softmax_slice(&logits.data)))
}

/// Backward of softmax given its output `p`: `p ⊙ (g − ⟨p, g⟩)`.
pub fn softmax_backward_slice(p: &[f64], grad: &[f64]) -> Vec<f64> {
    let dot: f64 = p.iter().zip(grad).map(|(a, b)| a * b).sum();
    p.iter().zip(grad).map(|(pi, gi)| pi * (gi - dot)).collect()
}

pub fn l2_norm(v: &Tensor) -> f64 {
    v.data.iter().map(|x| x * x).sum::<f64>().sqrt()
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
