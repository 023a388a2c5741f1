use crate::error::{Error, Result};
use crate::tensor::Tensor;

/// Flattens each part row-major and concatenates them in order. Also returns
/// the start offset of each part, for splitting gradients later.
pub fn concat_merge(parts: &[Tensor]) -> Result<(Vec<f64>, Vec<usize>)> {
    if parts.is_empty() {
        return Err(Error::InvalidInput("cannot merge an empty list of parts".into()));
    }
    let mut out = Vec::with_capacity(parts.iter().map(Tensor::len).sum());
    let mut offsets = Vec::with_capacity(parts.len());
    for p in parts {
        offsets.push(out.len());
        out.extend_from_slice(p.data());
    }
    Ok((out, offsets))
}

/// Splits a merged gradient back into tensors shaped like the parts.
pub fn split_merged(grad: &[f64], shapes: &[Vec<usize>]) -> Result<Vec<Tensor>> {
    let mut start = 0;
    shapes
        .iter()
        .map(|shape| {
            let n: usize = shape.iter().product();
            let t = Tensor::new(shape.clone(), grad[start..start + n].to_vec());
            start += n;
            t
        })
        .collect()
}
