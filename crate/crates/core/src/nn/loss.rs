use crate::error::{Error, Result};
use crate::tensor::softmax_slice;

/// Categorical cross-entropy on softmax probabilities.
///
/// Returns `-log softmax(logits)[target]` and its gradient with respect to
/// the logits, `softmax(logits) - onehot(target)`.
pub fn softmax_cross_entropy(logits: &[f64], target: usize) -> Result<(f64, Vec<f64>)> {
    if target >= logits.len() {
        return Err(Error::InvalidLabel(format!(
            "class index {target} out of range for {} classes",
            logits.len()
        )));
    }
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let sum_exp: f64 = logits.iter().map(|&x| (x - max).exp()).sum();
    let loss = max + sum_exp.ln() - logits[target];
    let mut grad = softmax_slice(logits);
    grad[target] -= 1.0;
    Ok((loss, grad))
}
