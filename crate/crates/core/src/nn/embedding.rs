use crate::error::{Error, Result};
use crate::nn::{Grads, ParamId, Params};
use crate::tensor::Tensor;

/// Index of the padding row. It never receives gradient.
pub const PAD_INDEX: usize = 0;

/// Row lookup into a `|V|×d` table.
pub fn embedding_lookup(ids: &[usize], table: &Tensor) -> Result<Tensor> {
    let (rows, dim) = (table.rows(), table.cols());
    let mut out = Vec::with_capacity(ids.len() * dim);
    for &id in ids {
        if id >= rows {
            return Err(Error::OutOfVocabIndex {
                id,
                vocab_size: rows,
            });
        }
        out.extend_from_slice(table.row(id));
    }
    if ids.is_empty() {
        return Err(Error::InvalidInput("empty id sequence".into()));
    }
    Tensor::new(vec![ids.len(), dim], out)
}

/// Scatter-adds output gradients into the table rows that were used,
/// skipping the padding row.
pub fn embedding_scatter(ids: &[usize], grad_out: &Tensor, d_table: &mut Tensor) {
    let dim = d_table.cols();
    let data = d_table.data_mut();
    for (pos, &id) in ids.iter().enumerate() {
        if id == PAD_INDEX {
            continue;
        }
        let g = grad_out.row(pos);
        for (d, gv) in data[id * dim..(id + 1) * dim].iter_mut().zip(g) {
            *d += gv;
        }
    }
}

#[derive(Clone, Debug)]
pub struct Embedding {
    pub table: ParamId,
}

impl Embedding {
    pub fn forward(&self, params: &Params, ids: &[usize]) -> Result<Tensor> {
        embedding_lookup(ids, params.get(self.table))
    }

    /// No-op when the table is frozen.
    pub fn backward(&self, params: &Params, ids: &[usize], grad_out: &Tensor, grads: &mut Grads) {
        if params.is_trainable(self.table) {
            embedding_scatter(ids, grad_out, grads.get_mut(self.table));
        }
    }

    pub fn dim(&self, params: &Params) -> usize {
        params.get(self.table).cols()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn eye3() -> Tensor {
        Tensor::matrix(3, 3, vec![0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0]).unwrap()
    }

    #[test]
    fn lookup_cases() {
        let table = Tensor::matrix(3, 2, vec![0.0, 0.0, 1.0, 2.0, 3.0, 4.0]).unwrap();
        let out = embedding_lookup(&[2, 2], &table).unwrap();
        assert_eq!(out.row(0), out.row(1));
        assert_eq!(embedding_lookup(&[0], &table).unwrap().data(), &[0.0, 0.0]);
        assert_eq!(embedding_lookup(&[1], &eye3()).unwrap().data(), &[0.0, 1.0, 0.0]);
        assert!(matches!(
            embedding_lookup(&[3], &table),
            Err(Error::OutOfVocabIndex { id: 3, vocab_size: 3 })
        ));
    }

    #[test]
    fn pad_row_gets_no_gradient() {
        let mut params = Params::new();
        let table = params.add("emb", eye3(), true);
        let layer = Embedding { table };
        let mut grads = Grads::zeros_like(&params);
        let g = Tensor::matrix(3, 3, vec![1.0; 9]).unwrap();
        layer.backward(&params, &[0, 2, 2], &g, &mut grads);
        assert_eq!(grads.dense(table).row(0), &[0.0; 3]);
        assert_eq!(grads.dense(table).row(2), &[2.0; 3]);

        params.set_trainable(table, false);
        let mut frozen = Grads::zeros_like(&params);
        layer.backward(&params, &[1], &Tensor::matrix(1, 3, vec![1.0; 3]).unwrap(), &mut frozen);
        assert!(frozen.get(table).is_none());
    }
}
