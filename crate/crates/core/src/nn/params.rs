use crate::error::{Error, Result};
use crate::tensor::Tensor;

/// Handle to a tensor inside a [`Params`] store.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct ParamId(pub(crate) usize);

impl ParamId {
    pub fn index(self) -> usize {
        self.0
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Param {
    pub name: String,
    pub value: Tensor,
    pub trainable: bool,
}

/// Named parameter tensors, in registration order. Layers keep [`ParamId`]s
/// into the store; gradients live in a separate [`Grads`] of matching shapes.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Params {
    entries: Vec<Param>,
}

impl Params {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, name: impl Into<String>, value: Tensor, trainable: bool) -> ParamId {
        self.entries.push(Param {
            name: name.into(),
            value,
            trainable,
        });
        ParamId(self.entries.len() - 1)
    }

    pub fn get(&self, id: ParamId) -> &Tensor {
        &self.entries[id.0].value
    }

    pub fn get_mut(&mut self, id: ParamId) -> &mut Tensor {
        &mut self.entries[id.0].value
    }

    pub fn is_trainable(&self, id: ParamId) -> bool {
        self.entries[id.0].trainable
    }

    pub fn set_trainable(&mut self, id: ParamId, trainable: bool) {
        self.entries[id.0].trainable = trainable;
    }

    pub fn find(&self, name: &str) -> Option<ParamId> {
        self.entries.iter().position(|p| p.name == name).map(ParamId)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (ParamId, &Param)> {
        self.entries.iter().enumerate().map(|(i, p)| (ParamId(i), p))
    }

    pub fn iter_mut(&mut self) -> impl Iterator<Item = (ParamId, &mut Param)> {
        self.entries.iter_mut().enumerate().map(|(i, p)| (ParamId(i), p))
    }

    /// Number of scalar values, optionally restricted to trainable tensors.
    pub fn count(&self, trainable_only: bool) -> usize {
        self.entries
            .iter()
            .filter(|p| p.trainable || !trainable_only)
            .map(|p| p.value.len())
            .sum()
    }
}

/// Gradient accumulators, one per parameter, always shaped like it. Storage
/// is allocated on first write, so frozen tables cost nothing.
#[derive(Clone, Debug, PartialEq)]
pub struct Grads {
    shapes: Vec<Vec<usize>>,
    tensors: Vec<Option<Tensor>>,
}

impl Grads {
    pub fn zeros_like(params: &Params) -> Self {
        Self {
            shapes: params.entries.iter().map(|p| p.value.shape().to_vec()).collect(),
            tensors: vec![None; params.entries.len()],
        }
    }

    /// The accumulated gradient, or `None` if nothing was written.
    pub fn get(&self, id: ParamId) -> Option<&Tensor> {
        self.tensors[id.0].as_ref()
    }

    /// The accumulated gradient, materialising zeros if nothing was written.
    pub fn dense(&self, id: ParamId) -> Tensor {
        self.tensors[id.0]
            .clone()
            .unwrap_or_else(|| Tensor::zeros(&self.shapes[id.0]))
    }

    pub fn get_mut(&mut self, id: ParamId) -> &mut Tensor {
        let shape = &self.shapes[id.0];
        self.tensors[id.0].get_or_insert_with(|| Tensor::zeros(shape))
    }

    /// Adds `t` into the accumulator for `id`.
    pub fn accumulate(&mut self, id: ParamId, t: &Tensor) -> Result<()> {
        self.get_mut(id).add_assign(t)
    }

    pub fn add(&mut self, other: &Grads) -> Result<()> {
        if self.shapes != other.shapes {
            return Err(Error::shape("grads add", "different parameter layouts"));
        }
        for (i, t) in other.tensors.iter().enumerate() {
            if let Some(t) = t {
                self.accumulate(ParamId(i), t)?;
            }
        }
        Ok(())
    }

    pub fn scale(&mut self, factor: f64) {
        self.tensors.iter_mut().flatten().for_each(|t| t.scale(factor));
    }

    pub fn zero(&mut self) {
        self.tensors.iter_mut().for_each(|t| *t = None);
    }

    pub fn shape(&self, id: ParamId) -> &[usize] {
        &self.shapes[id.0]
    }

    pub fn len(&self) -> usize {
        self.tensors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tensors.is_empty()
    }
}
