//! Layers with hand-written backward passes.
//!
//! Every layer follows the same pattern: `forward` reads parameters from a
//! [`Params`] store and returns its output plus a cache; `backward` consumes
//! the cache and an output gradient, adds parameter gradients into a
//! [`Grads`] and returns the gradient with respect to its input.

pub mod capsule;
pub mod conv;
pub mod dense;
pub mod embedding;
pub mod gradcheck;
pub mod loss;
pub mod lstm;
pub mod merge;
pub mod params;

pub use capsule::{dynamic_routing, squash, CapsuleLayer, CapsuleLayerConfig, RoutingState};
pub use conv::{ConvBlock, MaxPool};
pub use dense::{Activation, Dense};
pub use embedding::Embedding;
pub use loss::softmax_cross_entropy;
pub use lstm::{BiLstm, LstmDirection};
pub use merge::concat_merge;
pub use params::{Grads, Param, ParamId, Params};

/// Whether stochastic layers (dropout) are active.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Train,
    Infer,
}
