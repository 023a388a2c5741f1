//! Ensembles of CNN and capsule-network subnetworks for three-class
//! aggression classification (covert, overt, non-aggressive).
//!
//! The crate covers the whole pipeline: tweet cleaning and encoding
//! ([`preprocess`]), word and character-trigram embeddings ([`embeddings`]),
//! layers with hand-written gradients ([`nn`]), ensemble construction and the
//! DL1/DL2/CN1/CN2 presets ([`model`]), Adam training and evaluation
//! ([`train`]), and dataset/model persistence ([`io`]).

pub mod cli;
pub mod embeddings;
pub mod error;
pub mod io;
pub mod label;
pub mod model;
pub mod nn;
pub mod preprocess;
pub mod rng;
pub mod tensor;
pub mod train;

pub use error::{Error, Result};
pub use label::Class;
pub use rng::Rng;
pub use tensor::Tensor;
