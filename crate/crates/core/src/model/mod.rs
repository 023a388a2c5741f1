//! Declarative subnetwork/ensemble configs, the four shipped presets, and the
//! assembled model.

mod config;
mod ensemble;

pub use config::{preset, EnsembleConfig, Preset, Reducer, SubnetworkSpec, DEFAULT_CONV_FILTERS, DEFAULT_DENSE_HIDDEN};
pub use ensemble::{build_model, FeatureSource, Model, Subnetwork};
