//! Adam training, evaluation metrics, prediction and feature export.

pub mod adam;
pub mod features;
pub mod metrics;
pub mod predict;
pub mod trainer;

pub use adam::{AdamConfig, AdamState};
pub use features::{export_features, FeatureTable};
pub use metrics::{confusion_matrix, weighted_f1, ClassMetrics, ConfusionMatrix, EvalReport};
pub use predict::{argmax_class, evaluate, predict, predict_encoded, Prediction};
pub use trainer::{
    encode_dataset, stratified_holdout, train, EpochLog, TrainConfig, TrainLog, TrainingExample,
};
