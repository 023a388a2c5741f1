//! Dataset ingestion and on-disk persistence of models and embeddings.

mod atomic;
mod dataset;
mod persist;

pub use atomic::{write_atomic, StagedDir};
pub use dataset::{load_dataset, merge_datasets, parse_dataset, write_dataset, Dataset, LabeledExample};
pub use persist::{
    load_embeddings, load_model, read_archive, save_embeddings, save_model, write_archive, ArchiveEntry,
    BlobInfo, Manifest, TensorEntry, FORMAT_VERSION, MANIFEST_FILE, WEIGHTS_FILE,
};
