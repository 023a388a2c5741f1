//! Embedding tables: GloVe lookup with corpus-trained fallback ("glove++"),
//! aggression-only word vectors, and character-trigram vectors, all backed by
//! a from-scratch skip-gram trainer.

mod build;
mod glove;
mod matrix;
mod skipgram;

pub use build::{
    aggressive_subcorpus, build_aggression_embeddings, build_trigram_embeddings,
    compose_glove_plus_plus, random_trigram_embeddings, trigram_corpus,
};
pub use glove::{load_pretrained, parse_pretrained, Pretrained};
pub use matrix::{EmbeddingMatrix, EmbeddingSource, InputView};
pub use skipgram::{train_skipgram, SkipgramConfig, SkipgramModel};
