//! Tweet cleaning, tokenisation, vocabularies and fixed-length encoding.

mod clean;
mod pipeline;
mod resources;
mod vocab;

pub use clean::{char_trigrams, clean_text, squash_repeats, trigram_sequence, CleanText, Cleaner};
pub use pipeline::{ArtifactHashes, EncodedInput, TextPipeline};
pub use resources::{sha256_hex, EmojiRanges, Stopwords};
pub use vocab::{build_vocab, encode_sequence, Vocab, OOV_INDEX, OOV_TOKEN, PAD_INDEX, PAD_TOKEN};

/// Sequence length every input is padded or truncated to.
pub const MAX_SEQUENCE_LEN: usize = 150;
