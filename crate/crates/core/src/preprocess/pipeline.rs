use serde::{Deserialize, Serialize};

use super::{encode_sequence, trigram_sequence, CleanText, Cleaner, Vocab, MAX_SEQUENCE_LEN};

/// Encoded views of one text: word ids and, when a trigram vocabulary is
/// present, trigram ids. Both are exactly `max_len` long.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EncodedInput {
    pub words: Vec<usize>,
    pub trigrams: Option<Vec<usize>>,
}

/// Content hashes of every text artifact a trained model depends on.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArtifactHashes {
    pub stopwords: String,
    pub emoji_ranges: String,
    pub vocab: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trigram_vocab: Option<String>,
}

/// Everything needed to turn raw text into model input.
#[derive(Clone, Debug)]
pub struct TextPipeline {
    pub cleaner: Cleaner,
    pub vocab: Vocab,
    pub trigram_vocab: Option<Vocab>,
    pub max_len: usize,
}

impl TextPipeline {
    pub fn new(cleaner: Cleaner, vocab: Vocab, trigram_vocab: Option<Vocab>) -> Self {
        Self {
            cleaner,
            vocab,
            trigram_vocab,
            max_len: MAX_SEQUENCE_LEN,
        }
    }

    pub fn with_max_len(mut self, max_len: usize) -> Self {
        self.max_len = max_len;
        self
    }

    pub fn encode(&self, raw: &str) -> EncodedInput {
        self.encode_clean(&self.cleaner.clean(raw))
    }

    pub fn encode_clean(&self, text: &CleanText) -> EncodedInput {
        EncodedInput {
            words: encode_sequence(&text.tokens, &self.vocab, self.max_len),
            trigrams: self
                .trigram_vocab
                .as_ref()
                .map(|tv| encode_sequence(&trigram_sequence(text), tv, self.max_len)),
        }
    }

    pub fn hashes(&self) -> ArtifactHashes {
        ArtifactHashes {
            stopwords: self.cleaner.stopwords.hash().to_string(),
            emoji_ranges: self.cleaner.emoji.hash().to_string(),
            vocab: self.vocab.hash(),
            trigram_vocab: self.trigram_vocab.as_ref().map(Vocab::hash),
        }
    }
}
