use std::collections::HashMap;
use std::path::Path;

use super::{sha256_hex, CleanText};
use crate::error::{Error, Result};

pub const PAD_INDEX: usize = 0;
pub const OOV_INDEX: usize = 1;
pub const PAD_TOKEN: &str = "<pad>";
pub const OOV_TOKEN: &str = "<oov>";

/// Token ↔ index map. Index 0 is padding, 1 is out-of-vocabulary; real tokens
/// start at 2.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Vocab {
    tokens: Vec<String>,
    index: HashMap<String, usize>,
}

impl Default for Vocab {
    fn default() -> Self {
        Self::from_tokens(Vec::<String>::new())
    }
}

impl Vocab {
    /// Vocabulary over `tokens` in the given order, after PAD and OOV.
    pub fn from_tokens<S: Into<String>>(tokens: impl IntoIterator<Item = S>) -> Self {
        let mut all = vec![PAD_TOKEN.to_string(), OOV_TOKEN.to_string()];
        all.extend(tokens.into_iter().map(Into::into));
        let index = all.iter().enumerate().map(|(i, t)| (t.clone(), i)).collect();
        Self { tokens: all, index }
    }

    /// Index of `token`, or [`OOV_INDEX`].
    pub fn lookup(&self, token: &str) -> usize {
        match self.index.get(token) {
            Some(&i) if i > OOV_INDEX => i,
            _ => OOV_INDEX,
        }
    }

    pub fn get(&self, token: &str) -> Option<usize> {
        self.index.get(token).copied().filter(|&i| i > OOV_INDEX)
    }

    pub fn token(&self, index: usize) -> Option<&str> {
        self.tokens.get(index).map(String::as_str)
    }

    /// Size including PAD and OOV.
    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.len() <= 2
    }

    /// Real tokens with their indices, in index order.
    pub fn entries(&self) -> impl Iterator<Item = (usize, &str)> {
        self.tokens.iter().enumerate().skip(2).map(|(i, t)| (i, t.as_str()))
    }

    /// One token per line in index order, PAD and OOV included.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for t in &self.tokens {
            s.push_str(t);
            s.push('\n');
        }
        s
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        if lines.next() != Some(PAD_TOKEN) || lines.next() != Some(OOV_TOKEN) {
            return Err(Error::Format(format!(
                "vocabulary must start with {PAD_TOKEN} and {OOV_TOKEN}"
            )));
        }
        let vocab = Self::from_tokens(lines.map(str::to_string));
        if vocab.index.len() != vocab.tokens.len() {
            return Err(Error::Format("vocabulary contains duplicate tokens".into()));
        }
        Ok(vocab)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text).map_err(|e| Error::Format(format!("{}: {e}", path.display())))
    }

    pub fn hash(&self) -> String {
        sha256_hex(self.to_text().as_bytes())
    }
}

/// Tokens with frequency ≥ `min_count`, ordered by descending frequency and
/// then lexicographically.
pub fn build_vocab<'a, I>(corpus: I, min_count: usize) -> Vocab
where
    I: IntoIterator<Item = &'a CleanText>,
{
    let mut counts: HashMap<&str, usize> = HashMap::new();
    for doc in corpus {
        for t in &doc.tokens {
            *counts.entry(t.as_str()).or_default() += 1;
        }
    }
    let mut kept: Vec<(&str, usize)> = counts.into_iter().filter(|&(_, c)| c >= min_count).collect();
    kept.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
    Vocab::from_tokens(kept.into_iter().map(|(t, _)| t.to_string()))
}

/// Maps tokens to indices, keeps the first `max_len`, pads with 0 at the end.
pub fn encode_sequence(tokens: &[String], vocab: &Vocab, max_len: usize) -> Vec<usize> {
    let mut ids: Vec<usize> = tokens.iter().take(max_len).map(|t| vocab.lookup(t)).collect();
    ids.resize(max_len, PAD_INDEX);
    ids
}

#[cfg(test)]
mod tests {
    use super::*;

    fn doc(tokens: &[&str]) -> CleanText {
        tokens.iter().copied().collect()
    }

    #[test]
    fn frequency_ordering() {
        let corpus = [doc(&["a", "b", "a"])];
        let v = build_vocab(&corpus, 1);
        assert_eq!(v.lookup("a"), 2);
        assert_eq!(v.lookup("b"), 3);
        assert_eq!(v.len(), 4);
        let v3 = build_vocab(&corpus, 3);
        assert_eq!(v3.len(), 2);
        assert_eq!(build_vocab(&corpus, 1), v);
    }

    #[test]
    fn ties_broken_lexicographically() {
        let corpus = [doc(&["z", "y", "x", "y"])];
        let v = build_vocab(&corpus, 1);
        assert_eq!(v.token(2), Some("y"));
        assert_eq!(v.token(3), Some("x"));
        assert_eq!(v.token(4), Some("z"));
    }

    #[test]
    fn encoding_cases() {
        let v = build_vocab(&[doc(&["a"])], 1);
        assert_eq!(encode_sequence(&[], &v, 150), vec![0; 150]);
        let long: Vec<String> = vec!["a".to_string(); 151];
        assert_eq!(encode_sequence(&long, &v, 150), vec![2; 150]);
        let enc = encode_sequence(&["zzz-unseen".to_string()], &v, 150);
        assert_eq!(enc[0], 1);
        assert!(enc[1..].iter().all(|&i| i == 0));
        assert_eq!(v.lookup(PAD_TOKEN), OOV_INDEX);
    }

    #[test]
    fn text_round_trip() {
        let v = build_vocab(&[doc(&["b", "a", "a", "don't"])], 1);
        assert_eq!(Vocab::parse(&v.to_text()).unwrap(), v);
        assert!(Vocab::parse("a\nb\n").is_err());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn encoding_shape(tokens in prop::collection::vec("[a-d]{1,2}", 0..40), max_len in 1usize..30) {
                let v = build_vocab(&[doc(&["a", "b", "aa"])], 1);
                let enc = encode_sequence(&tokens, &v, max_len);
                prop_assert_eq!(enc.len(), max_len);
                let real = tokens.len().min(max_len);
                prop_assert!(enc[..real].iter().all(|&i| i != PAD_INDEX));
                prop_assert!(enc[real..].iter().all(|&i| i == PAD_INDEX));
            }
        }
    }
}
