use std::collections::HashSet;
use std::path::Path;

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

const ENGLISH_STOPWORDS: &str = include_str!("../../resources/stopwords_en.txt");
const EMOJI_RANGES: &str = include_str!("../../resources/emoji_ranges.txt");

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Stopword list: one token per line, UTF-8, LF-terminated. The hash of the
/// source text is carried along so model manifests can pin it.
#[derive(Clone, Debug)]
pub struct Stopwords {
    words: HashSet<String>,
    source: String,
    hash: String,
}

impl Stopwords {
    /// The bundled English list.
    pub fn english() -> Self {
        Self::parse(ENGLISH_STOPWORDS)
    }

    pub fn empty() -> Self {
        Self::parse("")
    }

    pub fn parse(text: &str) -> Self {
        let words = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty())
            .map(str::to_lowercase)
            .collect();
        Self {
            words,
            source: text.to_string(),
            hash: sha256_hex(text.as_bytes()),
        }
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(Self::parse(&text))
    }

    pub fn contains(&self, token: &str) -> bool {
        self.words.contains(token)
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn hash(&self) -> &str {
        &self.hash
    }

    pub fn source(&self) -> &str {
        &self.source
    }
}

impl<S: AsRef<str>> FromIterator<S> for Stopwords {
    fn from_iter<I: IntoIterator<Item = S>>(iter: I) -> Self {
        let mut text = String::new();
        for w in iter {
            text.push_str(w.as_ref());
            text.push('\n');
        }
        Self::parse(&text)
    }
}

/// Inclusive code point ranges removed as emoji. One hex range per line
/// (`START..END` or a single code point); `#` starts a comment.
#[derive(Clone, Debug)]
pub struct EmojiRanges {
    ranges: Vec<(u32, u32)>,
    source: String,
    hash: String,
}

impl EmojiRanges {
    pub fn bundled() -> Self {
        Self::parse(EMOJI_RANGES).expect("bundled emoji ranges are well formed")
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut ranges = Vec::new();
        for (n, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let parse = |s: &str| {
                u32::from_str_radix(s.trim(), 16)
                    .map_err(|e| Error::Format(format!("emoji ranges line {}: {e}", n + 1)))
            };
            let (lo, hi) = match line.split_once("..") {
                Some((a, b)) => (parse(a)?, parse(b)?),
                None => {
                    let v = parse(line)?;
                    (v, v)
                }
            };
            if lo > hi {
                return Err(Error::Format(format!("emoji ranges line {}: empty range", n + 1)));
            }
            ranges.push((lo, hi));
        }
        Ok(Self {
            ranges,
            source: text.to_string(),
            hash: sha256_hex(text.as_bytes()),
        })
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    pub fn contains(&self, c: char) -> bool {
        let cp = c as u32;
        self.ranges.iter().any(|&(lo, hi)| lo <= cp && cp <= hi)
    }

    pub fn hash(&self) -> &str {
        &self.hash
    }

    pub fn source(&self) -> &str {
        &self.source
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_resources_parse() {
        let sw = Stopwords::english();
        assert_eq!(sw.len(), 179);
        assert!(sw.contains("the") && sw.contains("don't"));
        let em = EmojiRanges::bundled();
        assert!(em.contains('😀'));
        assert!(em.contains('\u{2764}'));
        assert!(!em.contains('a'));
        assert_eq!(sw.hash().len(), 64);
    }

    #[test]
    fn bad_range_line() {
        assert!(EmojiRanges::parse("zz..10").is_err());
        assert!(EmojiRanges::parse("20..10").is_err());
    }
}
