use std::sync::OnceLock;

use regex::Regex;

use super::{EmojiRanges, Stopwords};

/// Cleaned, tokenised text: lowercase tokens over `[a-z']`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct CleanText {
    pub tokens: Vec<String>,
}

impl CleanText {
    pub fn new(tokens: Vec<String>) -> Self {
        Self { tokens }
    }

    pub fn joined(&self) -> String {
        self.tokens.join(" ")
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }
}

impl<S: Into<String>> FromIterator<S> for CleanText {
    fn from_iter<I: IntoIterator<Item = S>>(iter: I) -> Self {
        Self::new(iter.into_iter().map(Into::into).collect())
    }
}

fn url_pattern() -> &'static Regex {
    static URL: OnceLock<Regex> = OnceLock::new();
    URL.get_or_init(|| Regex::new(r"(?:https?://|www\.)\S*").expect("valid url regex"))
}

/// Truncates every maximal run of one character to `max_run` characters.
pub fn squash_repeats(word: &str, max_run: usize) -> String {
    let mut out = String::with_capacity(word.len());
    let mut prev = None;
    let mut run = 0;
    for c in word.chars() {
        if Some(c) == prev {
            run += 1;
        } else {
            prev = Some(c);
            run = 1;
        }
        if run <= max_run {
            out.push(c);
        }
    }
    out
}

/// Width-3, stride-1 character windows; words shorter than three characters
/// are returned whole.
pub fn char_trigrams(word: &str) -> Vec<String> {
    let chars: Vec<char> = word.chars().collect();
    if chars.len() < 3 {
        return vec![word.to_string()];
    }
    chars.windows(3).map(|w| w.iter().collect()).collect()
}

/// A document as the concatenation of each word's trigrams.
pub fn trigram_sequence(text: &CleanText) -> Vec<String> {
    text.tokens
        .iter()
        .filter(|t| !t.is_empty())
        .flat_map(|t| char_trigrams(t))
        .collect()
}

/// Text cleaner bound to a stopword list and an emoji table.
///
/// Steps, in order: lowercase, drop URLs, drop emoji, replace every character
/// other than `a-z`, apostrophe and whitespace with a space, squash character
/// runs to two, split on whitespace, trim apostrophes at token edges, drop
/// stopwords.
#[derive(Clone, Debug)]
pub struct Cleaner {
    pub stopwords: Stopwords,
    pub emoji: EmojiRanges,
}

impl Cleaner {
    pub fn new(stopwords: Stopwords, emoji: EmojiRanges) -> Self {
        Self { stopwords, emoji }
    }

    pub fn clean(&self, raw: &str) -> CleanText {
        let lower = raw.to_lowercase();
        let no_urls = url_pattern().replace_all(&lower, " ");
        let filtered: String = no_urls
            .chars()
            .map(|c| {
                if self.emoji.contains(c) {
                    ' '
                } else if c.is_ascii_lowercase() || c == '\'' || c.is_whitespace() {
                    c
                } else {
                    ' '
                }
            })
            .collect();
        let squashed = squash_repeats(&filtered, 2);
        squashed
            .split_whitespace()
            .map(|t| t.trim_matches('\''))
            .filter(|t| !t.is_empty() && !self.stopwords.contains(t))
            .map(str::to_string)
            .collect()
    }
}

impl Default for Cleaner {
    fn default() -> Self {
        Self::new(Stopwords::english(), EmojiRanges::bundled())
    }
}

/// Cleans `raw` with the given stopwords and the bundled emoji table.
pub fn clean_text(raw: &str, stopwords: &Stopwords) -> CleanText {
    Cleaner::new(stopwords.clone(), EmojiRanges::bundled()).clean(raw)
}
