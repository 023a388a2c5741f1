#![allow(dead_code)]

use std::collections::BTreeMap;
use std::io::Cursor;
use std::path::Path;

use aggrnet::embeddings::{compose_glove_plus_plus, parse_pretrained, train_skipgram, EmbeddingMatrix, EmbeddingSource, SkipgramConfig};
use aggrnet::io::{Dataset, LabeledExample};
use aggrnet::model::{EnsembleConfig, Reducer, SubnetworkSpec};
use aggrnet::nn::CapsuleLayerConfig;
use aggrnet::preprocess::{build_vocab, CleanText, Cleaner, TextPipeline};
use aggrnet::{Class, Rng};

const CAG: [&str; 5] = ["sly", "sarcasm", "clever", "wink", "sure"];
const NAG: [&str; 5] = ["hope", "safe", "love", "thanks", "peace"];
const OAG: [&str; 5] = ["hate", "idiot", "stupid", "trash", "loser"];
const FILLER: [&str; 5] = ["people", "today", "news", "city", "game"];

/// Toy tweets: three class words, three filler words, and some noise for the
/// cleaner (a URL, digits, shouting).
pub fn toy_dataset(n: usize, seed: u64) -> Dataset {
    let mut rng = Rng::new(seed);
    let examples = (0..n)
        .map(|i| {
            let label = Class::ALL[i % 3];
            let words = match label {
                Class::Cag => &CAG,
                Class::Nag => &NAG,
                Class::Oag => &OAG,
            };
            let mut toks: Vec<&str> = (0..3).map(|_| words[rng.below(5)]).collect();
            toks.extend((0..3).map(|_| FILLER[rng.below(5)]));
            rng.shuffle(&mut toks);
            LabeledExample { id: format!("t{i}"), text: format!("{} https://t.co/x 42!!", toks.join(" ")), label }
        })
        .collect();
    Dataset::new(examples)
}

/// A glove++ table for `dataset` built only from skip-gram vectors (no
/// pretrained file), plus the pipeline that encodes into it.
pub fn toy_glove(dataset: &Dataset, dim: usize, max_len: usize) -> (TextPipeline, BTreeMap<EmbeddingSource, EmbeddingMatrix>) {
    let cleaner = Cleaner::default();
    let cleaned: Vec<CleanText> = dataset.iter().map(|e| cleaner.clean(&e.text)).collect();
    let vocab = build_vocab(&cleaned, 1);
    let sentences: Vec<Vec<String>> = cleaned.into_iter().map(|c| c.tokens).collect();
    let cfg = SkipgramConfig { dim, epochs: 3, ..SkipgramConfig::default() };
    let trained = train_skipgram(&sentences, &cfg).unwrap();
    let none = parse_pretrained(Cursor::new(""), Path::new("<none>"), &vocab).unwrap();
    let glove = compose_glove_plus_plus(&vocab, &none, &trained.vectors).unwrap();
    let pipeline = TextPipeline::new(cleaner, vocab, None).with_max_len(max_len);
    (pipeline, [(EmbeddingSource::GlovePlusPlus, glove)].into())
}

/// CN1's shape (three glove++ branches, kernels 3/4/5, capsules) shrunk so
/// it trains in seconds.
pub fn small_cn1(max_len: usize) -> EnsembleConfig {
    let mut cfg = EnsembleConfig::new(
        [3, 4, 5]
            .into_iter()
            .map(|k| SubnetworkSpec {
                embedding_source: EmbeddingSource::GlovePlusPlus,
                kernel_size: k,
                conv_filters: 8,
                reducer: Reducer::Capsule(CapsuleLayerConfig::new(3, 4)),
                post_reducer_bilstm_units: None,
            })
            .collect(),
    );
    cfg.max_len = max_len;
    cfg.dense_hidden_sizes = vec![16];
    cfg
}
