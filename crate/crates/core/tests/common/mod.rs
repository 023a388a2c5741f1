//! Fixtures shared by the integration and acceptance tests.
#![allow(dead_code)]

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use aggrnet::embeddings::{EmbeddingMatrix, EmbeddingSource};
use aggrnet::io::{write_dataset, Dataset, LabeledExample};
use aggrnet::model::{build_model, EnsembleConfig, Model, Reducer, SubnetworkSpec};
use aggrnet::nn::CapsuleLayerConfig;
use aggrnet::tensor::{Init, Tensor};
use aggrnet::{Class, Rng};

pub const CAG_WORDS: [&str; 6] = ["sly", "maybe", "sarcasm", "funny", "clever", "wink"];
pub const NAG_WORDS: [&str; 6] = ["hope", "safe", "love", "good", "thanks", "peace"];
pub const OAG_WORDS: [&str; 6] = ["hate", "idiot", "stupid", "kill", "trash", "loser"];
pub const COMMON_WORDS: [&str; 6] = ["people", "today", "government", "news", "city", "game"];

fn class_words(c: Class) -> &'static [&'static str; 6] {
    match c {
        Class::Cag => &CAG_WORDS,
        Class::Nag => &NAG_WORDS,
        Class::Oag => &OAG_WORDS,
    }
}

/// Tweets mixing four class-specific words with four neutral ones, plus a
/// URL and digits for the cleaner to strip. Labels cycle CAG, NAG, OAG.
pub fn synthetic_dataset(n: usize, seed: u64) -> Dataset {
    let mut rng = Rng::new(seed);
    let examples = (0..n)
        .map(|i| {
            let label = Class::ALL[i % 3];
            let words = class_words(label);
            let mut toks: Vec<&str> = (0..4).map(|_| words[rng.below(6)]).collect();
            toks.extend((0..4).map(|_| COMMON_WORDS[rng.below(6)]));
            rng.shuffle(&mut toks);
            LabeledExample {
                id: format!("x{i}"),
                text: format!("{} http://t.co/abc 123!!", toks.join(" ")),
                label,
            }
        })
        .collect();
    Dataset::new(examples)
}

/// A small GloVe-format file covering some, not all, of the fixture words.
pub fn glove_text(dim: usize, seed: u64) -> String {
    let mut rng = Rng::new(seed);
    let mut out = String::new();
    for w in NAG_WORDS.iter().chain(&COMMON_WORDS[..3]).chain(["unrelated", "words"].iter()) {
        out.push_str(w);
        for _ in 0..dim {
            let _ = write!(out, " {:.5}", rng.uniform(-1.0, 1.0));
        }
        out.push('\n');
    }
    out
}

/// Writes `train.csv` (n examples) and `glove.txt` into `dir`.
pub fn write_fixture(dir: &Path, n: usize) {
    write_dataset(&dir.join("train.csv"), &synthetic_dataset(n, 11)).unwrap();
    std::fs::write(dir.join("glove.txt"), glove_text(20, 12)).unwrap();
}

pub fn random_table(rows: usize, dim: usize, seed: u64, source: EmbeddingSource) -> EmbeddingMatrix {
    let mut rng = Rng::new(seed);
    let mut t = Tensor::create(&[rows, dim], Init::Uniform { lo: -1.0, hi: 1.0, rng: &mut rng }).unwrap();
    t.data_mut()[..dim].iter_mut().for_each(|v| *v = 0.0);
    EmbeddingMatrix::new(t, false, source).unwrap()
}

/// CN1 topology (glove++ branches, kernels 3/4/5, capsules) at toy sizes.
pub fn mini_cn1(max_len: usize, filters: usize, capsules: usize, dim: usize) -> EnsembleConfig {
    let mut cfg = EnsembleConfig::new(
        [3, 4, 5]
            .into_iter()
            .map(|k| SubnetworkSpec {
                embedding_source: EmbeddingSource::GlovePlusPlus,
                kernel_size: k,
                conv_filters: filters,
                reducer: Reducer::Capsule(CapsuleLayerConfig::new(capsules, dim)),
                post_reducer_bilstm_units: None,
            })
            .collect(),
    );
    cfg.max_len = max_len;
    cfg
}

pub fn glove_tables(rows: usize, dim: usize, seed: u64) -> BTreeMap<EmbeddingSource, EmbeddingMatrix> {
    [(EmbeddingSource::GlovePlusPlus, random_table(rows, dim, seed, EmbeddingSource::GlovePlusPlus))].into()
}

pub fn mini_model(cfg: &EnsembleConfig, rows: usize, dim: usize, seed: u64) -> Model {
    build_model(cfg, &glove_tables(rows, dim, seed), &mut Rng::new(seed)).unwrap()
}
