use std::collections::BTreeMap;

use super::{EmbeddingMatrix, EmbeddingSource, Pretrained, SkipgramConfig};
use crate::embeddings::train_skipgram;
use crate::error::{Error, Result};
use crate::io::Dataset;
use crate::preprocess::{build_vocab, trigram_sequence, CleanText, Cleaner, Vocab, OOV_INDEX};
use crate::rng::Rng;
use crate::tensor::{Init, Tensor};

fn mean_of<'a>(rows: impl Iterator<Item = &'a [f64]>, dim: usize) -> Vec<f64> {
    let mut sum = vec![0.0; dim];
    let mut n = 0usize;
    for r in rows {
        for (s, v) in sum.iter_mut().zip(r) {
            *s += v;
        }
        n += 1;
    }
    if n > 0 {
        sum.iter_mut().for_each(|s| *s /= n as f64);
    }
    sum
}

/// Assembles a table over `vocab`: PAD zero, OOV set to `oov_row`, real
/// tokens from `row_for`.
fn assemble(
    vocab: &Vocab,
    dim: usize,
    mut row_for: impl FnMut(usize, &str) -> Result<Vec<f64>>,
) -> Result<(Vec<f64>, usize)> {
    let mut data = vec![0.0; vocab.len() * dim];
    for (idx, token) in vocab.entries() {
        let row = row_for(idx, token)?;
        if row.len() != dim {
            return Err(Error::Composition(format!(
                "vector for {token:?} has width {}, expected {dim}",
                row.len()
            )));
        }
        data[idx * dim..(idx + 1) * dim].copy_from_slice(&row);
    }
    Ok((data, dim))
}

fn set_oov_row(data: &mut [f64], dim: usize, oov: &[f64]) {
    data[OOV_INDEX * dim..(OOV_INDEX + 1) * dim].copy_from_slice(oov);
}

/// Glove++: the pretrained vector when the file has one, otherwise the
/// corpus-trained vector. The OOV row is the mean of all rows used.
pub fn compose_glove_plus_plus(
    vocab: &Vocab,
    pretrained: &Pretrained,
    trained: &BTreeMap<String, Vec<f64>>,
) -> Result<EmbeddingMatrix> {
    let trained_dim = trained.values().next().map(Vec::len);
    let dim = match (pretrained.dim, trained_dim) {
        (Some(p), Some(t)) if p != t => {
            return Err(Error::Composition(format!(
                "pretrained width {p} differs from trained width {t}"
            )))
        }
        (Some(p), _) => p,
        (None, Some(t)) => t,
        (None, None) => {
            return Err(Error::Composition("no vectors from either source".into()));
        }
    };
    let (mut data, dim) = assemble(vocab, dim, |idx, token| {
        if let Some(v) = pretrained.vectors.get(&idx) {
            Ok(v.clone())
        } else if let Some(v) = trained.get(token) {
            Ok(v.clone())
        } else {
            Err(Error::Composition(format!(
                "token {token:?} is in neither the pretrained file nor the trained vectors"
            )))
        }
    })?;
    let oov = mean_of(vocab.entries().map(|(i, _)| &data[i * dim..(i + 1) * dim]), dim);
    set_oov_row(&mut data, dim, &oov);
    EmbeddingMatrix::new(
        Tensor::new(vec![vocab.len(), dim], data)?,
        false,
        EmbeddingSource::GlovePlusPlus,
    )
}

/// Cleaned texts of every CAG or OAG example, in dataset order.
pub fn aggressive_subcorpus(dataset: &Dataset, cleaner: &Cleaner) -> Vec<CleanText> {
    dataset
        .examples
        .iter()
        .filter(|e| e.label.is_aggressive())
        .map(|e| cleaner.clean(&e.text))
        .collect()
}

/// Word vectors trained only on aggressive examples, laid out over the word
/// vocabulary. Tokens absent from the aggressive subset get the mean vector.
pub fn build_aggression_embeddings(
    dataset: &Dataset,
    cleaner: &Cleaner,
    vocab: &Vocab,
    cfg: &SkipgramConfig,
) -> Result<EmbeddingMatrix> {
    let sub = aggressive_subcorpus(dataset, cleaner);
    if sub.is_empty() {
        return Err(Error::InsufficientData(
            "dataset has no CAG or OAG examples to train aggression embeddings".into(),
        ));
    }
    let sentences: Vec<Vec<String>> = sub.into_iter().map(|c| c.tokens).collect();
    if sentences.iter().all(Vec::is_empty) {
        return Err(Error::InsufficientData(
            "aggressive examples are empty after cleaning".into(),
        ));
    }
    let model = train_skipgram(&sentences, cfg)?;
    let mean = mean_of(model.vectors.values().map(Vec::as_slice), cfg.dim);
    let (mut data, dim) = assemble(vocab, cfg.dim, |_, token| {
        Ok(model.get(token).map_or_else(|| mean.clone(), <[f64]>::to_vec))
    })?;
    set_oov_row(&mut data, dim, &mean);
    EmbeddingMatrix::new(
        Tensor::new(vec![vocab.len(), dim], data)?,
        false,
        EmbeddingSource::Aggression,
    )
}

/// Each document re-expressed as its concatenated per-word trigrams.
pub fn trigram_corpus(corpus: &[CleanText]) -> Vec<CleanText> {
    corpus.iter().map(|c| CleanText::new(trigram_sequence(c))).collect()
}

/// Trigram vocabulary plus skip-gram vectors trained over trigram sequences.
pub fn build_trigram_embeddings(
    corpus: &[CleanText],
    cfg: &SkipgramConfig,
) -> Result<(Vocab, EmbeddingMatrix)> {
    if corpus.is_empty() {
        return Err(Error::InsufficientData("trigram corpus is empty".into()));
    }
    let docs = trigram_corpus(corpus);
    let vocab = build_vocab(&docs, cfg.min_count);
    if vocab.is_empty() {
        return Err(Error::InsufficientData("no trigrams reach min_count".into()));
    }
    let sentences: Vec<Vec<String>> = docs.into_iter().map(|c| c.tokens).collect();
    let model = train_skipgram(&sentences, cfg)?;
    let mean = mean_of(model.vectors.values().map(Vec::as_slice), cfg.dim);
    let (mut data, dim) = assemble(&vocab, cfg.dim, |_, token| {
        Ok(model.get(token).map_or_else(|| mean.clone(), <[f64]>::to_vec))
    })?;
    set_oov_row(&mut data, dim, &mean);
    let matrix = EmbeddingMatrix::new(
        Tensor::new(vec![vocab.len(), dim], data)?,
        false,
        EmbeddingSource::Trigram,
    )?;
    Ok((vocab, matrix))
}

/// Randomly initialised trainable trigram table, for learning the trigram
/// vectors jointly with the classifier instead of pre-training them.
pub fn random_trigram_embeddings(vocab: &Vocab, dim: usize, rng: &mut Rng) -> Result<EmbeddingMatrix> {
    let mut t = Tensor::create(&[vocab.len(), dim], Init::Glorot(rng))?;
    t.data_mut()[..dim].iter_mut().for_each(|v| *v = 0.0);
    EmbeddingMatrix::new(t, true, EmbeddingSource::Trigram)
}
