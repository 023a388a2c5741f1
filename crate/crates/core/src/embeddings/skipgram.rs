//! Skip-gram with negative sampling (SGNS), single-threaded and seeded.
//!
//! For every (center, context) pair inside the window the trainer takes one
//! SGD step on `log σ(u_ctx·v_ctr) + Σ_neg log σ(−u_neg·v_ctr)`, drawing
//! negatives from the unigram distribution raised to 0.75. The learning rate
//! decays linearly over the run. Center vectors are returned.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::Rng;

const UNIGRAM_POWER: f64 = 0.75;
const MIN_LR_FRACTION: f64 = 1e-4;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SkipgramConfig {
    pub dim: usize,
    pub window: usize,
    pub negative_samples: usize,
    pub epochs: usize,
    pub learning_rate: f64,
    pub min_count: usize,
    pub seed: u64,
}

impl Default for SkipgramConfig {
    fn default() -> Self {
        Self {
            dim: 100,
            window: 5,
            negative_samples: 5,
            epochs: 5,
            learning_rate: 0.025,
            min_count: 1,
            seed: 42,
        }
    }
}

impl SkipgramConfig {
    pub fn validate(&self) -> Result<()> {
        if self.dim == 0 || self.window == 0 || self.negative_samples == 0 || self.epochs == 0 {
            return Err(Error::Config(format!(
                "skip-gram dim, window, negatives and epochs must be >= 1: {self:?}"
            )));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::Config("skip-gram learning rate must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SkipgramModel {
    pub vectors: BTreeMap<String, Vec<f64>>,
    /// Mean loss per (center, context) pair for each epoch.
    pub epoch_losses: Vec<f64>,
}

impl SkipgramModel {
    pub fn get(&self, token: &str) -> Option<&[f64]> {
        self.vectors.get(token).map(Vec::as_slice)
    }

    pub fn cosine(&self, a: &str, b: &str) -> Option<f64> {
        let (x, y) = (self.get(a)?, self.get(b)?);
        let dot: f64 = x.iter().zip(y).map(|(p, q)| p * q).sum();
        let nx = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        let ny = y.iter().map(|v| v * v).sum::<f64>().sqrt();
        Some(dot / (nx * ny).max(f64::MIN_POSITIVE))
    }
}

/// `ln(1 + e^{-x})`, i.e. `-ln σ(x)`, without overflow.
fn neg_log_sigmoid(x: f64) -> f64 {
    if x > 0.0 {
        (-x).exp().ln_1p()
    } else {
        -x + x.exp().ln_1p()
    }
}

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

struct NegativeTable {
    cumulative: Vec<f64>,
}

impl NegativeTable {
    fn new(counts: &[usize]) -> Self {
        let mut acc = 0.0;
        let cumulative = counts
            .iter()
            .map(|&c| {
                acc += (c as f64).powf(UNIGRAM_POWER);
                acc
            })
            .collect();
        Self { cumulative }
    }

    fn sample(&self, rng: &mut Rng) -> usize {
        let total = *self.cumulative.last().expect("non-empty vocabulary");
        let r = rng.next_f64() * total;
        self.cumulative
            .partition_point(|&c| c <= r)
            .min(self.cumulative.len() - 1)
    }
}

pub fn train_skipgram(corpus: &[Vec<String>], cfg: &SkipgramConfig) -> Result<SkipgramModel> {
    cfg.validate()?;
    if corpus.is_empty() {
        return Err(Error::InsufficientData("skip-gram corpus is empty".into()));
    }
    let mut counts: HashMap<&str, usize> = HashMap::new();
    for sentence in corpus {
        for t in sentence {
            *counts.entry(t.as_str()).or_default() += 1;
        }
    }
    let mut words: Vec<(&str, usize)> = counts
        .into_iter()
        .filter(|&(_, c)| c >= cfg.min_count)
        .collect();
    words.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
    if words.is_empty() {
        return Err(Error::InsufficientData(format!(
            "no token reaches min_count {}",
            cfg.min_count
        )));
    }
    let index: HashMap<&str, usize> = words.iter().enumerate().map(|(i, &(w, _))| (w, i)).collect();
    let sentences: Vec<Vec<usize>> = corpus
        .iter()
        .map(|s| s.iter().filter_map(|t| index.get(t.as_str()).copied()).collect())
        .collect();
    let freq: Vec<usize> = words.iter().map(|&(_, c)| c).collect();
    let table = NegativeTable::new(&freq);

    let (n, d) = (words.len(), cfg.dim);
    let mut rng = Rng::new(cfg.seed);
    let half = 0.5 / d as f64;
    let mut input: Vec<f64> = (0..n * d).map(|_| rng.uniform(-half, half)).collect();
    let mut output = vec![0.0; n * d];

    let tokens_per_epoch: usize = sentences.iter().map(Vec::len).sum();
    let total_steps = (tokens_per_epoch * cfg.epochs).max(1) as f64;
    let mut processed = 0usize;
    let mut epoch_losses = Vec::with_capacity(cfg.epochs);
    let mut grad = vec![0.0; d];

    for _ in 0..cfg.epochs {
        let mut loss_sum = 0.0;
        let mut pairs = 0usize;
        for sentence in &sentences {
            for (pos, &center) in sentence.iter().enumerate() {
                let lr = cfg.learning_rate * (1.0 - processed as f64 / total_steps).max(MIN_LR_FRACTION);
                processed += 1;
                let lo = pos.saturating_sub(cfg.window);
                let hi = (pos + cfg.window + 1).min(sentence.len());
                for (ctx_pos, &context) in sentence.iter().enumerate().take(hi).skip(lo) {
                    if ctx_pos == pos {
                        continue;
                    }
                    grad.iter_mut().for_each(|g| *g = 0.0);
                    let v = &mut input[center * d..(center + 1) * d];
                    let mut step = |target: usize, label: f64, v: &[f64], grad: &mut [f64]| -> f64 {
                        let u = &mut output[target * d..(target + 1) * d];
                        let score: f64 = v.iter().zip(u.iter()).map(|(a, b)| a * b).sum();
                        let g = (label - sigmoid(score)) * lr;
                        for k in 0..d {
                            grad[k] += g * u[k];
                            u[k] += g * v[k];
                        }
                        if label > 0.5 {
                            neg_log_sigmoid(score)
                        } else {
                            neg_log_sigmoid(-score)
                        }
                    };
                    loss_sum += step(context, 1.0, v, &mut grad);
                    for _ in 0..cfg.negative_samples {
                        let neg = table.sample(&mut rng);
                        if neg == context {
                            continue;
                        }
                        loss_sum += step(neg, 0.0, v, &mut grad);
                    }
                    for (vk, gk) in v.iter_mut().zip(&grad) {
                        *vk += gk;
                    }
                    pairs += 1;
                }
            }
        }
        epoch_losses.push(if pairs == 0 { 0.0 } else { loss_sum / pairs as f64 });
    }

    let vectors = words
        .iter()
        .enumerate()
        .map(|(i, &(w, _))| (w.to_string(), input[i * d..(i + 1) * d].to_vec()))
        .collect();
    Ok(SkipgramModel {
        vectors,
        epoch_losses,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Sentences drawn from {a, b} or from {c, d}, never mixed.
    pub(crate) fn disjoint_corpus(seed: u64) -> Vec<Vec<String>> {
        let mut rng = Rng::new(seed);
        (0..200)
            .map(|i| {
                let pair = if i % 2 == 0 { ["a", "b"] } else { ["c", "d"] };
                (0..8).map(|_| pair[rng.below(2)].to_string()).collect()
            })
            .collect()
    }

    fn small_cfg() -> SkipgramConfig {
        SkipgramConfig {
            dim: 10,
            window: 2,
            negative_samples: 3,
            epochs: 5,
            learning_rate: 0.05,
            min_count: 1,
            seed: 7,
        }
    }

    #[test]
    fn co_occurring_tokens_are_closer() {
        let m = train_skipgram(&disjoint_corpus(1), &small_cfg()).unwrap();
        let ab = m.cosine("a", "b").unwrap();
        let cd = m.cosine("c", "d").unwrap();
        for (x, y) in [("a", "c"), ("a", "d"), ("b", "c"), ("b", "d")] {
            let cross = m.cosine(x, y).unwrap();
            assert!(ab > cross && cd > cross, "ab={ab} cd={cd} {x}{y}={cross}");
        }
    }

    #[test]
    fn loss_decreases_over_epochs() {
        let m = train_skipgram(&disjoint_corpus(2), &small_cfg()).unwrap();
        for w in m.epoch_losses.windows(2) {
            assert!(w[1] <= w[0] * 1.05, "{:?}", m.epoch_losses);
        }
    }

    #[test]
    fn single_token_corpus() {
        let m = train_skipgram(&[vec!["x".to_string()]], &small_cfg()).unwrap();
        assert!(m.get("x").unwrap().iter().all(|v| v.is_finite()));
    }

    #[test]
    fn deterministic() {
        let c = disjoint_corpus(3);
        assert_eq!(train_skipgram(&c, &small_cfg()).unwrap(), train_skipgram(&c, &small_cfg()).unwrap());
    }

    #[test]
    fn empty_corpus_rejected() {
        assert!(train_skipgram(&[], &small_cfg()).is_err());
    }
}
