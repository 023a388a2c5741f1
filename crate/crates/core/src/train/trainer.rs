use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::adam::{AdamConfig, AdamState};
use super::predict::predict_encoded;
use crate::error::{Error, Result};
use crate::io::Dataset;
use crate::label::Class;
use crate::model::Model;
use crate::nn::{Grads, Mode};
use crate::preprocess::{EncodedInput, TextPipeline};
use crate::rng::Rng;

/// Fraction of each class held out as a dev set when early stopping is
/// requested without one.
pub const HOLDOUT_FRACTION: f64 = 0.1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub batch_size: usize,
    pub epochs: usize,
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    pub seed: u64,
    pub shuffle: bool,
    pub early_stop_patience: Option<usize>,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            batch_size: 64,
            epochs: 10,
            lr: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            seed: 42,
            shuffle: true,
            early_stop_patience: None,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.batch_size == 0 || self.epochs == 0 {
            return Err(Error::Config("batch_size and epochs must be >= 1".into()));
        }
        if !(self.lr >= 0.0 && self.lr.is_finite()) {
            return Err(Error::Config(format!("learning rate {} is not a finite non-negative number", self.lr)));
        }
        Ok(())
    }

    fn adam(&self) -> AdamConfig {
        AdamConfig {
            lr: self.lr,
            beta1: self.beta1,
            beta2: self.beta2,
            eps: self.eps,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrainingExample {
    pub input: EncodedInput,
    pub label: Class,
}

pub fn encode_dataset(dataset: &Dataset, pipeline: &TextPipeline) -> Vec<TrainingExample> {
    dataset
        .examples
        .par_iter()
        .map(|e| TrainingExample {
            input: pipeline.encode(&e.text),
            label: e.label,
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EpochLog {
    pub epoch: usize,
    /// Mean per-example training loss.
    pub loss: f64,
    pub dev_weighted_f1: Option<f64>,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct TrainLog {
    pub epochs: Vec<EpochLog>,
    /// Epoch whose weights were kept, when early stopping restored them.
    pub restored_epoch: Option<usize>,
}

impl TrainLog {
    /// One `epoch<TAB>loss<TAB>dev_weighted_f1` line per epoch; `-` when no
    /// dev set was scored.
    pub fn to_tsv(&self) -> String {
        self.epochs
            .iter()
            .map(|e| {
                let dev = e.dev_weighted_f1.map_or_else(|| "-".to_string(), |f| f.to_string());
                format!("{}\t{}\t{}\n", e.epoch, e.loss, dev)
            })
            .collect()
    }
}

/// Splits off `fraction` of every class (rounded) as a dev set, chosen by a
/// seeded shuffle. Both halves keep the original relative order.
pub fn stratified_holdout<T: Clone>(
    items: &[T],
    label: impl Fn(&T) -> Class,
    fraction: f64,
    seed: u64,
) -> (Vec<T>, Vec<T>) {
    let mut rng = Rng::new(seed);
    let mut in_dev = vec![false; items.len()];
    for class in Class::ALL {
        let mut idx: Vec<usize> = (0..items.len()).filter(|&i| label(&items[i]) == class).collect();
        rng.shuffle(&mut idx);
        let take = (idx.len() as f64 * fraction).round() as usize;
        for &i in &idx[..take.min(idx.len())] {
            in_dev[i] = true;
        }
    }
    let (mut train, mut dev) = (Vec::new(), Vec::new());
    for (item, &d) in items.iter().zip(&in_dev) {
        if d { &mut dev } else { &mut train }.push(item.clone());
    }
    (train, dev)
}

fn dev_score(model: &Model, dev: &[TrainingExample]) -> Result<f64> {
    let inputs: Vec<&EncodedInput> = dev.iter().map(|e| &e.input).collect();
    let pred: Vec<Class> = predict_encoded(model, &inputs)?.iter().map(|p| p.class).collect();
    let gold: Vec<Class> = dev.iter().map(|e| e.label).collect();
    super::weighted_f1(&gold, &pred)
}

/// Mini-batch Adam on mean cross-entropy.
///
/// Each example in a batch gets its own dropout seed drawn in order from the
/// trainer's RNG; per-example gradients are computed in parallel and summed
/// in batch order, so results do not depend on the thread count.
///
/// With `early_stop_patience` set, training stops once the dev weighted F1
/// has not improved for that many epochs and the best weights are restored.
/// Without an explicit `dev` set a stratified 10% of `examples` is held out.
pub fn train(
    model: &mut Model,
    examples: &[TrainingExample],
    cfg: &TrainConfig,
    dev: Option<&[TrainingExample]>,
) -> Result<TrainLog> {
    cfg.validate()?;
    if examples.is_empty() {
        return Err(Error::InvalidInput("training set is empty".into()));
    }
    let holdout;
    let (train_set, dev_set): (&[TrainingExample], Option<&[TrainingExample]>) =
        match (dev, cfg.early_stop_patience) {
            (Some(d), _) => (examples, Some(d)),
            (None, Some(_)) => {
                holdout = stratified_holdout(examples, |e| e.label, HOLDOUT_FRACTION, cfg.seed);
                if holdout.0.is_empty() || holdout.1.is_empty() {
                    return Err(Error::InsufficientData(
                        "too few examples to hold out a dev set for early stopping".into(),
                    ));
                }
                (&holdout.0, Some(&holdout.1))
            }
            (None, None) => (examples, None),
        };

    let mut rng = Rng::new(cfg.seed);
    let mut adam = AdamState::new(&model.params, cfg.adam());
    let mut order: Vec<usize> = (0..train_set.len()).collect();
    let mut log = TrainLog::default();
    let mut best: Option<(f64, usize, crate::nn::Params)> = None;

    for epoch in 1..=cfg.epochs {
        if cfg.shuffle {
            rng.shuffle(&mut order);
        }
        let mut loss_sum = 0.0;
        for batch in order.chunks(cfg.batch_size) {
            let seeds: Vec<u64> = batch.iter().map(|_| rng.next_u64()).collect();
            let model_ref = &*model;
            let results: Vec<Result<(f64, Grads)>> = batch
                .par_iter()
                .zip(seeds.par_iter())
                .map(|(&i, &seed)| {
                    let ex = &train_set[i];
                    let mut grads = Grads::zeros_like(&model_ref.params);
                    let loss = model_ref.loss_and_grads(
                        &ex.input,
                        ex.label.index(),
                        Mode::Train,
                        &mut Rng::new(seed),
                        &mut grads,
                    )?;
                    Ok((loss, grads))
                })
                .collect();
            let mut total = Grads::zeros_like(&model.params);
            for r in results {
                let (loss, grads) = r?;
                if !loss.is_finite() {
                    return Err(Error::Numerical(format!("non-finite training loss in epoch {epoch}")));
                }
                loss_sum += loss;
                total.add(&grads)?;
            }
            total.scale(1.0 / batch.len() as f64);
            adam.step(&mut model.params, &total)?;
        }
        let loss = loss_sum / train_set.len() as f64;
        let dev_weighted_f1 = dev_set.map(|d| dev_score(model, d)).transpose()?;
        log::info!(
            "epoch {epoch}: loss {loss:.6}{}",
            dev_weighted_f1.map_or(String::new(), |f| format!(", dev weighted F1 {f:.4}"))
        );
        log.epochs.push(EpochLog {
            epoch,
            loss,
            dev_weighted_f1,
        });

        if let (Some(patience), Some(f1)) = (cfg.early_stop_patience, dev_weighted_f1) {
            if best.as_ref().is_none_or(|(b, _, _)| f1 > *b) {
                best = Some((f1, epoch, model.params.clone()));
            } else if epoch - best.as_ref().map_or(0, |b| b.1) >= patience {
                log::info!("early stopping after epoch {epoch}");
                break;
            }
        }
    }
    if let Some((_, epoch, params)) = best {
        model.params = params;
        log.restored_epoch = Some(epoch);
    }
    Ok(log)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::embeddings::{EmbeddingMatrix, EmbeddingSource};
    use crate::model::{build_model, EnsembleConfig, Reducer, SubnetworkSpec};
    use crate::nn::CapsuleLayerConfig;
    use crate::tensor::{Init, Tensor};
    use std::collections::BTreeMap;

    fn toy(dropout: f64) -> (Model, Vec<TrainingExample>) {
        let mut cfg = EnsembleConfig::new(vec![SubnetworkSpec {
            embedding_source: EmbeddingSource::GlovePlusPlus,
            kernel_size: 2,
            conv_filters: 4,
            reducer: Reducer::Capsule(CapsuleLayerConfig::new(2, 3)),
            post_reducer_bilstm_units: None,
        }]);
        cfg.max_len = 6;
        cfg.dropout = dropout;
        cfg.dense_hidden_sizes = vec![6];
        let mut rng = Rng::new(5);
        let table = Tensor::create(&[12, 4], Init::Uniform { lo: -1.0, hi: 1.0, rng: &mut rng }).unwrap();
        let emb: BTreeMap<_, _> = [(
            EmbeddingSource::GlovePlusPlus,
            EmbeddingMatrix::new(table, false, EmbeddingSource::GlovePlusPlus).unwrap(),
        )]
        .into();
        let model = build_model(&cfg, &emb, &mut rng).unwrap();
        let examples = (0..24)
            .map(|i| {
                let label = Class::from_index(i % 3).unwrap();
                let base = 2 + 3 * label.index();
                TrainingExample {
                    input: EncodedInput {
                        words: (0..6).map(|k| base + (k + i) % 3).collect(),
                        trigrams: None,
                    },
                    label,
                }
            })
            .collect();
        (model, examples)
    }

    fn cfg(epochs: usize, lr: f64) -> TrainConfig {
        TrainConfig {
            batch_size: 5,
            epochs,
            lr,
            seed: 3,
            ..TrainConfig::default()
        }
    }

    #[test]
    fn zero_lr_keeps_loss_constant() {
        let (mut model, ex) = toy(0.0);
        let before = model.params.clone();
        let log = train(&mut model, &ex, &cfg(3, 0.0), None).unwrap();
        for e in &log.epochs {
            assert!((e.loss - log.epochs[0].loss).abs() < 1e-12);
        }
        assert_eq!(model.params, before);
    }

    #[test]
    fn loss_falls_and_runs_repeat() {
        let (mut a, ex) = toy(0.2);
        let (mut b, _) = toy(0.2);
        let la = train(&mut a, &ex, &cfg(15, 0.01), None).unwrap();
        let lb = train(&mut b, &ex, &cfg(15, 0.01), None).unwrap();
        assert_eq!(la, lb);
        assert_eq!(a.params, b.params);
        assert!(la.epochs[14].loss < la.epochs[0].loss);
        assert_eq!(la.to_tsv().lines().count(), 15);
        assert!(la.to_tsv().lines().all(|l| l.ends_with("\t-")));
    }

    #[test]
    fn early_stopping_restores_best() {
        let (mut model, ex) = toy(0.0);
        let mut c = cfg(30, 0.02);
        c.early_stop_patience = Some(2);
        let log = train(&mut model, &ex, &c, Some(&ex)).unwrap();
        let best = log.restored_epoch.unwrap();
        let best_f1 = log.epochs[best - 1].dev_weighted_f1.unwrap();
        assert!(log.epochs.iter().all(|e| e.dev_weighted_f1.unwrap() <= best_f1));
        assert!((dev_score(&model, &ex).unwrap() - best_f1).abs() < 1e-12);
    }

    #[test]
    fn rejects_empty_and_bad_config() {
        let (mut model, ex) = toy(0.0);
        assert!(matches!(train(&mut model, &[], &cfg(1, 0.1), None), Err(Error::InvalidInput(_))));
        let mut c = cfg(1, 0.1);
        c.batch_size = 0;
        assert!(matches!(train(&mut model, &ex, &c, None), Err(Error::Config(_))));
    }

    #[test]
    fn holdout_is_stratified_and_seeded() {
        let items: Vec<Class> = (0..60).map(|i| Class::from_index(i % 3).unwrap()).collect();
        let (train, dev) = stratified_holdout(&items, |c| *c, 0.1, 1);
        assert_eq!(dev.len(), 6);
        assert_eq!(train.len(), 54);
        for c in Class::ALL {
            assert_eq!(dev.iter().filter(|&&d| d == c).count(), 2);
        }
        assert_eq!(stratified_holdout(&items, |c| *c, 0.1, 1), (train, dev));
    }
}
