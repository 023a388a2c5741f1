use std::collections::BTreeMap;

use super::{EnsembleConfig, Reducer, SubnetworkSpec};
use crate::embeddings::{EmbeddingMatrix, EmbeddingSource, InputView};
use crate::error::{Error, Result};
use crate::nn::capsule::CapsuleCache;
use crate::nn::conv::{ConvCache, PoolCache};
use crate::nn::dense::DenseCache;
use crate::nn::lstm::BiLstmCache;
use crate::nn::merge::split_merged;
use crate::nn::{
    concat_merge, softmax_cross_entropy, Activation, BiLstm, CapsuleLayer, ConvBlock, Dense, Embedding, Grads,
    MaxPool, Mode, Params,
};
use crate::preprocess::{ArtifactHashes, EncodedInput};
use crate::rng::Rng;
use crate::tensor::{softmax_slice, Tensor};

#[derive(Clone, Debug)]
enum ReducerLayer {
    Pool(MaxPool),
    Capsule(CapsuleLayer),
}

/// One parallel branch of the ensemble.
#[derive(Clone, Debug)]
pub struct Subnetwork {
    pub spec: SubnetworkSpec,
    embedding: Embedding,
    conv: ConvBlock,
    reducer: ReducerLayer,
    bilstm: Option<BiLstm>,
}

enum ReducerCache {
    Pool(PoolCache),
    Capsule(CapsuleCache),
}

struct BranchCache {
    ids: Vec<usize>,
    conv: ConvCache,
    reducer: ReducerCache,
    bilstm: Option<BiLstmCache>,
    out_shape: Vec<usize>,
}

struct Trace {
    branches: Vec<BranchCache>,
    hidden: Vec<DenseCache>,
    output: DenseCache,
    logits: Vec<f64>,
}

/// Which activations [`Model::features`] returns.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FeatureSource {
    /// Flattened output of one subnetwork, 0-based.
    Subnetwork(usize),
    /// Concatenation of all subnetwork outputs.
    Merged,
    /// Activations of the last hidden dense layer.
    Head,
}

/// An assembled ensemble: parameters plus the layer graph that reads them.
#[derive(Clone, Debug)]
pub struct Model {
    pub config: EnsembleConfig,
    pub params: Params,
    /// Hashes of the text artifacts this model was trained with, if known.
    pub artifact_hashes: Option<ArtifactHashes>,
    subnetworks: Vec<Subnetwork>,
    hidden: Vec<Dense>,
    output: Dense,
}

fn ids_for(input: &EncodedInput, source: EmbeddingSource) -> Result<&[usize]> {
    match source.view() {
        InputView::Words => Ok(&input.words),
        InputView::Trigrams => input.trigrams.as_deref().ok_or_else(|| {
            Error::InvalidInput("model needs trigram ids but the input has none".into())
        }),
    }
}

impl Model {
    /// Registers every parameter in a fixed order (embedding tables by
    /// source, then branches, then the dense head) and initialises them.
    /// Embedding tables are created with the given shapes and zero values.
    pub(crate) fn skeleton(
        config: EnsembleConfig,
        table_shapes: &BTreeMap<EmbeddingSource, (usize, usize)>,
        rng: &mut Rng,
    ) -> Result<Self> {
        config.validate()?;
        let mut params = Params::new();
        let mut tables = BTreeMap::new();
        for source in config.sources() {
            let &(rows, dim) = table_shapes.get(&source).ok_or_else(|| {
                Error::Config(format!("no {source} embedding table supplied"))
            })?;
            let id = params.add(
                format!("embedding.{source}"),
                Tensor::create(&[rows, dim], crate::tensor::Init::Zeros)?,
                config.fine_tune_embeddings,
            );
            tables.insert(source, Embedding { table: id });
        }
        let mut subnetworks = Vec::with_capacity(config.subnetworks.len());
        for (i, spec) in config.subnetworks.iter().enumerate() {
            let prefix = format!("sn{}", i + 1);
            let embedding = tables[&spec.embedding_source].clone();
            let in_dim = embedding.dim(&params);
            let conv = ConvBlock::new(
                &mut params,
                &prefix,
                in_dim,
                spec.kernel_size,
                spec.conv_filters,
                config.dropout,
                rng,
            )?;
            let (reducer, reduced_width) = match spec.reducer {
                Reducer::MaxPool { window } => (ReducerLayer::Pool(MaxPool { window }), spec.conv_filters),
                Reducer::Capsule(cfg) => (
                    ReducerLayer::Capsule(CapsuleLayer::new(&mut params, &prefix, spec.conv_filters, cfg, rng)?),
                    cfg.capsule_dim,
                ),
            };
            let bilstm = spec
                .post_reducer_bilstm_units
                .map(|units| BiLstm::new(&mut params, &prefix, reduced_width, units, rng))
                .transpose()?;
            subnetworks.push(Subnetwork {
                spec: spec.clone(),
                embedding,
                conv,
                reducer,
                bilstm,
            });
        }
        let mut width = config.merged_len()?;
        let mut hidden = Vec::with_capacity(config.dense_hidden_sizes.len());
        for (i, &size) in config.dense_hidden_sizes.iter().enumerate() {
            hidden.push(Dense::new(&mut params, &format!("head.dense{}", i + 1), width, size, Activation::Relu, rng)?);
            width = size;
        }
        let output = Dense::new(&mut params, "head.output", width, config.num_classes, Activation::None, rng)?;
        Ok(Self {
            config,
            params,
            artifact_hashes: None,
            subnetworks,
            hidden,
            output,
        })
    }

    pub fn subnetworks(&self) -> &[Subnetwork] {
        &self.subnetworks
    }

    /// Number of trainable scalars.
    pub fn trainable_parameter_count(&self) -> usize {
        self.params.count(true)
    }

    fn check_len(&self, ids: &[usize]) -> Result<()> {
        if ids.len() != self.config.max_len {
            return Err(Error::shape(
                "model input",
                format!("expected {} ids, got {}", self.config.max_len, ids.len()),
            ));
        }
        Ok(())
    }

    fn run_branch(&self, sn: &Subnetwork, input: &EncodedInput, mode: Mode, rng: &mut Rng) -> Result<(Tensor, BranchCache)> {
        let ids = ids_for(input, sn.spec.embedding_source)?;
        self.check_len(ids)?;
        let embedded = sn.embedding.forward(&self.params, ids)?;
        let (conv_out, conv_cache) = sn.conv.forward(&self.params, &embedded, mode, rng)?;
        let (reduced, reducer_cache) = match &sn.reducer {
            ReducerLayer::Pool(pool) => {
                let (out, cache) = pool.forward(&conv_out)?;
                (out, ReducerCache::Pool(cache))
            }
            ReducerLayer::Capsule(caps) => {
                let (out, cache) = caps.forward(&self.params, &conv_out)?;
                (out, ReducerCache::Capsule(cache))
            }
        };
        let (out, bilstm_cache) = match &sn.bilstm {
            Some(bi) => {
                let (out, cache) = bi.forward(&self.params, &reduced)?;
                (out, Some(cache))
            }
            None => (reduced, None),
        };
        let cache = BranchCache {
            ids: ids.to_vec(),
            conv: conv_cache,
            reducer: reducer_cache,
            bilstm: bilstm_cache,
            out_shape: out.shape().to_vec(),
        };
        Ok((out, cache))
    }

    fn run(&self, input: &EncodedInput, mode: Mode, rng: &mut Rng) -> Result<(Vec<f64>, Vec<Vec<f64>>, Trace)> {
        let mut parts = Vec::with_capacity(self.subnetworks.len());
        let mut branches = Vec::with_capacity(self.subnetworks.len());
        for sn in &self.subnetworks {
            let (out, cache) = self.run_branch(sn, input, mode, rng)?;
            parts.push(out);
            branches.push(cache);
        }
        let (merged, _) = concat_merge(&parts)?;
        let mut activations = vec![merged];
        let mut hidden = Vec::with_capacity(self.hidden.len());
        for layer in &self.hidden {
            let (y, cache) = layer.forward(&self.params, activations.last().expect("non-empty"))?;
            activations.push(y);
            hidden.push(cache);
        }
        let (logits, output) = self.output.forward(&self.params, activations.last().expect("non-empty"))?;
        Ok((
            logits.clone(),
            activations,
            Trace {
                branches,
                hidden,
                output,
                logits,
            },
        ))
    }

    /// Class probabilities in inference mode.
    pub fn forward(&self, input: &EncodedInput) -> Result<[f64; 3]> {
        let mut rng = Rng::new(0);
        let (logits, _, _) = self.run(input, Mode::Infer, &mut rng)?;
        let p = softmax_slice(&logits);
        Ok([p[0], p[1], p[2]])
    }

    /// Pre-softmax scores.
    pub fn logits(&self, input: &EncodedInput, mode: Mode, rng: &mut Rng) -> Result<Vec<f64>> {
        Ok(self.run(input, mode, rng)?.0)
    }

    /// Inference-mode activations at the requested point of the network.
    pub fn features(&self, input: &EncodedInput, which: FeatureSource) -> Result<Vec<f64>> {
        let mut rng = Rng::new(0);
        match which {
            FeatureSource::Subnetwork(i) => {
                let sn = self.subnetworks.get(i).ok_or_else(|| {
                    Error::InvalidInput(format!(
                        "subnetwork {} out of range (model has {})",
                        i + 1,
                        self.subnetworks.len()
                    ))
                })?;
                Ok(self.run_branch(sn, input, Mode::Infer, &mut rng)?.0.into_data())
            }
            FeatureSource::Merged => Ok(self.run(input, Mode::Infer, &mut rng)?.1.swap_remove(0)),
            FeatureSource::Head => Ok(self.run(input, Mode::Infer, &mut rng)?.1.pop().expect("non-empty")),
        }
    }

    /// Cross-entropy loss for one example; parameter gradients are added
    /// into `grads`.
    pub fn loss_and_grads(
        &self,
        input: &EncodedInput,
        target: usize,
        mode: Mode,
        rng: &mut Rng,
        grads: &mut Grads,
    ) -> Result<f64> {
        let (_, _, trace) = self.run(input, mode, rng)?;
        let (loss, d_logits) = softmax_cross_entropy(&trace.logits, target)?;
        self.backward(&trace, &d_logits, grads)?;
        Ok(loss)
    }

    fn backward(&self, trace: &Trace, d_logits: &[f64], grads: &mut Grads) -> Result<()> {
        let mut g = self.output.backward(&self.params, &trace.output, d_logits, grads)?;
        for (layer, cache) in self.hidden.iter().zip(&trace.hidden).rev() {
            g = layer.backward(&self.params, cache, &g, grads)?;
        }
        let shapes: Vec<Vec<usize>> = trace.branches.iter().map(|b| b.out_shape.clone()).collect();
        let parts = split_merged(&g, &shapes)?;
        for ((sn, cache), d_out) in self.subnetworks.iter().zip(&trace.branches).zip(parts) {
            let d_reduced = match (&sn.bilstm, &cache.bilstm) {
                (Some(bi), Some(c)) => bi.backward(&self.params, c, &d_out, grads)?,
                _ => d_out,
            };
            let d_conv = match (&sn.reducer, &cache.reducer) {
                (ReducerLayer::Pool(pool), ReducerCache::Pool(c)) => pool.backward(c, &d_reduced),
                (ReducerLayer::Capsule(caps), ReducerCache::Capsule(c)) => {
                    caps.backward(&self.params, c, &d_reduced, grads)?
                }
                _ => unreachable!("cache kind always matches its layer"),
            };
            let d_embedded = sn.conv.backward(&self.params, &cache.conv, &d_conv, grads)?;
            sn.embedding.backward(&self.params, &cache.ids, &d_embedded, grads);
        }
        Ok(())
    }
}

/// Builds a model from `config`, copying in the embedding tables it needs.
pub fn build_model(
    config: &EnsembleConfig,
    embeddings: &BTreeMap<EmbeddingSource, EmbeddingMatrix>,
    rng: &mut Rng,
) -> Result<Model> {
    let mut shapes = BTreeMap::new();
    for source in config.sources() {
        let m = embeddings
            .get(&source)
            .ok_or_else(|| Error::Config(format!("embedding source {source} is required but missing")))?;
        shapes.insert(source, (m.rows(), m.dim()));
    }
    let mut model = Model::skeleton(config.clone(), &shapes, rng)?;
    for source in config.sources() {
        let m = &embeddings[&source];
        let id = model
            .params
            .find(&format!("embedding.{source}"))
            .expect("registered by skeleton");
        *model.params.get_mut(id) = m.matrix.clone();
        model
            .params
            .set_trainable(id, config.fine_tune_embeddings || m.trainable);
    }
    Ok(model)
}
