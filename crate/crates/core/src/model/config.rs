use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::embeddings::EmbeddingSource;
use crate::error::{Error, Result};
use crate::label::Class;
use crate::nn::CapsuleLayerConfig;
use crate::preprocess::MAX_SEQUENCE_LEN;

pub const DEFAULT_CONV_FILTERS: usize = 128;
pub const DEFAULT_DENSE_HIDDEN: usize = 128;
pub const DEFAULT_DROPOUT: f64 = 0.5;

/// How a subnetwork shrinks the convolution output.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Reducer {
    MaxPool { window: usize },
    Capsule(CapsuleLayerConfig),
}

/// One branch: embedding → conv+ReLU+dropout → reducer → optional biLSTM →
/// flatten.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SubnetworkSpec {
    pub embedding_source: EmbeddingSource,
    pub kernel_size: usize,
    pub conv_filters: usize,
    pub reducer: Reducer,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub post_reducer_bilstm_units: Option<usize>,
}

impl SubnetworkSpec {
    /// `(rows, cols)` of the branch output before flattening, for an input of
    /// `seq_len` tokens.
    pub fn output_shape(&self, seq_len: usize) -> Result<(usize, usize)> {
        if seq_len < self.kernel_size {
            return Err(Error::Config(format!(
                "sequence length {seq_len} shorter than kernel {}",
                self.kernel_size
            )));
        }
        let conv_len = seq_len + 1 - self.kernel_size;
        let (rows, cols) = match self.reducer {
            Reducer::MaxPool { window } => {
                if window == 0 || conv_len < window {
                    return Err(Error::Config(format!(
                        "pool window {window} does not fit conv output of length {conv_len}"
                    )));
                }
                (conv_len / window, self.conv_filters)
            }
            Reducer::Capsule(c) => (c.num_output_capsules, c.capsule_dim),
        };
        Ok(match self.post_reducer_bilstm_units {
            Some(units) => (rows, 2 * units),
            None => (rows, cols),
        })
    }

    pub fn flat_len(&self, seq_len: usize) -> Result<usize> {
        let (r, c) = self.output_shape(seq_len)?;
        Ok(r * c)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnsembleConfig {
    pub num_classes: usize,
    pub seed: u64,
    pub max_len: usize,
    /// Dropout rate after every convolution.
    pub dropout: f64,
    /// Train embedding tables along with the rest of the model.
    pub fine_tune_embeddings: bool,
    pub dense_hidden_sizes: Vec<usize>,
    pub subnetworks: Vec<SubnetworkSpec>,
}

impl EnsembleConfig {
    pub fn new(subnetworks: Vec<SubnetworkSpec>) -> Self {
        Self {
            num_classes: Class::COUNT,
            seed: 42,
            max_len: MAX_SEQUENCE_LEN,
            dropout: DEFAULT_DROPOUT,
            fine_tune_embeddings: false,
            dense_hidden_sizes: vec![DEFAULT_DENSE_HIDDEN],
            subnetworks,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.subnetworks.is_empty() {
            return Err(Error::Config("an ensemble needs at least one subnetwork".into()));
        }
        if self.num_classes != Class::COUNT {
            return Err(Error::Config(format!(
                "the output layer has exactly {} classes, config says {}",
                Class::COUNT,
                self.num_classes
            )));
        }
        if !(0.0..1.0).contains(&self.dropout) {
            return Err(Error::Config(format!("dropout {} outside [0, 1)", self.dropout)));
        }
        if self.dense_hidden_sizes.contains(&0) {
            return Err(Error::Config("dense layer sizes must be >= 1".into()));
        }
        for (i, sn) in self.subnetworks.iter().enumerate() {
            if sn.kernel_size == 0 || sn.conv_filters == 0 {
                return Err(Error::Config(format!("subnetwork {}: zero kernel or filters", i + 1)));
            }
            if let Reducer::Capsule(c) = sn.reducer {
                c.validate()?;
            }
            if sn.post_reducer_bilstm_units == Some(0) {
                return Err(Error::Config(format!("subnetwork {}: zero biLSTM units", i + 1)));
            }
            sn.output_shape(self.max_len)
                .map_err(|e| Error::Config(format!("subnetwork {}: {e}", i + 1)))?;
        }
        Ok(())
    }

    /// Width of the merged feature vector fed to the dense head.
    pub fn merged_len(&self) -> Result<usize> {
        self.subnetworks.iter().map(|s| s.flat_len(self.max_len)).sum()
    }

    pub fn sources(&self) -> Vec<EmbeddingSource> {
        let mut s: Vec<_> = self.subnetworks.iter().map(|sn| sn.embedding_source).collect();
        s.sort();
        s.dedup();
        s
    }

    /// Replaces the filter count of every subnetwork.
    pub fn with_filters(mut self, filters: usize) -> Self {
        self.subnetworks.iter_mut().for_each(|s| s.conv_filters = filters);
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Preset {
    Dl1,
    Dl2,
    Cn1,
    Cn2,
}

impl FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "DL1" => Ok(Preset::Dl1),
            "DL2" => Ok(Preset::Dl2),
            "CN1" => Ok(Preset::Cn1),
            "CN2" => Ok(Preset::Cn2),
            _ => Err(Error::Config(format!("unknown preset {s:?} (expected DL1, DL2, CN1 or CN2)"))),
        }
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Preset::Dl1 => "DL1",
            Preset::Dl2 => "DL2",
            Preset::Cn1 => "CN1",
            Preset::Cn2 => "CN2",
        })
    }
}

fn branch(source: EmbeddingSource, kernel_size: usize, reducer: Reducer, bilstm: Option<usize>) -> SubnetworkSpec {
    SubnetworkSpec {
        embedding_source: source,
        kernel_size,
        conv_filters: DEFAULT_CONV_FILTERS,
        reducer,
        post_reducer_bilstm_units: bilstm,
    }
}

/// The DL1, DL2, CN1 and CN2 ensembles.
///
/// * DL1: three glove++ branches, kernels 3/5/7, max-pooling.
/// * DL2: nine branches; 1-3 glove++, 4-6 aggression, 7-9 trigram; kernels
///   cycle 3/5/7; max-pooling followed by a 200-unit biLSTM.
/// * CN1: three glove++ branches, kernels 3/4/5, 10 capsules of 16 dims.
/// * CN2: CN1 plus a 300-unit biLSTM after the capsule layer.
pub fn preset(name: Preset) -> EnsembleConfig {
    use EmbeddingSource::*;
    let caps = Reducer::Capsule(CapsuleLayerConfig::new(10, 16));
    let subnetworks = match name {
        Preset::Dl1 => [3, 5, 7]
            .into_iter()
            .map(|k| branch(GlovePlusPlus, k, Reducer::MaxPool { window: 2 }, None))
            .collect(),
        Preset::Dl2 => [GlovePlusPlus, Aggression, Trigram]
            .into_iter()
            .flat_map(|src| {
                [3, 5, 7]
                    .into_iter()
                    .map(move |k| branch(src, k, Reducer::MaxPool { window: 3 }, Some(200)))
            })
            .collect(),
        Preset::Cn1 => [3, 4, 5].into_iter().map(|k| branch(GlovePlusPlus, k, caps, None)).collect(),
        Preset::Cn2 => [3, 4, 5]
            .into_iter()
            .map(|k| branch(GlovePlusPlus, k, caps, Some(300)))
            .collect(),
    };
    EnsembleConfig::new(subnetworks)
}
