use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tensor::Tensor;

/// Which embedding table a subnetwork reads from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum EmbeddingSource {
    #[serde(rename = "glove++")]
    GlovePlusPlus,
    #[serde(rename = "aggression")]
    Aggression,
    #[serde(rename = "trigram")]
    Trigram,
}

/// The token stream a source is indexed by.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum InputView {
    Words,
    Trigrams,
}

impl EmbeddingSource {
    pub const ALL: [EmbeddingSource; 3] = [
        EmbeddingSource::GlovePlusPlus,
        EmbeddingSource::Aggression,
        EmbeddingSource::Trigram,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            EmbeddingSource::GlovePlusPlus => "glove++",
            EmbeddingSource::Aggression => "aggression",
            EmbeddingSource::Trigram => "trigram",
        }
    }

    pub fn view(self) -> InputView {
        match self {
            EmbeddingSource::Trigram => InputView::Trigrams,
            _ => InputView::Words,
        }
    }
}

impl fmt::Display for EmbeddingSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for EmbeddingSource {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "glove++" => Ok(EmbeddingSource::GlovePlusPlus),
            "aggression" => Ok(EmbeddingSource::Aggression),
            "trigram" => Ok(EmbeddingSource::Trigram),
            other => Err(Error::Config(format!("unknown embedding source {other:?}"))),
        }
    }
}

/// `|V|×d` table, one row per vocabulary index. Row 0 (PAD) is zero.
#[derive(Clone, Debug, PartialEq)]
pub struct EmbeddingMatrix {
    pub matrix: Tensor,
    pub trainable: bool,
    pub source: EmbeddingSource,
}

impl EmbeddingMatrix {
    pub fn new(matrix: Tensor, trainable: bool, source: EmbeddingSource) -> Result<Self> {
        if matrix.shape().len() != 2 || matrix.rows() < 2 {
            return Err(Error::shape(
                "embedding matrix",
                format!("need at least PAD and OOV rows, got {:?}", matrix.shape()),
            ));
        }
        Ok(Self {
            matrix,
            trainable,
            source,
        })
    }

    pub fn dim(&self) -> usize {
        self.matrix.cols()
    }

    pub fn rows(&self) -> usize {
        self.matrix.rows()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        self.matrix.row(i)
    }
}
