use std::fmt::Write as _;

use rayon::prelude::*;

use super::predict::check_artifacts;
use crate::error::Result;
use crate::io::Dataset;
use crate::label::Class;
use crate::model::{FeatureSource, Model};
use crate::preprocess::TextPipeline;

/// One activation vector per example.
#[derive(Clone, Debug, PartialEq)]
pub struct FeatureTable {
    pub rows: Vec<(String, Class, Vec<f64>)>,
}

impl FeatureTable {
    pub fn width(&self) -> usize {
        self.rows.first().map_or(0, |r| r.2.len())
    }

    /// Header `id<TAB>label<TAB>f0..fN`, then one row per example. Values use
    /// the shortest representation that parses back to the same `f64`.
    pub fn to_tsv(&self) -> String {
        let mut out = String::from("id\tlabel");
        for i in 0..self.width() {
            let _ = write!(out, "\tf{i}");
        }
        out.push('\n');
        for (id, label, values) in &self.rows {
            out.push_str(id);
            out.push('\t');
            out.push_str(label.as_str());
            for v in values {
                let _ = write!(out, "\t{v}");
            }
            out.push('\n');
        }
        out
    }
}

pub fn export_features(
    model: &Model,
    pipeline: &TextPipeline,
    dataset: &Dataset,
    which: FeatureSource,
) -> Result<FeatureTable> {
    check_artifacts(model, pipeline)?;
    let rows = dataset
        .examples
        .par_iter()
        .map(|e| {
            let features = model.features(&pipeline.encode(&e.text), which)?;
            Ok((e.id.clone(), e.label, features))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(FeatureTable { rows })
}
