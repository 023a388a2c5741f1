use rayon::prelude::*;

use super::metrics::EvalReport;
use crate::error::{Error, Result};
use crate::io::Dataset;
use crate::label::Class;
use crate::model::Model;
use crate::preprocess::{EncodedInput, TextPipeline};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Prediction {
    pub class: Class,
    /// Softmax probabilities in CAG/NAG/OAG order.
    pub probabilities: [f64; 3],
}

/// Highest-scoring class; exact ties go to the lowest class index.
pub fn argmax_class(scores: &[f64; 3]) -> Class {
    let mut best = 0;
    for i in 1..3 {
        if scores[i] > scores[best] {
            best = i;
        }
    }
    Class::ALL[best]
}

/// Refuses to run a model with text artifacts other than those it was
/// trained with.
pub(crate) fn check_artifacts(model: &Model, pipeline: &TextPipeline) -> Result<()> {
    if let Some(expected) = &model.artifact_hashes {
        let found = pipeline.hashes();
        if &found != expected {
            let mut diff = Vec::new();
            if found.stopwords != expected.stopwords {
                diff.push("stopword list");
            }
            if found.emoji_ranges != expected.emoji_ranges {
                diff.push("emoji ranges");
            }
            if found.vocab != expected.vocab {
                diff.push("word vocabulary");
            }
            if found.trigram_vocab != expected.trigram_vocab {
                diff.push("trigram vocabulary");
            }
            return Err(Error::IncompatibleArtifacts(format!(
                "{} differ from those the model was trained with",
                diff.join(", ")
            )));
        }
    }
    Ok(())
}

/// Inference on already-encoded inputs, in input order.
pub fn predict_encoded(model: &Model, inputs: &[&EncodedInput]) -> Result<Vec<Prediction>> {
    inputs
        .par_iter()
        .map(|input| {
            let probabilities = model.forward(input)?;
            Ok(Prediction {
                class: argmax_class(&probabilities),
                probabilities,
            })
        })
        .collect()
}

/// Cleans, encodes and classifies raw texts.
pub fn predict<S: AsRef<str> + Sync>(model: &Model, pipeline: &TextPipeline, texts: &[S]) -> Result<Vec<Prediction>> {
    check_artifacts(model, pipeline)?;
    let encoded: Vec<EncodedInput> = texts.par_iter().map(|t| pipeline.encode(t.as_ref())).collect();
    predict_encoded(model, &encoded.iter().collect::<Vec<_>>())
}

pub fn evaluate(model: &Model, pipeline: &TextPipeline, dataset: &Dataset) -> Result<EvalReport> {
    let texts: Vec<&str> = dataset.iter().map(|e| e.text.as_str()).collect();
    let pred: Vec<Class> = predict(model, pipeline, &texts)?.iter().map(|p| p.class).collect();
    EvalReport::new(&dataset.labels(), &pred)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn argmax_and_ties() {
        assert_eq!(argmax_class(&[0.2, 0.5, 0.3]), Class::Nag);
        assert_eq!(argmax_class(&[0.4, 0.4, 0.2]), Class::Cag);
        assert_eq!(argmax_class(&[0.1, 0.45, 0.45]), Class::Nag);
        assert_eq!(argmax_class(&[0.0, 0.0, 1.0]), Class::Oag);
    }
}
