//! The four published ensembles at full size.
use std::collections::BTreeMap;

use aggrnet::embeddings::{EmbeddingMatrix, EmbeddingSource};
use aggrnet::model::{build_model, preset, Preset};
use aggrnet::{Rng, Tensor};

fn main() {
    let table = |source| EmbeddingMatrix::new(Tensor::zeros(&[500, 100]), source == EmbeddingSource::Trigram, source).unwrap();
    let tables: BTreeMap<_, _> = [EmbeddingSource::GlovePlusPlus, EmbeddingSource::Aggression, EmbeddingSource::Trigram]
        .into_iter()
        .map(|s| (s, table(s)))
        .collect();

    for p in [Preset::Dl1, Preset::Dl2, Preset::Cn1, Preset::Cn2] {
        let cfg = preset(p);
        let model = build_model(&cfg, &tables, &mut Rng::new(0)).unwrap();
        println!(
            "{p}: {} subnetworks, merged width {}, {} trainable parameters (500-row tables)",
            cfg.subnetworks.len(),
            cfg.merged_len().unwrap(),
            model.trainable_parameter_count()
        );
        for (i, s) in cfg.subnetworks.iter().enumerate() {
            println!(
                "  {:>2}: {:<10} k={} {:?}{}",
                i + 1,
                s.embedding_source.as_str(),
                s.kernel_size,
                s.reducer,
                s.post_reducer_bilstm_units.map(|u| format!(" + biLSTM({u})")).unwrap_or_default()
            );
        }
    }
}
