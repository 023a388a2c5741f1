//! The three embedding sources: glove++ (pretrained, gaps filled by skip-gram),
//! aggression (skip-gram on CAG/OAG tweets only) and character trigrams.
mod common;

use std::io::Cursor;
use std::path::Path;

use aggrnet::embeddings::{
    aggressive_subcorpus, build_aggression_embeddings, build_trigram_embeddings, compose_glove_plus_plus,
    parse_pretrained, train_skipgram, SkipgramConfig,
};
use aggrnet::preprocess::{build_vocab, CleanText, Cleaner};

fn main() -> aggrnet::Result<()> {
    let data = common::toy_dataset(90, 3);
    let cleaner = Cleaner::default();
    let cleaned: Vec<CleanText> = data.iter().map(|e| cleaner.clean(&e.text)).collect();
    let vocab = build_vocab(&cleaned, 1);
    let cfg = SkipgramConfig { dim: 4, epochs: 2, ..SkipgramConfig::default() };

    // a pretrained file that knows two of the words
    let glove = "hope 0.1 0.2 0.3 0.4\nhate -0.4 -0.3 -0.2 -0.1\nunused 1 1 1 1\n";
    let pretrained = parse_pretrained(Cursor::new(glove), Path::new("glove.txt"), &vocab)?;
    let sentences: Vec<Vec<String>> = cleaned.iter().map(|c| c.tokens.clone()).collect();
    let trained = train_skipgram(&sentences, &cfg)?;
    let gpp = compose_glove_plus_plus(&vocab, &pretrained, &trained.vectors)?;
    println!("glove++: {} x {}, {} rows from the pretrained file", gpp.rows(), gpp.dim(), pretrained.len());
    println!("  hope -> {:?}", gpp.row(vocab.lookup("hope")));

    let sub = aggressive_subcorpus(&data, &cleaner);
    let aggr = build_aggression_embeddings(&data, &cleaner, &vocab, &cfg)?;
    println!("aggression: {} x {}, trained on {} of {} tweets", aggr.rows(), aggr.dim(), sub.len(), data.len());

    let (tri_vocab, tri) = build_trigram_embeddings(&cleaned, &cfg)?;
    println!("trigram: {} x {}, trainable: {}", tri.rows(), tri.dim(), tri.trainable);
    println!("  first trigrams: {:?}", tri_vocab.entries().skip(2).take(6).map(|(_, t)| t).collect::<Vec<_>>());
    Ok(())
}
