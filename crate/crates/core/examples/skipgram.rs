//! Skip-gram with negative sampling on a tiny two-topic corpus.
use aggrnet::embeddings::{train_skipgram, SkipgramConfig};
use aggrnet::Rng;

fn main() {
    let angry = ["hate", "idiot", "stupid", "trash"];
    let calm = ["hope", "peace", "love", "thanks"];
    let mut rng = Rng::new(1);
    let mut corpus = Vec::new();
    for _ in 0..400 {
        let words = if rng.below(2) == 0 { &angry } else { &calm };
        corpus.push((0..6).map(|_| words[rng.below(4)].to_string()).collect::<Vec<_>>());
    }

    let cfg = SkipgramConfig { dim: 16, window: 3, epochs: 5, seed: 7, ..SkipgramConfig::default() };
    let model = train_skipgram(&corpus, &cfg).unwrap();
    for (epoch, loss) in model.epoch_losses.iter().enumerate() {
        println!("epoch {}: loss {loss:.4}", epoch + 1);
    }

    for (a, b) in [("hate", "idiot"), ("hope", "peace"), ("hate", "hope"), ("trash", "love")] {
        println!("cos({a}, {b}) = {:+.3}", model.cosine(a, b).unwrap());
    }
}
