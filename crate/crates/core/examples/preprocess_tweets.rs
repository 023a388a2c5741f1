//! Cleaning and encoding raw tweets.
use aggrnet::preprocess::{build_vocab, char_trigrams, squash_repeats, trigram_sequence, Cleaner, TextPipeline, Vocab};

fn main() {
    let cleaner = Cleaner::default();
    let tweets = [
        "hope car occupants are safe and unharmed.",
        "Sooooo CLEVER of you 🙄 https://t.co/xyz #not",
        "@someone you are an IDIOT!!! 100% trash",
        "It's 2am and I can't sleep",
    ];

    for t in tweets {
        let c = cleaner.clean(t);
        println!("{t:?}\n  -> {:?}", c.joined());
    }

    println!("squash_repeats(\"nooooo\", 2) = {}", squash_repeats("nooooo", 2));
    println!("trigrams of \"hate\": {:?}", char_trigrams("hate"));

    let cleaned: Vec<_> = tweets.iter().map(|t| cleaner.clean(t)).collect();
    let vocab = build_vocab(&cleaned, 1);
    let trigrams = Vocab::from_tokens(cleaned.iter().flat_map(trigram_sequence));
    println!("\nword vocab: {} entries, trigram vocab: {} entries", vocab.len(), trigrams.len());

    let pipeline = TextPipeline::new(cleaner, vocab, Some(trigrams)).with_max_len(8);
    let enc = pipeline.encode("safe and sound, hope so");
    // 0 is padding, 1 is the OOV slot
    println!("words:    {:?}", enc.words);
    println!("trigrams: {:?}", enc.trigrams.unwrap());
}
