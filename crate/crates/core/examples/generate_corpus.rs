//! Writes the bundled toy treebank (200 training, 50 development sentences).
//!
//!     cargo run --example generate_corpus -- crates/core/data

use std::path::PathBuf;

use frparse::synthetic::toy_corpus;
use frparse::treebank::write_conll;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| ".".into()));
    let (train, dev) = toy_corpus();
    for (name, corpus) in [("toy_train.conll", &train), ("toy_dev.conll", &dev)] {
        let gold: Vec<_> = corpus.iter().map(|s| s.gold_tree().expect("gold")).collect();
        std::fs::write(dir.join(name), write_conll(corpus, &gold)?)?;
        let tokens: usize = corpus.iter().map(|s| s.len()).sum();
        println!("{name}: {} sentences, {tokens} tokens", corpus.len());
    }
    Ok(())
}
