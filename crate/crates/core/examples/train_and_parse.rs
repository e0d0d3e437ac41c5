//! Trains both models on the bundled toy corpus, then parses the training and
//! development sets at a few mixture weights.
//!
//!     cargo run --release --example train_and_parse

use frparse::eval::attachment_scores;
use frparse::integrator::{parse_corpus, IntegratorConfig};
use frparse::scoring::{
    train_arc_scorer_crf, train_transition_classifier, CrfTrainConfig, TransitionTrainConfig,
};
use frparse::synthetic::toy_corpus;
use frparse::treebank::{projective_pairs, DepTree};

fn main() -> frparse::Result<()> {
    let (train, dev) = toy_corpus();
    let (pairs, _) = projective_pairs(&train);

    let transition = train_transition_classifier(&pairs, &TransitionTrainConfig::default())?;
    for (epoch, uas) in transition.epoch_uas.iter().enumerate() {
        println!("transition epoch {}: train UAS {uas:.2}", epoch + 1);
    }
    let graph = train_arc_scorer_crf(&pairs, &CrfTrainConfig::default())?;
    for (epoch, nll) in graph.epoch_nll.iter().enumerate() {
        println!("crf epoch {}: NLL {nll:.3}", epoch + 1);
    }

    for (name, corpus) in [("train", &train), ("dev", &dev)] {
        let gold: Vec<DepTree> = corpus.iter().map(|s| s.gold_tree().expect("gold")).collect();
        for beta in [0.0, 0.5, 1.0] {
            let config = IntegratorConfig::with_beta(beta);
            let pred = parse_corpus(corpus, &transition.model, Some(&graph.model), &config, 4)?;
            let (uas, las) = attachment_scores(&gold, &pred)?;
            println!("{name} beta={beta}: UAS {uas:.2} LAS {las:.2}");
        }
    }
    Ok(())
}
