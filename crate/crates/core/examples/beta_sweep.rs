//! Chooses the mixture weight on the development split and prints the curve
//! and a full evaluation report at the chosen value.
//!
//!     cargo run --release --example beta_sweep

use frparse::eval::{default_beta_grid, evaluate, sweep_beta, Punctuation};
use frparse::integrator::{parse_corpus, IntegratorConfig};
use frparse::scoring::{
    train_arc_scorer_crf, train_transition_classifier, CrfTrainConfig, TransitionTrainConfig,
    ViewConfig,
};
use frparse::synthetic::toy_corpus;
use frparse::treebank::{projective_pairs, DepTree};

fn main() -> frparse::Result<()> {
    let (train, dev) = toy_corpus();
    let (pairs, _) = projective_pairs(&train);
    let transition = train_transition_classifier(
        &pairs,
        &TransitionTrainConfig {
            views: ViewConfig::enhanced(),
            ..Default::default()
        },
    )?
    .model;
    let graph = train_arc_scorer_crf(&pairs, &CrfTrainConfig::default())?.model;

    let sweep = sweep_beta(&dev, &transition, Some(&graph), &default_beta_grid(), 1.0, 4)?;
    print!("{}", sweep.to_tsv());
    println!("chosen beta {}", sweep.best_beta);

    let config = IntegratorConfig::with_beta(sweep.best_beta);
    let pred = parse_corpus(&dev, &transition, Some(&graph), &config, 4)?;
    let gold: Vec<DepTree> = dev.iter().map(|s| s.gold_tree().expect("gold")).collect();
    print!("{}", evaluate(&dev, &gold, &pred, &Punctuation::exclude_ptb())?);
    Ok(())
}
