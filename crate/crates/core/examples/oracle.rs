//! The dynamic oracle: action costs along the gold derivation of a small tree,
//! and the cost of a mistake.
//!
//!     cargo run --example oracle

use frparse::transition::{oracle_sequence, ActionKind, ParserState};
use frparse::treebank::{DepTree, Sentence};

fn main() -> frparse::Result<()> {
    let sentence = Sentence::from_words(&[("the", "DT"), ("dog", "NN"), ("barked", "VBD")]);
    let gold = DepTree::with_labels(
        vec![2, 3, 0],
        vec![Some("det".into()), Some("nsubj".into()), Some("root".into())],
    );

    let mut state = ParserState::for_sentence(&sentence);
    for action in oracle_sequence(&sentence, &gold)? {
        let costs: Vec<String> = state
            .action_costs(&gold)?
            .iter()
            .map(|(k, c)| format!("{}={c}", k.name()))
            .collect();
        println!("stack {:?} costs [{}] -> {action}", state.stack(), costs.join(" "));
        state = state.apply(&action)?;
    }
    println!("final heads {:?}", state.to_tree().heads());

    // Attaching "the" to the root loses its gold arc.
    let wrong = ParserState::for_sentence(&sentence)
        .apply_kind(ActionKind::Shift)?
        .apply_kind(ActionKind::RightArc)?;
    println!("after a wrong RightArc: {:?}", wrong.action_costs(&gold)?);
    Ok(())
}
