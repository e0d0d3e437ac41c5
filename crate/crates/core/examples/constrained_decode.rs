//! Decoding under required and forbidden arcs, both hand-written and derived
//! from a parser state.
//!
//!     cargo run --example constrained_decode

use frparse::constraints::{derive_constraints, ConstraintSets};
use frparse::decoder::{constrained_decode, ScoreMatrix};
use frparse::transition::{ActionKind, ParserState};

fn main() -> frparse::Result<()> {
    let scores = ScoreMatrix::from_fn(4, |h, d| ((h * 7 + d * 3) % 5) as f64 - 1.0);

    let mut constraints = ConstraintSets::unconstrained();
    constraints.required.insert((0, 1));
    constraints.forbidden.insert((1, 2));
    match constrained_decode(&scores, &constraints) {
        Some(p) => println!("with 0->1 required, 1->2 forbidden: {:?} ({})", p.tree.heads(), p.score),
        None => println!("no tree satisfies the constraints"),
    }

    // After Shift, Shift, every legal next action narrows the tree space.
    let state = ParserState::initial(4)
        .apply_kind(ActionKind::Shift)?
        .apply_kind(ActionKind::Shift)?;
    for kind in state.legal_actions()? {
        let c = derive_constraints(&state, kind)?;
        let best = constrained_decode(&scores, &c);
        println!(
            "{:<9} required {:?} forbidden {} arcs -> {:?}",
            kind.name(),
            c.required,
            c.forbidden.len(),
            best.map(|p| (p.tree.heads().to_vec(), p.score))
        );
    }
    Ok(())
}
