//! Lists the trees an arc-eager parser can still build from a state, next to
//! the trees admitted by the constraints for each action.
//!
//!     cargo run --example feasible_trees

use frparse::constraints::{derive_constraints, enumerate_feasible_trees};
use frparse::transition::{ActionKind, ParserState};

fn main() -> frparse::Result<()> {
    let start = ParserState::initial(3);
    println!("from the initial state: {} trees", enumerate_feasible_trees(&start)?.len());

    let state = start.apply_kind(ActionKind::Shift)?;
    for kind in state.legal_actions()? {
        let after = state.apply_kind(kind)?;
        let trees = enumerate_feasible_trees(&after)?;
        let c = derive_constraints(&state, kind)?;
        println!("{} -> {} trees, required {:?}", kind.name(), trees.len(), c.required);
        for t in &trees {
            println!("    {:?}", t.heads());
        }
    }
    Ok(())
}
