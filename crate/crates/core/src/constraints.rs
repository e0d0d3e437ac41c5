//! Required and forbidden arc sets induced by transitions, and the
//! exhaustive enumeration of trees derivable from a parser state.
//!
//! For a state and a candidate action, the trees that remain derivable after
//! the action are exactly the projective trees containing every required arc
//! and no forbidden arc. [`enumerate_feasible_trees`] computes that set by
//! brute force and serves as the reference for [`derive_constraints`].

use std::collections::{BTreeSet, HashMap};

use crate::error::{Error, Result};
use crate::transition::{ActionKind, ParserState};
use crate::treebank::DepTree;

/// Unlabeled arc `(head, dependent)`.
pub type Arc = (usize, usize);

/// Largest sentence length accepted by [`enumerate_feasible_trees`].
pub const ENUMERATION_LIMIT: usize = 8;

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ConstraintSets {
    pub required: BTreeSet<Arc>,
    pub forbidden: BTreeSet<Arc>,
}

impl ConstraintSets {
    pub fn unconstrained() -> Self {
        Self::default()
    }

    pub fn is_empty(&self) -> bool {
        self.required.is_empty() && self.forbidden.is_empty()
    }

    /// Disjoint required/forbidden, and no arc required in both directions.
    pub fn is_consistent(&self) -> bool {
        self.required.is_disjoint(&self.forbidden)
            && self
                .required
                .iter()
                .all(|&(h, d)| !self.required.contains(&(d, h)))
    }
}

/// Arcs between distinct stack elements plus reversed required arcs, minus
/// the required arcs themselves.
pub fn exclusion_set(stack: &[usize], required: &BTreeSet<Arc>) -> BTreeSet<Arc> {
    let mut out = BTreeSet::new();
    for &t in stack {
        for &u in stack {
            if t != u {
                out.insert((t, u));
            }
        }
    }
    out.extend(required.iter().map(|&(h, d)| (d, h)));
    out.retain(|a| !required.contains(a));
    out
}

/// Constraints on the trees derivable after applying `kind` in `state`.
///
/// Stack and buffer are taken from the pre-action state. Besides the
/// per-action terms, every word popped before this step is barred from
/// taking new dependents among the remaining stack and buffer words.
pub fn derive_constraints(state: &ParserState, kind: ActionKind) -> Result<ConstraintSets> {
    if !state.is_legal(kind) {
        return Err(Error::IllegalAction {
            action: kind.name().into(),
            clause: "not permitted in this state".into(),
        });
    }
    let stack = state.stack();
    let buffer: Vec<usize> = state.buffer().collect();
    let mut required: BTreeSet<Arc> = state.arcs().collect();
    let mut forbidden = BTreeSet::new();

    match kind {
        ActionKind::LeftArc => {
            let s = state.stack_top().expect("legal");
            let b = state.buffer_front().expect("legal");
            required.insert((b, s));
            forbidden.extend(buffer.iter().filter(|&&t| t != b).map(|&t| (t, s)));
            forbidden.extend(buffer.iter().map(|&t| (s, t)));
        }
        ActionKind::RightArc => {
            let s = state.stack_top().expect("legal");
            let b = state.buffer_front().expect("legal");
            required.insert((s, b));
            forbidden.extend(
                buffer
                    .iter()
                    .chain(stack)
                    .filter(|&&t| t != s && t != b)
                    .map(|&t| (t, b)),
            );
            forbidden.extend(stack.iter().map(|&t| (b, t)));
        }
        ActionKind::Reduce => {
            let s = state.stack_top().expect("legal");
            forbidden.extend(buffer.iter().map(|&t| (t, s)));
            forbidden.extend(buffer.iter().map(|&t| (s, t)));
        }
        ActionKind::Shift => {
            let b = state.buffer_front().expect("legal");
            forbidden.extend(stack.iter().map(|&t| (t, b)));
            forbidden.extend(stack.iter().map(|&t| (b, t)));
        }
    }
    forbidden.extend(exclusion_set(stack, &required));

    let remaining: Vec<usize> = stack.iter().copied().chain(buffer.iter().copied()).collect();
    for w in (0..=state.len()).filter(|&w| state.is_popped(w)) {
        forbidden.extend(remaining.iter().map(|&t| (w, t)));
    }

    forbidden.retain(|&(h, d)| h != d && !required.contains(&(h, d)));
    Ok(ConstraintSets {
        required,
        forbidden,
    })
}

/// True iff `tree` contains every required arc and no forbidden arc.
pub fn tree_satisfies(tree: &DepTree, constraints: &ConstraintSets) -> bool {
    let arcs = tree.arc_set();
    constraints.required.is_subset(&arcs) && arcs.is_disjoint(&constraints.forbidden)
}

/// Every complete tree produced by some legal action sequence from `state`
/// that ends in a final configuration. Exponential; bounded by
/// [`ENUMERATION_LIMIT`].
pub fn enumerate_feasible_trees(state: &ParserState) -> Result<BTreeSet<DepTree>> {
    if state.len() > ENUMERATION_LIMIT {
        return Err(Error::Usage(format!(
            "feasible-tree enumeration limited to {ENUMERATION_LIMIT} tokens, got {}",
            state.len()
        )));
    }
    let mut memo = FeasibleMemo::default();
    Ok(memo.trees(state).iter().cloned().collect())
}

/// Stack, buffer front and heads: everything that decides future transitions.
type StateKey = (Vec<usize>, Option<usize>, Vec<Option<usize>>);

/// Memoized feasible-tree enumeration, reusable across many states of one
/// sentence length.
#[derive(Default)]
pub struct FeasibleMemo {
    cache: HashMap<StateKey, std::rc::Rc<Vec<DepTree>>>,
}

impl FeasibleMemo {
    /// Feasible unlabeled trees from `state`, sorted and deduplicated.
    pub fn trees(&mut self, state: &ParserState) -> std::rc::Rc<Vec<DepTree>> {
        let key = (
            state.stack().to_vec(),
            state.buffer_front(),
            (0..=state.len()).map(|d| state.head_of(d)).collect(),
        );
        if let Some(hit) = self.cache.get(&key) {
            return hit.clone();
        }
        let result = if state.is_final() {
            vec![state.to_tree().unlabeled()]
        } else {
            let mut all = BTreeSet::new();
            for kind in ActionKind::ALL {
                if state.is_legal(kind) {
                    let next = state.apply_kind(kind).expect("legal");
                    all.extend(self.trees(&next).iter().cloned());
                }
            }
            all.into_iter().collect()
        };
        let rc = std::rc::Rc::new(result);
        self.cache.insert(key, rc.clone());
        rc
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ActionKind::*;

    fn after(n: usize, kinds: &[ActionKind]) -> ParserState {
        kinds
            .iter()
            .fold(ParserState::initial(n), |s, &k| s.apply_kind(k).unwrap())
    }

    fn set(arcs: &[Arc]) -> BTreeSet<Arc> {
        arcs.iter().copied().collect()
    }

    #[test]
    fn exclusion_examples() {
        assert_eq!(exclusion_set(&[0, 1], &set(&[(0, 1)])), set(&[(1, 0)]));
        assert!(exclusion_set(&[], &BTreeSet::new()).is_empty());
        assert_eq!(
            exclusion_set(&[0, 1, 2], &BTreeSet::new()),
            set(&[(0, 1), (0, 2), (1, 0), (1, 2), (2, 0), (2, 1)])
        );
    }

    #[test]
    fn right_arc_after_shift() {
        let s = after(2, &[Shift]);
        let c = derive_constraints(&s, RightArc).unwrap();
        assert_eq!(c.required, set(&[(0, 1)]));
        assert!(c.forbidden.contains(&(2, 1)));
        assert!(c.required.is_disjoint(&c.forbidden));
        assert!(c.is_consistent());
    }

    #[test]
    fn shift_after_shift() {
        let s = after(2, &[Shift]);
        let c = derive_constraints(&s, Shift).unwrap();
        assert!(c.required.is_empty());
        assert!(c.forbidden.contains(&(0, 1)));
        // After shifting w1 its head can still come from the buffer.
        assert!(!c.forbidden.contains(&(2, 1)));
        let feasible = enumerate_feasible_trees(&s.apply_kind(Shift).unwrap()).unwrap();
        assert_eq!(feasible.into_iter().collect::<Vec<_>>(), vec![DepTree::new(vec![2, 0])]);
    }

    #[test]
    fn feasible_after_right_arc() {
        let s = after(2, &[Shift, RightArc]);
        let trees = enumerate_feasible_trees(&s).unwrap();
        let expected: BTreeSet<_> = [DepTree::new(vec![0, 1]), DepTree::new(vec![0, 0])]
            .into_iter()
            .collect();
        assert_eq!(trees, expected);
    }

    #[test]
    fn feasible_from_initial_and_final() {
        assert_eq!(enumerate_feasible_trees(&ParserState::initial(2)).unwrap().len(), 3);
        let fin = after(2, &[Shift, RightArc, RightArc, Reduce, Reduce]);
        let trees = enumerate_feasible_trees(&fin).unwrap();
        assert_eq!(trees.into_iter().collect::<Vec<_>>(), vec![DepTree::new(vec![0, 1])]);
    }

    #[test]
    fn enumeration_bound() {
        assert!(matches!(
            enumerate_feasible_trees(&ParserState::initial(ENUMERATION_LIMIT + 1)),
            Err(Error::Usage(_))
        ));
    }

    #[test]
    fn satisfaction() {
        let t = DepTree::new(vec![0, 1]);
        assert!(tree_satisfies(&t, &ConstraintSets::unconstrained()));
        let req = ConstraintSets {
            required: set(&[(0, 1)]),
            forbidden: BTreeSet::new(),
        };
        assert!(tree_satisfies(&t, &req));
        let forb = ConstraintSets {
            required: BTreeSet::new(),
            forbidden: set(&[(0, 2)]),
        };
        assert!(!tree_satisfies(&DepTree::new(vec![0, 0]), &forb));
    }

    #[test]
    fn illegal_action_rejected() {
        assert!(derive_constraints(&ParserState::initial(2), LeftArc).is_err());
    }

    #[test]
    fn shifting_last_token_is_infeasible() {
        let s = after(2, &[Shift, RightArc]);
        let next = s.apply_kind(Shift).unwrap();
        assert!(enumerate_feasible_trees(&next).unwrap().is_empty());
    }
}
