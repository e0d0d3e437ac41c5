//! Arc-eager transition system with the root placed at the front of the
//! initial buffer, plus the closed-form dynamic oracle.
//!
//! States are persistent values: [`ParserState::apply`] returns a new state
//! and leaves the receiver untouched.

use std::fmt;

use crate::error::{Error, Result};
use crate::treebank::{is_projective, DepTree, Sentence};

/// Transition kinds, declared in oracle tie-break priority order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ActionKind {
    LeftArc,
    RightArc,
    Reduce,
    Shift,
}

impl ActionKind {
    pub const ALL: [ActionKind; 4] = [
        ActionKind::LeftArc,
        ActionKind::RightArc,
        ActionKind::Reduce,
        ActionKind::Shift,
    ];

    pub fn is_arc(self) -> bool {
        matches!(self, ActionKind::LeftArc | ActionKind::RightArc)
    }

    pub fn name(self) -> &'static str {
        match self {
            ActionKind::LeftArc => "LEFT-ARC",
            ActionKind::RightArc => "RIGHT-ARC",
            ActionKind::Reduce => "REDUCE",
            ActionKind::Shift => "SHIFT",
        }
    }
}

/// A transition. Arc-building kinds carry a dependency label.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Action {
    pub kind: ActionKind,
    pub label: Option<String>,
}

impl Action {
    pub fn left_arc(label: impl Into<String>) -> Self {
        Action {
            kind: ActionKind::LeftArc,
            label: Some(label.into()),
        }
    }

    pub fn right_arc(label: impl Into<String>) -> Self {
        Action {
            kind: ActionKind::RightArc,
            label: Some(label.into()),
        }
    }

    pub fn reduce() -> Self {
        Action {
            kind: ActionKind::Reduce,
            label: None,
        }
    }

    pub fn shift() -> Self {
        Action {
            kind: ActionKind::Shift,
            label: None,
        }
    }

    /// Parses the textual form produced by `Display`.
    pub fn parse(text: &str) -> Option<Action> {
        match text {
            "REDUCE" => Some(Action::reduce()),
            "SHIFT" => Some(Action::shift()),
            _ => {
                let (kind, label) = text.split_once(':')?;
                if label.is_empty() {
                    return None;
                }
                match kind {
                    "LEFT-ARC" => Some(Action::left_arc(label)),
                    "RIGHT-ARC" => Some(Action::right_arc(label)),
                    _ => None,
                }
            }
        }
    }
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.label {
            Some(l) => write!(f, "{}:{}", self.kind.name(), l),
            None => f.write_str(self.kind.name()),
        }
    }
}

/// Parser configuration: stack, buffer, action history and partial arc set.
///
/// The buffer is always the contiguous suffix `front..=n` of the sentence, so
/// it is stored as its front position.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ParserState {
    n: usize,
    stack: Vec<usize>,
    front: usize,
    history: Vec<Action>,
    heads: Vec<Option<(usize, Option<String>)>>,
}

impl ParserState {
    /// Initial state: empty stack, buffer `[0, 1, ..., n]`.
    pub fn initial(n: usize) -> Self {
        ParserState {
            n,
            stack: Vec::new(),
            front: 0,
            history: Vec::new(),
            heads: vec![None; n + 1],
        }
    }

    pub fn for_sentence(sentence: &Sentence) -> Self {
        Self::initial(sentence.len())
    }

    /// Number of real tokens.
    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn stack(&self) -> &[usize] {
        &self.stack
    }

    pub fn buffer(&self) -> std::ops::RangeInclusive<usize> {
        self.front..=self.n
    }

    pub fn buffer_front(&self) -> Option<usize> {
        (self.front <= self.n).then_some(self.front)
    }

    pub fn buffer_len(&self) -> usize {
        (self.n + 1).saturating_sub(self.front)
    }

    pub fn stack_top(&self) -> Option<usize> {
        self.stack.last().copied()
    }

    /// Stack element `depth` below the top (0 = top).
    pub fn stack_at(&self, depth: usize) -> Option<usize> {
        self.stack.len().checked_sub(depth + 1).map(|i| self.stack[i])
    }

    pub fn history(&self) -> &[Action] {
        &self.history
    }

    pub fn head_of(&self, dependent: usize) -> Option<usize> {
        self.heads[dependent].as_ref().map(|(h, _)| *h)
    }

    pub fn label_of(&self, dependent: usize) -> Option<&str> {
        self.heads[dependent].as_ref().and_then(|(_, l)| l.as_deref())
    }

    pub fn has_head(&self, position: usize) -> bool {
        self.heads[position].is_some()
    }

    /// Built arcs as `(head, dependent)` in dependent order.
    pub fn arcs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.heads
            .iter()
            .enumerate()
            .filter_map(|(d, h)| h.as_ref().map(|(h, _)| (*h, d)))
    }

    /// Labeled arcs `(head, dependent, label)`.
    pub fn labeled_arcs(&self) -> impl Iterator<Item = (usize, usize, Option<&str>)> + '_ {
        self.heads
            .iter()
            .enumerate()
            .filter_map(|(d, h)| h.as_ref().map(|(h, l)| (*h, d, l.as_deref())))
    }

    /// Positions that have left both stack and buffer.
    pub fn is_popped(&self, position: usize) -> bool {
        position < self.front && !self.stack.contains(&position)
    }

    /// Dependents of `head` in increasing position order.
    pub fn dependents(&self, head: usize) -> impl Iterator<Item = usize> + '_ {
        self.arcs().filter(move |&(h, _)| h == head).map(|(_, d)| d)
    }

    /// Final configuration: stack `[0]`, empty buffer.
    pub fn is_final(&self) -> bool {
        self.front > self.n && self.stack == [0]
    }

    /// True when no transition is permitted, final or not.
    pub fn is_terminal(&self) -> bool {
        ActionKind::ALL.iter().all(|&k| self.check(k).is_err())
    }

    fn check(&self, kind: ActionKind) -> std::result::Result<(), &'static str> {
        let top = self.stack_top();
        let buffer_nonempty = self.front <= self.n;
        match kind {
            ActionKind::LeftArc => match top {
                None => Err("stack is empty"),
                Some(0) => Err("stack top is the root"),
                Some(s) if self.has_head(s) => Err("stack top already has a head"),
                Some(_) if !buffer_nonempty => Err("buffer is empty"),
                Some(_) => Ok(()),
            },
            ActionKind::RightArc => match top {
                None => Err("stack is empty"),
                Some(_) if !buffer_nonempty => Err("buffer is empty"),
                Some(_) => Ok(()),
            },
            ActionKind::Reduce => match top {
                None => Err("stack is empty"),
                Some(s) if !self.has_head(s) => Err("stack top has no head"),
                Some(_) => Ok(()),
            },
            ActionKind::Shift if !buffer_nonempty => Err("buffer is empty"),
            ActionKind::Shift => Ok(()),
        }
    }

    pub fn is_legal(&self, kind: ActionKind) -> bool {
        self.check(kind).is_ok()
    }

    /// Permitted transition kinds, in priority order. Errors on a final state.
    pub fn legal_actions(&self) -> Result<Vec<ActionKind>> {
        if self.is_final() {
            return Err(Error::Usage("legal_actions called on a final state".into()));
        }
        Ok(ActionKind::ALL
            .into_iter()
            .filter(|&k| self.is_legal(k))
            .collect())
    }

    /// Applies a transition, returning the successor state.
    pub fn apply(&self, action: &Action) -> Result<ParserState> {
        if let Err(clause) = self.check(action.kind) {
            return Err(Error::IllegalAction {
                action: action.to_string(),
                clause: clause.into(),
            });
        }
        if action.kind.is_arc() && action.label.as_deref().is_some_and(str::is_empty) {
            return Err(Error::IllegalAction {
                action: action.to_string(),
                clause: "arc label is empty".into(),
            });
        }
        let mut next = self.clone();
        match action.kind {
            ActionKind::LeftArc => {
                let s = next.stack.pop().expect("checked");
                next.heads[s] = Some((self.front, action.label.clone()));
            }
            ActionKind::RightArc => {
                let s = *next.stack.last().expect("checked");
                next.heads[self.front] = Some((s, action.label.clone()));
                next.stack.push(self.front);
                next.front += 1;
            }
            ActionKind::Reduce => {
                next.stack.pop();
            }
            ActionKind::Shift => {
                next.stack.push(self.front);
                next.front += 1;
            }
        }
        next.history.push(action.clone());
        Ok(next)
    }

    /// Applies a transition kind with a placeholder label on arc actions.
    pub fn apply_kind(&self, kind: ActionKind) -> Result<ParserState> {
        let action = Action {
            kind,
            label: kind.is_arc().then(|| "dep".to_string()),
        };
        self.apply(&action)
    }

    /// The built arc set completed to a tree: tokens without a head are
    /// attached to the root.
    pub fn to_tree(&self) -> DepTree {
        let (heads, labels) = (1..=self.n)
            .map(|d| match &self.heads[d] {
                Some((h, l)) => (*h, l.clone()),
                None => (0, None),
            })
            .unzip();
        DepTree::with_labels(heads, labels)
    }

    /// Closed-form dynamic-oracle costs of every legal kind against a
    /// projective gold tree. Costs are over unlabeled arcs.
    pub fn action_costs(&self, gold: &DepTree) -> Result<Vec<(ActionKind, usize)>> {
        check_gold(self, gold)?;
        let gh = |d: usize| gold.head(d);
        let mut costs = Vec::with_capacity(4);
        for kind in self.legal_actions()? {
            let cost = match kind {
                ActionKind::LeftArc => {
                    let s = self.stack_top().expect("legal");
                    let b = self.front;
                    let lost_head = (gh(s) > b && gh(s) <= self.n) as usize;
                    let lost_deps = self.buffer().filter(|&k| gh(k) == s).count();
                    lost_head + lost_deps
                }
                ActionKind::RightArc => {
                    let s = self.stack_top().expect("legal");
                    let b = self.front;
                    let h = gh(b);
                    let lost_head = (h != s
                        && (self.stack.contains(&h) || (h > b && h <= self.n)))
                        as usize;
                    let lost_deps = self
                        .stack
                        .iter()
                        .filter(|&&k| k != 0 && !self.has_head(k) && gh(k) == b)
                        .count();
                    lost_head + lost_deps
                }
                ActionKind::Reduce => {
                    let s = self.stack_top().expect("legal");
                    self.buffer().filter(|&k| gh(k) == s).count()
                }
                ActionKind::Shift => {
                    let b = self.front;
                    if b == 0 {
                        0
                    } else {
                        let lost_head = self.stack.contains(&gh(b)) as usize;
                        let lost_deps = self
                            .stack
                            .iter()
                            .filter(|&&k| k != 0 && !self.has_head(k) && gh(k) == b)
                            .count();
                        lost_head + lost_deps
                    }
                }
            };
            costs.push((kind, cost));
        }
        Ok(costs)
    }
}

fn check_gold(state: &ParserState, gold: &DepTree) -> Result<()> {
    if gold.len() != state.n {
        return Err(Error::Usage(format!(
            "gold tree covers {} tokens, state has {}",
            gold.len(),
            state.n
        )));
    }
    if !gold.is_well_formed() || !is_projective(gold) {
        return Err(Error::Usage("gold tree must be a projective tree".into()));
    }
    Ok(())
}

/// Deterministic zero-cost derivation of `gold`, breaking ties by
/// `LeftArc > RightArc > Reduce > Shift`. Labels are copied from `gold`.
pub fn oracle_sequence(sentence: &Sentence, gold: &DepTree) -> Result<Vec<Action>> {
    let mut state = ParserState::for_sentence(sentence);
    check_gold(&state, gold)?;
    while !state.is_final() {
        let costs = state.action_costs(gold)?;
        let kind = costs
            .iter()
            .find(|(_, c)| *c == 0)
            .map(|(k, _)| *k)
            .ok_or_else(|| Error::Usage("no zero-cost action; state is off the gold path".into()))?;
        let action = labeled_for(&state, kind, gold);
        state = state.apply(&action)?;
    }
    Ok(state.history().to_vec())
}

/// Attaches the gold label to an arc action, when the arc it builds is gold.
pub(crate) fn labeled_for(state: &ParserState, kind: ActionKind, gold: &DepTree) -> Action {
    let dependent = match kind {
        ActionKind::LeftArc => state.stack_top(),
        ActionKind::RightArc => state.buffer_front(),
        _ => return Action { kind, label: None },
    };
    let label = dependent
        .and_then(|d| gold.label(d))
        .unwrap_or("dep")
        .to_string();
    Action {
        kind,
        label: Some(label),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn state_after(n: usize, kinds: &[ActionKind]) -> ParserState {
        kinds
            .iter()
            .fold(ParserState::initial(n), |s, &k| s.apply_kind(k).unwrap())
    }

    use ActionKind::*;

    #[test]
    fn initial_states() {
        let s = ParserState::initial(2);
        assert!(s.stack().is_empty());
        assert_eq!(s.buffer().collect::<Vec<_>>(), vec![0, 1, 2]);
        assert!(s.history().is_empty());
        assert_eq!(s.arcs().count(), 0);
        assert!(!s.is_final());
        assert_eq!(ParserState::initial(1).buffer().collect::<Vec<_>>(), vec![0, 1]);
    }

    #[test]
    fn final_shape() {
        let s = state_after(2, &[Shift, RightArc, RightArc, Reduce, Reduce]);
        assert!(s.is_final());
        let mut arcs: Vec<_> = s.arcs().collect();
        arcs.sort();
        assert_eq!(arcs, vec![(0, 1), (1, 2)]);

        let not_reduced = state_after(2, &[Shift, Shift, LeftArc, RightArc]);
        assert_eq!(not_reduced.stack(), &[0, 2]);
        assert!(!not_reduced.is_final());
    }

    #[test]
    fn legality_clauses() {
        assert_eq!(ParserState::initial(2).legal_actions().unwrap(), vec![Shift]);
        let s = state_after(2, &[Shift]);
        assert_eq!(s.legal_actions().unwrap(), vec![RightArc, Shift]);
        let s = state_after(2, &[Shift, RightArc]);
        assert_eq!(s.legal_actions().unwrap(), vec![RightArc, Reduce, Shift]);
        let fin = state_after(1, &[Shift, RightArc, Reduce]);
        assert!(matches!(fin.legal_actions(), Err(Error::Usage(_))));
    }

    #[test]
    fn apply_rewrites() {
        let s0 = ParserState::initial(2);
        let s1 = s0.apply(&Action::shift()).unwrap();
        assert_eq!(s1.stack(), &[0]);
        assert_eq!(s1.buffer().collect::<Vec<_>>(), vec![1, 2]);
        let s2 = s1.apply(&Action::right_arc("l")).unwrap();
        assert_eq!(s2.stack(), &[0, 1]);
        assert_eq!(s2.buffer().collect::<Vec<_>>(), vec![2]);
        assert_eq!(s2.labeled_arcs().collect::<Vec<_>>(), vec![(0, 1, Some("l"))]);
        // Inputs are untouched.
        assert_eq!(s0, ParserState::initial(2));
        assert_eq!(s1.stack(), &[0]);
        assert_eq!(s1.history().len(), 1);
    }

    #[test]
    fn illegal_action_names_clause() {
        let err = ParserState::initial(2)
            .apply(&Action::left_arc("x"))
            .unwrap_err();
        match err {
            Error::IllegalAction { clause, .. } => assert_eq!(clause, "stack is empty"),
            e => panic!("unexpected {e}"),
        }
        let s = state_after(2, &[Shift]);
        match s.apply(&Action::left_arc("x")).unwrap_err() {
            Error::IllegalAction { clause, .. } => assert_eq!(clause, "stack top is the root"),
            e => panic!("unexpected {e}"),
        }
        match s.apply(&Action::reduce()).unwrap_err() {
            Error::IllegalAction { clause, .. } => assert_eq!(clause, "stack top has no head"),
            e => panic!("unexpected {e}"),
        }
    }

    #[test]
    fn costs_at_root_on_stack() {
        // gold: 1 <- 2, 2 <- 0
        let gold = DepTree::new(vec![2, 0]);
        let s = state_after(2, &[Shift]);
        let costs = s.action_costs(&gold).unwrap();
        assert_eq!(costs, vec![(RightArc, 1), (Shift, 0)]);
    }

    #[test]
    fn oracle_examples() {
        let sentence = Sentence::from_words(&[("w1", "A"), ("w2", "B")]);
        let gold = DepTree::with_labels(vec![0, 1], vec![Some("root".into()), Some("x".into())]);
        let seq = oracle_sequence(&sentence, &gold).unwrap();
        let kinds: Vec<_> = seq.iter().map(|a| a.kind).collect();
        assert_eq!(kinds, vec![Shift, RightArc, RightArc, Reduce, Reduce]);
        assert_eq!(seq[1], Action::right_arc("root"));
        assert_eq!(seq[2], Action::right_arc("x"));

        let one = Sentence::from_words(&[("w", "A")]);
        let seq = oracle_sequence(&one, &DepTree::new(vec![0])).unwrap();
        let kinds: Vec<_> = seq.iter().map(|a| a.kind).collect();
        assert_eq!(kinds, vec![Shift, RightArc, Reduce]);
    }

    #[test]
    fn oracle_rejects_nonprojective() {
        let s = Sentence::from_words(&[("a", "X"), ("b", "X"), ("c", "X")]);
        assert!(oracle_sequence(&s, &DepTree::new(vec![3, 0, 2])).is_err());
    }

    #[test]
    fn action_text_round_trip() {
        for a in [
            Action::left_arc("nsubj"),
            Action::right_arc("a:b"),
            Action::reduce(),
            Action::shift(),
        ] {
            assert_eq!(Action::parse(&a.to_string()), Some(a));
        }
        assert_eq!(Action::parse("LEFT-ARC:"), None);
        assert_eq!(Action::parse("JUMP"), None);
    }

    #[test]
    fn stuck_state_finalizes_to_root() {
        // Shifting the last token leaves it headless with an empty buffer.
        let s = state_after(2, &[Shift, RightArc, Shift]);
        assert!(s.is_terminal());
        assert!(!s.is_final());
        assert_eq!(s.to_tree().heads(), &[0, 0]);
    }
}
