//! Transition parsing with future-reward reranking.
//!
//! At every step each legal transition kind is scored by the best tree still
//! reachable after taking it, found by the constrained chart decoder. Those
//! rewards are normalized with a temperature softmax and mixed with the
//! classifier's probabilities:
//!
//! ```text
//! choice = argmax_a  beta * P(a) + (1 - beta) * R(kind(a))
//! ```
//!
//! `beta = 1` is the plain transition parser; `beta = 0` follows the graph
//! decoder's optimum.

use rayon::prelude::*;

use crate::constraints::derive_constraints;
use crate::decoder::{constrained_score, ScoreMatrix, NEG_INF};
use crate::error::{Error, Result};
use crate::scoring::transition_model::{argmax, softmax, sort_actions};
use crate::scoring::{classify_transition, score_arcs, ArcScorerModel, TransitionModel};
use crate::transition::{Action, ActionKind, ParserState};
use crate::treebank::{DepTree, Sentence};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IntegratorConfig {
    /// Weight of the classifier; `1 - beta` goes to the future reward.
    pub beta: f64,
    /// Softmax temperature applied to future rewards.
    pub temperature: f64,
    /// Step cap; `None` means `4n + 8`.
    pub max_steps: Option<usize>,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        IntegratorConfig {
            beta: 0.5,
            temperature: 1.0,
            max_steps: None,
        }
    }
}

impl IntegratorConfig {
    pub fn with_beta(beta: f64) -> Self {
        IntegratorConfig {
            beta,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.beta) {
            return Err(Error::Usage(format!("beta must lie in [0, 1], got {}", self.beta)));
        }
        if !(self.temperature > 0.0 && self.temperature.is_finite()) {
            return Err(Error::Usage(format!(
                "temperature must be positive, got {}",
                self.temperature
            )));
        }
        if self.max_steps == Some(0) {
            return Err(Error::Usage("max_steps must be positive".into()));
        }
        Ok(())
    }

    /// True when the future reward does not influence the choice.
    pub fn transition_only(&self) -> bool {
        self.beta == 1.0
    }
}

/// Raw future reward of each legal kind: the best score of a tree that
/// stays derivable after taking it, or negative infinity if none does.
pub fn future_rewards(
    state: &ParserState,
    legal: &[ActionKind],
    scores: &ScoreMatrix,
) -> Result<Vec<(ActionKind, f64)>> {
    legal
        .iter()
        .map(|&kind| {
            let constraints = derive_constraints(state, kind)?;
            Ok((kind, constrained_score(scores, &constraints)))
        })
        .collect()
}

/// Future rewards normalized by a temperature softmax over the legal kinds.
/// Infeasible kinds get zero; if every kind is infeasible the result is
/// uniform.
pub fn future_reward_vector(
    state: &ParserState,
    legal: &[ActionKind],
    scores: &ScoreMatrix,
    temperature: f64,
) -> Result<Vec<(ActionKind, f64)>> {
    if legal.is_empty() {
        return Err(Error::Usage("future_reward_vector needs at least one legal action".into()));
    }
    let raw = future_rewards(state, legal, scores)?;
    Ok(normalize_rewards(&raw, temperature))
}

fn normalize_rewards(raw: &[(ActionKind, f64)], temperature: f64) -> Vec<(ActionKind, f64)> {
    let finite: Vec<f64> = raw
        .iter()
        .filter(|(_, r)| *r != NEG_INF)
        .map(|(_, r)| r / temperature)
        .collect();
    if finite.is_empty() {
        let u = 1.0 / raw.len() as f64;
        return raw.iter().map(|(k, _)| (*k, u)).collect();
    }
    let probs = softmax(&finite);
    let mut it = probs.into_iter();
    raw.iter()
        .map(|(k, r)| {
            let p = if *r == NEG_INF { 0.0 } else { it.next().expect("one per finite reward") };
            (*k, p)
        })
        .collect()
}

/// Mixes classifier probabilities with rewards over the same actions and
/// returns the best one. Ties go to the higher classifier probability, then
/// kind priority, then label order; so at `beta = 0` the classifier still
/// picks the label among actions sharing a reward.
pub fn integrated_predict(
    probs: &[(Action, f64)],
    rewards: &[(Action, f64)],
    beta: f64,
) -> Result<Action> {
    if probs.is_empty() {
        return Err(Error::Usage("no actions to choose from".into()));
    }
    if !(0.0..=1.0).contains(&beta) {
        return Err(Error::Usage(format!("beta must lie in [0, 1], got {beta}")));
    }
    let mut actions: Vec<Action> = probs.iter().map(|(a, _)| a.clone()).collect();
    let mut reward_actions: Vec<Action> = rewards.iter().map(|(a, _)| a.clone()).collect();
    sort_actions(&mut actions);
    sort_actions(&mut reward_actions);
    if actions != reward_actions {
        return Err(Error::Usage(
            "probabilities and rewards are over different action sets".into(),
        ));
    }
    let lookup = |set: &[(Action, f64)], a: &Action| {
        set.iter().find(|(b, _)| b == a).map(|(_, v)| *v).expect("same support")
    };
    let mixed: Vec<f64> = actions
        .iter()
        .map(|a| beta * lookup(probs, a) + (1.0 - beta) * lookup(rewards, a))
        .collect();
    let mut best = 0;
    for i in 1..actions.len() {
        let (m, p) = (mixed[i], lookup(probs, &actions[i]));
        let (bm, bp) = (mixed[best], lookup(probs, &actions[best]));
        if m > bm || (m == bm && p > bp) {
            best = i;
        }
    }
    Ok(actions[best].clone())
}

/// Output of one integrated parse.
#[derive(Clone, Debug, PartialEq)]
pub struct IntegratedParse {
    pub tree: DepTree,
    pub actions: Vec<Action>,
}

/// Parses `sentence` with precomputed arc scores. `scores` may be `None`
/// only when `beta = 1`.
pub fn parse_with_scores(
    sentence: &Sentence,
    model: &TransitionModel,
    scores: Option<&ScoreMatrix>,
    config: &IntegratorConfig,
) -> Result<IntegratedParse> {
    config.validate()?;
    let scores = match scores {
        Some(s) => Some(s),
        None if config.transition_only() => None,
        None => {
            return Err(Error::Usage(
                "an arc scorer is required when beta < 1".into(),
            ))
        }
    };
    let max_steps = config.max_steps.unwrap_or(4 * sentence.len() + 8);
    let mut state = ParserState::for_sentence(sentence);
    let mut steps = 0;
    while !state.is_final() {
        let mut legal = model.legal_actions(&state);
        if legal.is_empty() {
            break;
        }
        if steps == max_steps {
            return Err(Error::StepLimit {
                steps,
                stack: state.stack().to_vec(),
                buffer: state.buffer().collect(),
            });
        }
        sort_actions(&mut legal);
        let features = model.features(&state, sentence);
        let probs = classify_transition(model, &features, &legal)?;
        let action = match scores {
            Some(scores) if !config.transition_only() => {
                let mut kinds: Vec<ActionKind> = legal.iter().map(|a| a.kind).collect();
                kinds.dedup();
                let kind_rewards =
                    future_reward_vector(&state, &kinds, scores, config.temperature)?;
                let rewards: Vec<(Action, f64)> = legal
                    .iter()
                    .map(|a| {
                        let r = kind_rewards
                            .iter()
                            .find(|(k, _)| *k == a.kind)
                            .map(|(_, r)| *r)
                            .expect("every legal kind has a reward");
                        (a.clone(), r)
                    })
                    .collect();
                integrated_predict(&probs, &rewards, config.beta)?
            }
            _ => {
                let p: Vec<f64> = probs.iter().map(|(_, p)| *p).collect();
                probs[argmax(&p)].0.clone()
            }
        };
        state = state.apply(&action)?;
        steps += 1;
    }
    Ok(IntegratedParse {
        tree: state.to_tree(),
        actions: state.history().to_vec(),
    })
}

/// Parses one sentence: arc scores are computed once, then the mixed
/// transition loop runs to a final state.
pub fn parse_sentence(
    sentence: &Sentence,
    model: &TransitionModel,
    scorer: Option<&ArcScorerModel>,
    config: &IntegratorConfig,
) -> Result<DepTree> {
    let scores = if config.transition_only() {
        None
    } else {
        Some(score_arcs(
            scorer.ok_or_else(|| Error::Usage("an arc scorer is required when beta < 1".into()))?,
            sentence,
        ))
    };
    parse_with_scores(sentence, model, scores.as_ref(), config).map(|p| p.tree)
}

/// Parses a corpus on `jobs` worker threads; output order matches input.
pub fn parse_corpus(
    sentences: &[Sentence],
    model: &TransitionModel,
    scorer: Option<&ArcScorerModel>,
    config: &IntegratorConfig,
    jobs: usize,
) -> Result<Vec<DepTree>> {
    config.validate()?;
    let jobs = jobs.max(1);
    if jobs == 1 {
        return sentences
            .iter()
            .map(|s| parse_sentence(s, model, scorer, config))
            .collect();
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::Usage(format!("cannot start worker pool: {e}")))?;
    pool.install(|| {
        sentences
            .par_iter()
            .map(|s| parse_sentence(s, model, scorer, config))
            .collect()
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scoring::ViewConfig;
    use ActionKind::*;

    fn example() -> ScoreMatrix {
        let mut m = ScoreMatrix::zeros(2);
        m.set(0, 1, 1.0);
        m.set(0, 2, 0.5);
        m.set(1, 2, 2.0);
        m.set(2, 1, 3.0);
        m
    }

    #[test]
    fn singleton_reward() {
        let s = ParserState::initial(2);
        let r = future_reward_vector(&s, &[Shift], &example(), 1.0).unwrap();
        assert_eq!(r, vec![(Shift, 1.0)]);
    }

    #[test]
    fn rewards_after_first_shift() {
        let s = ParserState::initial(2).apply_kind(Shift).unwrap();
        let raw = future_rewards(&s, &[RightArc, Shift], &example()).unwrap();
        // RightArc(0 -> 1) keeps {0->1, 1->2} = 3 and {0->1, 0->2} = 1.5.
        assert_eq!(raw[0], (RightArc, 3.0));
        // Shift leaves only {2->1, 0->2} = 3.5.
        assert_eq!(raw[1], (Shift, 3.5));
        let norm = future_reward_vector(&s, &[RightArc, Shift], &example(), 1.0).unwrap();
        let z = 3f64.exp() + 3.5f64.exp();
        assert!((norm[0].1 - 3f64.exp() / z).abs() < 1e-12);
        assert!((norm[1].1 - 3.5f64.exp() / z).abs() < 1e-12);
    }

    #[test]
    fn temperature_homogeneity() {
        let s = ParserState::initial(2).apply_kind(Shift).unwrap();
        let a = future_reward_vector(&s, &[RightArc, Shift], &example(), 1.0).unwrap();
        let scaled = example().map(|v| v * 4.0);
        let b = future_reward_vector(&s, &[RightArc, Shift], &scaled, 4.0).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert!((x.1 - y.1).abs() < 1e-12);
        }
    }

    #[test]
    fn infeasible_kinds_get_zero_and_all_infeasible_is_uniform() {
        let n = normalize_rewards(&[(Reduce, NEG_INF), (Shift, 2.0)], 1.0);
        assert_eq!(n, vec![(Reduce, 0.0), (Shift, 1.0)]);
        let u = normalize_rewards(&[(Reduce, NEG_INF), (Shift, NEG_INF)], 1.0);
        assert_eq!(u, vec![(Reduce, 0.5), (Shift, 0.5)]);
    }

    #[test]
    fn mixture_endpoints() {
        let probs = vec![(Action::reduce(), 0.7), (Action::shift(), 0.3)];
        let rewards = vec![(Action::reduce(), 0.1), (Action::shift(), 0.9)];
        assert_eq!(integrated_predict(&probs, &rewards, 1.0).unwrap(), Action::reduce());
        assert_eq!(integrated_predict(&probs, &rewards, 0.0).unwrap(), Action::shift());
        for beta in [0.0, 0.3, 0.6, 1.0] {
            assert_eq!(integrated_predict(&probs, &probs, beta).unwrap(), Action::reduce());
        }
    }

    #[test]
    fn mixture_ties_follow_priority() {
        let probs = vec![(Action::shift(), 0.5), (Action::right_arc("b"), 0.25), (Action::right_arc("a"), 0.25)];
        let rewards = vec![(Action::shift(), 0.0), (Action::right_arc("a"), 1.0), (Action::right_arc("b"), 1.0)];
        assert_eq!(integrated_predict(&probs, &rewards, 0.0).unwrap(), Action::right_arc("a"));
    }

    #[test]
    fn mismatched_supports() {
        let probs = vec![(Action::shift(), 1.0)];
        let rewards = vec![(Action::reduce(), 1.0)];
        assert!(integrated_predict(&probs, &rewards, 0.5).is_err());
    }

    #[test]
    fn config_validation() {
        assert!(IntegratorConfig::with_beta(1.5).validate().is_err());
        let bad_t = IntegratorConfig {
            temperature: 0.0,
            ..IntegratorConfig::default()
        };
        assert!(bad_t.validate().is_err());
    }

    #[test]
    fn scorer_required_below_one() {
        let s = Sentence::from_words(&[("a", "X")]);
        let m = TransitionModel::new(
            ViewConfig::base(),
            vec![Action::left_arc("d"), Action::right_arc("d"), Action::reduce(), Action::shift()],
        );
        assert!(parse_sentence(&s, &m, None, &IntegratorConfig::with_beta(0.5)).is_err());
        let t = parse_sentence(&s, &m, None, &IntegratorConfig::with_beta(1.0)).unwrap();
        assert!(t.is_well_formed());
    }

    #[test]
    fn graph_only_follows_decoder() {
        let s = Sentence::from_words(&[("a", "X"), ("b", "Y")]);
        let m = TransitionModel::new(
            ViewConfig::base(),
            vec![Action::left_arc("d"), Action::right_arc("d"), Action::reduce(), Action::shift()],
        );
        let p = parse_with_scores(&s, &m, Some(&example()), &IntegratorConfig::with_beta(0.0)).unwrap();
        assert_eq!(p.tree.heads(), &[2, 0]);
    }

    #[test]
    fn step_limit_reports_state() {
        let s = Sentence::from_words(&[("a", "X"), ("b", "Y")]);
        let m = TransitionModel::new(
            ViewConfig::base(),
            vec![Action::left_arc("d"), Action::right_arc("d"), Action::reduce(), Action::shift()],
        );
        let config = IntegratorConfig {
            beta: 1.0,
            max_steps: Some(1),
            ..IntegratorConfig::default()
        };
        match parse_with_scores(&s, &m, None, &config) {
            Err(Error::StepLimit { steps: 1, stack, .. }) => assert_eq!(stack, vec![0]),
            other => panic!("unexpected {other:?}"),
        }
    }
}
