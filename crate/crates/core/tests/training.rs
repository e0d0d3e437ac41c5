mod common;

use std::collections::BTreeSet;

use common::dummy_sentence;
use frparse::decoder::decode;
use frparse::scoring::features::stack_top_and_buffer_templates;
use frparse::scoring::io::{write_arc_model, write_transition_model};
use frparse::scoring::*;
use frparse::synthetic::toy_corpus;
use frparse::transition::{ActionKind, ParserState};
use frparse::treebank::{projective_pairs, DepTree, Sentence, Token, ROOT_FORM};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn toy_pairs() -> Vec<(Sentence, DepTree)> {
    projective_pairs(&toy_corpus().0).0
}

#[test]
fn transition_classifier_overfits_one_sentence() {
    let pair = toy_pairs().into_iter().max_by_key(|(s, _)| s.len()).unwrap();
    let config = TransitionTrainConfig {
        epochs: 15,
        ..TransitionTrainConfig::default()
    };
    let trained = train_transition_classifier(std::slice::from_ref(&pair), &config).unwrap();
    assert_eq!(*trained.epoch_uas.last().unwrap(), 100.0);
    assert_eq!(parse_greedy(&trained.model, &pair.0).heads(), pair.1.heads());
}

#[test]
fn transition_training_is_deterministic_and_mostly_monotone() {
    let pairs = toy_pairs();
    let config = TransitionTrainConfig {
        views: ViewConfig::enhanced(),
        ..TransitionTrainConfig::default()
    };
    let a = train_transition_classifier(&pairs, &config).unwrap();
    let b = train_transition_classifier(&pairs, &config).unwrap();
    assert_eq!(write_transition_model(&a.model), write_transition_model(&b.model));
    assert_eq!(a.epoch_uas, b.epoch_uas);
    assert_eq!(a.epoch_uas.len(), 10);
    let rises = a.epoch_uas.windows(2).filter(|w| w[1] >= w[0]).count();
    assert!(rises >= 8, "{:?}", a.epoch_uas);
}

#[test]
fn empty_corpora_are_rejected() {
    assert!(train_transition_classifier(&[], &TransitionTrainConfig::default()).is_err());
    assert!(train_arc_scorer_crf(&[], &CrfTrainConfig::default()).is_err());
}

#[test]
fn crf_gradient_matches_finite_differences() {
    let sentence = Sentence::from_words(&[("the", "DT"), ("dog", "NN"), ("ran", "VBD")]);
    let objective = CrfObjective::new(&[(sentence, DepTree::new(vec![2, 3, 0]))]);
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    let eps = 1e-5;
    for _ in 0..10 {
        let w: Vec<f64> = (0..objective.num_features())
            .map(|_| rng.gen_range(-1.0..1.0))
            .collect();
        let (value, grad) = objective.value_and_gradient(&w);
        assert!((value - objective.value(&w)).abs() < 1e-12);
        for i in 0..w.len() {
            let mut plus = w.clone();
            let mut minus = w.clone();
            plus[i] += eps;
            minus[i] -= eps;
            let fd = (objective.value(&plus) - objective.value(&minus)) / (2.0 * eps);
            let scale = grad[i].abs().max(fd.abs()).max(1e-2);
            assert!(
                (grad[i] - fd).abs() <= 1e-4 * scale,
                "feature {}: analytic {} numeric {fd}",
                objective.feature_names()[i],
                grad[i]
            );
        }
    }
}

#[test]
fn crf_nll_decreases_with_small_steps() {
    let pair = toy_pairs().swap_remove(0);
    let config = CrfTrainConfig {
        epochs: 20,
        learning_rate: 0.02,
        decay: 0.0,
        l2: 0.0,
        ..CrfTrainConfig::default()
    };
    let trained = train_arc_scorer_crf(&[pair], &config).unwrap();
    for w in trained.epoch_nll.windows(2) {
        assert!(w[1] <= w[0], "{:?}", trained.epoch_nll);
    }
}

#[test]
fn crf_learns_repeated_sentence() {
    let pair = toy_pairs().swap_remove(3);
    let corpus = vec![pair.clone(); 5];
    let trained = train_arc_scorer_crf(&corpus, &CrfTrainConfig::default()).unwrap();
    let best = decode(&score_arcs(&trained.model, &pair.0));
    assert_eq!(best.tree.heads(), pair.1.heads());
}

#[test]
fn crf_training_is_deterministic() {
    let pairs: Vec<_> = toy_pairs().into_iter().take(40).collect();
    let config = CrfTrainConfig {
        epochs: 3,
        ..CrfTrainConfig::default()
    };
    let a = train_arc_scorer_crf(&pairs, &config).unwrap();
    let b = train_arc_scorer_crf(&pairs, &config).unwrap();
    assert_eq!(write_arc_model(&a.model), write_arc_model(&b.model));
}

#[test]
fn arc_scores_are_translation_consistent() {
    let pairs: Vec<_> = toy_pairs().into_iter().take(60).collect();
    let model = train_arc_scorer_crf(&pairs, &CrfTrainConfig { epochs: 2, ..Default::default() })
        .unwrap()
        .model;
    let core = [("the", "DT"), ("big", "JJ"), ("dog", "NN"), ("saw", "VBD"), ("Kim", "NNP")];
    let short = Sentence::from_words(&core);
    let mut long_words = vec![("today", "RB")];
    long_words.extend(core);
    long_words.push((".", "."));
    let long = Sentence::from_words(&long_words);
    let (a, b) = (score_arcs(&model, &short), score_arcs(&model, &long));
    // Interior arcs away from the sentence edges see identical contexts.
    for h in 2..=4 {
        for d in 2..=4 {
            if h != d {
                assert_eq!(a.get(h, d), b.get(h + 1, d + 1), "{h}->{d}");
            }
        }
    }
    assert!((1..=5).any(|h| (1..=5).any(|d| h != d && a.get(h, d) != 0.0)));
}

#[test]
fn single_template_weight() {
    let mut model = ArcScorerModel::new();
    model.set_weight("hp=V", 2.0);
    let s = dummy_sentence(4);
    let m = score_arcs(&model, &s);
    for h in 0..=4 {
        for d in 1..=4 {
            if h != d {
                let expected = if h > 0 && s.pos_at(h as isize) == "V" { 2.0 } else { 0.0 };
                assert_eq!(m.get(h, d), expected);
            }
        }
    }
}

fn template_values(fv: &FeatureVector, tag: &str) -> BTreeSet<String> {
    let keep: BTreeSet<&str> = stack_top_and_buffer_templates().collect();
    fv.entries()
        .iter()
        .filter_map(|(name, _)| name.strip_prefix(tag)?.strip_prefix(':'))
        .filter(|rest| rest.split('=').next().is_some_and(|t| keep.contains(t)))
        .map(String::from)
        .collect()
}

#[test]
fn previous_view_reads_shifted_sentence() {
    let words = Sentence::from_words(&[("w1", "A"), ("w2", "B")]);
    let shifted = Sentence::new(vec![
        Token::new(1, ROOT_FORM, ROOT_FORM),
        Token::new(2, "w1", "A"),
    ])
    .unwrap();
    let state = ParserState::initial(2)
        .apply_kind(ActionKind::Shift)
        .unwrap()
        .apply_kind(ActionKind::Shift)
        .unwrap();
    let prev = ViewConfig {
        views: vec![View::Previous],
    };
    let a = template_values(&extract_state_features(&state, &words, &prev), View::Previous.tag());
    let b = template_values(
        &extract_state_features(&state, &shifted, &ViewConfig::base()),
        View::Current.tag(),
    );
    assert!(!a.is_empty());
    assert_eq!(a, b);
}

#[test]
fn initial_state_features_mention_only_root_and_buffer() {
    let s = Sentence::from_words(&[("a", "X"), ("b", "Y"), ("c", "Z"), ("d", "W")]);
    let fv = extract_state_features(&ParserState::initial(4), &s, &ViewConfig::base());
    let names: Vec<&str> = fv.entries().iter().map(|(n, _)| n.as_str()).collect();
    assert!(names.iter().all(|n| !n.contains('d') || n.contains("<NONE>") || n.starts_with("v0:dist")));
    assert!(names.iter().any(|n| n.contains(ROOT_FORM)));
    assert!(names.iter().all(|n| !n.contains("=W")));
}
