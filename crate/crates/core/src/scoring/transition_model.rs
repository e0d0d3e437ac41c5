//! Linear softmax transition classifier over multi-view state features,
//! trained with the dynamic oracle.

use std::collections::{BTreeSet, HashMap};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::features::{extract_state_features, FeatureVector, ViewConfig};
use crate::error::{Error, Result};
use crate::eval::attachment_scores;
use crate::transition::{Action, ActionKind, ParserState};
use crate::treebank::{is_projective, DepTree, Sentence};

#[derive(Clone, Debug, PartialEq)]
pub struct TransitionModel {
    pub views: ViewConfig,
    actions: Vec<Action>,
    action_index: HashMap<Action, usize>,
    weights: HashMap<String, Vec<f64>>,
}

impl TransitionModel {
    /// Zero-weight model over a fixed action inventory.
    pub fn new(views: ViewConfig, actions: Vec<Action>) -> Self {
        let action_index = actions
            .iter()
            .enumerate()
            .map(|(i, a)| (a.clone(), i))
            .collect();
        TransitionModel {
            views,
            actions,
            action_index,
            weights: HashMap::new(),
        }
    }

    /// Inventory with every label seen on left and right arcs of the corpus.
    /// Each kind is guaranteed at least one action.
    pub fn inventory_for(corpus: &[(Sentence, DepTree)]) -> Vec<Action> {
        let mut left = BTreeSet::new();
        let mut right = BTreeSet::new();
        for (_, tree) in corpus {
            for (h, d) in tree.arcs() {
                let label = tree.label(d).unwrap_or("dep").to_string();
                if h > d {
                    left.insert(label);
                } else {
                    right.insert(label);
                }
            }
        }
        if left.is_empty() {
            left.insert("dep".to_string());
        }
        if right.is_empty() {
            right.insert("dep".to_string());
        }
        let mut actions: Vec<Action> = left.into_iter().map(Action::left_arc).collect();
        actions.extend(right.into_iter().map(Action::right_arc));
        actions.push(Action::reduce());
        actions.push(Action::shift());
        actions
    }

    pub fn actions(&self) -> &[Action] {
        &self.actions
    }

    pub fn action_id(&self, action: &Action) -> Option<usize> {
        self.action_index.get(action).copied()
    }

    pub fn weight(&self, feature: &str, action: &Action) -> f64 {
        match (self.weights.get(feature), self.action_id(action)) {
            (Some(row), Some(a)) => row[a],
            _ => 0.0,
        }
    }

    pub fn set_weight(&mut self, feature: &str, action: &Action, value: f64) {
        let a = self
            .action_id(action)
            .unwrap_or_else(|| panic!("action {action} is not in the inventory"));
        let k = self.actions.len();
        self.weights
            .entry(feature.to_string())
            .or_insert_with(|| vec![0.0; k])[a] = value;
    }

    /// Non-zero weights as `(feature, action, weight)`.
    pub fn weight_entries(&self) -> impl Iterator<Item = (&str, &Action, f64)> + '_ {
        self.weights.iter().flat_map(move |(f, row)| {
            row.iter()
                .enumerate()
                .filter(|(_, w)| **w != 0.0)
                .map(move |(a, w)| (f.as_str(), &self.actions[a], *w))
        })
    }

    /// Legal labeled actions in inventory order.
    pub fn legal_actions(&self, state: &ParserState) -> Vec<Action> {
        self.actions
            .iter()
            .filter(|a| state.is_legal(a.kind))
            .cloned()
            .collect()
    }

    fn raw_scores(&self, features: &FeatureVector) -> Vec<f64> {
        let mut scores = vec![0.0; self.actions.len()];
        for (name, value) in features.entries() {
            if let Some(row) = self.weights.get(name) {
                for (s, w) in scores.iter_mut().zip(row) {
                    *s += value * w;
                }
            }
        }
        scores
    }

    /// Linear scores of the given actions.
    pub fn scores(&self, features: &FeatureVector, actions: &[Action]) -> Vec<f64> {
        let raw = self.raw_scores(features);
        actions
            .iter()
            .map(|a| self.action_id(a).map_or(0.0, |i| raw[i]))
            .collect()
    }

    /// Features of `state` under this model's views.
    pub fn features(&self, state: &ParserState, sentence: &Sentence) -> FeatureVector {
        extract_state_features(state, sentence, &self.views)
    }
}

/// Softmax over the linear scores of the legal actions.
pub fn classify_transition(
    model: &TransitionModel,
    features: &FeatureVector,
    legal: &[Action],
) -> Result<Vec<(Action, f64)>> {
    if legal.is_empty() {
        return Err(Error::Usage("classify_transition needs at least one legal action".into()));
    }
    let scores = model.scores(features, legal);
    let probs = softmax(&scores);
    Ok(legal.iter().cloned().zip(probs).collect())
}

pub(crate) fn softmax(scores: &[f64]) -> Vec<f64> {
    let max = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = scores.iter().map(|s| (s - max).exp()).collect();
    let z: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / z).collect()
}

/// Index of the first maximum, so earlier entries win ties.
pub(crate) fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, v) in values.iter().enumerate() {
        if *v > values[best] {
            best = i;
        }
    }
    best
}

/// Orders actions by kind priority, then label.
pub(crate) fn sort_actions(actions: &mut [Action]) {
    actions.sort_by(|a, b| a.kind.cmp(&b.kind).then_with(|| a.label.cmp(&b.label)));
}

/// Greedy transition-only parse: highest-probability legal action at every
/// step, ties broken by kind priority then label.
pub fn parse_greedy(model: &TransitionModel, sentence: &Sentence) -> DepTree {
    let mut state = ParserState::for_sentence(sentence);
    while !state.is_final() {
        let mut legal = model.legal_actions(&state);
        if legal.is_empty() {
            break;
        }
        sort_actions(&mut legal);
        let features = model.features(&state, sentence);
        let probs = classify_transition(model, &features, &legal).expect("legal set is nonempty");
        let p: Vec<f64> = probs.iter().map(|(_, p)| *p).collect();
        state = state.apply(&legal[argmax(&p)]).expect("legal action");
    }
    state.to_tree()
}

#[derive(Clone, Debug, PartialEq)]
pub struct TransitionTrainConfig {
    pub epochs: usize,
    pub seed: u64,
    /// Initial step size; epoch `e` uses `learning_rate / (1 + decay * e)`.
    pub learning_rate: f64,
    pub decay: f64,
    pub l2: f64,
    /// Probability of following the model's prediction instead of the oracle.
    pub explore: f64,
    /// Epochs before exploration starts.
    pub burn_in: usize,
    pub views: ViewConfig,
}

impl Default for TransitionTrainConfig {
    fn default() -> Self {
        TransitionTrainConfig {
            epochs: 10,
            seed: 1,
            learning_rate: 0.1,
            decay: 0.5,
            l2: 1e-6,
            explore: 0.1,
            burn_in: 2,
            views: ViewConfig::base(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct TrainedTransition {
    pub model: TransitionModel,
    /// Training-set UAS after each epoch.
    pub epoch_uas: Vec<f64>,
    /// Sentences skipped for lacking a projective gold tree.
    pub skipped: usize,
}

/// Zero-cost labeled actions among `legal`: the kind must cost nothing, and an
/// arc that is gold must carry its gold label.
fn oracle_actions(
    state: &ParserState,
    gold: &DepTree,
    legal: &[Action],
) -> Result<Vec<usize>> {
    let costs = state.action_costs(gold)?;
    let zero: Vec<ActionKind> = costs.iter().filter(|(_, c)| *c == 0).map(|(k, _)| *k).collect();
    Ok(legal
        .iter()
        .enumerate()
        .filter(|(_, a)| zero.contains(&a.kind))
        .filter(|(_, a)| {
            let arc = match a.kind {
                ActionKind::LeftArc => state.stack_top().zip(state.buffer_front()).map(|(s, b)| (b, s)),
                ActionKind::RightArc => state.stack_top().zip(state.buffer_front()),
                _ => None,
            };
            match arc {
                Some((h, d)) if gold.head(d) == h => a.label.as_deref() == gold.label(d).or(Some("dep")),
                _ => true,
            }
        })
        .map(|(i, _)| i)
        .collect())
}

/// Trains the classifier with per-state softmax NLL against the best-scored
/// zero-cost action, exploring model predictions after the burn-in. The
/// returned model, and the per-epoch UAS, use the weights averaged over all
/// updates so far.
pub fn train_transition_classifier(
    corpus: &[(Sentence, DepTree)],
    config: &TransitionTrainConfig,
) -> Result<TrainedTransition> {
    if corpus.is_empty() {
        return Err(Error::Usage("cannot train on an empty corpus".into()));
    }
    let (data, skipped): (Vec<_>, Vec<_>) = corpus
        .iter()
        .partition(|(s, t)| t.len() == s.len() && t.is_well_formed() && is_projective(t));
    let skipped = skipped.len();
    if data.is_empty() {
        return Err(Error::Usage("no projective gold trees in the training corpus".into()));
    }
    let owned: Vec<(Sentence, DepTree)> = data.iter().map(|p| (*p).clone()).collect();
    let mut model = TransitionModel::new(config.views.clone(), TransitionModel::inventory_for(&owned));
    let k = model.actions.len();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut order: Vec<usize> = (0..owned.len()).collect();
    let mut epoch_uas = Vec::with_capacity(config.epochs);
    // Running average of the weights over all updates, kept lazily as
    // `w - sums / clock`.
    let mut sums: HashMap<String, Vec<f64>> = HashMap::new();
    let mut clock = 1.0;
    let mut averaged = model.clone();

    for epoch in 0..config.epochs {
        order.shuffle(&mut rng);
        let lr = config.learning_rate / (1.0 + config.decay * epoch as f64);
        let exploring = epoch >= config.burn_in && config.explore > 0.0;
        for &idx in &order {
            let (sentence, gold) = &owned[idx];
            let mut state = ParserState::for_sentence(sentence);
            while !state.is_final() {
                let legal = model.legal_actions(&state);
                if legal.is_empty() {
                    break;
                }
                let features = model.features(&state, sentence).canonical();
                let scores = model.scores(&features, &legal);
                let probs = softmax(&scores);
                let correct = oracle_actions(&state, gold, &legal)?;
                let Some(&target) = correct.iter().max_by(|&&a, &&b| {
                    scores[a].partial_cmp(&scores[b]).expect("finite scores").then(b.cmp(&a))
                }) else {
                    break;
                };

                for (name, value) in features.entries() {
                    let row = model
                        .weights
                        .entry(name.clone())
                        .or_insert_with(|| vec![0.0; k]);
                    let sum = sums.entry(name.clone()).or_insert_with(|| vec![0.0; k]);
                    for (li, action) in legal.iter().enumerate() {
                        let a = model.action_index[action];
                        let indicator = if li == target { 1.0 } else { 0.0 };
                        let grad = value * (probs[li] - indicator) + config.l2 * row[a];
                        row[a] -= lr * grad;
                        sum[a] -= clock * lr * grad;
                    }
                }
                clock += 1.0;

                let next = if exploring && rng.gen::<f64>() < config.explore {
                    let mut sorted = legal.clone();
                    sort_actions(&mut sorted);
                    let s = model.scores(&features, &sorted);
                    sorted[argmax(&s)].clone()
                } else {
                    legal[target].clone()
                };
                state = state.apply(&next)?;
            }
        }
        averaged.weights = model
            .weights
            .iter()
            .map(|(name, row)| {
                let sum = &sums[name];
                let avg = row.iter().zip(sum).map(|(w, u)| w - u / clock).collect();
                (name.clone(), avg)
            })
            .collect();
        let predicted: Vec<DepTree> =
            owned.iter().map(|(s, _)| parse_greedy(&averaged, s)).collect();
        let golds: Vec<DepTree> = owned.iter().map(|(_, t)| t.clone()).collect();
        let (uas, _) = attachment_scores(&golds, &predicted)?;
        epoch_uas.push(uas);
    }

    Ok(TrainedTransition {
        model: averaged,
        epoch_uas,
        skipped,
    })
}
