//! Linear arc scorer trained as a first-order projective CRF.

use std::collections::HashMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::features::arc_features;
use crate::decoder::{arc_marginals, log_partition, ScoreMatrix};
use crate::error::{Error, Result};
use crate::treebank::{is_projective, DepTree, Sentence};

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ArcScorerModel {
    weights: HashMap<String, f64>,
}

impl ArcScorerModel {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn weight(&self, feature: &str) -> f64 {
        self.weights.get(feature).copied().unwrap_or(0.0)
    }

    pub fn set_weight(&mut self, feature: impl Into<String>, value: f64) {
        self.weights.insert(feature.into(), value);
    }

    pub fn weight_entries(&self) -> impl Iterator<Item = (&str, f64)> + '_ {
        self.weights
            .iter()
            .filter(|(_, w)| **w != 0.0)
            .map(|(f, w)| (f.as_str(), *w))
    }
}

/// Arc score matrix: each entry is the weight sum of the arc's features.
pub fn score_arcs(model: &ArcScorerModel, sentence: &Sentence) -> ScoreMatrix {
    ScoreMatrix::from_fn(sentence.len(), |h, d| {
        arc_features(sentence, h, d)
            .iter()
            .map(|f| model.weight(f))
            .sum()
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct CrfTrainConfig {
    pub epochs: usize,
    pub seed: u64,
    /// Initial step size; epoch `e` uses `learning_rate / (1 + decay * e)`.
    pub learning_rate: f64,
    pub decay: f64,
    pub l2: f64,
}

impl Default for CrfTrainConfig {
    fn default() -> Self {
        CrfTrainConfig {
            epochs: 10,
            seed: 1,
            learning_rate: 0.1,
            decay: 0.1,
            l2: 1e-6,
        }
    }
}

/// Per-sentence arc features interned against a shared feature index.
struct Instance {
    n: usize,
    /// `feats[h * (n + 1) + d]` for every candidate arc.
    feats: Vec<Vec<u32>>,
    gold: DepTree,
}

/// The CRF negative log-likelihood over a fixed corpus, with features
/// interned so the objective and its gradient can be evaluated repeatedly.
pub struct CrfObjective {
    names: Vec<String>,
    instances: Vec<Instance>,
}

impl CrfObjective {
    pub fn new(corpus: &[(Sentence, DepTree)]) -> Self {
        let mut index: HashMap<String, u32> = HashMap::new();
        let mut names = Vec::new();
        let mut instances = Vec::with_capacity(corpus.len());
        for (sentence, gold) in corpus {
            let n = sentence.len();
            let mut feats = vec![Vec::new(); (n + 1) * (n + 1)];
            for h in 0..=n {
                for d in 1..=n {
                    if h == d {
                        continue;
                    }
                    feats[h * (n + 1) + d] = arc_features(sentence, h, d)
                        .into_iter()
                        .map(|f| {
                            *index.entry(f.clone()).or_insert_with(|| {
                                names.push(f);
                                (names.len() - 1) as u32
                            })
                        })
                        .collect();
                }
            }
            instances.push(Instance {
                n,
                feats,
                gold: gold.unlabeled(),
            });
        }
        CrfObjective { names, instances }
    }

    pub fn num_features(&self) -> usize {
        self.names.len()
    }

    pub fn feature_names(&self) -> &[String] {
        &self.names
    }

    fn scores(&self, inst: &Instance, weights: &[f64]) -> ScoreMatrix {
        ScoreMatrix::from_fn(inst.n, |h, d| {
            inst.feats[h * (inst.n + 1) + d]
                .iter()
                .map(|&f| weights[f as usize])
                .sum()
        })
    }

    /// Adds this instance's gradient into `grad` and returns its NLL.
    fn accumulate(&self, inst: &Instance, weights: &[f64], grad: &mut [f64]) -> f64 {
        let scores = self.scores(inst, weights);
        let log_z = log_partition(&scores);
        let gold_score = scores.tree_score(&inst.gold);
        let marginals = arc_marginals(&scores);
        for h in 0..=inst.n {
            for d in 1..=inst.n {
                if h == d {
                    continue;
                }
                let p = marginals.get(h, d);
                for &f in &inst.feats[h * (inst.n + 1) + d] {
                    grad[f as usize] += p;
                }
            }
        }
        for (h, d) in inst.gold.arcs() {
            for &f in &inst.feats[h * (inst.n + 1) + d] {
                grad[f as usize] -= 1.0;
            }
        }
        log_z - gold_score
    }

    /// Total NLL (without regularization) at `weights`.
    pub fn value(&self, weights: &[f64]) -> f64 {
        self.instances
            .iter()
            .map(|inst| {
                let s = self.scores(inst, weights);
                log_partition(&s) - s.tree_score(&inst.gold)
            })
            .sum()
    }

    /// NLL and its gradient: expected feature counts minus gold counts.
    pub fn value_and_gradient(&self, weights: &[f64]) -> (f64, Vec<f64>) {
        let mut grad = vec![0.0; self.names.len()];
        let nll = self
            .instances
            .iter()
            .map(|inst| self.accumulate(inst, weights, &mut grad))
            .sum();
        (nll, grad)
    }

    pub fn to_model(&self, weights: &[f64]) -> ArcScorerModel {
        let weights = self
            .names
            .iter()
            .zip(weights)
            .filter(|(_, w)| **w != 0.0)
            .map(|(n, w)| (n.clone(), *w))
            .collect();
        ArcScorerModel { weights }
    }
}

#[derive(Clone, Debug)]
pub struct TrainedArcScorer {
    pub model: ArcScorerModel,
    /// Corpus NLL after each epoch.
    pub epoch_nll: Vec<f64>,
    pub skipped: usize,
}

/// Stochastic gradient descent on the CRF negative log-likelihood, one
/// sentence per step, with L2 regularization and a decaying step size.
pub fn train_arc_scorer_crf(
    corpus: &[(Sentence, DepTree)],
    config: &CrfTrainConfig,
) -> Result<TrainedArcScorer> {
    if corpus.is_empty() {
        return Err(Error::Usage("cannot train on an empty corpus".into()));
    }
    let (data, skipped): (Vec<_>, Vec<_>) = corpus
        .iter()
        .cloned()
        .partition(|(s, t)| t.len() == s.len() && t.is_well_formed() && is_projective(t));
    if data.is_empty() {
        return Err(Error::Usage("no projective gold trees in the training corpus".into()));
    }
    let objective = CrfObjective::new(&data);
    let mut weights = vec![0.0; objective.num_features()];
    let mut grad = vec![0.0; weights.len()];
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut order: Vec<usize> = (0..objective.instances.len()).collect();
    let mut epoch_nll = Vec::with_capacity(config.epochs);

    for epoch in 0..config.epochs {
        order.shuffle(&mut rng);
        let lr = config.learning_rate / (1.0 + config.decay * epoch as f64);
        for &i in &order {
            grad.iter_mut().for_each(|g| *g = 0.0);
            objective.accumulate(&objective.instances[i], &weights, &mut grad);
            for (w, g) in weights.iter_mut().zip(&grad) {
                *w -= lr * (g + config.l2 * *w);
            }
        }
        epoch_nll.push(objective.value(&weights));
    }

    Ok(TrainedArcScorer {
        model: objective.to_model(&weights),
        epoch_nll,
        skipped: skipped.len(),
    })
}
