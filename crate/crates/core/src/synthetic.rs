//! A small generated treebank: projective trees from a toy English-like
//! grammar, for smoke tests and scaled-down experiments.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::treebank::{Sentence, Token};

/// Seed of the bundled corpus. "with" and "near" attach to nouns and verbs
/// alike, so prepositional attachment is genuinely ambiguous.
pub const TOY_SEED: u64 = 7;
pub const TOY_TRAIN: usize = 200;
pub const TOY_DEV: usize = 50;

const DETERMINERS: &[&str] = &["the", "a", "every", "this"];
const ADJECTIVES: &[&str] = &["big", "small", "red", "old", "happy", "quick"];
const NOUNS: &[&str] = &[
    "dog", "cat", "man", "woman", "park", "telescope", "ball", "house", "city", "child",
];
const NAMES: &[&str] = &["John", "Mary", "Paris", "Kim"];
const TRANSITIVE: &[&str] = &["saw", "chased", "found", "liked", "took"];
const INTRANSITIVE: &[&str] = &["slept", "ran", "laughed", "waited"];
const VERB_PREPS: &[&str] = &["with", "in", "on", "near"];
const NOUN_PREPS: &[&str] = &["of", "near", "with"];
const ADVERBS: &[&str] = &["quickly", "often", "today"];

/// Token under construction: head is an index into the same vector, or
/// `None` for the sentence root.
struct Node {
    form: &'static str,
    pos: &'static str,
    head: Option<usize>,
    label: &'static str,
}

struct Builder<'r> {
    rng: &'r mut ChaCha8Rng,
    nodes: Vec<Node>,
}

impl<'r> Builder<'r> {
    fn pick(&mut self, words: &[&'static str]) -> &'static str {
        words.choose(self.rng).expect("nonempty word list")
    }

    fn push(&mut self, form: &'static str, pos: &'static str, label: &'static str) -> usize {
        self.nodes.push(Node {
            form,
            pos,
            head: None,
            label,
        });
        self.nodes.len() - 1
    }

    fn attach(&mut self, dependent: usize, head: usize) {
        self.nodes[dependent].head = Some(head);
    }

    /// Emits a noun phrase and returns its head. `depth` limits PP nesting.
    fn noun_phrase(&mut self, label: &'static str, depth: usize) -> usize {
        if self.rng.gen_bool(0.2) {
            let form = self.pick(NAMES);
            return self.push(form, "NNP", label);
        }
        let det_form = self.pick(DETERMINERS);
        let det = self.push(det_form, "DT", "det");
        let n_adj = [0, 0, 1, 1, 2][self.rng.gen_range(0..5)];
        let adjs: Vec<usize> = (0..n_adj)
            .map(|_| {
                let f = self.pick(ADJECTIVES);
                self.push(f, "JJ", "amod")
            })
            .collect();
        let form = self.pick(NOUNS);
        let noun = self.push(form, "NN", label);
        self.attach(det, noun);
        for a in adjs {
            self.attach(a, noun);
        }
        if depth > 0 && self.rng.gen_bool(0.25) {
            let pp = self.prep_phrase(NOUN_PREPS, depth - 1);
            self.attach(pp, noun);
        }
        noun
    }

    fn prep_phrase(&mut self, preps: &[&'static str], depth: usize) -> usize {
        let form = self.pick(preps);
        let prep = self.push(form, "IN", "prep");
        let obj = self.noun_phrase("pobj", depth);
        self.attach(obj, prep);
        prep
    }

    fn sentence(&mut self) {
        let subj = self.noun_phrase("nsubj", 1);
        let pre_adv = self.rng.gen_bool(0.15).then(|| {
            let f = self.pick(ADVERBS);
            self.push(f, "RB", "advmod")
        });
        let transitive = self.rng.gen_bool(0.65);
        let verb_form = if transitive {
            self.pick(TRANSITIVE)
        } else {
            self.pick(INTRANSITIVE)
        };
        let verb = self.push(verb_form, "VBD", "root");
        self.attach(subj, verb);
        if let Some(a) = pre_adv {
            self.attach(a, verb);
        }
        if transitive {
            let obj = self.noun_phrase("obj", 1);
            self.attach(obj, verb);
        }
        if self.rng.gen_bool(0.4) {
            let pp = self.prep_phrase(VERB_PREPS, 1);
            self.attach(pp, verb);
        }
        if self.rng.gen_bool(0.2) {
            let f = self.pick(ADVERBS);
            let adv = self.push(f, "RB", "advmod");
            self.attach(adv, verb);
        }
        let punct = self.push(".", ".", "punct");
        self.attach(punct, verb);
    }
}

/// Generates `count` sentences with gold trees. Identical seeds give
/// identical corpora.
pub fn generate_corpus(count: usize, seed: u64) -> Vec<Sentence> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let mut b = Builder {
                rng: &mut rng,
                nodes: Vec::new(),
            };
            b.sentence();
            let tokens = b
                .nodes
                .iter()
                .enumerate()
                .map(|(i, node)| {
                    let head = node.head.map_or(0, |h| h + 1);
                    Token::new(i + 1, node.form, node.pos).with_gold(head, node.label)
                })
                .collect();
            Sentence::new(tokens).expect("generated sentences are well formed")
        })
        .collect()
}

/// The bundled corpus: `(train, dev)` with 200 and 50 sentences.
pub fn toy_corpus() -> (Vec<Sentence>, Vec<Sentence>) {
    let mut all = generate_corpus(TOY_TRAIN + TOY_DEV, TOY_SEED);
    let dev = all.split_off(TOY_TRAIN);
    (all, dev)
}
