//! Independent reference implementations used by the integration tests.
//! Everything here is brute force: enumeration of head assignments, explicit
//! search over transition sequences, direct sums over trees.

#![allow(dead_code)]

use std::collections::{BTreeSet, HashMap};
use std::sync::OnceLock;

use frparse::decoder::ScoreMatrix;
use frparse::transition::{ActionKind, ParserState};
use frparse::treebank::{DepTree, Sentence};
use rand::Rng;

pub const MAX_N: usize = 8;

/// True when arcs `(a, b)` and `(c, d)` strictly interleave.
fn crosses(a: (usize, usize), b: (usize, usize)) -> bool {
    let (l1, r1) = (a.0.min(a.1), a.0.max(a.1));
    let (l2, r2) = (b.0.min(b.1), b.0.max(b.1));
    (l1 < l2 && l2 < r1 && r1 < r2) || (l2 < l1 && l1 < r2 && r2 < r1)
}

/// Every token reaches 0 by following heads.
fn acyclic(heads: &[usize]) -> bool {
    let n = heads.len();
    (1..=n).all(|start| {
        let mut cur = start;
        for _ in 0..=n {
            if cur == 0 {
                return true;
            }
            cur = heads[cur - 1];
        }
        false
    })
}

fn extend(heads: &mut Vec<usize>, n: usize, out: &mut Vec<Vec<usize>>) {
    let d = heads.len() + 1;
    if d > n {
        if acyclic(heads) {
            out.push(heads.clone());
        }
        return;
    }
    for h in 0..=n {
        if h == d {
            continue;
        }
        let planar = heads
            .iter()
            .enumerate()
            .all(|(i, &g)| !crosses((g, i + 1), (h, d)));
        if planar {
            heads.push(h);
            extend(heads, n, out);
            heads.pop();
        }
    }
}

/// All projective trees over `n` tokens as head vectors (token 1 first).
/// Root may take several dependents.
pub fn projective_heads(n: usize) -> &'static [Vec<usize>] {
    static CACHE: [OnceLock<Vec<Vec<usize>>>; MAX_N + 1] = [const { OnceLock::new() }; MAX_N + 1];
    CACHE[n].get_or_init(|| {
        let mut out = Vec::new();
        extend(&mut Vec::new(), n, &mut out);
        out
    })
}

pub fn projective_trees(n: usize) -> Vec<DepTree> {
    projective_heads(n).iter().map(|h| DepTree::new(h.clone())).collect()
}

/// Sum of arc scores, accumulated in dependent order.
pub fn heads_score(scores: &ScoreMatrix, heads: &[usize]) -> f64 {
    heads
        .iter()
        .enumerate()
        .map(|(i, &h)| scores.get(h, i + 1))
        .sum()
}

pub fn random_scores<R: Rng>(rng: &mut R, n: usize, spread: f64) -> ScoreMatrix {
    ScoreMatrix::from_fn(n, |_, _| rng.gen_range(-spread..=spread))
}

/// Best and second-best tree scores over all projective trees.
pub fn best_two(scores: &ScoreMatrix) -> (f64, f64) {
    let mut best = f64::NEG_INFINITY;
    let mut second = f64::NEG_INFINITY;
    for heads in projective_heads(scores.len()) {
        let s = heads_score(scores, heads);
        if s > best {
            second = best;
            best = s;
        } else if s > second {
            second = s;
        }
    }
    (best, second)
}

pub fn log_sum_exp(values: impl IntoIterator<Item = f64>) -> f64 {
    let v: Vec<f64> = values.into_iter().collect();
    let m = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + v.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}

pub fn brute_log_partition(scores: &ScoreMatrix) -> f64 {
    log_sum_exp(projective_heads(scores.len()).iter().map(|h| heads_score(scores, h)))
}

/// `p(h -> d)` indexed as `[h][d]`.
pub fn brute_marginals(scores: &ScoreMatrix) -> Vec<Vec<f64>> {
    let n = scores.len();
    let log_z = brute_log_partition(scores);
    let mut m = vec![vec![0.0; n + 1]; n + 1];
    for heads in projective_heads(n) {
        let p = (heads_score(scores, heads) - log_z).exp();
        for (i, &h) in heads.iter().enumerate() {
            m[h][i + 1] += p;
        }
    }
    m
}

/// Uniform draw from all projective trees of size `n`.
pub fn random_projective_tree<R: Rng>(rng: &mut R, n: usize) -> DepTree {
    let all = projective_heads(n);
    DepTree::new(all[rng.gen_range(0..all.len())].clone())
}

pub fn dummy_sentence(n: usize) -> Sentence {
    let words: Vec<(String, String)> = (1..=n)
        .map(|i| (format!("w{i}"), if i % 2 == 0 { "N".into() } else { "V".into() }))
        .collect();
    Sentence::from_words(&words)
}

type Key = (Vec<usize>, Option<usize>, Vec<Option<usize>>);

fn key(state: &ParserState) -> Key {
    (
        state.stack().to_vec(),
        state.buffer_front(),
        (0..=state.len()).map(|d| state.head_of(d)).collect(),
    )
}

/// Every state reachable from the initial state of an `n`-token sentence,
/// final states included, each once.
pub fn reachable_states(n: usize) -> Vec<ParserState> {
    let mut seen = HashMap::new();
    let mut stack = vec![ParserState::initial(n)];
    let mut out = Vec::new();
    while let Some(s) = stack.pop() {
        if seen.insert(key(&s), ()).is_some() {
            continue;
        }
        for kind in ActionKind::ALL {
            if s.is_legal(kind) {
                stack.push(s.apply_kind(kind).unwrap());
            }
        }
        out.push(s);
    }
    out
}

/// Unlabeled head vectors of every final state reachable from `state`.
pub struct FeasibleOracle {
    memo: HashMap<Key, BTreeSet<Vec<usize>>>,
}

impl FeasibleOracle {
    pub fn new() -> Self {
        FeasibleOracle {
            memo: HashMap::new(),
        }
    }

    pub fn trees(&mut self, state: &ParserState) -> BTreeSet<Vec<usize>> {
        let k = key(state);
        if let Some(hit) = self.memo.get(&k) {
            return hit.clone();
        }
        let mut out = BTreeSet::new();
        if state.is_final() {
            out.insert((1..=state.len()).map(|d| state.head_of(d).unwrap()).collect());
        } else {
            for kind in ActionKind::ALL {
                if state.is_legal(kind) {
                    out.extend(self.trees(&state.apply_kind(kind).unwrap()));
                }
            }
        }
        self.memo.insert(k, out.clone());
        out
    }
}

/// Largest number of gold arcs in any terminal configuration reachable from
/// `state`, counting the arcs already built.
pub fn best_reachable(state: &ParserState, gold: &DepTree, memo: &mut HashMap<Key, usize>) -> usize {
    let k = key(state);
    if let Some(&v) = memo.get(&k) {
        return v;
    }
    let next: Vec<ParserState> = ActionKind::ALL
        .iter()
        .filter(|&&kind| state.is_legal(kind))
        .map(|&kind| state.apply_kind(kind).unwrap())
        .collect();
    let v = if next.is_empty() {
        state.arcs().filter(|&(h, d)| gold.head(d) == h).count()
    } else {
        next.iter().map(|s| best_reachable(s, gold, memo)).max().unwrap()
    };
    memo.insert(k, v);
    v
}

/// Cost of each legal kind: gold arcs that can no longer be reached.
pub fn brute_costs(state: &ParserState, gold: &DepTree) -> Vec<(ActionKind, usize)> {
    let mut memo = HashMap::new();
    let before = best_reachable(state, gold, &mut memo);
    ActionKind::ALL
        .iter()
        .filter(|&&kind| state.is_legal(kind))
        .map(|&kind| {
            let after = best_reachable(&state.apply_kind(kind).unwrap(), gold, &mut memo);
            (kind, before - after)
        })
        .collect()
}

/// Projective tree count with free root attachment: C(3n, n) / (2n + 1).
pub fn projective_count(n: usize) -> usize {
    let mut c: u128 = 1;
    for i in 0..n as u128 {
        c = c * (3 * n as u128 - i) / (i + 1);
    }
    (c / (2 * n as u128 + 1)) as usize
}
