//! First-order projective chart decoding over complete and incomplete spans.
//!
//! Chart cell `[a][b]` with `a < b` is a right-facing span headed by `a`;
//! with `a > b` a left-facing span headed by `a`. Incomplete cells carry the
//! pending arc `a -> b`.
//!
//! Negative infinity marks infeasible cells. It only ever enters arithmetic
//! through [`plus`], which keeps it absorbing, and the log-space routines
//! treat it as an absent term.

use crate::constraints::ConstraintSets;
use crate::treebank::DepTree;

pub const NEG_INF: f64 = f64::NEG_INFINITY;

/// `a + b`, absorbing at negative infinity.
#[inline]
pub fn plus(a: f64, b: f64) -> f64 {
    if a == NEG_INF || b == NEG_INF {
        NEG_INF
    } else {
        a + b
    }
}

/// Arc scores `score(head, dependent)` for heads `0..=n` and dependents `1..=n`.
#[derive(Clone, Debug, PartialEq)]
pub struct ScoreMatrix {
    n: usize,
    data: Vec<f64>,
}

impl ScoreMatrix {
    /// All-zero scores over `n` tokens.
    pub fn zeros(n: usize) -> Self {
        ScoreMatrix {
            n,
            data: vec![0.0; (n + 1) * (n + 1)],
        }
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = Self::zeros(n);
        for h in 0..=n {
            for d in 1..=n {
                if h != d {
                    m.set(h, d, f(h, d));
                }
            }
        }
        m
    }

    /// Number of real tokens.
    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    #[inline]
    pub fn get(&self, head: usize, dependent: usize) -> f64 {
        self.data[head * (self.n + 1) + dependent]
    }

    pub fn set(&mut self, head: usize, dependent: usize, score: f64) {
        assert!(dependent >= 1 && dependent <= self.n && head <= self.n && head != dependent);
        assert!(score.is_finite(), "arc scores must be finite");
        self.data[head * (self.n + 1) + dependent] = score;
    }

    /// Sum of arc scores of `tree`, accumulated in dependent order.
    pub fn tree_score(&self, tree: &DepTree) -> f64 {
        tree.score_with(|h, d| self.get(h, d))
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> ScoreMatrix {
        ScoreMatrix::from_fn(self.n, |h, d| f(self.get(h, d)))
    }
}

/// Span type used by the penalty function.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SpanType {
    Complete,
    Incomplete,
}

/// Penalty of building span `(h, d)` of type `t` under `constraints`:
/// negative infinity for an incomplete span whose arc is forbidden or whose
/// dependent has a different required head, zero otherwise.
pub fn penalty(constraints: &ConstraintSets, h: usize, d: usize, t: SpanType) -> f64 {
    if t != SpanType::Incomplete {
        return 0.0;
    }
    let other_head = constraints
        .required
        .iter()
        .any(|&(k, dep)| dep == d && k != h);
    if constraints.forbidden.contains(&(h, d)) || other_head {
        NEG_INF
    } else {
        0.0
    }
}

/// Dense lookup table equivalent to [`penalty`] for one constraint set.
struct PenaltyTable {
    size: usize,
    blocked: Vec<bool>,
}

impl PenaltyTable {
    fn new(n: usize, constraints: &ConstraintSets) -> Self {
        let size = n + 1;
        let mut blocked = vec![false; size * size];
        for &(h, d) in &constraints.forbidden {
            if h < size && d < size {
                blocked[h * size + d] = true;
            }
        }
        for &(k, d) in &constraints.required {
            if d < size {
                for h in (0..size).filter(|&h| h != k) {
                    blocked[h * size + d] = true;
                }
            }
        }
        PenaltyTable { size, blocked }
    }

    #[inline]
    fn get(&self, h: usize, d: usize, t: SpanType) -> f64 {
        match t {
            SpanType::Complete => 0.0,
            SpanType::Incomplete if self.blocked[h * self.size + d] => NEG_INF,
            SpanType::Incomplete => 0.0,
        }
    }
}

/// Chart tables for one sentence.
#[derive(Clone, Debug)]
pub struct Chart {
    size: usize,
    pub complete: Vec<f64>,
    pub incomplete: Vec<f64>,
    pub complete_split: Vec<usize>,
    pub incomplete_split: Vec<usize>,
}

impl Chart {
    fn new(n: usize) -> Self {
        let size = n + 1;
        let mut complete = vec![NEG_INF; size * size];
        for i in 0..size {
            complete[i * size + i] = 0.0;
        }
        Chart {
            size,
            complete,
            incomplete: vec![NEG_INF; size * size],
            complete_split: vec![0; size * size],
            incomplete_split: vec![0; size * size],
        }
    }

    #[inline]
    fn at(&self, a: usize, b: usize) -> usize {
        a * self.size + b
    }

    pub fn complete_score(&self, a: usize, b: usize) -> f64 {
        self.complete[self.at(a, b)]
    }

    pub fn incomplete_score(&self, a: usize, b: usize) -> f64 {
        self.incomplete[self.at(a, b)]
    }
}

/// A decoded tree and its total arc score.
#[derive(Clone, Debug, PartialEq)]
pub struct Parse {
    pub tree: DepTree,
    pub score: f64,
}

fn fill_chart(scores: &ScoreMatrix, pen: &PenaltyTable) -> Chart {
    use SpanType::{Complete as COM, Incomplete as INCOM};
    let n = scores.len();
    let mut chart = Chart::new(n);
    for w in 1..=n {
        for i in 0..=n - w {
            let j = i + w;

            // Shared inner maximization for both incomplete spans over (i, j).
            let mut best = NEG_INF;
            let mut best_r = i;
            for r in i..j {
                let v = plus(
                    plus(chart.complete[chart.at(i, r)], chart.complete[chart.at(j, r + 1)]),
                    plus(pen.get(i, r, COM), pen.get(j, r + 1, COM)),
                );
                if v > best {
                    best = v;
                    best_r = r;
                }
            }
            let ij = chart.at(i, j);
            chart.incomplete[ij] = plus(plus(best, scores.get(i, j)), pen.get(i, j, INCOM));
            chart.incomplete_split[ij] = best_r;
            let ji = chart.at(j, i);
            chart.incomplete[ji] = if i == 0 {
                NEG_INF
            } else {
                plus(plus(best, scores.get(j, i)), pen.get(j, i, INCOM))
            };
            chart.incomplete_split[ji] = best_r;

            let mut best = NEG_INF;
            let mut best_r = i + 1;
            for r in i + 1..=j {
                let v = plus(
                    plus(chart.incomplete[chart.at(i, r)], chart.complete[chart.at(r, j)]),
                    plus(pen.get(i, r, INCOM), pen.get(r, j, COM)),
                );
                if v > best {
                    best = v;
                    best_r = r;
                }
            }
            chart.complete[ij] = best;
            chart.complete_split[ij] = best_r;

            let mut best = NEG_INF;
            let mut best_r = i;
            for r in i..j {
                let v = plus(
                    plus(chart.incomplete[chart.at(j, r)], chart.complete[chart.at(r, i)]),
                    plus(pen.get(j, r, INCOM), pen.get(r, i, COM)),
                );
                if v > best {
                    best = v;
                    best_r = r;
                }
            }
            chart.complete[ji] = best;
            chart.complete_split[ji] = best_r;
        }
    }
    chart
}

fn backtrack(chart: &Chart, n: usize) -> DepTree {
    let mut heads = vec![usize::MAX; n];
    // Explicit stack of (head, end, is_complete).
    let mut todo = vec![(0usize, n, true)];
    while let Some((a, b, complete)) = todo.pop() {
        if a == b {
            continue;
        }
        let idx = chart.at(a, b);
        if complete {
            let r = chart.complete_split[idx];
            todo.push((a, r, false));
            todo.push((r, b, true));
        } else {
            heads[b - 1] = a;
            let r = chart.incomplete_split[idx];
            let (i, j) = (a.min(b), a.max(b));
            todo.push((i, r, true));
            todo.push((j, r + 1, true));
        }
    }
    debug_assert!(heads.iter().all(|&h| h != usize::MAX));
    DepTree::new(heads)
}

/// Highest-scoring projective tree rooted at 0.
pub fn decode(scores: &ScoreMatrix) -> Parse {
    constrained_decode(scores, &ConstraintSets::unconstrained())
        .expect("an unconstrained sentence always has a projective tree")
}

/// Highest-scoring projective tree satisfying `constraints`, or `None` when
/// no feasible tree exists.
pub fn constrained_decode(scores: &ScoreMatrix, constraints: &ConstraintSets) -> Option<Parse> {
    let n = scores.len();
    assert!(n >= 1, "cannot decode an empty sentence");
    let chart = fill_chart(scores, &PenaltyTable::new(n, constraints));
    let score = chart.complete_score(0, n);
    if score == NEG_INF {
        return None;
    }
    Some(Parse {
        tree: backtrack(&chart, n),
        score,
    })
}

/// Best feasible score only; negative infinity when infeasible.
pub fn constrained_score(scores: &ScoreMatrix, constraints: &ConstraintSets) -> f64 {
    let n = scores.len();
    fill_chart(scores, &PenaltyTable::new(n, constraints)).complete_score(0, n)
}

/// The filled max-chart, for inspection.
pub fn chart(scores: &ScoreMatrix, constraints: &ConstraintSets) -> Chart {
    fill_chart(scores, &PenaltyTable::new(scores.len(), constraints))
}

/// `log(exp(a) + exp(b))`, with negative infinity as the identity.
#[inline]
fn log_add(a: f64, b: f64) -> f64 {
    if a == NEG_INF {
        return b;
    }
    if b == NEG_INF {
        return a;
    }
    let (hi, lo) = if a > b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

struct InsideChart {
    size: usize,
    complete: Vec<f64>,
    incomplete: Vec<f64>,
}

fn inside(scores: &ScoreMatrix) -> InsideChart {
    let n = scores.len();
    let size = n + 1;
    let at = |a: usize, b: usize| a * size + b;
    let mut complete = vec![NEG_INF; size * size];
    let mut incomplete = vec![NEG_INF; size * size];
    for i in 0..size {
        complete[at(i, i)] = 0.0;
    }
    for w in 1..=n {
        for i in 0..=n - w {
            let j = i + w;
            let mut acc = NEG_INF;
            for r in i..j {
                acc = log_add(acc, plus(complete[at(i, r)], complete[at(j, r + 1)]));
            }
            incomplete[at(i, j)] = plus(acc, scores.get(i, j));
            if i > 0 {
                incomplete[at(j, i)] = plus(acc, scores.get(j, i));
            }
            let mut acc = NEG_INF;
            for r in i + 1..=j {
                acc = log_add(acc, plus(incomplete[at(i, r)], complete[at(r, j)]));
            }
            complete[at(i, j)] = acc;
            let mut acc = NEG_INF;
            for r in i..j {
                acc = log_add(acc, plus(incomplete[at(j, r)], complete[at(r, i)]));
            }
            complete[at(j, i)] = acc;
        }
    }
    InsideChart {
        size,
        complete,
        incomplete,
    }
}

/// Log of the sum over all projective trees of `exp(tree score)`.
pub fn log_partition(scores: &ScoreMatrix) -> f64 {
    let n = scores.len();
    assert!(n >= 1, "cannot score an empty sentence");
    let chart = inside(scores);
    chart.complete[n]
}

/// Arc marginal probabilities under the tree distribution
/// `p(t) ∝ exp(score(t))`, computed by inside-outside. Entry `(h, d)` of the
/// returned matrix is `P(h -> d)`.
pub fn arc_marginals(scores: &ScoreMatrix) -> ScoreMatrix {
    let n = scores.len();
    assert!(n >= 1, "cannot score an empty sentence");
    let ins = inside(scores);
    let size = ins.size;
    let at = |a: usize, b: usize| a * size + b;
    let log_z = ins.complete[at(0, n)];

    let mut out_c = vec![NEG_INF; size * size];
    let mut out_i = vec![NEG_INF; size * size];
    out_c[at(0, n)] = 0.0;

    for w in (1..=n).rev() {
        for i in 0..=n - w {
            let j = i + w;
            // Complete spans of this width feed incomplete spans of the same
            // width, so they go first.
            let o = out_c[at(i, j)];
            if o != NEG_INF {
                for r in i + 1..=j {
                    out_i[at(i, r)] = log_add(out_i[at(i, r)], plus(o, ins.complete[at(r, j)]));
                    out_c[at(r, j)] = log_add(out_c[at(r, j)], plus(o, ins.incomplete[at(i, r)]));
                }
            }
            let o = out_c[at(j, i)];
            if o != NEG_INF {
                for r in i..j {
                    out_i[at(j, r)] = log_add(out_i[at(j, r)], plus(o, ins.complete[at(r, i)]));
                    out_c[at(r, i)] = log_add(out_c[at(r, i)], plus(o, ins.incomplete[at(j, r)]));
                }
            }
            let mut push_incomplete = |o: f64| {
                if o == NEG_INF {
                    return;
                }
                for r in i..j {
                    out_c[at(i, r)] = log_add(out_c[at(i, r)], plus(o, ins.complete[at(j, r + 1)]));
                    out_c[at(j, r + 1)] =
                        log_add(out_c[at(j, r + 1)], plus(o, ins.complete[at(i, r)]));
                }
            };
            push_incomplete(plus(out_i[at(i, j)], scores.get(i, j)));
            if i > 0 {
                push_incomplete(plus(out_i[at(j, i)], scores.get(j, i)));
            }
        }
    }

    ScoreMatrix::from_fn(n, |h, d| {
        let v = plus(plus(ins.incomplete[at(h, d)], out_i[at(h, d)]), -log_z);
        if v == NEG_INF {
            0.0
        } else {
            v.exp()
        }
    })
}
