//! CoNLL-X reading and writing, plus the tree types shared by every parser
//! component.
//!
//! Position 0 is the artificial root. It is never written as a token row.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use crate::error::{Error, Result};

/// Form and tag used for the artificial root in feature templates.
pub const ROOT_FORM: &str = "<ROOT>";

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Token {
    pub index: usize,
    pub form: String,
    pub pos: String,
    pub gold_head: Option<usize>,
    pub gold_label: Option<String>,
}

impl Token {
    pub fn new(index: usize, form: impl Into<String>, pos: impl Into<String>) -> Self {
        Token {
            index,
            form: form.into(),
            pos: pos.into(),
            gold_head: None,
            gold_label: None,
        }
    }

    pub fn with_gold(mut self, head: usize, label: impl Into<String>) -> Self {
        self.gold_head = Some(head);
        self.gold_label = Some(label.into());
        self
    }
}

/// A sentence of tokens `1..=n`; the root at position 0 is implicit.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Sentence {
    tokens: Vec<Token>,
}

impl Sentence {
    /// Builds a sentence, checking index contiguity and gold-head bounds.
    pub fn new(tokens: Vec<Token>) -> Result<Self> {
        if tokens.is_empty() {
            return Err(Error::Usage("sentence must contain at least one token".into()));
        }
        let n = tokens.len();
        for (i, tok) in tokens.iter().enumerate() {
            if tok.index != i + 1 {
                return Err(Error::Usage(format!(
                    "token indices must be 1..{n} contiguous, found {} at slot {}",
                    tok.index,
                    i + 1
                )));
            }
            if let Some(h) = tok.gold_head {
                if h > n || h == tok.index {
                    return Err(Error::Usage(format!(
                        "token {} has invalid head {h}",
                        tok.index
                    )));
                }
            }
        }
        Ok(Sentence { tokens })
    }

    /// Convenience constructor from `(form, pos)` pairs without gold annotation.
    pub fn from_words<S: AsRef<str>>(words: &[(S, S)]) -> Self {
        let tokens = words
            .iter()
            .enumerate()
            .map(|(i, (w, p))| Token::new(i + 1, w.as_ref(), p.as_ref()))
            .collect();
        Sentence { tokens }
    }

    /// Number of real tokens (excluding root).
    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn tokens(&self) -> &[Token] {
        &self.tokens
    }

    /// Token at `position` (1-based). Position 0 has no token.
    pub fn token(&self, position: usize) -> Option<&Token> {
        position.checked_sub(1).and_then(|i| self.tokens.get(i))
    }

    /// Word form at a position, with the root and out-of-range positions mapped
    /// to fixed placeholders.
    pub fn form_at(&self, position: isize) -> &str {
        match position {
            0 => ROOT_FORM,
            p if p < 0 => "<NONE>",
            p => self.token(p as usize).map_or("<NONE>", |t| t.form.as_str()),
        }
    }

    pub fn pos_at(&self, position: isize) -> &str {
        match position {
            0 => ROOT_FORM,
            p if p < 0 => "<NONE>",
            p => self.token(p as usize).map_or("<NONE>", |t| t.pos.as_str()),
        }
    }

    /// The gold tree, if every token carries a gold head.
    pub fn gold_tree(&self) -> Option<DepTree> {
        let heads = self
            .tokens
            .iter()
            .map(|t| t.gold_head)
            .collect::<Option<Vec<_>>>()?;
        let labels = self.tokens.iter().map(|t| t.gold_label.clone()).collect();
        Some(DepTree::with_labels(heads, labels))
    }

    /// Returns a copy of this sentence with gold annotation replaced by `tree`.
    pub fn with_tree(&self, tree: &DepTree) -> Result<Sentence> {
        if tree.len() != self.len() {
            return Err(Error::Usage(format!(
                "tree covers {} tokens, sentence has {}",
                tree.len(),
                self.len()
            )));
        }
        let tokens = self
            .tokens
            .iter()
            .enumerate()
            .map(|(i, t)| Token {
                gold_head: Some(tree.heads[i]),
                gold_label: tree.labels[i].clone(),
                ..t.clone()
            })
            .collect();
        Ok(Sentence { tokens })
    }
}

/// A dependency tree over positions `1..=n`; `heads[d - 1]` is the head of `d`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DepTree {
    heads: Vec<usize>,
    labels: Vec<Option<String>>,
}

impl DepTree {
    pub fn new(heads: Vec<usize>) -> Self {
        let labels = vec![None; heads.len()];
        DepTree { heads, labels }
    }

    pub fn with_labels(heads: Vec<usize>, labels: Vec<Option<String>>) -> Self {
        assert_eq!(heads.len(), labels.len(), "heads and labels differ in length");
        DepTree { heads, labels }
    }

    /// Builds a tree from `(head, dependent)` arcs over `n` tokens. Returns
    /// `None` unless every token has exactly one head.
    pub fn from_arcs(n: usize, arcs: impl IntoIterator<Item = (usize, usize)>) -> Option<Self> {
        let mut heads = vec![None; n];
        for (h, d) in arcs {
            if d == 0 || d > n || heads[d - 1].is_some() {
                return None;
            }
            heads[d - 1] = Some(h);
        }
        heads.into_iter().collect::<Option<Vec<_>>>().map(DepTree::new)
    }

    pub fn len(&self) -> usize {
        self.heads.len()
    }

    pub fn is_empty(&self) -> bool {
        self.heads.is_empty()
    }

    pub fn head(&self, dependent: usize) -> usize {
        self.heads[dependent - 1]
    }

    pub fn label(&self, dependent: usize) -> Option<&str> {
        self.labels[dependent - 1].as_deref()
    }

    pub fn heads(&self) -> &[usize] {
        &self.heads
    }

    pub fn labels(&self) -> &[Option<String>] {
        &self.labels
    }

    /// Unlabeled arcs `(head, dependent)` in dependent order.
    pub fn arcs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.heads.iter().enumerate().map(|(i, &h)| (h, i + 1))
    }

    pub fn arc_set(&self) -> BTreeSet<(usize, usize)> {
        self.arcs().collect()
    }

    /// Drops labels, for comparing tree structure only.
    pub fn unlabeled(&self) -> DepTree {
        DepTree::new(self.heads.clone())
    }

    /// True iff every head is in range and following heads from any token
    /// reaches the root.
    pub fn is_well_formed(&self) -> bool {
        let n = self.len();
        if self.heads.iter().enumerate().any(|(i, &h)| h > n || h == i + 1) {
            return false;
        }
        (1..=n).all(|d| {
            let mut cur = d;
            for _ in 0..=n {
                if cur == 0 {
                    return true;
                }
                cur = self.head(cur);
            }
            false
        })
    }

    /// Sum of `score(head, dependent)` over arcs, accumulated in dependent order.
    pub fn score_with(&self, score: impl Fn(usize, usize) -> f64) -> f64 {
        self.arcs().map(|(h, d)| score(h, d)).sum()
    }
}

/// True iff no two arcs cross when drawn above the sentence, root arcs included.
pub fn is_projective(tree: &DepTree) -> bool {
    let spans: Vec<(usize, usize)> = tree
        .arcs()
        .map(|(h, d)| (h.min(d), h.max(d)))
        .collect();
    for (i, &(l1, r1)) in spans.iter().enumerate() {
        for &(l2, r2) in &spans[i + 1..] {
            if (l1 < l2 && l2 < r1 && r1 < r2) || (l2 < l1 && l1 < r2 && r2 < r1) {
                return false;
            }
        }
    }
    true
}

fn parse_field(value: &str) -> Option<String> {
    (value != "_").then(|| value.to_string())
}

/// Parses CoNLL-X (or integer-id CoNLL-U) text into sentences.
///
/// Columns 1, 2, 4, 7 and 8 give index, form, POS, head and label. Rows with a
/// non-integer id (multi-word ranges, empty nodes) are skipped.
pub fn parse_conll(text: &str) -> Result<Vec<Sentence>> {
    let mut sentences = Vec::new();
    let mut rows: Vec<(usize, Token)> = Vec::new();

    let flush = |rows: &mut Vec<(usize, Token)>, out: &mut Vec<Sentence>| -> Result<()> {
        if rows.is_empty() {
            return Ok(());
        }
        let n = rows.len();
        for (i, (line, tok)) in rows.iter().enumerate() {
            if tok.index != i + 1 {
                return Err(Error::Conll {
                    line: *line,
                    message: format!("expected token id {}, found {}", i + 1, tok.index),
                });
            }
            if let Some(h) = tok.gold_head {
                if h > n {
                    return Err(Error::Conll {
                        line: *line,
                        message: format!("head {h} out of range for {n}-token sentence"),
                    });
                }
                if h == tok.index {
                    return Err(Error::Conll {
                        line: *line,
                        message: format!("token {h} is its own head"),
                    });
                }
            }
        }
        let tokens = rows.drain(..).map(|(_, t)| t).collect();
        out.push(Sentence { tokens });
        Ok(())
    };

    for (lineno, raw) in text.split('\n').enumerate() {
        let line = raw.strip_suffix('\r').unwrap_or(raw);
        let lineno = lineno + 1;
        if line.trim().is_empty() {
            flush(&mut rows, &mut sentences)?;
            continue;
        }
        if line.starts_with('#') {
            continue;
        }
        let cols: Vec<&str> = line.split('\t').collect();
        if cols.len() != 10 {
            return Err(Error::Conll {
                line: lineno,
                message: format!("expected 10 tab-separated columns, found {}", cols.len()),
            });
        }
        let Ok(index) = cols[0].parse::<usize>() else {
            // Multi-word token ranges (1-2) and empty nodes (1.1).
            if cols[0].contains('-') || cols[0].contains('.') {
                continue;
            }
            return Err(Error::Conll {
                line: lineno,
                message: format!("invalid token id {:?}", cols[0]),
            });
        };
        let gold_head = match cols[6] {
            "_" => None,
            h => Some(h.parse::<usize>().map_err(|_| Error::Conll {
                line: lineno,
                message: format!("invalid head {h:?}"),
            })?),
        };
        rows.push((
            lineno,
            Token {
                index,
                form: cols[1].to_string(),
                pos: cols[3].to_string(),
                gold_head,
                gold_label: parse_field(cols[7]),
            },
        ));
    }
    flush(&mut rows, &mut sentences)?;
    Ok(sentences)
}

/// Writes sentences with the heads and labels of `trees` as CoNLL-X.
///
/// The POS tag fills both CPOSTAG and POSTAG; unknown columns are `_`.
pub fn write_conll(sentences: &[Sentence], trees: &[DepTree]) -> Result<String> {
    if sentences.len() != trees.len() {
        return Err(Error::Usage(format!(
            "{} sentences but {} trees",
            sentences.len(),
            trees.len()
        )));
    }
    let mut out = String::new();
    for (k, (sentence, tree)) in sentences.iter().zip(trees).enumerate() {
        if sentence.len() != tree.len() {
            return Err(Error::Usage(format!(
                "sentence {} has {} tokens but its tree has {}",
                k + 1,
                sentence.len(),
                tree.len()
            )));
        }
        for tok in sentence.tokens() {
            let d = tok.index;
            let label = tree.label(d).unwrap_or("_");
            writeln!(
                out,
                "{}\t{}\t_\t{}\t{}\t_\t{}\t{}\t_\t_",
                d,
                tok.form,
                tok.pos,
                tok.pos,
                tree.head(d),
                label
            )
            .expect("writing to a String cannot fail");
        }
        out.push('\n');
    }
    Ok(out)
}

/// Splits a corpus into projective gold pairs and a count of skipped sentences
/// (non-projective or lacking gold heads).
pub fn projective_pairs(corpus: &[Sentence]) -> (Vec<(Sentence, DepTree)>, usize) {
    let mut skipped = 0;
    let mut pairs = Vec::with_capacity(corpus.len());
    for s in corpus {
        match s.gold_tree() {
            Some(t) if t.is_well_formed() && is_projective(&t) => pairs.push((s.clone(), t)),
            _ => skipped += 1,
        }
    }
    (pairs, skipped)
}
