//! Attachment scores, binned-distance F1, and the beta sweep.

use std::collections::BTreeSet;
use std::fmt::{self, Write as _};

use crate::error::{Error, Result};
use crate::integrator::{parse_corpus, IntegratorConfig};
use crate::scoring::{ArcScorerModel, TransitionModel};
use crate::treebank::{DepTree, Sentence};

/// Arc-distance bins.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum DistanceBin {
    Root,
    One,
    Two,
    ThreeToSix,
    SevenPlus,
}

impl DistanceBin {
    pub const ALL: [DistanceBin; 5] = [
        DistanceBin::Root,
        DistanceBin::One,
        DistanceBin::Two,
        DistanceBin::ThreeToSix,
        DistanceBin::SevenPlus,
    ];

    pub fn of_arc(head: usize, dependent: usize) -> DistanceBin {
        if head == 0 {
            return DistanceBin::Root;
        }
        match head.abs_diff(dependent) {
            1 => DistanceBin::One,
            2 => DistanceBin::Two,
            3..=6 => DistanceBin::ThreeToSix,
            _ => DistanceBin::SevenPlus,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            DistanceBin::Root => "ROOT",
            DistanceBin::One => "1",
            DistanceBin::Two => "2",
            DistanceBin::ThreeToSix => "3-6",
            DistanceBin::SevenPlus => "7+",
        }
    }
}

/// Which tokens count toward attachment scores.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub enum Punctuation {
    #[default]
    Include,
    /// Skip tokens whose gold POS is in the set.
    Exclude(BTreeSet<String>),
}

impl Punctuation {
    /// Exclusion with the usual Penn Treebank punctuation tags.
    pub fn exclude_ptb() -> Self {
        Punctuation::Exclude(
            ["``", "''", ",", ".", ":", "-LRB-", "-RRB-", "#", "$", "PU", "PUNCT"]
                .into_iter()
                .map(String::from)
                .collect(),
        )
    }

    fn counts(&self, pos: &str) -> bool {
        match self {
            Punctuation::Include => true,
            Punctuation::Exclude(tags) => !tags.contains(pos),
        }
    }
}

/// Per-bin precision, recall and F1 (percentages) with arc counts.
#[derive(Clone, Debug, PartialEq)]
pub struct BinScore {
    pub bin: DistanceBin,
    pub gold: usize,
    pub predicted: usize,
    pub correct: usize,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EvalReport {
    pub uas: f64,
    pub las: f64,
    /// Bins with no gold and no predicted arcs are absent.
    pub bins: Vec<BinScore>,
    pub tokens: usize,
    pub sentences: usize,
}

fn check_shapes(gold: &[DepTree], pred: &[DepTree]) -> Result<()> {
    if gold.len() != pred.len() {
        return Err(Error::Usage(format!(
            "{} gold trees but {} predicted",
            gold.len(),
            pred.len()
        )));
    }
    for (i, (g, p)) in gold.iter().zip(pred).enumerate() {
        if g.len() != p.len() {
            return Err(Error::Usage(format!(
                "sentence {}: gold has {} tokens, prediction {}",
                i + 1,
                g.len(),
                p.len()
            )));
        }
    }
    Ok(())
}

fn percent(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        100.0 * num as f64 / den as f64
    }
}

/// UAS and LAS in percent, all tokens counted.
pub fn attachment_scores(gold: &[DepTree], pred: &[DepTree]) -> Result<(f64, f64)> {
    check_shapes(gold, pred)?;
    let mut total = 0;
    let mut heads = 0;
    let mut labeled = 0;
    for (g, p) in gold.iter().zip(pred) {
        for d in 1..=g.len() {
            total += 1;
            if g.head(d) == p.head(d) {
                heads += 1;
                if g.label(d) == p.label(d) {
                    labeled += 1;
                }
            }
        }
    }
    Ok((percent(heads, total), percent(labeled, total)))
}

/// UAS and LAS with a punctuation policy applied to the gold POS tags of
/// `sentences`. Returns the scores and the number of tokens counted.
pub fn attachment_scores_with(
    sentences: &[Sentence],
    gold: &[DepTree],
    pred: &[DepTree],
    punct: &Punctuation,
) -> Result<(f64, f64, usize)> {
    check_shapes(gold, pred)?;
    if sentences.len() != gold.len() {
        return Err(Error::Usage("sentence and tree counts differ".into()));
    }
    let mut total = 0;
    let mut heads = 0;
    let mut labeled = 0;
    for ((s, g), p) in sentences.iter().zip(gold).zip(pred) {
        for tok in s.tokens() {
            let d = tok.index;
            if !punct.counts(&tok.pos) {
                continue;
            }
            total += 1;
            if g.head(d) == p.head(d) {
                heads += 1;
                if g.label(d) == p.label(d) {
                    labeled += 1;
                }
            }
        }
    }
    Ok((percent(heads, total), percent(labeled, total), total))
}

/// Micro-averaged precision, recall and F1 of unlabeled arcs per distance
/// bin.
pub fn binned_distance_f1(gold: &[DepTree], pred: &[DepTree]) -> Result<Vec<BinScore>> {
    check_shapes(gold, pred)?;
    let mut counts = [(0usize, 0usize, 0usize); 5];
    let slot = |b: DistanceBin| DistanceBin::ALL.iter().position(|&x| x == b).expect("known bin");
    for (g, p) in gold.iter().zip(pred) {
        let g_arcs = g.arc_set();
        for (h, d) in g.arcs() {
            counts[slot(DistanceBin::of_arc(h, d))].0 += 1;
        }
        for (h, d) in p.arcs() {
            let c = &mut counts[slot(DistanceBin::of_arc(h, d))];
            c.1 += 1;
            if g_arcs.contains(&(h, d)) {
                c.2 += 1;
            }
        }
    }
    Ok(DistanceBin::ALL
        .iter()
        .zip(counts)
        .filter(|(_, (g, p, _))| *g > 0 || *p > 0)
        .map(|(&bin, (g, p, c))| {
            let precision = percent(c, p);
            let recall = percent(c, g);
            let f1 = if precision + recall == 0.0 {
                0.0
            } else {
                2.0 * precision * recall / (precision + recall)
            };
            BinScore {
                bin,
                gold: g,
                predicted: p,
                correct: c,
                precision,
                recall,
                f1,
            }
        })
        .collect())
}

/// Full report over a parsed corpus.
pub fn evaluate(
    sentences: &[Sentence],
    gold: &[DepTree],
    pred: &[DepTree],
    punct: &Punctuation,
) -> Result<EvalReport> {
    let (uas, las, tokens) = attachment_scores_with(sentences, gold, pred, punct)?;
    Ok(EvalReport {
        uas,
        las,
        bins: binned_distance_f1(gold, pred)?,
        tokens,
        sentences: sentences.len(),
    })
}

impl EvalReport {
    pub fn bin(&self, bin: DistanceBin) -> Option<&BinScore> {
        self.bins.iter().find(|b| b.bin == bin)
    }

    /// `metric<TAB>value` lines.
    pub fn to_key_values(&self) -> String {
        let mut out = String::new();
        let mut kv = |k: &str, v: String| {
            writeln!(out, "{k}\t{v}").expect("writing to a String cannot fail");
        };
        kv("uas", format!("{:.4}", self.uas));
        kv("las", format!("{:.4}", self.las));
        kv("tokens", self.tokens.to_string());
        kv("sentences", self.sentences.to_string());
        for b in &self.bins {
            kv(&format!("f1.{}", b.bin.name()), format!("{:.4}", b.f1));
            kv(&format!("precision.{}", b.bin.name()), format!("{:.4}", b.precision));
            kv(&format!("recall.{}", b.bin.name()), format!("{:.4}", b.recall));
            kv(&format!("gold_arcs.{}", b.bin.name()), b.gold.to_string());
        }
        out
    }
}

impl fmt::Display for EvalReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{:<12}{:>10}", "sentences", self.sentences)?;
        writeln!(f, "{:<12}{:>10}", "tokens", self.tokens)?;
        writeln!(f, "{:<12}{:>10.2}", "UAS", self.uas)?;
        writeln!(f, "{:<12}{:>10.2}", "LAS", self.las)?;
        writeln!(f)?;
        writeln!(
            f,
            "{:<8}{:>8}{:>8}{:>10}{:>10}{:>10}",
            "bin", "gold", "pred", "P", "R", "F1"
        )?;
        for b in &self.bins {
            writeln!(
                f,
                "{:<8}{:>8}{:>8}{:>10.2}{:>10.2}{:>10.2}",
                b.bin.name(),
                b.gold,
                b.predicted,
                b.precision,
                b.recall,
                b.f1
            )?;
        }
        Ok(())
    }
}

/// Default beta grid: 0.00, 0.05, ..., 1.00.
pub fn default_beta_grid() -> Vec<f64> {
    (0..=20).map(|i| i as f64 / 20.0).collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct BetaSweep {
    pub best_beta: f64,
    pub curve: Vec<(f64, f64)>,
}

impl BetaSweep {
    /// `beta<TAB>uas` lines.
    pub fn to_tsv(&self) -> String {
        self.curve
            .iter()
            .map(|(b, u)| format!("{b}\t{u:.4}\n"))
            .collect()
    }
}

/// Parses `dev` at every beta and picks the one with the highest UAS,
/// preferring the smaller beta on ties.
pub fn sweep_beta(
    dev: &[Sentence],
    model: &TransitionModel,
    scorer: Option<&ArcScorerModel>,
    betas: &[f64],
    temperature: f64,
    jobs: usize,
) -> Result<BetaSweep> {
    if dev.is_empty() {
        return Err(Error::Usage("beta sweep needs a nonempty development set".into()));
    }
    if betas.is_empty() {
        return Err(Error::Usage("beta sweep needs at least one beta".into()));
    }
    let gold: Vec<DepTree> = dev
        .iter()
        .map(|s| {
            s.gold_tree()
                .ok_or_else(|| Error::Usage("development sentences need gold heads".into()))
        })
        .collect::<Result<_>>()?;
    let mut curve = Vec::with_capacity(betas.len());
    for &beta in betas {
        let config = IntegratorConfig {
            beta,
            temperature,
            max_steps: None,
        };
        let pred = parse_corpus(dev, model, scorer, &config, jobs)?;
        let (uas, _) = attachment_scores(&gold, &pred)?;
        curve.push((beta, uas));
    }
    let mut sorted = curve.clone();
    sorted.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite betas"));
    let mut best = sorted[0];
    for &(b, u) in &sorted[1..] {
        if u > best.1 {
            best = (b, u);
        }
    }
    Ok(BetaSweep {
        best_beta: best.0,
        curve,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn labeled(heads: &[usize], labels: &[&str]) -> DepTree {
        DepTree::with_labels(
            heads.to_vec(),
            labels.iter().map(|l| Some(l.to_string())).collect(),
        )
    }

    #[test]
    fn perfect_scores() {
        let g = vec![labeled(&[2, 0], &["a", "root"])];
        assert_eq!(attachment_scores(&g, &g).unwrap(), (100.0, 100.0));
        for b in binned_distance_f1(&g, &g).unwrap() {
            assert_eq!(b.f1, 100.0);
        }
    }

    #[test]
    fn one_wrong_label() {
        let g = vec![labeled(&[2, 0], &["a", "root"])];
        let p = vec![labeled(&[2, 0], &["b", "root"])];
        assert_eq!(attachment_scores(&g, &p).unwrap(), (100.0, 50.0));
    }

    #[test]
    fn shape_mismatch() {
        let g = vec![DepTree::new(vec![0])];
        assert!(attachment_scores(&g, &[]).is_err());
        assert!(attachment_scores(&g, &[DepTree::new(vec![0, 1])]).is_err());
    }

    #[test]
    fn binned_hand_tally() {
        let g = vec![DepTree::new(vec![2, 0])];
        let p = vec![DepTree::new(vec![0, 1])];
        let bins = binned_distance_f1(&g, &p).unwrap();
        let root = bins.iter().find(|b| b.bin == DistanceBin::Root).unwrap();
        assert_eq!((root.precision, root.recall, root.f1), (0.0, 0.0, 0.0));
        let one = bins.iter().find(|b| b.bin == DistanceBin::One).unwrap();
        assert_eq!((one.gold, one.predicted, one.correct, one.f1), (1, 1, 0, 0.0));
        assert!(bins.iter().all(|b| b.bin != DistanceBin::Two));
    }

    #[test]
    fn punctuation_exclusion() {
        let s = Sentence::from_words(&[("Hi", "UH"), (".", ".")]);
        let g = vec![DepTree::new(vec![0, 1])];
        let p = vec![DepTree::new(vec![0, 0])];
        let (uas, _, n) = attachment_scores_with(std::slice::from_ref(&s), &g, &p, &Punctuation::Include).unwrap();
        assert_eq!((uas, n), (50.0, 2));
        let (uas, _, n) = attachment_scores_with(&[s], &g, &p, &Punctuation::exclude_ptb()).unwrap();
        assert_eq!((uas, n), (100.0, 1));
    }

    #[test]
    fn beta_grid() {
        let g = default_beta_grid();
        assert_eq!(g.len(), 21);
        assert_eq!(g[0], 0.0);
        assert_eq!(g[20], 1.0);
    }

    #[test]
    fn key_values_format() {
        let g = vec![DepTree::new(vec![0])];
        let s = vec![Sentence::from_words(&[("a", "X")])];
        let r = evaluate(&s, &g, &g, &Punctuation::Include).unwrap();
        let kv = r.to_key_values();
        assert!(kv.starts_with("uas\t100.0000\nlas\t100.0000\n"));
        assert!(kv.lines().all(|l| l.split('\t').count() == 2));
        assert!(r.to_string().contains("UAS"));
    }
}
