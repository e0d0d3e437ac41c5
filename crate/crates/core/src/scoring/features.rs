//! Sparse feature templates for parser states and candidate arcs.

use std::collections::BTreeSet;

use crate::transition::ParserState;
use crate::treebank::Sentence;

/// Sparse feature vector. Duplicate names are allowed until
/// [`FeatureVector::canonical`] merges them.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct FeatureVector {
    entries: Vec<(String, f64)>,
}

impl FeatureVector {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, name: impl Into<String>, value: f64) {
        self.entries.push((name.into(), value));
    }

    pub fn entries(&self) -> &[(String, f64)] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Sorted by name with duplicates summed.
    pub fn canonical(&self) -> FeatureVector {
        let mut entries = self.entries.clone();
        entries.sort_by(|a, b| a.0.cmp(&b.0));
        let mut merged: Vec<(String, f64)> = Vec::with_capacity(entries.len());
        for (name, v) in entries {
            match merged.last_mut() {
                Some((last, acc)) if *last == name => *acc += v,
                _ => merged.push((name, v)),
            }
        }
        FeatureVector { entries: merged }
    }
}

impl FromIterator<(String, f64)> for FeatureVector {
    fn from_iter<I: IntoIterator<Item = (String, f64)>>(iter: I) -> Self {
        FeatureVector {
            entries: iter.into_iter().collect(),
        }
    }
}

/// A token view used by the state feature templates.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum View {
    /// The token at its own position.
    Current,
    /// The token one position to the left.
    Previous,
    /// Current and previous tokens under one shared tag, so their features
    /// add up on the same weights.
    Sum,
}

impl View {
    pub fn tag(self) -> &'static str {
        match self {
            View::Current => "v0",
            View::Previous => "v1",
            View::Sum => "v2",
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            View::Current => "current",
            View::Previous => "previous",
            View::Sum => "sum",
        }
    }

    pub fn from_name(name: &str) -> Option<View> {
        match name {
            "current" => Some(View::Current),
            "previous" => Some(View::Previous),
            "sum" => Some(View::Sum),
            _ => None,
        }
    }

    fn offsets(self) -> &'static [isize] {
        match self {
            View::Current => &[0],
            View::Previous => &[-1],
            View::Sum => &[0, -1],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ViewConfig {
    pub views: Vec<View>,
}

impl ViewConfig {
    /// Single current-token view.
    pub fn base() -> Self {
        ViewConfig {
            views: vec![View::Current],
        }
    }

    /// Current, previous and summed views.
    pub fn enhanced() -> Self {
        ViewConfig {
            views: vec![View::Current, View::Previous, View::Sum],
        }
    }

    /// `1` gives [`ViewConfig::base`], `3` gives [`ViewConfig::enhanced`].
    pub fn with_count(k: usize) -> Option<Self> {
        match k {
            1 => Some(Self::base()),
            3 => Some(Self::enhanced()),
            _ => None,
        }
    }
}

impl Default for ViewConfig {
    fn default() -> Self {
        Self::base()
    }
}

/// Names of the positional templates, each a list of `(slot, attribute)`.
const POSITIONAL: &[(&str, &[(Slot, Attr)])] = &[
    ("s0w", &[(Slot::S0, Attr::Word)]),
    ("s0p", &[(Slot::S0, Attr::Pos)]),
    ("s0wp", &[(Slot::S0, Attr::Word), (Slot::S0, Attr::Pos)]),
    ("s1w", &[(Slot::S1, Attr::Word)]),
    ("s1p", &[(Slot::S1, Attr::Pos)]),
    ("b0w", &[(Slot::B0, Attr::Word)]),
    ("b0p", &[(Slot::B0, Attr::Pos)]),
    ("b0wp", &[(Slot::B0, Attr::Word), (Slot::B0, Attr::Pos)]),
    ("b1w", &[(Slot::B1, Attr::Word)]),
    ("b1p", &[(Slot::B1, Attr::Pos)]),
    ("b2p", &[(Slot::B2, Attr::Pos)]),
    ("s0p.b0p", &[(Slot::S0, Attr::Pos), (Slot::B0, Attr::Pos)]),
    ("s0w.b0w", &[(Slot::S0, Attr::Word), (Slot::B0, Attr::Word)]),
    ("s0w.b0p", &[(Slot::S0, Attr::Word), (Slot::B0, Attr::Pos)]),
    ("s0p.b0w", &[(Slot::S0, Attr::Pos), (Slot::B0, Attr::Word)]),
    (
        "s1p.s0p.b0p",
        &[(Slot::S1, Attr::Pos), (Slot::S0, Attr::Pos), (Slot::B0, Attr::Pos)],
    ),
    (
        "s0p.b0p.b1p",
        &[(Slot::S0, Attr::Pos), (Slot::B0, Attr::Pos), (Slot::B1, Attr::Pos)],
    ),
    (
        "b0p.b1p.b2p",
        &[(Slot::B0, Attr::Pos), (Slot::B1, Attr::Pos), (Slot::B2, Attr::Pos)],
    ),
];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Slot {
    S0,
    S1,
    B0,
    B1,
    B2,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Attr {
    Word,
    Pos,
}

fn slot_position(state: &ParserState, slot: Slot) -> Option<usize> {
    let front = state.buffer_front();
    let n = state.len();
    match slot {
        Slot::S0 => state.stack_at(0),
        Slot::S1 => state.stack_at(1),
        Slot::B0 => front,
        Slot::B1 => front.map(|b| b + 1).filter(|&p| p <= n),
        Slot::B2 => front.map(|b| b + 2).filter(|&p| p <= n),
    }
}

fn attr_value(sentence: &Sentence, position: Option<usize>, offset: isize, attr: Attr) -> &str {
    let Some(p) = position else {
        return "<NONE>";
    };
    let shifted = p as isize + offset;
    match attr {
        Attr::Word => sentence.form_at(shifted),
        Attr::Pos => sentence.pos_at(shifted),
    }
}

/// Names of the positional templates that read only `s0` and the buffer.
pub fn stack_top_and_buffer_templates() -> impl Iterator<Item = &'static str> {
    POSITIONAL
        .iter()
        .filter(|(_, parts)| parts.iter().all(|(slot, _)| *slot != Slot::S1))
        .map(|(name, _)| *name)
}

fn distance_bucket(distance: usize) -> &'static str {
    match distance {
        0 => "0",
        1 => "1",
        2 => "2",
        3 => "3",
        4 => "4",
        5..=7 => "5-7",
        _ => "8+",
    }
}

/// Features of a parser state: positional templates instantiated once per
/// view, plus arc-context templates under the current-token tag.
///
/// Every feature name has the form `<view-tag>:<template>=<value>`, and the
/// constant `bias` feature is always present.
pub fn extract_state_features(
    state: &ParserState,
    sentence: &Sentence,
    views: &ViewConfig,
) -> FeatureVector {
    let mut fv = FeatureVector::new();
    fv.push("bias", 1.0);
    let positions: Vec<(Slot, Option<usize>)> = [Slot::S0, Slot::S1, Slot::B0, Slot::B1, Slot::B2]
        .into_iter()
        .map(|slot| (slot, slot_position(state, slot)))
        .collect();
    let pos_of = |slot: Slot| positions.iter().find(|(s, _)| *s == slot).and_then(|(_, p)| *p);

    for view in &views.views {
        for &offset in view.offsets() {
            for (name, parts) in POSITIONAL {
                let mut value = String::new();
                for (i, (slot, attr)) in parts.iter().enumerate() {
                    if i > 0 {
                        value.push('|');
                    }
                    value.push_str(attr_value(sentence, pos_of(*slot), offset, *attr));
                }
                fv.push(format!("{}:{}={}", view.tag(), name, value), 1.0);
            }
        }
    }

    // Arc context around the stack top and buffer front.
    let tag = View::Current.tag();
    let s0 = pos_of(Slot::S0);
    let b0 = pos_of(Slot::B0);
    let label_or = |l: Option<&str>| l.unwrap_or("<NONE>").to_string();
    if let Some(s) = s0 {
        let has_head = if state.has_head(s) { "yes" } else { "no" };
        fv.push(format!("{tag}:s0h={has_head}"), 1.0);
        fv.push(format!("{tag}:s0l={}", label_or(state.label_of(s))), 1.0);
        let deps: Vec<usize> = state.dependents(s).collect();
        let left = deps.iter().copied().filter(|&d| d < s).min();
        let right = deps.iter().copied().filter(|&d| d > s).max();
        fv.push(format!("{tag}:s0ld={}", label_or(left.and_then(|d| state.label_of(d)))), 1.0);
        fv.push(format!("{tag}:s0rd={}", label_or(right.and_then(|d| state.label_of(d)))), 1.0);
        fv.push(format!("{tag}:s0nd={}", deps.len().min(4)), 1.0);
    } else {
        fv.push(format!("{tag}:s0=<NONE>"), 1.0);
    }
    if let Some(b) = b0 {
        let left = state.dependents(b).filter(|&d| d < b).min();
        fv.push(format!("{tag}:b0ld={}", label_or(left.and_then(|d| state.label_of(d)))), 1.0);
    }
    if let (Some(s), Some(b)) = (s0, b0) {
        let dist = distance_bucket(b - s);
        fv.push(format!("{tag}:dist={dist}"), 1.0);
        fv.push(
            format!(
                "{tag}:dist.s0p.b0p={dist}|{}|{}",
                sentence.pos_at(s as isize),
                sentence.pos_at(b as isize)
            ),
            1.0,
        );
    }
    fv
}

fn signed_bucket(head: usize, dependent: usize) -> String {
    let dist = head.abs_diff(dependent);
    let dir = if dependent > head { "R" } else { "L" };
    let bucket = match dist {
        1..=5 => dist.to_string(),
        6..=10 => "6-10".into(),
        _ => "11+".into(),
    };
    format!("{dir}{bucket}")
}

/// Feature names for the candidate arc `head -> dependent`. Only relative
/// positions enter the names, so identical local contexts yield identical
/// features wherever they occur in a sentence.
pub fn arc_features(sentence: &Sentence, head: usize, dependent: usize) -> Vec<String> {
    let (h, d) = (head as isize, dependent as isize);
    let hw = sentence.form_at(h);
    let hp = sentence.pos_at(h);
    let dw = sentence.form_at(d);
    let dp = sentence.pos_at(d);
    let dist = signed_bucket(head, dependent);
    let pos_or_edge = |p: isize| {
        if p < 0 || p as usize > sentence.len() {
            "<EDGE>"
        } else {
            sentence.pos_at(p)
        }
    };

    let mut out = vec![
        format!("hw={hw}"),
        format!("hp={hp}"),
        format!("dw={dw}"),
        format!("dp={dp}"),
        format!("hwp={hw}|{hp}"),
        format!("dwp={dw}|{dp}"),
        format!("hw.dw={hw}|{dw}"),
        format!("hp.dp={hp}|{dp}"),
        format!("hw.dp={hw}|{dp}"),
        format!("hp.dw={hp}|{dw}"),
        format!("hwp.dp={hw}|{hp}|{dp}"),
        format!("hp.dwp={hp}|{dw}|{dp}"),
        format!("dist={dist}"),
        format!("hp.dp.dist={hp}|{dp}|{dist}"),
        format!("hw.dp.dist={hw}|{dp}|{dist}"),
        format!("hp.dw.dist={hp}|{dw}|{dist}"),
        format!(
            "ctx.hr.dl={hp}|{}|{}|{dp}",
            pos_or_edge(h + 1),
            pos_or_edge(d - 1)
        ),
        format!(
            "ctx.hl.dr={}|{hp}|{dp}|{}",
            pos_or_edge(h - 1),
            pos_or_edge(d + 1)
        ),
        format!(
            "ctx.hr.dr={hp}|{}|{dp}|{}",
            pos_or_edge(h + 1),
            pos_or_edge(d + 1)
        ),
        format!(
            "ctx.hl.dl={}|{hp}|{}|{dp}",
            pos_or_edge(h - 1),
            pos_or_edge(d - 1)
        ),
    ];
    let (lo, hi) = (head.min(dependent), head.max(dependent));
    let between: BTreeSet<&str> = (lo + 1..hi).map(|p| sentence.pos_at(p as isize)).collect();
    for bp in between {
        out.push(format!("between={hp}|{bp}|{dp}"));
    }
    out
}
