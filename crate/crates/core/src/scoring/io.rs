//! Versioned text serialization for trained models.
//!
//! ```text
//! frparse-model v1 <kind>
//! <feature>\t<action-or-ARC>\t<weight>
//! ```
//!
//! Records are sorted lexicographically by feature, then by the second
//! column. Weights are written in shortest round-trip form, so a read-write
//! cycle is bit-exact. Transition models carry `@action` records giving the
//! inventory order and `@view` records giving the view list.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use super::arc_model::ArcScorerModel;
use super::features::{View, ViewConfig};
use super::transition_model::TransitionModel;
use crate::error::{Error, Result};
use crate::transition::Action;

pub const MAGIC: &str = "frparse-model v1";
pub const TRANSITION_KIND: &str = "transition";
pub const ARC_KIND: &str = "arc";
const ARC_COLUMN: &str = "ARC";

fn render(kind: &str, mut records: Vec<(String, String, f64)>) -> String {
    records.sort_by(|a, b| (&a.0, &a.1).cmp(&(&b.0, &b.1)));
    let mut out = format!("{MAGIC} {kind}\n");
    for (f, a, w) in records {
        writeln!(out, "{f}\t{a}\t{w}").expect("writing to a String cannot fail");
    }
    out
}

fn records<'a>(text: &'a str, kind: &str) -> Result<Vec<(usize, &'a str, &'a str, f64)>> {
    let mut lines = text.lines().enumerate();
    let header = lines
        .next()
        .map(|(_, l)| l)
        .ok_or_else(|| Error::Model("empty model file".into()))?;
    let expected = format!("{MAGIC} {kind}");
    if header != expected {
        return Err(Error::Model(format!(
            "expected header {expected:?}, found {header:?}"
        )));
    }
    lines
        .filter(|(_, l)| !l.is_empty())
        .map(|(i, line)| {
            let cols: Vec<&str> = line.split('\t').collect();
            let bad = |what: &str| Error::Model(format!("line {}: {what}", i + 1));
            if cols.len() != 3 {
                return Err(bad("expected 3 tab-separated columns"));
            }
            let w: f64 = cols[2].parse().map_err(|_| bad("invalid weight"))?;
            if !w.is_finite() {
                return Err(bad("weight is not finite"));
            }
            Ok((i + 1, cols[0], cols[1], w))
        })
        .collect()
}

pub fn write_transition_model(model: &TransitionModel) -> String {
    let mut recs: Vec<(String, String, f64)> = model
        .actions()
        .iter()
        .enumerate()
        .map(|(i, a)| ("@action".to_string(), a.to_string(), i as f64))
        .collect();
    recs.extend(
        model
            .views
            .views
            .iter()
            .enumerate()
            .map(|(i, v)| ("@view".to_string(), v.name().to_string(), i as f64)),
    );
    recs.extend(
        model
            .weight_entries()
            .map(|(f, a, w)| (f.to_string(), a.to_string(), w)),
    );
    render(TRANSITION_KIND, recs)
}

pub fn read_transition_model(text: &str) -> Result<TransitionModel> {
    let recs = records(text, TRANSITION_KIND)?;
    let mut actions = BTreeMap::new();
    let mut views = BTreeMap::new();
    for &(line, f, a, w) in &recs {
        let slot = w as usize;
        let bad = |what: &str| Error::Model(format!("line {line}: {what}"));
        match f {
            "@action" => {
                let action = Action::parse(a).ok_or_else(|| bad("invalid action"))?;
                if actions.insert(slot, action).is_some() {
                    return Err(bad("duplicate action slot"));
                }
            }
            "@view" => {
                let view = View::from_name(a).ok_or_else(|| bad("invalid view"))?;
                views.insert(slot, view);
            }
            _ => {}
        }
    }
    if actions.is_empty() || views.is_empty() {
        return Err(Error::Model("model lacks @action or @view records".into()));
    }
    if actions.keys().copied().ne(0..actions.len()) {
        return Err(Error::Model("action slots are not contiguous".into()));
    }
    let mut model = TransitionModel::new(
        ViewConfig {
            views: views.into_values().collect(),
        },
        actions.into_values().collect(),
    );
    for (line, f, a, w) in recs {
        if f == "@action" || f == "@view" {
            continue;
        }
        let action = Action::parse(a)
            .filter(|act| model.action_id(act).is_some())
            .ok_or_else(|| Error::Model(format!("line {line}: unknown action {a:?}")))?;
        model.set_weight(f, &action, w);
    }
    Ok(model)
}

pub fn write_arc_model(model: &ArcScorerModel) -> String {
    render(
        ARC_KIND,
        model
            .weight_entries()
            .map(|(f, w)| (f.to_string(), ARC_COLUMN.to_string(), w))
            .collect(),
    )
}

pub fn read_arc_model(text: &str) -> Result<ArcScorerModel> {
    let mut model = ArcScorerModel::new();
    for (line, f, a, w) in records(text, ARC_KIND)? {
        if a != ARC_COLUMN {
            return Err(Error::Model(format!("line {line}: expected ARC column")));
        }
        model.set_weight(f, w);
    }
    Ok(model)
}
