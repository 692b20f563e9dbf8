//! Structural side conditions on augmented transition systems.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::Serialize;

use super::AugmentedLts;
use crate::ccs_lang::{ComponentPath, InstrName};
use crate::paths::{requested, PathError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Condition {
    /// At most one transition per synchronisation per state.
    #[serde(rename = "1")]
    One,
    /// Finitely many instructions.
    #[serde(rename = "2")]
    Two,
    /// `comp(t) = { cmp(I) | I ∈ instr(t) }` for a single `cmp`.
    #[serde(rename = "3")]
    Three,
    /// Enabled implies requested.
    #[serde(rename = "4")]
    Four,
    /// Requests persist across transitions not touching the instruction's component.
    #[serde(rename = "5")]
    Five,
    /// Concurrent transitions keep a variant with the same instructions.
    #[serde(rename = "6")]
    Six,
    /// Concurrent transitions keep a variant with the same components.
    #[serde(rename = "#")]
    Hash,
    /// Every transition interferes with itself.
    #[serde(rename = "reflexivity")]
    Reflexive,
}

impl Condition {
    pub const ALL: [Condition; 8] = [
        Condition::One,
        Condition::Two,
        Condition::Three,
        Condition::Four,
        Condition::Five,
        Condition::Six,
        Condition::Hash,
        Condition::Reflexive,
    ];
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Condition::One => "(1)",
            Condition::Two => "(2)",
            Condition::Three => "(3)",
            Condition::Four => "(4)",
            Condition::Five => "(5)",
            Condition::Six => "(6)",
            Condition::Hash => "(#)",
            Condition::Reflexive => "reflexivity",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Status {
    Pass,
    Fail { counterexample: Vec<String> },
    Skipped { reason: String },
    /// No violation on the explored part of a truncated system.
    Bounded,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ConditionResult {
    pub condition: Condition,
    #[serde(flatten)]
    pub status: Status,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SideConditionReport {
    pub results: Vec<ConditionResult>,
}

impl SideConditionReport {
    pub fn status(&self, c: Condition) -> &Status {
        &self.results.iter().find(|r| r.condition == c).expect("every condition is reported").status
    }

    pub fn holds(&self, c: Condition) -> bool {
        matches!(self.status(c), Status::Pass | Status::Bounded)
    }
}

type Check = Result<Option<Vec<String>>, String>;

pub fn validate_side_conditions(lts: &AugmentedLts) -> SideConditionReport {
    let results = Condition::ALL
        .iter()
        .map(|&c| {
            let outcome = match c {
                Condition::One => unique_sync(lts),
                Condition::Two => Ok(None),
                Condition::Three => cmp_function(lts),
                Condition::Four => enabled_requested(lts),
                Condition::Five => requests_persist(lts),
                Condition::Six => persistence(lts, true),
                Condition::Hash => persistence(lts, false),
                Condition::Reflexive => reflexive(lts),
            };
            let status = match outcome {
                Ok(None) if lts.truncated => Status::Bounded,
                Ok(None) => Status::Pass,
                Ok(Some(cx)) => Status::Fail { counterexample: cx },
                Err(reason) => Status::Skipped { reason },
            };
            ConditionResult { condition: c, status }
        })
        .collect();
    SideConditionReport { results }
}

fn sid(lts: &AugmentedLts, s: usize) -> String {
    lts.states[s].id.clone()
}

fn tid(lts: &AugmentedLts, t: usize) -> String {
    lts.transitions[t].id.clone()
}

fn need_instr(lts: &AugmentedLts) -> Result<(), String> {
    if lts.has_instr() {
        Ok(())
    } else {
        Err("transitions lack instruction annotations".into())
    }
}

fn need_comp(lts: &AugmentedLts) -> Result<(), String> {
    if lts.has_comp() {
        Ok(())
    } else {
        Err("transitions lack component annotations".into())
    }
}

/// A state with no outgoing transitions in a truncated system may be unexpanded.
fn frontier(lts: &AugmentedLts, s: usize) -> bool {
    lts.truncated && lts.outgoing(s).is_empty()
}

fn unique_sync(lts: &AugmentedLts) -> Check {
    need_instr(lts)?;
    for s in 0..lts.num_states() {
        let mut seen: BTreeMap<&BTreeSet<InstrName>, usize> = BTreeMap::new();
        for &t in lts.outgoing(s) {
            let z = lts.transitions[t].instr.as_ref().expect("checked");
            if let Some(&u) = seen.get(z) {
                return Ok(Some(vec![sid(lts, s), tid(lts, u), tid(lts, t)]));
            }
            seen.insert(z, t);
        }
    }
    Ok(None)
}

fn cmp_function(lts: &AugmentedLts) -> Check {
    need_instr(lts)?;
    need_comp(lts)?;
    // Any valid `cmp` must agree with singleton-instruction transitions; fall back to the
    // expression-derived map, then to the first consistent guess.
    let mut cmp: BTreeMap<InstrName, ComponentPath> = BTreeMap::new();
    for i in lts.instructions() {
        if let Some(c) = lts.cmp(&i) {
            cmp.insert(i, c.clone());
        }
    }
    for t in &lts.transitions {
        let instr = t.instr.as_ref().expect("checked");
        let comp = t.comp.as_ref().expect("checked");
        if instr.len() == 1 && comp.len() == 1 {
            let i = instr.iter().next().expect("one");
            cmp.entry(i.clone()).or_insert_with(|| comp.iter().next().expect("one").clone());
        }
    }
    for (k, t) in lts.transitions.iter().enumerate() {
        let instr = t.instr.as_ref().expect("checked");
        let comp = t.comp.as_ref().expect("checked");
        let image: Option<BTreeSet<ComponentPath>> = instr.iter().map(|i| cmp.get(i).cloned()).collect();
        if image.as_ref() != Some(comp) {
            return Ok(Some(vec![sid(lts, t.source), tid(lts, k), tid(lts, k)]));
        }
    }
    Ok(None)
}

fn request_table(lts: &AugmentedLts) -> Result<Vec<(InstrName, Vec<bool>)>, String> {
    if !lts.has_exprs() {
        return Err("states lack process expressions".into());
    }
    need_instr(lts)?;
    lts.instructions()
        .into_iter()
        .map(|i| {
            let row = (0..lts.num_states())
                .map(|s| match requested(lts, &i, s) {
                    Ok(b) => Ok(b),
                    Err(PathError::ComponentAbsent { .. }) => Ok(false),
                    Err(e) => Err(e.to_string()),
                })
                .collect::<Result<Vec<bool>, String>>()?;
            Ok((i, row))
        })
        .collect()
}

fn enabled_requested(lts: &AugmentedLts) -> Check {
    let table = request_table(lts)?;
    for (i, row) in &table {
        for (s, &req) in row.iter().enumerate() {
            if req {
                continue;
            }
            if let Some(&t) = lts.outgoing(s).iter().find(|&&t| lts.transitions[t].instr.as_ref().expect("checked").contains(i)) {
                return Ok(Some(vec![sid(lts, s), i.0.clone(), tid(lts, t)]));
            }
        }
    }
    Ok(None)
}

fn requests_persist(lts: &AugmentedLts) -> Check {
    need_comp(lts)?;
    let table = request_table(lts)?;
    for (i, row) in &table {
        let Some(c) = lts.cmp(i) else { continue };
        for (k, t) in lts.transitions.iter().enumerate() {
            if row[t.source] && !t.comp.as_ref().expect("checked").contains(c) && !row[t.target] {
                return Ok(Some(vec![sid(lts, t.source), i.0.clone(), tid(lts, k)]));
            }
        }
    }
    Ok(None)
}

/// `(6)` when `by_instr`, else `(#)`.
fn persistence(lts: &AugmentedLts, by_instr: bool) -> Check {
    need_comp(lts)?;
    if by_instr {
        need_instr(lts)?;
    }
    let key = |t: usize| {
        let tr = &lts.transitions[t];
        if by_instr {
            format!("{:?}", tr.instr)
        } else {
            format!("{:?}", tr.comp)
        }
    };
    for s in 0..lts.num_states() {
        for &t in lts.outgoing(s) {
            for &u in lts.outgoing(s) {
                let (ct, cu) = (lts.transitions[t].comp.as_ref().expect("c"), lts.transitions[u].comp.as_ref().expect("c"));
                if !ct.is_disjoint(cu) {
                    continue;
                }
                let q = lts.transitions[u].target;
                if frontier(lts, q) {
                    continue;
                }
                let want = key(t);
                if !lts.outgoing(q).iter().any(|&v| key(v) == want) {
                    return Ok(Some(vec![sid(lts, s), tid(lts, t), tid(lts, u)]));
                }
            }
        }
    }
    Ok(None)
}

fn reflexive(lts: &AugmentedLts) -> Check {
    need_comp(lts)?;
    for (k, t) in lts.transitions.iter().enumerate() {
        if t.comp.as_ref().expect("checked").is_empty() {
            return Ok(Some(vec![sid(lts, t.source), tid(lts, k), tid(lts, k)]));
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ccs_lang::parse_ccs;
    use crate::lts_model::load_lts;
    use crate::semantics::explore;

    #[test]
    fn generated_systems_satisfy_everything() {
        for src in [
            "X|Y where X = a.X, Y = 'a.Y",
            "(X|Y|Z)\\a where X = a.X + b.X, Y = 'a.Y, Z = c.Z",
            "X|c.0 where X = b.X",
            "(a.b.0 | 'a.0)\\a",
        ] {
            let lts = explore(&parse_ccs(src).unwrap(), 512, 256).lts;
            let r = validate_side_conditions(&lts);
            for c in Condition::ALL {
                assert_eq!(r.status(c), &Status::Pass, "{src} {c}");
            }
        }
    }

    #[test]
    fn mismatched_components_break_cmp() {
        let doc = r#"{"states":[{"id":"p"},{"id":"q"}],
          "transitions":[{"id":"t","source":"p","target":"q","label":"a","instr":["a1"],"comp":["L"],"blocking":true},
                         {"id":"u","source":"q","target":"p","label":"a","instr":["a1"],"comp":["R"],"blocking":true}],
          "initial":["p"],"origin":"handwritten"}"#;
        let r = validate_side_conditions(&load_lts(doc).unwrap());
        assert!(matches!(r.status(Condition::Three), Status::Fail { .. }));
        assert!(matches!(r.status(Condition::Four), Status::Skipped { .. }));
    }

    #[test]
    fn lost_concurrent_transition_breaks_persistence() {
        let doc = r#"{"states":[{"id":"p"},{"id":"q"},{"id":"r"}],
          "transitions":[{"id":"t","source":"p","target":"r","label":"a","comp":["L"],"blocking":true},
                         {"id":"u","source":"p","target":"q","label":"b","comp":["R"],"blocking":true}],
          "initial":["p"],"origin":"handwritten"}"#;
        let r = validate_side_conditions(&load_lts(doc).unwrap());
        assert_eq!(r.status(Condition::Hash), &Status::Fail { counterexample: vec!["p".into(), "t".into(), "u".into()] });
        assert_eq!(r.status(Condition::Reflexive), &Status::Pass);
    }

    #[test]
    fn truncated_systems_are_bounded() {
        let lts = explore(&parse_ccs("X where X = a.(X|b.0)").unwrap(), 10, 256).lts;
        let r = validate_side_conditions(&lts);
        assert!(lts.truncated);
        assert_eq!(r.status(Condition::Reflexive), &Status::Bounded);
    }
}
