//! Path documents with human-writable steps. A step is resolved against the outgoing transitions
//! of the current state: `#t3` names a transition id, `@a@1` an instruction, anything else is a
//! transition id leaving the state or else an action label (`a`, `'a`, `tau`, `b#3`). Instruction
//! and label selectors must pick exactly one transition.

use serde::Deserialize;

use crate::ccs_lang::{ActionLabel, InstrName};
use crate::lts_model::AugmentedLts;
use crate::paths::{Lasso, PathError, PathPrefix};

/// `{"start"?, "stem", "cycle"}` or `{"start"?, "steps"}`; `start` defaults to the first initial state.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PathSpec {
    pub start: Option<String>,
    pub stem: Option<Vec<String>>,
    pub cycle: Option<Vec<String>>,
    pub steps: Option<Vec<String>>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Resolved {
    Lasso(Lasso),
    Finite(PathPrefix),
}

impl PathSpec {
    pub fn resolve(&self, lts: &AugmentedLts) -> Result<Resolved, PathError> {
        let start = match &self.start {
            Some(s) => lts.state_by_id(s)?,
            None => *lts.initial.first().ok_or_else(|| PathError::Invalid("system has no initial state".into()))?,
        };
        match (&self.stem, &self.cycle, &self.steps) {
            (stem, Some(cycle), None) => {
                let (stem, at) = resolve_steps(lts, start, stem.as_deref().unwrap_or(&[]))?;
                let (cycle, _) = resolve_steps(lts, at, cycle)?;
                let l = Lasso { stem: PathPrefix { start, steps: stem }, cycle };
                l.validate(lts)?;
                Ok(Resolved::Lasso(l))
            }
            (None, None, Some(steps)) => {
                let (steps, _) = resolve_steps(lts, start, steps)?;
                Ok(Resolved::Finite(PathPrefix { start, steps }))
            }
            _ => Err(PathError::Invalid("a path has either `stem`/`cycle` or `steps`".into())),
        }
    }
}

/// Resolves selectors one by one from `start`; returns the transitions and the final state.
pub fn resolve_steps(lts: &AugmentedLts, start: usize, sel: &[String]) -> Result<(Vec<usize>, usize), PathError> {
    let mut cur = start;
    let mut out = Vec::with_capacity(sel.len());
    for s in sel {
        let t = resolve_one(lts, cur, s)?;
        out.push(t);
        cur = lts.transitions[t].target;
    }
    Ok((out, cur))
}

fn resolve_one(lts: &AugmentedLts, cur: usize, sel: &str) -> Result<usize, PathError> {
    let here = &lts.states[cur].id;
    let leaving = |t: usize| -> Result<usize, PathError> {
        if lts.transitions[t].source == cur {
            Ok(t)
        } else {
            Err(PathError::Invalid(format!("{sel} does not leave {here}")))
        }
    };
    if let Some(id) = sel.strip_prefix('#') {
        return leaving(lts.transition_by_id(id)?);
    }
    let out = lts.outgoing(cur);
    let picked: Vec<usize> = if let Some(i) = sel.strip_prefix('@') {
        let i = InstrName(i.to_string());
        out.iter().copied().filter(|&t| lts.transitions[t].instr.as_ref().is_some_and(|s| s.contains(&i))).collect()
    } else if let Ok(t) = lts.transition_by_id(sel) {
        return leaving(t);
    } else {
        let l = ActionLabel::parse(sel).map_err(|e| PathError::Invalid(format!("step {sel:?}: {e}")))?;
        out.iter().copied().filter(|&t| lts.transitions[t].label == l).collect()
    };
    match picked.as_slice() {
        [t] => Ok(*t),
        [] => Err(PathError::Invalid(format!("no transition {sel} leaves {here}"))),
        _ => Err(PathError::Invalid(format!("step {sel} is ambiguous at {here}"))),
    }
}
