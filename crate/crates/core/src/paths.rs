//! Finite path prefixes and lassos, enabledness, and classification of paths under
//! progress, justness and fairness assumptions.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::ccs_lang::{project, InstrName};
use crate::lts_model::{AugmentedLts, LtsError, Notion, Task, TaskSet};
use crate::semantics::step;
use crate::tasks::extract_tasks;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PathError {
    #[error(transparent)]
    Lts(#[from] LtsError),
    #[error("{0} is a property of the whole system, not of a single path")]
    NotPathLevel(String),
    #[error("invalid path: {0}")]
    Invalid(String),
    #[error("{0} needs a system generated from a CCS specification")]
    NeedsCcs(String),
    #[error("component of instruction {instr} is absent in state {state}")]
    ComponentAbsent { instr: String, state: String },
    #[error("unknown instruction {0}")]
    UnknownInstruction(String),
    #[error("assumption {0} needs a custom task set")]
    MissingTasks(String),
    #[error("bad assumption {0:?}")]
    BadAssumption(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PathPrefix {
    pub start: usize,
    pub steps: Vec<usize>,
}

impl PathPrefix {
    pub fn empty(start: usize) -> PathPrefix {
        PathPrefix { start, steps: Vec::new() }
    }

    pub fn validate(&self, lts: &AugmentedLts) -> Result<(), PathError> {
        if self.start >= lts.num_states() {
            return Err(PathError::Invalid(format!("start state {} out of range", self.start)));
        }
        let mut cur = self.start;
        for &t in &self.steps {
            let tr = lts.transitions.get(t).ok_or_else(|| PathError::Invalid(format!("transition {t} out of range")))?;
            if tr.source != cur {
                return Err(PathError::Invalid(format!("{} does not leave {}", tr.id, lts.states[cur].id)));
            }
            cur = tr.target;
        }
        Ok(())
    }

    /// Visited states, `steps.len() + 1` of them.
    pub fn states(&self, lts: &AugmentedLts) -> Vec<usize> {
        let mut v = vec![self.start];
        v.extend(self.steps.iter().map(|&t| lts.transitions[t].target));
        v
    }

    pub fn last(&self, lts: &AugmentedLts) -> usize {
        self.steps.last().map(|&t| lts.transitions[t].target).unwrap_or(self.start)
    }
}

/// `stem · cycle^ω`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Lasso {
    pub stem: PathPrefix,
    pub cycle: Vec<usize>,
}

impl Lasso {
    pub fn validate(&self, lts: &AugmentedLts) -> Result<(), PathError> {
        self.stem.validate(lts)?;
        if self.cycle.is_empty() {
            return Err(PathError::Invalid("empty cycle".into()));
        }
        let anchor = self.stem.last(lts);
        let whole = PathPrefix { start: anchor, steps: self.cycle.clone() };
        whole.validate(lts)?;
        if whole.last(lts) != anchor {
            return Err(PathError::Invalid("cycle does not close".into()));
        }
        Ok(())
    }

    /// States of the cycle, starting at its anchor.
    pub fn cycle_states(&self, lts: &AugmentedLts) -> Vec<usize> {
        self.cycle.iter().map(|&t| lts.transitions[t].source).collect()
    }

    /// Same infinite path with the anchor moved one step into the cycle.
    pub fn rotated(&self) -> Lasso {
        let mut stem = self.stem.clone();
        stem.steps.push(self.cycle[0]);
        let mut cycle = self.cycle[1..].to_vec();
        cycle.push(self.cycle[0]);
        Lasso { stem, cycle }
    }

    /// Same infinite path with one copy of the cycle moved into the stem.
    pub fn pumped(&self) -> Lasso {
        let mut stem = self.stem.clone();
        stem.steps.extend(&self.cycle);
        Lasso { stem, cycle: self.cycle.clone() }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LassoDoc {
    pub start: String,
    pub stem: Vec<String>,
    pub cycle: Vec<String>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PrefixDoc {
    pub start: String,
    pub steps: Vec<String>,
}

fn ids(lts: &AugmentedLts, v: &[usize]) -> Vec<String> {
    v.iter().map(|&t| lts.transitions[t].id.clone()).collect()
}

fn from_ids(lts: &AugmentedLts, v: &[String]) -> Result<Vec<usize>, PathError> {
    v.iter().map(|s| lts.transition_by_id(s).map_err(PathError::from)).collect()
}

impl LassoDoc {
    pub fn from_lasso(lts: &AugmentedLts, l: &Lasso) -> LassoDoc {
        LassoDoc { start: lts.states[l.stem.start].id.clone(), stem: ids(lts, &l.stem.steps), cycle: ids(lts, &l.cycle) }
    }

    pub fn to_lasso(&self, lts: &AugmentedLts) -> Result<Lasso, PathError> {
        let l = Lasso {
            stem: PathPrefix { start: lts.state_by_id(&self.start)?, steps: from_ids(lts, &self.stem)? },
            cycle: from_ids(lts, &self.cycle)?,
        };
        l.validate(lts)?;
        Ok(l)
    }
}

impl PrefixDoc {
    pub fn from_prefix(lts: &AugmentedLts, p: &PathPrefix) -> PrefixDoc {
        PrefixDoc { start: lts.states[p.start].id.clone(), steps: ids(lts, &p.steps) }
    }

    pub fn to_prefix(&self, lts: &AugmentedLts) -> Result<PathPrefix, PathError> {
        let p = PathPrefix { start: lts.state_by_id(&self.start)?, steps: from_ids(lts, &self.steps)? };
        p.validate(lts)?;
        Ok(p)
    }
}

// ---------------------------------------------------------------------------
// Assumptions

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum AssumptionKind {
    P,
    Just,
    J(Notion),
    W(Notion),
    S(Notion),
    Swi,
    Fu,
    St,
    Pr,
}

impl fmt::Display for AssumptionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AssumptionKind::P => write!(f, "P"),
            AssumptionKind::Just => write!(f, "just"),
            AssumptionKind::J(n) => write!(f, "J:{n}"),
            AssumptionKind::W(n) => write!(f, "W:{n}"),
            AssumptionKind::S(n) => write!(f, "S:{n}"),
            AssumptionKind::Swi => write!(f, "SWI"),
            AssumptionKind::Fu => write!(f, "Fu"),
            AssumptionKind::St => write!(f, "ST"),
            AssumptionKind::Pr => write!(f, "Pr"),
        }
    }
}

impl AssumptionKind {
    pub fn notion(&self) -> Option<Notion> {
        match self {
            AssumptionKind::J(n) | AssumptionKind::W(n) | AssumptionKind::S(n) => Some(*n),
            _ => None,
        }
    }

    pub fn is_path_level(&self) -> bool {
        !matches!(self, AssumptionKind::Fu | AssumptionKind::St | AssumptionKind::Pr)
    }
}

/// Parsed `--assume` text: `P | just | J:A..G | W:.. | S:.. | SWI | Fu | ST | Pr`, where the
/// notion may be `custom=<file>`, optionally followed by `,reactive`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AssumptionText {
    pub kind: AssumptionKind,
    pub custom_file: Option<String>,
    pub reactive: bool,
}

impl AssumptionText {
    pub fn parse(text: &str) -> Result<AssumptionText, PathError> {
        let bad = || PathError::BadAssumption(text.to_string());
        let (main, reactive) = match text.trim().strip_suffix(",reactive") {
            Some(m) => (m, true),
            None => (text.trim(), false),
        };
        let mut custom_file = None;
        let kind = match main {
            "P" => AssumptionKind::P,
            "just" | "Just" | "J" => AssumptionKind::Just,
            "SWI" => AssumptionKind::Swi,
            "Fu" => AssumptionKind::Fu,
            "ST" => AssumptionKind::St,
            "Pr" => AssumptionKind::Pr,
            _ => {
                let (k, n) = main.split_once(':').ok_or_else(bad)?;
                let notion = if let Some(f) = n.strip_prefix("custom=") {
                    if f.is_empty() {
                        return Err(bad());
                    }
                    custom_file = Some(f.to_string());
                    Notion::Custom
                } else {
                    match Notion::parse(n) {
                        Some(Notion::Custom) | None => return Err(bad()),
                        Some(x) => x,
                    }
                };
                match k {
                    "J" => AssumptionKind::J(notion),
                    "W" => AssumptionKind::W(notion),
                    "S" => AssumptionKind::S(notion),
                    _ => return Err(bad()),
                }
            }
        };
        Ok(AssumptionText { kind, custom_file, reactive })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Assumption {
    pub kind: AssumptionKind,
    /// Required for custom notions; extracted from the system otherwise.
    pub taskset: Option<TaskSet>,
    pub reactive: bool,
}

impl Assumption {
    pub fn new(kind: AssumptionKind) -> Assumption {
        Assumption { kind, taskset: None, reactive: false }
    }

    pub fn reactive(kind: AssumptionKind) -> Assumption {
        Assumption { kind, taskset: None, reactive: true }
    }

    pub fn custom(kind: fn(Notion) -> AssumptionKind, ts: TaskSet) -> Assumption {
        Assumption { kind: kind(Notion::Custom), taskset: Some(ts), reactive: false }
    }

    pub fn name(&self) -> String {
        if self.reactive {
            format!("{},reactive", self.kind)
        } else {
            self.kind.to_string()
        }
    }

    pub fn tasks(&self, lts: &AugmentedLts) -> Result<TaskSet, PathError> {
        if let Some(ts) = &self.taskset {
            return Ok(ts.clone());
        }
        match self.kind.notion() {
            Some(Notion::Custom) => Err(PathError::MissingTasks(self.name())),
            Some(n) => Ok(extract_tasks(lts, n)?),
            None => Ok(TaskSet { notion: Notion::Custom, tasks: vec![], bounded: lts.truncated }),
        }
    }
}

// ---------------------------------------------------------------------------
// Enabledness and requests

/// Some member leaves `state` (and is non-blocking, if reactive).
pub fn enabled(lts: &AugmentedLts, task: &Task, state: usize, reactive: bool) -> bool {
    lts.outgoing(state)
        .iter()
        .any(|t| task.members.contains(t) && (!reactive || !lts.transitions[*t].blocking))
}

/// Some member leaving `source(u)` is concurrent with `u`.
pub fn enabled_during(lts: &AugmentedLts, task: &Task, u: usize, reactive: bool) -> Result<bool, PathError> {
    let cu = lts.comp(u)?;
    for &t in lts.outgoing(lts.transitions[u].source) {
        if task.members.contains(&t) && (!reactive || !lts.transitions[t].blocking) && lts.comp(t)?.is_disjoint(cu) {
            return Ok(true);
        }
    }
    Ok(false)
}

/// The component of `i`, taken in isolation, can perform a transition involving `i`.
pub fn requested(lts: &AugmentedLts, i: &InstrName, state: usize) -> Result<bool, PathError> {
    let e = lts.expr(state).ok_or_else(|| PathError::NeedsCcs("requested".into()))?;
    let c = lts.cmp(i).ok_or_else(|| PathError::UnknownInstruction(i.0.clone()))?;
    let part = project(e, c)
        .ok_or_else(|| PathError::ComponentAbsent { instr: i.0.clone(), state: lts.states[state].id.clone() })?;
    Ok(step(&part).iter().any(|m| m.instr.contains(i)))
}

// ---------------------------------------------------------------------------
// Classification

/// Outcome of testing a candidate cycle support.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Refine {
    Accept,
    Reject,
    /// No fair sub-support can contain these states.
    Remove(Vec<usize>),
}

/// Precomputed enabledness tables for one assumption on one system.
pub struct Checker<'a> {
    pub lts: &'a AugmentedLts,
    pub kind: AssumptionKind,
    pub reactive: bool,
    pub tasks: Vec<Task>,
    member: Vec<Vec<bool>>,
    en: Vec<Vec<bool>>,
    instrs: Vec<InstrName>,
    instr_member: Vec<Vec<bool>>,
    instr_en: Vec<Vec<bool>>,
    req: Vec<Vec<bool>>,
}

impl<'a> Checker<'a> {
    pub fn new(lts: &'a AugmentedLts, a: &Assumption) -> Result<Checker<'a>, PathError> {
        let kind = a.kind;
        let reactive = a.reactive;
        let tasks = match kind {
            AssumptionKind::J(_) | AssumptionKind::W(_) | AssumptionKind::S(_) => a.tasks(lts)?.tasks,
            _ => Vec::new(),
        };
        if matches!(kind, AssumptionKind::J(_) | AssumptionKind::Just) && !lts.has_comp() {
            let t = lts.transitions.iter().find(|t| t.comp.is_none()).expect("some transition lacks comp");
            return Err(LtsError::MissingComp(t.id.clone()).into());
        }
        let nt = lts.num_transitions();
        let member: Vec<Vec<bool>> = tasks
            .iter()
            .map(|t| {
                let mut v = vec![false; nt];
                for &m in &t.members {
                    v[m] = true;
                }
                v
            })
            .collect();
        let en = tasks
            .iter()
            .map(|t| (0..lts.num_states()).map(|s| enabled(lts, t, s, reactive)).collect())
            .collect();
        let (mut instrs, mut instr_member, mut instr_en, mut req) = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
        if kind == AssumptionKind::Swi {
            if !lts.has_exprs() || !lts.has_instr() {
                return Err(PathError::NeedsCcs("SWI".into()));
            }
            instrs = lts.instructions().into_iter().collect();
            for i in &instrs {
                let m: Vec<bool> = lts.transitions.iter().map(|t| t.instr.as_ref().is_some_and(|s| s.contains(i))).collect();
                let e: Vec<bool> = (0..lts.num_states())
                    .map(|s| lts.outgoing(s).iter().any(|&t| m[t] && (!reactive || !lts.transitions[t].blocking)))
                    .collect();
                let r: Vec<bool> = (0..lts.num_states())
                    .map(|s| match requested(lts, i, s) {
                        Ok(b) => Ok(b),
                        Err(PathError::ComponentAbsent { .. }) => Ok(false),
                        Err(e) => Err(e),
                    })
                    .collect::<Result<_, _>>()?;
                instr_member.push(m);
                instr_en.push(e);
                req.push(r);
            }
        }
        Ok(Checker { lts, kind, reactive, tasks, member, en, instrs, instr_member, instr_en, req })
    }

    fn live(&self, t: usize) -> bool {
        !self.reactive || !self.lts.transitions[t].blocking
    }

    pub fn task_enabled(&self, k: usize, s: usize) -> bool {
        self.en[k][s]
    }

    fn task_enabled_during(&self, k: usize, u: usize) -> bool {
        let cu = self.lts.transitions[u].comp.as_ref().expect("checked in new");
        self.lts.outgoing(self.lts.transitions[u].source).iter().any(|&t| {
            self.member[k][t] && self.live(t) && self.lts.transitions[t].comp.as_ref().expect("checked").is_disjoint(cu)
        })
    }

    fn interferes(&self, t: usize, u: usize) -> bool {
        let ct = self.lts.transitions[t].comp.as_ref().expect("checked in new");
        let cu = self.lts.transitions[u].comp.as_ref().expect("checked in new");
        !ct.is_disjoint(cu)
    }

    /// Tests the cycle-level condition on a strongly connected support.
    pub fn refine(&self, states: &[usize], edges: &[usize]) -> Refine {
        match self.kind {
            AssumptionKind::P => Refine::Accept,
            AssumptionKind::W(_) => {
                let bad = (0..self.tasks.len()).any(|k| {
                    !edges.iter().any(|&e| self.member[k][e]) && states.iter().all(|&s| self.en[k][s])
                });
                if bad {
                    Refine::Reject
                } else {
                    Refine::Accept
                }
            }
            AssumptionKind::J(_) => {
                let bad = (0..self.tasks.len()).any(|k| {
                    !edges.iter().any(|&e| self.member[k][e])
                        && states.iter().all(|&s| self.en[k][s])
                        && edges.iter().all(|&u| self.task_enabled_during(k, u))
                });
                if bad {
                    Refine::Reject
                } else {
                    Refine::Accept
                }
            }
            AssumptionKind::S(_) => {
                let mut remove = BTreeSet::new();
                for k in 0..self.tasks.len() {
                    if !edges.iter().any(|&e| self.member[k][e]) {
                        remove.extend(states.iter().copied().filter(|&s| self.en[k][s]));
                    }
                }
                if remove.is_empty() {
                    Refine::Accept
                } else {
                    Refine::Remove(remove.into_iter().collect())
                }
            }
            AssumptionKind::Swi => {
                let mut remove = BTreeSet::new();
                for k in 0..self.instrs.len() {
                    let occurs = edges.iter().any(|&e| self.instr_member[k][e]);
                    let always_requested = states.iter().all(|&s| self.req[k][s]);
                    if !occurs && always_requested {
                        remove.extend(states.iter().copied().filter(|&s| self.instr_en[k][s]));
                    }
                }
                if remove.is_empty() {
                    Refine::Accept
                } else {
                    Refine::Remove(remove.into_iter().collect())
                }
            }
            AssumptionKind::Just => {
                let remove: Vec<usize> = states
                    .iter()
                    .copied()
                    .filter(|&s| {
                        self.lts
                            .outgoing(s)
                            .iter()
                            .any(|&t| self.live(t) && !edges.iter().any(|&u| self.interferes(t, u)))
                    })
                    .collect();
                if remove.is_empty() {
                    Refine::Accept
                } else {
                    Refine::Remove(remove)
                }
            }
            AssumptionKind::Fu | AssumptionKind::St | AssumptionKind::Pr => Refine::Reject,
        }
    }

    /// Live transitions leaving `s` that no transition in `later` interferes with.
    pub fn unanswered(&self, s: usize, later: &[usize]) -> Vec<usize> {
        self.lts
            .outgoing(s)
            .iter()
            .copied()
            .filter(|&t| self.live(t) && !later.iter().any(|&u| self.interferes(t, u)))
            .collect()
    }

    pub fn classify_lasso(&self, l: &Lasso) -> Result<bool, PathError> {
        if !self.kind.is_path_level() {
            return Err(PathError::NotPathLevel(self.kind.to_string()));
        }
        l.validate(self.lts)?;
        let mut states = l.cycle_states(self.lts);
        states.sort_unstable();
        states.dedup();
        let mut edges = l.cycle.clone();
        edges.sort_unstable();
        edges.dedup();
        let cycle_ok = self.refine(&states, &edges) == Refine::Accept;
        if self.kind != AssumptionKind::Just || !cycle_ok {
            return Ok(cycle_ok);
        }
        let stem_states = l.stem.states(self.lts);
        for (i, &s) in stem_states.iter().enumerate().take(l.stem.steps.len()) {
            let mut later: Vec<usize> = l.stem.steps[i..].to_vec();
            later.extend(&edges);
            if !self.unanswered(s, &later).is_empty() {
                return Ok(false);
            }
        }
        Ok(true)
    }

    pub fn classify_finite(&self, p: &PathPrefix) -> Result<bool, PathError> {
        if !self.kind.is_path_level() {
            return Err(PathError::NotPathLevel(self.kind.to_string()));
        }
        p.validate(self.lts)?;
        let last = p.last(self.lts);
        let progress = !self.lts.outgoing(last).iter().any(|&t| self.live(t));
        Ok(match self.kind {
            AssumptionKind::P => progress,
            AssumptionKind::Just => {
                let states = p.states(self.lts);
                states.iter().enumerate().all(|(i, &s)| self.unanswered(s, &p.steps[i..]).is_empty())
            }
            AssumptionKind::J(_) | AssumptionKind::W(_) | AssumptionKind::S(_) => {
                progress && (0..self.tasks.len()).all(|k| !self.en[k][last])
            }
            AssumptionKind::Swi => progress && (0..self.instrs.len()).all(|k| !self.instr_en[k][last]),
            AssumptionKind::Fu | AssumptionKind::St | AssumptionKind::Pr => unreachable!(),
        })
    }
}

pub fn classify_lasso(lts: &AugmentedLts, l: &Lasso, a: &Assumption) -> Result<bool, PathError> {
    Checker::new(lts, a)?.classify_lasso(l)
}

pub fn classify_finite(lts: &AugmentedLts, p: &PathPrefix, a: &Assumption) -> Result<bool, PathError> {
    Checker::new(lts, a)?.classify_finite(p)
}

/// Finite evidence about one task along a prefix; says nothing about continuations.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrefixCertificate {
    pub prefix: PathPrefix,
    pub task: Task,
    pub enabled_everywhere: bool,
    pub occurs: bool,
    pub length: usize,
}

pub fn prefix_certificate(lts: &AugmentedLts, prefix: &PathPrefix, task: &Task) -> PrefixCertificate {
    PrefixCertificate {
        prefix: prefix.clone(),
        task: task.clone(),
        enabled_everywhere: prefix.states(lts).iter().all(|&s| enabled(lts, task, s, false)),
        occurs: prefix.steps.iter().any(|t| task.members.contains(t)),
        length: prefix.steps.len(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ccs_lang::parse_ccs;
    use crate::lts_model::load_lts;
    use crate::semantics::explore;

    fn sys(src: &str) -> AugmentedLts {
        explore(&parse_ccs(src).unwrap(), 512, 256).lts
    }

    /// Follows transitions by label from the initial state; the first matching id wins.
    fn walk(lts: &AugmentedLts, start: usize, labels: &[&str]) -> Vec<usize> {
        let mut cur = start;
        let mut out = Vec::new();
        for l in labels {
            let t = *lts
                .outgoing(cur)
                .iter()
                .find(|&&t| lts.transitions[t].label.to_string() == *l)
                .unwrap_or_else(|| panic!("no {l} from {}", lts.states[cur].id));
            out.push(t);
            cur = lts.transitions[t].target;
        }
        out
    }

    fn lasso(lts: &AugmentedLts, stem: &[&str], cycle: &[&str]) -> Lasso {
        let s = walk(lts, lts.initial[0], stem);
        let start = PathPrefix { start: lts.initial[0], steps: s };
        let c = walk(lts, start.last(lts), cycle);
        Lasso { stem: start, cycle: c }
    }

    #[test]
    fn handshake_loop_is_instruction_and_component_fair_only() {
        let lts = sys("X|Y where X = a.X, Y = 'a.Y");
        let l = lasso(&lts, &[], &["a", "'a"]);
        let verdict = |n| classify_lasso(&lts, &l, &Assumption::new(AssumptionKind::S(n))).unwrap();
        assert!(verdict(Notion::I));
        assert!(verdict(Notion::C));
        for n in [Notion::A, Notion::T, Notion::Z, Notion::G] {
            assert!(!verdict(n), "{n}");
        }
    }

    #[test]
    fn fair_share_of_three_actions() {
        let lts = sys("X|Y where X = a.X, Y = b.c.Y");
        let l = lasso(&lts, &[], &["a", "b", "c"]);
        for n in [Notion::A, Notion::I, Notion::Z, Notion::C, Notion::G] {
            assert!(classify_lasso(&lts, &l, &Assumption::new(AssumptionKind::S(n))).unwrap(), "{n}");
        }
        assert!(!classify_lasso(&lts, &l, &Assumption::new(AssumptionKind::S(Notion::T))).unwrap());
    }

    #[test]
    fn rotation_and_pumping_do_not_change_verdicts() {
        let lts = sys("X|Y where X = a.X, Y = b.c.Y");
        let l = lasso(&lts, &["a"], &["a", "b", "c"]);
        for n in Notion::GLOBAL {
            for k in [AssumptionKind::J(n), AssumptionKind::W(n), AssumptionKind::S(n)] {
                let a = Assumption::new(k);
                let v = classify_lasso(&lts, &l, &a).unwrap();
                assert_eq!(classify_lasso(&lts, &l.rotated(), &a).unwrap(), v);
                assert_eq!(classify_lasso(&lts, &l.pumped(), &a).unwrap(), v);
            }
        }
    }

    #[test]
    fn progress_on_finite_paths() {
        let doc = r#"{"states":[{"id":"1"},{"id":"2"},{"id":"3"}],
          "transitions":[{"id":"t","source":"1","target":"2","label":"t","comp":["L"],"blocking":true},
                         {"id":"u","source":"2","target":"3","label":"u","comp":["L"],"blocking":true}],
          "initial":["1"],"origin":"handwritten"}"#;
        let lts = load_lts(doc).unwrap();
        let p = Assumption::new(AssumptionKind::P);
        assert!(!classify_finite(&lts, &PathPrefix { start: 0, steps: vec![0] }, &p).unwrap());
        assert!(classify_finite(&lts, &PathPrefix { start: 0, steps: vec![0, 1] }, &p).unwrap());
        let dead = PathPrefix { start: 2, steps: vec![] };
        for k in [AssumptionKind::P, AssumptionKind::W(Notion::T), AssumptionKind::S(Notion::A), AssumptionKind::J(Notion::T)] {
            assert!(classify_finite(&lts, &dead, &Assumption::new(k)).unwrap());
        }
    }

    #[test]
    fn reactive_progress_ignores_blocking_inputs() {
        let lts = sys("a.tau.0");
        let here = PathPrefix::empty(0);
        assert!(classify_finite(&lts, &here, &Assumption::reactive(AssumptionKind::P)).unwrap());
        assert!(!classify_finite(&lts, &here, &Assumption::new(AssumptionKind::P)).unwrap());
        let task = Task { name: "a".into(), members: BTreeSet::from([0]) };
        assert!(!enabled(&lts, &task, 0, true));
        assert!(enabled(&lts, &task, 0, false));
    }

    #[test]
    fn enabled_during_other_component() {
        let lts = sys("X|c.0 where X = b.X");
        let b_loop = walk(&lts, 0, &["b"])[0];
        let c = walk(&lts, 0, &["c"])[0];
        let task_c = Task { name: "c".into(), members: BTreeSet::from([c]) };
        assert!(enabled_during(&lts, &task_c, b_loop, false).unwrap());
        let own = Task { name: "b".into(), members: BTreeSet::from([b_loop]) };
        assert!(!enabled_during(&lts, &own, b_loop, false).unwrap());
    }

    #[test]
    fn justness_of_independent_loop() {
        let lts = sys("X|c.0 where X = b.X");
        let l = lasso(&lts, &[], &["b"]);
        assert!(!classify_lasso(&lts, &l, &Assumption::new(AssumptionKind::Just)).unwrap());
        assert!(classify_lasso(&lts, &l, &Assumption::new(AssumptionKind::P)).unwrap());
        let after = lasso(&lts, &["c"], &["b"]);
        assert!(classify_lasso(&lts, &after, &Assumption::new(AssumptionKind::Just)).unwrap());
    }

    #[test]
    fn whole_system_assumptions_are_not_path_level() {
        let lts = sys("X where X = a.X");
        let l = lasso(&lts, &[], &["a"]);
        assert!(matches!(
            classify_lasso(&lts, &l, &Assumption::new(AssumptionKind::St)),
            Err(PathError::NotPathLevel(_))
        ));
    }

    #[test]
    fn guarded_instruction_is_not_requested() {
        let lts = sys("a.b.0");
        let b = InstrName("b@1".into());
        assert!(!requested(&lts, &b, 0).unwrap());
        assert!(requested(&lts, &b, 1).unwrap());
    }

    #[test]
    fn certificate_for_the_progress_task() {
        let lts = sys("X where X = a.X");
        let all = Task { name: "Tr".into(), members: BTreeSet::from([0]) };
        let p = PathPrefix { start: 0, steps: vec![0, 0] };
        let c = prefix_certificate(&lts, &p, &all);
        assert!(c.occurs && c.enabled_everywhere && c.length == 2);
    }

    #[test]
    fn assumption_text() {
        let a = AssumptionText::parse("W:custom=tasks.json,reactive").unwrap();
        assert_eq!(a.kind, AssumptionKind::W(Notion::Custom));
        assert_eq!(a.custom_file.as_deref(), Some("tasks.json"));
        assert!(a.reactive);
        for s in ["P", "just", "J:A", "S:G", "SWI", "Fu", "ST", "Pr"] {
            assert_eq!(AssumptionText::parse(s).unwrap().kind.to_string(), s);
        }
        assert!(AssumptionText::parse("Q").is_err());
        assert!(AssumptionText::parse("W:custom").is_err());
    }
}
