//! The augmented transition-system model, its JSON form, goals and structural validators.

mod validate;

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::ccs_lang::{self, ActionLabel, ComponentPath, Expr, InstrName};

pub use validate::{validate_side_conditions, Condition, ConditionResult, SideConditionReport, Status};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LtsError {
    #[error("invalid LTS document: {0}")]
    Schema(String),
    #[error("transition {transition} refers to unknown state {state}")]
    DanglingEndpoint { transition: String, state: String },
    #[error("task {task} refers to unknown transition {member}")]
    UnknownTaskMember { task: String, member: String },
    #[error("unknown state {0}")]
    UnknownState(String),
    #[error("unknown transition {0}")]
    UnknownTransition(String),
    #[error("unknown goal {0}")]
    UnknownGoal(String),
    #[error("transition {0} has no component annotation")]
    MissingComp(String),
    #[error("transition {0} has no instruction annotation")]
    MissingInstr(String),
    #[error("state {0} has no process expression (hand-written system?)")]
    MissingExpr(String),
    #[error("goal expression {0:?}: {1}")]
    GoalExpr(String, String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Origin {
    Ccs,
    Handwritten,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StateRec {
    pub id: String,
    pub expr: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AugTransition {
    pub id: String,
    pub source: usize,
    pub target: usize,
    pub label: ActionLabel,
    pub instr: Option<BTreeSet<InstrName>>,
    pub comp: Option<BTreeSet<ComponentPath>>,
    pub blocking: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Task {
    pub name: String,
    /// Transition indices.
    pub members: BTreeSet<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Notion {
    A,
    T,
    I,
    Z,
    C,
    G,
    Custom,
}

impl Notion {
    pub const GLOBAL: [Notion; 6] = [Notion::A, Notion::T, Notion::I, Notion::Z, Notion::C, Notion::G];

    pub fn parse(s: &str) -> Option<Notion> {
        Some(match s {
            "A" => Notion::A,
            "T" => Notion::T,
            "I" => Notion::I,
            "Z" => Notion::Z,
            "C" => Notion::C,
            "G" => Notion::G,
            "custom" => Notion::Custom,
            _ => return None,
        })
    }
}

impl fmt::Display for Notion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Notion::A => "A",
            Notion::T => "T",
            Notion::I => "I",
            Notion::Z => "Z",
            Notion::C => "C",
            Notion::G => "G",
            Notion::Custom => "custom",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TaskSet {
    pub notion: Notion,
    pub tasks: Vec<Task>,
    /// Extracted from a truncated exploration.
    pub bounded: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum GoalPredicate {
    StateIs { expr: String },
    ComponentAt { path: String, expr: String },
    ExplicitStates { states: Vec<String> },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GoalSpec {
    pub disjuncts: Vec<GoalPredicate>,
}

#[derive(Debug, Clone)]
pub struct AugmentedLts {
    pub states: Vec<StateRec>,
    pub transitions: Vec<AugTransition>,
    pub initial: Vec<usize>,
    pub goals: BTreeMap<String, GoalSpec>,
    pub tasks: BTreeMap<String, TaskSet>,
    pub origin: Origin,
    pub truncated: bool,
    exprs: Vec<Option<Arc<Expr>>>,
    cmp_map: BTreeMap<InstrName, ComponentPath>,
    out: Vec<Vec<usize>>,
    state_index: HashMap<String, usize>,
    trans_index: HashMap<String, usize>,
}

impl AugmentedLts {
    /// Builds the indices. `exprs` is either empty or one entry per state.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        states: Vec<StateRec>,
        transitions: Vec<AugTransition>,
        initial: Vec<usize>,
        origin: Origin,
        truncated: bool,
        exprs: Vec<Option<Arc<Expr>>>,
        cmp_map: BTreeMap<InstrName, ComponentPath>,
    ) -> AugmentedLts {
        let mut out = vec![Vec::new(); states.len()];
        for (i, t) in transitions.iter().enumerate() {
            out[t.source].push(i);
        }
        let exprs = if exprs.is_empty() { vec![None; states.len()] } else { exprs };
        let state_index = states.iter().enumerate().map(|(i, s)| (s.id.clone(), i)).collect();
        let trans_index = transitions.iter().enumerate().map(|(i, t)| (t.id.clone(), i)).collect();
        AugmentedLts {
            states,
            transitions,
            initial,
            goals: BTreeMap::new(),
            tasks: BTreeMap::new(),
            origin,
            truncated,
            exprs,
            cmp_map,
            out,
            state_index,
            trans_index,
        }
    }

    pub fn num_states(&self) -> usize {
        self.states.len()
    }

    pub fn num_transitions(&self) -> usize {
        self.transitions.len()
    }

    /// Outgoing transition indices of a state, in id order.
    pub fn outgoing(&self, s: usize) -> &[usize] {
        &self.out[s]
    }

    pub fn expr(&self, s: usize) -> Option<&Arc<Expr>> {
        self.exprs[s].as_ref()
    }

    pub fn cmp(&self, i: &InstrName) -> Option<&ComponentPath> {
        self.cmp_map.get(i)
    }

    pub fn instructions(&self) -> BTreeSet<InstrName> {
        self.transitions.iter().filter_map(|t| t.instr.as_ref()).flatten().cloned().collect()
    }

    pub fn state_by_id(&self, id: &str) -> Result<usize, LtsError> {
        self.state_index.get(id).copied().ok_or_else(|| LtsError::UnknownState(id.to_string()))
    }

    pub fn transition_by_id(&self, id: &str) -> Result<usize, LtsError> {
        self.trans_index.get(id).copied().ok_or_else(|| LtsError::UnknownTransition(id.to_string()))
    }

    pub fn comp(&self, t: usize) -> Result<&BTreeSet<ComponentPath>, LtsError> {
        self.transitions[t].comp.as_ref().ok_or_else(|| LtsError::MissingComp(self.transitions[t].id.clone()))
    }

    pub fn instr(&self, t: usize) -> Result<&BTreeSet<InstrName>, LtsError> {
        self.transitions[t].instr.as_ref().ok_or_else(|| LtsError::MissingInstr(self.transitions[t].id.clone()))
    }

    pub fn has_comp(&self) -> bool {
        self.transitions.iter().all(|t| t.comp.is_some())
    }

    pub fn has_instr(&self) -> bool {
        self.transitions.iter().all(|t| t.instr.is_some())
    }

    pub fn has_exprs(&self) -> bool {
        self.exprs.iter().all(|e| e.is_some())
    }

    /// States reachable from the initial states.
    pub fn reachable(&self) -> Vec<bool> {
        let mut seen = vec![false; self.num_states()];
        let mut stack: Vec<usize> = self.initial.clone();
        for &s in &stack {
            seen[s] = true;
        }
        while let Some(s) = stack.pop() {
            for &t in self.outgoing(s) {
                let v = self.transitions[t].target;
                if !seen[v] {
                    seen[v] = true;
                    stack.push(v);
                }
            }
        }
        seen
    }

    pub fn goal(&self, name: &str) -> Result<&GoalSpec, LtsError> {
        self.goals.get(name).ok_or_else(|| LtsError::UnknownGoal(name.to_string()))
    }
}

/// States satisfying some disjunct of the goal.
pub fn goal_states(lts: &AugmentedLts, g: &GoalSpec) -> Result<BTreeSet<usize>, LtsError> {
    let mut out = BTreeSet::new();
    for d in &g.disjuncts {
        match d {
            GoalPredicate::ExplicitStates { states } => {
                for s in states {
                    out.insert(lts.state_by_id(s)?);
                }
            }
            GoalPredicate::StateIs { expr } => {
                let pat = ccs_lang::parse_pattern(expr).map_err(|e| LtsError::GoalExpr(expr.clone(), e.to_string()))?;
                let want = ccs_lang::erased(&pat);
                for (i, st) in lts.states.iter().enumerate() {
                    let hit = match lts.expr(i) {
                        Some(e) => ccs_lang::erased(e) == want,
                        None => st.expr.as_deref().map(str::trim) == Some(expr.trim()),
                    };
                    if hit {
                        out.insert(i);
                    }
                }
            }
            GoalPredicate::ComponentAt { path, expr } => {
                let pat = ccs_lang::parse_pattern(expr).map_err(|e| LtsError::GoalExpr(expr.clone(), e.to_string()))?;
                let want = ccs_lang::erased(&pat);
                let c = ComponentPath(path.clone());
                for i in 0..lts.num_states() {
                    let e = lts.expr(i).ok_or_else(|| LtsError::MissingExpr(lts.states[i].id.clone()))?;
                    if let Some(p) = ccs_lang::project(e, &c) {
                        if ccs_lang::erased(&p) == want {
                            out.insert(i);
                        }
                    }
                }
            }
        }
    }
    Ok(out)
}

/// `t ⌣ u`: disjoint component sets.
pub fn concurrent(lts: &AugmentedLts, t: usize, u: usize) -> Result<bool, LtsError> {
    Ok(lts.comp(t)?.is_disjoint(lts.comp(u)?))
}

// ---------------------------------------------------------------------------
// JSON

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct StateDoc {
    id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    expr: Option<String>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TransDoc {
    id: String,
    source: String,
    target: String,
    label: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    instr: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    comp: Option<Vec<String>>,
    blocking: bool,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub(crate) struct TaskDoc {
    pub name: String,
    pub members: Vec<String>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TaskSetDoc {
    notion: String,
    tasks: Vec<TaskDoc>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct LtsDoc {
    states: Vec<StateDoc>,
    transitions: Vec<TransDoc>,
    initial: Vec<String>,
    #[serde(default)]
    goals: BTreeMap<String, GoalSpec>,
    #[serde(default)]
    tasks: BTreeMap<String, TaskSetDoc>,
    origin: Origin,
    #[serde(default)]
    truncated: bool,
}

pub(crate) fn tasks_from_docs(lts: &AugmentedLts, docs: &[TaskDoc]) -> Result<Vec<Task>, LtsError> {
    docs.iter()
        .map(|d| {
            let members = d
                .members
                .iter()
                .map(|m| {
                    lts.trans_index
                        .get(m)
                        .copied()
                        .ok_or_else(|| LtsError::UnknownTaskMember { task: d.name.clone(), member: m.clone() })
                })
                .collect::<Result<BTreeSet<usize>, _>>()?;
            Ok(Task { name: d.name.clone(), members })
        })
        .collect()
}

pub(crate) fn tasks_to_docs(lts: &AugmentedLts, tasks: &[Task]) -> Vec<TaskDoc> {
    tasks
        .iter()
        .map(|t| TaskDoc {
            name: t.name.clone(),
            members: t.members.iter().map(|&m| lts.transitions[m].id.clone()).collect(),
        })
        .collect()
}

pub fn load_lts(document: &str) -> Result<AugmentedLts, LtsError> {
    let doc: LtsDoc = serde_json::from_str(document).map_err(|e| LtsError::Schema(e.to_string()))?;
    let mut state_index: HashMap<String, usize> = HashMap::new();
    let mut states = Vec::new();
    let mut exprs = Vec::new();
    for s in doc.states {
        if state_index.insert(s.id.clone(), states.len()).is_some() {
            return Err(LtsError::Schema(format!("duplicate state id {}", s.id)));
        }
        let e = match (&doc.origin, &s.expr) {
            (Origin::Ccs, Some(text)) => Some(
                ccs_lang::parse_state(text)
                    .map_err(|e| LtsError::Schema(format!("state {}: {e}", s.id)))?,
            ),
            (Origin::Ccs, None) => return Err(LtsError::Schema(format!("ccs state {} lacks an expression", s.id))),
            _ => None,
        };
        exprs.push(e);
        states.push(StateRec { id: s.id, expr: s.expr });
    }
    let lookup = |tid: &str, sid: &str| {
        state_index
            .get(sid)
            .copied()
            .ok_or_else(|| LtsError::DanglingEndpoint { transition: tid.to_string(), state: sid.to_string() })
    };
    let mut transitions = Vec::new();
    let mut seen_t = BTreeSet::new();
    for t in doc.transitions {
        if !seen_t.insert(t.id.clone()) {
            return Err(LtsError::Schema(format!("duplicate transition id {}", t.id)));
        }
        let label = ActionLabel::parse(&t.label).map_err(LtsError::Schema)?;
        let instr = t.instr.map(|v| v.into_iter().map(InstrName).collect::<BTreeSet<_>>());
        let comp = t.comp.map(|v| v.into_iter().map(ComponentPath).collect::<BTreeSet<_>>());
        if doc.origin == Origin::Ccs && (instr.as_ref().is_none_or(|i| i.is_empty()) || comp.as_ref().is_none_or(|c| c.is_empty())) {
            return Err(LtsError::Schema(format!("ccs transition {} needs nonempty instr and comp", t.id)));
        }
        transitions.push(AugTransition {
            source: lookup(&t.id, &t.source)?,
            target: lookup(&t.id, &t.target)?,
            id: t.id,
            label,
            instr,
            comp,
            blocking: t.blocking,
        });
    }
    if doc.initial.is_empty() {
        return Err(LtsError::Schema("no initial state".into()));
    }
    let initial = doc
        .initial
        .iter()
        .map(|s| state_index.get(s).copied().ok_or_else(|| LtsError::UnknownState(s.clone())))
        .collect::<Result<Vec<_>, _>>()?;
    let mut cmp_map = BTreeMap::new();
    if doc.origin == Origin::Ccs {
        for t in &transitions {
            for i in t.instr.iter().flatten() {
                if cmp_map.contains_key(i) {
                    continue;
                }
                if let Some(c) = exprs.iter().flatten().find_map(|e| ccs_lang::cmp_in(e, i)) {
                    cmp_map.insert(i.clone(), c);
                }
            }
        }
    }
    let mut lts = AugmentedLts::new(states, transitions, initial, doc.origin, doc.truncated, exprs, cmp_map);
    lts.goals = doc.goals;
    for (name, ts) in doc.tasks {
        let notion = Notion::parse(&ts.notion).ok_or_else(|| LtsError::Schema(format!("unknown notion {}", ts.notion)))?;
        let tasks = tasks_from_docs(&lts, &ts.tasks)?;
        lts.tasks.insert(name, TaskSet { notion, tasks, bounded: lts.truncated });
    }
    Ok(lts)
}

pub fn save_lts(lts: &AugmentedLts) -> String {
    let doc = LtsDoc {
        states: lts.states.iter().map(|s| StateDoc { id: s.id.clone(), expr: s.expr.clone() }).collect(),
        transitions: lts
            .transitions
            .iter()
            .map(|t| TransDoc {
                id: t.id.clone(),
                source: lts.states[t.source].id.clone(),
                target: lts.states[t.target].id.clone(),
                label: t.label.to_string(),
                instr: t.instr.as_ref().map(|s| s.iter().map(|i| i.0.clone()).collect()),
                comp: t.comp.as_ref().map(|s| s.iter().map(|c| c.0.clone()).collect()),
                blocking: t.blocking,
            })
            .collect(),
        initial: lts.initial.iter().map(|&s| lts.states[s].id.clone()).collect(),
        goals: lts.goals.clone(),
        tasks: lts
            .tasks
            .iter()
            .map(|(k, ts)| (k.clone(), TaskSetDoc { notion: ts.notion.to_string(), tasks: tasks_to_docs(lts, &ts.tasks) }))
            .collect(),
        origin: lts.origin,
        truncated: lts.truncated,
    };
    let mut s = serde_json::to_string_pretty(&doc).expect("LTS documents always serialise");
    s.push('\n');
    s
}

/// Same states, transitions (with all annotations), initial states, goals, tasks and flags, by id.
pub fn isomorphic(a: &AugmentedLts, b: &AugmentedLts) -> bool {
    a.states == b.states
        && a.transitions == b.transitions
        && a.initial == b.initial
        && a.goals == b.goals
        && a.tasks.len() == b.tasks.len()
        && a.tasks.iter().zip(&b.tasks).all(|((ka, ta), (kb, tb))| ka == kb && ta.notion == tb.notion && ta.tasks == tb.tasks)
        && a.origin == b.origin
        && a.truncated == b.truncated
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{"states":[{"id":"s"}],"transitions":[],"initial":["s"],"origin":"handwritten"}"#;

    fn two_state() -> String {
        r#"{"states":[{"id":"p"},{"id":"q"}],
            "transitions":[{"id":"t","source":"p","target":"q","label":"a","comp":["L"],"blocking":true}],
            "initial":["p"],"goals":{"done":{"disjuncts":[{"kind":"explicit_states","states":["q"]}]}},
            "tasks":{"one":{"notion":"custom","tasks":[{"name":"x","members":["t"]}]}},
            "origin":"handwritten","truncated":false}"#
            .to_string()
    }

    #[test]
    fn minimal_loads() {
        let l = load_lts(MINIMAL).unwrap();
        assert_eq!(l.num_states(), 1);
        assert_eq!(l.num_transitions(), 0);
    }

    #[test]
    fn dangling_task_member() {
        let bad = two_state().replace(r#""members":["t"]"#, r#""members":["nope"]"#);
        assert!(matches!(load_lts(&bad), Err(LtsError::UnknownTaskMember { .. })));
    }

    #[test]
    fn dangling_endpoint() {
        let bad = two_state().replace(r#""target":"q""#, r#""target":"r""#);
        assert!(matches!(load_lts(&bad), Err(LtsError::DanglingEndpoint { .. })));
    }

    #[test]
    fn schema_violation() {
        assert!(matches!(load_lts("{\"states\":3}"), Err(LtsError::Schema(_))));
    }

    #[test]
    fn round_trip() {
        let l = load_lts(&two_state()).unwrap();
        let again = load_lts(&save_lts(&l)).unwrap();
        assert!(isomorphic(&l, &again));
        assert_eq!(save_lts(&l), save_lts(&again));
    }

    #[test]
    fn explicit_goal_and_concurrency() {
        let l = load_lts(&two_state()).unwrap();
        let g = goal_states(&l, l.goal("done").unwrap()).unwrap();
        assert_eq!(g.into_iter().collect::<Vec<_>>(), vec![1]);
        assert!(!concurrent(&l, 0, 0).unwrap());
    }

    #[test]
    fn component_goal_needs_expressions() {
        let l = load_lts(&two_state()).unwrap();
        let g = GoalSpec { disjuncts: vec![GoalPredicate::ComponentAt { path: "L".into(), expr: "0".into() }] };
        assert!(matches!(goal_states(&l, &g), Err(LtsError::MissingExpr(_))));
    }
}
