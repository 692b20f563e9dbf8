use std::collections::{BTreeSet, HashMap, VecDeque};

use petgraph::algo::tarjan_scc;
use petgraph::graph::{DiGraph, NodeIndex};
use serde::Serialize;

use super::VerifyError;
use crate::ccs_lang::ComponentPath;
use crate::lts_model::{goal_states, AugmentedLts, Notion};
use crate::paths::{prefix_certificate, Assumption, AssumptionKind, Checker, Lasso, LassoDoc, PathPrefix, PrefixDoc, Refine};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Holds {
    #[serde(rename = "yes")]
    Yes,
    #[serde(rename = "no")]
    No,
    #[serde(rename = "bounded-unknown")]
    BoundedUnknown,
}

impl Holds {
    pub fn as_str(&self) -> &'static str {
        match self {
            Holds::Yes => "yes",
            Holds::No => "no",
            Holds::BoundedUnknown => "bounded-unknown",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Witness {
    Lasso(Lasso),
    Prefix(PathPrefix),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Verdict {
    pub holds: Holds,
    pub assumption: String,
    pub goal: String,
    pub witness: Option<Witness>,
    pub notes: Vec<String>,
}

#[derive(Serialize)]
#[serde(untagged)]
enum WitnessDoc {
    Lasso(LassoDoc),
    Prefix(PrefixDoc),
}

#[derive(Serialize)]
struct VerdictDoc<'a> {
    assumption: &'a str,
    goal: &'a str,
    holds: Holds,
    #[serde(skip_serializing_if = "Option::is_none")]
    witness: Option<WitnessDoc>,
    notes: &'a [String],
}

impl Verdict {
    pub fn to_json(&self, lts: &AugmentedLts) -> serde_json::Value {
        let witness = self.witness.as_ref().map(|w| match w {
            Witness::Lasso(l) => WitnessDoc::Lasso(LassoDoc::from_lasso(lts, l)),
            Witness::Prefix(p) => WitnessDoc::Prefix(PrefixDoc::from_prefix(lts, p)),
        });
        let doc = VerdictDoc { assumption: &self.assumption, goal: &self.goal, holds: self.holds, witness, notes: &self.notes };
        serde_json::to_value(doc).expect("verdicts always serialise")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Bounds {
    /// Length of the loop-free goal-avoiding path sought on truncated systems.
    pub loopfree: usize,
}

impl Default for Bounds {
    fn default() -> Self {
        Bounds { loopfree: 50 }
    }
}

/// States from which some goal state is reachable (via non-blocking transitions, if reactive).
fn reaches_goal(lts: &AugmentedLts, goal: &BTreeSet<usize>, reactive: bool) -> Vec<bool> {
    let mut pred: Vec<Vec<usize>> = vec![Vec::new(); lts.num_states()];
    for t in &lts.transitions {
        if !reactive || !t.blocking {
            pred[t.target].push(t.source);
        }
    }
    let mut ok = vec![false; lts.num_states()];
    let mut stack: Vec<usize> = goal.iter().copied().collect();
    for &g in &stack {
        ok[g] = true;
    }
    while let Some(s) = stack.pop() {
        for &p in &pred[s] {
            if !ok[p] {
                ok[p] = true;
                stack.push(p);
            }
        }
    }
    ok
}

/// The goal is reachable from every reachable state.
pub fn agef(lts: &AugmentedLts, goal: &BTreeSet<usize>, reactive: bool) -> bool {
    let ok = reaches_goal(lts, goal, reactive);
    lts.reachable().iter().zip(&ok).all(|(&r, &g)| !r || g)
}

/// Goal-avoiding reachable region with BFS parents (transition into each state).
struct Region {
    inside: Vec<bool>,
    parent: Vec<Option<usize>>,
    depth: Vec<usize>,
}

impl Region {
    fn new(lts: &AugmentedLts, goal: &BTreeSet<usize>) -> Region {
        let n = lts.num_states();
        let mut inside = vec![false; n];
        let mut parent = vec![None; n];
        let mut depth = vec![usize::MAX; n];
        let mut queue = VecDeque::new();
        for &s in &lts.initial {
            if !goal.contains(&s) && !inside[s] {
                inside[s] = true;
                depth[s] = 0;
                queue.push_back(s);
            }
        }
        while let Some(s) = queue.pop_front() {
            for &t in lts.outgoing(s) {
                let v = lts.transitions[t].target;
                if !goal.contains(&v) && !inside[v] {
                    inside[v] = true;
                    parent[v] = Some(t);
                    depth[v] = depth[s] + 1;
                    queue.push_back(v);
                }
            }
        }
        Region { inside, parent, depth }
    }

    fn path_to(&self, lts: &AugmentedLts, mut s: usize) -> PathPrefix {
        let mut steps = Vec::new();
        while let Some(t) = self.parent[s] {
            steps.push(t);
            s = lts.transitions[t].source;
        }
        steps.reverse();
        PathPrefix { start: s, steps }
    }
}

/// Strongly connected components of the subgraph on `allowed`, with at least one internal edge.
fn nontrivial_sccs(lts: &AugmentedLts, allowed: &[bool]) -> Vec<(Vec<usize>, Vec<usize>)> {
    let mut g: DiGraph<usize, usize> = DiGraph::new();
    let mut node: HashMap<usize, NodeIndex> = HashMap::new();
    for (s, _) in allowed.iter().enumerate().filter(|(_, &a)| a) {
        node.insert(s, g.add_node(s));
    }
    for (k, t) in lts.transitions.iter().enumerate() {
        if allowed[t.source] && allowed[t.target] {
            g.add_edge(node[&t.source], node[&t.target], k);
        }
    }
    let mut comp_of = vec![usize::MAX; lts.num_states()];
    let sccs = tarjan_scc(&g);
    for (i, c) in sccs.iter().enumerate() {
        for &n in c {
            comp_of[g[n]] = i;
        }
    }
    let mut out: Vec<(Vec<usize>, Vec<usize>)> = sccs
        .iter()
        .enumerate()
        .map(|(i, c)| {
            let mut states: Vec<usize> = c.iter().map(|&n| g[n]).collect();
            states.sort_unstable();
            let edges: Vec<usize> = lts
                .transitions
                .iter()
                .enumerate()
                .filter(|(_, t)| allowed[t.source] && allowed[t.target] && comp_of[t.source] == i && comp_of[t.target] == i)
                .map(|(k, _)| k)
                .collect();
            (states, edges)
        })
        .filter(|(_, e)| !e.is_empty())
        .collect();
    out.sort();
    out
}

/// Maximal strongly connected supports passing the cycle-level condition.
fn fair_supports(checker: &Checker, region: &[bool]) -> Vec<(Vec<usize>, Vec<usize>)> {
    let lts = checker.lts;
    let mut out = Vec::new();
    let mut work = vec![region.to_vec()];
    while let Some(allowed) = work.pop() {
        for (states, edges) in nontrivial_sccs(lts, &allowed) {
            match checker.refine(&states, &edges) {
                Refine::Accept => out.push((states, edges)),
                Refine::Reject => {}
                Refine::Remove(gone) => {
                    let mut next = vec![false; lts.num_states()];
                    for &s in &states {
                        next[s] = true;
                    }
                    for s in gone {
                        next[s] = false;
                    }
                    work.push(next);
                }
            }
        }
    }
    out.sort();
    out
}

/// Shortest path inside the support from `from` to `to`.
fn support_path(lts: &AugmentedLts, edges: &[usize], from: usize, to: usize) -> Vec<usize> {
    if from == to {
        return Vec::new();
    }
    let mut parent: HashMap<usize, usize> = HashMap::new();
    let mut queue = VecDeque::from([from]);
    let mut seen = BTreeSet::from([from]);
    while let Some(s) = queue.pop_front() {
        for &e in edges.iter().filter(|&&e| lts.transitions[e].source == s) {
            let v = lts.transitions[e].target;
            if seen.insert(v) {
                parent.insert(v, e);
                if v == to {
                    let mut path = vec![e];
                    let mut cur = s;
                    while cur != from {
                        let p = parent[&cur];
                        path.push(p);
                        cur = lts.transitions[p].source;
                    }
                    path.reverse();
                    return path;
                }
                queue.push_back(v);
            }
        }
    }
    unreachable!("supports are strongly connected")
}

/// A cycle from `anchor` through every support edge.
fn covering_cycle(lts: &AugmentedLts, edges: &[usize], anchor: usize) -> Vec<usize> {
    let mut cycle = Vec::new();
    let mut cur = anchor;
    for &e in edges {
        cycle.extend(support_path(lts, edges, cur, lts.transitions[e].source));
        cycle.push(e);
        cur = lts.transitions[e].target;
    }
    cycle.extend(support_path(lts, edges, cur, anchor));
    cycle
}

type Pending = BTreeSet<BTreeSet<ComponentPath>>;

/// Justness stem search over (state, pending obligations): finds a goal-avoiding rooted path
/// whose obligations are all discharged when it stops (`accept` decides where stopping is allowed
/// and which obligations the continuation discharges).
fn just_search(
    checker: &Checker,
    region: &Region,
    accept: impl Fn(usize, &Pending) -> bool,
) -> Option<PathPrefix> {
    let lts = checker.lts;
    let comps = |s: usize| -> Pending {
        checker.unanswered(s, &[]).into_iter().map(|t| lts.transitions[t].comp.clone().expect("checked")).collect()
    };
    let mut seen: HashMap<(usize, Pending), Option<(usize, Pending, usize)>> = HashMap::new();
    let mut queue = VecDeque::new();
    for &s in &lts.initial {
        if region.inside[s] {
            let key = (s, comps(s));
            if !seen.contains_key(&key) {
                seen.insert(key.clone(), None);
                queue.push_back(key);
            }
        }
    }
    while let Some((s, pending)) = queue.pop_front() {
        if accept(s, &pending) {
            let mut steps = Vec::new();
            let mut key = (s, pending);
            while let Some(Some((ps, pp, t))) = seen.get(&key) {
                steps.push(*t);
                key = (*ps, pp.clone());
            }
            steps.reverse();
            return Some(PathPrefix { start: key.0, steps });
        }
        for &u in lts.outgoing(s) {
            let v = lts.transitions[u].target;
            if !region.inside[v] {
                continue;
            }
            let cu = lts.transitions[u].comp.as_ref().expect("checked");
            let mut next: Pending = pending.iter().filter(|c| c.is_disjoint(cu)).cloned().collect();
            next.extend(comps(v));
            let key = (v, next);
            if !seen.contains_key(&key) {
                seen.insert(key.clone(), Some((s, pending.clone(), u)));
                queue.push_back(key);
            }
        }
    }
    None
}

fn finite_counterexample(checker: &Checker, region: &Region) -> Result<Option<PathPrefix>, VerifyError> {
    let lts = checker.lts;
    if checker.kind == AssumptionKind::Just {
        // Obligations include the live transitions of the current state, so an empty set means
        // every earlier obligation was answered and nothing live remains.
        return Ok(just_search(checker, region, |_, pending| pending.is_empty()));
    }
    for d in 0..lts.num_states() {
        if region.inside[d] && checker.classify_finite(&PathPrefix::empty(d))? {
            return Ok(Some(region.path_to(lts, d)));
        }
    }
    Ok(None)
}

fn infinite_counterexample(checker: &Checker, region: &Region) -> Option<Lasso> {
    let lts = checker.lts;
    for (states, edges) in fair_supports(checker, &region.inside) {
        let stem = if checker.kind == AssumptionKind::Just {
            let answered = |c: &BTreeSet<ComponentPath>| {
                edges.iter().any(|&e| !lts.transitions[e].comp.as_ref().expect("checked").is_disjoint(c))
            };
            let support: BTreeSet<usize> = states.iter().copied().collect();
            match just_search(checker, region, |s, pending| support.contains(&s) && pending.iter().all(answered)) {
                Some(p) => p,
                None => continue,
            }
        } else {
            let anchor = *states.iter().min_by_key(|&&s| (region.depth[s], s)).expect("nonempty");
            region.path_to(lts, anchor)
        };
        let anchor = stem.last(lts);
        let cycle = covering_cycle(lts, &edges, anchor);
        return Some(Lasso { stem, cycle });
    }
    None
}

fn bounded(lts: &AugmentedLts, goal: &BTreeSet<usize>, a: &Assumption, name: &str, bounds: Bounds) -> Verdict {
    let mut notes = vec!["system is truncated; no verdict is claimed for the unexplored part".to_string()];
    let witness = loopfree_witness(lts, goal, bounds.loopfree);
    match &witness {
        Some(p) => {
            notes.push(format!("loop-free goal-avoiding rooted path of length {} found", p.steps.len()));
            if let Ok(ts) = a.tasks(lts) {
                let mut shown = 0;
                for task in &ts.tasks {
                    let c = prefix_certificate(lts, p, task);
                    if c.enabled_everywhere && !c.occurs && shown < 8 {
                        notes.push(format!("task {} enabled throughout and never taken on that path", task.name));
                        shown += 1;
                    }
                }
            }
        }
        None => notes.push(format!("no loop-free goal-avoiding rooted path of length {} found", bounds.loopfree)),
    }
    Verdict { holds: Holds::BoundedUnknown, assumption: a.name(), goal: name.to_string(), witness: witness.map(Witness::Prefix), notes }
}

/// Does every assumption-fair complete rooted path reach the goal?
pub fn liveness(lts: &AugmentedLts, goal_name: &str, a: &Assumption, bounds: Bounds) -> Result<Verdict, VerifyError> {
    let goal = goal_states(lts, lts.goal(goal_name)?)?;
    if lts.truncated {
        return Ok(bounded(lts, &goal, a, goal_name, bounds));
    }
    let region = Region::new(lts, &goal);
    if !a.kind.is_path_level() {
        return whole_system(lts, &goal, &region, a, goal_name, bounds);
    }
    let checker = Checker::new(lts, a)?;
    let mut verdict = Verdict { holds: Holds::Yes, assumption: a.name(), goal: goal_name.to_string(), witness: None, notes: vec![] };
    if let Some(p) = finite_counterexample(&checker, &region)? {
        if !checker.classify_finite(&p)? {
            return Err(VerifyError::Internal(format!("finite witness is not {}-fair", a.name())));
        }
        verdict.holds = Holds::No;
        verdict.witness = Some(Witness::Prefix(p));
        return Ok(verdict);
    }
    if let Some(l) = infinite_counterexample(&checker, &region) {
        if !checker.classify_lasso(&l)? {
            return Err(VerifyError::Internal(format!("lasso witness is not {}-fair", a.name())));
        }
        verdict.holds = Holds::No;
        verdict.witness = Some(Witness::Lasso(l));
    }
    Ok(verdict)
}

/// Full, strong-transition and probabilistic fairness: the goal must stay reachable from every
/// reachable goal-avoiding state.
fn whole_system(
    lts: &AugmentedLts,
    goal: &BTreeSet<usize>,
    region: &Region,
    a: &Assumption,
    name: &str,
    bounds: Bounds,
) -> Result<Verdict, VerifyError> {
    let ok = reaches_goal(lts, goal, a.reactive);
    let holds = agef(lts, goal, a.reactive);
    let mut notes = vec![format!("decided by reachability of the goal from every reachable state{}", if a.reactive { " along non-blocking paths" } else { "" })];
    if a.kind != AssumptionKind::Fu {
        notes.push("equivalent to full fairness on finite-state systems".into());
    }
    if !holds && region.inside.iter().zip(&ok).all(|(&r, &g)| !r || g) {
        notes.push("the goal stays reachable from every goal-avoiding state; it is lost only after being reached".into());
    }
    let mut verdict = Verdict { holds: if holds { Holds::Yes } else { Holds::No }, assumption: a.name(), goal: name.to_string(), witness: None, notes };
    if !holds {
        let st = Assumption { kind: AssumptionKind::S(Notion::T), taskset: None, reactive: a.reactive };
        let v = liveness(lts, name, &st, bounds)?;
        match v.witness {
            Some(w) => {
                verdict.notes.push(format!("witness is {}-fair", st.name()));
                verdict.witness = Some(w);
            }
            None => verdict.notes.push(format!("no {}-fair witness found", st.name())),
        }
    }
    Ok(verdict)
}

/// A loop-free goal-avoiding rooted path of exactly `bound` steps, searched depth-first.
pub fn loopfree_witness(lts: &AugmentedLts, goal: &BTreeSet<usize>, bound: usize) -> Option<PathPrefix> {
    const BUDGET: usize = 2_000_000;
    let mut budget = BUDGET;
    for &s0 in &lts.initial {
        if goal.contains(&s0) {
            continue;
        }
        let mut on_path = vec![false; lts.num_states()];
        on_path[s0] = true;
        let mut steps: Vec<usize> = Vec::new();
        // Per depth: index of the next outgoing transition to try.
        let mut cursor: Vec<usize> = vec![0];
        let mut cur = s0;
        loop {
            if steps.len() == bound {
                return Some(PathPrefix { start: s0, steps });
            }
            let depth = steps.len();
            let out = lts.outgoing(cur);
            let mut advanced = false;
            while cursor[depth] < out.len() {
                let t = out[cursor[depth]];
                cursor[depth] += 1;
                let v = lts.transitions[t].target;
                if on_path[v] || goal.contains(&v) {
                    continue;
                }
                budget = budget.saturating_sub(1);
                if budget == 0 {
                    return None;
                }
                on_path[v] = true;
                steps.push(t);
                cursor.push(0);
                cur = v;
                advanced = true;
                break;
            }
            if !advanced {
                if steps.is_empty() {
                    break;
                }
                cursor.pop();
                on_path[cur] = false;
                let t = steps.pop().expect("nonempty");
                cur = lts.transitions[t].source;
            }
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ccs_lang::parse_ccs;
    use crate::lts_model::{load_lts, Origin, TaskSet};
    use crate::paths::classify_lasso;
    use crate::semantics::explore;
    use crate::tasks::load_custom_tasks;

    fn sys(src: &str) -> AugmentedLts {
        explore(&parse_ccs(src).unwrap(), 512, 256).lts
    }

    fn holds(lts: &AugmentedLts, goal: &str, a: Assumption) -> Holds {
        let v = liveness(lts, goal, &a, Bounds::default()).unwrap();
        if v.holds == Holds::No {
            match v.witness.as_ref().unwrap() {
                Witness::Lasso(l) => assert!(classify_lasso(lts, l, &a).unwrap_or(true)),
                Witness::Prefix(p) => assert!(!goal_states(lts, lts.goal(goal).unwrap()).unwrap().contains(&p.last(lts))),
            }
        }
        v.holds
    }

    #[test]
    fn left_exit_needs_more_than_action_fairness() {
        let lts = sys("% goal G = at L: 0\na | X where X = a.X");
        assert_eq!(holds(&lts, "G", Assumption::new(AssumptionKind::S(Notion::A))), Holds::No);
        assert_eq!(holds(&lts, "G", Assumption::new(AssumptionKind::P)), Holds::No);
        for n in [Notion::T, Notion::I, Notion::Z, Notion::C, Notion::G] {
            for k in [AssumptionKind::J(n), AssumptionKind::W(n), AssumptionKind::S(n)] {
                assert_eq!(holds(&lts, "G", Assumption::new(k)), Holds::Yes, "{k}");
            }
        }
        assert_eq!(holds(&lts, "G", Assumption::new(AssumptionKind::Just)), Holds::Yes);
        assert_eq!(holds(&lts, "G", Assumption::new(AssumptionKind::St)), Holds::Yes);
    }

    #[test]
    fn independent_component_is_just() {
        let lts = sys("% goal G = at R: 0\nX | c.0 where X = b.X");
        assert_eq!(holds(&lts, "G", Assumption::new(AssumptionKind::Just)), Holds::Yes);
        assert_eq!(holds(&lts, "G", Assumption::new(AssumptionKind::P)), Holds::No);
    }

    #[test]
    fn deadlock_is_a_finite_counterexample() {
        let lts = sys("% goal G = state: c.0\na.0 + b.c.0");
        let v = liveness(&lts, "G", &Assumption::new(AssumptionKind::S(Notion::T)), Bounds::default()).unwrap();
        assert_eq!(v.holds, Holds::No);
        assert!(matches!(v.witness, Some(Witness::Prefix(ref p)) if p.steps.len() == 1));
        assert!(!agef(&lts, &goal_states(&lts, lts.goal("G").unwrap()).unwrap(), false));
    }

    #[test]
    fn goal_lost_after_being_reached_is_not_agef() {
        let lts = sys("% goal G = state: b.0\na.b.0");
        let v = liveness(&lts, "G", &Assumption::new(AssumptionKind::St), Bounds::default()).unwrap();
        assert_eq!(v.holds, Holds::No);
        assert!(v.notes.iter().any(|n| n.contains("lost only after")));
        assert_eq!(holds(&lts, "G", Assumption::new(AssumptionKind::S(Notion::T))), Holds::Yes);
    }

    #[test]
    fn mutex_needs_strong_fairness() {
        // s0 = both idle; the left process requests (l1), the memory-holding right process
        // cycles m1 m2 m3; the left can only enter (l2) from the state where the memory is free.
        let doc = r#"{"states":[{"id":"a"},{"id":"b"},{"id":"c"},{"id":"d"},{"id":"e"}],
          "transitions":[
            {"id":"l1","source":"a","target":"b","label":"l1","comp":["L"],"blocking":false},
            {"id":"m1","source":"a","target":"c","label":"m1","comp":["M"],"blocking":false},
            {"id":"m1b","source":"b","target":"d","label":"m1","comp":["M"],"blocking":false},
            {"id":"m2","source":"c","target":"a","label":"m2","comp":["M"],"blocking":false},
            {"id":"m2b","source":"d","target":"b","label":"m2","comp":["M"],"blocking":false},
            {"id":"l2","source":"b","target":"e","label":"l2","comp":["L","M"],"blocking":false}],
          "initial":["a"],"origin":"handwritten",
          "goals":{"G":{"disjuncts":[{"kind":"explicit_states","states":["e"]}]}}}"#;
        let lts = load_lts(doc).unwrap();
        let tasks = load_custom_tasks(
            &lts,
            r#"{"tasks":[{"name":"L","members":["l1","l2"]},{"name":"M","members":["m1","m1b","m2","m2b"]}]}"#,
        )
        .unwrap();
        let w = Assumption::custom(AssumptionKind::W, tasks.clone());
        let s = Assumption::custom(AssumptionKind::S, tasks);
        assert_eq!(holds(&lts, "G", w), Holds::No);
        assert_eq!(holds(&lts, "G", s), Holds::Yes);
        assert_eq!(lts.origin, Origin::Handwritten);
    }

    #[test]
    fn truncated_is_bounded_with_loopfree_evidence() {
        let lts = explore(&parse_ccs("% goal G = at L: 0\na | X where X = b#0.X[b#i->b#(i+1)]").unwrap(), 64, 256).lts;
        let v = liveness(&lts, "G", &Assumption::new(AssumptionKind::S(Notion::T)), Bounds { loopfree: 30 }).unwrap();
        assert_eq!(v.holds, Holds::BoundedUnknown);
        assert!(matches!(v.witness, Some(Witness::Prefix(ref p)) if p.steps.len() == 30));
    }

    #[test]
    fn loopfree_paths_are_bounded_by_state_count() {
        let lts = sys("% goal G = state: c.0\nX where X = a.X + b.X");
        let g = goal_states(&lts, lts.goal("G").unwrap()).unwrap();
        assert!(loopfree_witness(&lts, &g, 0).is_some());
        assert!(loopfree_witness(&lts, &g, lts.num_states() + 1).is_none());
    }

    #[test]
    fn verdict_json_shape() {
        let lts = sys("% goal G = at L: 0\na | X where X = a.X");
        let v = liveness(&lts, "G", &Assumption::new(AssumptionKind::S(Notion::A)), Bounds::default()).unwrap();
        let j = v.to_json(&lts);
        assert_eq!(j["holds"], "no");
        assert_eq!(j["assumption"], "S:A");
        assert!(j["witness"]["cycle"].is_array());
        let _ = TaskSet { notion: Notion::A, tasks: vec![], bounded: false };
    }
}
