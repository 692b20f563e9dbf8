//! Structural operational semantics with instruction names, and state-space exploration.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::sync::Arc;

use crate::ccs_lang::{canonical, state_key, ActionLabel, ComponentPath, Expr, InstrName, ProcessSpec};
use crate::lts_model::{AugTransition, AugmentedLts, Origin, StateRec};

/// One derivable transition of an expression, before ids are assigned.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Move {
    pub label: ActionLabel,
    pub instr: BTreeSet<InstrName>,
    pub comp: BTreeSet<ComponentPath>,
    pub target: Arc<Expr>,
}

/// Guard against unguarded recursion slipping past the fragment check.
const UNFOLD_LIMIT: usize = 64;

/// All transitions of `state`, with component paths relative to `state`.
pub fn step(state: &Arc<Expr>) -> Vec<Move> {
    let mut out = Vec::new();
    step_at(state, &ComponentPath::root(), 0, &mut out);
    out
}

fn step_at(e: &Arc<Expr>, path: &ComponentPath, depth: usize, out: &mut Vec<Move>) {
    match &**e {
        Expr::Nil | Expr::Var(_) => {}
        Expr::Prefix { action, name, body } => out.push(Move {
            label: action.clone(),
            instr: BTreeSet::from([name.clone()]),
            comp: BTreeSet::from([path.clone()]),
            target: body.clone(),
        }),
        Expr::Choice(a, b) => {
            step_at(a, path, depth, out);
            step_at(b, path, depth, out);
        }
        Expr::Par(a, b) => {
            let mut left = Vec::new();
            let mut right = Vec::new();
            step_at(a, &path.child('L'), depth, &mut left);
            step_at(b, &path.child('R'), depth, &mut right);
            for m in &left {
                out.push(Move { target: Arc::new(Expr::Par(m.target.clone(), b.clone())), ..m.clone() });
            }
            for m in &right {
                out.push(Move { target: Arc::new(Expr::Par(a.clone(), m.target.clone())), ..m.clone() });
            }
            for l in &left {
                if l.label.is_tau() {
                    continue;
                }
                for r in right.iter().filter(|r| r.label == l.label.complement()) {
                    out.push(Move {
                        label: ActionLabel::Tau,
                        instr: l.instr.union(&r.instr).cloned().collect(),
                        comp: l.comp.union(&r.comp).cloned().collect(),
                        target: Arc::new(Expr::Par(l.target.clone(), r.target.clone())),
                    });
                }
            }
        }
        Expr::Restrict(a, n) => {
            let mut inner = Vec::new();
            step_at(a, path, depth, &mut inner);
            for m in inner {
                if m.label.name() != Some(n) {
                    out.push(Move { target: Arc::new(Expr::Restrict(m.target.clone(), n.clone())), ..m });
                }
            }
        }
        Expr::Relabel(a, f) => {
            let mut inner = Vec::new();
            step_at(a, path, depth, &mut inner);
            for m in inner {
                out.push(Move {
                    label: f.apply(&m.label),
                    target: Arc::new(Expr::Relabel(m.target.clone(), f.clone())),
                    ..m
                });
            }
        }
        Expr::Fix { var, spec } => {
            if depth >= UNFOLD_LIMIT {
                return;
            }
            if let Some(body) = Expr::unfold(var, spec) {
                step_at(&body, path, depth + 1, out);
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct ExplorationReport {
    pub lts: AugmentedLts,
    pub truncated: bool,
    pub state_cap: usize,
    pub depth_cap: usize,
}

pub const DEFAULT_STATE_CAP: usize = 512;
pub const DEFAULT_DEPTH_CAP: usize = 256;

/// Breadth-first closure of [`step`] from the root. States are identified as plain processes
/// (instruction names generated for fix copies are ignored) and keep the naming of their first
/// discovery; outgoing transitions of a state are ordered by label, instructions, then target text.
pub fn explore(spec: &ProcessSpec, state_cap: usize, depth_cap: usize) -> ExplorationReport {
    let state_cap = state_cap.max(1);
    let mut keys: HashMap<String, usize> = HashMap::new();
    let mut states: Vec<StateRec> = Vec::new();
    let mut exprs: Vec<Option<Arc<Expr>>> = Vec::new();
    let mut depth: Vec<usize> = Vec::new();
    let mut transitions: Vec<AugTransition> = Vec::new();
    let mut truncated = false;

    let root = if spec.normalize { Expr::normalize_relabels(&spec.root) } else { spec.root.clone() };
    keys.insert(state_key(&root), 0);
    states.push(StateRec { id: "s0".into(), expr: Some(canonical(&root)) });
    exprs.push(Some(root));
    depth.push(0);

    let mut queue = VecDeque::from([0usize]);
    while let Some(s) = queue.pop_front() {
        let e = exprs[s].clone().expect("explored states carry expressions");
        let mut moves: Vec<(Move, String)> = step(&e)
            .into_iter()
            .map(|mut m| {
                if spec.normalize {
                    m.target = Expr::normalize_relabels(&m.target);
                }
                let k = state_key(&m.target);
                (m, k)
            })
            .collect();
        if moves.is_empty() {
            continue;
        }
        if depth[s] >= depth_cap {
            truncated = true;
            continue;
        }
        moves.sort_by(|(a, ka), (b, kb)| {
            (a.label.to_string(), &a.instr, ka).cmp(&(b.label.to_string(), &b.instr, kb))
        });
        for (m, key) in moves {
            let target = match keys.get(&key) {
                Some(&t) => t,
                None => {
                    if states.len() >= state_cap {
                        truncated = true;
                        continue;
                    }
                    let t = states.len();
                    keys.insert(key, t);
                    states.push(StateRec { id: format!("s{t}"), expr: Some(canonical(&m.target)) });
                    exprs.push(Some(m.target.clone()));
                    depth.push(depth[s] + 1);
                    queue.push_back(t);
                    t
                }
            };
            let blocking = !m.label.is_tau() && !spec.nonblocking.contains(&m.label);
            transitions.push(AugTransition {
                id: format!("t{}", transitions.len()),
                source: s,
                target,
                label: m.label,
                instr: Some(m.instr),
                comp: Some(m.comp),
                blocking,
            });
        }
    }
    let mut cmp_map: BTreeMap<InstrName, ComponentPath> = BTreeMap::new();
    for t in &transitions {
        for i in t.instr.iter().flatten() {
            if let Some(c) = spec.cmp_map.get(i) {
                cmp_map.insert(i.clone(), c.clone());
            }
        }
    }
    let mut lts = AugmentedLts::new(states, transitions, vec![0], Origin::Ccs, truncated, exprs, cmp_map);
    lts.goals = spec.goals.clone();
    ExplorationReport { lts, truncated, state_cap, depth_cap }
}

/// At most one outgoing transition per (state, instruction set).
pub fn unique_synchronisation_check(lts: &AugmentedLts) -> bool {
    (0..lts.num_states()).all(|s| {
        let mut seen = BTreeSet::new();
        lts.outgoing(s)
            .iter()
            .filter_map(|&t| lts.transitions[t].instr.as_ref())
            .all(|i| seen.insert(i.clone()))
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ccs_lang::{erased, parse_ccs, well_named};

    fn moves(src: &str) -> Vec<(String, Vec<String>, Vec<String>)> {
        let s = parse_ccs(src).unwrap();
        let mut v: Vec<_> = step(&s.root)
            .into_iter()
            .map(|m| {
                (
                    m.label.to_string(),
                    m.instr.iter().map(|i| i.0.clone()).collect(),
                    m.comp.iter().map(|c| c.0.clone()).collect(),
                )
            })
            .collect();
        v.sort();
        v
    }

    #[test]
    fn nil_is_stuck() {
        assert!(moves("0").is_empty());
    }

    #[test]
    fn left_exit_and_right_loop() {
        let v = moves("a | X where X = a.X");
        assert_eq!(
            v,
            vec![
                ("a".into(), vec!["a@1".into()], vec!["L".into()]),
                ("a".into(), vec!["a@2".into()], vec!["R".into()]),
            ]
        );
        let r = explore(&parse_ccs("a | X where X = a.X").unwrap(), 10, 10);
        assert_eq!((r.lts.num_states(), r.lts.num_transitions(), r.truncated), (2, 3, false));
        let done = r.lts.transitions.iter().find(|t| t.source == 1).unwrap();
        assert_eq!(done.instr.as_ref().unwrap().iter().next().unwrap().0, "a@2");
    }

    #[test]
    fn running_example_has_synchronisation() {
        let v = moves("X|Y where X = a.X + b.X, Y = a.Y + 'b.Y");
        assert_eq!(v.len(), 5);
        let tau = v.iter().find(|m| m.0 == "tau").unwrap();
        assert_eq!(tau.1, vec!["b@1".to_string(), "b~@1".to_string()]);
        assert_eq!(tau.2, vec!["L".to_string(), "R".to_string()]);
    }

    #[test]
    fn restriction_and_relabelling() {
        assert_eq!(moves("(a.0 | 'a.0)\\a").len(), 1);
        let v = moves("(a{x}.0)[a->c]");
        assert_eq!(v, vec![("c".into(), vec!["x".into()], vec!["".into()])]);
    }

    #[test]
    fn diagonal_system_has_nine_states() {
        let r = explore(&parse_ccs("X | c.X where X = a.b.c.X").unwrap(), 512, 256);
        assert_eq!(r.lts.num_states(), 9);
        assert!(!r.truncated);
    }

    #[test]
    fn infinite_family_truncates() {
        let spec = parse_ccs("a | X where X = b#0.X[b#i->b#(i+1)]").unwrap();
        let r = explore(&spec, 10, 256);
        assert_eq!(r.lts.num_states(), 10);
        assert!(r.truncated && r.lts.truncated);
    }

    #[test]
    fn normalisation_folds_double_swap() {
        let src = "X where X = b.b.X[a->c, c->a] + a.X";
        let plain = explore(&parse_ccs(src).unwrap(), 40, 40);
        assert!(plain.truncated);
        let norm = explore(&parse_ccs(&format!("% normalize\n{src}")).unwrap(), 40, 40);
        assert!(!norm.truncated);
        assert_eq!(norm.lts.num_states(), 4);
    }

    #[test]
    fn successors_stay_well_named() {
        let spec = parse_ccs("(X|Y)\\b where X = a.X + b.0, Y = c.Y + 'b.0").unwrap();
        let r = explore(&spec, 100, 100);
        for i in 0..r.lts.num_states() {
            assert!(well_named(r.lts.expr(i).unwrap()), "{}", erased(r.lts.expr(i).unwrap()));
        }
        assert!(unique_synchronisation_check(&r.lts));
    }

    #[test]
    fn nonblocking_pragma() {
        let r = explore(&parse_ccs("% nonblocking a\na.b.0").unwrap(), 10, 10);
        assert!(!r.lts.transitions[0].blocking);
        assert!(r.lts.transitions[1].blocking);
    }
}
