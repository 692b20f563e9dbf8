use std::collections::{BTreeSet, VecDeque};

use rayon::prelude::*;

use super::VerifyError;
use crate::lts_model::{validate_side_conditions, AugmentedLts, Condition, Notion, SideConditionReport};
use crate::paths::{Assumption, AssumptionKind, Checker, Lasso, PathPrefix};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HierarchyBounds {
    pub stem: usize,
    pub cycle: usize,
}

impl Default for HierarchyBounds {
    fn default() -> Self {
        HierarchyBounds { stem: 5, cycle: 6 }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HierarchyReport {
    pub stronger: String,
    pub weaker: String,
    /// Side conditions under which the arrow `weaker ⪯ stronger` is claimed; `None` if no arrow is known.
    pub arrow: Option<Vec<Condition>>,
    pub checked: usize,
    /// Lassos fair under the stronger assumption but not under the weaker one.
    pub violations: Vec<Lasso>,
    pub skipped: Option<String>,
}

/// Direct arrows `x ⪯ y` (y rules out at least the paths x rules out) with their side conditions.
fn base_arrows() -> Vec<(AssumptionKind, AssumptionKind, Vec<Condition>)> {
    use AssumptionKind::*;
    use Condition::*;
    let mut v = Vec::new();
    for n in Notion::GLOBAL {
        v.push((P, J(n), vec![]));
        v.push((J(n), W(n), vec![]));
        v.push((W(n), S(n), vec![]));
    }
    v.push((P, Just, vec![]));
    v.push((Swi, S(Notion::I), vec![]));
    v.push((W(Notion::T), W(Notion::Z), vec![One]));
    v.push((S(Notion::I), S(Notion::Z), vec![Two]));
    v.push((S(Notion::C), S(Notion::I), vec![Two, Three]));
    v.push((S(Notion::C), S(Notion::G), vec![Two, Three]));
    v.push((S(Notion::G), S(Notion::Z), vec![Two, Three]));
    v.push((S(Notion::C), Swi, vec![Two, Three, Four, Five]));
    v.push((W(Notion::I), Swi, vec![Four]));
    v.push((J(Notion::I), J(Notion::C), vec![Three]));
    for n in [Notion::I, Notion::Z, Notion::C, Notion::G] {
        v.push((Just, J(n), vec![Three, Six]));
    }
    for n in [Notion::T, Notion::Z, Notion::G] {
        v.push((J(n), Just, vec![Three]));
    }
    v
}

/// Side conditions of a chain of arrows from `weaker` to `stronger`, preferring a chain whose
/// conditions all hold in `report` (if given). `None` if the hierarchy has no such arrow.
pub fn arrow_conditions(
    weaker: AssumptionKind,
    stronger: AssumptionKind,
    report: Option<&SideConditionReport>,
) -> Option<Vec<Condition>> {
    let arrows = base_arrows();
    let holds = |c: &Condition| report.is_none_or(|r| r.holds(*c));
    // Breadth-first over (node, accumulated conditions); first satisfiable chain wins.
    let mut queue = VecDeque::from([(weaker, BTreeSet::<Condition>::new())]);
    let mut seen = BTreeSet::new();
    let mut fallback = None;
    while let Some((x, conds)) = queue.pop_front() {
        if x == stronger {
            if conds.iter().all(holds) {
                return Some(conds.into_iter().collect());
            }
            fallback.get_or_insert_with(|| conds.iter().copied().collect::<Vec<_>>());
            continue;
        }
        if !seen.insert((x, conds.clone())) {
            continue;
        }
        for (a, b, c) in &arrows {
            if *a == x {
                let mut next = conds.clone();
                next.extend(c.iter().copied());
                queue.push_back((*b, next));
            }
        }
    }
    fallback
}

/// All rooted lassos with a stem of at most `stem` steps and a cycle of at most `cycle` steps
/// that repeats no transition.
pub fn enumerate_lassos(lts: &AugmentedLts, bounds: HierarchyBounds) -> Vec<Lasso> {
    let mut stems: Vec<PathPrefix> = lts.initial.iter().map(|&s| PathPrefix::empty(s)).collect();
    let mut frontier = stems.clone();
    for _ in 0..bounds.stem {
        let mut next = Vec::new();
        for p in &frontier {
            for &t in lts.outgoing(p.last(lts)) {
                let mut q = p.clone();
                q.steps.push(t);
                next.push(q);
            }
        }
        stems.extend(next.iter().cloned());
        frontier = next;
    }
    let mut cycles_at: Vec<Option<Vec<Vec<usize>>>> = vec![None; lts.num_states()];
    let mut out = Vec::new();
    for stem in stems {
        let anchor = stem.last(lts);
        let cycles = cycles_at[anchor].get_or_insert_with(|| closed_trails(lts, anchor, bounds.cycle));
        for c in cycles.iter() {
            out.push(Lasso { stem: stem.clone(), cycle: c.clone() });
        }
    }
    out
}

/// Closed walks from `anchor` of at most `max` steps that use no transition twice.
fn closed_trails(lts: &AugmentedLts, anchor: usize, max: usize) -> Vec<Vec<usize>> {
    fn go(lts: &AugmentedLts, cur: usize, anchor: usize, max: usize, used: &mut [bool], path: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if path.len() == max {
            return;
        }
        for &t in lts.outgoing(cur) {
            if used[t] {
                continue;
            }
            let v = lts.transitions[t].target;
            used[t] = true;
            path.push(t);
            if v == anchor {
                out.push(path.clone());
            }
            go(lts, v, anchor, max, used, path, out);
            path.pop();
            used[t] = false;
        }
    }
    let mut out = Vec::new();
    go(lts, anchor, anchor, max, &mut vec![false; lts.num_transitions()], &mut Vec::new(), &mut out);
    out
}

/// Searches bounded lassos for paths fair under `stronger` but not under `weaker`.
pub fn hierarchy_check(
    lts: &AugmentedLts,
    stronger: &Assumption,
    weaker: &Assumption,
    bounds: HierarchyBounds,
) -> Result<HierarchyReport, VerifyError> {
    let mut report = HierarchyReport {
        stronger: stronger.name(),
        weaker: weaker.name(),
        arrow: None,
        checked: 0,
        violations: Vec::new(),
        skipped: None,
    };
    let conditions = validate_side_conditions(lts);
    if let Some(conds) = arrow_conditions(weaker.kind, stronger.kind, Some(&conditions)) {
        let failing: Vec<String> = conds.iter().filter(|c| !conditions.holds(**c)).map(|c| c.to_string()).collect();
        report.arrow = Some(conds);
        if !failing.is_empty() {
            report.skipped = Some(format!("side conditions {} do not hold", failing.join(", ")));
            return Ok(report);
        }
    }
    let strong = Checker::new(lts, stronger)?;
    let weak = Checker::new(lts, weaker)?;
    let lassos = enumerate_lassos(lts, bounds);
    report.checked = lassos.len();
    let verdicts: Vec<Result<Option<Lasso>, VerifyError>> = lassos
        .into_par_iter()
        .map(|l| {
            if strong.classify_lasso(&l)? && !weak.classify_lasso(&l)? {
                Ok(Some(l))
            } else {
                Ok(None)
            }
        })
        .collect();
    for v in verdicts {
        if let Some(l) = v? {
            report.violations.push(l);
        }
    }
    Ok(report)
}
