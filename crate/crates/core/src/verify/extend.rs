use std::collections::HashMap;

use crate::lts_model::{AugmentedLts, TaskSet};
use crate::paths::{enabled, Assumption, AssumptionKind, Checker, Lasso, PathPrefix};

/// The scheduling matrix: filled, not yet crossed-out entries in enumeration order
/// (column by column, tasks in task-set order within a column).
struct Matrix<'a> {
    lts: &'a AugmentedLts,
    tasks: &'a TaskSet,
    entries: Vec<usize>,
}

impl<'a> Matrix<'a> {
    /// Fills the column of the current state and extends the path by one transition.
    fn step(&mut self, state: usize) -> Option<usize> {
        let out = self.lts.outgoing(state);
        if out.is_empty() {
            return None;
        }
        let on: Vec<bool> = self.tasks.tasks.iter().map(|t| enabled(self.lts, t, state, false)).collect();
        self.entries.extend((0..on.len()).filter(|&k| on[k]));
        match self.entries.iter().position(|&k| on[k]) {
            Some(j) => {
                let k = self.entries.remove(j);
                out.iter().copied().find(|t| self.tasks.tasks[k].members.contains(t))
            }
            // No task covers the enabled transitions: keep making progress.
            None => out.first().copied(),
        }
    }

    /// Remaining entries with repeats dropped.
    fn digest(&self) -> Vec<usize> {
        let mut seen = vec![false; self.tasks.tasks.len()];
        self.entries.iter().copied().filter(|&k| !std::mem::replace(&mut seen[k], true)).collect()
    }
}

/// Extends `prefix` by up to `step_cap` steps with the priority-queue scheduler; stops early
/// at a state without outgoing transitions.
pub fn fair_extend(lts: &AugmentedLts, prefix: &PathPrefix, tasks: &TaskSet, step_cap: usize) -> PathPrefix {
    let mut m = Matrix { lts, tasks, entries: Vec::new() };
    let mut path = prefix.clone();
    for _ in 0..step_cap {
        match m.step(path.last(lts)) {
            Some(t) => path.steps.push(t),
            None => break,
        }
    }
    path
}

/// Runs the scheduler until a (state, queue digest) pair repeats on a segment that is strongly
/// fair for `tasks`, and returns that lasso.
pub fn fair_lasso(lts: &AugmentedLts, prefix: &PathPrefix, tasks: &TaskSet, step_cap: usize) -> Option<Lasso> {
    let checker = Checker::new(lts, &Assumption { kind: AssumptionKind::S(tasks.notion), taskset: Some(tasks.clone()), reactive: false }).ok()?;
    let mut m = Matrix { lts, tasks, entries: Vec::new() };
    let mut path = prefix.clone();
    let mut seen: HashMap<(usize, Vec<usize>), usize> = HashMap::new();
    for _ in 0..=step_cap {
        let state = path.last(lts);
        let key = (state, m.digest());
        if let Some(&i) = seen.get(&key) {
            let lasso = Lasso {
                stem: PathPrefix { start: path.start, steps: path.steps[..i].to_vec() },
                cycle: path.steps[i..].to_vec(),
            };
            if checker.classify_lasso(&lasso).ok()? {
                return Some(lasso);
            }
        }
        seen.insert(key, path.steps.len());
        path.steps.push(m.step(state)?);
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ccs_lang::parse_ccs;
    use crate::lts_model::Notion;
    use crate::semantics::explore;
    use crate::tasks::extract_tasks;

    fn sys(src: &str) -> AugmentedLts {
        explore(&parse_ccs(src).unwrap(), 512, 256).lts
    }

    #[test]
    fn schedules_the_exit_under_instruction_tasks() {
        let lts = sys("a | X where X = a.X");
        let ts = extract_tasks(&lts, Notion::I).unwrap();
        let p = fair_extend(&lts, &PathPrefix::empty(0), &ts, 6);
        assert_eq!(p.steps.len(), 6);
        assert!(p.steps.iter().any(|&t| lts.transitions[t].instr.as_ref().unwrap().iter().any(|i| i.0 == "a@1")));
    }

    #[test]
    fn deadlock_leaves_prefix_unchanged() {
        let lts = sys("0");
        let ts = extract_tasks(&lts, Notion::T).unwrap();
        assert_eq!(fair_extend(&lts, &PathPrefix::empty(0), &ts, 5), PathPrefix::empty(0));
    }

    #[test]
    fn lasso_from_the_scheduler_is_strongly_fair() {
        let lts = sys("X | Y where X = a.X + b.X, Y = a.Y + 'b.Y");
        for n in Notion::GLOBAL {
            let ts = extract_tasks(&lts, n).unwrap();
            let l = fair_lasso(&lts, &PathPrefix::empty(0), &ts, 200).expect("finite state");
            let a = Assumption { kind: AssumptionKind::S(n), taskset: None, reactive: false };
            assert!(crate::paths::classify_lasso(&lts, &l, &a).unwrap(), "{n}");
        }
    }
}
