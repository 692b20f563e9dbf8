//! Task collections for the global fairness notions, custom task files, and the progress task.

use std::collections::{BTreeMap, BTreeSet};

use serde::Deserialize;

use crate::ccs_lang::{ComponentPath, InstrName};
use crate::lts_model::{tasks_from_docs, AugmentedLts, LtsError, Notion, Task, TaskDoc, TaskSet};

fn join<T: std::fmt::Display>(items: &BTreeSet<T>) -> String {
    items.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

fn component_name(c: &ComponentPath) -> String {
    if c.0.is_empty() {
        "-".to_string()
    } else {
        c.0.clone()
    }
}

/// Extracts the tasks of a global notion. Empty tasks are omitted; names are canonical
/// (`A:a`, `T:t17`, `I:a@1`, `Z:{b@1,b~@1}`, `C:LR`, `G:{L,R}`, with `-` for the root component).
pub fn extract_tasks(lts: &AugmentedLts, notion: Notion) -> Result<TaskSet, LtsError> {
    let mut groups: BTreeMap<String, BTreeSet<usize>> = BTreeMap::new();
    let mut ordered: Vec<Task> = Vec::new();
    for (i, t) in lts.transitions.iter().enumerate() {
        match notion {
            Notion::A => {
                groups.entry(format!("A:{}", t.label)).or_default().insert(i);
            }
            Notion::T => ordered.push(Task { name: format!("T:{}", t.id), members: BTreeSet::from([i]) }),
            Notion::I => {
                for n in lts.instr(i)? {
                    groups.entry(format!("I:{n}")).or_default().insert(i);
                }
            }
            Notion::Z => {
                groups.entry(format!("Z:{{{}}}", join(lts.instr(i)?))).or_default().insert(i);
            }
            Notion::C => {
                for c in lts.comp(i)? {
                    groups.entry(format!("C:{}", component_name(c))).or_default().insert(i);
                }
            }
            Notion::G => {
                let names: BTreeSet<String> = lts.comp(i)?.iter().map(component_name).collect();
                groups.entry(format!("G:{{{}}}", join(&names))).or_default().insert(i);
            }
            Notion::Custom => {
                return Err(LtsError::Schema("custom tasks come from a task file, not from extraction".into()))
            }
        }
    }
    let tasks = if notion == Notion::T {
        ordered
    } else {
        groups.into_iter().map(|(name, members)| Task { name, members }).collect()
    };
    Ok(TaskSet { notion, tasks, bounded: lts.truncated })
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct CustomDoc {
    tasks: Vec<TaskDoc>,
}

/// Reads `{"tasks":[{"name":..,"members":[transition ids]}]}`.
pub fn load_custom_tasks(lts: &AugmentedLts, document: &str) -> Result<TaskSet, LtsError> {
    let doc: CustomDoc = serde_json::from_str(document).map_err(|e| LtsError::Schema(e.to_string()))?;
    Ok(TaskSet { notion: Notion::Custom, tasks: tasks_from_docs(lts, &doc.tasks)?, bounded: lts.truncated })
}

/// Adds the task of all transitions unless the tasks already cover every transition.
pub fn with_progress_task(ts: &TaskSet, lts: &AugmentedLts) -> TaskSet {
    let covered: BTreeSet<usize> = ts.tasks.iter().flat_map(|t| t.members.iter().copied()).collect();
    let mut out = ts.clone();
    if covered.len() < lts.num_transitions() {
        out.tasks.push(Task { name: "Tr".into(), members: (0..lts.num_transitions()).collect() });
    }
    out
}

/// Instruction of an I-task, recovered from its name.
pub fn instruction_of(task: &Task) -> Option<InstrName> {
    task.name.strip_prefix("I:").map(|s| InstrName(s.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ccs_lang::parse_ccs;
    use crate::semantics::explore;

    fn running() -> AugmentedLts {
        explore(&parse_ccs("X|Y where X = a.X + b.X, Y = a.Y + 'b.Y").unwrap(), 100, 100).lts
    }

    fn members(lts: &AugmentedLts, t: &Task) -> Vec<String> {
        t.members.iter().map(|&i| lts.transitions[i].label.to_string()).collect()
    }

    #[test]
    fn component_tasks_of_running_example() {
        let lts = running();
        let ts = extract_tasks(&lts, Notion::C).unwrap();
        let names: Vec<_> = ts.tasks.iter().map(|t| t.name.as_str()).collect();
        assert_eq!(names, vec!["C:L", "C:R"]);
        assert_eq!(members(&lts, &ts.tasks[0]), vec!["a", "b", "tau"]);
        assert_eq!(members(&lts, &ts.tasks[1]), vec!["'b", "a", "tau"]);
    }

    #[test]
    fn synchronisation_tasks_of_running_example() {
        let lts = running();
        let ts = extract_tasks(&lts, Notion::Z).unwrap();
        assert_eq!(ts.tasks.len(), 5);
        assert!(ts.tasks.iter().all(|t| t.members.len() == 1));
        assert!(ts.tasks.iter().any(|t| t.name == "Z:{b@1,b~@1}"));
    }

    #[test]
    fn empty_system_has_no_tasks() {
        let lts = explore(&parse_ccs("0").unwrap(), 10, 10).lts;
        for n in Notion::GLOBAL {
            assert!(extract_tasks(&lts, n).unwrap().tasks.is_empty());
        }
    }

    #[test]
    fn single_component_has_one_component_task() {
        let lts = explore(&parse_ccs("X where X = a.X + b.0").unwrap(), 10, 10).lts;
        for n in [Notion::C, Notion::G] {
            let ts = extract_tasks(&lts, n).unwrap();
            assert_eq!(ts.tasks.len(), 1);
            assert_eq!(ts.tasks[0].members.len(), lts.num_transitions());
        }
    }

    #[test]
    fn progress_task() {
        let lts = running();
        let t = extract_tasks(&lts, Notion::T).unwrap();
        assert_eq!(with_progress_task(&t, &lts), t);
        let empty = TaskSet { notion: Notion::Custom, tasks: vec![], bounded: false };
        assert_eq!(with_progress_task(&empty, &lts).tasks.len(), 1);
        let custom = load_custom_tasks(&lts, r#"{"tasks":[{"name":"b","members":["t1"]}]}"#).unwrap();
        assert_eq!(custom.tasks.len(), 1);
        assert_eq!(with_progress_task(&custom, &lts).tasks.len(), 2);
        assert!(load_custom_tasks(&lts, r#"{"tasks":[]}"#).unwrap().tasks.is_empty());
        assert!(load_custom_tasks(&lts, r#"{"tasks":[{"name":"b","members":["t99"]}]}"#).is_err());
    }
}
