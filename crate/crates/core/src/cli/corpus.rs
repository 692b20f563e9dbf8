//! Manifest-driven regression corpus: every entry names a system and the verdicts expected of it.
//! Entries are checked in parallel; the report lists them in manifest order.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Deserialize;

use super::select::{PathSpec, Resolved};
use super::{load_system, read, resolve_assumption, resolve_taskset, Caps, CliError};
use crate::ccs_lang::InstrName;
use crate::lts_model::{goal_states, validate_side_conditions, AugmentedLts, Status};
use crate::paths::{classify_finite, classify_lasso, prefix_certificate, requested, Assumption, AssumptionKind, Lasso, PathPrefix};
use crate::verify::{
    agef, fair_extend, fair_lasso, hierarchy_check, liveness, load_weights, loopfree_witness, simulate, Bounds,
    HierarchyBounds, DEFAULT_SEED,
};

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    pub entries: Vec<Entry>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Entry {
    pub id: String,
    /// `.ccs` or LTS JSON, relative to the manifest.
    pub source: String,
    /// What the entry demonstrates, in plain words.
    pub note: String,
    pub state_cap: Option<usize>,
    pub depth_cap: Option<usize>,
    pub explore: Option<ExploreExp>,
    #[serde(default)]
    pub liveness: Vec<LivenessExp>,
    #[serde(default)]
    pub classify: Vec<ClassifyExp>,
    #[serde(default)]
    pub certificates: Vec<CertificateExp>,
    #[serde(default)]
    pub loopfree: Vec<LoopfreeExp>,
    #[serde(default)]
    pub agef: Vec<AgefExp>,
    #[serde(default)]
    pub requested: Vec<RequestedExp>,
    /// Expected number of tasks per notion (`A`..`G` or `custom=<file>`).
    #[serde(default)]
    pub tasks: BTreeMap<String, usize>,
    #[serde(default)]
    pub simulate: Vec<SimulateExp>,
    #[serde(default)]
    pub hierarchy: Vec<HierarchyExp>,
    /// Expected status (`pass`, `fail`, `skipped`, `bounded`) per side condition, e.g. `(1)`.
    #[serde(default)]
    pub validate: BTreeMap<String, String>,
    #[serde(default)]
    pub extend: Vec<ExtendExp>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExploreExp {
    pub states: Option<usize>,
    pub transitions: Option<usize>,
    pub truncated: bool,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LivenessExp {
    pub goal: String,
    /// Assumption text to `yes`, `no` or `bounded-unknown`.
    pub expect: BTreeMap<String, String>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassifyExp {
    pub name: String,
    pub path: PathSpec,
    /// Assumption text to expected fairness.
    pub expect: BTreeMap<String, bool>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CertificateExp {
    pub path: PathSpec,
    pub notion: String,
    /// A task name, or `*` for every task of the notion.
    pub task: String,
    pub enabled_everywhere: Option<bool>,
    pub occurs: Option<bool>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LoopfreeExp {
    pub goal: String,
    pub bound: usize,
    pub exists: bool,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AgefExp {
    pub goal: String,
    #[serde(default)]
    pub reactive: bool,
    pub expect: bool,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RequestedExp {
    pub instr: String,
    /// The state reached by this finite path.
    pub at: PathSpec,
    pub expect: bool,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateExp {
    pub goal: String,
    pub weights: Option<String>,
    pub horizon: usize,
    pub runs: usize,
    pub seed: Option<u64>,
    pub min: Option<f64>,
    pub max: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HierarchyExp {
    pub stronger: String,
    pub weaker: String,
    pub violation: bool,
    /// A lasso that must be among the violations.
    pub witness: Option<PathSpec>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExtendExp {
    pub tasks: String,
    pub steps: usize,
    pub prefix: Option<PathSpec>,
    /// Expected labels of the appended steps.
    pub labels: Option<Vec<String>>,
    /// Expect the scheduler to close a strongly fair lasso.
    pub lasso: Option<bool>,
}

/// Checks of one entry, as report lines; a line starting with `MISMATCH` is a failure.
#[derive(Debug, Clone)]
pub struct EntryResult {
    pub id: String,
    pub lines: Vec<String>,
    pub checks: usize,
    pub mismatches: usize,
    /// Liveness cells: (goal, assumption) to the verdict found, suffixed `*` on mismatch.
    pub cells: BTreeMap<(String, String), String>,
}

#[derive(Debug, Clone)]
pub struct CorpusReport {
    pub text: String,
    pub entries: Vec<EntryResult>,
    pub checks: usize,
    pub mismatches: usize,
}

pub fn load_manifest(path: &Path) -> Result<Manifest, CliError> {
    serde_json::from_str(&read(path)?).map_err(|e| CliError::Manifest { path: path.display().to_string(), msg: e.to_string() })
}

impl Entry {
    pub fn caps(&self) -> Caps {
        let d = Caps::default();
        Caps { state_cap: self.state_cap.unwrap_or(d.state_cap), depth_cap: self.depth_cap.unwrap_or(d.depth_cap) }
    }

    pub fn load(&self, base: &Path) -> Result<AugmentedLts, CliError> {
        load_system(&base.join(&self.source), self.caps())
    }
}

/// Glob over entry ids: `*` any run, `?` one character.
pub fn glob_match(pat: &str, s: &str) -> bool {
    fn go(p: &[char], s: &[char]) -> bool {
        match p.split_first() {
            None => s.is_empty(),
            Some(('*', rest)) => (0..=s.len()).any(|k| go(rest, &s[k..])),
            Some(('?', rest)) => !s.is_empty() && go(rest, &s[1..]),
            Some((c, rest)) => s.first() == Some(c) && go(rest, &s[1..]),
        }
    }
    let p: Vec<char> = pat.chars().collect();
    let s: Vec<char> = s.chars().collect();
    go(&p, &s)
}

/// The fixed matrix columns; other assumptions of a row are listed after it.
pub fn matrix_columns() -> Vec<String> {
    let mut v = vec!["P".to_string(), "just".to_string()];
    for k in ["J", "W", "S"] {
        for n in ["A", "T", "I", "Z", "C", "G"] {
            v.push(format!("{k}:{n}"));
        }
    }
    v.extend(["SWI", "Fu", "ST", "Pr"].map(String::from));
    v
}

/// Runs every entry whose id matches `filter` and renders the report.
pub fn run_corpus(manifest_path: &Path, filter: Option<&str>) -> Result<CorpusReport, CliError> {
    let manifest = load_manifest(manifest_path)?;
    let base: PathBuf = manifest_path.parent().map(Path::to_path_buf).unwrap_or_default();
    let mut ids = BTreeSet::new();
    for e in &manifest.entries {
        if !ids.insert(&e.id) {
            return Err(CliError::Manifest { path: manifest_path.display().to_string(), msg: format!("duplicate id {}", e.id) });
        }
    }
    let selected: Vec<&Entry> = manifest.entries.iter().filter(|e| filter.is_none_or(|f| glob_match(f, &e.id))).collect();
    let entries: Vec<EntryResult> = selected.par_iter().map(|e| run_entry(e, &base)).collect();
    let checks = entries.iter().map(|r| r.checks).sum();
    let mismatches = entries.iter().map(|r| r.mismatches).sum();
    let text = render(&entries, checks, mismatches);
    Ok(CorpusReport { text, entries, checks, mismatches })
}

fn render(entries: &[EntryResult], checks: usize, mismatches: usize) -> String {
    let cols = matrix_columns();
    let abbrev = |v: &str| match v.trim_end_matches('*') {
        "yes" => "y",
        "no" => "n",
        "bounded-unknown" => "?",
        _ => "!",
    };
    let rows: Vec<(String, &BTreeMap<(String, String), String>, String)> = entries
        .iter()
        .flat_map(|r| {
            let goals: BTreeSet<&String> = r.cells.keys().map(|(g, _)| g).collect();
            goals.into_iter().map(move |g| (format!("{} {}", r.id, g), &r.cells, g.clone()))
        })
        .collect();
    let width = rows.iter().map(|(n, _, _)| n.len()).max().unwrap_or(0).max(4);
    let mut out = String::new();
    let _ = writeln!(out, "verdict matrix (y yes, n no, ? bounded-unknown, ! error, * mismatch)");
    let _ = writeln!(out, "{:width$}  {}", "", cols.join(" "));
    for (name, cells, goal) in &rows {
        let mut line = format!("{name:width$} ");
        let mut extra = Vec::new();
        for c in &cols {
            let cell = match cells.get(&(goal.clone(), c.clone())) {
                Some(v) => format!("{}{}", abbrev(v), if v.ends_with('*') { "*" } else { "" }),
                None => "-".into(),
            };
            let _ = write!(line, " {cell:>w$}", w = c.len());
        }
        for ((g, a), v) in cells.iter() {
            if g == goal && !cols.contains(a) {
                extra.push(format!("{a}={v}"));
            }
        }
        if !extra.is_empty() {
            let _ = write!(line, "  {}", extra.join(" "));
        }
        let _ = writeln!(out, "{}", line.trim_end());
    }
    let _ = writeln!(out);
    for r in entries {
        let status = if r.mismatches == 0 { "ok" } else { "FAIL" };
        let _ = writeln!(out, "{status:4} {} ({} checks)", r.id, r.checks);
        for l in &r.lines {
            if l.starts_with("MISMATCH") || l.starts_with("ERROR") {
                let _ = writeln!(out, "     {l}");
            }
        }
    }
    let _ = writeln!(out);
    let noun = if entries.len() == 1 { "entry" } else { "entries" };
    let _ = writeln!(out, "{} {noun}, {} checks, {} mismatches", entries.len(), checks, mismatches);
    out
}

struct Ctx<'a> {
    lts: &'a AugmentedLts,
    base: &'a Path,
    res: EntryResult,
}

impl Ctx<'_> {
    fn check(&mut self, what: String, expected: String, got: Result<String, CliError>) -> bool {
        self.res.checks += 1;
        match got {
            Ok(g) if g == expected => {
                self.res.lines.push(format!("ok {what}: {g}"));
                true
            }
            Ok(g) => {
                self.res.mismatches += 1;
                self.res.lines.push(format!("MISMATCH {what}: expected {expected}, got {g}"));
                false
            }
            Err(e) => {
                self.res.mismatches += 1;
                self.res.lines.push(format!("ERROR {what}: expected {expected}, got error: {e}"));
                false
            }
        }
    }

    fn finite(&self, p: &PathSpec) -> Result<PathPrefix, CliError> {
        match p.resolve(self.lts)? {
            Resolved::Finite(p) => Ok(p),
            Resolved::Lasso(_) => Err(CliError::Usage("expected a finite path".into())),
        }
    }

    fn lasso(&self, p: &PathSpec) -> Result<Lasso, CliError> {
        match p.resolve(self.lts)? {
            Resolved::Lasso(l) => Ok(l),
            Resolved::Finite(_) => Err(CliError::Usage("expected a lasso".into())),
        }
    }

    fn assumption(&self, text: &str) -> Result<Assumption, CliError> {
        resolve_assumption(text, self.lts, self.base)
    }
}

/// Two lassos denote the same infinite path.
pub fn same_path(a: &Lasso, b: &Lasso) -> bool {
    fn at(l: &Lasso, i: usize) -> usize {
        let s = l.stem.steps.len();
        if i < s {
            l.stem.steps[i]
        } else {
            l.cycle[(i - s) % l.cycle.len()]
        }
    }
    if a.stem.start != b.stem.start || a.cycle.is_empty() || b.cycle.is_empty() {
        return false;
    }
    let n = a.stem.steps.len().max(b.stem.steps.len()) + a.cycle.len() * b.cycle.len();
    (0..n).all(|i| at(a, i) == at(b, i))
}

fn yes_no(b: bool) -> String {
    b.to_string()
}

fn run_entry(e: &Entry, base: &Path) -> EntryResult {
    let res = EntryResult { id: e.id.clone(), lines: Vec::new(), checks: 0, mismatches: 0, cells: BTreeMap::new() };
    let lts = match e.load(base) {
        Ok(l) => l,
        Err(err) => {
            let mut res = res;
            res.checks = 1;
            res.mismatches = 1;
            res.lines.push(format!("ERROR loading {}: {err}", e.source));
            return res;
        }
    };
    let mut c = Ctx { lts: &lts, base, res };

    if let Some(x) = &e.explore {
        if let Some(n) = x.states {
            c.check("states".into(), n.to_string(), Ok(lts.num_states().to_string()));
        }
        if let Some(n) = x.transitions {
            c.check("transitions".into(), n.to_string(), Ok(lts.num_transitions().to_string()));
        }
        c.check("truncated".into(), yes_no(x.truncated), Ok(yes_no(lts.truncated)));
    }

    for l in &e.liveness {
        for (a, want) in &l.expect {
            let got = c.assumption(a).and_then(|asm| Ok(liveness(&lts, &l.goal, &asm, Bounds::default())?.holds.as_str().to_string()));
            let cell = match &got {
                Ok(g) => g.clone(),
                Err(_) => "error".into(),
            };
            let ok = c.check(format!("liveness {} under {a}", l.goal), want.clone(), got);
            c.res.cells.insert((l.goal.clone(), a.clone()), if ok { cell } else { format!("{cell}*") });
        }
    }

    for k in &e.classify {
        for (a, want) in &k.expect {
            let got = (|| -> Result<String, CliError> {
                let asm = c.assumption(a)?;
                Ok(yes_no(match k.path.resolve(&lts)? {
                    Resolved::Lasso(l) => classify_lasso(&lts, &l, &asm)?,
                    Resolved::Finite(p) => classify_finite(&lts, &p, &asm)?,
                }))
            })();
            c.check(format!("path {} under {a}", k.name), yes_no(*want), got);
        }
    }

    for x in &e.certificates {
        let got = (|| -> Result<Vec<(String, bool, bool)>, CliError> {
            let p = c.finite(&x.path)?;
            let ts = resolve_taskset(&x.notion, &lts, base)?;
            let picked: Vec<_> = ts.tasks.iter().filter(|t| x.task == "*" || t.name == x.task).collect();
            if picked.is_empty() {
                return Err(CliError::Usage(format!("no task {}", x.task)));
            }
            Ok(picked
                .into_iter()
                .map(|t| {
                    let cert = prefix_certificate(&lts, &p, t);
                    (t.name.clone(), cert.enabled_everywhere, cert.occurs)
                })
                .collect())
        })();
        match got {
            Ok(v) => {
                for (name, en, occ) in v {
                    if let Some(want) = x.enabled_everywhere {
                        c.check(format!("certificate {name} enabled throughout"), yes_no(want), Ok(yes_no(en)));
                    }
                    if let Some(want) = x.occurs {
                        c.check(format!("certificate {name} occurs"), yes_no(want), Ok(yes_no(occ)));
                    }
                }
            }
            Err(err) => {
                c.check(format!("certificate {}", x.task), "a certificate".into(), Err(err));
            }
        }
    }

    for x in &e.loopfree {
        let got = (|| -> Result<String, CliError> {
            let g = goal_states(&lts, lts.goal(&x.goal)?)?;
            Ok(yes_no(loopfree_witness(&lts, &g, x.bound).is_some()))
        })();
        c.check(format!("loop-free {}-step path avoiding {}", x.bound, x.goal), yes_no(x.exists), got);
    }

    for x in &e.agef {
        let got = (|| -> Result<String, CliError> {
            let g = goal_states(&lts, lts.goal(&x.goal)?)?;
            Ok(yes_no(agef(&lts, &g, x.reactive)))
        })();
        c.check(format!("AGEF {}", x.goal), yes_no(x.expect), got);
    }

    for x in &e.requested {
        let got = (|| -> Result<String, CliError> {
            let p = c.finite(&x.at)?;
            Ok(yes_no(requested(&lts, &InstrName(x.instr.clone()), p.last(&lts))?))
        })();
        c.check(format!("requested {}", x.instr), yes_no(x.expect), got);
    }

    for (n, want) in &e.tasks {
        let got = resolve_taskset(n, &lts, base).map(|ts| ts.tasks.len().to_string());
        c.check(format!("{n} task count"), want.to_string(), got);
    }

    for x in &e.simulate {
        let got = (|| -> Result<f64, CliError> {
            let g = goal_states(&lts, lts.goal(&x.goal)?)?;
            let w = match &x.weights {
                Some(f) => load_weights(&lts, &read(&base.join(f))?)?,
                None => Default::default(),
            };
            Ok(simulate(&lts, &g, &w, x.horizon, x.runs, x.seed.unwrap_or(DEFAULT_SEED))?.estimate)
        })();
        let what = format!("estimate for {} ({} runs, horizon {})", x.goal, x.runs, x.horizon);
        let want = match (x.min, x.max) {
            (Some(lo), Some(hi)) => format!("in [{lo}, {hi}]"),
            (Some(lo), None) => format!(">= {lo}"),
            (None, Some(hi)) => format!("<= {hi}"),
            (None, None) => "any".into(),
        };
        let got = got.map(|p| {
            if x.min.is_none_or(|lo| p >= lo) && x.max.is_none_or(|hi| p <= hi) {
                want.clone()
            } else {
                format!("{p:.4}")
            }
        });
        c.check(what, want, got);
    }

    for x in &e.hierarchy {
        let got = (|| -> Result<(bool, Option<bool>), CliError> {
            let s = c.assumption(&x.stronger)?;
            let w = c.assumption(&x.weaker)?;
            let r = hierarchy_check(&lts, &s, &w, HierarchyBounds::default())?;
            if let Some(why) = r.skipped {
                return Err(CliError::Usage(format!("check skipped: {why}")));
            }
            let found = match &x.witness {
                Some(p) => {
                    let l = c.lasso(p)?;
                    Some(r.violations.iter().any(|v| same_path(v, &l)))
                }
                None => None,
            };
            Ok((!r.violations.is_empty(), found))
        })();
        let what = format!("lassos fair under {} but not {}", x.stronger, x.weaker);
        match got {
            Ok((any, found)) => {
                c.check(what.clone(), yes_no(x.violation), Ok(yes_no(any)));
                if let Some(f) = found {
                    c.check(format!("{what}: named witness found"), "true".into(), Ok(yes_no(f)));
                }
            }
            Err(err) => {
                c.check(what, yes_no(x.violation), Err(err));
            }
        }
    }

    if !e.validate.is_empty() {
        let r = validate_side_conditions(&lts);
        for (cond, want) in &e.validate {
            let got = r
                .results
                .iter()
                .find(|x| x.condition.to_string() == *cond)
                .map(|x| match &x.status {
                    Status::Pass => "pass".to_string(),
                    Status::Fail { .. } => "fail".into(),
                    Status::Skipped { .. } => "skipped".into(),
                    Status::Bounded => "bounded".into(),
                })
                .ok_or_else(|| CliError::Usage(format!("unknown condition {cond}")));
            c.check(format!("side condition {cond}"), want.clone(), got);
        }
    }

    for x in &e.extend {
        let got = (|| -> Result<(Option<String>, Option<bool>), CliError> {
            let ts = resolve_taskset(&x.tasks, &lts, base)?;
            let start = match &x.prefix {
                Some(p) => c.finite(p)?,
                None => PathPrefix::empty(lts.initial[0]),
            };
            let labels = x.labels.as_ref().map(|_| {
                let p = fair_extend(&lts, &start, &ts, x.steps);
                p.steps[start.steps.len()..].iter().map(|&t| lts.transitions[t].label.to_string()).collect::<Vec<_>>().join(" ")
            });
            let lasso = match x.lasso {
                Some(_) => Some(match fair_lasso(&lts, &start, &ts, x.steps) {
                    Some(l) => {
                        let a = Assumption { kind: AssumptionKind::S(ts.notion), taskset: Some(ts.clone()), reactive: false };
                        classify_lasso(&lts, &l, &a)?
                    }
                    None => false,
                }),
                None => None,
            };
            Ok((labels, lasso))
        })();
        let what = format!("fair scheduling for {} over {} steps", x.tasks, x.steps);
        match got {
            Ok((labels, lasso)) => {
                if let (Some(want), Some(g)) = (&x.labels, labels) {
                    c.check(format!("{what}: labels"), want.join(" "), Ok(g));
                }
                if let (Some(want), Some(g)) = (x.lasso, lasso) {
                    c.check(format!("{what}: strongly fair lasso"), yes_no(want), Ok(yes_no(g)));
                }
            }
            Err(err) => {
                c.check(what, "a schedule".into(), Err(err));
            }
        }
    }

    c.res
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn globs() {
        assert!(glob_match("mutex*", "mutex-memory"));
        assert!(glob_match("*", ""));
        assert!(glob_match("a?c", "abc"));
        assert!(!glob_match("a?c", "ac"));
        assert!(!glob_match("mutex", "mutex-memory"));
    }

    #[test]
    fn same_path_sees_through_rotation_and_pumping() {
        let l = Lasso { stem: PathPrefix { start: 0, steps: vec![] }, cycle: vec![1, 2] };
        assert!(same_path(&l, &l.pumped()));
        assert!(!same_path(&l, &Lasso { stem: PathPrefix { start: 0, steps: vec![] }, cycle: vec![2, 1] }));
        let r = Lasso { stem: PathPrefix { start: 0, steps: vec![1] }, cycle: vec![2, 1] };
        assert!(same_path(&l, &r));
    }

    #[test]
    fn columns_cover_the_global_notions() {
        let c = matrix_columns();
        assert_eq!(c.len(), 24);
        assert!(c.contains(&"S:G".to_string()));
    }
}
