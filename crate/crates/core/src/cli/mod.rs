//! Command-line front end: subcommands over `.ccs` specifications and LTS files, plus the corpus
//! runner that checks a manifest of expected verdicts.

pub mod corpus;
pub mod select;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Deserialize;
use serde_json::json;

use crate::ccs_lang::{parse_ccs, CcsError};
use crate::lts_model::{goal_states, load_lts, save_lts, validate_side_conditions, AugmentedLts, LtsError, Notion, Status, TaskSet};
use crate::paths::{
    classify_finite, classify_lasso, prefix_certificate, Assumption, AssumptionText, LassoDoc, PathError, PrefixDoc,
};
use crate::semantics::{explore, DEFAULT_DEPTH_CAP, DEFAULT_STATE_CAP};
use crate::tasks::{extract_tasks, load_custom_tasks, with_progress_task};
use crate::verify::{
    eval_ltl, fair_extend, fair_lasso, hierarchy_check, liveness, load_weights, simulate,
    strong_fairness_formula, weak_fairness_formula, Bounds, Formula, HierarchyBounds, VerifyError, DEFAULT_SEED,
};

pub use select::{resolve_steps, PathSpec};

/// Environment variable overriding the default simulation seed.
pub const SEED_ENV: &str = "FAIRLAB_SEED";

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{path}: {err}")]
    Io { path: String, err: std::io::Error },
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {err}")]
    Ccs { path: String, err: CcsError },
    #[error("{path}: {count} diagnostic(s)\n{text}")]
    Diagnostics { path: String, count: usize, text: String },
    #[error(transparent)]
    Lts(#[from] LtsError),
    #[error(transparent)]
    Path(#[from] PathError),
    #[error(transparent)]
    Verify(#[from] VerifyError),
    #[error("bad manifest {path}: {msg}")]
    Manifest { path: String, msg: String },
}

impl CliError {
    /// 2 for usage and I/O problems, 1 for everything found wrong in the inputs themselves.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io { .. } | CliError::Usage(_) | CliError::Manifest { .. } => 2,
            _ => 1,
        }
    }
}

pub(crate) fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|err| CliError::Io { path: path.display().to_string(), err })
}

/// Exploration caps, defaulted from an optional TOML config file.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Caps {
    #[serde(default = "default_state_cap")]
    pub state_cap: usize,
    #[serde(default = "default_depth_cap")]
    pub depth_cap: usize,
}

fn default_state_cap() -> usize {
    DEFAULT_STATE_CAP
}

fn default_depth_cap() -> usize {
    DEFAULT_DEPTH_CAP
}

impl Default for Caps {
    fn default() -> Self {
        Caps { state_cap: DEFAULT_STATE_CAP, depth_cap: DEFAULT_DEPTH_CAP }
    }
}

impl Caps {
    pub fn from_config(path: &Path) -> Result<Caps, CliError> {
        toml::from_str(&read(path)?).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
    }
}

/// A `.ccs` file explored under `caps`, or an LTS JSON document.
pub fn load_system(path: &Path, caps: Caps) -> Result<AugmentedLts, CliError> {
    let text = read(path)?;
    if path.extension().and_then(|e| e.to_str()) == Some("ccs") {
        let spec = parse_ccs(&text).map_err(|err| CliError::Ccs { path: path.display().to_string(), err })?;
        if !spec.diagnostics.is_empty() {
            let text = spec.diagnostics.iter().map(|d| format!("  {d}")).collect::<Vec<_>>().join("\n");
            return Err(CliError::Diagnostics { path: path.display().to_string(), count: spec.diagnostics.len(), text });
        }
        Ok(explore(&spec, caps.state_cap, caps.depth_cap).lts)
    } else {
        Ok(load_lts(&text)?)
    }
}

/// Parses `--assume` text; a custom task file is resolved against `base`.
pub fn resolve_assumption(text: &str, lts: &AugmentedLts, base: &Path) -> Result<Assumption, CliError> {
    let t = AssumptionText::parse(text)?;
    let taskset = match &t.custom_file {
        Some(f) => Some(load_custom_tasks(lts, &read(&base.join(f))?)?),
        None => None,
    };
    Ok(Assumption { kind: t.kind, taskset, reactive: t.reactive })
}

/// A task set given as a global notion letter or `custom=<file>`.
pub fn resolve_taskset(text: &str, lts: &AugmentedLts, base: &Path) -> Result<TaskSet, CliError> {
    if let Some(f) = text.strip_prefix("custom=") {
        return Ok(load_custom_tasks(lts, &read(&base.join(f))?)?);
    }
    match Notion::parse(text) {
        Some(n) if n != Notion::Custom => Ok(extract_tasks(lts, n)?),
        _ => Err(CliError::Usage(format!("unknown task notion {text:?}"))),
    }
}

/// Seed from the environment, if set, else the default.
pub fn default_seed() -> Result<u64, CliError> {
    match std::env::var(SEED_ENV) {
        Ok(v) => parse_seed(&v).ok_or_else(|| CliError::Usage(format!("{SEED_ENV}={v:?} is not a 64-bit integer"))),
        Err(_) => Ok(DEFAULT_SEED),
    }
}

fn parse_seed(v: &str) -> Option<u64> {
    let v = v.trim();
    match v.strip_prefix("0x").or_else(|| v.strip_prefix("0X")) {
        Some(h) => u64::from_str_radix(h, 16).ok(),
        None => v.parse().ok(),
    }
}

#[derive(Debug, Parser)]
#[command(name = "fairlab", version, about = "Liveness of CCS-fragment systems under progress, justness and fairness assumptions")]
pub struct Cli {
    /// TOML file with default `state_cap` and `depth_cap`.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct CapArgs {
    /// Maximum number of explored states for `.ccs` inputs.
    #[arg(long)]
    pub state_cap: Option<usize>,
    /// Maximum exploration depth for `.ccs` inputs.
    #[arg(long)]
    pub depth_cap: Option<usize>,
}

#[derive(Debug, Args)]
pub struct SystemArgs {
    /// A `.ccs` specification or an LTS JSON file.
    pub system: PathBuf,
    #[command(flatten)]
    pub caps: CapArgs,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Explore a specification and write its LTS as JSON.
    Ccs2lts {
        input: PathBuf,
        /// Output file (stdout if absent).
        #[arg(short, long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        caps: CapArgs,
    },
    /// Decide a liveness property under an assumption; prints the verdict as JSON.
    Liveness {
        #[command(flatten)]
        sys: SystemArgs,
        /// Name of a `% goal` directive (or a goal listed in the LTS JSON).
        #[arg(long)]
        goal: String,
        /// P | just | J:y | W:y | S:y | SWI | Fu | ST | Pr, y in A T I Z C G or custom=<file>; optional `,reactive`.
        #[arg(long)]
        assume: String,
        /// Length of the loop-free witness sought on truncated systems.
        #[arg(long, default_value_t = Bounds::default().loopfree)]
        loopfree: usize,
    },
    /// Check a manifest of expected verdicts and print the verdict matrix.
    Corpus {
        #[arg(long, default_value = "corpus/corpus.json")]
        manifest: PathBuf,
        /// Only entries whose id matches this glob.
        #[arg(long)]
        filter: Option<String>,
    },
    /// Print the task set of a notion (or a custom task file).
    Tasks {
        #[command(flatten)]
        sys: SystemArgs,
        /// A T I Z C G or custom=<file>.
        #[arg(long)]
        notion: String,
        /// Add the task of all transitions if the tasks do not cover them.
        #[arg(long)]
        with_progress: bool,
    },
    /// Classify a lasso or finite path under an assumption.
    Classify {
        #[command(flatten)]
        sys: SystemArgs,
        /// JSON `{"start"?, "stem", "cycle"}` (lasso) or `{"start"?, "steps"}` (finite path).
        #[arg(long)]
        path: PathBuf,
        /// Path-level assumption: P | just | J:y | W:y | S:y | SWI, with optional `,reactive`.
        #[arg(long)]
        assume: String,
        /// Also report, per task of this notion, whether it is enabled throughout and occurs.
        #[arg(long)]
        certificate: Option<String>,
    },
    /// Extend a path with the fair scheduler.
    Extend {
        #[command(flatten)]
        sys: SystemArgs,
        /// A T I Z C G or custom=<file>.
        #[arg(long)]
        tasks: String,
        /// Number of scheduler steps to take.
        #[arg(long, default_value_t = 20)]
        steps: usize,
        /// Finite path to start from (the initial state if absent).
        #[arg(long)]
        prefix: Option<PathBuf>,
        /// Continue until the scheduler repeats and print the lasso.
        #[arg(long)]
        lasso: bool,
    },
    /// Search bounded lassos fair under one assumption but not another.
    Hierarchy {
        #[command(flatten)]
        sys: SystemArgs,
        /// Assumption expected to admit fewer fair paths.
        #[arg(long)]
        stronger: String,
        /// Assumption expected to admit more fair paths.
        #[arg(long)]
        weaker: String,
        /// Maximum stem length of enumerated lassos.
        #[arg(long, default_value_t = HierarchyBounds::default().stem)]
        stem: usize,
        /// Maximum cycle length of enumerated lassos.
        #[arg(long, default_value_t = HierarchyBounds::default().cycle)]
        cycle: usize,
    },
    /// Evaluate an LTL formula, or the weak/strong fairness formula, on a lasso.
    Ltl {
        #[command(flatten)]
        sys: SystemArgs,
        /// Lasso JSON `{"start"?, "stem", "cycle"}`.
        #[arg(long)]
        path: PathBuf,
        /// A T I Z C G or custom=<file>; names the propositions en(..) and occ(..).
        #[arg(long)]
        tasks: String,
        /// Formula text, or `weak` / `strong` for the fairness formulas of the task set.
        #[arg(long)]
        formula: String,
    },
    /// Estimate the probability of reaching a goal by random runs.
    Simulate {
        #[command(flatten)]
        sys: SystemArgs,
        /// Name of a `% goal` directive (or a goal listed in the LTS JSON).
        #[arg(long)]
        goal: String,
        /// JSON `{"<transition id>": weight}`; unlisted transitions weigh 1.
        #[arg(long)]
        weights: Option<PathBuf>,
        #[arg(long, default_value_t = 200)]
        horizon: usize,
        #[arg(long, default_value_t = 2000)]
        runs: usize,
        /// Defaults to $FAIRLAB_SEED, else 0xC0FFEE.
        #[arg(long)]
        seed: Option<String>,
    },
    /// Check the structural side conditions of the system.
    Validate {
        #[command(flatten)]
        sys: SystemArgs,
    },
}

fn caps_of(base: Caps, a: &CapArgs) -> Caps {
    Caps { state_cap: a.state_cap.unwrap_or(base.state_cap), depth_cap: a.depth_cap.unwrap_or(base.depth_cap) }
}

fn pretty(v: &serde_json::Value) -> String {
    serde_json::to_string_pretty(v).expect("json values serialise")
}

/// Runs one command, writing results to `out` and warnings to `err`; returns the exit code.
pub fn run(cli: Cli, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, CliError> {
    let base = match &cli.config {
        Some(p) => Caps::from_config(p)?,
        None => Caps::default(),
    };
    let here = Path::new(".");
    let io = |e: std::io::Error| CliError::Io { path: "<stdout>".into(), err: e };
    let load = |s: &SystemArgs, err: &mut dyn Write| -> Result<AugmentedLts, CliError> {
        let lts = load_system(&s.system, caps_of(base, &s.caps))?;
        if lts.truncated {
            writeln!(err, "warning: {} explored only partially (truncated at the caps)", s.system.display()).map_err(io)?;
        }
        Ok(lts)
    };
    match cli.command {
        Command::Ccs2lts { input, out: dest, caps } => {
            let lts = load_system(&input, caps_of(base, &caps))?;
            if lts.truncated {
                writeln!(err, "warning: {} explored only partially (truncated at the caps)", input.display()).map_err(io)?;
            }
            let text = save_lts(&lts);
            match dest {
                Some(p) => fs::write(&p, text + "\n").map_err(|err| CliError::Io { path: p.display().to_string(), err })?,
                None => writeln!(out, "{text}").map_err(io)?,
            }
            Ok(0)
        }
        Command::Liveness { sys, goal, assume, loopfree } => {
            let lts = load(&sys, err)?;
            let a = resolve_assumption(&assume, &lts, here)?;
            let v = liveness(&lts, &goal, &a, Bounds { loopfree })?;
            writeln!(out, "{}", pretty(&v.to_json(&lts))).map_err(io)?;
            Ok(0)
        }
        Command::Corpus { manifest, filter } => {
            let report = corpus::run_corpus(&manifest, filter.as_deref())?;
            write!(out, "{}", report.text).map_err(io)?;
            Ok(if report.mismatches == 0 { 0 } else { 1 })
        }
        Command::Tasks { sys, notion, with_progress } => {
            let lts = load(&sys, err)?;
            let mut ts = resolve_taskset(&notion, &lts, here)?;
            if with_progress {
                ts = with_progress_task(&ts, &lts);
            }
            let tasks: Vec<_> = ts
                .tasks
                .iter()
                .map(|t| json!({"name": t.name, "members": t.members.iter().map(|&m| lts.transitions[m].id.clone()).collect::<Vec<_>>()}))
                .collect();
            writeln!(out, "{}", pretty(&json!({"notion": ts.notion.to_string(), "bounded": ts.bounded, "tasks": tasks}))).map_err(io)?;
            Ok(0)
        }
        Command::Classify { sys, path, assume, certificate } => {
            let lts = load(&sys, err)?;
            let a = resolve_assumption(&assume, &lts, here)?;
            let spec: PathSpec = serde_json::from_str(&read(&path)?).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
            let (fair, prefix) = match spec.resolve(&lts)? {
                select::Resolved::Lasso(l) => (classify_lasso(&lts, &l, &a)?, None),
                select::Resolved::Finite(p) => (classify_finite(&lts, &p, &a)?, Some(p)),
            };
            let mut doc = json!({"assumption": a.name(), "fair": fair});
            if let Some(n) = certificate {
                let p = prefix.ok_or_else(|| CliError::Usage("certificates are about finite paths".into()))?;
                let ts = resolve_taskset(&n, &lts, here)?;
                let certs: Vec<_> = ts
                    .tasks
                    .iter()
                    .map(|t| {
                        let c = prefix_certificate(&lts, &p, t);
                        json!({"task": t.name, "enabled_everywhere": c.enabled_everywhere, "occurs": c.occurs, "length": c.length})
                    })
                    .collect();
                doc["certificates"] = json!(certs);
            }
            writeln!(out, "{}", pretty(&doc)).map_err(io)?;
            Ok(0)
        }
        Command::Extend { sys, tasks, steps, prefix, lasso } => {
            let lts = load(&sys, err)?;
            let ts = resolve_taskset(&tasks, &lts, here)?;
            let start = match prefix {
                Some(p) => {
                    let spec: PathSpec = serde_json::from_str(&read(&p)?).map_err(|e| CliError::Usage(format!("{}: {e}", p.display())))?;
                    match spec.resolve(&lts)? {
                        select::Resolved::Finite(p) => p,
                        select::Resolved::Lasso(_) => return Err(CliError::Usage("--prefix takes a finite path".into())),
                    }
                }
                None => crate::paths::PathPrefix::empty(*lts.initial.first().ok_or_else(|| CliError::Usage("no initial state".into()))?),
            };
            let doc = if lasso {
                match fair_lasso(&lts, &start, &ts, steps) {
                    Some(l) => serde_json::to_value(LassoDoc::from_lasso(&lts, &l)).expect("serialisable"),
                    None => json!({"lasso": null, "prefix": PrefixDoc::from_prefix(&lts, &fair_extend(&lts, &start, &ts, steps))}),
                }
            } else {
                serde_json::to_value(PrefixDoc::from_prefix(&lts, &fair_extend(&lts, &start, &ts, steps))).expect("serialisable")
            };
            writeln!(out, "{}", pretty(&doc)).map_err(io)?;
            Ok(0)
        }
        Command::Hierarchy { sys, stronger, weaker, stem, cycle } => {
            let lts = load(&sys, err)?;
            let s = resolve_assumption(&stronger, &lts, here)?;
            let w = resolve_assumption(&weaker, &lts, here)?;
            let r = hierarchy_check(&lts, &s, &w, HierarchyBounds { stem, cycle })?;
            let doc = json!({
                "stronger": r.stronger,
                "weaker": r.weaker,
                "arrow": r.arrow.as_ref().map(|cs| cs.iter().map(|c| c.to_string()).collect::<Vec<_>>()),
                "checked": r.checked,
                "skipped": r.skipped,
                "violations": r.violations.len(),
                "first_violation": r.violations.first().map(|l| LassoDoc::from_lasso(&lts, l)),
            });
            writeln!(out, "{}", pretty(&doc)).map_err(io)?;
            Ok(0)
        }
        Command::Ltl { sys, path, tasks, formula } => {
            let lts = load(&sys, err)?;
            let ts = resolve_taskset(&tasks, &lts, here)?;
            let spec: PathSpec = serde_json::from_str(&read(&path)?).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
            let l = match spec.resolve(&lts)? {
                select::Resolved::Lasso(l) => l,
                select::Resolved::Finite(_) => return Err(CliError::Usage("LTL formulas are evaluated on lassos".into())),
            };
            let f = match formula.as_str() {
                "weak" => weak_fairness_formula(&ts),
                "strong" => strong_fairness_formula(&ts),
                text => Formula::parse(text)?,
            };
            writeln!(out, "{}", pretty(&json!({"holds": eval_ltl(&lts, &ts, &l, &f)?}))).map_err(io)?;
            Ok(0)
        }
        Command::Simulate { sys, goal, weights, horizon, runs, seed } => {
            let lts = load(&sys, err)?;
            let g = goal_states(&lts, lts.goal(&goal)?)?;
            let w = match weights {
                Some(p) => load_weights(&lts, &read(&p)?)?,
                None => Default::default(),
            };
            let seed = match seed {
                Some(s) => parse_seed(&s).ok_or_else(|| CliError::Usage(format!("bad seed {s:?}")))?,
                None => default_seed()?,
            };
            let est = simulate(&lts, &g, &w, horizon, runs, seed)?;
            writeln!(out, "{}", pretty(&serde_json::to_value(est).expect("serialisable"))).map_err(io)?;
            Ok(0)
        }
        Command::Validate { sys } => {
            let lts = load(&sys, err)?;
            let r = validate_side_conditions(&lts);
            writeln!(out, "{}", pretty(&serde_json::to_value(&r).expect("serialisable"))).map_err(io)?;
            let failed = r.results.iter().any(|c| matches!(c.status, Status::Fail { .. }));
            Ok(if failed { 1 } else { 0 })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seeds_parse_in_hex_and_decimal() {
        assert_eq!(parse_seed("0xC0FFEE"), Some(0xC0FFEE));
        assert_eq!(parse_seed("42"), Some(42));
        assert_eq!(parse_seed("x"), None);
    }

    #[test]
    fn exit_codes() {
        assert_eq!(CliError::Usage("x".into()).exit_code(), 2);
        assert_eq!(CliError::Lts(LtsError::UnknownGoal("G".into())).exit_code(), 1);
    }

    #[test]
    fn config_defaults() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("c.toml");
        fs::write(&p, "state_cap = 64\n").unwrap();
        assert_eq!(Caps::from_config(&p).unwrap(), Caps { state_cap: 64, depth_cap: DEFAULT_DEPTH_CAP });
        fs::write(&p, "bogus = 1\n").unwrap();
        assert!(Caps::from_config(&p).is_err());
    }
}
