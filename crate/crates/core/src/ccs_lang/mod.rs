//! The CCS fragment: syntax, naming of action occurrences, and component paths.

mod lexer;
mod parser;
mod print;
mod wellnamed;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use crate::lts_model::GoalSpec;

pub use parser::{parse_ccs, parse_pattern, parse_state};
pub use print::{canonical, erased, state_key};
pub use wellnamed::{names_of, well_named};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CcsError {
    #[error("syntax error at {line}:{col}: {msg}")]
    Syntax { line: usize, col: usize, msg: String },
    #[error("unbound variable {name} at {line}:{col}")]
    UnboundVariable { name: String, line: usize, col: usize },
    #[error("relabelling map not complement-consistent at {line}:{col}: {msg}")]
    RelabelInconsistent { line: usize, col: usize, msg: String },
    #[error("bad directive on line {line}: {msg}")]
    Directive { line: usize, msg: String },
    #[error("unknown instruction {0}")]
    UnknownInstruction(String),
}

/// Source position, 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Span {
    pub line: usize,
    pub col: usize,
}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

/// A channel name, optionally indexed (`b#3`).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Name {
    pub base: String,
    pub index: Option<u64>,
}

impl Name {
    pub fn plain(base: &str) -> Name {
        Name { base: base.to_string(), index: None }
    }
}

impl fmt::Display for Name {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.index {
            Some(i) => write!(f, "{}#{}", self.base, i),
            None => write!(f, "{}", self.base),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ActionLabel {
    Tau,
    Name(Name),
    CoName(Name),
}

impl ActionLabel {
    pub fn complement(&self) -> ActionLabel {
        match self {
            ActionLabel::Tau => ActionLabel::Tau,
            ActionLabel::Name(n) => ActionLabel::CoName(n.clone()),
            ActionLabel::CoName(n) => ActionLabel::Name(n.clone()),
        }
    }

    pub fn name(&self) -> Option<&Name> {
        match self {
            ActionLabel::Tau => None,
            ActionLabel::Name(n) | ActionLabel::CoName(n) => Some(n),
        }
    }

    pub fn is_tau(&self) -> bool {
        matches!(self, ActionLabel::Tau)
    }

    /// Parses the label encoding `a`, `'a`, `tau`, `b#3`.
    pub fn parse(s: &str) -> Result<ActionLabel, String> {
        let s = s.trim();
        if s == "tau" {
            return Ok(ActionLabel::Tau);
        }
        let (co, rest) = match s.strip_prefix('\'') {
            Some(r) => (true, r),
            None => (false, s),
        };
        let (base, index) = match rest.split_once('#') {
            Some((b, i)) => (b, Some(i.parse::<u64>().map_err(|_| format!("bad index in label {s:?}"))?)),
            None => (rest, None),
        };
        let ok = !base.is_empty()
            && base != "tau"
            && base.chars().all(|c| c.is_alphanumeric() || c == '_');
        if !ok {
            return Err(format!("bad label {s:?}"));
        }
        let n = Name { base: base.to_string(), index };
        Ok(if co { ActionLabel::CoName(n) } else { ActionLabel::Name(n) })
    }

    /// Fragment used inside generated instruction names: co-names get a `~` suffix.
    pub fn name_stem(&self) -> String {
        match self {
            ActionLabel::Tau => "tau".to_string(),
            ActionLabel::Name(n) => n.to_string(),
            ActionLabel::CoName(n) => format!("{n}~"),
        }
    }
}

impl fmt::Display for ActionLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ActionLabel::Tau => write!(f, "tau"),
            ActionLabel::Name(n) => write!(f, "{n}"),
            ActionLabel::CoName(n) => write!(f, "'{n}"),
        }
    }
}

/// Name of one action-prefix occurrence.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct InstrName(pub String);

impl InstrName {
    /// Generated names carry an `@`; user-given ones never do.
    pub fn is_generated(&self) -> bool {
        self.0.contains('@')
    }
}

impl fmt::Display for InstrName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Path of parallel arms from the root, over `L`/`R`. Hand-written systems may use other strings.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct ComponentPath(pub String);

impl ComponentPath {
    pub fn root() -> Self {
        ComponentPath(String::new())
    }

    pub fn child(&self, side: char) -> Self {
        let mut s = self.0.clone();
        s.push(side);
        ComponentPath(s)
    }

    pub fn is_prefix_of(&self, other: &ComponentPath) -> bool {
        other.0.starts_with(&self.0)
    }
}

impl fmt::Display for ComponentPath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum RelabelRule {
    /// `a -> b`, or `a -> 'b` when `flip` is set.
    Exact { from: Name, to: Name, flip: bool },
    /// `b#i -> c#(i+k)`
    Family { from: String, to: String, offset: u64 },
}

/// Relabelling function; identity outside its rules, extended to co-names by complement.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RelabelFn {
    pub rules: Vec<RelabelRule>,
}

impl RelabelFn {
    fn map_name(&self, n: &Name) -> ActionLabel {
        for r in &self.rules {
            match r {
                RelabelRule::Exact { from, to, flip } if from == n => {
                    return if *flip { ActionLabel::CoName(to.clone()) } else { ActionLabel::Name(to.clone()) };
                }
                RelabelRule::Family { from, to, offset } if *from == n.base => {
                    if let Some(i) = n.index {
                        return ActionLabel::Name(Name { base: to.clone(), index: Some(i + offset) });
                    }
                }
                _ => {}
            }
        }
        ActionLabel::Name(n.clone())
    }

    pub fn apply(&self, l: &ActionLabel) -> ActionLabel {
        match l {
            ActionLabel::Tau => ActionLabel::Tau,
            ActionLabel::Name(n) => self.map_name(n),
            ActionLabel::CoName(n) => self.map_name(n).complement(),
        }
    }

    fn is_finite(&self) -> bool {
        self.rules.iter().all(|r| matches!(r, RelabelRule::Exact { .. }))
    }

    fn domain(&self) -> Vec<Name> {
        self.rules
            .iter()
            .filter_map(|r| match r {
                RelabelRule::Exact { from, .. } => Some(from.clone()),
                RelabelRule::Family { .. } => None,
            })
            .collect()
    }

    /// `other ∘ self` when both are finite maps; `None` means the composite is the identity.
    pub fn then(&self, other: &RelabelFn) -> Option<Option<RelabelFn>> {
        if !self.is_finite() || !other.is_finite() {
            return None;
        }
        let mut dom: Vec<Name> = self.domain();
        dom.extend(other.domain());
        dom.sort();
        dom.dedup();
        let mut rules = Vec::new();
        for n in dom {
            let img = other.apply(&self.map_name(&n));
            match img {
                ActionLabel::Name(m) if m == n => {}
                ActionLabel::Name(m) => rules.push(RelabelRule::Exact { from: n, to: m, flip: false }),
                ActionLabel::CoName(m) => rules.push(RelabelRule::Exact { from: n, to: m, flip: true }),
                ActionLabel::Tau => unreachable!("relabelling never yields tau from a name"),
            }
        }
        Some(if rules.is_empty() { None } else { Some(RelabelFn { rules }) })
    }
}

impl fmt::Display for RelabelFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .rules
            .iter()
            .map(|r| match r {
                RelabelRule::Exact { from, to, flip } => {
                    format!("{from}->{}{to}", if *flip { "'" } else { "" })
                }
                RelabelRule::Family { from, to, offset: 0 } => format!("{from}#i->{to}#i"),
                RelabelRule::Family { from, to, offset } => format!("{from}#i->{to}#(i+{offset})"),
            })
            .collect();
        write!(f, "[{}]", parts.join(", "))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Expr {
    Nil,
    Prefix { action: ActionLabel, name: InstrName, body: Arc<Expr> },
    Choice(Arc<Expr>, Arc<Expr>),
    Par(Arc<Expr>, Arc<Expr>),
    Restrict(Arc<Expr>, Name),
    Relabel(Arc<Expr>, Arc<RelabelFn>),
    Var(String),
    Fix { var: String, spec: Arc<RecSpec> },
}

/// Bindings of one recursive specification, in declaration order.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RecSpec {
    pub bindings: Vec<(String, Arc<Expr>)>,
}

impl RecSpec {
    pub fn body(&self, var: &str) -> Option<&Arc<Expr>> {
        self.bindings.iter().find(|(v, _)| v == var).map(|(_, e)| e)
    }
}

impl Expr {
    /// `S(X)` with every bound variable `Y` replaced by `fix_Y S`.
    pub fn unfold(var: &str, spec: &Arc<RecSpec>) -> Option<Arc<Expr>> {
        let body = spec.body(var)?;
        Some(substitute(body, spec))
    }

    /// Collapses nested finite relabellings and drops identity ones.
    pub fn normalize_relabels(e: &Arc<Expr>) -> Arc<Expr> {
        match &**e {
            Expr::Nil | Expr::Var(_) | Expr::Fix { .. } => e.clone(),
            Expr::Prefix { action, name, body } => Arc::new(Expr::Prefix {
                action: action.clone(),
                name: name.clone(),
                body: Expr::normalize_relabels(body),
            }),
            Expr::Choice(a, b) => Arc::new(Expr::Choice(Expr::normalize_relabels(a), Expr::normalize_relabels(b))),
            Expr::Par(a, b) => Arc::new(Expr::Par(Expr::normalize_relabels(a), Expr::normalize_relabels(b))),
            Expr::Restrict(a, n) => Arc::new(Expr::Restrict(Expr::normalize_relabels(a), n.clone())),
            Expr::Relabel(inner, g) => {
                let inner = Expr::normalize_relabels(inner);
                if let Expr::Relabel(core, f) = &*inner {
                    if let Some(comp) = f.then(g) {
                        return match comp {
                            None => core.clone(),
                            Some(h) => Arc::new(Expr::Relabel(core.clone(), Arc::new(h))),
                        };
                    }
                }
                Arc::new(Expr::Relabel(inner, g.clone()))
            }
        }
    }
}

fn substitute(e: &Arc<Expr>, spec: &Arc<RecSpec>) -> Arc<Expr> {
    match &**e {
        Expr::Nil | Expr::Fix { .. } => e.clone(),
        Expr::Var(y) => {
            if spec.body(y).is_some() {
                Arc::new(Expr::Fix { var: y.clone(), spec: spec.clone() })
            } else {
                e.clone()
            }
        }
        Expr::Prefix { action, name, body } => Arc::new(Expr::Prefix {
            action: action.clone(),
            name: name.clone(),
            body: substitute(body, spec),
        }),
        Expr::Choice(a, b) => Arc::new(Expr::Choice(substitute(a, spec), substitute(b, spec))),
        Expr::Par(a, b) => Arc::new(Expr::Par(substitute(a, spec), substitute(b, spec))),
        Expr::Restrict(a, n) => Arc::new(Expr::Restrict(substitute(a, spec), n.clone())),
        Expr::Relabel(a, f) => Arc::new(Expr::Relabel(substitute(a, spec), f.clone())),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum DiagnosticKind {
    UnguardedVariable,
    UnguardedParallel,
    ParallelInBody,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Diagnostic {
    pub kind: DiagnosticKind,
    pub span: Span,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.span, self.message)
    }
}

/// A parsed specification with its instruction naming.
#[derive(Debug, Clone)]
pub struct ProcessSpec {
    pub root: Arc<Expr>,
    pub name_table: BTreeMap<InstrName, (Span, ActionLabel)>,
    pub cmp_map: BTreeMap<InstrName, ComponentPath>,
    /// Prefix nodes in the expanded root (each occurrence of a recursion variable is its own copy).
    pub prefix_count: usize,
    pub nonblocking: BTreeSet<ActionLabel>,
    /// Collapse nested finite relabellings after each step.
    pub normalize: bool,
    pub goals: BTreeMap<String, GoalSpec>,
    pub(crate) diagnostics: Vec<Diagnostic>,
}

/// Fragment diagnostics: guardedness of variables and of parallel composition under choice,
/// and absence of parallel composition in recursive bodies.
pub fn check_fragment(spec: &ProcessSpec) -> Vec<Diagnostic> {
    spec.diagnostics.clone()
}

pub fn cmp_of(spec: &ProcessSpec, i: &InstrName) -> Result<ComponentPath, CcsError> {
    spec.cmp_map.get(i).cloned().ok_or_else(|| CcsError::UnknownInstruction(i.0.clone()))
}

/// Component path of the prefix named `i` inside `e`, if it occurs.
pub fn cmp_in(e: &Expr, i: &InstrName) -> Option<ComponentPath> {
    fn go(e: &Expr, i: &InstrName, path: &ComponentPath) -> Option<ComponentPath> {
        match e {
            Expr::Nil | Expr::Var(_) => None,
            Expr::Prefix { name, body, .. } => {
                if name == i {
                    Some(path.clone())
                } else {
                    go(body, i, path)
                }
            }
            Expr::Choice(a, b) => go(a, i, path).or_else(|| go(b, i, path)),
            Expr::Par(a, b) => go(a, i, &path.child('L')).or_else(|| go(b, i, &path.child('R'))),
            Expr::Restrict(a, _) | Expr::Relabel(a, _) => go(a, i, path),
            Expr::Fix { spec, .. } => spec.bindings.iter().find_map(|(_, b)| go(b, i, path)),
        }
    }
    go(e, i, &ComponentPath::root())
}

/// The subexpression for component `c`, descending through restriction and relabelling.
pub fn project(state: &Arc<Expr>, c: &ComponentPath) -> Option<Arc<Expr>> {
    let mut cur = state.clone();
    for side in c.0.chars() {
        while let Expr::Restrict(b, _) | Expr::Relabel(b, _) = &*cur {
            cur = b.clone();
        }
        cur = match (&*cur, side) {
            (Expr::Par(l, _), 'L') => l.clone(),
            (Expr::Par(_, r), 'R') => r.clone(),
            _ => return None,
        };
    }
    Some(cur)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(src: &str) -> ProcessSpec {
        parse_ccs(src).unwrap()
    }

    fn names(s: &ProcessSpec) -> Vec<String> {
        s.name_table.keys().map(|n| n.0.clone()).collect()
    }

    #[test]
    fn choice_recursion_has_two_names() {
        let s = spec("X where X = a.X + b.0");
        assert!(matches!(&*s.root, Expr::Fix { var, .. } if var == "X"));
        let Expr::Fix { spec: rs, .. } = &*s.root else { unreachable!() };
        assert!(matches!(&**rs.body("X").unwrap(), Expr::Choice(..)));
        assert_eq!(names(&s), vec!["a@1", "b@1"]);
    }

    #[test]
    fn nil_has_no_names() {
        let s = spec("0");
        assert_eq!(*s.root, Expr::Nil);
        assert!(s.name_table.is_empty());
    }

    #[test]
    fn restricted_pair_names_and_components() {
        let s = spec("(X|Y)\\b where X = a.X + b.0, Y = c.Y + 'b.0");
        assert_eq!(names(&s), vec!["a@1", "b@1", "b~@1", "c@1"]);
        let cmp = |n: &str| cmp_of(&s, &InstrName(n.into())).unwrap().0;
        assert_eq!(cmp("a@1"), "L");
        assert_eq!(cmp("b@1"), "L");
        assert_eq!(cmp("c@1"), "R");
        assert_eq!(cmp("b~@1"), "R");
    }

    #[test]
    fn fragment_guarded_recursion_is_clean() {
        assert!(check_fragment(&spec("X where X = a.X")).is_empty());
    }

    #[test]
    fn fragment_unguarded_variable() {
        let d = check_fragment(&spec("X where X = X + a.0"));
        assert_eq!(d.len(), 1);
        assert_eq!(d[0].kind, DiagnosticKind::UnguardedVariable);
    }

    #[test]
    fn fragment_unguarded_parallel_in_body() {
        let d = check_fragment(&spec("X where X = a.(Y|Z) + (P|Q), Y = y.Y, Z = z.Z, P = p.P, Q = q.Q"));
        let unguarded = d.iter().filter(|d| d.kind == DiagnosticKind::UnguardedParallel).count();
        assert_eq!(unguarded, 1);
    }

    #[test]
    fn fragment_unguarded_parallel_in_main() {
        let d = check_fragment(&spec("a.(P|Q) + (P|Q) where P = p.P, Q = q.Q"));
        assert_eq!(d.len(), 1);
        assert_eq!(d[0].kind, DiagnosticKind::UnguardedParallel);
    }

    #[test]
    fn cmp_nested_parallel() {
        let s = spec("a.(P|b.Q)|U where P = p.P, Q = q.Q, U = u.U");
        assert_eq!(cmp_of(&s, &InstrName("a@1".into())).unwrap().0, "L");
        assert_eq!(cmp_of(&s, &InstrName("b@1".into())).unwrap().0, "LR");
        assert_eq!(cmp_of(&s, &InstrName("u@1".into())).unwrap().0, "R");
    }

    #[test]
    fn cmp_single_component() {
        let s = spec("X where X = a.X + b.0");
        for n in ["a@1", "b@1"] {
            assert_eq!(cmp_of(&s, &InstrName(n.into())).unwrap(), ComponentPath::root());
        }
    }

    #[test]
    fn cmp_each_variable_occurrence_is_its_own_copy() {
        let s = spec("a | X where X = a.X");
        assert_eq!(cmp_of(&s, &InstrName("a@1".into())).unwrap().0, "L");
        assert_eq!(cmp_of(&s, &InstrName("a@2".into())).unwrap().0, "R");
        assert!(cmp_of(&s, &InstrName("zz".into())).is_err());
    }

    #[test]
    fn project_cases() {
        let s = spec("(X|Y)\\b where X = a.X + b.0, Y = c.Y + 'b.0");
        let l = project(&s.root, &ComponentPath("L".into())).unwrap();
        assert_eq!(erased(&l), "X");
        assert_eq!(project(&s.root, &ComponentPath::root()).unwrap(), s.root);
        let a = spec("a.0");
        assert!(project(&a.root, &ComponentPath("L".into())).is_none());
    }

    #[test]
    fn label_encoding() {
        for s in ["a", "'a", "tau", "b#3", "'b#0"] {
            assert_eq!(ActionLabel::parse(s).unwrap().to_string(), s);
        }
        assert!(ActionLabel::parse("'tau").is_err());
        let a = ActionLabel::parse("a").unwrap();
        assert_eq!(a.complement().complement(), a);
        assert_eq!(ActionLabel::Tau.complement(), ActionLabel::Tau);
    }

    #[test]
    fn relabel_swap_composes_to_identity() {
        let f = RelabelFn {
            rules: vec![
                RelabelRule::Exact { from: Name::plain("a"), to: Name::plain("c"), flip: false },
                RelabelRule::Exact { from: Name::plain("c"), to: Name::plain("a"), flip: false },
            ],
        };
        assert_eq!(f.then(&f), Some(None));
        assert_eq!(f.apply(&ActionLabel::parse("'a").unwrap()).to_string(), "'c");
    }

    #[test]
    fn relabel_family_shifts_index() {
        let f = RelabelFn { rules: vec![RelabelRule::Family { from: "b".into(), to: "b".into(), offset: 1 }] };
        assert_eq!(f.apply(&ActionLabel::parse("b#4").unwrap()).to_string(), "b#5");
        assert_eq!(f.apply(&ActionLabel::parse("b").unwrap()).to_string(), "b");
        assert!(f.then(&f).is_none());
    }
}
