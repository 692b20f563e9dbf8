use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::sync::Arc;

use super::lexer::{lex, Tok, Token};
use super::{
    ActionLabel, CcsError, ComponentPath, Diagnostic, DiagnosticKind, Expr, InstrName, Name, ProcessSpec, RecSpec,
    RelabelFn, RelabelRule, Span,
};
use crate::lts_model::{GoalPredicate, GoalSpec};

#[derive(Debug, Clone)]
enum Surf {
    Nil,
    /// `body == None` is the bare action shorthand `a` for `a.0`.
    Act { label: ActionLabel, name: Option<String>, body: Option<Box<Surf>>, span: Span },
    Choice(Box<Surf>, Box<Surf>),
    Par(Box<Surf>, Box<Surf>, Span),
    Restrict(Box<Surf>, Name),
    Relabel(Box<Surf>, RelabelFn),
    Var(String, Span),
    Where(Box<Surf>, Vec<Binding>),
}

#[derive(Debug, Clone)]
struct Binding {
    var: String,
    body: Surf,
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
    in_body: bool,
}

fn is_var(s: &str) -> bool {
    s.chars().next().is_some_and(|c| c.is_ascii_uppercase())
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn span(&self) -> Span {
        self.toks[self.pos].span
    }

    fn bump(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T, CcsError> {
        let s = self.span();
        Err(CcsError::Syntax { line: s.line, col: s.col, msg: msg.into() })
    }

    fn expect(&mut self, t: Tok, what: &str) -> Result<(), CcsError> {
        if *self.peek() == t {
            self.bump();
            Ok(())
        } else {
            self.err(format!("expected {what}, found {}", describe(self.peek())))
        }
    }

    fn expr(&mut self) -> Result<Surf, CcsError> {
        let main = self.par()?;
        if matches!(self.peek(), Tok::Ident(w) if w == "where") {
            if self.in_body {
                return self.err("`where` is not allowed inside a recursive body");
            }
            self.bump();
            let mut binds = Vec::new();
            loop {
                let var = match self.peek().clone() {
                    Tok::Ident(v) if is_var(&v) => {
                        self.bump();
                        v
                    }
                    other => return self.err(format!("expected a variable to bind, found {}", describe(&other))),
                };
                self.expect(Tok::Eq, "`=`")?;
                self.in_body = true;
                let body = self.par();
                self.in_body = false;
                let body = body?;
                if binds.iter().any(|b: &Binding| b.var == var) {
                    return self.err(format!("variable {var} bound twice"));
                }
                binds.push(Binding { var, body });
                if *self.peek() == Tok::Comma {
                    self.bump();
                } else {
                    break;
                }
            }
            return Ok(Surf::Where(Box::new(main), binds));
        }
        Ok(main)
    }

    fn par(&mut self) -> Result<Surf, CcsError> {
        let mut left = self.sum()?;
        while *self.peek() == Tok::Bar {
            let span = self.span();
            self.bump();
            let right = self.sum()?;
            left = Surf::Par(Box::new(left), Box::new(right), span);
        }
        Ok(left)
    }

    fn sum(&mut self) -> Result<Surf, CcsError> {
        let mut left = self.pre()?;
        while *self.peek() == Tok::Plus {
            self.bump();
            let right = self.pre()?;
            left = Surf::Choice(Box::new(left), Box::new(right));
        }
        Ok(left)
    }

    fn starts_label(&self) -> bool {
        match self.peek() {
            Tok::Quote => true,
            Tok::Ident(s) => !is_var(s) && s != "where",
            _ => false,
        }
    }

    fn label(&mut self) -> Result<ActionLabel, CcsError> {
        let co = if *self.peek() == Tok::Quote {
            self.bump();
            true
        } else {
            false
        };
        let base = match self.peek().clone() {
            Tok::Ident(s) if !is_var(&s) => {
                self.bump();
                s
            }
            other => return self.err(format!("expected an action, found {}", describe(&other))),
        };
        if base == "tau" {
            if co {
                return self.err("tau has no complement");
            }
            return Ok(ActionLabel::Tau);
        }
        let index = if *self.peek() == Tok::Hash {
            self.bump();
            match self.peek().clone() {
                Tok::Num(n) => {
                    self.bump();
                    Some(n)
                }
                other => return self.err(format!("expected an index, found {}", describe(&other))),
            }
        } else {
            None
        };
        let n = Name { base, index };
        Ok(if co { ActionLabel::CoName(n) } else { ActionLabel::Name(n) })
    }

    fn pre(&mut self) -> Result<Surf, CcsError> {
        if self.starts_label() {
            let span = self.span();
            let label = self.label()?;
            let name = if let Tok::Braced(n) = self.peek().clone() {
                self.bump();
                Some(n)
            } else {
                None
            };
            if *self.peek() == Tok::Dot {
                self.bump();
                let body = self.pre()?;
                return Ok(Surf::Act { label, name, body: Some(Box::new(body)), span });
            }
            return Ok(Surf::Act { label, name, body: None, span });
        }
        self.post()
    }

    fn post(&mut self) -> Result<Surf, CcsError> {
        let mut e = self.atom()?;
        loop {
            match self.peek() {
                Tok::Backslash => {
                    self.bump();
                    let l = self.label()?;
                    match l {
                        ActionLabel::Tau => return self.err("cannot restrict tau"),
                        ActionLabel::Name(n) | ActionLabel::CoName(n) => e = Surf::Restrict(Box::new(e), n),
                    }
                }
                Tok::LBrack => {
                    self.bump();
                    let f = self.relabel_map()?;
                    e = Surf::Relabel(Box::new(e), f);
                }
                _ => return Ok(e),
            }
        }
    }

    fn atom(&mut self) -> Result<Surf, CcsError> {
        let span = self.span();
        match self.peek().clone() {
            Tok::Num(0) => {
                self.bump();
                Ok(Surf::Nil)
            }
            Tok::Ident(v) if is_var(&v) => {
                self.bump();
                Ok(Surf::Var(v, span))
            }
            Tok::LParen => {
                self.bump();
                let e = self.expr()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(e)
            }
            other => self.err(format!("expected a process, found {}", describe(&other))),
        }
    }

    /// One side of a relabelling entry: (co-name?, base, index form).
    fn map_side(&mut self) -> Result<(bool, String, IndexForm), CcsError> {
        let co = if *self.peek() == Tok::Quote {
            self.bump();
            true
        } else {
            false
        };
        let base = match self.peek().clone() {
            Tok::Ident(s) if !is_var(&s) => {
                self.bump();
                s
            }
            other => return self.err(format!("expected an action name, found {}", describe(&other))),
        };
        if base == "tau" {
            return self.err("tau cannot be relabelled");
        }
        if *self.peek() != Tok::Hash {
            return Ok((co, base, IndexForm::None));
        }
        self.bump();
        let form = match self.peek().clone() {
            Tok::Num(n) => {
                self.bump();
                IndexForm::Fixed(n)
            }
            Tok::Ident(i) if i == "i" => {
                self.bump();
                IndexForm::Var(0)
            }
            Tok::LParen => {
                self.bump();
                match self.peek().clone() {
                    Tok::Ident(i) if i == "i" => {
                        self.bump();
                    }
                    other => return self.err(format!("expected `i`, found {}", describe(&other))),
                }
                self.expect(Tok::Plus, "`+`")?;
                let k = match self.peek().clone() {
                    Tok::Num(k) => {
                        self.bump();
                        k
                    }
                    other => return self.err(format!("expected an offset, found {}", describe(&other))),
                };
                self.expect(Tok::RParen, "`)`")?;
                IndexForm::Var(k)
            }
            other => return self.err(format!("expected an index, found {}", describe(&other))),
        };
        Ok((co, base, form))
    }

    fn relabel_map(&mut self) -> Result<RelabelFn, CcsError> {
        let mut rules: Vec<RelabelRule> = Vec::new();
        if *self.peek() == Tok::RBrack {
            self.bump();
            return Ok(RelabelFn { rules });
        }
        loop {
            let at = self.span();
            let inconsistent =
                |msg: String| CcsError::RelabelInconsistent { line: at.line, col: at.col, msg };
            let (co_from, from_base, from_idx) = self.map_side()?;
            self.expect(Tok::Arrow, "`->`")?;
            let (co_to, to_base, to_idx) = self.map_side()?;
            let flip = co_from != co_to;
            let rule = match (from_idx, to_idx) {
                (IndexForm::Var(0), IndexForm::Var(k)) => {
                    if flip {
                        return Err(inconsistent("indexed families cannot change polarity".into()));
                    }
                    RelabelRule::Family { from: from_base, to: to_base, offset: k }
                }
                (IndexForm::Var(_), _) => return self.err("the source of an indexed entry must be `x#i`"),
                (_, IndexForm::Var(_)) => return self.err("`i` used in the target but not in the source"),
                (f, t) => RelabelRule::Exact {
                    from: Name { base: from_base, index: f.fixed() },
                    to: Name { base: to_base, index: t.fixed() },
                    flip,
                },
            };
            let clash = rules.iter().find(|r| same_source(r, &rule));
            if let Some(prev) = clash {
                if *prev != rule {
                    return Err(inconsistent("two entries map the same name (or its complement) differently".into()));
                }
            } else {
                rules.push(rule);
            }
            match self.peek() {
                Tok::Comma => {
                    self.bump();
                }
                Tok::RBrack => {
                    self.bump();
                    break;
                }
                other => return self.err(format!("expected `,` or `]`, found {}", describe(other))),
            }
        }
        Ok(RelabelFn { rules })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum IndexForm {
    None,
    Fixed(u64),
    /// `i + k`
    Var(u64),
}

impl IndexForm {
    fn fixed(self) -> Option<u64> {
        match self {
            IndexForm::Fixed(n) => Some(n),
            _ => None,
        }
    }
}

fn same_source(a: &RelabelRule, b: &RelabelRule) -> bool {
    match (a, b) {
        (RelabelRule::Exact { from: x, .. }, RelabelRule::Exact { from: y, .. }) => x == y,
        (RelabelRule::Family { from: x, .. }, RelabelRule::Family { from: y, .. }) => x == y,
        _ => false,
    }
}

fn describe(t: &Tok) -> String {
    match t {
        Tok::Ident(s) => format!("`{s}`"),
        Tok::Num(n) => format!("`{n}`"),
        Tok::Braced(s) => format!("`{{{s}}}`"),
        Tok::Eof => "end of input".into(),
        other => format!("{other:?}"),
    }
}

fn parse_surface(src: &str) -> Result<Surf, CcsError> {
    let toks = lex(src)?;
    let mut p = Parser { toks, pos: 0, in_body: false };
    let e = p.expr()?;
    if *p.peek() != Tok::Eof {
        return p.err(format!("unexpected {}", describe(p.peek())));
    }
    Ok(e)
}

// ---------------------------------------------------------------------------
// Fragment diagnostics on the surface tree.

fn check_surface(s: &Surf, out: &mut Vec<Diagnostic>) {
    match s {
        Surf::Where(main, binds) => {
            check_main(main, false, out);
            for b in binds {
                check_body(&b.body, false, false, out);
            }
        }
        other => check_main(other, false, out),
    }
}

fn check_main(s: &Surf, in_choice: bool, out: &mut Vec<Diagnostic>) {
    match s {
        Surf::Nil | Surf::Var(..) => {}
        Surf::Act { body, .. } => {
            if let Some(b) = body {
                check_main(b, false, out);
            }
        }
        Surf::Choice(a, b) => {
            check_main(a, true, out);
            check_main(b, true, out);
        }
        Surf::Par(a, b, span) => {
            if in_choice {
                out.push(Diagnostic {
                    kind: DiagnosticKind::UnguardedParallel,
                    span: *span,
                    message: "parallel composition under a choice must be guarded by a prefix".into(),
                });
            }
            check_main(a, false, out);
            check_main(b, false, out);
        }
        Surf::Restrict(a, _) | Surf::Relabel(a, _) => check_main(a, in_choice, out),
        Surf::Where(..) => check_surface(s, out),
    }
}

fn check_body(s: &Surf, guarded: bool, in_choice: bool, out: &mut Vec<Diagnostic>) {
    match s {
        Surf::Nil | Surf::Where(..) => {}
        Surf::Var(v, span) => {
            if !guarded {
                out.push(Diagnostic {
                    kind: DiagnosticKind::UnguardedVariable,
                    span: *span,
                    message: format!("variable {v} is not guarded by a prefix"),
                });
            }
        }
        Surf::Act { body, .. } => {
            if let Some(b) = body {
                check_body(b, true, false, out);
            }
        }
        Surf::Choice(a, b) => {
            check_body(a, guarded, true, out);
            check_body(b, guarded, true, out);
        }
        Surf::Par(a, b, span) => {
            out.push(Diagnostic {
                kind: DiagnosticKind::ParallelInBody,
                span: *span,
                message: "parallel composition inside a recursive body".into(),
            });
            if in_choice {
                out.push(Diagnostic {
                    kind: DiagnosticKind::UnguardedParallel,
                    span: *span,
                    message: "parallel composition under a choice must be guarded by a prefix".into(),
                });
            }
            check_body(a, guarded, false, out);
            check_body(b, guarded, false, out);
        }
        Surf::Restrict(a, _) | Surf::Relabel(a, _) => check_body(a, guarded, in_choice, out),
    }
}

// ---------------------------------------------------------------------------
// Expansion: every occurrence of a bound variable outside the bodies becomes its own
// `fix` copy, holding the bindings reachable from it, with fresh instruction names.

struct Expander {
    counters: HashMap<String, usize>,
    name_table: BTreeMap<InstrName, (Span, ActionLabel)>,
    cmp_map: BTreeMap<InstrName, ComponentPath>,
    prefix_count: usize,
}

impl Expander {
    fn name_for(&mut self, label: &ActionLabel, explicit: &Option<String>, span: Span, path: &ComponentPath) -> InstrName {
        self.prefix_count += 1;
        let n = match explicit {
            Some(n) => InstrName(n.clone()),
            None => {
                let stem = label.name_stem();
                let k = self.counters.entry(stem.clone()).or_insert(0);
                *k += 1;
                InstrName(format!("{stem}@{k}"))
            }
        };
        self.name_table.entry(n.clone()).or_insert((span, label.clone()));
        self.cmp_map.entry(n.clone()).or_insert_with(|| path.clone());
        n
    }

    fn expand(&mut self, s: &Surf, scopes: &[&[Binding]], path: &ComponentPath) -> Result<Arc<Expr>, CcsError> {
        Ok(match s {
            Surf::Nil => Arc::new(Expr::Nil),
            Surf::Act { label, name, body, span } => {
                let n = self.name_for(label, name, *span, path);
                let body = match body {
                    Some(b) => self.expand(b, scopes, path)?,
                    None => Arc::new(Expr::Nil),
                };
                Arc::new(Expr::Prefix { action: label.clone(), name: n, body })
            }
            Surf::Choice(a, b) => {
                let a = self.expand(a, scopes, path)?;
                let b = self.expand(b, scopes, path)?;
                Arc::new(Expr::Choice(a, b))
            }
            Surf::Par(a, b, _) => {
                let a = self.expand(a, scopes, &path.child('L'))?;
                let b = self.expand(b, scopes, &path.child('R'))?;
                Arc::new(Expr::Par(a, b))
            }
            Surf::Restrict(a, n) => Arc::new(Expr::Restrict(self.expand(a, scopes, path)?, n.clone())),
            Surf::Relabel(a, f) => Arc::new(Expr::Relabel(self.expand(a, scopes, path)?, Arc::new(f.clone()))),
            Surf::Where(main, binds) => {
                let mut inner: Vec<&[Binding]> = scopes.to_vec();
                inner.push(binds);
                self.expand(main, &inner, path)?
            }
            Surf::Var(v, span) => {
                let scope = scopes
                    .iter()
                    .rev()
                    .find(|sc| sc.iter().any(|b| b.var == *v))
                    .ok_or_else(|| CcsError::UnboundVariable { name: v.clone(), line: span.line, col: span.col })?;
                self.copy(v, scope, path)?
            }
        })
    }

    fn copy(&mut self, root: &str, scope: &[Binding], path: &ComponentPath) -> Result<Arc<Expr>, CcsError> {
        let mut closure: BTreeSet<String> = BTreeSet::new();
        let mut todo = vec![root.to_string()];
        while let Some(v) = todo.pop() {
            if !closure.insert(v.clone()) {
                continue;
            }
            let b = scope.iter().find(|b| b.var == v).expect("closure stays inside the scope");
            let mut refs = Vec::new();
            body_vars(&b.body, &mut refs);
            for (r, span) in refs {
                if !scope.iter().any(|b| b.var == r) {
                    return Err(CcsError::UnboundVariable { name: r, line: span.line, col: span.col });
                }
                todo.push(r);
            }
        }
        let mut bindings = Vec::new();
        for b in scope.iter().filter(|b| closure.contains(&b.var)) {
            let body = self.body(&b.body, path)?;
            bindings.push((b.var.clone(), body));
        }
        Ok(Arc::new(Expr::Fix { var: root.to_string(), spec: Arc::new(RecSpec { bindings }) }))
    }

    fn body(&mut self, s: &Surf, path: &ComponentPath) -> Result<Arc<Expr>, CcsError> {
        Ok(match s {
            Surf::Nil => Arc::new(Expr::Nil),
            Surf::Var(v, _) => Arc::new(Expr::Var(v.clone())),
            Surf::Act { label, name, body, span } => {
                let n = self.name_for(label, name, *span, path);
                let body = match body {
                    Some(b) => self.body(b, path)?,
                    None => Arc::new(Expr::Nil),
                };
                Arc::new(Expr::Prefix { action: label.clone(), name: n, body })
            }
            Surf::Choice(a, b) => Arc::new(Expr::Choice(self.body(a, path)?, self.body(b, path)?)),
            // Rejected by the fragment check; components inside bodies keep their arm paths.
            Surf::Par(a, b, _) => Arc::new(Expr::Par(self.body(a, &path.child('L'))?, self.body(b, &path.child('R'))?)),
            Surf::Restrict(a, n) => Arc::new(Expr::Restrict(self.body(a, path)?, n.clone())),
            Surf::Relabel(a, f) => Arc::new(Expr::Relabel(self.body(a, path)?, Arc::new(f.clone()))),
            Surf::Where(..) => unreachable!("the parser rejects `where` inside bodies"),
        })
    }
}

fn body_vars(s: &Surf, out: &mut Vec<(String, Span)>) {
    match s {
        Surf::Nil | Surf::Where(..) => {}
        Surf::Var(v, span) => out.push((v.clone(), *span)),
        Surf::Act { body, .. } => {
            if let Some(b) = body {
                body_vars(b, out)
            }
        }
        Surf::Choice(a, b) | Surf::Par(a, b, _) => {
            body_vars(a, out);
            body_vars(b, out);
        }
        Surf::Restrict(a, _) | Surf::Relabel(a, _) => body_vars(a, out),
    }
}

// ---------------------------------------------------------------------------
// Directives: lines starting with `%`.

struct Directives {
    nonblocking: BTreeSet<ActionLabel>,
    normalize: bool,
    goals: BTreeMap<String, GoalSpec>,
}

fn split_directives(src: &str) -> Result<(String, Directives), CcsError> {
    let mut body = String::with_capacity(src.len());
    let mut d = Directives { nonblocking: BTreeSet::new(), normalize: false, goals: BTreeMap::new() };
    for (i, line) in src.lines().enumerate() {
        let t = line.trim_start();
        if let Some(rest) = t.strip_prefix('%') {
            directive(rest.trim(), i + 1, &mut d)?;
            body.push('\n');
        } else {
            body.push_str(line);
            body.push('\n');
        }
    }
    Ok((body, d))
}

fn directive(text: &str, line: usize, d: &mut Directives) -> Result<(), CcsError> {
    let bad = |msg: String| CcsError::Directive { line, msg };
    let (word, rest) = text.split_once(char::is_whitespace).unwrap_or((text, ""));
    match word {
        "normalize" => {
            d.normalize = true;
            Ok(())
        }
        "nonblocking" => {
            for l in rest.split(',') {
                let l = ActionLabel::parse(l).map_err(bad)?;
                d.nonblocking.insert(l);
            }
            Ok(())
        }
        "goal" => {
            let (name, disj) = rest.split_once('=').ok_or_else(|| bad("expected `goal NAME = ...`".into()))?;
            let name = name.trim().to_string();
            if name.is_empty() {
                return Err(bad("goal needs a name".into()));
            }
            let mut spec = GoalSpec { disjuncts: Vec::new() };
            for part in disj.split(';') {
                let (head, arg) = part.split_once(':').ok_or_else(|| bad(format!("bad goal disjunct {part:?}")))?;
                let head = head.trim();
                let arg = arg.trim().to_string();
                let pred = if head == "state" {
                    GoalPredicate::StateIs { expr: arg }
                } else if head == "states" {
                    GoalPredicate::ExplicitStates { states: arg.split_whitespace().map(str::to_string).collect() }
                } else if let Some(p) = head.strip_prefix("at") {
                    let p = p.trim();
                    let p = if p == "-" { "" } else { p };
                    if !p.chars().all(|c| c == 'L' || c == 'R') {
                        return Err(bad(format!("bad component path {p:?}")));
                    }
                    GoalPredicate::ComponentAt { path: p.to_string(), expr: arg }
                } else {
                    return Err(bad(format!("unknown goal form {head:?}")));
                };
                if let GoalPredicate::StateIs { expr } | GoalPredicate::ComponentAt { expr, .. } = &pred {
                    parse_pattern(expr).map_err(|e| bad(format!("goal expression: {e}")))?;
                }
                spec.disjuncts.push(pred);
            }
            d.goals.insert(name, spec);
            Ok(())
        }
        other => Err(bad(format!("unknown directive {other:?}"))),
    }
}

/// Parses a `.ccs` source: `%` directive lines followed by one closed expression.
pub fn parse_ccs(text: &str) -> Result<ProcessSpec, CcsError> {
    let (body, d) = split_directives(text)?;
    let surf = parse_surface(&body)?;
    let mut diagnostics = Vec::new();
    check_surface(&surf, &mut diagnostics);
    diagnostics.sort();
    let mut ex = Expander {
        counters: HashMap::new(),
        name_table: BTreeMap::new(),
        cmp_map: BTreeMap::new(),
        prefix_count: 0,
    };
    let root = ex.expand(&surf, &[], &ComponentPath::root())?;
    Ok(ProcessSpec {
        root,
        name_table: ex.name_table,
        cmp_map: ex.cmp_map,
        prefix_count: ex.prefix_count,
        nonblocking: d.nonblocking,
        normalize: d.normalize,
        goals: d.goals,
        diagnostics,
    })
}

/// Parses a canonical state text (as printed by [`super::canonical`]).
pub fn parse_state(text: &str) -> Result<Arc<Expr>, CcsError> {
    Ok(parse_ccs(text)?.root)
}

/// Parses an expression with free variables and optional names, for matching against states.
pub fn parse_pattern(text: &str) -> Result<Arc<Expr>, CcsError> {
    fn conv(s: &Surf) -> Arc<Expr> {
        Arc::new(match s {
            Surf::Nil => Expr::Nil,
            Surf::Var(v, _) => Expr::Var(v.clone()),
            Surf::Act { label, name, body, .. } => Expr::Prefix {
                action: label.clone(),
                name: InstrName(name.clone().unwrap_or_else(|| "@".into())),
                body: body.as_ref().map(|b| conv(b)).unwrap_or_else(|| Arc::new(Expr::Nil)),
            },
            Surf::Choice(a, b) => Expr::Choice(conv(a), conv(b)),
            Surf::Par(a, b, _) => Expr::Par(conv(a), conv(b)),
            Surf::Restrict(a, n) => Expr::Restrict(conv(a), n.clone()),
            Surf::Relabel(a, f) => Expr::Relabel(conv(a), Arc::new(f.clone())),
            Surf::Where(main, _) => return conv(main),
        })
    }
    Ok(conv(&parse_surface(text)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ccs_lang::{canonical, erased};

    #[test]
    fn precedence_dot_sum_par() {
        let s = parse_ccs("a.b.0 + c.0 | d.0").unwrap();
        assert!(matches!(&*s.root, Expr::Par(l, _) if matches!(&**l, Expr::Choice(..))));
    }

    #[test]
    fn bare_action_is_prefix_of_nil() {
        let s = parse_ccs("a | 'b").unwrap();
        assert_eq!(erased(&s.root), "a.0 | 'b.0");
    }

    #[test]
    fn explicit_names_override() {
        let s = parse_ccs("a{n1}.b.0").unwrap();
        let names: Vec<_> = s.name_table.keys().map(|n| n.0.as_str()).collect();
        assert_eq!(names, vec!["b@1", "n1"]);
    }

    #[test]
    fn syntax_error_has_position() {
        match parse_ccs("a.(b.0") {
            Err(CcsError::Syntax { line: 1, col: 7, .. }) => {}
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn unbound_variable() {
        assert!(matches!(parse_ccs("a.X"), Err(CcsError::UnboundVariable { .. })));
        assert!(matches!(parse_ccs("X where X = a.Y"), Err(CcsError::UnboundVariable { .. })));
    }

    #[test]
    fn inconsistent_relabelling() {
        assert!(matches!(parse_ccs("a.0[a->b, 'a->c]"), Err(CcsError::RelabelInconsistent { .. })));
        assert!(parse_ccs("a.0[a->b, 'a->'b]").is_ok());
    }

    #[test]
    fn family_relabelling() {
        let s = parse_ccs("X where X = b#0.X[b#i->b#(i+1)]").unwrap();
        assert!(canonical(&s.root).contains("[b#i->b#(i+1)]"));
    }

    #[test]
    fn directives() {
        let s = parse_ccs("% nonblocking a, 'b\n% normalize\n% goal G = at L: 0; state: X\na.0 | X where X = a.X").unwrap();
        assert!(s.normalize);
        assert_eq!(s.nonblocking.len(), 2);
        assert_eq!(s.goals["G"].disjuncts.len(), 2);
        assert!(matches!(parse_ccs("% frobnicate\n0"), Err(CcsError::Directive { line: 1, .. })));
    }

    #[test]
    fn copies_get_fresh_names() {
        let s = parse_ccs("X | c.X where X = a.b.c.X").unwrap();
        assert_eq!(s.name_table.len(), 7);
        assert_eq!(s.prefix_count, 7);
    }

    #[test]
    fn copies_keep_only_reachable_bindings() {
        let s = parse_ccs("X where X = a.X, Y = b.Y").unwrap();
        let Expr::Fix { spec, .. } = &*s.root else { panic!() };
        assert_eq!(spec.bindings.len(), 1);
    }

    #[test]
    fn where_in_body_rejected() {
        assert!(parse_ccs("X where X = a.(Y where Y = b.Y)").is_err());
    }
}
