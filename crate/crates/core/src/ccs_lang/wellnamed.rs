use std::collections::{BTreeSet, HashSet};
use std::sync::Arc;

use super::{Expr, InstrName, RecSpec};

/// All instruction names occurring in `e`, including every binding of every `fix`.
pub fn names_of(e: &Expr) -> BTreeSet<InstrName> {
    fn go(e: &Expr, out: &mut BTreeSet<InstrName>, specs: &mut HashSet<usize>) {
        match e {
            Expr::Nil | Expr::Var(_) => {}
            Expr::Prefix { name, body, .. } => {
                out.insert(name.clone());
                go(body, out, specs);
            }
            Expr::Choice(a, b) | Expr::Par(a, b) => {
                go(a, out, specs);
                go(b, out, specs);
            }
            Expr::Restrict(a, _) | Expr::Relabel(a, _) => go(a, out, specs),
            Expr::Fix { spec, .. } => {
                if specs.insert(Arc::as_ptr(spec) as usize) {
                    for (_, b) in &spec.bindings {
                        go(b, out, specs);
                    }
                }
            }
        }
    }
    let mut out = BTreeSet::new();
    go(e, &mut out, &mut HashSet::new());
    out
}

/// Names of the unguarded prefix occurrences of `e`; `ctx` resolves free variables as `fix_Y ctx`.
fn unguarded(e: &Expr, ctx: Option<&Arc<RecSpec>>, seen: &mut Vec<String>, out: &mut Vec<InstrName>) {
    match e {
        Expr::Nil => {}
        Expr::Prefix { name, .. } => out.push(name.clone()),
        Expr::Choice(a, b) | Expr::Par(a, b) => {
            unguarded(a, ctx, seen, out);
            unguarded(b, ctx, seen, out);
        }
        Expr::Restrict(a, _) | Expr::Relabel(a, _) => unguarded(a, ctx, seen, out),
        Expr::Var(y) => {
            if let Some(spec) = ctx {
                if let Some(body) = spec.body(y) {
                    if !seen.contains(y) {
                        seen.push(y.clone());
                        unguarded(body, ctx, seen, out);
                    }
                }
            }
        }
        Expr::Fix { var, spec } => {
            if let Some(body) = spec.body(var) {
                let mut inner = vec![var.clone()];
                unguarded(body, Some(spec), &mut inner, out);
            }
        }
    }
}

fn distinct(names: &[InstrName]) -> bool {
    let set: BTreeSet<&InstrName> = names.iter().collect();
    set.len() == names.len()
}

/// Every extended subexpression has distinct names on its unguarded occurrences, and the arms
/// of every parallel composition have disjoint name sets.
pub fn well_named(e: &Expr) -> bool {
    fn visit(e: &Expr, specs: &mut HashSet<usize>) -> bool {
        let mut ung = Vec::new();
        unguarded(e, None, &mut Vec::new(), &mut ung);
        if !distinct(&ung) {
            return false;
        }
        match e {
            Expr::Nil | Expr::Var(_) => true,
            Expr::Prefix { body, .. } => visit(body, specs),
            Expr::Choice(a, b) => visit(a, specs) && visit(b, specs),
            Expr::Par(a, b) => names_of(a).is_disjoint(&names_of(b)) && visit(a, specs) && visit(b, specs),
            Expr::Restrict(a, _) | Expr::Relabel(a, _) => visit(a, specs),
            Expr::Fix { spec, .. } => {
                if !specs.insert(Arc::as_ptr(spec) as usize) {
                    return true;
                }
                for (y, body) in &spec.bindings {
                    let mut ung = Vec::new();
                    unguarded(body, Some(spec), &mut vec![y.clone()], &mut ung);
                    if !distinct(&ung) || !visit(body, specs) {
                        return false;
                    }
                }
                true
            }
        }
    }
    visit(e, &mut HashSet::new())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ccs_lang::parse_ccs;

    #[test]
    fn parsed_specs_are_well_named() {
        for src in [
            "X | c.X where X = a.b.c.X",
            "(X|Y)\\b where X = a.X + b.0, Y = c.Y + 'b.0",
            "a | X where X = a.X",
        ] {
            assert!(well_named(&parse_ccs(src).unwrap().root), "{src}");
        }
    }

    #[test]
    fn shared_unguarded_name_in_choice() {
        assert!(!well_named(&parse_ccs("a{n}.0 + b{n}.0").unwrap().root));
        assert!(well_named(&parse_ccs("a{n}.b{m}.0 + c{k}.0").unwrap().root));
    }

    #[test]
    fn shared_name_across_parallel_arms() {
        assert!(!well_named(&parse_ccs("a{n}.0 | b.c{n}.0").unwrap().root));
    }

    #[test]
    fn guarded_repeats_are_allowed() {
        assert!(well_named(&parse_ccs("X where X = a{n}.b{n}.X").unwrap().root));
    }

    #[test]
    fn names_include_bindings() {
        let s = parse_ccs("X where X = a.Y, Y = b.X").unwrap();
        assert_eq!(names_of(&s.root).len(), 2);
    }
}
