use std::fmt::Write;

use super::Expr;

#[derive(Clone, Copy, PartialEq, Eq)]
enum Mode {
    Canonical,
    Erased,
    Anonymous,
}

fn level(e: &Expr) -> u8 {
    match e {
        Expr::Par(..) => 0,
        Expr::Choice(..) => 1,
        Expr::Prefix { .. } => 2,
        Expr::Restrict(..) | Expr::Relabel(..) => 3,
        Expr::Nil | Expr::Var(_) | Expr::Fix { .. } => 4,
    }
}

fn go(e: &Expr, need: u8, mode: Mode, out: &mut String) {
    let paren = level(e) < need;
    if paren {
        out.push('(');
    }
    match e {
        Expr::Nil => out.push('0'),
        Expr::Var(v) => out.push_str(v),
        Expr::Prefix { action, name, body } => {
            write!(out, "{action}").unwrap();
            let show = match mode {
                Mode::Canonical => true,
                Mode::Erased | Mode::Anonymous => !name.is_generated() && name.0 != "@",
            };
            if show {
                write!(out, "{{{name}}}").unwrap();
            }
            out.push('.');
            go(body, 2, mode, out);
        }
        Expr::Choice(a, b) => {
            go(a, 1, mode, out);
            out.push_str(" + ");
            go(b, 2, mode, out);
        }
        Expr::Par(a, b) => {
            go(a, 0, mode, out);
            out.push_str(" | ");
            go(b, 1, mode, out);
        }
        Expr::Restrict(a, n) => {
            go(a, 3, mode, out);
            write!(out, "\\{n}").unwrap();
        }
        Expr::Relabel(a, f) => {
            go(a, 3, mode, out);
            write!(out, "{f}").unwrap();
        }
        Expr::Fix { var, spec } => match mode {
            Mode::Erased => out.push_str(var),
            Mode::Canonical | Mode::Anonymous => {
                write!(out, "({var} where ").unwrap();
                for (i, (x, body)) in spec.bindings.iter().enumerate() {
                    if i > 0 {
                        out.push_str(", ");
                    }
                    write!(out, "{x} = ").unwrap();
                    go(body, 0, mode, out);
                }
                out.push(')');
            }
        },
    }
    if paren {
        out.push(')');
    }
}

/// Full printed form: every prefix shows its instruction name and every `fix` its bindings.
/// Parses back to the same expression; used as the state key.
pub fn canonical(e: &Expr) -> String {
    let mut s = String::new();
    go(e, 0, Mode::Canonical, &mut s);
    s
}

/// Canonical form without generated names: identifies states as plain processes.
pub fn state_key(e: &Expr) -> String {
    let mut s = String::new();
    go(e, 0, Mode::Anonymous, &mut s);
    s
}

/// Readable form: generated names dropped, `fix_X S` shown as `X`.
pub fn erased(e: &Expr) -> String {
    let mut s = String::new();
    go(e, 0, Mode::Erased, &mut s);
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ccs_lang::{parse_ccs, parse_pattern};

    #[test]
    fn erased_forms() {
        let s = parse_ccs("(X|Y)\\b where X = a.X + b.0, Y = c.Y + 'b.0").unwrap();
        assert_eq!(erased(&s.root), "(X | Y)\\b");
        assert_eq!(erased(&parse_pattern("a.(b.0+c.0)|(d.0|e{n}.0)").unwrap()), "a.(b.0 + c.0) | (d.0 | e{n}.0)");
    }

    #[test]
    fn canonical_shows_names_and_bindings() {
        let s = parse_ccs("a | X where X = a.X").unwrap();
        assert_eq!(canonical(&s.root), "a{a@1}.0 | (X where X = a{a@2}.X)");
    }

    #[test]
    fn canonical_reparses_identically() {
        for src in [
            "(X|Y)\\b where X = a.X + b.0, Y = c.Y + 'b.0",
            "X | c.X where X = a.b.c.X",
            "X where X = b#0.X[b#i->b#(i+1)]",
            "((a+c) | X)\\a[a->'d, c->e] where X = a.X",
        ] {
            let s = parse_ccs(src).unwrap();
            let text = canonical(&s.root);
            let again = parse_ccs(&text).unwrap();
            assert_eq!(again.root, s.root, "{src}");
            assert_eq!(canonical(&again.root), text);
        }
    }
}
