use super::VerifyError;
use crate::lts_model::{AugmentedLts, TaskSet};
use crate::paths::{enabled, Lasso};

/// A state of the converted system: an initial state, or the copy of a target state entered by
/// a given transition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CState {
    Init(usize),
    Trans(usize),
}

/// Transition propositions shifted to states.
#[derive(Debug, Clone)]
pub struct ConvertedLts {
    pub states: Vec<CState>,
    /// `(source, target)` indices into `states`: one per copy of a state and transition leaving it.
    pub transitions: Vec<(usize, usize)>,
}

/// States are the initial states plus one copy per transition; a transition `u` leaves every
/// copy of `source(u)` and enters the copy for `u`.
pub fn ltl_convert(lts: &AugmentedLts) -> ConvertedLts {
    let mut states: Vec<CState> = lts.initial.iter().map(|&s| CState::Init(s)).collect();
    states.extend((0..lts.num_transitions()).map(CState::Trans));
    let mut transitions = Vec::new();
    for (i, &st) in states.iter().enumerate() {
        let here = match st {
            CState::Init(s) => s,
            CState::Trans(t) => lts.transitions[t].target,
        };
        for &u in lts.outgoing(here) {
            transitions.push((i, lts.initial.len() + u));
        }
    }
    ConvertedLts { states, transitions }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Formula {
    True,
    False,
    /// Task enabled in the (original) state.
    Enabled(String),
    /// Task occurred on entering the state.
    Occurs(String),
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Implies(Box<Formula>, Box<Formula>),
    F(Box<Formula>),
    G(Box<Formula>),
}

impl Formula {
    /// Grammar: `true | false | en(TASK) | occ(TASK) | !φ | φ & ψ | φ | ψ | φ -> ψ | F φ | G φ | (φ)`;
    /// `->` binds loosest and associates to the right.
    pub fn parse(text: &str) -> Result<Formula, VerifyError> {
        let mut p = FormulaParser { s: text.as_bytes(), i: 0 };
        let f = p.implies()?;
        p.ws();
        if p.i != p.s.len() {
            return Err(VerifyError::Formula(format!("trailing input at {}", p.i)));
        }
        Ok(f)
    }
}

struct FormulaParser<'a> {
    s: &'a [u8],
    i: usize,
}

impl FormulaParser<'_> {
    fn ws(&mut self) {
        while self.i < self.s.len() && self.s[self.i].is_ascii_whitespace() {
            self.i += 1;
        }
    }

    fn eat(&mut self, tok: &str) -> bool {
        self.ws();
        if self.s[self.i..].starts_with(tok.as_bytes()) {
            self.i += tok.len();
            true
        } else {
            false
        }
    }

    fn implies(&mut self) -> Result<Formula, VerifyError> {
        let l = self.or()?;
        if self.eat("->") {
            let r = self.implies()?;
            return Ok(Formula::Implies(Box::new(l), Box::new(r)));
        }
        Ok(l)
    }

    fn or(&mut self) -> Result<Formula, VerifyError> {
        let mut l = self.and()?;
        while self.eat("|") {
            l = Formula::Or(Box::new(l), Box::new(self.and()?));
        }
        Ok(l)
    }

    fn and(&mut self) -> Result<Formula, VerifyError> {
        let mut l = self.unary()?;
        while self.eat("&") {
            l = Formula::And(Box::new(l), Box::new(self.unary()?));
        }
        Ok(l)
    }

    fn word(&mut self) -> Option<String> {
        self.ws();
        let start = self.i;
        while self.i < self.s.len() && self.s[self.i].is_ascii_alphabetic() {
            self.i += 1;
        }
        (self.i > start).then(|| String::from_utf8_lossy(&self.s[start..self.i]).into_owned())
    }

    /// Raw task name up to the matching `)`.
    fn argument(&mut self) -> Result<String, VerifyError> {
        if !self.eat("(") {
            return Err(VerifyError::Formula(format!("expected ( at {}", self.i)));
        }
        let start = self.i;
        let mut depth = 1;
        while self.i < self.s.len() {
            match self.s[self.i] {
                b'(' => depth += 1,
                b')' => {
                    depth -= 1;
                    if depth == 0 {
                        let name = String::from_utf8_lossy(&self.s[start..self.i]).trim().to_string();
                        self.i += 1;
                        return Ok(name);
                    }
                }
                _ => {}
            }
            self.i += 1;
        }
        Err(VerifyError::Formula("unclosed (".into()))
    }

    fn unary(&mut self) -> Result<Formula, VerifyError> {
        if self.eat("!") {
            return Ok(Formula::Not(Box::new(self.unary()?)));
        }
        if self.eat("(") {
            let f = self.implies()?;
            if !self.eat(")") {
                return Err(VerifyError::Formula(format!("expected ) at {}", self.i)));
            }
            return Ok(f);
        }
        let at = self.i;
        match self.word().as_deref() {
            Some("true") => Ok(Formula::True),
            Some("false") => Ok(Formula::False),
            Some("F") => Ok(Formula::F(Box::new(self.unary()?))),
            Some("G") => Ok(Formula::G(Box::new(self.unary()?))),
            Some("en") => Ok(Formula::Enabled(self.argument()?)),
            Some("occ") => Ok(Formula::Occurs(self.argument()?)),
            _ => Err(VerifyError::Formula(format!("unexpected input at {at}"))),
        }
    }
}

fn conj(mut fs: Vec<Formula>) -> Formula {
    match fs.pop() {
        None => Formula::True,
        Some(last) => fs.into_iter().rev().fold(last, |acc, f| Formula::And(Box::new(f), Box::new(acc))),
    }
}

/// `⋀_T G(G en(T) -> F occ(T))`.
pub fn weak_fairness_formula(tasks: &TaskSet) -> Formula {
    conj(tasks
        .tasks
        .iter()
        .map(|t| {
            let en = Formula::G(Box::new(Formula::Enabled(t.name.clone())));
            let occ = Formula::F(Box::new(Formula::Occurs(t.name.clone())));
            Formula::G(Box::new(Formula::Implies(Box::new(en), Box::new(occ))))
        })
        .collect())
}

/// `⋀_T (G F en(T) -> G F occ(T))`.
pub fn strong_fairness_formula(tasks: &TaskSet) -> Formula {
    let gf = |f: Formula| Formula::G(Box::new(Formula::F(Box::new(f))));
    conj(tasks
        .tasks
        .iter()
        .map(|t| Formula::Implies(Box::new(gf(Formula::Enabled(t.name.clone()))), Box::new(gf(Formula::Occurs(t.name.clone())))))
        .collect())
}

/// Evaluates `f` on the converted image of `lasso`: positions are the initial copy, one copy
/// per stem step, then one per cycle step, the last wrapping to the first cycle position.
pub fn eval_ltl(lts: &AugmentedLts, tasks: &TaskSet, lasso: &Lasso, f: &Formula) -> Result<bool, VerifyError> {
    let mut pos: Vec<CState> = vec![CState::Init(lasso.stem.start)];
    pos.extend(lasso.stem.steps.iter().map(|&t| CState::Trans(t)));
    let loop_start = pos.len();
    pos.extend(lasso.cycle.iter().map(|&t| CState::Trans(t)));
    Ok(eval(lts, tasks, &pos, loop_start, f)?[0])
}

fn eval(lts: &AugmentedLts, tasks: &TaskSet, pos: &[CState], loop_start: usize, f: &Formula) -> Result<Vec<bool>, VerifyError> {
    let n = pos.len();
    let task = |name: &str| {
        tasks.tasks.iter().find(|t| t.name == name).ok_or_else(|| VerifyError::UnknownProposition(name.to_string()))
    };
    Ok(match f {
        Formula::True => vec![true; n],
        Formula::False => vec![false; n],
        Formula::Enabled(name) => {
            let t = task(name)?;
            pos.iter()
                .map(|c| {
                    let s = match *c {
                        CState::Init(s) => s,
                        CState::Trans(u) => lts.transitions[u].target,
                    };
                    enabled(lts, t, s, false)
                })
                .collect()
        }
        Formula::Occurs(name) => {
            let t = task(name)?;
            pos.iter().map(|c| matches!(c, CState::Trans(u) if t.members.contains(u))).collect()
        }
        Formula::Not(a) => eval(lts, tasks, pos, loop_start, a)?.into_iter().map(|b| !b).collect(),
        Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => {
            let x = eval(lts, tasks, pos, loop_start, a)?;
            let y = eval(lts, tasks, pos, loop_start, b)?;
            x.iter()
                .zip(&y)
                .map(|(&p, &q)| match f {
                    Formula::And(..) => p && q,
                    Formula::Or(..) => p || q,
                    _ => !p || q,
                })
                .collect()
        }
        Formula::F(a) | Formula::G(a) => {
            let x = eval(lts, tasks, pos, loop_start, a)?;
            let eventually = matches!(f, Formula::F(_));
            // On the cycle every position sees every cycle position.
            let cyc = if eventually { x[loop_start..].iter().any(|&b| b) } else { x[loop_start..].iter().all(|&b| b) };
            let mut out = vec![cyc; n];
            for i in (0..loop_start).rev() {
                out[i] = if eventually { x[i] || out[i + 1] } else { x[i] && out[i + 1] };
            }
            out
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ccs_lang::parse_ccs;
    use crate::lts_model::Notion;
    use crate::paths::{classify_lasso, Assumption, AssumptionKind, PathPrefix};
    use crate::semantics::explore;
    use crate::tasks::extract_tasks;
    use crate::verify::{enumerate_lassos, HierarchyBounds};

    #[test]
    fn conversion_sizes() {
        let lts = explore(&parse_ccs("a | X where X = a.X").unwrap(), 512, 256).lts;
        let c = ltl_convert(&lts);
        assert_eq!(c.states.len(), 4);
        assert_eq!(c.states[0], CState::Init(0));
    }

    #[test]
    fn parse_formulas() {
        let f = Formula::parse("G (G en(T:t0) -> F occ(Z:{b@1,b~@1}))").unwrap();
        assert!(matches!(f, Formula::G(_)));
        assert!(Formula::parse("G (").is_err());
        assert_eq!(Formula::parse("!true | false").unwrap(), Formula::Or(Box::new(Formula::Not(Box::new(Formula::True))), Box::new(Formula::False)));
    }

    #[test]
    fn formulas_agree_with_direct_classification() {
        let lts = explore(&parse_ccs("X | Y where X = a.X + b.X, Y = a.Y + 'b.Y").unwrap(), 512, 256).lts;
        for n in Notion::GLOBAL {
            let ts = extract_tasks(&lts, n).unwrap();
            let (wf, sf) = (weak_fairness_formula(&ts), strong_fairness_formula(&ts));
            for l in enumerate_lassos(&lts, HierarchyBounds { stem: 2, cycle: 3 }) {
                let w = classify_lasso(&lts, &l, &Assumption::new(AssumptionKind::W(n))).unwrap();
                let s = classify_lasso(&lts, &l, &Assumption::new(AssumptionKind::S(n))).unwrap();
                assert_eq!(eval_ltl(&lts, &ts, &l, &wf).unwrap(), w);
                assert_eq!(eval_ltl(&lts, &ts, &l, &sf).unwrap(), s);
            }
        }
    }

    #[test]
    fn unknown_task_is_an_error() {
        let lts = explore(&parse_ccs("X where X = a.X").unwrap(), 512, 256).lts;
        let ts = extract_tasks(&lts, Notion::A).unwrap();
        let l = Lasso { stem: PathPrefix::empty(0), cycle: vec![0] };
        assert!(eval_ltl(&lts, &ts, &l, &Formula::parse("G true").unwrap()).unwrap());
        assert!(matches!(eval_ltl(&lts, &ts, &l, &Formula::parse("en(nope)").unwrap()), Err(VerifyError::UnknownProposition(_))));
    }
}
