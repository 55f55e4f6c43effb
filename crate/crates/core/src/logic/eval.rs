use super::{Assignment, Formula, LogicError, Universe};

/// Truth value of a formula containing no next-state atoms.
pub fn eval_state(formula: &Formula, a: &Assignment) -> Result<bool, LogicError> {
    if let Some(name) = formula.next_atoms().into_iter().next() {
        return Err(LogicError::NextInStateFormula {
            name: name.to_string(),
        });
    }
    Ok(eval_checked(formula, a))
}

fn eval_checked(formula: &Formula, a: &Assignment) -> bool {
    match formula {
        Formula::True => true,
        Formula::False => false,
        Formula::Atom(p) => a.contains(p),
        Formula::Next(_) => unreachable!("checked by eval_state"),
        Formula::Not(f) => !eval_checked(f, a),
        Formula::And(l, r) => eval_checked(l, a) && eval_checked(r, a),
        Formula::Or(l, r) => eval_checked(l, a) || eval_checked(r, a),
        Formula::Implies(l, r) => !eval_checked(l, a) || eval_checked(r, a),
        Formula::Iff(l, r) => eval_checked(l, a) == eval_checked(r, a),
    }
}

/// Evaluates a transition formula: plain atoms read `current`, primed atoms read `next`.
pub fn eval_transition(formula: &Formula, current: &Assignment, next: &Assignment) -> bool {
    match formula {
        Formula::True => true,
        Formula::False => false,
        Formula::Atom(p) => current.contains(p),
        Formula::Next(p) => next.contains(p),
        Formula::Not(f) => !eval_transition(f, current, next),
        Formula::And(l, r) => eval_transition(l, current, next) && eval_transition(r, current, next),
        Formula::Or(l, r) => eval_transition(l, current, next) || eval_transition(r, current, next),
        Formula::Implies(l, r) => {
            !eval_transition(l, current, next) || eval_transition(r, current, next)
        }
        Formula::Iff(l, r) => eval_transition(l, current, next) == eval_transition(r, current, next),
    }
}

/// A formula with proposition names resolved to bit positions of a [`Universe`].
#[derive(Clone, Debug)]
pub enum Compiled {
    Const(bool),
    Var { bit: u32, next: bool },
    Not(Box<Compiled>),
    And(Box<Compiled>, Box<Compiled>),
    Or(Box<Compiled>, Box<Compiled>),
    Implies(Box<Compiled>, Box<Compiled>),
    Iff(Box<Compiled>, Box<Compiled>),
}

impl Compiled {
    pub fn new(formula: &Formula, universe: &Universe) -> Result<Self, LogicError> {
        let var = |name: &String, next: bool| {
            universe
                .index_of(name)
                .map(|i| Compiled::Var {
                    bit: i as u32,
                    next,
                })
                .ok_or_else(|| LogicError::UnknownProposition {
                    name: name.clone(),
                    position: 0,
                })
        };
        let bin = |l: &Formula, r: &Formula| -> Result<(Box<Compiled>, Box<Compiled>), LogicError> {
            Ok((
                Box::new(Compiled::new(l, universe)?),
                Box::new(Compiled::new(r, universe)?),
            ))
        };
        Ok(match formula {
            Formula::True => Compiled::Const(true),
            Formula::False => Compiled::Const(false),
            Formula::Atom(p) => var(p, false)?,
            Formula::Next(p) => var(p, true)?,
            Formula::Not(f) => Compiled::Not(Box::new(Compiled::new(f, universe)?)),
            Formula::And(l, r) => {
                let (l, r) = bin(l, r)?;
                Compiled::And(l, r)
            }
            Formula::Or(l, r) => {
                let (l, r) = bin(l, r)?;
                Compiled::Or(l, r)
            }
            Formula::Implies(l, r) => {
                let (l, r) = bin(l, r)?;
                Compiled::Implies(l, r)
            }
            Formula::Iff(l, r) => {
                let (l, r) = bin(l, r)?;
                Compiled::Iff(l, r)
            }
        })
    }

    pub fn eval(&self, cur: u64, next: u64) -> bool {
        match self {
            Compiled::Const(b) => *b,
            Compiled::Var { bit, next: false } => cur >> bit & 1 == 1,
            Compiled::Var { bit, next: true } => next >> bit & 1 == 1,
            Compiled::Not(f) => !f.eval(cur, next),
            Compiled::And(l, r) => l.eval(cur, next) && r.eval(cur, next),
            Compiled::Or(l, r) => l.eval(cur, next) || r.eval(cur, next),
            Compiled::Implies(l, r) => !l.eval(cur, next) || r.eval(cur, next),
            Compiled::Iff(l, r) => l.eval(cur, next) == r.eval(cur, next),
        }
    }

    /// Three-valued evaluation where only the next-state bits in `known` are fixed.
    /// `None` means the value still depends on unfixed bits.
    pub fn eval_partial(&self, cur: u64, next: u64, known: u64) -> Option<bool> {
        match self {
            Compiled::Const(b) => Some(*b),
            Compiled::Var { bit, next: false } => Some(cur >> bit & 1 == 1),
            Compiled::Var { bit, next: true } => {
                if known >> bit & 1 == 1 {
                    Some(next >> bit & 1 == 1)
                } else {
                    None
                }
            }
            Compiled::Not(f) => f.eval_partial(cur, next, known).map(|b| !b),
            Compiled::And(l, r) => match l.eval_partial(cur, next, known) {
                Some(false) => Some(false),
                Some(true) => r.eval_partial(cur, next, known),
                None => match r.eval_partial(cur, next, known) {
                    Some(false) => Some(false),
                    _ => None,
                },
            },
            Compiled::Or(l, r) => match l.eval_partial(cur, next, known) {
                Some(true) => Some(true),
                Some(false) => r.eval_partial(cur, next, known),
                None => match r.eval_partial(cur, next, known) {
                    Some(true) => Some(true),
                    _ => None,
                },
            },
            Compiled::Implies(l, r) => match l.eval_partial(cur, next, known) {
                Some(false) => Some(true),
                Some(true) => r.eval_partial(cur, next, known),
                None => match r.eval_partial(cur, next, known) {
                    Some(true) => Some(true),
                    _ => None,
                },
            },
            Compiled::Iff(l, r) => {
                let a = l.eval_partial(cur, next, known)?;
                r.eval_partial(cur, next, known).map(|b| a == b)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::parse::parse_unchecked;

    fn set(names: &[&str]) -> Assignment {
        Assignment::from_names(names.iter().copied())
    }

    #[test]
    fn constants_and_example_state() {
        assert!(eval_state(&Formula::True, &set(&[])).unwrap());
        let f = parse_unchecked("p_base_x2 & !empty").unwrap();
        assert!(eval_state(&f, &set(&["p_base_x2", "p_cup_ee"])).unwrap());
    }

    #[test]
    fn state_eval_rejects_next() {
        let f = parse_unchecked("a & b'").unwrap();
        assert_eq!(
            eval_state(&f, &set(&[])),
            Err(LogicError::NextInStateFormula { name: "b".into() })
        );
    }

    #[test]
    fn transition_reads_primes_from_next() {
        let f = parse_unchecked("!(p_base_x3' & p_cone_x3')").unwrap();
        let cur = set(&["p_base_x2", "p_cone_x3"]);
        let nxt = set(&["p_base_x3", "p_cone_x3"]);
        assert!(!eval_transition(&f, &cur, &nxt));
        let g = parse_unchecked("pi'").unwrap();
        assert!(eval_transition(&g, &set(&[]), &set(&["pi"])));
    }
}
