//! Explicit game graph over bit-encoded states reachable from the initial states.

use std::collections::{HashMap, VecDeque};

use super::SynthesisError;
use crate::logic::{Compiled, Formula, Gr1Spec, Universe};

/// One environment input choice and the system responses it admits.
#[derive(Clone, Debug)]
pub struct EnvMove {
    /// Next-state input bits.
    pub x: u64,
    /// Indices of the full successor states allowed by sys-safety.
    pub responses: Vec<u32>,
}

/// Initial input choice together with the initial states the system may pick.
#[derive(Clone, Debug)]
pub struct InitialChoice {
    pub x: u64,
    pub states: Vec<u32>,
}

#[derive(Clone, Debug)]
pub struct Game {
    pub universe: Universe,
    pub states: Vec<u64>,
    pub moves: Vec<Vec<EnvMove>>,
    pub initial: Vec<InitialChoice>,
    /// `sys_goals[j][s]`: goal `j` holds in state `s`.
    pub sys_goals: Vec<Vec<bool>>,
    /// `env_goals[i][s]`: assumption `i` holds in state `s`.
    pub env_goals: Vec<Vec<bool>>,
}

struct Enumerator {
    formula: Compiled,
}

impl Enumerator {
    fn new(f: Formula, u: &Universe) -> Result<Self, SynthesisError> {
        Ok(Self {
            formula: Compiled::new(&f, u)?,
        })
    }

    /// All completions of `base` over `free` that satisfy the formula, sorted.
    fn solutions(&self, cur: u64, base: u64, known: u64, free: &[u32]) -> Vec<u64> {
        let mut out = Vec::new();
        self.walk(cur, base, known, free, &mut out);
        out.sort_unstable();
        out
    }

    fn walk(&self, cur: u64, base: u64, known: u64, free: &[u32], out: &mut Vec<u64>) {
        match self.formula.eval_partial(cur, base, known) {
            Some(false) => {}
            Some(true) => {
                for combo in 0..1u64 << free.len() {
                    let mut v = base;
                    for (k, b) in free.iter().enumerate() {
                        if combo >> k & 1 == 1 {
                            v |= 1 << b;
                        }
                    }
                    out.push(v);
                }
            }
            None => {
                let (b, rest) = free.split_first().expect("undetermined formula with all bits known");
                self.walk(cur, base, known | 1 << b, rest, out);
                self.walk(cur, base | 1 << b, known | 1 << b, rest, out);
            }
        }
    }
}

fn prime(f: &Formula) -> Formula {
    match f {
        Formula::True | Formula::False | Formula::Next(_) => f.clone(),
        Formula::Atom(p) => Formula::Next(p.clone()),
        Formula::Not(a) => Formula::not(prime(a)),
        Formula::And(a, b) => Formula::and(prime(a), prime(b)),
        Formula::Or(a, b) => Formula::or(prime(a), prime(b)),
        Formula::Implies(a, b) => Formula::implies(prime(a), prime(b)),
        Formula::Iff(a, b) => Formula::iff(prime(a), prime(b)),
    }
}

impl Game {
    pub fn build(spec: &Gr1Spec, bound: usize) -> Result<Self, SynthesisError> {
        let u = spec.universe().clone();
        if u.len() > 64 {
            return Err(crate::logic::LogicError::TooManyPropositions { count: u.len() }.into());
        }
        let bits_of = |mask: u64| -> Vec<u32> { (0..64).filter(|b| mask >> b & 1 == 1).collect() };
        let input_mask = u.input_mask();
        let in_bits = bits_of(input_mask);
        let out_bits = bits_of(u.output_mask());

        let env_init = Enumerator::new(prime(spec.env_init()), &u)?;
        let sys_init = Enumerator::new(prime(spec.sys_init()), &u)?;
        let env_safe = Enumerator::new(Formula::conjunction(spec.env_safety().iter().cloned()), &u)?;
        let sys_safe = Enumerator::new(Formula::conjunction(spec.sys_safety().iter().cloned()), &u)?;

        let mut states: Vec<u64> = Vec::new();
        let mut index: HashMap<u64, u32> = HashMap::new();
        let mut queue = VecDeque::new();
        let too_large = |u: &Universe| SynthesisError::StateSpaceTooLarge {
            bound,
            propositions: u.len(),
        };
        let mut intern = |s: u64,
                          states: &mut Vec<u64>,
                          queue: &mut VecDeque<u32>|
         -> Result<u32, SynthesisError> {
            if let Some(&i) = index.get(&s) {
                return Ok(i);
            }
            if states.len() >= bound {
                return Err(too_large(&u));
            }
            let i = states.len() as u32;
            states.push(s);
            index.insert(s, i);
            queue.push_back(i);
            Ok(i)
        };

        let mut initial = Vec::new();
        for x in env_init.solutions(0, 0, 0, &in_bits) {
            let mut ids = Vec::new();
            for s in sys_init.solutions(0, x, input_mask, &out_bits) {
                ids.push(intern(s, &mut states, &mut queue)?);
            }
            initial.push(InitialChoice { x, states: ids });
        }

        let mut moves: Vec<Vec<EnvMove>> = Vec::new();
        while let Some(i) = queue.pop_front() {
            let s = states[i as usize];
            let mut here = Vec::new();
            for x in env_safe.solutions(s, 0, 0, &in_bits) {
                let mut responses = Vec::new();
                for t in sys_safe.solutions(s, x, input_mask, &out_bits) {
                    responses.push(intern(t, &mut states, &mut queue)?);
                }
                here.push(EnvMove { x, responses });
            }
            if moves.len() <= i as usize {
                moves.resize_with(i as usize + 1, Vec::new);
            }
            moves[i as usize] = here;
        }
        moves.resize_with(states.len(), Vec::new);

        let membership = |fs: &[Formula]| -> Result<Vec<Vec<bool>>, SynthesisError> {
            fs.iter()
                .map(|f| {
                    let c = Compiled::new(f, &u)?;
                    Ok(states.iter().map(|&s| c.eval(s, 0)).collect())
                })
                .collect()
        };
        let sys_goals = membership(spec.sys_liveness())?;
        let mut env_goals = membership(spec.env_liveness())?;
        if env_goals.is_empty() {
            env_goals.push(vec![true; states.len()]);
        }

        Ok(Self {
            universe: u.clone(),
            states,
            moves,
            initial,
            sys_goals,
            env_goals,
        })
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    /// States from which the system can force the next state into `set`.
    pub fn cpre(&self, set: &[bool]) -> Vec<bool> {
        self.moves
            .iter()
            .map(|ms| {
                ms.iter()
                    .all(|m| m.responses.iter().any(|&r| set[r as usize]))
            })
            .collect()
    }

    /// States from which the environment can force the next state into `set`.
    pub fn epre(&self, set: &[bool]) -> Vec<bool> {
        self.moves
            .iter()
            .map(|ms| {
                ms.iter()
                    .any(|m| m.responses.iter().all(|&r| set[r as usize]))
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::{parse_unchecked, PropKind, Proposition};

    #[test]
    fn toggle_game() {
        let spec = Gr1Spec::new(
            vec![
                Proposition::new("x", PropKind::UncontrollableInput),
                Proposition::new("y", PropKind::Output),
            ],
            parse_unchecked("!x").unwrap(),
            vec![],
            vec![],
            parse_unchecked("!y").unwrap(),
            vec![parse_unchecked("y' <-> x'").unwrap()],
            vec![],
        )
        .unwrap();
        let g = Game::build(&spec, 1 << 10).unwrap();
        assert_eq!(g.states, vec![0, 0b11]);
        assert_eq!(g.moves[0].len(), 2);
        assert_eq!(g.moves[0][1].responses, vec![1]);
        assert_eq!(g.initial[0].states, vec![0]);
        assert!(matches!(
            Game::build(&spec, 1),
            Err(SynthesisError::StateSpaceTooLarge { bound: 1, .. })
        ));
    }
}
