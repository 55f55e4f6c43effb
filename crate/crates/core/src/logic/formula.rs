use std::collections::BTreeSet;
use std::fmt;

/// Boolean formula over current-state atoms and next-state (primed) atoms.
///
/// Binary connectives are kept binary so that printing and re-parsing
/// reproduces the exact tree.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Formula {
    True,
    False,
    Atom(String),
    /// `p'`: the value of `p` in the next state.
    Next(String),
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Implies(Box<Formula>, Box<Formula>),
    Iff(Box<Formula>, Box<Formula>),
}

impl Formula {
    pub fn atom(name: impl Into<String>) -> Self {
        Formula::Atom(name.into())
    }

    pub fn next(name: impl Into<String>) -> Self {
        Formula::Next(name.into())
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(f: Formula) -> Self {
        Formula::Not(Box::new(f))
    }

    pub fn and(a: Formula, b: Formula) -> Self {
        Formula::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Formula, b: Formula) -> Self {
        Formula::Or(Box::new(a), Box::new(b))
    }

    pub fn implies(a: Formula, b: Formula) -> Self {
        Formula::Implies(Box::new(a), Box::new(b))
    }

    pub fn iff(a: Formula, b: Formula) -> Self {
        Formula::Iff(Box::new(a), Box::new(b))
    }

    /// Left-nested conjunction; `True` for an empty iterator.
    pub fn conjunction(items: impl IntoIterator<Item = Formula>) -> Self {
        items
            .into_iter()
            .reduce(Formula::and)
            .unwrap_or(Formula::True)
    }

    /// Left-nested disjunction; `False` for an empty iterator.
    pub fn disjunction(items: impl IntoIterator<Item = Formula>) -> Self {
        items
            .into_iter()
            .reduce(Formula::or)
            .unwrap_or(Formula::False)
    }

    /// `p` or `!p` (primed when `next`).
    pub fn literal(name: &str, value: bool, next: bool) -> Self {
        let atom = if next {
            Formula::next(name)
        } else {
            Formula::atom(name)
        };
        if value {
            atom
        } else {
            Formula::not(atom)
        }
    }

    pub fn has_next(&self) -> bool {
        match self {
            Formula::True | Formula::False | Formula::Atom(_) => false,
            Formula::Next(_) => true,
            Formula::Not(f) => f.has_next(),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) | Formula::Iff(a, b) => {
                a.has_next() || b.has_next()
            }
        }
    }

    /// Names read in the current state.
    pub fn current_atoms(&self) -> BTreeSet<&str> {
        let mut out = BTreeSet::new();
        self.visit_atoms(&mut |name, next| {
            if !next {
                out.insert(name);
            }
        });
        out
    }

    /// Names read in the next state.
    pub fn next_atoms(&self) -> BTreeSet<&str> {
        let mut out = BTreeSet::new();
        self.visit_atoms(&mut |name, next| {
            if next {
                out.insert(name);
            }
        });
        out
    }

    fn visit_atoms<'a>(&'a self, f: &mut impl FnMut(&'a str, bool)) {
        match self {
            Formula::True | Formula::False => {}
            Formula::Atom(p) => f(p, false),
            Formula::Next(p) => f(p, true),
            Formula::Not(g) => g.visit_atoms(f),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) | Formula::Iff(a, b) => {
                a.visit_atoms(f);
                b.visit_atoms(f);
            }
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            Formula::Iff(..) => 1,
            Formula::Implies(..) => 2,
            Formula::Or(..) => 3,
            Formula::And(..) => 4,
            Formula::Not(_) => 5,
            _ => 6,
        }
    }
}

// Canonical printing: minimal parentheses, Slugs operator set.
// `&`, `|` and `<->` associate to the left, `->` to the right.
impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Formula::True => write!(f, "TRUE"),
            Formula::False => write!(f, "FALSE"),
            Formula::Atom(p) => write!(f, "{p}"),
            Formula::Next(p) => write!(f, "{p}'"),
            Formula::Not(g) => {
                if g.precedence() < 5 {
                    write!(f, "!({g})")
                } else {
                    write!(f, "!{g}")
                }
            }
            Formula::And(a, b) => write_binary(f, self, a, b, "&", false),
            Formula::Or(a, b) => write_binary(f, self, a, b, "|", false),
            Formula::Implies(a, b) => write_binary(f, self, a, b, "->", true),
            Formula::Iff(a, b) => write_binary(f, self, a, b, "<->", false),
        }
    }
}

fn write_binary(
    f: &mut fmt::Formatter<'_>,
    parent: &Formula,
    lhs: &Formula,
    rhs: &Formula,
    op: &str,
    right_assoc: bool,
) -> fmt::Result {
    let p = parent.precedence();
    let wrap_left = lhs.precedence() < p || (right_assoc && lhs.precedence() == p);
    let wrap_right = rhs.precedence() < p || (!right_assoc && rhs.precedence() == p);
    write_operand(f, lhs, wrap_left)?;
    write!(f, " {op} ")?;
    write_operand(f, rhs, wrap_right)
}

fn write_operand(f: &mut fmt::Formatter<'_>, g: &Formula, wrap: bool) -> fmt::Result {
    if wrap {
        write!(f, "({g})")
    } else {
        write!(f, "{g}")
    }
}
