//! Propositions, assignments, formulas and GR(1) specifications.

mod eval;
mod formula;
mod parse;
mod spec;

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use eval::{eval_state, eval_transition, Compiled};
pub use formula::Formula;
pub use parse::{parse_unchecked, parse_with};
pub use spec::{Gr1Spec, RawSpec};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LogicError {
    #[error("syntax error at offset {position}: {message}")]
    Syntax { position: usize, message: String },
    #[error("unknown proposition '{name}' at offset {position}")]
    UnknownProposition { name: String, position: usize },
    #[error("the until operator is not part of the GR(1) fragment (offset {position})")]
    UntilNotAllowed { position: usize },
    #[error("next-state atom '{name}' in a state formula")]
    NextInStateFormula { name: String },
    #[error("proposition '{0}' declared more than once")]
    DuplicateProposition(String),
    #[error("{section} formula reads next-state value of '{name}', which is not an input")]
    NextOverOutput { section: &'static str, name: String },
    #[error("env_init mentions output '{name}'; it may only constrain inputs")]
    OutputInEnvInit { name: String },
    #[error("{count} propositions exceed the 64 supported by the explicit solver")]
    TooManyPropositions { count: usize },
    #[error("invalid formula in {section}: {source}")]
    InSection {
        section: String,
        #[source]
        source: Box<LogicError>,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PropKind {
    ControllableInput,
    UncontrollableInput,
    Output,
}

impl PropKind {
    pub fn is_input(self) -> bool {
        !matches!(self, PropKind::Output)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Proposition {
    pub name: String,
    pub kind: PropKind,
}

impl Proposition {
    pub fn new(name: impl Into<String>, kind: PropKind) -> Self {
        Self {
            name: name.into(),
            kind,
        }
    }
}

/// The set of propositions that are true; everything else is false.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Assignment(BTreeSet<String>);

impl Assignment {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_names<S: Into<String>>(names: impl IntoIterator<Item = S>) -> Self {
        Self(names.into_iter().map(Into::into).collect())
    }

    pub fn contains(&self, name: &str) -> bool {
        self.0.contains(name)
    }

    pub fn insert(&mut self, name: impl Into<String>) -> bool {
        self.0.insert(name.into())
    }

    pub fn iter(&self) -> impl Iterator<Item = &str> {
        self.0.iter().map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn union(&self, other: &Assignment) -> Assignment {
        Assignment(self.0.union(&other.0).cloned().collect())
    }

    pub fn names(&self) -> &BTreeSet<String> {
        &self.0
    }
}

impl fmt::Display for Assignment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, n) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{n}")?;
        }
        write!(f, "}}")
    }
}

impl<S: Into<String>> FromIterator<S> for Assignment {
    fn from_iter<T: IntoIterator<Item = S>>(iter: T) -> Self {
        Self::from_names(iter)
    }
}

/// Ordered proposition list with a name index; bit `i` of an encoded state
/// is the value of proposition `i`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Universe {
    props: Vec<Proposition>,
    index: HashMap<String, usize>,
}

impl Universe {
    pub fn new(props: Vec<Proposition>) -> Result<Self, LogicError> {
        let mut index = HashMap::with_capacity(props.len());
        for (i, p) in props.iter().enumerate() {
            if index.insert(p.name.clone(), i).is_some() {
                return Err(LogicError::DuplicateProposition(p.name.clone()));
            }
        }
        Ok(Self { props, index })
    }

    pub fn props(&self) -> &[Proposition] {
        &self.props
    }

    pub fn len(&self) -> usize {
        self.props.len()
    }

    pub fn is_empty(&self) -> bool {
        self.props.is_empty()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    pub fn kind_of(&self, name: &str) -> Option<PropKind> {
        self.index_of(name).map(|i| self.props[i].kind)
    }

    pub fn contains(&self, name: &str) -> bool {
        self.index.contains_key(name)
    }

    pub fn names_of(&self, kind: impl Fn(PropKind) -> bool) -> impl Iterator<Item = &str> {
        self.props
            .iter()
            .filter(move |p| kind(p.kind))
            .map(|p| p.name.as_str())
    }

    fn mask(&self, pred: impl Fn(PropKind) -> bool) -> u64 {
        self.props
            .iter()
            .enumerate()
            .filter(|(_, p)| pred(p.kind))
            .fold(0, |m, (i, _)| m | 1 << i)
    }

    pub fn input_mask(&self) -> u64 {
        self.mask(PropKind::is_input)
    }

    pub fn output_mask(&self) -> u64 {
        self.mask(|k| k == PropKind::Output)
    }

    pub fn controllable_mask(&self) -> u64 {
        self.mask(|k| k == PropKind::ControllableInput)
    }

    /// Encodes an assignment, ignoring names outside the universe.
    pub fn encode(&self, a: &Assignment) -> u64 {
        a.iter()
            .filter_map(|n| self.index_of(n))
            .fold(0, |m, i| m | 1 << i)
    }

    pub fn decode(&self, bits: u64) -> Assignment {
        self.props
            .iter()
            .enumerate()
            .filter(|(i, _)| bits >> i & 1 == 1)
            .map(|(_, p)| p.name.clone())
            .collect()
    }
}
