//! Assumption violations, relaxation of violated env-safety conjuncts, and
//! the repaired specification φ'.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::abstraction::{compile_skills, Abstraction, AbstractionError, Skill};
use crate::logic::{eval_transition, Assignment, Formula, Gr1Spec, LogicError, PropKind};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ViolationError {
    #[error("the transition violates no environment safety assumption")]
    NoViolation,
    #[error("violation mentions unknown proposition '{0}'")]
    UnknownProposition(String),
    #[error("violation lists '{name}' in {part}, but it is {kind}")]
    WrongKind {
        name: String,
        part: &'static str,
        kind: &'static str,
    },
    #[error(transparent)]
    Abstraction(#[from] AbstractionError),
    #[error(transparent)]
    Logic(#[from] LogicError),
    #[error("malformed violation file: {0}")]
    Json(String),
}

/// An observed transition `(σ_X, σ_Y, σ'_X)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(from = "ViolationWire", into = "(Assignment, Assignment, Assignment)")]
pub struct Violation {
    pub sigma_x: Assignment,
    pub sigma_y: Assignment,
    pub sigma_x_next: Assignment,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum ViolationWire {
    Triplet(Assignment, Assignment, Assignment),
    Named {
        sigma_x: Assignment,
        sigma_y: Assignment,
        sigma_x_next: Assignment,
    },
}

impl From<ViolationWire> for Violation {
    fn from(w: ViolationWire) -> Self {
        match w {
            ViolationWire::Triplet(sigma_x, sigma_y, sigma_x_next)
            | ViolationWire::Named {
                sigma_x,
                sigma_y,
                sigma_x_next,
            } => Self {
                sigma_x,
                sigma_y,
                sigma_x_next,
            },
        }
    }
}

impl From<Violation> for (Assignment, Assignment, Assignment) {
    fn from(v: Violation) -> Self {
        (v.sigma_x, v.sigma_y, v.sigma_x_next)
    }
}

impl Violation {
    pub fn new(sigma_x: Assignment, sigma_y: Assignment, sigma_x_next: Assignment) -> Self {
        Self {
            sigma_x,
            sigma_y,
            sigma_x_next,
        }
    }

    pub fn from_json(text: &str) -> Result<Self, ViolationError> {
        serde_json::from_str(text).map_err(|e| ViolationError::Json(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("violation serializes")
    }

    /// Current state `σ_X ∪ σ_Y`.
    pub fn current(&self) -> Assignment {
        self.sigma_x.union(&self.sigma_y)
    }

    /// Checks that every name is known and sits in the right part.
    pub fn validate(&self, spec: &Gr1Spec) -> Result<(), ViolationError> {
        let u = spec.universe();
        let parts: [(&'static str, &Assignment, bool); 3] = [
            ("sigma_x", &self.sigma_x, true),
            ("sigma_y", &self.sigma_y, false),
            ("sigma_x_next", &self.sigma_x_next, true),
        ];
        for (part, a, inputs) in parts {
            for name in a.iter() {
                let kind = u
                    .kind_of(name)
                    .ok_or_else(|| ViolationError::UnknownProposition(name.to_string()))?;
                if kind.is_input() != inputs {
                    return Err(ViolationError::WrongKind {
                        name: name.to_string(),
                        part,
                        kind: if kind == PropKind::Output {
                            "an output"
                        } else {
                            "an input"
                        },
                    });
                }
            }
        }
        Ok(())
    }

    /// χ(v): every proposition's current value and every input's next value.
    pub fn characteristic(&self, spec: &Gr1Spec) -> Formula {
        let cur = self.current();
        let props = spec.propositions();
        let now = props
            .iter()
            .map(|p| Formula::literal(&p.name, cur.contains(&p.name), false));
        let next = props
            .iter()
            .filter(|p| p.kind.is_input())
            .map(|p| Formula::literal(&p.name, self.sigma_x_next.contains(&p.name), true));
        Formula::conjunction(now.chain(next))
    }
}

/// Indices of the env-safety conjuncts falsified by the transition.
pub fn detect_violation(spec: &Gr1Spec, v: &Violation) -> Vec<usize> {
    let cur = v.current();
    spec.env_safety()
        .iter()
        .enumerate()
        .filter(|(_, f)| !eval_transition(f, &cur, &v.sigma_x_next))
        .map(|(i, _)| i)
        .collect()
}

fn already_relaxed(f: &Formula, chi: &Formula) -> bool {
    matches!(f, Formula::Or(_, r) if **r == *chi)
}

/// Replaces each violated conjunct ψ by ψ ∨ χ(v).
pub fn relax_assumptions(spec: &Gr1Spec, v: &Violation) -> Result<Gr1Spec, ViolationError> {
    let violated = detect_violation(spec, v);
    let chi = v.characteristic(spec);
    if violated.is_empty() {
        if spec.env_safety().iter().any(|f| already_relaxed(f, &chi)) {
            return Ok(spec.clone());
        }
        return Err(ViolationError::NoViolation);
    }
    let env_safety = spec
        .env_safety()
        .iter()
        .enumerate()
        .map(|(i, f)| {
            if violated.contains(&i) {
                Formula::or(f.clone(), chi.clone())
            } else {
                f.clone()
            }
        })
        .collect();
    Ok(spec.with_env_safety(env_safety)?)
}

/// φ' = relax(compile(abstraction, skills ++ new_skills, base), v).
///
/// `base` is the specification before any skill is compiled in, and `skills`
/// are the existing skills; compiling all skills together keeps the idle
/// frame axiom aware of the new ones.
pub fn apply_repair(
    base: &Gr1Spec,
    abstraction: &Abstraction,
    skills: &[Skill],
    new_skills: &[Skill],
    v: &Violation,
) -> Result<Gr1Spec, ViolationError> {
    let all: Vec<Skill> = skills.iter().chain(new_skills).cloned().collect();
    let compiled = compile_skills(abstraction, &all, base)?;
    relax_assumptions(&compiled, v)
}
