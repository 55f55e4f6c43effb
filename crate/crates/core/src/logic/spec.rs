use serde::{Deserialize, Serialize};

use super::{parse_with, Formula, LogicError, PropKind, Proposition, Universe};

/// A GR(1) specification `(env_init ∧ □env_safety ∧ □◇env_liveness) →
/// (sys_init ∧ □sys_safety ∧ □◇sys_liveness)`.
///
/// Construct through [`Gr1Spec::new`] so that the universe is validated; the
/// value is immutable afterwards.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawSpec", into = "RawSpec")]
pub struct Gr1Spec {
    universe: Universe,
    env_init: Formula,
    env_safety: Vec<Formula>,
    env_liveness: Vec<Formula>,
    sys_init: Formula,
    sys_safety: Vec<Formula>,
    sys_liveness: Vec<Formula>,
}

impl Gr1Spec {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        propositions: Vec<Proposition>,
        env_init: Formula,
        env_safety: Vec<Formula>,
        env_liveness: Vec<Formula>,
        sys_init: Formula,
        sys_safety: Vec<Formula>,
        mut sys_liveness: Vec<Formula>,
    ) -> Result<Self, LogicError> {
        let universe = Universe::new(propositions)?;
        if sys_liveness.is_empty() {
            sys_liveness.push(Formula::True);
        }
        let spec = Self {
            universe,
            env_init,
            env_safety,
            env_liveness,
            sys_init,
            sys_safety,
            sys_liveness,
        };
        spec.validate()?;
        Ok(spec)
    }

    fn validate(&self) -> Result<(), LogicError> {
        let u = &self.universe;
        let check_known = |section: String, f: &Formula| -> Result<(), LogicError> {
            for name in f.current_atoms().into_iter().chain(f.next_atoms()) {
                if !u.contains(name) {
                    return Err(LogicError::InSection {
                        section,
                        source: Box::new(LogicError::UnknownProposition {
                            name: name.to_string(),
                            position: 0,
                        }),
                    });
                }
            }
            Ok(())
        };
        let no_next = |section: String, f: &Formula| -> Result<(), LogicError> {
            if let Some(name) = f.next_atoms().into_iter().next() {
                return Err(LogicError::InSection {
                    section,
                    source: Box::new(LogicError::NextInStateFormula {
                        name: name.to_string(),
                    }),
                });
            }
            Ok(())
        };

        check_known("env_init".into(), &self.env_init)?;
        no_next("env_init".into(), &self.env_init)?;
        if let Some(name) = self
            .env_init
            .current_atoms()
            .into_iter()
            .find(|n| u.kind_of(n) == Some(PropKind::Output))
        {
            return Err(LogicError::OutputInEnvInit {
                name: name.to_string(),
            });
        }
        check_known("sys_init".into(), &self.sys_init)?;
        no_next("sys_init".into(), &self.sys_init)?;
        for (i, f) in self.env_liveness.iter().enumerate() {
            check_known(format!("env_liveness[{i}]"), f)?;
            no_next(format!("env_liveness[{i}]"), f)?;
        }
        for (i, f) in self.sys_liveness.iter().enumerate() {
            check_known(format!("sys_liveness[{i}]"), f)?;
            no_next(format!("sys_liveness[{i}]"), f)?;
        }
        for (i, f) in self.sys_safety.iter().enumerate() {
            check_known(format!("sys_safety[{i}]"), f)?;
        }
        for (i, f) in self.env_safety.iter().enumerate() {
            check_known(format!("env_safety[{i}]"), f)?;
            for name in f.next_atoms() {
                if u.kind_of(name) == Some(PropKind::Output) {
                    return Err(LogicError::NextOverOutput {
                        section: "env_safety",
                        name: name.to_string(),
                    });
                }
            }
        }
        Ok(())
    }

    pub fn universe(&self) -> &Universe {
        &self.universe
    }

    pub fn propositions(&self) -> &[Proposition] {
        self.universe.props()
    }

    pub fn env_init(&self) -> &Formula {
        &self.env_init
    }

    pub fn env_safety(&self) -> &[Formula] {
        &self.env_safety
    }

    pub fn env_liveness(&self) -> &[Formula] {
        &self.env_liveness
    }

    pub fn sys_init(&self) -> &Formula {
        &self.sys_init
    }

    pub fn sys_safety(&self) -> &[Formula] {
        &self.sys_safety
    }

    pub fn sys_liveness(&self) -> &[Formula] {
        &self.sys_liveness
    }

    /// Copy with replaced parts; the result is re-validated.
    pub fn rebuild(
        &self,
        propositions: Vec<Proposition>,
        env_safety: Vec<Formula>,
        env_liveness: Vec<Formula>,
        sys_safety: Vec<Formula>,
    ) -> Result<Self, LogicError> {
        Self::new(
            propositions,
            self.env_init.clone(),
            env_safety,
            env_liveness,
            self.sys_init.clone(),
            sys_safety,
            self.sys_liveness.clone(),
        )
    }

    pub fn with_sys_init(&self, sys_init: Formula) -> Result<Self, LogicError> {
        Self::new(
            self.propositions().to_vec(),
            self.env_init.clone(),
            self.env_safety.clone(),
            self.env_liveness.clone(),
            sys_init,
            self.sys_safety.clone(),
            self.sys_liveness.clone(),
        )
    }

    pub fn with_env_safety(&self, env_safety: Vec<Formula>) -> Result<Self, LogicError> {
        self.rebuild(
            self.propositions().to_vec(),
            env_safety,
            self.env_liveness.clone(),
            self.sys_safety.clone(),
        )
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("spec serializes")
    }
}

/// Wire form of [`Gr1Spec`]: formulas as Slugs-syntax strings.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RawSpec {
    pub propositions: Vec<Proposition>,
    #[serde(default = "true_text")]
    pub env_init: String,
    #[serde(default)]
    pub env_safety: Vec<String>,
    #[serde(default)]
    pub env_liveness: Vec<String>,
    #[serde(default = "true_text")]
    pub sys_init: String,
    #[serde(default)]
    pub sys_safety: Vec<String>,
    #[serde(default)]
    pub sys_liveness: Vec<String>,
}

fn true_text() -> String {
    "TRUE".into()
}

impl TryFrom<RawSpec> for Gr1Spec {
    type Error = LogicError;

    fn try_from(raw: RawSpec) -> Result<Self, Self::Error> {
        let universe = Universe::new(raw.propositions.clone())?;
        let known = |n: &str| universe.contains(n);
        let one = |section: String, text: &str| {
            parse_with(text, &known).map_err(|e| LogicError::InSection {
                section,
                source: Box::new(e),
            })
        };
        let many = |section: &str, items: &[String]| -> Result<Vec<Formula>, LogicError> {
            items
                .iter()
                .enumerate()
                .map(|(i, t)| one(format!("{section}[{i}]"), t))
                .collect()
        };
        Gr1Spec::new(
            raw.propositions.clone(),
            one("env_init".into(), &raw.env_init)?,
            many("env_safety", &raw.env_safety)?,
            many("env_liveness", &raw.env_liveness)?,
            one("sys_init".into(), &raw.sys_init)?,
            many("sys_safety", &raw.sys_safety)?,
            many("sys_liveness", &raw.sys_liveness)?,
        )
    }
}

impl From<Gr1Spec> for RawSpec {
    fn from(spec: Gr1Spec) -> Self {
        let texts = |fs: &[Formula]| fs.iter().map(ToString::to_string).collect();
        RawSpec {
            propositions: spec.propositions().to_vec(),
            env_init: spec.env_init.to_string(),
            env_safety: texts(&spec.env_safety),
            env_liveness: texts(&spec.env_liveness),
            sys_init: spec.sys_init.to_string(),
            sys_safety: texts(&spec.sys_safety),
            sys_liveness: texts(&spec.sys_liveness),
        }
    }
}
