//! Workspace abstraction, skills, and compilation of skills into GR(1) conjuncts.

mod compile;
mod skill;

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::logic::{Gr1Spec, LogicError, PropKind, Proposition};

pub use compile::{compile_skills, is_sub_specification};
pub use skill::{ConditionRole, Skill, SkillDefect, Transition};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AbstractionError {
    #[error("input '{0}' has no grounding descriptor")]
    MissingGrounding(String),
    #[error("abstraction propositions must be inputs; '{0}' is an output")]
    OutputInAbstraction(String),
    #[error("group '{group}' names unknown or non-controllable proposition '{name}'")]
    BadGroupMember { group: String, name: String },
    #[error("proposition '{0}' belongs to more than one group")]
    OverlappingGroups(String),
    #[error("skill name '{0}' is used twice or clashes with an input")]
    DuplicateSkillName(String),
    #[error("{skill} {role} is not a complete controllable input state: missing {missing}")]
    IncompleteConditionState {
        skill: String,
        role: ConditionRole,
        missing: String,
    },
    #[error("invalid skill {skill}: {defect}")]
    InvalidSkill { skill: String, defect: String },
    #[error(transparent)]
    Logic(#[from] LogicError),
    #[error("malformed abstraction file: {0}")]
    Json(String),
}

/// Human-readable meaning of an input, with optional object/region tags.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Grounding {
    pub description: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub object: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub region: Option<String>,
}

/// Controllable propositions that together describe one object or track.
///
/// In an exclusive group exactly one member holds (e.g. the base location);
/// otherwise members are independent flags (e.g. swarm occupancy).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Group {
    pub name: String,
    pub members: Vec<String>,
    #[serde(default = "yes")]
    pub exclusive: bool,
}

fn yes() -> bool {
    true
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawAbstraction", into = "RawAbstraction")]
pub struct Abstraction {
    inputs: Vec<Proposition>,
    grounding: BTreeMap<String, Grounding>,
    groups: Vec<Group>,
    topology: BTreeMap<String, Vec<String>>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RawAbstraction {
    pub inputs: Vec<Proposition>,
    pub grounding: BTreeMap<String, Grounding>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub groups: Vec<Group>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub topology: BTreeMap<String, Vec<String>>,
}

impl TryFrom<RawAbstraction> for Abstraction {
    type Error = AbstractionError;

    fn try_from(raw: RawAbstraction) -> Result<Self, Self::Error> {
        Abstraction::new(raw.inputs, raw.grounding, raw.groups, raw.topology)
    }
}

impl From<Abstraction> for RawAbstraction {
    fn from(a: Abstraction) -> Self {
        RawAbstraction {
            inputs: a.inputs,
            grounding: a.grounding,
            groups: a.groups,
            topology: a.topology,
        }
    }
}

impl Abstraction {
    /// Builds an abstraction. When `groups` is empty, controllable inputs are
    /// grouped by their grounding `object` tag (exclusive); untagged ones
    /// become single-member groups.
    pub fn new(
        inputs: Vec<Proposition>,
        grounding: BTreeMap<String, Grounding>,
        groups: Vec<Group>,
        topology: BTreeMap<String, Vec<String>>,
    ) -> Result<Self, AbstractionError> {
        for p in &inputs {
            if p.kind == PropKind::Output {
                return Err(AbstractionError::OutputInAbstraction(p.name.clone()));
            }
            if !grounding.contains_key(&p.name) {
                return Err(AbstractionError::MissingGrounding(p.name.clone()));
            }
        }
        crate::logic::Universe::new(inputs.clone())?;
        let controllable: Vec<&str> = inputs
            .iter()
            .filter(|p| p.kind == PropKind::ControllableInput)
            .map(|p| p.name.as_str())
            .collect();
        let groups = if groups.is_empty() {
            derive_groups(&controllable, &grounding)
        } else {
            groups
        };
        let mut seen = BTreeSet::new();
        for g in &groups {
            for m in &g.members {
                if !controllable.contains(&m.as_str()) {
                    return Err(AbstractionError::BadGroupMember {
                        group: g.name.clone(),
                        name: m.clone(),
                    });
                }
                if !seen.insert(m.clone()) {
                    return Err(AbstractionError::OverlappingGroups(m.clone()));
                }
            }
        }
        let mut groups = groups;
        for c in controllable {
            if !seen.contains(c) {
                groups.push(Group {
                    name: c.to_string(),
                    members: vec![c.to_string()],
                    exclusive: false,
                });
            }
        }
        Ok(Self {
            inputs,
            grounding,
            groups,
            topology,
        })
    }

    pub fn from_json(text: &str) -> Result<Self, AbstractionError> {
        serde_json::from_str(text).map_err(|e| AbstractionError::Json(e.to_string()))
    }

    pub fn inputs(&self) -> &[Proposition] {
        &self.inputs
    }

    pub fn grounding(&self) -> &BTreeMap<String, Grounding> {
        &self.grounding
    }

    pub fn groups(&self) -> &[Group] {
        &self.groups
    }

    pub fn topology(&self) -> &BTreeMap<String, Vec<String>> {
        &self.topology
    }

    pub fn kind_of(&self, name: &str) -> Option<PropKind> {
        self.inputs.iter().find(|p| p.name == name).map(|p| p.kind)
    }

    pub fn controllable(&self) -> impl Iterator<Item = &str> {
        self.inputs
            .iter()
            .filter(|p| p.kind == PropKind::ControllableInput)
            .map(|p| p.name.as_str())
    }

    pub fn group_of(&self, name: &str) -> Option<&Group> {
        self.groups.iter().find(|g| g.members.iter().any(|m| m == name))
    }
}

fn derive_groups(controllable: &[&str], grounding: &BTreeMap<String, Grounding>) -> Vec<Group> {
    let mut by_object: Vec<Group> = Vec::new();
    for name in controllable {
        let Some(object) = grounding.get(*name).and_then(|g| g.object.clone()) else {
            continue;
        };
        match by_object.iter_mut().find(|g| g.name == object) {
            Some(g) => g.members.push(name.to_string()),
            None => by_object.push(Group {
                name: object,
                members: vec![name.to_string()],
                exclusive: true,
            }),
        }
    }
    by_object
}

/// A task specification φ_task paired with the full specification it refines.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TaskSpec(Gr1Spec);

impl TaskSpec {
    pub fn new(task: Gr1Spec, full: &Gr1Spec) -> Option<Self> {
        is_sub_specification(&task, full).then_some(Self(task))
    }

    pub fn spec(&self) -> &Gr1Spec {
        &self.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ground(desc: &str, object: Option<&str>) -> Grounding {
        Grounding {
            description: desc.into(),
            object: object.map(Into::into),
            region: None,
        }
    }

    #[test]
    fn groups_follow_object_tags() {
        let inputs = vec![
            Proposition::new("p_base_x0", PropKind::ControllableInput),
            Proposition::new("p_base_x1", PropKind::ControllableInput),
            Proposition::new("door", PropKind::ControllableInput),
            Proposition::new("empty", PropKind::UncontrollableInput),
        ];
        let grounding = BTreeMap::from([
            ("p_base_x0".to_string(), ground("base in x0", Some("base"))),
            ("p_base_x1".to_string(), ground("base in x1", Some("base"))),
            ("door".to_string(), ground("door open", None)),
            ("empty".to_string(), ground("cup empty", None)),
        ]);
        let a = Abstraction::new(inputs, grounding, vec![], BTreeMap::new()).unwrap();
        assert_eq!(a.groups().len(), 2);
        assert_eq!(a.groups()[0].members, ["p_base_x0", "p_base_x1"]);
        assert!(a.groups()[0].exclusive);
        assert!(!a.group_of("door").unwrap().exclusive);
        assert!(a.group_of("empty").is_none());
    }

    #[test]
    fn missing_grounding_is_an_error() {
        let inputs = vec![Proposition::new("a", PropKind::ControllableInput)];
        let err = Abstraction::new(inputs, BTreeMap::new(), vec![], BTreeMap::new()).unwrap_err();
        assert_eq!(err, AbstractionError::MissingGrounding("a".into()));
    }
}
