use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use super::{Abstraction, AbstractionError};
use crate::logic::{Assignment, Formula, PropKind};

/// One step of a skill: from `precondition` the environment moves the
/// controllable inputs to one of `postconditions`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(from = "(Assignment, Vec<Assignment>)", into = "(Assignment, Vec<Assignment>)")]
pub struct Transition {
    pub precondition: Assignment,
    pub postconditions: Vec<Assignment>,
}

impl From<(Assignment, Vec<Assignment>)> for Transition {
    fn from((precondition, postconditions): (Assignment, Vec<Assignment>)) -> Self {
        Self {
            precondition,
            postconditions,
        }
    }
}

impl From<Transition> for (Assignment, Vec<Assignment>) {
    fn from(t: Transition) -> Self {
        (t.precondition, t.postconditions)
    }
}

impl Transition {
    pub fn new(precondition: Assignment, postconditions: Vec<Assignment>) -> Self {
        Self {
            precondition,
            postconditions,
        }
    }
}

/// Where a condition sits inside a skill chain.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ConditionRole {
    Precondition { transition: usize },
    Postcondition { transition: usize, index: usize },
}

impl ConditionRole {
    /// Path into the candidate JSON, e.g. `[0][1][0]`.
    pub fn path(&self) -> String {
        match self {
            ConditionRole::Precondition { transition } => format!("[{transition}][0]"),
            ConditionRole::Postcondition { transition, index } => {
                format!("[{transition}][1][{index}]")
            }
        }
    }
}

impl fmt::Display for ConditionRole {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConditionRole::Precondition { transition: 0 } => write!(f, "precondition"),
            ConditionRole::Precondition { transition } => {
                write!(f, "intermediate state {transition}")
            }
            ConditionRole::Postcondition { transition, index } => {
                write!(f, "postcondition {index} of transition {transition}")
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SkillDefect {
    EmptyChain,
    NoPostconditions { transition: usize },
    UnknownName { name: String, role: ConditionRole },
    NotControllable { name: String, role: ConditionRole },
    Incomplete { group: String, role: ConditionRole },
    Ambiguous { group: String, role: ConditionRole },
    Disconnected { transition: usize, index: usize },
    Cyclic,
}

impl fmt::Display for SkillDefect {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SkillDefect::EmptyChain => write!(f, "the skill has no transitions"),
            SkillDefect::NoPostconditions { transition } => {
                write!(f, "transition {transition} has no postconditions")
            }
            SkillDefect::UnknownName { name, role } => {
                write!(f, "{name} in the {role} is not a known proposition")
            }
            SkillDefect::NotControllable { name, role } => {
                write!(f, "{name} in the {role} is not a controllable input")
            }
            SkillDefect::Incomplete { group, role } => {
                write!(f, "the {role} does not determine {group}")
            }
            SkillDefect::Ambiguous { group, role } => {
                write!(f, "the {role} places {group} in more than one state")
            }
            SkillDefect::Disconnected { transition, index } => write!(
                f,
                "postcondition {index} of transition {transition} is not the precondition of a later transition"
            ),
            SkillDefect::Cyclic => write!(f, "the transitions form a cycle"),
        }
    }
}

/// A validated skill together with the controllable propositions it governs.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Skill {
    name: String,
    chain: Vec<Transition>,
    scope: Vec<String>,
}

impl Skill {
    pub fn new(
        name: impl Into<String>,
        chain: Vec<Transition>,
        abstraction: &Abstraction,
    ) -> Result<Self, AbstractionError> {
        let name = name.into();
        let defects = Self::defects(&chain, abstraction);
        if let Some(d) = defects.into_iter().next() {
            return Err(match d {
                SkillDefect::Incomplete { group, role } => {
                    AbstractionError::IncompleteConditionState {
                        skill: name,
                        role,
                        missing: group,
                    }
                }
                other => AbstractionError::InvalidSkill {
                    skill: name,
                    defect: other.to_string(),
                },
            });
        }
        let scope = scope_of(&chain, abstraction);
        Ok(Self { name, chain, scope })
    }

    /// Builds skills from the wire form `{name: [[pre, [post, ...]], ...]}`.
    pub fn from_map(
        map: BTreeMap<String, Vec<Transition>>,
        abstraction: &Abstraction,
    ) -> Result<Vec<Self>, AbstractionError> {
        map.into_iter()
            .map(|(name, chain)| Self::new(name, chain, abstraction))
            .collect()
    }

    pub fn load_json(text: &str, abstraction: &Abstraction) -> Result<Vec<Self>, AbstractionError> {
        let map: BTreeMap<String, Vec<Transition>> =
            serde_json::from_str(text).map_err(|e| AbstractionError::Json(e.to_string()))?;
        Self::from_map(map, abstraction)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn chain(&self) -> &[Transition] {
        &self.chain
    }

    /// Controllable propositions whose value the skill determines, in
    /// abstraction order.
    pub fn scope(&self) -> &[String] {
        &self.scope
    }

    /// The condition as a conjunction of literals over the skill's scope.
    pub fn condition(&self, c: &Assignment, next: bool) -> Formula {
        Formula::conjunction(
            self.scope
                .iter()
                .map(|p| Formula::literal(p, c.contains(p), next)),
        )
    }

    /// Distinct preconditions in chain order.
    pub fn preconditions(&self) -> Vec<&Assignment> {
        let mut out: Vec<&Assignment> = Vec::new();
        for t in &self.chain {
            if !out.contains(&&t.precondition) {
                out.push(&t.precondition);
            }
        }
        out
    }

    /// All structural problems of a chain, in chain order.
    pub fn defects(chain: &[Transition], abstraction: &Abstraction) -> Vec<SkillDefect> {
        let mut out = Vec::new();
        if chain.is_empty() {
            out.push(SkillDefect::EmptyChain);
            return out;
        }
        let conditions = conditions(chain);
        for (role, c) in &conditions {
            for name in c.iter() {
                match abstraction.kind_of(name) {
                    None => out.push(SkillDefect::UnknownName {
                        name: name.to_string(),
                        role: *role,
                    }),
                    Some(PropKind::ControllableInput) => {}
                    Some(_) => out.push(SkillDefect::NotControllable {
                        name: name.to_string(),
                        role: *role,
                    }),
                }
            }
        }
        for (k, t) in chain.iter().enumerate() {
            if t.postconditions.is_empty() {
                out.push(SkillDefect::NoPostconditions { transition: k });
            }
        }
        let mentioned = mentioned_groups(chain, abstraction);
        for (role, c) in &conditions {
            for g in abstraction.groups() {
                if !g.exclusive || !mentioned.contains(g.name.as_str()) {
                    continue;
                }
                let hits = g.members.iter().filter(|m| c.contains(m)).count();
                if hits == 0 {
                    out.push(SkillDefect::Incomplete {
                        group: g.name.clone(),
                        role: *role,
                    });
                } else if hits > 1 {
                    out.push(SkillDefect::Ambiguous {
                        group: g.name.clone(),
                        role: *role,
                    });
                }
            }
        }
        for (k, t) in chain.iter().enumerate().take(chain.len() - 1) {
            for (i, post) in t.postconditions.iter().enumerate() {
                if !chain[k + 1..].iter().any(|later| &later.precondition == post) {
                    out.push(SkillDefect::Disconnected {
                        transition: k,
                        index: i,
                    });
                }
            }
        }
        if has_cycle(chain) {
            out.push(SkillDefect::Cyclic);
        }
        out
    }
}

fn conditions(chain: &[Transition]) -> Vec<(ConditionRole, &Assignment)> {
    let mut out = Vec::new();
    for (k, t) in chain.iter().enumerate() {
        out.push((ConditionRole::Precondition { transition: k }, &t.precondition));
        for (i, p) in t.postconditions.iter().enumerate() {
            out.push((
                ConditionRole::Postcondition {
                    transition: k,
                    index: i,
                },
                p,
            ));
        }
    }
    out
}

fn mentioned_groups<'a>(chain: &[Transition], abstraction: &'a Abstraction) -> BTreeSet<&'a str> {
    conditions(chain)
        .into_iter()
        .flat_map(|(_, c)| c.iter())
        .filter_map(|n| abstraction.group_of(n))
        .map(|g| g.name.as_str())
        .collect()
}

fn scope_of(chain: &[Transition], abstraction: &Abstraction) -> Vec<String> {
    let mentioned = mentioned_groups(chain, abstraction);
    abstraction
        .controllable()
        .filter(|p| {
            abstraction
                .group_of(p)
                .is_some_and(|g| mentioned.contains(g.name.as_str()))
        })
        .map(str::to_string)
        .collect()
}

fn has_cycle(chain: &[Transition]) -> bool {
    let mut edges: BTreeMap<&Assignment, Vec<&Assignment>> = BTreeMap::new();
    for t in chain {
        edges
            .entry(&t.precondition)
            .or_default()
            .extend(t.postconditions.iter());
    }
    // 0 unvisited, 1 on stack, 2 done
    let mut color: BTreeMap<&Assignment, u8> = BTreeMap::new();
    fn visit<'a>(
        n: &'a Assignment,
        edges: &BTreeMap<&'a Assignment, Vec<&'a Assignment>>,
        color: &mut BTreeMap<&'a Assignment, u8>,
    ) -> bool {
        match color.get(n).copied().unwrap_or(0) {
            1 => return true,
            2 => return false,
            _ => {}
        }
        color.insert(n, 1);
        for m in edges.get(n).into_iter().flatten() {
            if visit(m, edges, color) {
                return true;
            }
        }
        color.insert(n, 2);
        false
    }
    let starts: Vec<&Assignment> = edges.keys().copied().collect();
    starts.into_iter().any(|s| visit(s, &edges, &mut color))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::abstraction::{Grounding, Group};
    use crate::logic::Proposition;

    fn world() -> Abstraction {
        let names = [
            ("p_base_x1", PropKind::ControllableInput),
            ("p_base_x2", PropKind::ControllableInput),
            ("p_base_x4", PropKind::ControllableInput),
            ("p_cup_ee", PropKind::ControllableInput),
            ("p_cup_t2", PropKind::ControllableInput),
            ("empty", PropKind::UncontrollableInput),
        ];
        let inputs = names.iter().map(|(n, k)| Proposition::new(*n, *k)).collect();
        let grounding = names
            .iter()
            .map(|(n, _)| {
                (
                    n.to_string(),
                    Grounding {
                        description: n.to_string(),
                        object: None,
                        region: None,
                    },
                )
            })
            .collect();
        let groups = vec![
            Group {
                name: "base".into(),
                members: vec!["p_base_x1".into(), "p_base_x2".into(), "p_base_x4".into()],
                exclusive: true,
            },
            Group {
                name: "cup".into(),
                members: vec!["p_cup_ee".into(), "p_cup_t2".into()],
                exclusive: true,
            },
        ];
        Abstraction::new(inputs, grounding, groups, BTreeMap::new()).unwrap()
    }

    fn a(names: &[&str]) -> Assignment {
        Assignment::from_names(names.iter().copied())
    }

    fn y_new() -> Vec<Transition> {
        vec![
            Transition::new(a(&["p_base_x2", "p_cup_ee"]), vec![a(&["p_base_x1", "p_cup_ee"])]),
            Transition::new(a(&["p_base_x1", "p_cup_ee"]), vec![a(&["p_base_x4", "p_cup_ee"])]),
        ]
    }

    #[test]
    fn accepts_two_step_skill() {
        let s = Skill::new("new_skill_0", y_new(), &world()).unwrap();
        assert_eq!(s.scope().len(), 5);
        assert_eq!(
            s.condition(&a(&["p_base_x2", "p_cup_ee"]), true).to_string(),
            "!p_base_x1' & p_base_x2' & !p_base_x4' & p_cup_ee' & !p_cup_t2'"
        );
    }

    #[test]
    fn wire_form_round_trips() {
        let json = r#"{"new_skill_0": [[["p_base_x2", "p_cup_ee"], [["p_base_x1", "p_cup_ee"]]],
                                       [["p_base_x1", "p_cup_ee"], [["p_base_x4", "p_cup_ee"]]]]}"#;
        let skills = Skill::load_json(json, &world()).unwrap();
        assert_eq!(skills[0].chain(), y_new().as_slice());
    }

    #[test]
    fn uncontrollable_in_precondition() {
        let chain = vec![Transition::new(
            a(&["p_base_x2", "p_cup_ee", "empty"]),
            vec![a(&["p_base_x1", "p_cup_ee"])],
        )];
        let d = Skill::defects(&chain, &world());
        assert_eq!(
            d,
            vec![SkillDefect::NotControllable {
                name: "empty".into(),
                role: ConditionRole::Precondition { transition: 0 }
            }]
        );
    }

    #[test]
    fn incomplete_condition_names_group() {
        let chain = vec![Transition::new(a(&["p_base_x2", "p_cup_ee"]), vec![a(&["p_base_x1"])])];
        let err = Skill::new("s", chain, &world()).unwrap_err();
        assert_eq!(
            err,
            AbstractionError::IncompleteConditionState {
                skill: "s".into(),
                role: ConditionRole::Postcondition {
                    transition: 0,
                    index: 0
                },
                missing: "cup".into(),
            }
        );
    }

    #[test]
    fn cycles_and_gaps() {
        let back = vec![
            Transition::new(a(&["p_base_x2"]), vec![a(&["p_base_x1"])]),
            Transition::new(a(&["p_base_x1"]), vec![a(&["p_base_x2"])]),
        ];
        assert_eq!(Skill::defects(&back, &world()), vec![SkillDefect::Cyclic]);
        let gap = vec![
            Transition::new(a(&["p_base_x2"]), vec![a(&["p_base_x4"])]),
            Transition::new(a(&["p_base_x1"]), vec![a(&["p_base_x2"])]),
        ];
        assert_eq!(
            Skill::defects(&gap, &world()),
            vec![SkillDefect::Disconnected {
                transition: 0,
                index: 0
            }]
        );
    }
}
