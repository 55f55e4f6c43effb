//! Parsing and typechecking of skill candidates returned by the repair prompt.
//!
//! Grammar of a candidate set (a JSON object):
//!
//! ```text
//! <new_skill>: [<intermediate_transition>+]
//! <intermediate_transition> = [<precondition>, [<postcondition>+]]
//! <precondition> = [<controllable_input>+]
//! <postcondition> = [<controllable_input>+]
//! ```

use std::fmt;
use std::sync::LazyLock;

use regex::Regex;
use serde::de::{Deserializer, MapAccess, Visitor};
use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use crate::abstraction::{Abstraction, ConditionRole, Skill, SkillDefect, Transition};
use crate::analysis::Feedback;
use crate::logic::Assignment;

pub const RULE_OBJECT: &str = "{<new_skill>*}";
pub const RULE_NAME: &str = "new_skill_<k>";
pub const RULE_SKILL: &str = "<intermediate_transition>+";
pub const RULE_TRANSITION: &str = "[<precondition>, [<postcondition>+]]";
pub const RULE_POSTCONDITIONS: &str = "<postcondition>+";
pub const RULE_CONDITION: &str = "<controllable_input>+";
pub const RULE_IDENTIFIER: &str = "<controllable_input>";

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DslError {
    #[error("response contains no JSON code block")]
    NoCodeBlockFound,
}

static FENCE: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(r"(?s)```[ \t]*(?i:json)[ \t]*\r?\n(.*?)```").expect("fence regex")
});

static NAME: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"^new_skill_(0|[1-9][0-9]*)$").expect("name regex"));

/// Content of the last fenced JSON block, or the whole response when it is a
/// bare JSON object.
pub fn extract_json_block(response: &str) -> Result<String, DslError> {
    if let Some(c) = FENCE.captures_iter(response).last() {
        return Ok(c[1].trim().to_string());
    }
    let bare = response.trim();
    if matches!(serde_json::from_str::<Value>(bare), Ok(Value::Object(_))) {
        return Ok(bare.to_string());
    }
    Err(DslError::NoCodeBlockFound)
}

/// Where a candidate set came from.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub iteration: Option<usize>,
    pub response: Option<String>,
}

/// Parsed but not yet typechecked candidates, in response order.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SkillCandidateSet {
    pub skills: Vec<(String, Vec<Transition>)>,
    pub provenance: Provenance,
}

impl SkillCandidateSet {
    pub fn len(&self) -> usize {
        self.skills.len()
    }

    pub fn is_empty(&self) -> bool {
        self.skills.is_empty()
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.skills.iter().map(|(n, _)| n.as_str())
    }

    /// Wire form `{name: [[pre, [post, ...]], ...]}`.
    pub fn to_json_value(&self) -> Value {
        let map = self
            .skills
            .iter()
            .map(|(n, c)| (n.clone(), serde_json::to_value(c).expect("chain serializes")))
            .collect::<serde_json::Map<_, _>>();
        Value::Object(map)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SyntaxFinding {
    /// Empty for findings about the container.
    pub skill: String,
    /// Path below the skill, e.g. `[0][1][0]`.
    pub path: String,
    pub rule: String,
    pub token: Option<String>,
    pub message: String,
}

impl SyntaxFinding {
    fn new(skill: &str, path: String, rule: &str, token: Option<String>, message: String) -> Self {
        Self {
            skill: skill.to_string(),
            path,
            rule: rule.to_string(),
            token,
            message,
        }
    }

    /// Full path into the candidate object, e.g. `new_skill_0[0][1]`.
    pub fn full_path(&self) -> String {
        format!("{}{}", self.skill, self.path)
    }

    pub fn to_feedback(&self) -> Feedback {
        Feedback::syntax(self.full_path(), Some(self.rule.clone()), self.message.clone())
    }
}

impl fmt::Display for SyntaxFinding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

fn sorted(mut findings: Vec<SyntaxFinding>) -> Vec<SyntaxFinding> {
    findings.sort_by(|a, b| (&a.skill, &a.path).cmp(&(&b.skill, &b.path)));
    findings.dedup();
    findings
}

/// Object entries in source order, keeping duplicate keys.
struct Entries(Vec<(String, Value)>);

impl<'de> Deserialize<'de> for Entries {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        struct V;
        impl<'de> Visitor<'de> for V {
            type Value = Entries;
            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a JSON object")
            }
            fn visit_map<A: MapAccess<'de>>(self, mut m: A) -> Result<Entries, A::Error> {
                let mut out = Vec::new();
                while let Some((k, v)) = m.next_entry::<String, Value>()? {
                    out.push((k, v));
                }
                Ok(Entries(out))
            }
        }
        d.deserialize_map(V)
    }
}

fn condition(
    skill: &str,
    path: String,
    role: &str,
    v: &Value,
    out: &mut Vec<SyntaxFinding>,
) -> Option<Assignment> {
    let Some(items) = v.as_array() else {
        out.push(SyntaxFinding::new(
            skill,
            path,
            RULE_CONDITION,
            Some(v.to_string()),
            format!("the {role} of {skill} must be a list of controllable inputs."),
        ));
        return None;
    };
    if items.is_empty() {
        out.push(SyntaxFinding::new(
            skill,
            path,
            RULE_CONDITION,
            None,
            format!("the {role} of {skill} must name at least one controllable input."),
        ));
        return None;
    }
    let mut a = Assignment::new();
    let mut ok = true;
    for (i, item) in items.iter().enumerate() {
        match item.as_str() {
            Some(s) if !s.trim().is_empty() => {
                a.insert(s);
            }
            _ => {
                ok = false;
                out.push(SyntaxFinding::new(
                    skill,
                    format!("{path}[{i}]"),
                    RULE_IDENTIFIER,
                    Some(item.to_string()),
                    format!("{item} in the {role} of {skill} is not a proposition name."),
                ));
            }
        }
    }
    ok.then_some(a)
}

fn transition(skill: &str, k: usize, v: &Value, out: &mut Vec<SyntaxFinding>) -> Option<Transition> {
    let pair = match v.as_array() {
        Some(p) if p.len() == 2 => p,
        _ => {
            out.push(SyntaxFinding::new(
                skill,
                format!("[{k}]"),
                RULE_TRANSITION,
                Some(v.to_string()),
                format!(
                    "transition {k} of {skill} must be a pair [precondition, [postcondition, ...]]."
                ),
            ));
            return None;
        }
    };
    let pre = condition(skill, format!("[{k}][0]"), "precondition", &pair[0], out);
    let posts = match pair[1].as_array() {
        Some(p) if !p.is_empty() => {
            let parsed: Vec<Option<Assignment>> = p
                .iter()
                .enumerate()
                .map(|(i, c)| condition(skill, format!("[{k}][1][{i}]"), "postcondition", c, out))
                .collect();
            parsed.into_iter().collect::<Option<Vec<_>>>()
        }
        _ => {
            out.push(SyntaxFinding::new(
                skill,
                format!("[{k}][1]"),
                RULE_POSTCONDITIONS,
                Some(pair[1].to_string()),
                format!("transition {k} of {skill} must list at least one postcondition."),
            ));
            None
        }
    };
    Some(Transition::new(pre?, posts?))
}

/// Checks the candidate text against the grammar. Never panics.
pub fn parse_skills(text: &str) -> Result<SkillCandidateSet, Vec<SyntaxFinding>> {
    let entries = match serde_json::from_str::<Entries>(text) {
        Ok(Entries(e)) => e,
        Err(e) => {
            return Err(vec![SyntaxFinding::new(
                "",
                String::new(),
                RULE_OBJECT,
                None,
                format!("the response is not a JSON object of new skills: {e}."),
            )])
        }
    };
    let mut findings = Vec::new();
    let mut skills: Vec<(String, Vec<Transition>)> = Vec::new();
    for (name, value) in &entries {
        if !NAME.is_match(name) {
            findings.push(SyntaxFinding::new(
                name,
                String::new(),
                RULE_NAME,
                Some(name.clone()),
                format!("{name} is not a valid new skill name; use new_skill_0, new_skill_1, ..."),
            ));
            continue;
        }
        if skills.iter().any(|(n, _)| n == name) {
            findings.push(SyntaxFinding::new(
                name,
                String::new(),
                RULE_NAME,
                Some(name.clone()),
                format!("{name} is defined more than once."),
            ));
            continue;
        }
        let chain = match value.as_array() {
            Some(c) if !c.is_empty() => c,
            _ => {
                findings.push(SyntaxFinding::new(
                    name,
                    String::new(),
                    RULE_SKILL,
                    Some(value.to_string()),
                    format!("{name} must be a non-empty list of transitions."),
                ));
                continue;
            }
        };
        let parsed: Vec<Option<Transition>> = chain
            .iter()
            .enumerate()
            .map(|(k, t)| transition(name, k, t, &mut findings))
            .collect();
        if let Some(chain) = parsed.into_iter().collect::<Option<Vec<_>>>() {
            skills.push((name.clone(), chain));
        }
    }
    if findings.is_empty() {
        Ok(SkillCandidateSet {
            skills,
            provenance: Provenance::default(),
        })
    } else {
        Err(sorted(findings))
    }
}

fn side(role: &ConditionRole) -> &'static str {
    match role {
        ConditionRole::Precondition { .. } => "precondition",
        ConditionRole::Postcondition { .. } => "postcondition",
    }
}

fn defect_finding(skill: &str, d: &SkillDefect, abs: &Abstraction) -> SyntaxFinding {
    let members = |group: &str| {
        abs.groups()
            .iter()
            .find(|g| g.name == group)
            .map(|g| g.members.join(" or "))
            .unwrap_or_else(|| group.to_string())
    };
    match d {
        SkillDefect::EmptyChain => SyntaxFinding::new(
            skill,
            String::new(),
            RULE_SKILL,
            None,
            format!("{skill} must be a non-empty list of transitions."),
        ),
        SkillDefect::NoPostconditions { transition } => SyntaxFinding::new(
            skill,
            format!("[{transition}][1]"),
            RULE_POSTCONDITIONS,
            None,
            format!("transition {transition} of {skill} must list at least one postcondition."),
        ),
        SkillDefect::UnknownName { name, role } => SyntaxFinding::new(
            skill,
            role.path(),
            RULE_IDENTIFIER,
            Some(name.clone()),
            format!("{name} in the {} of {skill} is not a known proposition.", side(role)),
        ),
        SkillDefect::NotControllable { name, role } => SyntaxFinding::new(
            skill,
            role.path(),
            RULE_IDENTIFIER,
            Some(name.clone()),
            format!("{name} in the {} of {skill} is not a controllable input.", side(role)),
        ),
        SkillDefect::Incomplete { group, role } => SyntaxFinding::new(
            skill,
            role.path(),
            RULE_CONDITION,
            None,
            format!(
                "{skill} {} is not a complete controllable input state: missing {}.",
                side(role),
                members(group)
            ),
        ),
        SkillDefect::Ambiguous { group, role } => SyntaxFinding::new(
            skill,
            role.path(),
            RULE_CONDITION,
            None,
            format!(
                "{skill} {} is not a consistent controllable input state: more than one of {} holds.",
                side(role),
                members(group)
            ),
        ),
        SkillDefect::Disconnected { transition, index } => SyntaxFinding::new(
            skill,
            format!("[{transition}][1][{index}]"),
            RULE_TRANSITION,
            None,
            format!(
                "{skill} postcondition {index} of transition {transition} is not the precondition of a later transition."
            ),
        ),
        SkillDefect::Cyclic => SyntaxFinding::new(
            skill,
            String::new(),
            RULE_SKILL,
            None,
            format!("{skill} transitions form a cycle."),
        ),
    }
}

/// Checks every candidate against the abstraction and the existing skills.
pub fn typecheck_skills(
    set: &SkillCandidateSet,
    abstraction: &Abstraction,
    existing: &[Skill],
) -> Result<Vec<Skill>, Vec<SyntaxFinding>> {
    let mut findings = Vec::new();
    let mut out = Vec::new();
    for (name, chain) in &set.skills {
        let defects = Skill::defects(chain, abstraction);
        if !defects.is_empty() {
            findings.extend(defects.iter().map(|d| defect_finding(name, d, abstraction)));
            continue;
        }
        if let Some(dup) = existing.iter().find(|s| s.chain() == chain.as_slice()) {
            findings.push(SyntaxFinding::new(
                name,
                String::new(),
                RULE_SKILL,
                Some(dup.name().to_string()),
                format!("{name} duplicates existing skill {}.", dup.name()),
            ));
            continue;
        }
        match Skill::new(name.clone(), chain.clone(), abstraction) {
            Ok(s) => out.push(s),
            Err(e) => findings.push(SyntaxFinding::new(
                name,
                String::new(),
                RULE_SKILL,
                None,
                format!("{name} is not a valid skill: {e}."),
            )),
        }
    }
    if findings.is_empty() {
        Ok(out)
    } else {
        Err(sorted(findings))
    }
}

/// Extract, parse and typecheck in one step.
pub fn candidates_from_response(
    response: &str,
    abstraction: &Abstraction,
    existing: &[Skill],
) -> Result<Vec<Skill>, Vec<SyntaxFinding>> {
    let text = extract_json_block(response).map_err(|e| {
        vec![SyntaxFinding::new(
            "",
            String::new(),
            RULE_OBJECT,
            None,
            format!("{e}; respond with new skills in a ```JSON code block."),
        )]
    })?;
    let set = parse_skills(&text)?;
    typecheck_skills(&set, abstraction, existing)
}
