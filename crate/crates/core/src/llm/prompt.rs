use std::collections::BTreeMap;
use std::fmt;
use std::sync::LazyLock;

use regex::Regex;
use serde::{Deserialize, Serialize};

use super::LlmError;
use crate::abstraction::{Abstraction, AbstractionError, Skill};
use crate::logic::{Formula, Gr1Spec};
use crate::synthesis::{check_graph_json, Strategy};
use crate::violation::Violation;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TemplateId {
    AbstractionInform,
    StrategyInform,
    Repair,
    Feedback,
}

impl fmt::Display for TemplateId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TemplateId::AbstractionInform => "abstraction-inform",
            TemplateId::StrategyInform => "strategy-inform",
            TemplateId::Repair => "repair",
            TemplateId::Feedback => "feedback",
        })
    }
}

static SLOT: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"\{\{([a-z_]+)\}\}").expect("slot regex"));

/// A prompt body with named `{{slot}}` insertion points.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PromptTemplate {
    id: TemplateId,
    body: String,
}

impl PromptTemplate {
    pub fn new(id: TemplateId, body: impl Into<String>) -> Self {
        Self {
            id,
            body: body.into(),
        }
    }

    pub fn builtin(id: TemplateId) -> Self {
        let body = match id {
            TemplateId::AbstractionInform => include_str!("../../assets/prompts/abstraction_inform.txt"),
            TemplateId::StrategyInform => include_str!("../../assets/prompts/strategy_inform.txt"),
            TemplateId::Repair => include_str!("../../assets/prompts/repair.txt"),
            TemplateId::Feedback => include_str!("../../assets/prompts/feedback.txt"),
        };
        Self::new(id, body)
    }

    pub fn id(&self) -> TemplateId {
        self.id
    }

    pub fn body(&self) -> &str {
        &self.body
    }

    /// Slot names in order of first appearance.
    pub fn slots(&self) -> Vec<String> {
        let mut out: Vec<String> = Vec::new();
        for c in SLOT.captures_iter(&self.body) {
            if !out.iter().any(|s| s == &c[1]) {
                out.push(c[1].to_string());
            }
        }
        out
    }

    /// Fills every slot; values are inserted verbatim and never rescanned.
    pub fn fill(&self, values: &[(&str, String)]) -> Result<String, LlmError> {
        let given: BTreeMap<&str, &String> = values.iter().map(|(k, v)| (*k, v)).collect();
        let slots = self.slots();
        for s in &slots {
            if !given.contains_key(s.as_str()) {
                return Err(LlmError::MissingSlot {
                    template: self.id,
                    slot: s.clone(),
                });
            }
        }
        if let Some(extra) = given.keys().find(|k| !slots.iter().any(|s| s == *k)) {
            return Err(LlmError::UnknownSlot {
                template: self.id,
                slot: extra.to_string(),
            });
        }
        Ok(SLOT
            .replace_all(&self.body, |c: &regex::Captures| given[&c[1]].clone())
            .into_owned())
    }
}

/// One-shot example of a strategy and its description.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InformalizationExample {
    pub inputs: Vec<String>,
    pub outputs: Vec<String>,
    pub task: Gr1Spec,
    /// Strategy in node-list JSON form.
    pub strategy: serde_json::Value,
    pub behavior: String,
    pub explanation: String,
}

impl InformalizationExample {
    pub fn from_json(text: &str) -> Result<Self, LlmError> {
        let ex: Self = serde_json::from_str(text).map_err(|e| LlmError::Example(e.to_string()))?;
        check_graph_json(&ex.strategy.to_string()).map_err(LlmError::Example)?;
        Ok(ex)
    }

    /// The base-navigation example for object-centric abstractions.
    pub fn object_centric() -> Self {
        Self::from_json(include_str!("../../assets/examples/object_centric.json"))
            .expect("bundled example is valid")
    }
}

fn json_list<'a>(names: impl IntoIterator<Item = &'a str>) -> String {
    serde_json::to_string(&names.into_iter().collect::<Vec<_>>()).expect("names serialize")
}

fn pretty(v: &serde_json::Value) -> String {
    serde_json::to_string_pretty(v).expect("json serializes")
}

fn inputs_of(spec: &Gr1Spec) -> String {
    json_list(
        spec.propositions()
            .iter()
            .filter(|p| p.kind.is_input())
            .map(|p| p.name.as_str()),
    )
}

/// Output list followed by the skills that define them.
fn outputs_of(spec: &Gr1Spec, skills: &[Skill]) -> String {
    let outputs = json_list(
        spec.propositions()
            .iter()
            .filter(|p| !p.kind.is_input())
            .map(|p| p.name.as_str()),
    );
    if skills.is_empty() {
        return outputs;
    }
    let map: serde_json::Map<String, serde_json::Value> = skills
        .iter()
        .map(|s| {
            (
                s.name().to_string(),
                serde_json::to_value(s.chain()).expect("chain serializes"),
            )
        })
        .collect();
    format!(
        "{outputs}\nEach output proposition is a skill. Each skill is a list of [precondition, [postcondition, ...]] transitions over the controllable inputs:\n{}",
        skills_json(&map)
    )
}

/// One skill per line, one transition per line.
fn skills_json(map: &serde_json::Map<String, serde_json::Value>) -> String {
    let mut out = String::from("{\n");
    for (i, (name, chain)) in map.iter().enumerate() {
        out.push_str(&format!("  \"{name}\": [\n"));
        let ts = chain.as_array().expect("chain is a list");
        for (k, t) in ts.iter().enumerate() {
            let sep = if k + 1 < ts.len() { "," } else { "" };
            out.push_str(&format!("    {t}{sep}\n"));
        }
        let sep = if i + 1 < map.len() { "," } else { "" };
        out.push_str(&format!("  ]{sep}\n"));
    }
    out.push('}');
    out
}

/// Prompt asking for the physical meaning of the inputs.
pub fn build_abstraction_inform_prompt(a: &Abstraction) -> Result<String, LlmError> {
    let mut grounding = Vec::new();
    for p in a.inputs() {
        let g = a
            .grounding()
            .get(&p.name)
            .ok_or_else(|| AbstractionError::MissingGrounding(p.name.clone()))?;
        grounding.push(format!("{}: {}", p.name, g.description));
    }
    PromptTemplate::builtin(TemplateId::AbstractionInform).fill(&[
        ("inputs", json_list(a.inputs().iter().map(|p| p.name.as_str()))),
        ("grounding", grounding.join("\n")),
    ])
}

/// One-shot prompt asking for the behavior of `strategy`.
pub fn build_strategy_inform_prompt(
    example: &InformalizationExample,
    abstraction_desc: &str,
    task: &Gr1Spec,
    skills: &[Skill],
    strategy: &Strategy,
) -> Result<String, LlmError> {
    PromptTemplate::builtin(TemplateId::StrategyInform).fill(&[
        ("example_inputs", json_list(example.inputs.iter().map(String::as_str))),
        ("example_outputs", json_list(example.outputs.iter().map(String::as_str))),
        ("example_task", example.task.to_json()),
        ("example_strategy", pretty(&example.strategy)),
        ("example_behavior", example.behavior.trim_end().to_string()),
        ("example_explanation", example.explanation.trim_end().to_string()),
        ("inputs", inputs_of(task)),
        ("abstraction", abstraction_desc.trim_end().to_string()),
        ("outputs", outputs_of(task, skills)),
        ("task", task.to_json()),
        ("strategy", strategy.to_json()),
    ])
}

/// The candidate and feedback of the previous iteration.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PriorFeedback {
    pub candidate: String,
    pub feedback: String,
}

/// Everything the repair prompt shows besides the prior feedback.
#[derive(Clone, Copy, Debug)]
pub struct RepairContext<'a> {
    pub abstraction_desc: &'a str,
    pub task: &'a Gr1Spec,
    pub skills: &'a [Skill],
    pub behavior: &'a str,
    pub violation: &'a Violation,
    pub violated: &'a [Formula],
}

/// Repair prompt; prior feedback is appended as a final section.
pub fn build_repair_prompt(
    ctx: &RepairContext<'_>,
    prior: Option<&PriorFeedback>,
) -> Result<String, LlmError> {
    if ctx.violated.is_empty() {
        return Err(LlmError::NothingViolated);
    }
    let violated = ctx
        .violated
        .iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join("\n");
    let mut prompt = PromptTemplate::builtin(TemplateId::Repair).fill(&[
        ("inputs", inputs_of(ctx.task)),
        ("abstraction", ctx.abstraction_desc.trim_end().to_string()),
        ("outputs", outputs_of(ctx.task, ctx.skills)),
        ("task", ctx.task.to_json()),
        ("behavior", ctx.behavior.trim_end().to_string()),
        ("violation", ctx.violation.to_json()),
        ("violated", violated),
    ])?;
    if let Some(p) = prior {
        prompt.push_str(&PromptTemplate::builtin(TemplateId::Feedback).fill(&[
            ("candidate", p.candidate.trim_end().to_string()),
            ("feedback", p.feedback.trim_end().to_string()),
        ])?);
    }
    Ok(prompt)
}
