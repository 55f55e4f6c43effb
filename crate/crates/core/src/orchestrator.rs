//! The repair loop: informalize, prompt, extract, verify, feed back, iterate.

use std::fs::OpenOptions;
use std::io::Write;
use std::path::Path;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::abstraction::{compile_skills, is_sub_specification, Abstraction, AbstractionError, Skill};
use crate::analysis::{liveness_analysis, render_feedback, safety_analysis, Feedback, FeedbackKind};
use crate::dsl::{candidates_from_response, extract_json_block, SyntaxFinding};
use crate::llm::{
    build_abstraction_inform_prompt, build_repair_prompt, build_strategy_inform_prompt,
    InformalCache, InformalizationExample, LlmBackend, LlmError, PriorFeedback, RepairContext,
    TemplateId, Transcript,
};
use crate::logic::{Formula, Gr1Spec};
use crate::synthesis::{check_realizability, SolverOptions, SynthesisError};
use crate::violation::{apply_repair, detect_violation, Violation, ViolationError};

pub const DEFAULT_MAX_ITERATIONS: usize = 5;

#[derive(Debug, Error)]
pub enum OrchestratorError {
    #[error("the task specification is not a sub-specification of the full specification")]
    NotSubSpecification,
    #[error("the observed transition violates no environment safety assumption of the full specification")]
    NoViolation,
    #[error("the original specification is unrealizable; there is no strategy to describe")]
    OriginalUnrealizable,
    #[error(transparent)]
    Abstraction(#[from] AbstractionError),
    #[error(transparent)]
    Violation(#[from] ViolationError),
    #[error(transparent)]
    Synthesis(#[from] SynthesisError),
    #[error(transparent)]
    Llm(#[from] LlmError),
}

/// The inputs of one repair: abstraction, skills, specifications and the
/// observed violation.
#[derive(Clone, Debug)]
pub struct RepairProblem {
    abstraction: Abstraction,
    skills: Vec<Skill>,
    base: Gr1Spec,
    task: Gr1Spec,
    spec: Gr1Spec,
    violation: Violation,
    violated: Vec<usize>,
    examples: Vec<InformalizationExample>,
}

impl RepairProblem {
    /// `base` is the full specification before the skills are compiled in.
    pub fn new(
        abstraction: Abstraction,
        skills: Vec<Skill>,
        base: Gr1Spec,
        task: Gr1Spec,
        violation: Violation,
        examples: Vec<InformalizationExample>,
    ) -> Result<Self, OrchestratorError> {
        let spec = compile_skills(&abstraction, &skills, &base)?;
        if !is_sub_specification(&task, &spec) {
            return Err(OrchestratorError::NotSubSpecification);
        }
        violation.validate(&spec)?;
        let violated = detect_violation(&spec, &violation);
        if violated.is_empty() {
            return Err(OrchestratorError::NoViolation);
        }
        Ok(Self {
            abstraction,
            skills,
            base,
            task,
            spec,
            violation,
            violated,
            examples,
        })
    }

    pub fn abstraction(&self) -> &Abstraction {
        &self.abstraction
    }

    pub fn skills(&self) -> &[Skill] {
        &self.skills
    }

    pub fn base(&self) -> &Gr1Spec {
        &self.base
    }

    pub fn task(&self) -> &Gr1Spec {
        &self.task
    }

    /// φ: the base with the skills compiled in.
    pub fn spec(&self) -> &Gr1Spec {
        &self.spec
    }

    pub fn violation(&self) -> &Violation {
        &self.violation
    }

    /// The env-safety conjuncts of φ the violation falsifies.
    pub fn violated(&self) -> Vec<Formula> {
        self.violated
            .iter()
            .map(|&i| self.spec.env_safety()[i].clone())
            .collect()
    }

    pub fn example(&self) -> InformalizationExample {
        self.examples
            .first()
            .cloned()
            .unwrap_or_else(InformalizationExample::object_centric)
    }
}

/// Wall-clock milliseconds per stage of one iteration.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Timings {
    pub repair_ms: f64,
    pub syntax_ms: f64,
    pub realizability_ms: f64,
    pub feedback_ms: f64,
}

fn ms(start: Instant) -> f64 {
    start.elapsed().as_secs_f64() * 1000.0
}

/// Outcome of checking one candidate without any LLM involvement.
#[derive(Clone, Debug)]
pub enum Verification {
    Syntax {
        findings: Vec<SyntaxFinding>,
    },
    Realizable {
        skills: Vec<Skill>,
        spec: Gr1Spec,
    },
    Unrealizable {
        spec: Gr1Spec,
        feedback: Vec<Feedback>,
    },
}

impl Verification {
    pub fn feedback(&self) -> Vec<Feedback> {
        match self {
            Verification::Syntax { findings } => findings.iter().map(SyntaxFinding::to_feedback).collect(),
            Verification::Realizable { .. } => Vec::new(),
            Verification::Unrealizable { feedback, .. } => feedback.clone(),
        }
    }

    pub fn verdict(&self) -> Verdict {
        match self {
            Verification::Syntax { .. } => Verdict::SyntaxError,
            Verification::Realizable { .. } => Verdict::Realizable,
            Verification::Unrealizable { .. } => Verdict::Unrealizable,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    SyntaxError,
    Unrealizable,
    Realizable,
    Error,
}

/// Syntax check, then realizability of φ', then counterstrategy analysis.
pub fn verify_candidate(
    problem: &RepairProblem,
    response: &str,
    solver: &SolverOptions,
    timings: &mut Timings,
) -> Result<Verification, SynthesisError> {
    let start = Instant::now();
    let checked = candidates_from_response(response, &problem.abstraction, &problem.skills);
    let new_skills = match checked {
        Ok(s) => s,
        Err(findings) => {
            timings.syntax_ms = ms(start);
            return Ok(Verification::Syntax { findings });
        }
    };
    let repaired = apply_repair(
        &problem.base,
        &problem.abstraction,
        &problem.skills,
        &new_skills,
        &problem.violation,
    );
    timings.syntax_ms = ms(start);
    let spec = match repaired {
        Ok(s) => s,
        Err(e) => {
            let findings = vec![SyntaxFinding {
                skill: String::new(),
                path: String::new(),
                rule: crate::dsl::RULE_SKILL.to_string(),
                token: None,
                message: format!("the new skills cannot be compiled: {e}."),
            }];
            return Ok(Verification::Syntax { findings });
        }
    };

    let start = Instant::now();
    let solution = check_realizability(&spec, solver)?;
    timings.realizability_ms = ms(start);
    if solution.is_realizable() {
        return Ok(Verification::Realizable {
            skills: new_skills,
            spec,
        });
    }

    let start = Instant::now();
    let cs = solution.counterstrategy()?;
    let mut feedback = safety_analysis(&cs, &problem.task);
    if feedback.is_empty() && cs.nodes().iter().enumerate().any(|(i, _)| cs.is_sink(i)) {
        feedback = safety_analysis(&cs, &spec);
    }
    feedback.extend(liveness_analysis(&cs, &problem.task));
    timings.feedback_ms = ms(start);
    Ok(Verification::Unrealizable { spec, feedback })
}

/// One round of the loop as persisted in the session transcript.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub iteration: usize,
    pub prompt: String,
    pub response: String,
    pub verdict: Verdict,
    pub feedback_kinds: Vec<FeedbackKind>,
    pub feedback: Vec<Feedback>,
    pub rendered_feedback: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub timings: Timings,
}

#[derive(Clone, Debug)]
pub enum Outcome {
    Repaired(Box<Repaired>),
    Exhausted {
        iterations: usize,
        last_feedback: String,
    },
    Aborted {
        iteration: usize,
        error: String,
    },
}

impl Outcome {
    pub fn label(&self) -> &'static str {
        match self {
            Outcome::Repaired(_) => "REPAIRED",
            Outcome::Exhausted { .. } => "EXHAUSTED",
            Outcome::Aborted { .. } => "ABORTED",
        }
    }
}

/// Verified new skills and the realizable φ' they produce.
#[derive(Clone, Debug)]
pub struct Repaired {
    skills: Vec<Skill>,
    spec: Gr1Spec,
    iteration: usize,
}

impl Repaired {
    /// Re-checks φ' independently; never yields a value for an unrealizable φ'.
    pub fn new(
        skills: Vec<Skill>,
        spec: Gr1Spec,
        iteration: usize,
        solver: &SolverOptions,
    ) -> Result<Self, SynthesisError> {
        if !check_realizability(&spec, solver)?.is_realizable() {
            return Err(SynthesisError::NotRealizable);
        }
        Ok(Self {
            skills,
            spec,
            iteration,
        })
    }

    pub fn skills(&self) -> &[Skill] {
        &self.skills
    }

    pub fn spec(&self) -> &Gr1Spec {
        &self.spec
    }

    pub fn iteration(&self) -> usize {
        self.iteration
    }
}

#[derive(Clone, Debug)]
pub struct RepairResult {
    pub outcome: Outcome,
    pub iterations: Vec<IterationRecord>,
    /// Every prompt sent, informalization included.
    pub exchanges: Transcript,
}

impl RepairResult {
    /// One JSON line per iteration.
    pub fn write_jsonl(&self, path: &Path) -> std::io::Result<()> {
        let mut f = OpenOptions::new().create(true).write(true).truncate(true).open(path)?;
        for r in &self.iterations {
            writeln!(f, "{}", serde_json::to_string(r).expect("record serializes"))?;
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RepairOptions {
    pub max_iterations: usize,
    pub solver: SolverOptions,
}

impl Default for RepairOptions {
    fn default() -> Self {
        Self {
            max_iterations: DEFAULT_MAX_ITERATIONS,
            solver: SolverOptions::default(),
        }
    }
}

/// Natural-language descriptions of the abstraction and the strategy.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Informal {
    pub abstraction: String,
    pub behavior: String,
}

/// Runs sessions against one backend, sharing an informalization cache.
pub struct Orchestrator<'a> {
    backend: &'a mut dyn LlmBackend,
    cache: &'a InformalCache,
    options: RepairOptions,
    transcript: Transcript,
}

impl<'a> Orchestrator<'a> {
    pub fn new(backend: &'a mut dyn LlmBackend, cache: &'a InformalCache, options: RepairOptions) -> Self {
        Self {
            backend,
            cache,
            options,
            transcript: Transcript::new(),
        }
    }

    pub fn transcript(&self) -> &Transcript {
        &self.transcript
    }

    fn ask(&mut self, iteration: usize, template: TemplateId, prompt: &str) -> Result<String, LlmError> {
        if template != TemplateId::Repair {
            if let Some(hit) = self.cache.get(template, prompt) {
                return Ok(hit);
            }
        }
        let response = self
            .transcript
            .dispatch(&mut *self.backend, iteration, template, prompt)?;
        if template != TemplateId::Repair {
            self.cache.put(template, prompt, &response)?;
        }
        Ok(response)
    }

    /// Describes the abstraction, then the strategy synthesized from φ.
    pub fn informalize(&mut self, problem: &RepairProblem) -> Result<Informal, OrchestratorError> {
        let solution = check_realizability(problem.spec(), &self.options.solver)?;
        if !solution.is_realizable() {
            return Err(OrchestratorError::OriginalUnrealizable);
        }
        let strategy = solution.strategy()?;
        let prompt = build_abstraction_inform_prompt(problem.abstraction())?;
        let abstraction = self.ask(0, TemplateId::AbstractionInform, &prompt)?;
        let prompt = build_strategy_inform_prompt(
            &problem.example(),
            &abstraction,
            problem.task(),
            problem.skills(),
            &strategy,
        )?;
        let behavior = self.ask(0, TemplateId::StrategyInform, &prompt)?;
        Ok(Informal {
            abstraction,
            behavior,
        })
    }

    /// The full loop; informalizes first (cached).
    pub fn repair(&mut self, problem: &RepairProblem) -> RepairResult {
        let mut iterations = Vec::new();
        let informal = match self.informalize(problem) {
            Ok(i) => i,
            Err(e) => {
                return RepairResult {
                    outcome: Outcome::Aborted {
                        iteration: 0,
                        error: e.to_string(),
                    },
                    iterations,
                    exchanges: self.transcript.clone(),
                }
            }
        };
        let outcome = self.iterate(problem, &informal, &mut iterations);
        RepairResult {
            outcome,
            iterations,
            exchanges: self.transcript.clone(),
        }
    }

    fn iterate(
        &mut self,
        problem: &RepairProblem,
        informal: &Informal,
        records: &mut Vec<IterationRecord>,
    ) -> Outcome {
        let violated = problem.violated();
        let ctx = RepairContext {
            abstraction_desc: &informal.abstraction,
            task: problem.task(),
            skills: problem.skills(),
            behavior: &informal.behavior,
            violation: problem.violation(),
            violated: &violated,
        };
        let mut prior: Option<PriorFeedback> = None;
        for iteration in 1..=self.options.max_iterations {
            let mut timings = Timings::default();
            let mut record = IterationRecord {
                iteration,
                prompt: String::new(),
                response: String::new(),
                verdict: Verdict::Error,
                feedback_kinds: Vec::new(),
                feedback: Vec::new(),
                rendered_feedback: String::new(),
                error: None,
                timings,
            };
            let abort = |mut record: IterationRecord, records: &mut Vec<IterationRecord>, e: String| {
                record.error = Some(e.clone());
                records.push(record);
                Outcome::Aborted {
                    iteration,
                    error: e,
                }
            };
            let prompt = match build_repair_prompt(&ctx, prior.as_ref()) {
                Ok(p) => p,
                Err(e) => return abort(record, records, e.to_string()),
            };
            record.prompt = prompt.clone();
            let start = Instant::now();
            let response = match self.ask(iteration, TemplateId::Repair, &prompt) {
                Ok(r) => r,
                Err(e) => return abort(record, records, e.to_string()),
            };
            timings.repair_ms = ms(start);
            record.response = response.clone();
            let verification = match verify_candidate(problem, &response, &self.options.solver, &mut timings) {
                Ok(v) => v,
                Err(e) => {
                    record.timings = timings;
                    return abort(record, records, e.to_string());
                }
            };
            record.timings = timings;
            record.verdict = verification.verdict();
            if let Verification::Realizable { skills, spec } = verification {
                records.push(record);
                return match Repaired::new(skills, spec, iteration, &self.options.solver) {
                    Ok(r) => Outcome::Repaired(Box::new(r)),
                    Err(e) => Outcome::Aborted {
                        iteration,
                        error: e.to_string(),
                    },
                };
            }
            let feedback = verification.feedback();
            let rendered = render_feedback(&feedback);
            record.feedback_kinds = {
                let mut k: Vec<FeedbackKind> = feedback.iter().map(Feedback::kind).collect();
                k.dedup();
                k
            };
            record.feedback = feedback;
            record.rendered_feedback = rendered.clone();
            records.push(record);
            log::info!("iteration {iteration}: {}", rendered.trim_end());
            prior = Some(PriorFeedback {
                candidate: extract_json_block(&response).unwrap_or_else(|_| response.trim().to_string()),
                feedback: rendered,
            });
        }
        Outcome::Exhausted {
            iterations: self.options.max_iterations,
            last_feedback: prior.map(|p| p.feedback).unwrap_or_default(),
        }
    }
}

/// One session with a fresh in-memory cache.
pub fn repair(
    problem: &RepairProblem,
    backend: &mut dyn LlmBackend,
    max_iterations: usize,
) -> RepairResult {
    let cache = InformalCache::in_memory();
    let options = RepairOptions {
        max_iterations,
        ..RepairOptions::default()
    };
    Orchestrator::new(backend, &cache, options).repair(problem)
}

/// Informalization with a fresh in-memory cache.
pub fn informalize(
    problem: &RepairProblem,
    backend: &mut dyn LlmBackend,
) -> Result<Informal, OrchestratorError> {
    let cache = InformalCache::in_memory();
    Orchestrator::new(backend, &cache, RepairOptions::default()).informalize(problem)
}
