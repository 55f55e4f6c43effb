use skillfix::abstraction::{Abstraction, Skill};
use skillfix::llm::{
    build_abstraction_inform_prompt, build_repair_prompt, build_strategy_inform_prompt, PriorFeedback,
    RepairContext,
};
use skillfix::logic::Gr1Spec;
use skillfix::orchestrator::RepairProblem;
use skillfix::synthesis::{synthesize, SolverOptions};
use skillfix::violation::Violation;

pub const SESSION: &str = include_str!("../../fixtures/factory/replay/session.json");
pub const CANDIDATE_REPAIR: &str = include_str!("../../fixtures/factory/candidate_repair.json");
pub const CANDIDATE_VIA_X3: &str = include_str!("../../fixtures/factory/candidate_via_x3.json");
pub const CANDIDATE_BLOCK_T3: &str = include_str!("../../fixtures/factory/candidate_block_t3.json");

pub const GOLDEN: [(&str, &str); 4] = [
    ("abstraction_inform.txt", include_str!("../../fixtures/factory/golden/abstraction_inform.txt")),
    ("strategy_inform.txt", include_str!("../../fixtures/factory/golden/strategy_inform.txt")),
    ("repair.txt", include_str!("../../fixtures/factory/golden/repair.txt")),
    ("repair_feedback.txt", include_str!("../../fixtures/factory/golden/repair_feedback.txt")),
];

pub fn abstraction() -> Abstraction {
    Abstraction::from_json(include_str!("../../fixtures/factory/abstraction.json")).unwrap()
}

pub fn base() -> Gr1Spec {
    Gr1Spec::from_json(include_str!("../../fixtures/factory/spec.json")).unwrap()
}

pub fn task() -> Gr1Spec {
    Gr1Spec::from_json(include_str!("../../fixtures/factory/task_spec.json")).unwrap()
}

pub fn skills() -> Vec<Skill> {
    Skill::load_json(include_str!("../../fixtures/factory/skills.json"), &abstraction()).unwrap()
}

pub fn violation() -> Violation {
    Violation::from_json(include_str!("../../fixtures/factory/violation.json")).unwrap()
}

pub fn problem() -> RepairProblem {
    RepairProblem::new(abstraction(), skills(), base(), task(), violation(), vec![]).unwrap()
}

/// Abstraction and behavior texts standing in for the informalization answers.
pub fn informal() -> (String, String) {
    let v: serde_json::Value =
        serde_json::from_str(include_str!("../../fixtures/factory/informal.json")).unwrap();
    (
        v["abstraction"].as_str().unwrap().to_string(),
        v["behavior"].as_str().unwrap().to_string(),
    )
}

/// The prompts the builders produce for the factory, keyed like [`GOLDEN`].
pub fn prompts() -> Vec<(&'static str, String)> {
    let p = problem();
    let (abstraction_desc, behavior) = informal();
    let strategy = synthesize(p.spec(), &SolverOptions::default()).unwrap();
    let violated = p.violated();
    let ctx = RepairContext {
        abstraction_desc: &abstraction_desc,
        task: p.task(),
        skills: p.skills(),
        behavior: &behavior,
        violation: p.violation(),
        violated: &violated,
    };
    let prior = PriorFeedback {
        candidate: CANDIDATE_VIA_X3.trim().to_string(),
        feedback: "new_skill_0 violates the hard constraints !(p_base_x3' & p_cone_x3')\n".to_string(),
    };
    vec![
        ("abstraction_inform.txt", build_abstraction_inform_prompt(p.abstraction()).unwrap()),
        (
            "strategy_inform.txt",
            build_strategy_inform_prompt(&p.example(), &abstraction_desc, p.task(), p.skills(), &strategy)
                .unwrap(),
        ),
        ("repair.txt", build_repair_prompt(&ctx, None).unwrap()),
        ("repair_feedback.txt", build_repair_prompt(&ctx, Some(&prior)).unwrap()),
    ]
}
