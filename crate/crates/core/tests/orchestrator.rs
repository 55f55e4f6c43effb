use skillfix::abstraction::{Abstraction, Skill};
use skillfix::analysis::{render_feedback, FeedbackKind};
use skillfix::llm::{InformalCache, LlmBackend, LlmError, ReplayBackend};
use skillfix::logic::Gr1Spec;
use skillfix::orchestrator::{
    informalize, repair, verify_candidate, Orchestrator, Outcome, RepairOptions, RepairProblem,
    Timings, Verdict,
};
use skillfix::synthesis::SolverOptions;
use skillfix::violation::Violation;

fn problem() -> RepairProblem {
    let abs = Abstraction::from_json(include_str!("../fixtures/factory/abstraction.json")).unwrap();
    let base = Gr1Spec::from_json(include_str!("../fixtures/factory/spec.json")).unwrap();
    let task = Gr1Spec::from_json(include_str!("../fixtures/factory/task_spec.json")).unwrap();
    let skills = Skill::load_json(include_str!("../fixtures/factory/skills.json"), &abs).unwrap();
    let v = Violation::from_json(include_str!("../fixtures/factory/violation.json")).unwrap();
    RepairProblem::new(abs, skills, base, task, v, vec![]).unwrap()
}

fn script(text: &str) -> ReplayBackend {
    ReplayBackend::from_json(text).unwrap()
}

#[test]
fn scripted_session_repairs_at_iteration_four() {
    let p = problem();
    let mut backend = script(include_str!("../fixtures/factory/replay/session.json"));
    let result = repair(&p, &mut backend, 5);
    let Outcome::Repaired(r) = &result.outcome else {
        panic!("{:?}", result.outcome);
    };
    assert_eq!(r.iteration(), 4);
    assert_eq!(r.skills().len(), 1);
    assert_eq!(result.iterations.len(), 4);
    let kinds: Vec<Vec<FeedbackKind>> = result.iterations.iter().map(|i| i.feedback_kinds.clone()).collect();
    assert_eq!(
        kinds,
        [
            vec![FeedbackKind::Syntax],
            vec![FeedbackKind::Safety],
            vec![FeedbackKind::Liveness],
            vec![]
        ]
    );
    assert!(result.iterations[1].rendered_feedback.contains("!(p_base_x3' & p_cone_x3')"));
    assert!(result.iterations[2].rendered_feedback.contains("( empty -> p_cup_t2 )"));
    for w in result.iterations.windows(2) {
        assert!(w[1].prompt.contains(&w[0].rendered_feedback));
    }
    assert!(!result.iterations[0].prompt.contains("# Feedback:"));
    assert_eq!(result.iterations[3].verdict, Verdict::Realizable);
    assert_eq!(result.exchanges.len(), 6);
    assert_eq!(backend.remaining(), 0);
}

#[test]
fn y_new_first_repairs_at_iteration_one() {
    let p = problem();
    let mut backend = script(include_str!("../fixtures/factory/replay/y_new_first.json"));
    let result = repair(&p, &mut backend, 5);
    assert!(matches!(&result.outcome, Outcome::Repaired(r) if r.iteration() == 1));
    assert_eq!(result.iterations.len(), 1);
}

#[test]
fn five_malformed_responses_exhaust() {
    let p = problem();
    let mut backend = script(include_str!("../fixtures/factory/replay/malformed.json"));
    let result = repair(&p, &mut backend, 5);
    assert!(matches!(result.outcome, Outcome::Exhausted { iterations: 5, .. }));
    assert_eq!(result.iterations.len(), 5);
    let numbers: Vec<usize> = result.iterations.iter().map(|i| i.iteration).collect();
    assert_eq!(numbers, [1, 2, 3, 4, 5]);
}

#[test]
fn backend_failure_aborts_with_partial_transcript() {
    let p = problem();
    let text = include_str!("../fixtures/factory/replay/session.json");
    let mut responses: Vec<String> = serde_json::from_str::<serde_json::Value>(text).unwrap()["responses"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_str().unwrap().to_string())
        .collect();
    responses.truncate(3);
    let mut backend = ReplayBackend::new(responses);
    let result = repair(&p, &mut backend, 5);
    match &result.outcome {
        Outcome::Aborted { iteration, error } => {
            assert_eq!(*iteration, 2);
            assert!(error.contains("exhausted"));
        }
        other => panic!("{other:?}"),
    }
    assert_eq!(result.iterations.len(), 2);
    assert!(result.iterations[1].error.is_some());
}

#[test]
fn informalize_returns_texts_and_caches() {
    let p = problem();
    let informal: serde_json::Value =
        serde_json::from_str(include_str!("../fixtures/factory/informal.json")).unwrap();
    let mut backend = script(include_str!("../fixtures/factory/replay/session.json"));
    let got = informalize(&p, &mut backend).unwrap();
    assert_eq!(got.abstraction, informal["abstraction"].as_str().unwrap());
    assert_eq!(got.behavior, informal["behavior"].as_str().unwrap());
    assert!(got.behavior.contains("skill2"));

    struct Counting(usize);
    impl LlmBackend for Counting {
        fn complete(&mut self, _: &str) -> Result<String, LlmError> {
            self.0 += 1;
            Ok(format!("answer {}", self.0))
        }
        fn label(&self) -> String {
            "counting".into()
        }
    }
    let cache = InformalCache::in_memory();
    let mut counting = Counting(0);
    let first = Orchestrator::new(&mut counting, &cache, RepairOptions::default())
        .informalize(&p)
        .unwrap();
    assert_eq!(counting.0, 2);
    let mut orch = Orchestrator::new(&mut counting, &cache, RepairOptions::default());
    let second = orch.informalize(&p).unwrap();
    assert!(orch.transcript().is_empty());
    assert_eq!(first, second);
    assert_eq!(counting.0, 2);
}

#[test]
fn verification_is_independent_of_the_loop() {
    let p = problem();
    let mut backend = script(include_str!("../fixtures/factory/replay/session.json"));
    let result = repair(&p, &mut backend, 5);
    for rec in &result.iterations {
        let v = verify_candidate(&p, &rec.response, &SolverOptions::default(), &mut Timings::default())
            .unwrap();
        assert_eq!(v.verdict(), rec.verdict);
        assert_eq!(render_feedback(&v.feedback()), rec.rendered_feedback);
    }
}

#[test]
fn problem_invariants_are_checked() {
    let abs = Abstraction::from_json(include_str!("../fixtures/factory/abstraction.json")).unwrap();
    let base = Gr1Spec::from_json(include_str!("../fixtures/factory/spec.json")).unwrap();
    let task = Gr1Spec::from_json(include_str!("../fixtures/factory/task_spec.json")).unwrap();
    let skills = Skill::load_json(include_str!("../fixtures/factory/skills.json"), &abs).unwrap();
    let v = Violation::from_json(include_str!("../fixtures/factory/violation.json")).unwrap();
    let harmless = Violation::new(v.sigma_x.clone(), v.sigma_y.clone(), v.sigma_x.clone());
    assert!(RepairProblem::new(abs.clone(), skills.clone(), base.clone(), task.clone(), harmless, vec![]).is_err());
    assert!(RepairProblem::new(abs, skills, task.clone(), base, v, vec![]).is_err());
}
