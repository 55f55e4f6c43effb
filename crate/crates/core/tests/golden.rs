mod common;

use std::path::Path;

use common::factory;
use skillfix::llm::ReplayBackend;
use skillfix::orchestrator::repair;

/// Set to rewrite the golden files from the current builders.
const BLESS_VAR: &str = "SKILLFIX_BLESS";

#[test]
fn prompts_match_goldens() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/factory/golden");
    let bless = std::env::var_os(BLESS_VAR).is_some();
    for ((name, built), (golden_name, golden)) in factory::prompts().iter().zip(factory::GOLDEN) {
        assert_eq!(*name, golden_name);
        if bless {
            std::fs::write(dir.join(name), built).unwrap();
        } else {
            assert!(built == golden, "{name} differs from its golden; rerun with {BLESS_VAR}=1 after review");
        }
    }
}

#[test]
fn strategy_golden_embeds_the_worked_example() {
    let (_, strategy) = factory::GOLDEN[1];
    let example = skillfix::llm::InformalizationExample::object_centric();
    assert!(strategy.contains(&example.behavior));
    assert!(strategy.contains(&example.explanation));
    assert!(strategy.contains(&example.task.to_json()));
}

#[test]
fn loop_sends_the_golden_prompts() {
    let p = factory::problem();
    let mut backend = ReplayBackend::from_json(factory::SESSION).unwrap();
    let result = repair(&p, &mut backend, 5);
    let prompts: Vec<&str> = result.exchanges.exchanges.iter().map(|e| e.prompt.as_str()).collect();
    assert_eq!(prompts[0], factory::GOLDEN[0].1);
    assert_eq!(prompts[1], factory::GOLDEN[1].1);
    assert_eq!(prompts[2], factory::GOLDEN[2].1);
}
