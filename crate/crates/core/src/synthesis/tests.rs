use super::*;
use crate::logic::{parse_unchecked, Formula, PropKind, Proposition};

fn f(s: &str) -> Formula {
    parse_unchecked(s).unwrap()
}

fn props() -> Vec<Proposition> {
    vec![
        Proposition::new("x", PropKind::UncontrollableInput),
        Proposition::new("y", PropKind::Output),
    ]
}

fn spec(sys_init: &str, sys_safety: &[&str], goals: &[&str]) -> Gr1Spec {
    Gr1Spec::new(
        props(),
        f("!x"),
        vec![],
        vec![],
        f(sys_init),
        sys_safety.iter().map(|s| f(s)).collect(),
        goals.iter().map(|s| f(s)).collect(),
    )
    .unwrap()
}

#[test]
fn false_goal_is_unrealizable() {
    let sol = check_realizability(&spec("TRUE", &[], &["FALSE"]), &SolverOptions::default()).unwrap();
    assert!(matches!(
        sol.verdict,
        Verdict::Unrealizable(UnrealizableReason::NotWinning { .. })
    ));
    assert_eq!(sol.strategy(), Err(SynthesisError::NotRealizable));
    let cs = sol.counterstrategy().unwrap();
    assert!(!cs.is_empty());
    assert!(cs.nodes().iter().all(|n| !n.successors.is_empty()));
}

#[test]
fn false_sys_init_gives_sink_initial_node() {
    let sol = check_realizability(&spec("FALSE", &[], &[]), &SolverOptions::default()).unwrap();
    assert!(matches!(
        sol.verdict,
        Verdict::Unrealizable(UnrealizableReason::NoInitialSystemChoice { .. })
    ));
    let cs = sol.counterstrategy().unwrap();
    assert_eq!(cs.initial(), &[0]);
    assert!(cs.initial().iter().all(|&i| cs.is_sink(i)));
}

#[test]
fn follower_strategy() {
    let s = spec("!y", &["y' <-> x'"], &["y | !x"]);
    let sol = check_realizability(&s, &SolverOptions::default()).unwrap();
    assert!(sol.is_realizable());
    assert_eq!(sol.counterstrategy(), Err(SynthesisError::SpecRealizable));
    let st = sol.strategy().unwrap();
    assert_eq!(st.initial(), &[0]);
    for (i, n) in st.nodes().iter().enumerate() {
        assert_eq!(n.moves.len(), 2, "node {i}");
        for (&x, &t) in n.moves.iter().zip(&n.trans) {
            let next = st.nodes()[t].state;
            assert_eq!(next & 1, x);
            assert_eq!(next >> 1 & 1, x);
        }
    }
}

#[test]
fn one_state_strategy_for_trivial_goal() {
    let s = Gr1Spec::new(
        vec![Proposition::new("y", PropKind::Output)],
        Formula::True,
        vec![],
        vec![],
        f("!y"),
        vec![f("!y'")],
        vec![],
    )
    .unwrap();
    let st = synthesize(&s, &SolverOptions::default()).unwrap();
    assert_eq!(st.len(), 1);
    assert_eq!(st.nodes()[0].trans, vec![0]);
}

#[test]
fn env_deadlock_is_system_win() {
    let s = Gr1Spec::new(
        props(),
        Formula::True,
        vec![f("FALSE")],
        vec![],
        Formula::True,
        vec![],
        vec![f("FALSE")],
    )
    .unwrap();
    assert!(check_realizability(&s, &SolverOptions::default()).unwrap().is_realizable());
}

#[test]
fn unfair_env_is_winning_for_system() {
    // the goal y needs x, which the environment promises infinitely often
    let s = Gr1Spec::new(
        props(),
        Formula::True,
        vec![],
        vec![f("x")],
        Formula::True,
        vec![f("y' -> x'")],
        vec![f("y")],
    )
    .unwrap();
    assert!(check_realizability(&s, &SolverOptions::default()).unwrap().is_realizable());
    let without = Gr1Spec::new(
        props(),
        Formula::True,
        vec![],
        vec![],
        Formula::True,
        vec![f("y' -> x'")],
        vec![f("y")],
    )
    .unwrap();
    let sol = check_realizability(&without, &SolverOptions::default()).unwrap();
    assert!(!sol.is_realizable());
    let cs = sol.counterstrategy().unwrap();
    for n in cs.nodes() {
        assert_eq!(n.env_move, Some(0), "environment keeps x low");
    }
}

#[test]
fn counterstrategy_json_round_trip() {
    let sol = check_realizability(&spec("TRUE", &[], &["FALSE"]), &SolverOptions::default()).unwrap();
    let cs = sol.counterstrategy().unwrap();
    let back = Counterstrategy::from_json(&cs.to_json()).unwrap();
    assert_eq!(cs, back);
    let v = cs.to_json_value();
    assert_eq!(v["variables"], serde_json::json!(["x", "y"]));
}
