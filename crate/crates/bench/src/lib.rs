//! Seeded synthetic workloads for the solver and analysis benchmarks.

use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use skillfix::analysis::{liveness_analysis, safety_analysis};
use skillfix::logic::Gr1Spec;
use skillfix::synthesis::{CounterNode, Counterstrategy};

const SYNTHETIC_SPEC: &str = r#"{
  "propositions": [
    {"name": "e0", "kind": "controllable-input"},
    {"name": "e1", "kind": "controllable-input"},
    {"name": "e2", "kind": "uncontrollable-input"},
    {"name": "e3", "kind": "uncontrollable-input"},
    {"name": "s0", "kind": "output"},
    {"name": "s1", "kind": "output"},
    {"name": "s2", "kind": "output"}
  ],
  "env_init": "!e0 & !e1",
  "env_safety": ["s0 -> (e0' <-> !e0)"],
  "env_liveness": ["e2"],
  "sys_init": "!s0 & !s1 & !s2",
  "sys_safety": ["!(e0' & e1')", "!(s0' & s1')", "e3' -> !s2'"],
  "sys_liveness": ["e0", "e1 | e2", "!e3"]
}"#;

/// Specification whose propositions label every synthetic counterstrategy.
pub fn synthetic_spec() -> Gr1Spec {
    Gr1Spec::from_json(SYNTHETIC_SPEC).expect("synthetic spec parses")
}

/// Random counterstrategy over [`synthetic_spec`] with `n` nodes, out-degree
/// up to 3 and about one sink in fifty nodes.
pub fn synthetic_counterstrategy(n: usize, seed: u64) -> Counterstrategy {
    let spec = synthetic_spec();
    let universe = spec.universe().clone();
    let inputs = universe.input_mask();
    let goals = spec.sys_liveness().len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let nodes = (0..n)
        .map(|_| {
            let state = rng.gen::<u64>() & ((1u64 << universe.len()) - 1);
            if rng.gen_ratio(1, 50) {
                return CounterNode {
                    state: state & inputs,
                    goal: rng.gen_range(0..goals),
                    env_move: None,
                    successors: Vec::new(),
                };
            }
            let degree = rng.gen_range(1..=3);
            CounterNode {
                state,
                goal: rng.gen_range(0..goals),
                env_move: Some(rng.gen::<u64>() & inputs),
                successors: (0..degree).map(|_| rng.gen_range(0..n)).collect(),
            }
        })
        .collect();
    Counterstrategy::new(universe, nodes, vec![0])
}

/// Runs safety and liveness analysis once; returns the number of findings.
pub fn analyze(cs: &Counterstrategy, spec: &Gr1Spec) -> usize {
    safety_analysis(cs, spec).len() + liveness_analysis(cs, spec).len()
}

/// Fastest of `reps` analysis runs on a fresh synthetic counterstrategy.
pub fn time_analysis(n: usize, seed: u64, reps: usize) -> Duration {
    let spec = synthetic_spec();
    let cs = synthetic_counterstrategy(n, seed);
    (0..reps.max(1))
        .map(|_| {
            let t = Instant::now();
            std::hint::black_box(analyze(&cs, &spec));
            t.elapsed()
        })
        .min()
        .expect("at least one rep")
}

/// Runtime ratios between consecutive sizes, each the best of `reps`.
pub fn scaling_ratios(sizes: &[usize], seed: u64, reps: usize) -> Vec<f64> {
    let times: Vec<f64> = sizes
        .iter()
        .map(|&n| time_analysis(n, seed, reps).as_secs_f64())
        .collect();
    times.windows(2).map(|w| w[1] / w[0].max(1e-9)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generator_is_deterministic() {
        assert_eq!(synthetic_counterstrategy(200, 7), synthetic_counterstrategy(200, 7));
        assert_ne!(synthetic_counterstrategy(200, 7), synthetic_counterstrategy(200, 8));
    }

    #[test]
    fn nodes_are_well_formed() {
        let cs = synthetic_counterstrategy(500, 1);
        assert_eq!(cs.len(), 500);
        for (i, node) in cs.nodes().iter().enumerate() {
            assert!(node.successors.iter().all(|&s| s < 500));
            assert_eq!(node.env_move.is_none(), cs.is_sink(i));
        }
        assert!(analyze(&cs, &synthetic_spec()) > 0);
    }
}
