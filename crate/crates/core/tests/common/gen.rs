//! Seeded random GR(1) specifications over a handful of propositions.

use rand::seq::SliceRandom;
use rand::Rng;
use skillfix::logic::{Formula, Gr1Spec, PropKind, Proposition};

fn leaf<R: Rng>(rng: &mut R, current: &[String], next: &[String]) -> Formula {
    let pick_next = !next.is_empty() && (current.is_empty() || rng.gen_bool(0.5));
    if rng.gen_bool(0.05) {
        return if rng.gen_bool(0.5) { Formula::True } else { Formula::False };
    }
    let f = if pick_next {
        Formula::next(next.choose(rng).unwrap().clone())
    } else {
        Formula::atom(current.choose(rng).unwrap().clone())
    };
    if rng.gen_bool(0.35) {
        Formula::not(f)
    } else {
        f
    }
}

pub fn formula<R: Rng>(rng: &mut R, depth: u32, current: &[String], next: &[String]) -> Formula {
    if depth == 0 || rng.gen_bool(0.3) {
        return leaf(rng, current, next);
    }
    let a = formula(rng, depth - 1, current, next);
    let b = formula(rng, depth - 1, current, next);
    match rng.gen_range(0..6) {
        0 => Formula::not(Formula::and(a, b)),
        1 | 2 => Formula::or(a, b),
        3 => Formula::and(a, b),
        4 => Formula::implies(a, b),
        _ => Formula::iff(a, b),
    }
}

/// A random spec with at most `max_props` propositions and at most three goals.
pub fn spec<R: Rng>(rng: &mut R, max_props: usize) -> Gr1Spec {
    let n_in = rng.gen_range(1..=max_props.saturating_sub(1).clamp(1, 3));
    let n_out = rng.gen_range(1..=(max_props - n_in).clamp(1, 3));
    let mut props = Vec::new();
    for i in 0..n_in {
        let kind = if rng.gen_bool(0.5) {
            PropKind::ControllableInput
        } else {
            PropKind::UncontrollableInput
        };
        props.push(Proposition::new(format!("x{i}"), kind));
    }
    for i in 0..n_out {
        props.push(Proposition::new(format!("y{i}"), PropKind::Output));
    }
    let ins: Vec<String> = (0..n_in).map(|i| format!("x{i}")).collect();
    let outs: Vec<String> = (0..n_out).map(|i| format!("y{i}")).collect();
    let all: Vec<String> = ins.iter().chain(&outs).cloned().collect();

    let few = |rng: &mut R, max: usize| rng.gen_range(0..=max);
    let env_init = if rng.gen_bool(0.5) {
        Formula::True
    } else {
        formula(rng, 1, &ins, &[])
    };
    let sys_init = if rng.gen_bool(0.5) {
        Formula::True
    } else {
        formula(rng, 1, &all, &[])
    };
    let k = few(rng, 2);
    let env_safety = (0..k).map(|_| formula(rng, 2, &all, &ins)).collect();
    let k = few(rng, 2);
    let env_liveness = (0..k).map(|_| formula(rng, 1, &all, &[])).collect();
    let k = few(rng, 3);
    let sys_safety = (0..k).map(|_| formula(rng, 2, &all, &all)).collect();
    let k = rng.gen_range(1..=3);
    let sys_liveness = (0..k).map(|_| formula(rng, 1, &all, &[])).collect();
    Gr1Spec::new(
        props,
        env_init,
        env_safety,
        env_liveness,
        sys_init,
        sys_safety,
        sys_liveness,
    )
    .expect("generated spec is well formed")
}
