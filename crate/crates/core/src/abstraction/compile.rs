use std::collections::BTreeSet;

use super::{Abstraction, AbstractionError, Skill};
use crate::logic::{Formula, Gr1Spec, PropKind, Proposition};

/// Extends `base` with one output per skill and the conjuncts that encode
/// skill execution. Skills not mentioned in the base sys-init start inactive.
///
/// Skill outputs may already be declared in `base` (so that base guarantees
/// can mention them); a skill name that collides with an input, or with
/// another skill, is rejected.
pub fn compile_skills(
    abstraction: &Abstraction,
    skills: &[Skill],
    base: &Gr1Spec,
) -> Result<Gr1Spec, AbstractionError> {
    if skills.is_empty() {
        return Ok(base.clone());
    }
    let mut props = base.propositions().to_vec();
    let mut names = BTreeSet::new();
    for s in skills {
        if !names.insert(s.name()) {
            return Err(AbstractionError::DuplicateSkillName(s.name().to_string()));
        }
        match base.universe().kind_of(s.name()) {
            Some(PropKind::Output) => {}
            Some(_) => return Err(AbstractionError::DuplicateSkillName(s.name().to_string())),
            None => props.push(Proposition::new(s.name(), PropKind::Output)),
        }
        for p in s.scope() {
            if abstraction.kind_of(p) != Some(PropKind::ControllableInput) {
                return Err(AbstractionError::InvalidSkill {
                    skill: s.name().to_string(),
                    defect: format!("{p} is not a controllable input"),
                });
            }
        }
    }

    let controllable: Vec<&str> = base
        .universe()
        .names_of(|k| k == PropKind::ControllableInput)
        .collect();
    let frame = |props: &mut dyn Iterator<Item = &str>| {
        Formula::conjunction(props.map(|p| Formula::iff(Formula::next(p), Formula::atom(p))))
    };

    let mut sys_safety = base.sys_safety().to_vec();
    let mut env_safety = base.env_safety().to_vec();
    let mut env_liveness = base.env_liveness().to_vec();

    for s in skills {
        let active = Formula::atom(s.name());
        let chain = s.chain();
        let start = s.condition(&chain[0].precondition, true);
        let resume: Vec<Formula> = s.preconditions()[1..]
            .iter()
            .map(|c| s.condition(c, true))
            .collect();
        let allowed = if resume.is_empty() {
            start
        } else {
            Formula::or(
                start,
                Formula::and(active.clone(), Formula::disjunction(resume)),
            )
        };
        sys_safety.push(Formula::implies(Formula::next(s.name()), allowed));

        for t in chain {
            let mut targets = vec![s.condition(&t.precondition, true)];
            targets.extend(t.postconditions.iter().map(|c| s.condition(c, true)));
            let outside = frame(
                &mut controllable
                    .iter()
                    .copied()
                    .filter(|p| !s.scope().iter().any(|q| q == p)),
            );
            let mut effect = Formula::disjunction(targets);
            if outside != Formula::True {
                effect = Formula::and(effect, outside);
            }
            env_safety.push(Formula::implies(
                Formula::and(active.clone(), s.condition(&t.precondition, false)),
                effect,
            ));
        }

        let pres = Formula::disjunction(s.preconditions().into_iter().map(|c| s.condition(c, false)));
        env_liveness.push(Formula::or(Formula::not(active), Formula::not(pres)));
    }

    for (i, a) in skills.iter().enumerate() {
        for b in &skills[i + 1..] {
            sys_safety.push(Formula::not(Formula::and(
                Formula::next(a.name()),
                Formula::next(b.name()),
            )));
        }
    }

    let idle = Formula::not(Formula::disjunction(
        skills.iter().map(|s| Formula::atom(s.name())),
    ));
    let all_frame = frame(&mut controllable.iter().copied());
    if all_frame != Formula::True {
        env_safety.push(Formula::implies(idle, all_frame));
    }

    // skills the base leaves open start inactive
    let mentioned = base.sys_init().current_atoms();
    let off: Vec<Formula> = skills
        .iter()
        .filter(|s| !mentioned.contains(s.name()))
        .map(|s| Formula::not(Formula::atom(s.name())))
        .collect();
    let compiled = base.rebuild(
        props,
        dedup(env_safety),
        dedup(env_liveness),
        dedup(sys_safety),
    )?;
    if off.is_empty() {
        return Ok(compiled);
    }
    let sys_init = match base.sys_init() {
        Formula::True => Formula::conjunction(off),
        f => Formula::conjunction(std::iter::once(f.clone()).chain(off)),
    };
    Ok(compiled.with_sys_init(sys_init)?)
}

fn dedup(items: Vec<Formula>) -> Vec<Formula> {
    let mut out: Vec<Formula> = Vec::with_capacity(items.len());
    for f in items {
        if !out.contains(&f) {
            out.push(f);
        }
    }
    out
}

fn conjuncts<'a>(f: &'a Formula, out: &mut Vec<&'a Formula>) {
    match f {
        Formula::And(a, b) => {
            conjuncts(a, out);
            conjuncts(b, out);
        }
        Formula::True => {}
        _ => out.push(f),
    }
}

fn init_subset(task: &Formula, full: &Formula) -> bool {
    let (mut a, mut b) = (Vec::new(), Vec::new());
    conjuncts(task, &mut a);
    conjuncts(full, &mut b);
    a.iter().all(|f| b.contains(f))
}

/// Whether `task` keeps the env-init of `full` and only a subset of its
/// sys-init, safety and liveness conjuncts.
pub fn is_sub_specification(task: &Gr1Spec, full: &Gr1Spec) -> bool {
    let printed = |fs: &[Formula]| fs.iter().map(ToString::to_string).collect::<BTreeSet<_>>();
    let subset = |a: &[Formula], b: &[Formula]| printed(a).is_subset(&printed(b));
    task.env_init().to_string() == full.env_init().to_string()
        && init_subset(task.sys_init(), full.sys_init())
        && subset(task.env_safety(), full.env_safety())
        && subset(task.env_liveness(), full.env_liveness())
        && subset(task.sys_safety(), full.sys_safety())
        && subset(task.sys_liveness(), full.sys_liveness())
}

#[cfg(test)]
mod tests {
    use std::collections::BTreeMap;

    use super::*;
    use crate::abstraction::{Grounding, Transition};
    use crate::logic::{parse_unchecked, Assignment};

    fn world() -> (Abstraction, Gr1Spec) {
        let inputs: Vec<Proposition> = ["a", "b", "c"]
            .iter()
            .map(|n| Proposition::new(*n, PropKind::ControllableInput))
            .chain([Proposition::new("u", PropKind::UncontrollableInput)])
            .collect();
        let grounding = inputs
            .iter()
            .map(|p| {
                let object = (p.name != "u").then(|| "robot".to_string());
                (
                    p.name.clone(),
                    Grounding {
                        description: p.name.clone(),
                        object,
                        region: None,
                    },
                )
            })
            .collect();
        let abs = Abstraction::new(inputs.clone(), grounding, vec![], BTreeMap::new()).unwrap();
        let base = Gr1Spec::new(
            inputs,
            parse_unchecked("a & !b & !c").unwrap(),
            vec![],
            vec![],
            Formula::True,
            vec![],
            vec![parse_unchecked("c").unwrap()],
        )
        .unwrap();
        (abs, base)
    }

    fn one(n: &str) -> Assignment {
        Assignment::from_names([n])
    }

    #[test]
    fn empty_skill_list_is_identity() {
        let (abs, base) = world();
        assert_eq!(compile_skills(&abs, &[], &base).unwrap(), base);
    }

    #[test]
    fn compile_adds_output_and_encoding() {
        let (abs, base) = world();
        let chain = vec![
            Transition::new(one("a"), vec![one("b")]),
            Transition::new(one("b"), vec![one("c")]),
        ];
        let s = Skill::new("go", chain, &abs).unwrap();
        let spec = compile_skills(&abs, std::slice::from_ref(&s), &base).unwrap();
        assert_eq!(spec.universe().kind_of("go"), Some(PropKind::Output));
        let sys: Vec<String> = spec.sys_safety().iter().map(ToString::to_string).collect();
        assert_eq!(
            sys,
            ["go' -> a' & !b' & !c' | go & (!a' & b' & !c')"]
        );
        assert_eq!(spec.env_safety().len(), 3);
        assert_eq!(
            spec.env_liveness()[0].to_string(),
            "!go | !(a & !b & !c | !a & b & !c)"
        );
        assert!(is_sub_specification(&base, &spec));
        let again = compile_skills(&abs, &[s], &base).unwrap();
        assert_eq!(spec, again);
    }

    #[test]
    fn duplicate_names_rejected() {
        let (abs, base) = world();
        let s = Skill::new("go", vec![Transition::new(one("a"), vec![one("b")])], &abs).unwrap();
        let err = compile_skills(&abs, &[s.clone(), s], &base).unwrap_err();
        assert_eq!(err, AbstractionError::DuplicateSkillName("go".into()));
        let clash = Skill::new("u", vec![Transition::new(one("a"), vec![one("b")])], &abs).unwrap();
        assert!(compile_skills(&abs, &[clash], &base).is_err());
    }

    #[test]
    fn sub_specification_examples() {
        let (_, base) = world();
        assert!(is_sub_specification(&base, &base));
        let bigger = Gr1Spec::new(
            base.propositions().to_vec(),
            base.env_init().clone(),
            vec![],
            vec![],
            Formula::True,
            vec![],
            vec![parse_unchecked("c").unwrap(), parse_unchecked("a").unwrap()],
        )
        .unwrap();
        assert!(is_sub_specification(&base, &bigger));
        assert!(!is_sub_specification(&bigger, &base));
    }
}
