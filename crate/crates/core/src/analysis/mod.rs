//! Turning counterstrategies into natural-language feedback.

mod scc;

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::logic::{eval_transition, Gr1Spec};
use crate::synthesis::Counterstrategy;

pub use scc::tarjan;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FeedbackKind {
    Syntax,
    Safety,
    Liveness,
}

impl fmt::Display for FeedbackKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FeedbackKind::Syntax => "syntax",
            FeedbackKind::Safety => "safety",
            FeedbackKind::Liveness => "liveness",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Payload {
    Syntax {
        /// JSON path into the candidate, e.g. `new_skill_0[0][1]`.
        path: String,
        #[serde(skip_serializing_if = "Option::is_none")]
        rule: Option<String>,
    },
    Safety {
        skills: Vec<String>,
        constraint: String,
    },
    Liveness {
        /// 1-based goal indices the system cannot reach.
        unsatisfied: Vec<usize>,
        /// 1-based goal indices reached along the way.
        satisfied: Vec<usize>,
    },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Feedback {
    #[serde(flatten)]
    pub payload: Payload,
    pub rendered: String,
}

impl Feedback {
    pub fn kind(&self) -> FeedbackKind {
        match self.payload {
            Payload::Syntax { .. } => FeedbackKind::Syntax,
            Payload::Safety { .. } => FeedbackKind::Safety,
            Payload::Liveness { .. } => FeedbackKind::Liveness,
        }
    }

    pub fn syntax(path: impl Into<String>, rule: Option<String>, rendered: impl Into<String>) -> Self {
        Self {
            payload: Payload::Syntax {
                path: path.into(),
                rule,
            },
            rendered: rendered.into(),
        }
    }

    pub fn safety(skills: Vec<String>, constraint: String) -> Self {
        let rendered = match skills.as_slice() {
            [one] => format!("{one} violates the hard constraints {constraint}"),
            many => format!(
                "skills in {{{}}} violate the hard constraints {constraint}",
                many.join(", ")
            ),
        };
        Self {
            payload: Payload::Safety { skills, constraint },
            rendered,
        }
    }

    pub fn liveness(spec: &Gr1Spec, unsatisfied: Vec<usize>, satisfied: Vec<usize>) -> Self {
        let goals = |idx: &[usize]| {
            idx.iter()
                .map(|&i| format!("( {} )", spec.sys_liveness()[i - 1]))
                .collect::<Vec<_>>()
                .join(", ")
        };
        let mut rendered = format!(
            "The new skills cannot satisfy liveness goals {}",
            goals(&unsatisfied)
        );
        if !satisfied.is_empty() {
            rendered.push_str(&format!(" after satisfying liveness goals {}", goals(&satisfied)));
        }
        rendered.push('.');
        Self {
            payload: Payload::Liveness {
                unsatisfied,
                satisfied,
            },
            rendered,
        }
    }
}

fn push_unique(out: &mut Vec<Feedback>, f: Feedback) {
    if !out.iter().any(|g| g.rendered == f.rendered) {
        out.push(f);
    }
}

/// Sys-safety conjuncts falsified on edges into sink states.
pub fn safety_analysis(cs: &Counterstrategy, spec: &Gr1Spec) -> Vec<Feedback> {
    let mut out = Vec::new();
    for (s, node) in cs.nodes().iter().enumerate() {
        let sinks: Vec<usize> = node
            .successors
            .iter()
            .copied()
            .filter(|&t| cs.is_sink(t))
            .collect();
        if sinks.is_empty() {
            continue;
        }
        let here = cs.label(s);
        let skills: Vec<String> = cs
            .universe()
            .props()
            .iter()
            .filter(|p| !p.kind.is_input())
            .map(|p| p.name.clone())
            .filter(|n| here.contains(n))
            .collect();
        for t in sinks {
            let there = cs.label(t);
            for psi in spec.sys_safety() {
                if !eval_transition(psi, &here, &there) {
                    push_unique(&mut out, Feedback::safety(skills.clone(), psi.to_string()));
                }
            }
        }
    }
    out
}

/// Components of the counterstrategy graph in reverse topological order.
pub fn strongly_connected_components(cs: &Counterstrategy) -> Vec<Vec<usize>> {
    let succ: Vec<Vec<usize>> = cs.nodes().iter().map(|n| n.successors.clone()).collect();
    tarjan(&succ)
}

/// Goal indices `i` (1-based) passed on an edge from rank `from` to rank `to`:
/// `from <= i < to`, wrapping around `n` when `from > to`.
pub fn passed_goals(from: usize, to: usize, n: usize) -> Vec<usize> {
    if from <= to {
        (from..to).collect()
    } else {
        (from..=n).chain(1..to).collect()
    }
}

/// Goals that sinking components of the counterstrategy never reach.
pub fn liveness_analysis(cs: &Counterstrategy, spec: &Gr1Spec) -> Vec<Feedback> {
    let n = spec.sys_liveness().len();
    let nodes = cs.nodes();
    let rank = |s: usize| nodes[s].goal + 1;
    let mut out = Vec::new();
    let comps = strongly_connected_components(cs);
    let mut comp_of = vec![0; nodes.len()];
    for (c, members) in comps.iter().enumerate() {
        for &s in members {
            comp_of[s] = c;
        }
    }
    // shortest paths from the initial nodes
    let mut parent = vec![usize::MAX; nodes.len()];
    let mut seen = vec![false; nodes.len()];
    let mut queue: std::collections::VecDeque<usize> = cs.initial().iter().copied().collect();
    for &s in cs.initial() {
        seen[s] = true;
    }
    while let Some(s) = queue.pop_front() {
        for &t in &nodes[s].successors {
            if !seen[t] {
                seen[t] = true;
                parent[t] = s;
                queue.push_back(t);
            }
        }
    }
    let mut found = Vec::new();
    for (c, members) in comps.iter().enumerate() {
        let sinking = members
            .iter()
            .all(|&s| nodes[s].successors.iter().all(|&t| comp_of[t] == c));
        let nontrivial = members.iter().any(|&s| !nodes[s].successors.is_empty());
        if !(sinking && nontrivial) {
            continue;
        }
        let mut passed = BTreeSet::new();
        for &s in members {
            for &t in &nodes[s].successors {
                passed.extend(passed_goals(rank(s), rank(t), n));
            }
        }
        let pursued: BTreeSet<usize> = members.iter().map(|&s| rank(s)).collect();
        let unsatisfied: Vec<usize> = pursued.difference(&passed).copied().collect();
        if unsatisfied.is_empty() {
            continue;
        }
        let mut satisfied = passed;
        if let Some(&entry) = members.iter().filter(|&&s| seen[s]).min_by_key(|&&s| s) {
            let mut t = entry;
            while parent[t] != usize::MAX {
                let s = parent[t];
                satisfied.extend(passed_goals(rank(s), rank(t), n));
                t = s;
            }
        }
        let satisfied: Vec<usize> = satisfied
            .into_iter()
            .filter(|g| !unsatisfied.contains(g))
            .collect();
        found.push((members[0], unsatisfied, satisfied));
    }
    found.sort_by_key(|(first, _, _)| *first);
    for (_, unsatisfied, satisfied) in found {
        push_unique(&mut out, Feedback::liveness(spec, unsatisfied, satisfied));
    }
    out
}

/// One line per item: syntax, then safety, then liveness.
pub fn render_feedback(items: &[Feedback]) -> String {
    let mut sorted: Vec<&Feedback> = items.iter().collect();
    sorted.sort_by_key(|f| f.kind());
    let mut out = String::new();
    for f in sorted {
        out.push_str(&f.rendered);
        out.push('\n');
    }
    out
}

pub fn feedback_json(items: &[Feedback]) -> serde_json::Value {
    let mut sorted: Vec<&Feedback> = items.iter().collect();
    sorted.sort_by_key(|f| f.kind());
    serde_json::to_value(sorted).expect("feedback serializes")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::{parse_unchecked, Formula, PropKind, Proposition, Universe};
    use crate::synthesis::CounterNode;

    fn spec(goals: &[&str]) -> Gr1Spec {
        Gr1Spec::new(
            vec![
                Proposition::new("a", PropKind::ControllableInput),
                Proposition::new("s", PropKind::Output),
            ],
            Formula::True,
            vec![],
            vec![],
            Formula::True,
            vec![parse_unchecked("!a'").unwrap()],
            goals.iter().map(|g| parse_unchecked(g).unwrap()).collect(),
        )
        .unwrap()
    }

    fn node(state: u64, goal: usize, successors: Vec<usize>) -> CounterNode {
        CounterNode {
            state,
            goal,
            env_move: (!successors.is_empty()).then_some(0),
            successors,
        }
    }

    fn cs(nodes: Vec<CounterNode>) -> Counterstrategy {
        let u = Universe::new(spec(&[]).propositions().to_vec()).unwrap();
        Counterstrategy::new(u, nodes, vec![0])
    }

    #[test]
    fn interval_rule() {
        assert_eq!(passed_goals(2, 2, 3), Vec::<usize>::new());
        assert_eq!(passed_goals(1, 3, 3), vec![1, 2]);
        assert_eq!(passed_goals(3, 1, 3), vec![3]);
        assert_eq!(passed_goals(3, 2, 3), vec![3, 1]);
    }

    #[test]
    fn safety_on_sink_edges_only() {
        let c = cs(vec![node(0b10, 0, vec![1, 2]), node(0b01, 0, vec![]), node(0, 0, vec![2])]);
        let fb = safety_analysis(&c, &spec(&["a"]));
        assert_eq!(fb.len(), 1);
        assert_eq!(fb[0].rendered, "s violates the hard constraints !a'");
        let none = cs(vec![node(0, 0, vec![0])]);
        assert!(safety_analysis(&none, &spec(&["a"])).is_empty());
    }

    #[test]
    fn liveness_single_rank_cycle() {
        let c = cs(vec![node(0, 1, vec![1]), node(0, 1, vec![0])]);
        let fb = liveness_analysis(&c, &spec(&["a", "s"]));
        assert_eq!(fb.len(), 1);
        assert_eq!(fb[0].rendered, "The new skills cannot satisfy liveness goals ( s ).");
    }

    #[test]
    fn liveness_with_satisfied_goals() {
        // ranks 3 -> 1 -> 3 over three goals: edge 3->1 passes 3, edge 1->3 passes 1 and 2
        let c = cs(vec![node(0, 2, vec![1]), node(0, 0, vec![0])]);
        assert!(liveness_analysis(&c, &spec(&["a", "s", "a | s"])).is_empty());
        let stuck = cs(vec![node(0, 2, vec![1]), node(0, 0, vec![2]), node(0, 0, vec![1])]);
        let fb = liveness_analysis(&stuck, &spec(&["a", "s", "a | s"]));
        assert_eq!(
            fb[0].rendered,
            "The new skills cannot satisfy liveness goals ( a ) after satisfying liveness goals ( a | s )."
        );
    }

    #[test]
    fn render_orders_by_kind() {
        let s = spec(&["a"]);
        let items = vec![
            Feedback::liveness(&s, vec![1], vec![]),
            Feedback::safety(vec!["x".into(), "y".into()], "!a'".into()),
        ];
        assert_eq!(
            render_feedback(&items),
            "skills in {x, y} violate the hard constraints !a'\nThe new skills cannot satisfy liveness goals ( a ).\n"
        );
        assert_eq!(render_feedback(&[]), "");
    }
}
