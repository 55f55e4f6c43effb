//! Brute-force GR(1) solver used as a reference.
//!
//! Enumerates every assignment, degeneralizes the GR(1) objective with two
//! round-robin counters into a max-parity game with priorities 0..=2, and
//! solves it with Zielonka's recursive algorithm. Nothing here shares code
//! with the library solver beyond formula evaluation on assignments.

use std::collections::HashMap;

use skillfix::logic::{eval_state, eval_transition, Assignment, Gr1Spec, PropKind};

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Player {
    Sys,
    Env,
}

pub struct ParityGame {
    pub owner: Vec<Player>,
    pub priority: Vec<u8>,
    pub succ: Vec<Vec<usize>>,
}

impl ParityGame {
    fn push(&mut self, o: Player, p: u8) -> usize {
        self.owner.push(o);
        self.priority.push(p);
        self.succ.push(Vec::new());
        self.owner.len() - 1
    }

    fn pred(&self) -> Vec<Vec<usize>> {
        let mut p = vec![Vec::new(); self.owner.len()];
        for (v, ss) in self.succ.iter().enumerate() {
            for &w in ss {
                p[w].push(v);
            }
        }
        p
    }
}

fn attractor(g: &ParityGame, pred: &[Vec<usize>], alive: &[bool], target: &[bool], who: Player) -> Vec<bool> {
    let n = g.owner.len();
    let mut attr = target.to_vec();
    let mut count: Vec<usize> = (0..n)
        .map(|v| g.succ[v].iter().filter(|&&w| alive[w]).count())
        .collect();
    let mut stack: Vec<usize> = (0..n).filter(|&v| attr[v]).collect();
    while let Some(w) = stack.pop() {
        for &v in &pred[w] {
            if !alive[v] || attr[v] {
                continue;
            }
            if g.owner[v] == who {
                attr[v] = true;
                stack.push(v);
            } else {
                count[v] -= 1;
                if count[v] == 0 {
                    attr[v] = true;
                    stack.push(v);
                }
            }
        }
    }
    attr
}

/// Returns, for each node, whether the system (even) wins.
fn zielonka(g: &ParityGame, pred: &[Vec<usize>], alive: &[bool]) -> Vec<bool> {
    let n = g.owner.len();
    if !alive.iter().any(|&a| a) {
        return vec![false; n];
    }
    let d = (0..n).filter(|&v| alive[v]).map(|v| g.priority[v]).max().unwrap();
    let (me, other) = if d % 2 == 0 {
        (Player::Sys, Player::Env)
    } else {
        (Player::Env, Player::Sys)
    };
    let top: Vec<bool> = (0..n).map(|v| alive[v] && g.priority[v] == d).collect();
    let a = attractor(g, pred, alive, &top, me);
    let rest: Vec<bool> = (0..n).map(|v| alive[v] && !a[v]).collect();
    let w_rest = zielonka(g, pred, &rest);
    // nodes of `rest` won by `other`
    let other_won: Vec<bool> = (0..n)
        .map(|v| rest[v] && (w_rest[v] == (other == Player::Sys)))
        .collect();
    if !other_won.iter().any(|&b| b) {
        return (0..n).map(|v| alive[v] && me == Player::Sys).collect();
    }
    let b = attractor(g, pred, alive, &other_won, other);
    let remaining: Vec<bool> = (0..n).map(|v| alive[v] && !b[v]).collect();
    let w = zielonka(g, pred, &remaining);
    (0..n)
        .map(|v| {
            if !alive[v] {
                false
            } else if b[v] {
                other == Player::Sys
            } else {
                w[v]
            }
        })
        .collect()
}

pub struct Oracle {
    names: Vec<String>,
    inputs: Vec<usize>,
    outputs: Vec<usize>,
    m: usize,
    n: usize,
    index: HashMap<(u64, usize, usize), usize>,
    win: Vec<bool>,
    spec: Gr1Spec,
}

impl Oracle {
    pub fn solve(spec: &Gr1Spec) -> Oracle {
        let names: Vec<String> = spec.propositions().iter().map(|p| p.name.clone()).collect();
        let inputs: Vec<usize> = (0..names.len())
            .filter(|&i| spec.propositions()[i].kind != PropKind::Output)
            .collect();
        let outputs: Vec<usize> = (0..names.len())
            .filter(|&i| spec.propositions()[i].kind == PropKind::Output)
            .collect();
        let decode = |bits: u64| -> Assignment {
            (0..names.len())
                .filter(|i| bits >> i & 1 == 1)
                .map(|i| names[i].clone())
                .collect()
        };
        let sub = |idx: &[usize]| -> Vec<u64> {
            (0..1u64 << idx.len())
                .map(|c| {
                    idx.iter()
                        .enumerate()
                        .filter(|(k, _)| c >> k & 1 == 1)
                        .fold(0, |m, (_, &b)| m | 1 << b)
                })
                .collect()
        };
        let xs = sub(&inputs);
        let ys = sub(&outputs);
        let all: Vec<u64> = xs.iter().flat_map(|&x| ys.iter().map(move |&y| x | y)).collect();

        let env_goals: Vec<_> = if spec.env_liveness().is_empty() {
            vec![skillfix::logic::Formula::True]
        } else {
            spec.env_liveness().to_vec()
        };
        let sys_goals = spec.sys_liveness().to_vec();
        let m = env_goals.len();
        let n = sys_goals.len();
        let holds = |f: &skillfix::logic::Formula, s: u64| eval_state(f, &decode(s)).unwrap();
        let env_ok = |s: u64, t: u64| {
            spec.env_safety()
                .iter()
                .all(|f| eval_transition(f, &decode(s), &decode(t)))
        };
        let sys_ok = |s: u64, t: u64| {
            spec.sys_safety()
                .iter()
                .all(|f| eval_transition(f, &decode(s), &decode(t)))
        };

        let mut g = ParityGame {
            owner: Vec::new(),
            priority: Vec::new(),
            succ: Vec::new(),
        };
        let sys_sink = g.push(Player::Sys, 2);
        let env_sink = g.push(Player::Sys, 1);
        let mut index = HashMap::new();
        for &s in &all {
            for (ci, eg) in env_goals.iter().enumerate() {
                for (cj, sg) in sys_goals.iter().enumerate() {
                    let p = if cj == n - 1 && holds(sg, s) {
                        2
                    } else if ci == m - 1 && holds(eg, s) {
                        1
                    } else {
                        0
                    };
                    let id = g.push(Player::Env, p);
                    index.insert((s, ci, cj), id);
                }
            }
        }
        g.succ[sys_sink].push(sys_sink);
        g.succ[env_sink].push(env_sink);
        for &s in &all {
            let moves: Vec<u64> = xs.iter().copied().filter(|&x| env_ok(s, x)).collect();
            let responses: Vec<Vec<u64>> = moves
                .iter()
                .map(|&x| ys.iter().map(|&y| x | y).filter(|&t| sys_ok(s, t)).collect())
                .collect();
            for ci in 0..m {
                for cj in 0..n {
                    let e = index[&(s, ci, cj)];
                    let ci2 = if holds(&env_goals[ci], s) { (ci + 1) % m } else { ci };
                    let cj2 = if holds(&sys_goals[cj], s) { (cj + 1) % n } else { cj };
                    if moves.is_empty() {
                        g.succ[e].push(sys_sink);
                        continue;
                    }
                    for r in &responses {
                        let v = g.push(Player::Sys, 0);
                        g.succ[e].push(v);
                        if r.is_empty() {
                            g.succ[v].push(env_sink);
                        }
                        for &t in r {
                            g.succ[v].push(index[&(t, ci2, cj2)]);
                        }
                    }
                }
            }
        }
        let pred = g.pred();
        let alive = vec![true; g.owner.len()];
        let win = zielonka(&g, &pred, &alive);
        Oracle {
            names,
            inputs,
            outputs,
            m,
            n,
            index,
            win,
            spec: spec.clone(),
        }
    }

    /// Whether the system wins from full state `s` with fresh counters.
    pub fn winning(&self, s: u64) -> bool {
        self.win[self.index[&(s, 0, 0)]]
    }

    pub fn realizable(&self) -> bool {
        let _ = (self.m, self.n);
        let decode = |bits: u64| -> Assignment {
            (0..self.names.len())
                .filter(|i| bits >> i & 1 == 1)
                .map(|i| self.names[i].clone())
                .collect()
        };
        let sub = |idx: &[usize]| -> Vec<u64> {
            (0..1u64 << idx.len())
                .map(|c| {
                    idx.iter()
                        .enumerate()
                        .filter(|(k, _)| c >> k & 1 == 1)
                        .fold(0, |m, (_, &b)| m | 1 << b)
                })
                .collect()
        };
        sub(&self.inputs).into_iter().all(|x| {
            if !eval_state(self.spec.env_init(), &decode(x)).unwrap() {
                return true;
            }
            sub(&self.outputs).into_iter().any(|y| {
                eval_state(self.spec.sys_init(), &decode(x | y)).unwrap() && self.winning(x | y)
            })
        })
    }
}
