use std::collections::{HashMap, VecDeque};

use super::game::Game;
use super::solve::Winning;
use crate::logic::{Assignment, Universe};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StrategyNode {
    /// Full state encoding (inputs and outputs).
    pub state: u64,
    /// Index of the goal currently pursued (0-based).
    pub rank: usize,
    /// Environment inputs this node reacts to, ascending.
    pub moves: Vec<u64>,
    /// Successor node for each entry of `moves`.
    pub trans: Vec<usize>,
}

/// A deterministic controller: nodes numbered in breadth-first order from
/// the initial nodes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Strategy {
    universe: Universe,
    nodes: Vec<StrategyNode>,
    initial: Vec<usize>,
    goals: usize,
}

impl Strategy {
    pub fn new(universe: Universe, nodes: Vec<StrategyNode>, initial: Vec<usize>, goals: usize) -> Self {
        Self {
            universe,
            nodes,
            initial,
            goals,
        }
    }

    pub fn universe(&self) -> &Universe {
        &self.universe
    }

    pub fn nodes(&self) -> &[StrategyNode] {
        &self.nodes
    }

    pub fn initial(&self) -> &[usize] {
        &self.initial
    }

    pub fn goal_count(&self) -> usize {
        self.goals
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn inputs(&self, node: usize) -> Assignment {
        self.universe
            .decode(self.nodes[node].state & self.universe.input_mask())
    }

    pub fn outputs(&self, node: usize) -> Assignment {
        self.universe
            .decode(self.nodes[node].state & self.universe.output_mask())
    }

    /// Full label of a node.
    pub fn label(&self, node: usize) -> Assignment {
        self.universe.decode(self.nodes[node].state)
    }

    /// Successor of `node` when the environment sets the inputs to `x`.
    pub fn step(&self, node: usize, x: &Assignment) -> Option<usize> {
        let bits = self.universe.encode(x) & self.universe.input_mask();
        self.step_bits(node, bits)
    }

    pub fn step_bits(&self, node: usize, x: u64) -> Option<usize> {
        let n = &self.nodes[node];
        n.moves
            .binary_search(&x)
            .ok()
            .map(|k| n.trans[k])
    }
}

pub(super) fn extract(game: &Game, win: &Winning) -> Strategy {
    let goals = game.sys_goals.len();
    let mut ids: HashMap<(u32, usize), usize> = HashMap::new();
    let mut nodes: Vec<StrategyNode> = Vec::new();
    let mut queue = VecDeque::new();
    let mut intern = |s: u32, j: usize, nodes: &mut Vec<StrategyNode>, queue: &mut VecDeque<usize>| {
        *ids.entry((s, j)).or_insert_with(|| {
            nodes.push(StrategyNode {
                state: game.states[s as usize],
                rank: j,
                moves: Vec::new(),
                trans: Vec::new(),
            });
            queue.push_back(nodes.len() - 1);
            nodes.len() - 1
        })
    };

    let mut initial = Vec::new();
    for choice in &game.initial {
        if let Some(&s) = choice.states.iter().find(|&&s| win.z[s as usize]) {
            let id = intern(s, 0, &mut nodes, &mut queue);
            if !initial.contains(&id) {
                initial.push(id);
            }
        }
    }

    let index: HashMap<u64, u32> = game
        .states
        .iter()
        .enumerate()
        .map(|(i, &s)| (s, i as u32))
        .collect();
    while let Some(id) = queue.pop_front() {
        let s = index[&nodes[id].state];
        let j = nodes[id].rank;
        let target = if game.sys_goals[j][s as usize] {
            (j + 1) % goals
        } else {
            j
        };
        let layers = &win.goals[target];
        let mut moves = Vec::new();
        let mut trans = Vec::new();
        for m in &game.moves[s as usize] {
            let best = m
                .responses
                .iter()
                .copied()
                .filter(|&r| win.z[r as usize])
                .min_by_key(|&r| {
                    (
                        layers.layer[r as usize],
                        layers.assumption[r as usize],
                        game.states[r as usize],
                    )
                });
            let Some(r) = best else { continue };
            moves.push(m.x);
            trans.push(intern(r, target, &mut nodes, &mut queue));
        }
        nodes[id].moves = moves;
        nodes[id].trans = trans;
    }

    Strategy {
        universe: game.universe.clone(),
        nodes,
        initial,
        goals,
    }
}
