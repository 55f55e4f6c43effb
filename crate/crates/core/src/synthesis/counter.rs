use std::collections::{HashMap, VecDeque};

use super::game::{EnvMove, Game};
use super::solve::{environment_winning, EnvWinning, Winning, NONE};
use crate::logic::{Assignment, Universe};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CounterNode {
    /// Full state encoding. Deadlock nodes carry the environment's last
    /// input choice and no outputs.
    pub state: u64,
    /// Goal the system is pursuing here (0-based).
    pub goal: usize,
    /// The environment's input choice, or `None` at a deadlock.
    pub env_move: Option<u64>,
    /// Every system response to `env_move`.
    pub successors: Vec<usize>,
}

/// An environment strategy witnessing unrealizability.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Counterstrategy {
    universe: Universe,
    nodes: Vec<CounterNode>,
    initial: Vec<usize>,
}

impl Counterstrategy {
    pub fn new(universe: Universe, nodes: Vec<CounterNode>, initial: Vec<usize>) -> Self {
        Self {
            universe,
            nodes,
            initial,
        }
    }

    pub fn universe(&self) -> &Universe {
        &self.universe
    }

    pub fn nodes(&self) -> &[CounterNode] {
        &self.nodes
    }

    pub fn initial(&self) -> &[usize] {
        &self.initial
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

    pub fn label(&self, node: usize) -> Assignment {
        self.universe.decode(self.nodes[node].state)
    }

    /// A node where the system has no response to the environment's move.
    pub fn is_sink(&self, node: usize) -> bool {
        self.nodes[node].successors.is_empty()
    }

    pub fn successors(&self, node: usize) -> &[usize] {
        &self.nodes[node].successors
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
struct Memory {
    level: usize,
    goal: usize,
    assumption: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
enum Key {
    State(u32, Memory),
    Deadlock(u64, usize),
}

fn reset(env: &EnvWinning, s: usize) -> Memory {
    let level = env.level_of(s).expect("counterstrategy state outside the environment winning set");
    let goal = env.goal_levels[level - 1]
        .iter()
        .position(|g| g.y[s])
        .expect("state at a level belongs to some goal");
    Memory {
        level,
        goal,
        assumption: 0,
    }
}

#[derive(Clone, Copy)]
enum Choice<'a> {
    Descend(&'a EnvMove),
    Cycle(&'a EnvMove),
    Approach(&'a EnvMove),
}

fn choose<'a>(game: &'a Game, env: &EnvWinning, s: usize, mem: Memory) -> Choice<'a> {
    let moves = &game.moves[s];
    let below = env.below(mem.level);
    let inside = |m: &EnvMove, set: &dyn Fn(usize) -> bool| m.responses.iter().all(|&t| set(t as usize));
    if let Some(m) = moves
        .iter()
        .find(|m| inside(m, &|t| below.is_some_and(|b| b[t])))
    {
        return Choice::Descend(m);
    }
    let level = &env.goal_levels[mem.level - 1][mem.goal];
    if game.env_goals[mem.assumption][s] {
        let m = moves
            .iter()
            .find(|m| inside(m, &|t| level.y[t]))
            .expect("assumption state can stay in the goal level");
        return Choice::Cycle(m);
    }
    let layer = &level.per_assumption[mem.assumption].layer;
    let k = layer[s];
    let m = moves
        .iter()
        .find(|m| inside(m, &|t| layer[t] != NONE && layer[t] < k))
        .expect("state can approach the assumption");
    Choice::Approach(m)
}

struct Builder<'a> {
    game: &'a Game,
    ids: HashMap<Key, usize>,
    keys: Vec<Key>,
    nodes: Vec<CounterNode>,
    queue: VecDeque<usize>,
}

impl Builder<'_> {
    fn intern(&mut self, key: Key) -> usize {
        if let Some(&id) = self.ids.get(&key) {
            return id;
        }
        let (state, goal) = match key {
            Key::State(s, m) => (self.game.states[s as usize], m.goal),
            Key::Deadlock(x, g) => (x & self.game.universe.input_mask(), g),
        };
        let id = self.nodes.len();
        self.nodes.push(CounterNode {
            state,
            goal,
            env_move: None,
            successors: Vec::new(),
        });
        self.keys.push(key);
        self.ids.insert(key, id);
        self.queue.push_back(id);
        id
    }
}

pub(super) fn extract(game: &Game, win: &Winning) -> Counterstrategy {
    let env = environment_winning(game);
    let assumptions = game.env_goals.len();
    let mut b = Builder {
        game,
        ids: HashMap::new(),
        keys: Vec::new(),
        nodes: Vec::new(),
        queue: VecDeque::new(),
    };

    let mut initial = Vec::new();
    let losing = game
        .initial
        .iter()
        .find(|c| !c.states.iter().any(|&s| win.z[s as usize]));
    if let Some(choice) = losing {
        if choice.states.is_empty() {
            initial.push(b.intern(Key::Deadlock(choice.x, 0)));
        }
        for &s in &choice.states {
            initial.push(b.intern(Key::State(s, reset(&env, s as usize))));
        }
    }

    while let Some(id) = b.queue.pop_front() {
        let Key::State(s, mem) = b.keys[id] else { continue };
        let choice = choose(game, &env, s as usize, mem);
        let m = match choice {
            Choice::Descend(m) | Choice::Cycle(m) | Choice::Approach(m) => m,
        };
        let successors: Vec<usize> = if m.responses.is_empty() {
            vec![b.intern(Key::Deadlock(m.x, mem.goal))]
        } else {
            m.responses
                .iter()
                .map(|&t| {
                    let next = match choice {
                        Choice::Descend(_) => reset(&env, t as usize),
                        Choice::Cycle(_) => Memory {
                            assumption: (mem.assumption + 1) % assumptions,
                            ..mem
                        },
                        Choice::Approach(_) => mem,
                    };
                    b.intern(Key::State(t, next))
                })
                .collect()
        };
        b.nodes[id].env_move = Some(m.x);
        b.nodes[id].successors = successors;
    }

    Counterstrategy {
        universe: game.universe.clone(),
        nodes: b.nodes,
        initial,
    }
}
