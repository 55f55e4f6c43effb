//! Nested fixpoints for the system and the environment.

use super::game::Game;

pub const NONE: u32 = u32::MAX;

/// Onion layers of one goal's least fixpoint inside the winning set.
#[derive(Clone, Debug)]
pub struct GoalLayers {
    /// First `Y` iterate (1-based) containing the state, or [`NONE`].
    pub layer: Vec<u32>,
    /// Smallest assumption index `i` whose `X` set holds the state at that layer.
    pub assumption: Vec<u32>,
}

/// The system winning set with the layers used for strategy extraction.
#[derive(Clone, Debug)]
pub struct Winning {
    pub z: Vec<bool>,
    pub goals: Vec<GoalLayers>,
}

fn or(a: &[bool], b: &[bool]) -> Vec<bool> {
    a.iter().zip(b).map(|(x, y)| *x || *y).collect()
}

fn and(a: &[bool], b: &[bool]) -> Vec<bool> {
    a.iter().zip(b).map(|(x, y)| *x && *y).collect()
}

/// μY. ∨_i νX. [(J ∧ Cpre Z) ∨ Cpre Y ∨ (¬A_i ∧ Cpre X)], optionally recording layers.
fn goal_fixpoint(game: &Game, z: &[bool], j: usize, mut record: Option<&mut GoalLayers>) -> Vec<bool> {
    let n = game.len();
    let reach_goal = and(&game.sys_goals[j], &game.cpre(z));
    let mut y = vec![false; n];
    let mut k = 0u32;
    loop {
        k += 1;
        let start = or(&reach_goal, &game.cpre(&y));
        let mut next_y = vec![false; n];
        let mut xs = Vec::with_capacity(game.env_goals.len());
        for a in &game.env_goals {
            let mut x = vec![true; n];
            loop {
                let cx = game.cpre(&x);
                let nx: Vec<bool> = (0..n).map(|s| start[s] || (!a[s] && cx[s])).collect();
                if nx == x {
                    break;
                }
                x = nx;
            }
            next_y = or(&next_y, &x);
            xs.push(x);
        }
        if let Some(rec) = record.as_deref_mut() {
            for s in 0..n {
                if next_y[s] && !y[s] {
                    rec.layer[s] = k;
                    rec.assumption[s] = xs.iter().position(|x| x[s]).unwrap_or(0) as u32;
                }
            }
        }
        if next_y == y {
            return y;
        }
        y = next_y;
    }
}

pub fn system_winning(game: &Game) -> Winning {
    let n = game.len();
    let mut z = vec![true; n];
    loop {
        let mut next = z.clone();
        for j in 0..game.sys_goals.len() {
            next = and(&next, &goal_fixpoint(game, &next, j, None));
        }
        if next == z {
            break;
        }
        z = next;
    }
    let goals = (0..game.sys_goals.len())
        .map(|j| {
            let mut rec = GoalLayers {
                layer: vec![NONE; n],
                assumption: vec![NONE; n],
            };
            goal_fixpoint(game, &z, j, Some(&mut rec));
            rec
        })
        .collect();
    Winning { z, goals }
}

/// Layers of the environment's attractor towards assumption `i` at one level.
#[derive(Clone, Debug)]
pub struct EnvLayers {
    /// 1-based layer of the state in μX', or [`NONE`].
    pub layer: Vec<u32>,
}

/// The environment's view of one level `r` and goal `j`.
#[derive(Clone, Debug)]
pub struct EnvGoalLevel {
    pub y: Vec<bool>,
    pub per_assumption: Vec<EnvLayers>,
}

/// Levels of μZ'. ∨_j νY'. ∧_i μX'. [(¬J_j ∨ Epre Z') ∧ Epre Y' ∧ (A_i ∨ Epre X')].
#[derive(Clone, Debug)]
pub struct EnvWinning {
    /// `levels[r - 1]` is Z'_r; Z'_0 is empty.
    pub levels: Vec<Vec<bool>>,
    /// `goal_levels[r - 1][j]`.
    pub goal_levels: Vec<Vec<EnvGoalLevel>>,
}

impl EnvWinning {
    pub fn level_of(&self, s: usize) -> Option<usize> {
        self.levels.iter().position(|z| z[s]).map(|r| r + 1)
    }

    pub fn below(&self, r: usize) -> Option<&[bool]> {
        (r >= 2).then(|| self.levels[r - 2].as_slice())
    }
}

fn env_goal_level(game: &Game, zprev: &[bool], j: usize) -> EnvGoalLevel {
    let n = game.len();
    let ez = game.epre(zprev);
    let leave: Vec<bool> = (0..n).map(|s| !game.sys_goals[j][s] || ez[s]).collect();
    let mut y = vec![true; n];
    loop {
        let ey = game.epre(&y);
        let base = and(&leave, &ey);
        let mut next_y = vec![true; n];
        let mut per = Vec::with_capacity(game.env_goals.len());
        for a in &game.env_goals {
            let mut layer = vec![NONE; n];
            let mut x = vec![false; n];
            let mut k = 0u32;
            loop {
                k += 1;
                let ex = game.epre(&x);
                let nx: Vec<bool> = (0..n).map(|s| base[s] && (a[s] || ex[s])).collect();
                for s in 0..n {
                    if nx[s] && !x[s] {
                        layer[s] = k;
                    }
                }
                if nx == x {
                    break;
                }
                x = nx;
            }
            next_y = and(&next_y, &x);
            per.push(EnvLayers { layer });
        }
        if next_y == y {
            return EnvGoalLevel {
                y,
                per_assumption: per,
            };
        }
        y = next_y;
    }
}

pub fn environment_winning(game: &Game) -> EnvWinning {
    let n = game.len();
    let mut levels: Vec<Vec<bool>> = Vec::new();
    let mut goal_levels = Vec::new();
    let mut z = vec![false; n];
    loop {
        let gl: Vec<EnvGoalLevel> = (0..game.sys_goals.len())
            .map(|j| env_goal_level(game, &z, j))
            .collect();
        let mut next = z.clone();
        for g in &gl {
            next = or(&next, &g.y);
        }
        if next == z {
            break;
        }
        levels.push(next.clone());
        goal_levels.push(gl);
        z = next;
    }
    EnvWinning {
        levels,
        goal_levels,
    }
}
