//! GR(1) realizability, strategies and counterstrategies over an explicit game.

mod counter;
mod game;
mod json;
mod solve;
mod strategy;

use std::fmt;

use thiserror::Error;

use crate::logic::{Assignment, Gr1Spec, LogicError};

pub use counter::{CounterNode, Counterstrategy};
pub use game::{EnvMove, Game, InitialChoice};
pub use solve::{EnvWinning, Winning};
pub use json::check_graph_json;
pub use strategy::{Strategy, StrategyNode};

pub const DEFAULT_STATE_BOUND: usize = 1 << 22;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SynthesisError {
    #[error("explicit game exceeds {bound} states ({propositions} propositions)")]
    StateSpaceTooLarge { bound: usize, propositions: usize },
    #[error("specification is unrealizable; no strategy exists")]
    NotRealizable,
    #[error("specification is realizable; no counterstrategy exists")]
    SpecRealizable,
    #[error(transparent)]
    Logic(#[from] LogicError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SolverOptions {
    pub state_bound: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            state_bound: DEFAULT_STATE_BOUND,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum UnrealizableReason {
    /// No output assignment satisfies sys-init for this initial input.
    NoInitialSystemChoice { inputs: Assignment },
    /// Every sys-init choice for this initial input is losing.
    NotWinning { inputs: Assignment },
}

impl fmt::Display for UnrealizableReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            UnrealizableReason::NoInitialSystemChoice { inputs } => {
                write!(f, "no initial system choice for inputs {inputs}")
            }
            UnrealizableReason::NotWinning { inputs } => {
                write!(f, "the environment wins from initial inputs {inputs}")
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Verdict {
    Realizable,
    Unrealizable(UnrealizableReason),
}

impl Verdict {
    pub fn is_realizable(&self) -> bool {
        matches!(self, Verdict::Realizable)
    }
}

/// A solved game: the verdict plus everything needed to extract a witness.
#[derive(Clone, Debug)]
pub struct Solution {
    pub game: Game,
    pub winning: Winning,
    pub verdict: Verdict,
}

impl Solution {
    pub fn is_realizable(&self) -> bool {
        self.verdict.is_realizable()
    }

    /// Whether game state `s` (by encoding) is winning for the system.
    pub fn is_winning_state(&self, state: u64) -> Option<bool> {
        self.game
            .states
            .iter()
            .position(|&s| s == state)
            .map(|i| self.winning.z[i])
    }

    pub fn strategy(&self) -> Result<Strategy, SynthesisError> {
        extract_strategy(self)
    }

    pub fn counterstrategy(&self) -> Result<Counterstrategy, SynthesisError> {
        extract_counterstrategy(self)
    }
}

pub fn check_realizability(
    spec: &Gr1Spec,
    options: &SolverOptions,
) -> Result<Solution, SynthesisError> {
    let game = Game::build(spec, options.state_bound)?;
    let winning = solve::system_winning(&game);
    let mut verdict = Verdict::Realizable;
    for choice in &game.initial {
        let inputs = game.universe.decode(choice.x);
        if choice.states.is_empty() {
            verdict = Verdict::Unrealizable(UnrealizableReason::NoInitialSystemChoice { inputs });
            break;
        }
        if !choice.states.iter().any(|&s| winning.z[s as usize]) {
            verdict = Verdict::Unrealizable(UnrealizableReason::NotWinning { inputs });
            break;
        }
    }
    log::debug!(
        "game with {} states solved: {:?}",
        game.len(),
        verdict.is_realizable()
    );
    Ok(Solution {
        game,
        winning,
        verdict,
    })
}

pub fn extract_strategy(solution: &Solution) -> Result<Strategy, SynthesisError> {
    if !solution.is_realizable() {
        return Err(SynthesisError::NotRealizable);
    }
    Ok(strategy::extract(&solution.game, &solution.winning))
}

pub fn extract_counterstrategy(solution: &Solution) -> Result<Counterstrategy, SynthesisError> {
    if solution.is_realizable() {
        return Err(SynthesisError::SpecRealizable);
    }
    Ok(counter::extract(&solution.game, &solution.winning))
}

/// Checks `spec` and extracts a strategy in one call.
pub fn synthesize(spec: &Gr1Spec, options: &SolverOptions) -> Result<Strategy, SynthesisError> {
    check_realizability(spec, options)?.strategy()
}

#[cfg(test)]
mod tests;
