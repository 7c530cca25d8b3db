//! One-dimensional maker-breaker discrepancy game.
//!
//! Two players alternately pick an uncolored element and give it a sign. The
//! breaker wants some prefix sum to become large in absolute value at some
//! point of the game; the maker wants all prefixes to stay small. A player
//! may be allowed to wait (skip a turn).
//!
//! Values are kept both as exact rationals and as integers scaled by the
//! common denominator; strategies only see the scaled integers, which is
//! enough because every decision compares sums.

mod breaker;
mod interleave;
mod maker;
mod search;

use std::fmt;

use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive};

use crate::error::{Error, Result};
use crate::rational::{format_rat, lcm_denominators, Rat};

pub use breaker::{breaker_hard_instance, BreakerStructure, HardTree, RandomBreaker, TreeBreaker};
pub use interleave::{color_two_permutation, interleaved_two_sparse, InterleaveReport, TwoPermutationResult};
pub use maker::{GreedyMaker, MakerPolicy, PairingMaker};
pub use search::{exhaustive_breaker_value, SearchConfig, DEFAULT_SEARCH_LIMIT};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Player {
    Maker,
    Breaker,
}

impl Player {
    pub fn other(self) -> Player {
        match self {
            Player::Maker => Player::Breaker,
            Player::Breaker => Player::Maker,
        }
    }

    fn slot(self) -> usize {
        match self {
            Player::Maker => 0,
            Player::Breaker => 1,
        }
    }
}

impl fmt::Display for Player {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Player::Maker => "maker",
            Player::Breaker => "breaker",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Move {
    Color { index: usize, sign: i8 },
    Wait,
}

/// Values scaled to integers by their common denominator.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScaledValues {
    pub ints: Vec<i128>,
    pub scale: i128,
}

impl ScaledValues {
    pub fn new(values: &[Rat]) -> Result<Self> {
        let scale = lcm_denominators(values);
        let ints = values
            .iter()
            .map(|v| {
                let x: BigInt = v.numer() * (&scale / v.denom());
                x.to_i128()
            })
            .collect::<Option<Vec<_>>>()
            .ok_or_else(|| Error::InvalidArgument("values too large for the game engine".into()))?;
        let scale = scale
            .to_i128()
            .ok_or_else(|| Error::InvalidArgument("common denominator too large".into()))?;
        Ok(ScaledValues { ints, scale })
    }

    pub fn to_rat(&self, x: i128) -> Rat {
        Rat::new(BigInt::from(x), BigInt::from(self.scale))
    }
}

/// Largest absolute prefix sum with uncolored entries counted as zero.
pub fn max_abs_prefix(values: &[i128], colors: &[i8]) -> i128 {
    let mut s = 0i128;
    let mut best = 0i128;
    for (v, &c) in values.iter().zip(colors) {
        s += i128::from(c) * v;
        best = best.max(s.abs());
    }
    best
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GameState {
    pub values: Vec<Rat>,
    pub scaled: ScaledValues,
    pub colors: Vec<i8>,
    pub to_move: Player,
    pub starter: Player,
    /// Indexed maker, breaker.
    pub wait_allowed: [bool; 2],
    pub history: Vec<(Player, Move)>,
}

impl GameState {
    pub fn new(values: Vec<Rat>, starter: Player, wait_allowed: [bool; 2]) -> Result<Self> {
        if let Some(v) = values.iter().find(|v| v.abs() > Rat::from_integer(1.into())) {
            return Err(Error::InvalidArgument(format!("game value {v} outside [-1, 1]")));
        }
        let scaled = ScaledValues::new(&values)?;
        let n = values.len();
        Ok(GameState {
            values,
            scaled,
            colors: vec![0; n],
            to_move: starter,
            starter,
            wait_allowed,
            history: Vec::new(),
        })
    }

    pub fn n(&self) -> usize {
        self.values.len()
    }

    pub fn is_finished(&self) -> bool {
        self.colors.iter().all(|&c| c != 0)
    }

    pub fn uncolored(&self) -> impl Iterator<Item = usize> + '_ {
        self.colors.iter().enumerate().filter(|(_, &c)| c == 0).map(|(i, _)| i)
    }

    pub fn max_abs_prefix(&self) -> Rat {
        self.scaled.to_rat(max_abs_prefix(&self.scaled.ints, &self.colors))
    }

    /// The most recent move made by `player`, if any.
    pub fn last_move_of(&self, player: Player) -> Option<Move> {
        self.history.iter().rev().find(|(p, _)| *p == player).map(|(_, m)| *m)
    }

    pub fn apply(&mut self, mv: Move) -> Result<()> {
        let player = self.to_move;
        match mv {
            Move::Wait => {
                if !self.wait_allowed[player.slot()] {
                    return Err(Error::IllegalMove(format!("{player} may not wait")));
                }
            }
            Move::Color { index, sign } => {
                if index >= self.n() {
                    return Err(Error::IllegalMove(format!("{player} colored index {index} out of range")));
                }
                if sign != 1 && sign != -1 {
                    return Err(Error::IllegalMove(format!("{player} used sign {sign}")));
                }
                if self.colors[index] != 0 {
                    return Err(Error::IllegalMove(format!("{player} recolored index {index}")));
                }
                self.colors[index] = sign;
            }
        }
        self.history.push((player, mv));
        self.to_move = player.other();
        Ok(())
    }

    /// Rebuilds a state from its starting parameters and a move list.
    pub fn replay(values: Vec<Rat>, starter: Player, wait_allowed: [bool; 2], history: &[(Player, Move)]) -> Result<Self> {
        let mut state = GameState::new(values, starter, wait_allowed)?;
        for (player, mv) in history {
            if *player != state.to_move {
                return Err(Error::IllegalMove(format!("history has {player} moving out of turn")));
            }
            state.apply(*mv)?;
        }
        Ok(state)
    }
}

/// A player in [`play_game`].
pub trait Strategy {
    fn next_move(&mut self, state: &GameState) -> Result<Move>;
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceRow {
    pub turn: usize,
    pub player: Player,
    pub mv: Move,
    pub max_prefix_after: Rat,
}

#[derive(Debug, Clone)]
pub struct GameOutcome {
    pub state: GameState,
    pub trace: Vec<TraceRow>,
    /// Largest absolute prefix seen at any point of the game.
    pub payoff: Rat,
    /// True when the game stopped on two consecutive waits with elements left.
    pub draw_stop: bool,
}

impl GameOutcome {
    /// CSV with columns turn, player, index_or_wait, sign, max_prefix_after.
    pub fn trace_csv(&self) -> String {
        let mut out = String::from("turn,player,index_or_wait,sign,max_prefix_after\n");
        for row in &self.trace {
            let (idx, sign) = match row.mv {
                Move::Color { index, sign } => (index.to_string(), sign.to_string()),
                Move::Wait => ("wait".to_string(), "0".to_string()),
            };
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                row.turn,
                row.player,
                idx,
                sign,
                format_rat(&row.max_prefix_after)
            ));
        }
        out
    }
}

pub fn play_game(
    values: Vec<Rat>,
    maker: &mut dyn Strategy,
    breaker: &mut dyn Strategy,
    starter: Player,
    wait_allowed: [bool; 2],
) -> Result<GameOutcome> {
    let mut state = GameState::new(values, starter, wait_allowed)?;
    let mut trace = Vec::new();
    let mut payoff = 0i128;
    let mut consecutive_waits = 0;
    let mut draw_stop = false;
    while !state.is_finished() {
        let player = state.to_move;
        let mv = match player {
            Player::Maker => maker.next_move(&state)?,
            Player::Breaker => breaker.next_move(&state)?,
        };
        state.apply(mv)?;
        let now = max_abs_prefix(&state.scaled.ints, &state.colors);
        payoff = payoff.max(now);
        trace.push(TraceRow {
            turn: trace.len() + 1,
            player,
            mv,
            max_prefix_after: state.scaled.to_rat(now),
        });
        if mv == Move::Wait {
            consecutive_waits += 1;
            if consecutive_waits >= 2 {
                draw_stop = true;
                break;
            }
        } else {
            consecutive_waits = 0;
        }
    }
    let payoff = state.scaled.to_rat(payoff);
    Ok(GameOutcome {
        state,
        trace,
        payoff,
        draw_stop,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{rat, ratio};

    struct Scripted(Vec<Move>);

    impl Strategy for Scripted {
        fn next_move(&mut self, _: &GameState) -> Result<Move> {
            Ok(if self.0.is_empty() { Move::Wait } else { self.0.remove(0) })
        }
    }

    #[test]
    fn pairing_answers_the_partner() {
        let mut maker = PairingMaker::strict();
        let mut breaker = Scripted(vec![Move::Color { index: 0, sign: 1 }]);
        let out = play_game(vec![rat(1), rat(1)], &mut maker, &mut breaker, Player::Breaker, [false, false]).unwrap();
        assert_eq!(out.state.colors, vec![1, -1]);
        assert_eq!(out.payoff, rat(1));
    }

    #[test]
    fn single_element() {
        let mut maker = GreedyMaker;
        let mut breaker = Scripted(vec![]);
        let out = play_game(vec![ratio(-3, 4)], &mut maker, &mut breaker, Player::Maker, [false, false]).unwrap();
        assert_eq!(out.payoff, ratio(3, 4));
    }

    #[test]
    fn recoloring_is_rejected() {
        let mut maker = Scripted(vec![Move::Color { index: 0, sign: 1 }]);
        let mut breaker = Scripted(vec![Move::Color { index: 0, sign: -1 }]);
        let err = play_game(vec![rat(1), rat(1)], &mut maker, &mut breaker, Player::Maker, [false, false]).unwrap_err();
        assert!(matches!(err, Error::IllegalMove(_)));
    }

    #[test]
    fn forbidden_wait_is_rejected() {
        let mut maker = Scripted(vec![]);
        let mut breaker = Scripted(vec![]);
        assert!(play_game(vec![rat(1)], &mut maker, &mut breaker, Player::Maker, [false, true]).is_err());
    }

    #[test]
    fn two_waits_stop_the_game() {
        let mut maker = Scripted(vec![]);
        let mut breaker = Scripted(vec![]);
        let out = play_game(vec![rat(1)], &mut maker, &mut breaker, Player::Maker, [true, true]).unwrap();
        assert!(out.draw_stop);
        assert_eq!(out.trace.len(), 2);
    }

    #[test]
    fn replay_reproduces_state() {
        let mut maker = PairingMaker::strict();
        let mut breaker = RandomBreaker::new(3, 0.2);
        let values = vec![rat(1); 9];
        let out = play_game(values.clone(), &mut maker, &mut breaker, Player::Breaker, [false, true]).unwrap();
        let again = GameState::replay(values, Player::Breaker, [false, true], &out.state.history).unwrap();
        assert_eq!(again, out.state);
    }

    #[test]
    fn csv_trace_shape() {
        let mut maker = PairingMaker::strict();
        let mut breaker = Scripted(vec![Move::Color { index: 1, sign: -1 }]);
        let out = play_game(vec![rat(1), rat(1)], &mut maker, &mut breaker, Player::Breaker, [false, false]).unwrap();
        let csv = out.trace_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "turn,player,index_or_wait,sign,max_prefix_after");
        assert_eq!(lines[1], "1,breaker,1,-1,1/1");
        assert_eq!(lines.len(), 3);
    }

    #[test]
    fn values_outside_unit_interval_are_rejected() {
        assert!(GameState::new(vec![rat(2)], Player::Maker, [false, false]).is_err());
    }
}
