use crate::error::{Error, Result};

use super::{max_abs_prefix, GameState, Move, Strategy};

/// A maker strategy that depends only on the current position.
///
/// `values` are integers proportional to the game values; `colors` holds
/// the current signs (0 for uncolored). Returns `None` when nothing is left.
pub trait MakerPolicy {
    fn choose(&self, values: &[i128], colors: &[i8]) -> Result<Option<(usize, i8)>>;
}

fn sign_of(v: i128) -> i8 {
    if v < 0 {
        -1
    } else {
        1
    }
}

fn prefix_before(values: &[i128], colors: &[i8], i: usize) -> i128 {
    values[..i].iter().zip(&colors[..i]).map(|(v, &c)| i128::from(c) * v).sum()
}

/// Pairs elements (0,1), (2,3), ...; answers inside a pair, otherwise colors
/// the first free element against the running prefix. With an odd count the
/// last element is left out of the pairing and colored last.
#[derive(Debug, Clone, Copy, Default)]
pub struct PairingMaker {
    /// Accept arbitrary nonzero values by working with sign-normalized
    /// contributions. The strict form only accepts ±1 values.
    pub relaxed: bool,
}

impl PairingMaker {
    pub fn strict() -> Self {
        PairingMaker { relaxed: false }
    }

    pub fn relaxed() -> Self {
        PairingMaker { relaxed: true }
    }
}

impl MakerPolicy for PairingMaker {
    fn choose(&self, values: &[i128], colors: &[i8]) -> Result<Option<(usize, i8)>> {
        if !self.relaxed {
            if let Some(first) = values.first() {
                let unit = first.abs();
                if unit == 0 || values.iter().any(|v| v.abs() != unit) {
                    return Err(Error::Precondition("pairing maker needs values in {-1, +1}".into()));
                }
            }
        }
        let n = values.len();
        let paired = n - n % 2;
        // Answer in the last half-colored pair.
        for p in (0..paired / 2).rev() {
            let (a, b) = (2 * p, 2 * p + 1);
            let (done, free) = match (colors[a] != 0, colors[b] != 0) {
                (true, false) => (a, b),
                (false, true) => (b, a),
                _ => continue,
            };
            let contribution = colors[done] * sign_of(values[done]);
            return Ok(Some((free, -contribution * sign_of(values[free]))));
        }
        let target = (0..paired).find(|&i| colors[i] == 0).or_else(|| (paired..n).find(|&i| colors[i] == 0));
        Ok(target.map(|i| {
            let want = if prefix_before(values, colors, i) < 0 { 1 } else { -1 };
            (i, want * sign_of(values[i]))
        }))
    }
}

/// Colors the first free element with the sign that keeps the largest
/// absolute prefix smallest; ties go against the prefix before it.
#[derive(Debug, Clone, Copy, Default)]
pub struct GreedyMaker;

impl MakerPolicy for GreedyMaker {
    fn choose(&self, values: &[i128], colors: &[i8]) -> Result<Option<(usize, i8)>> {
        let Some(i) = colors.iter().position(|&c| c == 0) else {
            return Ok(None);
        };
        let mut trial = colors.to_vec();
        trial[i] = 1;
        let plus = max_abs_prefix(values, &trial);
        trial[i] = -1;
        let minus = max_abs_prefix(values, &trial);
        let sign = match plus.cmp(&minus) {
            std::cmp::Ordering::Less => 1,
            std::cmp::Ordering::Greater => -1,
            std::cmp::Ordering::Equal => {
                let want = if prefix_before(values, colors, i) < 0 { 1 } else { -1 };
                want * sign_of(values[i])
            }
        };
        Ok(Some((i, sign)))
    }
}

fn policy_move<P: MakerPolicy>(policy: &P, state: &GameState) -> Result<Move> {
    Ok(match policy.choose(&state.scaled.ints, &state.colors)? {
        Some((index, sign)) => Move::Color { index, sign },
        None => Move::Wait,
    })
}

impl Strategy for PairingMaker {
    fn next_move(&mut self, state: &GameState) -> Result<Move> {
        policy_move(self, state)
    }
}

impl Strategy for GreedyMaker {
    fn next_move(&mut self, state: &GameState) -> Result<Move> {
        policy_move(self, state)
    }
}
