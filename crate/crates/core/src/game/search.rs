use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::rational::Rat;

use super::{max_abs_prefix, MakerPolicy, Player, ScaledValues};

pub const DEFAULT_SEARCH_LIMIT: usize = 12;

#[derive(Debug, Clone, Copy)]
pub struct SearchConfig {
    pub starter: Player,
    pub breaker_may_wait: bool,
    pub limit: usize,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            starter: Player::Breaker,
            breaker_may_wait: false,
            limit: DEFAULT_SEARCH_LIMIT,
        }
    }
}

struct Search<'a> {
    values: &'a [i128],
    maker: &'a dyn MakerPolicy,
    may_wait: bool,
    memo: HashMap<(u64, bool), i128>,
}

impl Search<'_> {
    fn key(colors: &[i8]) -> u64 {
        colors.iter().fold(0u64, |acc, &c| acc * 3 + (c + 1) as u64)
    }

    fn value(&mut self, colors: &mut Vec<i8>, maker_to_move: bool) -> Result<i128> {
        let now = max_abs_prefix(self.values, colors);
        if colors.iter().all(|&c| c != 0) {
            return Ok(now);
        }
        let key = (Self::key(colors), maker_to_move);
        if let Some(&v) = self.memo.get(&key) {
            return Ok(v);
        }
        let mut best = now;
        if maker_to_move {
            if let Some((i, s)) = self.maker.choose(self.values, colors)? {
                if colors[i] != 0 {
                    return Err(Error::IllegalMove(format!("maker recolored index {i}")));
                }
                colors[i] = s;
                best = best.max(self.value(colors, false)?);
                colors[i] = 0;
            }
        } else {
            for i in 0..colors.len() {
                if colors[i] != 0 {
                    continue;
                }
                for s in [1, -1] {
                    colors[i] = s;
                    best = best.max(self.value(colors, true)?);
                }
                colors[i] = 0;
            }
            if self.may_wait {
                best = best.max(self.value(colors, true)?);
            }
        }
        self.memo.insert(key, best);
        Ok(best)
    }
}

/// Best payoff (largest absolute prefix at any time) the breaker can force
/// against a fixed maker policy, by full game-tree search.
pub fn exhaustive_breaker_value(values: &[Rat], maker: &dyn MakerPolicy, config: SearchConfig) -> Result<Rat> {
    let limit = config.limit;
    if values.len() > limit {
        return Err(Error::LimitExceeded { n: values.len(), limit });
    }
    let scaled = ScaledValues::new(values)?;
    let mut search = Search {
        values: &scaled.ints,
        maker,
        may_wait: config.breaker_may_wait,
        memo: HashMap::new(),
    };
    let mut colors = vec![0i8; values.len()];
    let v = search.value(&mut colors, config.starter == Player::Maker)?;
    Ok(scaled.to_rat(v))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::{GreedyMaker, PairingMaker};
    use crate::rational::{rat, ratio};

    fn cfg(starter: Player, wait: bool) -> SearchConfig {
        SearchConfig {
            starter,
            breaker_may_wait: wait,
            limit: DEFAULT_SEARCH_LIMIT,
        }
    }

    #[test]
    fn single_element() {
        let v = exhaustive_breaker_value(&[ratio(-2, 3)], &PairingMaker::relaxed(), cfg(Player::Breaker, false)).unwrap();
        assert_eq!(v, ratio(2, 3));
    }

    #[test]
    fn greedy_on_two_ones() {
        let v = exhaustive_breaker_value(&[rat(1), rat(1)], &GreedyMaker, cfg(Player::Breaker, false)).unwrap();
        assert_eq!(v, rat(1));
    }

    #[test]
    fn pairing_bound_small() {
        for n in 1..=8 {
            for starter in [Player::Maker, Player::Breaker] {
                for wait in [false, true] {
                    let v = exhaustive_breaker_value(&vec![rat(1); n], &PairingMaker::strict(), cfg(starter, wait)).unwrap();
                    assert!(v <= rat(4), "n={n} value {v}");
                }
            }
        }
    }

    #[test]
    fn size_limit() {
        let err = exhaustive_breaker_value(&vec![rat(1); 13], &GreedyMaker, SearchConfig::default()).unwrap_err();
        assert!(matches!(err, Error::LimitExceeded { .. }));
    }
}
