//! Colorings built from two makers playing against each other, each one
//! running a family of one-dimensional games on subsequences.

use crate::error::{Error, Result};
use crate::rational::{zero, Rat};

use super::{max_abs_prefix, MakerPolicy, PairingMaker, ScaledValues};

struct SubGame {
    members: Vec<usize>,
    scaled: ScaledValues,
    max_seen: i128,
}

impl SubGame {
    fn new(members: Vec<usize>, values: Vec<Rat>) -> Result<Self> {
        Ok(SubGame {
            members,
            scaled: ScaledValues::new(&values)?,
            max_seen: 0,
        })
    }

    fn local_colors(&self, colors: &[i8]) -> Vec<i8> {
        self.members.iter().map(|&j| colors[j]).collect()
    }

    fn maker_move(&self, colors: &[i8], policy: &PairingMaker) -> Result<Option<(usize, i8)>> {
        let local = self.local_colors(colors);
        Ok(policy.choose(&self.scaled.ints, &local)?.map(|(i, s)| (self.members[i], s)))
    }

    fn observe(&mut self, colors: &[i8]) {
        let now = max_abs_prefix(&self.scaled.ints, &self.local_colors(colors));
        self.max_seen = self.max_seen.max(now);
    }

    fn final_value(&self, colors: &[i8]) -> Rat {
        self.scaled.to_rat(max_abs_prefix(&self.scaled.ints, &self.local_colors(colors)))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InterleaveReport {
    pub signs: Vec<i8>,
    /// Largest absolute prefix of each game over the whole run, first
    /// player's games then second player's.
    pub game_max: Vec<Rat>,
    /// Final prefix discrepancy of each game.
    pub game_final: Vec<Rat>,
}

/// Runs two teams of games. The first player answers in its games, the
/// second in its own; each answers the opponent's last element when that
/// element belongs to one of its games that still has free elements, and
/// otherwise plays in its first unfinished game.
fn run(n: usize, mut team_a: Vec<SubGame>, mut team_b: Vec<SubGame>) -> Result<InterleaveReport> {
    let policy = PairingMaker::relaxed();
    let mut colors = vec![0i8; n];
    let mut owner_a = vec![None; n];
    let mut owner_b = vec![None; n];
    for (g, game) in team_a.iter().enumerate() {
        for &j in &game.members {
            owner_a[j] = Some(g);
        }
    }
    for (g, game) in team_b.iter().enumerate() {
        for &j in &game.members {
            owner_b[j] = Some(g);
        }
    }
    // Elements in no game at all (zero vectors) are fixed to +1.
    for j in 0..n {
        if owner_a[j].is_none() && owner_b[j].is_none() {
            colors[j] = 1;
        }
    }
    let mut last: Option<usize> = None;
    let mut passes = 0;
    let mut first_turn = true;
    while colors.contains(&0) {
        let (games, owner) = if first_turn {
            (&mut team_a, &owner_a)
        } else {
            (&mut team_b, &owner_b)
        };
        let mut mv = None;
        if let Some(g) = last.and_then(|e| owner[e]) {
            mv = games[g].maker_move(&colors, &policy)?;
        }
        if mv.is_none() {
            for game in games.iter() {
                mv = game.maker_move(&colors, &policy)?;
                if mv.is_some() {
                    break;
                }
            }
        }
        match mv {
            Some((j, s)) => {
                if colors[j] != 0 {
                    return Err(Error::IllegalMove(format!("maker recolored index {j}")));
                }
                colors[j] = s;
                last = Some(j);
                passes = 0;
                if let Some(g) = owner_a[j] {
                    team_a[g].observe(&colors);
                }
                if let Some(g) = owner_b[j] {
                    team_b[g].observe(&colors);
                }
            }
            None => {
                last = None;
                passes += 1;
                if passes >= 2 {
                    return Err(Error::Invariant("both players passed with free elements left".into()));
                }
            }
        }
        first_turn = !first_turn;
    }
    let all: Vec<&SubGame> = team_a.iter().chain(team_b.iter()).collect();
    Ok(InterleaveReport {
        game_max: all.iter().map(|g| g.scaled.to_rat(g.max_seen)).collect(),
        game_final: all.iter().map(|g| g.final_value(&colors)).collect(),
        signs: colors,
    })
}

/// Colors vectors with at most two nonzero coordinates. Each vector's first
/// nonzero coordinate feeds a game of the first player, its second nonzero
/// coordinate a game of the second player.
pub fn interleaved_two_sparse(m: usize, vectors: &[Vec<Rat>]) -> Result<InterleaveReport> {
    let mut first: Vec<(Vec<usize>, Vec<Rat>)> = vec![(vec![], vec![]); m];
    let mut second: Vec<(Vec<usize>, Vec<Rat>)> = vec![(vec![], vec![]); m];
    for (j, v) in vectors.iter().enumerate() {
        if v.len() != m {
            return Err(Error::Dimension { expected: m, got: v.len() });
        }
        let nz: Vec<usize> = (0..m).filter(|&d| v[d] != zero()).collect();
        if nz.len() > 2 {
            return Err(Error::Precondition(format!("vector {j} has {} nonzero entries", nz.len())));
        }
        if let Some(&d) = nz.first() {
            first[d].0.push(j);
            first[d].1.push(v[d].clone());
        }
        if let Some(&d) = nz.get(1) {
            second[d].0.push(j);
            second[d].1.push(v[d].clone());
        }
    }
    let build = |parts: Vec<(Vec<usize>, Vec<Rat>)>| -> Result<Vec<SubGame>> {
        parts.into_iter().map(|(mem, vals)| SubGame::new(mem, vals)).collect()
    };
    run(vectors.len(), build(first)?, build(second)?)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TwoPermutationResult {
    pub signs: Vec<i8>,
    /// Prefix discrepancy in the identity order.
    pub identity: Rat,
    /// Prefix discrepancy in the order given by sigma.
    pub permuted: Rat,
}

/// Colors values so that prefixes in both the identity order and the order
/// `sigma` (sigma[t] is the element at position t) stay small.
pub fn color_two_permutation(values: &[Rat], sigma: &[usize]) -> Result<TwoPermutationResult> {
    let n = values.len();
    let mut seen = vec![false; n];
    if sigma.len() != n || sigma.iter().any(|&s| s >= n || std::mem::replace(&mut seen[s], true)) {
        return Err(Error::InvalidArgument("sigma is not a permutation".into()));
    }
    let nonzero = |j: &usize| values[*j] != zero();
    let ident: Vec<usize> = (0..n).filter(nonzero).collect();
    let perm: Vec<usize> = sigma.iter().copied().filter(nonzero).collect();
    let vals = |idx: &[usize]| idx.iter().map(|&j| values[j].clone()).collect::<Vec<_>>();
    let a = SubGame::new(ident.clone(), vals(&ident))?;
    let b = SubGame::new(perm.clone(), vals(&perm))?;
    let report = run(n, vec![a], vec![b])?;
    Ok(TwoPermutationResult {
        identity: report.game_final[0].clone(),
        permuted: report.game_final[1].clone(),
        signs: report.signs,
    })
}
