use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::rational::{ratio, Rat};
use crate::rng::{stream_rng, Stream};

use super::{GameState, Move, Player, Strategy};

/// Complete k²-ary tree with k/2 layers, laid out in preorder.
/// A node in layer d has value 1 − d/k.
#[derive(Debug, Clone)]
pub struct HardTree {
    pub k: usize,
    pub layer: Vec<usize>,
    /// 1-based position among its siblings (0 for the root).
    pub rank: Vec<usize>,
    /// One past the last preorder index of the node's subtree.
    pub subtree_end: Vec<usize>,
    pub next_sib: Vec<Option<usize>>,
}

impl HardTree {
    pub fn new(k: usize) -> Result<Self> {
        if k < 2 || !k.is_multiple_of(2) {
            return Err(Error::InvalidArgument(format!("hard instance needs an even k >= 2, got {k}")));
        }
        let depth = k / 2;
        let arity = k * k;
        let mut nodes = 0usize;
        let mut width = 1usize;
        for _ in 0..depth {
            nodes += width;
            width = width.saturating_mul(arity);
            if nodes > 10_000_000 {
                return Err(Error::LimitExceeded { n: nodes, limit: 10_000_000 });
            }
        }
        let mut tree = HardTree {
            k,
            layer: Vec::with_capacity(nodes),
            rank: Vec::with_capacity(nodes),
            subtree_end: Vec::with_capacity(nodes),
            next_sib: Vec::with_capacity(nodes),
        };
        tree.build(0, 0, depth, arity);
        Ok(tree)
    }

    fn build(&mut self, layer: usize, rank: usize, depth: usize, arity: usize) -> usize {
        let me = self.layer.len();
        self.layer.push(layer);
        self.rank.push(rank);
        self.subtree_end.push(0);
        self.next_sib.push(None);
        if layer + 1 < depth {
            let mut prev: Option<usize> = None;
            for r in 1..=arity {
                let child = self.build(layer + 1, r, depth, arity);
                if let Some(p) = prev {
                    self.next_sib[p] = Some(child);
                }
                prev = Some(child);
            }
        }
        self.subtree_end[me] = self.layer.len();
        me
    }

    pub fn len(&self) -> usize {
        self.layer.len()
    }

    pub fn is_empty(&self) -> bool {
        self.layer.is_empty()
    }

    pub fn first_child(&self, i: usize) -> Option<usize> {
        (self.subtree_end[i] > i + 1).then_some(i + 1)
    }

    pub fn values(&self) -> Vec<Rat> {
        self.layer.iter().map(|&d| ratio(1, 1) - ratio(d as i64, self.k as i64)).collect()
    }
}

pub fn breaker_hard_instance(k: usize) -> Result<Vec<Rat>> {
    Ok(HardTree::new(k)?.values())
}

/// The breaker's special indices i_0 < i_1 < ... < i_{ℓ+1}.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BreakerStructure {
    pub idx: Vec<usize>,
    /// Root of the subtree the structure is built in.
    pub root: usize,
}

impl BreakerStructure {
    pub fn ell(&self) -> usize {
        self.idx.len() - 2
    }

    /// Interval values u_0 ... u_ℓ (scaled like the game values).
    pub fn u(&self, values: &[i128], colors: &[i8]) -> Vec<i128> {
        self.idx
            .windows(2)
            .map(|w| (w[0] + 1..w[1]).map(|e| i128::from(colors[e]) * values[e]).sum())
            .collect()
    }

    /// Checks the five structural properties.
    ///
    /// The second property is checked for the gaps after i_1, ..., i_ℓ; the
    /// gap after i_0 can hold larger elements once i_0 has moved to i_1 − 1.
    pub fn check(&self, tree: &HardTree, values: &[i128], scale: i128, colors: &[i8]) -> Result<()> {
        let fail = |p: u8, msg: String| Err(Error::Invariant(format!("breaker property {p}: {msg}")));
        let ell = self.ell();
        let idx = &self.idx;
        if idx.windows(2).any(|w| w[0] >= w[1]) {
            return fail(0, format!("indices not increasing: {idx:?}"));
        }
        for &i in &idx[1..=ell] {
            if colors[i] != 1 {
                return fail(1, format!("index {i} not colored +1"));
            }
        }
        for j in 1..=ell {
            for e in idx[j] + 1..idx[j + 1] {
                if colors[e] == 0 && values[e] >= values[idx[j]] {
                    return fail(2, format!("uncolored {e} not smaller than i_{j} = {}", idx[j]));
                }
            }
        }
        let u = self.u(values, colors);
        if let Some(j) = u.iter().position(|&x| x < 0) {
            return fail(3, format!("u_{j} negative"));
        }
        let last = idx[ell];
        if (last + 1..tree.subtree_end[last]).any(|e| colors[e] != 0) {
            return fail(4, format!("subtree of i_ell = {last} has colored elements"));
        }
        let mut s = tree.next_sib[last];
        while let Some(x) = s {
            if (x..tree.subtree_end[x]).any(|e| colors[e] != 0) {
                return fail(4, format!("subtree of sibling {x} has colored elements"));
            }
            s = tree.next_sib[x];
        }
        let top = idx[ell + 1];
        if tree.layer[top] - tree.layer[self.root] > ell {
            return fail(5, format!("i_(ell+1) = {top} too deep for ell = {ell}"));
        }
        let total: i128 = u.iter().sum();
        let j = tree.rank[top] as i128;
        if total * (tree.k as i128) < (j - 2) * scale {
            return fail(5, format!("u too small for a rank {j} child"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
enum Phase {
    Start,
    Building(BreakerStructure),
    Maintenance { prefix_end: usize },
}

/// The breaker strategy for hard instances.
///
/// Builds the index structure while the tree allows it, then keeps pushing
/// the larger of the two prefixes bounding the structure's interval.
/// Every structure move is followed by a full invariant check.
#[derive(Debug, Clone)]
pub struct TreeBreaker {
    tree: HardTree,
    phase: Phase,
    pub checks: usize,
    pub max_ell: usize,
}

impl TreeBreaker {
    pub fn new(k: usize) -> Result<Self> {
        Ok(TreeBreaker {
            tree: HardTree::new(k)?,
            phase: Phase::Start,
            checks: 0,
            max_ell: 0,
        })
    }

    pub fn structure(&self) -> Option<&BreakerStructure> {
        match &self.phase {
            Phase::Building(s) => Some(s),
            _ => None,
        }
    }

    pub fn in_maintenance(&self) -> bool {
        matches!(self.phase, Phase::Maintenance { .. })
    }

    fn start(&mut self, colors: &[i8]) -> Option<(BreakerStructure, usize)> {
        let tree = &self.tree;
        let free_below = |r: usize| (r + 1..tree.subtree_end[r]).all(|e| colors[e] == 0);
        let mut candidates = vec![0];
        let mut c = tree.first_child(0);
        while let Some(x) = c {
            candidates.push(x);
            c = tree.next_sib[x];
        }
        let root = candidates.into_iter().find(|&r| free_below(r))?;
        let first = tree.first_child(root)?;
        let second = tree.next_sib[first]?;
        Some((BreakerStructure { idx: vec![root, first, second], root }, first))
    }

    fn extend(&self, s: &BreakerStructure, maker: Option<usize>) -> Option<(BreakerStructure, usize)> {
        let tree = &self.tree;
        let ell = s.ell();
        let idx = &s.idx;
        let gap = maker.and_then(|e| (1..=ell).find(|&t| idx[t] < e && e < idx[t + 1]));
        match gap {
            Some(t) => {
                let next = tree.next_sib[idx[ell + 1]]?;
                let mut new = idx.clone();
                new.remove(t);
                new.push(next);
                let color = new[ell];
                Some((BreakerStructure { idx: new, root: s.root }, color))
            }
            None => {
                let child = tree.first_child(idx[ell])?;
                let sib = tree.next_sib[child]?;
                let mut new = Vec::with_capacity(ell + 3);
                new.push(idx[1] - 1);
                new.extend_from_slice(&idx[1..=ell]);
                new.push(child);
                new.push(sib);
                Some((BreakerStructure { idx: new, root: s.root }, child))
            }
        }
    }

    fn maintenance_move(&self, state: &GameState, prefix_end: usize) -> Move {
        let values = &state.scaled.ints;
        let colors = &state.colors;
        let s: i128 = (0..=prefix_end).map(|e| i128::from(colors[e]) * values[e]).sum();
        let want: i8 = if s >= 0 { 1 } else { -1 };
        let mut best: Option<usize> = None;
        for e in 0..=prefix_end {
            if colors[e] == 0 && best.is_none_or(|b| values[e].abs() > values[b].abs()) {
                best = Some(e);
            }
        }
        match best {
            Some(e) => Move::Color {
                index: e,
                sign: if values[e] < 0 { -want } else { want },
            },
            None => match state.uncolored().next() {
                Some(e) => Move::Color { index: e, sign: 1 },
                None => Move::Wait,
            },
        }
    }

    fn enter_maintenance(&mut self, state: &GameState, bounds: Option<(usize, usize)>) -> Move {
        let values = &state.scaled.ints;
        let colors = &state.colors;
        let prefix = |p: usize| -> i128 { (0..=p).map(|e| i128::from(colors[e]) * values[e]).sum() };
        let prefix_end = match bounds {
            Some((a, b)) => {
                if prefix(a).abs() > prefix(b).abs() {
                    a
                } else {
                    b
                }
            }
            None => {
                let mut best = state.n() - 1;
                let mut best_val = prefix(best).abs();
                for p in (0..state.n()).rev() {
                    if prefix(p).abs() > best_val {
                        best = p;
                        best_val = prefix(p).abs();
                    }
                }
                best
            }
        };
        self.phase = Phase::Maintenance { prefix_end };
        self.maintenance_move(state, prefix_end)
    }

    fn commit(&mut self, state: &GameState, s: BreakerStructure, color: usize) -> Result<Move> {
        if state.colors[color] != 0 {
            return Err(Error::Invariant(format!("breaker target {color} already colored")));
        }
        let mut colors = state.colors.clone();
        colors[color] = 1;
        s.check(&self.tree, &state.scaled.ints, state.scaled.scale, &colors)?;
        self.checks += 1;
        self.max_ell = self.max_ell.max(s.ell());
        self.phase = Phase::Building(s);
        Ok(Move::Color { index: color, sign: 1 })
    }
}

impl Strategy for TreeBreaker {
    fn next_move(&mut self, state: &GameState) -> Result<Move> {
        if state.n() != self.tree.len() {
            return Err(Error::Precondition("tree breaker needs the matching hard instance".into()));
        }
        let maker = match state.last_move_of(Player::Maker) {
            Some(Move::Color { index, .. }) => Some(index),
            _ => None,
        };
        match self.phase.clone() {
            Phase::Start => match self.start(&state.colors) {
                Some((s, color)) => self.commit(state, s, color),
                None => Ok(self.enter_maintenance(state, None)),
            },
            Phase::Building(s) => match self.extend(&s, maker) {
                Some((next, color)) => self.commit(state, next, color),
                None => {
                    let ell = s.ell();
                    Ok(self.enter_maintenance(state, Some((s.idx[0], s.idx[ell + 1] - 1))))
                }
            },
            Phase::Maintenance { prefix_end } => Ok(self.maintenance_move(state, prefix_end)),
        }
    }
}

/// Colors a uniformly random free element with a random sign, waiting with
/// probability `wait_prob` when waiting is allowed.
#[derive(Debug, Clone)]
pub struct RandomBreaker {
    rng: ChaCha8Rng,
    wait_prob: f64,
}

impl RandomBreaker {
    pub fn new(seed: u64, wait_prob: f64) -> Self {
        RandomBreaker {
            rng: stream_rng(seed, Stream::Tournament),
            wait_prob,
        }
    }
}

impl Strategy for RandomBreaker {
    fn next_move(&mut self, state: &GameState) -> Result<Move> {
        if state.wait_allowed[1] && self.rng.random_bool(self.wait_prob.clamp(0.0, 1.0)) {
            return Ok(Move::Wait);
        }
        let free: Vec<usize> = state.uncolored().collect();
        if free.is_empty() {
            return Ok(Move::Wait);
        }
        let index = free[self.rng.random_range(0..free.len())];
        let sign = if self.rng.random_bool(0.5) { 1 } else { -1 };
        Ok(Move::Color { index, sign })
    }
}
