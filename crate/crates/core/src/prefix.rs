//! Prefix and interval discrepancy of signed vector sequences, and colorers
//! that choose the signs.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use num_traits::{Signed, Zero};
use rand::seq::index::sample;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game::{interleaved_two_sparse, ScaledValues};
use crate::rational::{abs, one, rat, ratio, zero, Rat};
use crate::rng::{stream_rng, Stream};

pub const DEFAULT_BRUTE_FORCE_LIMIT: usize = 20;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SignedVectorSequence {
    pub m: usize,
    #[serde(with = "crate::rational::serde_rat_matrix")]
    pub vectors: Vec<Vec<Rat>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub signs: Option<Vec<i8>>,
}

impl SignedVectorSequence {
    pub fn new(m: usize, vectors: Vec<Vec<Rat>>) -> Result<Self> {
        let seq = SignedVectorSequence { m, vectors, signs: None };
        seq.check_dims()?;
        Ok(seq)
    }

    pub fn with_signs(mut self, signs: Vec<i8>) -> Result<Self> {
        if signs.len() != self.n() {
            return Err(Error::Dimension { expected: self.n(), got: signs.len() });
        }
        if let Some(s) = signs.iter().find(|&&s| !(-1..=1).contains(&s)) {
            return Err(Error::InvalidArgument(format!("sign {s} not in {{-1, 0, 1}}")));
        }
        self.signs = Some(signs);
        Ok(self)
    }

    pub fn n(&self) -> usize {
        self.vectors.len()
    }

    fn check_dims(&self) -> Result<()> {
        match self.vectors.iter().find(|v| v.len() != self.m) {
            Some(v) => Err(Error::Dimension { expected: self.m, got: v.len() }),
            None => Ok(()),
        }
    }

    /// Checks that every vector has ℓ1 norm at most 1.
    pub fn check_beck_fiala(&self) -> Result<()> {
        for (j, v) in self.vectors.iter().enumerate() {
            let norm: Rat = v.iter().map(abs).sum();
            if norm > one() {
                return Err(Error::Precondition(format!("vector {j} has l1 norm {norm} > 1")));
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("sequence serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let seq: SignedVectorSequence = serde_json::from_str(text).map_err(|e| Error::Format(e.to_string()))?;
        seq.check_dims()?;
        if let Some(signs) = &seq.signs {
            seq.clone().with_signs(signs.clone())?;
        }
        Ok(seq)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Prefix,
    Interval,
    OneSidedInterval,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Prefix => "prefix",
            Mode::Interval => "interval",
            Mode::OneSidedInterval => "one_sided_interval",
        })
    }
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "prefix" => Ok(Mode::Prefix),
            "interval" => Ok(Mode::Interval),
            "one_sided_interval" | "one-sided" | "one_sided" => Ok(Mode::OneSidedInterval),
            _ => Err(Error::InvalidArgument(format!("unknown mode {s}"))),
        }
    }
}

/// Coordinate and inclusive element range attaining the value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Witness {
    pub coordinate: usize,
    pub start: usize,
    pub end: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DiscrepancyReport {
    pub mode: Mode,
    pub value: Rat,
    /// None for an empty sequence.
    pub witness: Option<Witness>,
}

/// Sum of ε_j v_j[coordinate] over start..=end.
pub fn interval_sum(vectors: &[Vec<Rat>], signs: &[i8], w: &Witness) -> Rat {
    (w.start..=w.end).map(|j| &vectors[j][w.coordinate] * rat(signs[j] as i64)).sum()
}

/// Value a witness certifies under `mode`.
pub fn witness_value(vectors: &[Vec<Rat>], signs: &[i8], mode: Mode, w: &Witness) -> Rat {
    let s = interval_sum(vectors, signs, w);
    match mode {
        Mode::OneSidedInterval => s,
        _ => s.abs(),
    }
}

pub fn discrepancy(seq: &SignedVectorSequence, mode: Mode) -> Result<DiscrepancyReport> {
    let signs = seq.signs.as_ref().ok_or(Error::Uncolored(0))?;
    discrepancy_of(seq.m, &seq.vectors, signs, mode)
}

pub fn discrepancy_of(m: usize, vectors: &[Vec<Rat>], signs: &[i8], mode: Mode) -> Result<DiscrepancyReport> {
    if signs.len() != vectors.len() {
        return Err(Error::Dimension { expected: vectors.len(), got: signs.len() });
    }
    if let Some(j) = signs.iter().position(|&s| s != 1 && s != -1) {
        return Err(Error::Uncolored(j));
    }
    let n = vectors.len();
    let mut best: Option<(Rat, Witness)> = None;
    let mut offer = |value: Rat, w: Witness| {
        if best.as_ref().is_none_or(|(b, _)| value > *b) {
            best = Some((value, w));
        }
    };
    for c in 0..m {
        let mut s = zero();
        // Smallest and largest earlier prefix with the element count realizing them.
        let (mut lo, mut lo_at) = (zero(), 0usize);
        let (mut hi, mut hi_at) = (zero(), 0usize);
        for j in 0..n {
            s += &vectors[j][c] * rat(signs[j] as i64);
            let here = |start: usize| Witness { coordinate: c, start, end: j };
            match mode {
                Mode::Prefix => offer(s.abs(), here(0)),
                Mode::Interval => {
                    offer(&s - &lo, here(lo_at));
                    offer(&hi - &s, here(hi_at));
                }
                Mode::OneSidedInterval => offer(&s - &lo, here(lo_at)),
            }
            if s < lo {
                lo = s.clone();
                lo_at = j + 1;
            }
            if s > hi {
                hi = s.clone();
                hi_at = j + 1;
            }
        }
    }
    let (value, witness) = match best {
        Some((v, w)) => (v, Some(w)),
        None => (zero(), None),
    };
    Ok(DiscrepancyReport { mode, value, witness })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Coloring {
    pub signs: Vec<i8>,
    pub mode: Mode,
    pub value: Rat,
}

fn scale_vectors(m: usize, vectors: &[Vec<Rat>]) -> Result<(Vec<Vec<i128>>, ScaledValues)> {
    let flat: Vec<Rat> = vectors.iter().flatten().cloned().collect();
    let scaled = ScaledValues::new(&flat)?;
    let rows = scaled.ints.chunks(m.max(1)).map(|c| c.to_vec()).collect();
    Ok((if m == 0 { vec![vec![]; vectors.len()] } else { rows }, scaled))
}

#[derive(Clone)]
struct Partial {
    s: Vec<i128>,
    lo: Vec<i128>,
    hi: Vec<i128>,
    value: i128,
}

impl Partial {
    fn new(m: usize) -> Self {
        Partial {
            s: vec![0; m],
            lo: vec![0; m],
            hi: vec![0; m],
            value: i128::MIN,
        }
    }

    fn push(&self, v: &[i128], sign: i8, mode: Mode) -> Partial {
        let mut next = self.clone();
        for c in 0..v.len() {
            let s = self.s[c] + i128::from(sign) * v[c];
            let val = match mode {
                Mode::Prefix => s.abs(),
                Mode::Interval => (s - self.lo[c]).max(self.hi[c] - s),
                Mode::OneSidedInterval => s - self.lo[c],
            };
            next.value = next.value.max(val);
            next.s[c] = s;
            next.lo[c] = self.lo[c].min(s);
            next.hi[c] = self.hi[c].max(s);
        }
        if v.is_empty() {
            next.value = next.value.max(0);
        }
        next
    }
}

struct BruteForce<'a> {
    rows: &'a [Vec<i128>],
    mode: Mode,
    bound: i128,
    found: Option<Vec<i8>>,
    signs: Vec<i8>,
}

impl BruteForce<'_> {
    fn dfs(&mut self, state: &Partial) {
        let k = self.signs.len();
        if k == self.rows.len() {
            let v = if k == 0 { 0 } else { state.value };
            if v < self.bound || (self.found.is_none() && v <= self.bound) {
                self.bound = v;
                self.found = Some(self.signs.clone());
            }
            return;
        }
        let symmetric = self.mode != Mode::OneSidedInterval;
        let choices: &[i8] = if k == 0 && symmetric { &[1] } else { &[1, -1] };
        for &sign in choices {
            let next = state.push(&self.rows[k], sign, self.mode);
            if next.value > self.bound || (self.found.is_some() && next.value >= self.bound) {
                continue;
            }
            self.signs.push(sign);
            self.dfs(&next);
            self.signs.pop();
        }
    }
}

/// Exhaustive search for the lexicographically least optimal sign pattern
/// (+1 before −1). In the symmetric modes the first sign is fixed to +1.
pub fn color_brute_force(seq: &SignedVectorSequence, mode: Mode, limit: usize) -> Result<Coloring> {
    if seq.n() > limit {
        return Err(Error::LimitExceeded { n: seq.n(), limit });
    }
    let (rows, scaled) = scale_vectors(seq.m, &seq.vectors)?;
    // Any pattern gives a starting bound; the greedy one is usually close.
    let greedy = color_greedy(seq)?;
    let start = discrepancy_of(seq.m, &seq.vectors, &greedy.signs, mode)?.value;
    let bound = (start * Rat::from_integer(scaled.scale.into()))
        .to_integer()
        .try_into()
        .map_err(|_| Error::InvalidArgument("values too large".into()))?;
    let mut search = BruteForce {
        rows: &rows,
        mode,
        bound,
        found: None,
        signs: Vec::with_capacity(seq.n()),
    };
    search.dfs(&Partial::new(seq.m));
    let signs = search.found.ok_or_else(|| Error::Invariant("brute force found no pattern".into()))?;
    Ok(Coloring {
        signs,
        mode,
        value: scaled.to_rat(search.bound),
    })
}

/// Picks each sign in turn to minimize the max-norm of the running prefix;
/// ties go to +1.
pub fn color_greedy(seq: &SignedVectorSequence) -> Result<Coloring> {
    let mut s = vec![zero(); seq.m];
    let mut signs = Vec::with_capacity(seq.n());
    let mut value = zero();
    for v in &seq.vectors {
        let norm_with = |sign: i64| -> Rat {
            s.iter().zip(v).map(|(a, b)| (a + b * rat(sign)).abs()).max().unwrap_or_else(zero)
        };
        let (plus, minus) = (norm_with(1), norm_with(-1));
        let (sign, norm) = if minus < plus { (-1i8, minus) } else { (1i8, plus) };
        for (a, b) in s.iter_mut().zip(v) {
            *a += b * rat(sign as i64);
        }
        value = value.max(norm);
        signs.push(sign);
    }
    Ok(Coloring {
        signs,
        mode: Mode::Prefix,
        value,
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FloatingTrace {
    /// Most coefficients strictly inside (−1, 1) after any insertion step.
    pub max_fractional: usize,
    pub kernel_moves: usize,
}

/// Row-reduces `cols` (given as columns) and returns a kernel basis, one
/// vector per free column.
fn kernel_basis(rows: usize, cols: &[Vec<Rat>]) -> Vec<Vec<Rat>> {
    let c = cols.len();
    let mut a: Vec<Vec<Rat>> = (0..rows).map(|r| cols.iter().map(|col| col[r].clone()).collect()).collect();
    let mut pivots: Vec<usize> = Vec::new();
    let mut row = 0;
    for col in 0..c {
        if row == rows {
            break;
        }
        let Some(p) = (row..rows).find(|&r| !a[r][col].is_zero()) else {
            continue;
        };
        a.swap(row, p);
        let inv = one() / &a[row][col];
        for x in a[row].iter_mut() {
            *x *= &inv;
        }
        for r in 0..rows {
            if r != row && !a[r][col].is_zero() {
                let f = a[r][col].clone();
                for k in 0..c {
                    let delta = &f * &a[row][k];
                    a[r][k] -= delta;
                }
            }
        }
        pivots.push(col);
        row += 1;
    }
    (0..c)
        .filter(|f| !pivots.contains(f))
        .map(|f| {
            let mut d = vec![zero(); c];
            d[f] = one();
            for (r, &p) in pivots.iter().enumerate() {
                d[p] = -a[r][f].clone();
            }
            d
        })
        .collect()
}

fn lex_cmp(a: &[Rat], b: &[Rat]) -> Ordering {
    a.iter().zip(b).map(|(x, y)| x.cmp(y)).find(|o| o.is_ne()).unwrap_or(Ordering::Equal)
}

/// Floating-coefficient colorer. Each new vector enters with coefficient 0;
/// while more than m coefficients are fractional, the fractional ones move
/// along a kernel direction of their vectors until one reaches ±1.
pub fn color_floating(seq: &SignedVectorSequence) -> Result<(Coloring, FloatingTrace)> {
    seq.check_beck_fiala()?;
    let m = seq.m;
    let mut x: Vec<Rat> = Vec::with_capacity(seq.n());
    let mut frac: Vec<usize> = Vec::new();
    let mut trace = FloatingTrace {
        max_fractional: 0,
        kernel_moves: 0,
    };
    for j in 0..seq.n() {
        x.push(zero());
        frac.push(j);
        while frac.len() > m {
            let cols: Vec<Vec<Rat>> = frac.iter().map(|&i| seq.vectors[i].clone()).collect();
            let basis = kernel_basis(m, &cols);
            let d = basis
                .into_iter()
                .min_by(|a, b| lex_cmp(a, b))
                .ok_or_else(|| Error::Invariant("empty kernel".into()))?;
            let step = frac
                .iter()
                .zip(&d)
                .filter(|(_, dk)| !dk.is_zero())
                .map(|(&i, dk)| {
                    let target = if dk.is_positive() { one() } else { -one() };
                    (target - &x[i]) / dk
                })
                .min()
                .ok_or_else(|| Error::Invariant("zero kernel direction".into()))?;
            for (&i, dk) in frac.iter().zip(&d) {
                x[i] += &step * dk;
            }
            frac.retain(|&i| abs(&x[i]) < one());
            trace.kernel_moves += 1;
        }
        trace.max_fractional = trace.max_fractional.max(frac.len());
    }
    let signs: Vec<i8> = x.iter().map(|v| if v.is_negative() { -1 } else { 1 }).collect();
    let value = discrepancy_of(m, &seq.vectors, &signs, Mode::Prefix)?.value;
    Ok((
        Coloring {
            signs,
            mode: Mode::Prefix,
            value,
        },
        trace,
    ))
}

/// Colors 2-sparse vectors with entries in {−1, 0, +1} by two interleaved
/// families of pairing games.
pub fn color_two_sparse_paired(seq: &SignedVectorSequence) -> Result<Coloring> {
    for (j, v) in seq.vectors.iter().enumerate() {
        if let Some(x) = v.iter().find(|x| !x.is_zero() && abs(x) != one()) {
            return Err(Error::Precondition(format!("vector {j} has entry {x} outside {{-1, 0, 1}}")));
        }
    }
    let report = interleaved_two_sparse(seq.m, &seq.vectors)?;
    let value = discrepancy_of(seq.m, &seq.vectors, &report.signs, Mode::Prefix)?.value;
    Ok(Coloring {
        signs: report.signs,
        mode: Mode::Prefix,
        value,
    })
}

/// A coloring algorithm the rounding pipelines can be run with.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Colorer {
    BruteForce { limit: usize },
    Greedy,
    Floating,
    TwoSparsePaired,
}

impl Colorer {
    /// Signs for `vectors` and their discrepancy under `mode`.
    pub fn color(&self, m: usize, vectors: &[Vec<Rat>], mode: Mode) -> Result<Coloring> {
        let seq = SignedVectorSequence::new(m, vectors.to_vec())?;
        let signs = match self {
            Colorer::BruteForce { limit } => return color_brute_force(&seq, mode, *limit),
            Colorer::Greedy => color_greedy(&seq)?.signs,
            Colorer::Floating => color_floating(&seq)?.0.signs,
            Colorer::TwoSparsePaired => color_two_sparse_paired(&seq)?.signs,
        };
        let value = discrepancy_of(m, vectors, &signs, mode)?.value;
        Ok(Coloring { signs, mode, value })
    }
}

impl Default for Colorer {
    fn default() -> Self {
        Colorer::BruteForce {
            limit: DEFAULT_BRUTE_FORCE_LIMIT,
        }
    }
}

impl fmt::Display for Colorer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Colorer::BruteForce { .. } => "brute",
            Colorer::Greedy => "greedy",
            Colorer::Floating => "floating",
            Colorer::TwoSparsePaired => "paired",
        })
    }
}

impl FromStr for Colorer {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "brute" | "brute_force" => Ok(Colorer::default()),
            "greedy" => Ok(Colorer::Greedy),
            "floating" => Ok(Colorer::Floating),
            "paired" | "two_sparse" => Ok(Colorer::TwoSparsePaired),
            _ => Err(Error::InvalidArgument(format!("unknown colorer {s}"))),
        }
    }
}

/// Families of random vector sequences.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VectorKind {
    /// One to three nonzero entries, ℓ1 norm in {1/2, 3/4, 1}.
    BeckFiala,
    /// Two coordinates with entries drawn from {-1, 0, 1}.
    TwoSparseUnit,
    /// p1 at one coordinate and -p2 at another, p1, p2 in {0, 1/8, …, 1/2}.
    Vm,
}

impl fmt::Display for VectorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            VectorKind::BeckFiala => "beck-fiala",
            VectorKind::TwoSparseUnit => "two-sparse",
            VectorKind::Vm => "vm",
        })
    }
}

impl FromStr for VectorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "beck-fiala" => Ok(VectorKind::BeckFiala),
            "two-sparse" => Ok(VectorKind::TwoSparseUnit),
            "vm" => Ok(VectorKind::Vm),
            _ => Err(Error::InvalidArgument(format!("unknown vector kind {s}"))),
        }
    }
}

/// Random sequence of `n` vectors in R^m, deterministic in `seed`.
pub fn gen_random_vectors(m: usize, n: usize, kind: VectorKind, seed: u64) -> Result<SignedVectorSequence> {
    let need = if kind == VectorKind::BeckFiala { 1 } else { 2 };
    if m < need {
        return Err(Error::InvalidArgument(format!("{kind} vectors need m >= {need}")));
    }
    let mut rng = stream_rng(seed, Stream::Vectors);
    let mut vectors = Vec::with_capacity(n);
    for _ in 0..n {
        let mut v = vec![zero(); m];
        match kind {
            VectorKind::BeckFiala => {
                let s = rng.random_range(1..=m.min(3));
                let coords = sample(&mut rng, m, s);
                let weights: Vec<i64> = (0..s).map(|_| rng.random_range(1..=4)).collect();
                let total: i64 = weights.iter().sum();
                let norm = ratio(rng.random_range(2..=4), 4);
                for (c, w) in coords.iter().zip(weights) {
                    let sign = if rng.random_bool(0.5) { 1 } else { -1 };
                    v[c] = &norm * ratio(sign * w, total);
                }
            }
            VectorKind::TwoSparseUnit => {
                for c in sample(&mut rng, m, 2) {
                    v[c] = rat(rng.random_range(-1..=1));
                }
            }
            VectorKind::Vm => {
                let coords = sample(&mut rng, m, 2).into_vec();
                v[coords[0]] = ratio(rng.random_range(0..=4), 8);
                v[coords[1]] = ratio(-rng.random_range(0..=4), 8);
            }
        }
        vectors.push(v);
    }
    SignedVectorSequence::new(m, vectors)
}
