//! Block construction that turns a prefix coloring of repeated vectors into
//! unit vectors with small prefix norms, and tools to verify it.

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::prefix::SignedVectorSequence;
use crate::rational::{one, rat, zero, Rat};
use crate::rng::{stream_rng, Stream};

/// Each coordinate i of the base sequence becomes a block of r
/// coordinates `i*r .. i*r + r`; vector j becomes r vectors, the ℓ-th
/// carrying v_i at coordinate `i*r + ℓ`. Block vectors are ordered
/// `j*r + ℓ`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockInstance {
    pub base: SignedVectorSequence,
    pub r: usize,
    pub vectors: Vec<Vec<Rat>>,
}

impl BlockInstance {
    pub fn dim(&self) -> usize {
        self.base.m * self.r
    }
}

pub fn build_block_instance(seq: &SignedVectorSequence, r: usize) -> Result<BlockInstance> {
    if r == 0 {
        return Err(Error::InvalidArgument("block size must be positive".into()));
    }
    let m = seq.m;
    let mut vectors = Vec::with_capacity(seq.n() * r);
    for v in &seq.vectors {
        for l in 0..r {
            let mut b = vec![zero(); m * r];
            for i in 0..m {
                b[i * r + l] = v[i].clone();
            }
            vectors.push(b);
        }
    }
    Ok(BlockInstance { base: seq.clone(), r, vectors })
}

/// Smallest r with r + 2√(r·x) + 2x ≤ (1+δ)²·r for x = ln(2nrm), the
/// chi-square tail bound that makes each block's Gaussian measure at
/// least 1 - 1/(2nrm).
pub fn choose_r(delta: f64, n: usize, m: usize) -> Result<usize> {
    if delta.partial_cmp(&0.0) != Some(std::cmp::Ordering::Greater) {
        return Err(Error::InvalidArgument("delta must be positive".into()));
    }
    let lhs_ok = |r: usize| {
        let rf = r as f64;
        let x = (2.0 * (n * m * r) as f64).ln();
        rf + 2.0 * (rf * x).sqrt() + 2.0 * x <= (1.0 + delta).powi(2) * rf
    };
    let mut r = 1;
    while !lhs_ok(r) {
        r += 1;
    }
    Ok(r)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KMembership {
    pub inside: bool,
    /// Sum of squares of each block.
    pub block_sq: Vec<Rat>,
}

/// Membership in the body where every block's squared norm is at most
/// (1+δ)²·r.
pub fn in_body_k(point: &[Rat], r: usize, m: usize, delta: &Rat) -> Result<KMembership> {
    if point.len() != r * m {
        return Err(Error::Dimension { expected: r * m, got: point.len() });
    }
    let cap = body_cap(r, delta);
    let block_sq: Vec<Rat> = point.chunks(r.max(1)).map(|b| b.iter().map(|x| x * x).sum()).collect();
    Ok(KMembership { inside: block_sq.iter().all(|s| *s <= cap), block_sq })
}

fn body_cap(r: usize, delta: &Rat) -> Rat {
    let s = one() + delta;
    &s * &s * rat(r as i64)
}

/// Unit vectors w_j with entries ±1/√r, stored as the sign matrix.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SdpSolution {
    pub r: usize,
    pub w: Vec<Vec<i8>>,
}

impl SdpSolution {
    /// Squared norm of w_j: Σ_ℓ (±1)²/r.
    pub fn norm_sq(&self, j: usize) -> Rat {
        Rat::new(self.w[j].iter().map(|&s| i64::from(s * s)).sum::<i64>().into(), (self.r as i64).into())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("solution serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let s: SdpSolution = serde_json::from_str(text).map_err(|e| Error::Format(e.to_string()))?;
        if s.w.iter().any(|row| row.len() != s.r || row.iter().any(|&e| e != 1 && e != -1)) {
            return Err(Error::Format("each w_j needs r entries in {-1, 1}".into()));
        }
        Ok(s)
    }
}

/// Groups block-vector signs ε_(j,ℓ) into w_j = (ε_(j,1), …, ε_(j,r))/√r.
pub fn signs_to_sdp_vectors(signs: &[i8], r: usize) -> Result<SdpSolution> {
    if r == 0 || !signs.len().is_multiple_of(r) {
        return Err(Error::InvalidArgument(format!("{} signs do not fill blocks of {r}", signs.len())));
    }
    if let Some(pos) = signs.iter().position(|&s| s != 1 && s != -1) {
        return Err(Error::Uncolored(pos));
    }
    Ok(SdpSolution { r, w: signs.chunks(r).map(<[i8]>::to_vec).collect() })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SdpReport {
    /// max over rows i and prefixes k of ‖Σ_{j≤k} v_i^(j) w_j‖².
    pub value_sq: Rat,
    pub row: usize,
    /// Prefix length (1-based) attaining the maximum.
    pub prefix: usize,
}

/// Largest squared prefix norm of the vector-weighted sums.
pub fn sdp_prefix_discrepancy(seq: &SignedVectorSequence, w: &SdpSolution) -> Result<SdpReport> {
    if w.w.len() != seq.n() {
        return Err(Error::Dimension { expected: seq.n(), got: w.w.len() });
    }
    let r = w.r;
    let mut sums = vec![vec![zero(); r]; seq.m];
    let mut best = SdpReport { value_sq: zero(), row: 0, prefix: 0 };
    for (j, v) in seq.vectors.iter().enumerate() {
        if w.w[j].len() != r {
            return Err(Error::Dimension { expected: r, got: w.w[j].len() });
        }
        for i in 0..seq.m {
            for l in 0..r {
                sums[i][l] += &v[i] * rat(w.w[j][l].into());
            }
            let sq = sums[i].iter().map(|x| x * x).sum::<Rat>() / rat(r as i64);
            if sq > best.value_sq {
                best = SdpReport { value_sq: sq, row: i, prefix: j + 1 };
            }
        }
    }
    Ok(best)
}

/// Point Σ ε·v over the first `count` block vectors.
pub fn block_prefix_point(block: &BlockInstance, signs: &[i8], count: usize) -> Vec<Rat> {
    let mut p = vec![zero(); block.dim()];
    for (v, &s) in block.vectors.iter().zip(signs).take(count) {
        for (x, e) in p.iter_mut().zip(v) {
            *x += e * rat(s.into());
        }
    }
    p
}

/// Searches signs for the block vectors, in order, such that every prefix
/// sum stays in K. Returns the first solution found with + tried before -.
pub fn color_block_in_k(block: &BlockInstance, delta: &Rat, limit: usize) -> Result<Option<Vec<i8>>> {
    let total = block.vectors.len();
    if total > limit {
        return Err(Error::LimitExceeded { n: total, limit });
    }
    let cap = body_cap(block.r, delta);
    let r = block.r;
    let m = block.base.m;
    let mut point = vec![zero(); block.dim()];
    let mut signs = Vec::with_capacity(total);

    fn rec(
        block: &BlockInstance,
        cap: &Rat,
        r: usize,
        m: usize,
        point: &mut Vec<Rat>,
        signs: &mut Vec<i8>,
    ) -> bool {
        let idx = signs.len();
        if idx == block.vectors.len() {
            return true;
        }
        for s in [1i8, -1] {
            let sr = rat(s.into());
            for (x, e) in point.iter_mut().zip(&block.vectors[idx]) {
                *x += e * &sr;
            }
            let ok = (0..m).all(|i| point[i * r..(i + 1) * r].iter().map(|x| x * x).sum::<Rat>() <= *cap);
            if ok {
                signs.push(s);
                if rec(block, cap, r, m, point, signs) {
                    return true;
                }
                signs.pop();
            }
            for (x, e) in point.iter_mut().zip(&block.vectors[idx]) {
                *x -= e * &sr;
            }
        }
        false
    }

    Ok(rec(block, &cap, r, m, &mut point, &mut signs).then_some(signs))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct McEstimate {
    pub samples: u64,
    pub exceed: u64,
    /// Fraction of samples with squared norm above (1+δ)²·r.
    pub fraction: f64,
    /// 1/(2nrm).
    pub target: f64,
    /// Three binomial standard deviations at the target.
    pub slack: f64,
}

pub const MC_SHARDS: u64 = 16;
pub const MC_MIN_SAMPLES: u64 = 10_000;

/// Monte-Carlo estimate of Pr[‖g‖² > (1+δ)²·r] for standard normal g in
/// R^r. Samples are split over fixed shards, each with its own stream, so
/// the result does not depend on the thread count.
pub fn gaussian_measure_mc(r: usize, delta: f64, n: usize, m: usize, samples: u64, seed: u64) -> Result<McEstimate> {
    if samples < MC_MIN_SAMPLES {
        return Err(Error::InvalidArgument(format!("need at least {MC_MIN_SAMPLES} samples")));
    }
    let threshold = (1.0 + delta).powi(2) * r as f64;
    let exceed: u64 = (0..MC_SHARDS)
        .into_par_iter()
        .map(|shard| {
            let count = samples / MC_SHARDS + u64::from(shard < samples % MC_SHARDS);
            let mut rng = stream_rng(seed, Stream::Indexed(shard));
            (0..count)
                .filter(|_| {
                    let s: f64 = (0..r).map(|_| rng.sample::<f64, _>(StandardNormal).powi(2)).sum();
                    s > threshold
                })
                .count() as u64
        })
        .sum();
    let target = 1.0 / (2 * n * r * m) as f64;
    Ok(McEstimate {
        samples,
        exceed,
        fraction: exceed as f64 / samples as f64,
        target,
        slack: 3.0 * (target * (1.0 - target) / samples as f64).sqrt(),
    })
}
