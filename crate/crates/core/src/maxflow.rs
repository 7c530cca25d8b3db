//! Maximum flow time: the assignment LP, its exact optimum, reduction to
//! half-integral solutions and discrepancy rounding.

use std::collections::BTreeSet;

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lp::{solve_lp, LinearProgram, LpStatus, Relation, VarId};
use crate::model::{ensure_valid, evaluate_max_flow, Job, MachineAssignment, SchedulingInstance};
use crate::prefix::{discrepancy_of, Colorer, Mode};
use crate::rational::{ceil_log2, format_rat, is_integer, is_multiple_of, lcm_denominators, one, pow2, rat, ratio, zero, Rat};

/// Fractional assignment `x[j][i]` of job j to machine i, feasible for flow
/// bound `t`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FractionalAssignment {
    #[serde(with = "crate::rational::serde_rat_matrix")]
    pub x: Vec<Vec<Rat>>,
    #[serde(rename = "T", with = "crate::rational::serde_rat")]
    pub t: Rat,
}

impl FractionalAssignment {
    pub fn from_assignment(inst: &SchedulingInstance, asg: &MachineAssignment) -> Self {
        let x: Vec<Vec<Rat>> = asg
            .assign
            .iter()
            .map(|&a| (0..inst.m).map(|i| if i == a { one() } else { zero() }).collect())
            .collect();
        let t = lp_value(inst, &x).unwrap_or_else(|_| zero());
        FractionalAssignment { x, t }
    }

    /// The integral assignment, if every row is a unit vector.
    pub fn to_assignment(&self) -> Option<MachineAssignment> {
        self.x
            .iter()
            .map(|row| {
                let one = one();
                let pos = row.iter().position(|v| *v == one)?;
                row.iter().all(|v| v.is_zero() || *v == one).then_some(pos)
            })
            .collect::<Option<Vec<_>>>()
            .map(MachineAssignment::new)
    }
}

fn distinct_releases(inst: &SchedulingInstance) -> Vec<Rat> {
    inst.jobs.iter().map(|j| j.release.clone()).collect::<BTreeSet<_>>().into_iter().collect()
}

fn allowed(p: Option<&Rat>, t: &Rat) -> bool {
    p.is_some_and(|p| p <= t)
}

struct AssignmentLp {
    lp: LinearProgram,
    vars: Vec<Vec<Option<VarId>>>,
    t_var: Option<VarId>,
}

/// `t_fixed = Some(T)`: feasibility LP for that T. `None`: T is a variable
/// to minimize, with jobs restricted to machines with p ≤ `cap`.
fn assignment_lp(inst: &SchedulingInstance, t_fixed: Option<&Rat>, cap: &Rat) -> AssignmentLp {
    let mut lp = LinearProgram::new();
    let n = inst.n();
    let mut vars = vec![vec![None; inst.m]; n];
    for (j, row) in vars.iter_mut().enumerate() {
        for (i, slot) in row.iter_mut().enumerate() {
            if allowed(inst.p(i, j), cap) {
                *slot = Some(lp.add_var(format!("x_{i}_{j}")));
            }
        }
    }
    let t_var = t_fixed.is_none().then(|| {
        let t = lp.add_var("T");
        lp.set_objective(t, one());
        t
    });
    for (j, row) in vars.iter().enumerate() {
        let coeffs = row.iter().flatten().map(|&v| (v, one())).collect();
        lp.add_constraint(format!("assign_{j}"), coeffs, Relation::Eq, one());
    }
    let releases = distinct_releases(inst);
    for i in 0..inst.m {
        for (a, t1) in releases.iter().enumerate() {
            for t2 in &releases[a..] {
                let mut coeffs: Vec<(VarId, Rat)> = (0..n)
                    .filter(|&j| inst.release(j) >= t1 && inst.release(j) <= t2)
                    .filter_map(|j| vars[j][i].map(|v| (v, inst.p(i, j).unwrap().clone())))
                    .collect();
                if coeffs.is_empty() {
                    continue;
                }
                let mut rhs = t2 - t1;
                match (&t_var, t_fixed) {
                    (Some(t), _) => coeffs.push((*t, -one())),
                    (None, Some(t)) => rhs += t,
                    (None, None) => unreachable!(),
                }
                lp.add_constraint(format!("interval_{i}_{t1}_{t2}"), coeffs, Relation::Le, rhs);
            }
        }
    }
    AssignmentLp { lp, vars, t_var }
}

/// The assignment LP for flow bound `t`, one variable per (job, machine)
/// pair with p_ij ≤ t; other pairs are fixed to zero by omission.
pub fn build_assignment_lp(inst: &SchedulingInstance, t: &Rat) -> Result<LinearProgram> {
    if !t.is_positive() {
        return Err(Error::InvalidArgument("T must be positive".into()));
    }
    Ok(assignment_lp(inst, Some(t), t).lp)
}

fn extract(inst: &SchedulingInstance, alp: &AssignmentLp, values: &[Rat]) -> Vec<Vec<Rat>> {
    (0..inst.n())
        .map(|j| (0..inst.m).map(|i| alp.vars[j][i].map_or_else(zero, |v| values[v.0].clone())).collect())
        .collect()
}

/// Solves the feasibility LP at `t`.
pub fn solve_assignment_lp(inst: &SchedulingInstance, t: &Rat) -> Result<Option<Vec<Vec<Rat>>>> {
    let alp = assignment_lp(inst, Some(t), t);
    let sol = solve_lp(&alp.lp)?;
    Ok(match sol.status {
        LpStatus::Optimal => Some(extract(inst, &alp, &sol.values)),
        _ => None,
    })
}

/// Smallest T for which `x` satisfies the assignment LP: the largest
/// interval excess or processing time on its support.
pub fn lp_value(inst: &SchedulingInstance, x: &[Vec<Rat>]) -> Result<Rat> {
    if x.len() != inst.n() {
        return Err(Error::Dimension { expected: inst.n(), got: x.len() });
    }
    let mut value = zero();
    for (j, row) in x.iter().enumerate() {
        if row.len() != inst.m {
            return Err(Error::Dimension { expected: inst.m, got: row.len() });
        }
        if row.iter().sum::<Rat>() != one() || row.iter().any(|v| v.is_negative()) {
            return Err(Error::InvalidArgument(format!("row {j} is not a distribution")));
        }
        for (i, v) in row.iter().enumerate() {
            if v.is_positive() {
                match inst.p(i, j) {
                    Some(p) => value = value.max(p.clone()),
                    None => return Err(Error::ForbiddenAssignment { job: j, machine: i }),
                }
            }
        }
    }
    let releases = distinct_releases(inst);
    for i in 0..inst.m {
        // Load released at each distinct release time.
        let load: Vec<Rat> = releases
            .iter()
            .map(|r| {
                (0..inst.n())
                    .filter(|&j| inst.release(j) == r && x[j][i].is_positive())
                    .map(|j| &x[j][i] * inst.p(i, j).unwrap())
                    .sum()
            })
            .collect();
        for a in 0..releases.len() {
            let mut acc = zero();
            for b in a..releases.len() {
                acc += &load[b];
                let excess = &acc - (&releases[b] - &releases[a]);
                if excess > value {
                    value = excess;
                }
            }
        }
    }
    Ok(value)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MinTResult {
    pub t_star: Rat,
    pub fa: FractionalAssignment,
    /// Largest value certified infeasible: T* − δ with δ = 1/(n·lcm).
    pub infeasible_below: Rat,
}

/// Exact optimum of the assignment LP over T.
///
/// The feasible set grows with T, and between consecutive distinct
/// processing times the allowed (job, machine) pairs are fixed, so the
/// optimum is found by a search over those thresholds followed by one LP
/// with T as a variable.
pub fn solve_min_t(inst: &SchedulingInstance) -> Result<MinTResult> {
    ensure_valid(inst)?;
    if inst.n() == 0 {
        return Err(Error::InvalidInstance("no jobs".into()));
    }
    let thetas: Vec<Rat> = inst.jobs.iter().flat_map(|j| j.proc.iter().flatten().cloned()).collect::<BTreeSet<_>>().into_iter().collect();
    let feasible = |t: &Rat| -> Result<bool> { Ok(solve_assignment_lp(inst, t)?.is_some()) };
    let (mut lo, mut hi) = (0usize, thetas.len() - 1);
    if !feasible(&thetas[hi])? {
        // With every pair allowed the LP is feasible for T large enough.
        hi = thetas.len();
    }
    while lo < hi {
        let mid = (lo + hi) / 2;
        if feasible(&thetas[mid])? {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    let k0 = lo;
    let min_t_with_cap = |cap: &Rat| -> Result<Option<Rat>> {
        let alp = assignment_lp(inst, None, cap);
        let sol = solve_lp(&alp.lp)?;
        Ok(match sol.status {
            LpStatus::Optimal => Some(sol.value(alp.t_var.unwrap()).clone()),
            LpStatus::Infeasible => None,
            LpStatus::Unbounded => return Err(Error::Unbounded),
        })
    };
    let t_star = if k0 == thetas.len() {
        min_t_with_cap(thetas.last().unwrap())?.ok_or(Error::Infeasible)?
    } else {
        let below = if k0 == 0 { None } else { min_t_with_cap(&thetas[k0 - 1])? };
        match below {
            Some(t) if t < thetas[k0] => t,
            _ => thetas[k0].clone(),
        }
    };
    let x = solve_assignment_lp(inst, &t_star)?.ok_or_else(|| Error::Invariant("LP infeasible at its optimum".into()))?;
    let mut all: Vec<Rat> = inst.jobs.iter().flat_map(|j| j.proc.iter().flatten().cloned()).collect();
    all.extend(inst.jobs.iter().map(|j| j.release.clone()));
    all.push(t_star.clone());
    let delta = Rat::new(1.into(), lcm_denominators(&all) * num_bigint::BigInt::from(inst.n()));
    let below = &t_star - &delta;
    if below.is_positive() && feasible(&below)? {
        return Err(Error::Invariant(format!("LP feasible below its optimum {}", format_rat(&t_star))));
    }
    Ok(MinTResult {
        fa: FractionalAssignment { x, t: t_star.clone() },
        t_star,
        infeasible_below: below,
    })
}

/// Rounds every variable to a multiple of 1/2^ℓ by pairwise transfers
/// inside each row. Each step moves mass between the first two off-grid
/// variables in the direction needing the smaller transfer; no variable
/// ever leaves the grid cell it started in.
pub fn quantize_dyadic(inst: &SchedulingInstance, fa: &FractionalAssignment, ell: u32) -> Result<FractionalAssignment> {
    let step = pow2(-(ell as i64));
    let mut x = fa.x.clone();
    for row in x.iter_mut() {
        loop {
            let off: Vec<usize> = (0..row.len()).filter(|&i| !is_multiple_of(&row[i], &step)).collect();
            if off.is_empty() {
                break;
            }
            if off.len() < 2 {
                return Err(Error::InvalidArgument("row sum is not a multiple of the grid".into()));
            }
            let (a, b) = (off[0], off[1]);
            let floor = |v: &Rat| (v / &step).floor() * &step;
            let up = |v: &Rat| &floor(v) + &step - v;
            let down = |v: &Rat| v - floor(v);
            let d1 = up(&row[a]).min(down(&row[b]));
            let d2 = down(&row[a]).min(up(&row[b]));
            if d1 <= d2 {
                row[a] += &d1;
                row[b] -= &d1;
            } else {
                row[a] -= &d2;
                row[b] += &d2;
            }
        }
    }
    let t = lp_value(inst, &x)?;
    Ok(FractionalAssignment { x, t })
}

/// Maps a job of the pair instance back to its original job and machines.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PairBackMap {
    pub job: Vec<usize>,
    pub pair: Vec<(usize, usize)>,
    pub level: u32,
}

impl PairBackMap {
    /// Merges an assignment of the pair instance into x with entries that
    /// are multiples of 1/2^(h−1).
    pub fn merge(&self, n: usize, m: usize, asg: &MachineAssignment) -> Vec<Vec<Rat>> {
        let w = pow2(-(self.level as i64 - 1));
        let mut x = vec![vec![zero(); m]; n];
        for (k, &j) in self.job.iter().enumerate() {
            x[j][asg.assign[k]] += &w;
        }
        x
    }

    /// Half of each pair to each member: the image of the half-integral
    /// pair solution.
    pub fn half_solution(&self, n: usize, m: usize) -> Vec<Vec<Rat>> {
        let w = pow2(-(self.level as i64));
        let mut x = vec![vec![zero(); m]; n];
        for (k, &j) in self.job.iter().enumerate() {
            let (a, b) = self.pair[k];
            x[j][a] += &w;
            x[j][b] += &w;
        }
        x
    }
}

/// Builds the instance with one job per (job, machine pair), where every
/// machine appears in 2^h·x_ij pairs of job j, and its half-integral
/// solution.
pub fn split_to_pair_instance(
    inst: &SchedulingInstance,
    fa: &FractionalAssignment,
    h: u32,
) -> Result<(SchedulingInstance, PairBackMap, FractionalAssignment)> {
    if h == 0 {
        return Err(Error::InvalidArgument("level must be at least 1".into()));
    }
    let scale = pow2(h as i64);
    let shrink = pow2(-(h as i64 - 1));
    let mut jobs = Vec::new();
    let mut back = PairBackMap {
        job: vec![],
        pair: vec![],
        level: h,
    };
    let mut x = Vec::new();
    for (j, row) in fa.x.iter().enumerate() {
        let mut slots = Vec::new();
        for (i, v) in row.iter().enumerate() {
            let count = v * &scale;
            if !is_integer(&count) {
                return Err(Error::NonIntegral(format!("x[{j}][{i}] = {v} is not a multiple of 1/2^{h}")));
            }
            let count: usize = count.to_integer().try_into().map_err(|_| Error::InvalidArgument("negative x".into()))?;
            slots.extend(std::iter::repeat_n(i, count));
        }
        if slots.len() != 1 << h {
            return Err(Error::InvalidArgument(format!("row {j} does not sum to 1")));
        }
        for pair in slots.chunks(2) {
            let (a, b) = (pair[0], pair[1]);
            let mut proc = vec![None; inst.m];
            for i in [a, b] {
                let p = inst.p(i, j).ok_or(Error::ForbiddenAssignment { job: j, machine: i })?;
                proc[i] = Some(p * &shrink);
            }
            jobs.push(Job::new(inst.release(j).clone(), proc));
            let mut xr = vec![zero(); inst.m];
            xr[a] += ratio(1, 2);
            xr[b] += ratio(1, 2);
            x.push(xr);
            back.job.push(j);
            back.pair.push((a, b));
        }
    }
    let split = SchedulingInstance::new(inst.m, jobs);
    let t = lp_value(&split, &x)?;
    Ok((split, back, FractionalAssignment { x, t }))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HalfRounding {
    pub assignment: MachineAssignment,
    /// Prefix discrepancy of the coloring used (zero without split jobs).
    pub d: Rat,
    /// Split jobs in the order their vectors were colored.
    pub split_jobs: Vec<usize>,
    pub vectors: Vec<Vec<Rat>>,
    pub signs: Vec<i8>,
}

/// The two machines of a half-split row, or the machine of an integral row.
fn half_row(row: &[Rat], j: usize) -> Result<std::result::Result<usize, (usize, usize)>> {
    let half = ratio(1, 2);
    let ones: Vec<usize> = (0..row.len()).filter(|&i| row[i].is_one()).collect();
    let halves: Vec<usize> = (0..row.len()).filter(|&i| row[i] == half).collect();
    let rest = row.iter().filter(|v| !v.is_zero() && !v.is_one() && **v != half).count();
    match (ones.as_slice(), halves.as_slice(), rest) {
        ([i], [], 0) => Ok(Ok(*i)),
        ([], [a, b], 0) => Ok(Err((*a, *b))),
        _ => Err(Error::NonIntegral(format!("row {j} is not half-integral"))),
    }
}

/// Rounds a half-integral solution: each split job gets the vector with
/// p/(2·p_max) on its lower machine and −p/(2·p_max) on the other; the
/// vectors are colored in release order and +1 picks the lower machine.
pub fn round_half_integral_maxflow(inst: &SchedulingInstance, fa: &FractionalAssignment, colorer: &Colorer) -> Result<HalfRounding> {
    let p_max = inst.p_max();
    let mut assign = vec![0usize; inst.n()];
    let mut split = Vec::new();
    for (j, row) in fa.x.iter().enumerate() {
        match half_row(row, j)? {
            Ok(i) => assign[j] = i,
            Err(pair) => split.push((j, pair)),
        }
    }
    split.sort_by(|a, b| inst.release(a.0).cmp(inst.release(b.0)).then(a.0.cmp(&b.0)));
    let mut vectors = Vec::with_capacity(split.len());
    for &(j, (a, b)) in &split {
        let pa = inst.p(a, j).ok_or(Error::ForbiddenAssignment { job: j, machine: a })?;
        let pb = inst.p(b, j).ok_or(Error::ForbiddenAssignment { job: j, machine: b })?;
        let mut v = vec![zero(); inst.m];
        v[a] = pa / (&p_max * rat(2));
        v[b] = -(pb / (&p_max * rat(2)));
        vectors.push(v);
    }
    let coloring = colorer.color(inst.m, &vectors, Mode::Prefix)?;
    for (k, &(j, (a, b))) in split.iter().enumerate() {
        assign[j] = if coloring.signs[k] == 1 { a } else { b };
    }
    let d = if vectors.is_empty() {
        zero()
    } else {
        discrepancy_of(inst.m, &vectors, &coloring.signs, Mode::Prefix)?.value
    };
    Ok(HalfRounding {
        assignment: MachineAssignment::new(assign),
        d,
        split_jobs: split.iter().map(|s| s.0).collect(),
        vectors,
        signs: coloring.signs,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LevelRecord {
    pub h: u32,
    #[serde(rename = "D", with = "crate::rational::serde_rat")]
    pub d: Rat,
    /// Largest processing time in the pair instance.
    #[serde(with = "crate::rational::serde_rat")]
    pub p_max_level: Rat,
    /// Number of split jobs colored at this level.
    pub vectors: usize,
    /// LP value of the merged solution after this level.
    #[serde(with = "crate::rational::serde_rat")]
    pub t_after: Rat,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RoundingTrace {
    pub t_star: Rat,
    pub infeasible_below: Rat,
    pub p_max: Rat,
    pub ell: u32,
    pub t_quantized: Rat,
    pub levels: Vec<LevelRecord>,
    /// T* + p_max + Σ_h 2·D_h·p_max/2^(h−1).
    pub bound: Rat,
    pub final_value: Rat,
    pub max_flow: Rat,
}

impl RoundingTrace {
    pub fn additive_error(&self) -> Rat {
        &self.max_flow - &self.t_star
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MaxflowResult {
    pub assignment: MachineAssignment,
    pub trace: RoundingTrace,
}

#[derive(Serialize)]
struct LevelJson {
    h: u32,
    #[serde(rename = "D", with = "crate::rational::serde_rat")]
    d: Rat,
}

#[derive(Serialize)]
struct ResultJson<'a> {
    #[serde(rename = "T_star", with = "crate::rational::serde_rat")]
    t_star: Rat,
    assignment: &'a [usize],
    levels: Vec<LevelJson>,
    #[serde(with = "crate::rational::serde_rat")]
    max_flow: Rat,
}

impl MaxflowResult {
    pub fn to_json(&self) -> String {
        let out = ResultJson {
            t_star: self.trace.t_star.clone(),
            assignment: &self.assignment.assign,
            levels: self
                .trace
                .levels
                .iter()
                .map(|l| LevelJson { h: l.h, d: l.d.clone() })
                .collect(),
            max_flow: self.trace.max_flow.clone(),
        };
        serde_json::to_string_pretty(&out).expect("result serializes")
    }
}

/// Drops (job, machine) pairs with p_ij > t.
pub fn prune_above(inst: &SchedulingInstance, t: &Rat) -> SchedulingInstance {
    let jobs = inst
        .jobs
        .iter()
        .map(|job| {
            Job::new(
                job.release.clone(),
                job.proc.iter().map(|p| p.clone().filter(|p| p <= t)).collect(),
            )
        })
        .collect();
    SchedulingInstance::new(inst.m, jobs)
}

/// Full pipeline: exact LP optimum, quantization to 1/2^ℓ with
/// ℓ = ⌈log₂ n⌉, then one half-integral rounding per level h = ℓ, …, 1.
pub fn full_round_maxflow(inst: &SchedulingInstance, colorer: &Colorer) -> Result<MaxflowResult> {
    let min = solve_min_t(inst)?;
    let t_star = min.t_star.clone();
    let pruned = prune_above(inst, &t_star);
    let p_max = pruned.p_max();
    if p_max > t_star {
        return Err(Error::Invariant("p_max exceeds T* after pruning".into()));
    }
    let n = inst.n() as i64;
    let ell = if n <= 1 { 0 } else { ceil_log2(&Rat::from_integer(n.into())) as u32 };
    let mut fa = quantize_dyadic(&pruned, &min.fa, ell)?;
    let t_quantized = fa.t.clone();
    if t_quantized > &t_star + &p_max {
        return Err(Error::Invariant("quantization raised T by more than p_max".into()));
    }
    let mut levels = Vec::new();
    let mut bound = &t_star + &p_max;
    for h in (1..=ell).rev() {
        let (split, back, split_fa) = split_to_pair_instance(&pruned, &fa, h)?;
        let rounded = round_half_integral_maxflow(&split, &split_fa, colorer)?;
        let x = back.merge(inst.n(), inst.m, &rounded.assignment);
        let t_after = lp_value(&pruned, &x)?;
        bound += &rounded.d * &p_max * pow2(-(h as i64 - 2));
        levels.push(LevelRecord {
            h,
            d: rounded.d,
            p_max_level: split.p_max(),
            vectors: rounded.vectors.len(),
            t_after: t_after.clone(),
        });
        fa = FractionalAssignment { x, t: t_after };
    }
    let assignment = fa
        .to_assignment()
        .ok_or_else(|| Error::Invariant("rounding ended with a fractional solution".into()))?;
    let final_value = fa.t.clone();
    let max_flow = evaluate_max_flow(inst, &assignment)?.max_flow;
    Ok(MaxflowResult {
        assignment,
        trace: RoundingTrace {
            t_star,
            infeasible_below: min.infeasible_below,
            p_max,
            ell,
            t_quantized,
            levels,
            bound,
            final_value,
            max_flow,
        },
    })
}
