use num_traits::{Signed, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{evaluate_total_flow_srpt, Job, MachineAssignment, ScheduleMetrics, SchedulingInstance};
use crate::prefix::{Colorer, Mode};
use crate::rational::{ceil_log2, one, pow2, rat, ratio, zero, Rat};

use super::{
    auxiliary_coeff, build_time_indexed_lp, class_of, default_horizon, is_dyadic_multiple, job_order, machine_classes,
    measure_alpha, normalize_consistent_order, require_integral, units, TimeIndexedSolution,
};

/// Moves every per-(i, j) total to a multiple of p_ij/2^level. For each job
/// the off-grid machines are rounded up or down with exactly as many ups as
/// keep the job complete, choosing the cheapest such set under the
/// auxiliary objective. Increases go to the earliest slot already used on
/// that machine; decreases scale all slots of the pair down.
pub fn quantize_dyadic_time(inst: &SchedulingInstance, y: &TimeIndexedSolution, level: u32) -> Result<TimeIndexedSolution> {
    y.check(inst)?;
    let g = pow2(-(level as i64));
    let mut out = y.clone();
    for j in 0..inst.n() {
        struct Off {
            i: usize,
            frac: Rat,
            up_minus_down: Rat,
        }
        let mut off = Vec::new();
        let mut frac_sum = zero();
        for i in 0..inst.m {
            let Some(p) = inst.p(i, j) else { continue };
            let u = units(inst, y, i, j);
            if is_dyadic_multiple(&u, level) {
                continue;
            }
            let frac = &u - (&u / &g).floor() * &g;
            let first = y.earliest(i, j).expect("positive total has a slot");
            let up = (&g - &frac) * p * auxiliary_coeff(inst, i, j, first);
            let total = y.total(i, j);
            let avg: Rat = y.slots(i, j).map(|(t, v)| auxiliary_coeff(inst, i, j, t) * v).sum::<Rat>() / &total;
            let down = -(&frac * p * avg);
            frac_sum += &frac;
            off.push(Off { i, frac, up_minus_down: up - down });
        }
        let ups = &frac_sum / &g;
        if !ups.is_integer() {
            return Err(Error::Invariant(format!("job {j} fractional parts do not sum to the grid")));
        }
        let ups: usize = ups.to_integer().try_into().expect("small count");
        off.sort_by(|a, b| a.up_minus_down.cmp(&b.up_minus_down).then(a.i.cmp(&b.i)));
        for (rank, o) in off.iter().enumerate() {
            let p = inst.p(o.i, j).unwrap();
            if rank < ups {
                let first = y.earliest(o.i, j).unwrap();
                out.add(o.i, j, first, (&g - &o.frac) * p);
            } else {
                let u = units(inst, y, o.i, j);
                let factor = (&u - &o.frac) / &u;
                for (t, v) in y.slots(o.i, j) {
                    out.add(o.i, j, t, v * &factor - v);
                }
            }
        }
    }
    out.horizon = y.horizon;
    Ok(out)
}

/// Copy c of job j in the split instance has index `j * copies + c`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SplitBackMap {
    pub copies: usize,
    pub job_of: Vec<usize>,
}

impl SplitBackMap {
    /// Sums the copies of each job back into one solution.
    pub fn merge(&self, y: &TimeIndexedSolution) -> TimeIndexedSolution {
        let mut out = TimeIndexedSolution::new(y.horizon);
        for (&(i, c, t), v) in &y.y {
            out.add(i, self.job_of[c], t, v.clone());
        }
        out.horizon = y.horizon;
        out
    }

    /// Cuts each job's volume on machine i into chunks of p_ij/2^h in slot
    /// order, lists chunks by machine, and gives consecutive chunk pairs to
    /// the copies. Needs totals that are multiples of p_ij/2^h.
    pub fn split(&self, inst: &SchedulingInstance, y: &TimeIndexedSolution) -> Result<TimeIndexedSolution> {
        let chunks_per_job = 2 * self.copies;
        let mut out = TimeIndexedSolution::new(y.horizon);
        for j in 0..inst.n() {
            let mut chunks: Vec<(usize, Vec<(usize, Rat)>)> = Vec::new();
            for i in 0..inst.m {
                let Some(p) = inst.p(i, j) else { continue };
                let size = p / rat(chunks_per_job as i64);
                let mut cur: Vec<(usize, Rat)> = Vec::new();
                let mut filled = zero();
                for (t, v) in y.slots(i, j) {
                    let mut left = v.clone();
                    while left.is_positive() {
                        let take = std::cmp::min(left.clone(), &size - &filled);
                        cur.push((t, take.clone()));
                        filled += &take;
                        left -= &take;
                        if filled == size {
                            chunks.push((i, std::mem::take(&mut cur)));
                            filled = zero();
                        }
                    }
                }
                if !cur.is_empty() {
                    return Err(Error::Precondition(format!("job {j} on machine {i} is not a multiple of 1/{chunks_per_job}")));
                }
            }
            if chunks.len() != chunks_per_job {
                return Err(Error::Precondition(format!("job {j} has {} chunks", chunks.len())));
            }
            for (idx, (i, parts)) in chunks.into_iter().enumerate() {
                let copy = j * self.copies + idx / 2;
                for (t, v) in parts {
                    out.add(i, copy, t, v);
                }
            }
        }
        out.horizon = y.horizon;
        Ok(out)
    }
}

/// Replaces each job by 2^(h-1) copies with processing times p/2^(h-1)
/// and the same release.
pub fn split_jobs_instance(inst: &SchedulingInstance, h: u32) -> Result<(SchedulingInstance, SplitBackMap)> {
    if h == 0 {
        return Err(Error::InvalidArgument("split level must be at least 1".into()));
    }
    let copies = 1usize << (h - 1);
    let scale = pow2(-(h as i64 - 1));
    let mut jobs = Vec::with_capacity(inst.n() * copies);
    let mut job_of = Vec::with_capacity(inst.n() * copies);
    for (j, job) in inst.jobs.iter().enumerate() {
        let proc: Vec<Option<Rat>> = job.proc.iter().map(|p| p.as_ref().map(|p| p * &scale)).collect();
        for _ in 0..copies {
            jobs.push(Job::new(job.release.clone(), proc.clone()));
            job_of.push(j);
        }
    }
    Ok((SchedulingInstance::new(inst.m, jobs), SplitBackMap { copies, job_of }))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HalfRoundingTf {
    /// Integral solution: each job whole in one slot.
    pub y: TimeIndexedSolution,
    /// Prefix discrepancy of the chosen signs.
    pub d: Rat,
    /// Coordinates (machine, class) of the vectors.
    pub coords: Vec<(usize, i64)>,
    /// Jobs split over two machines, in job order, one vector each.
    pub split_jobs: Vec<usize>,
    pub vectors: Vec<Vec<Rat>>,
    pub signs: Vec<i8>,
    /// The negated coloring was cheaper.
    pub flipped: bool,
    pub cost_plus: Rat,
    pub cost_minus: Rat,
    /// Auxiliary cost of moving every (i, j) total of the normalized input
    /// to its earliest slot.
    pub cost_compact: Rat,
}

/// Rounds a solution whose per-(i, j) totals are 0, p_ij/2 or p_ij to an
/// integral one by coloring one vector per split job.
pub fn round_half_integral_totalflow(inst: &SchedulingInstance, y: &TimeIndexedSolution, colorer: &Colorer) -> Result<HalfRoundingTf> {
    y.check(inst)?;
    let halves = ratio(1, 2);
    let mut home: Vec<Vec<usize>> = vec![Vec::new(); inst.n()];
    for j in 0..inst.n() {
        for i in 0..inst.m {
            if inst.p(i, j).is_none() {
                continue;
            }
            let u = units(inst, y, i, j);
            if u == one() || u == halves {
                home[j].push(i);
            } else if !u.is_zero() {
                return Err(Error::Precondition(format!("job {j} has share {u} on machine {i}")));
            }
        }
    }
    let ybar = normalize_consistent_order(inst, y)?;
    let coords: Vec<(usize, i64)> =
        machine_classes(inst).into_iter().enumerate().flat_map(|(i, ks)| ks.into_iter().map(move |k| (i, k))).collect();
    let entry = |i: usize, j: usize| -> (usize, Rat) {
        let p = inst.p(i, j).unwrap();
        let k = class_of(p);
        let pos = coords.iter().position(|&c| c == (i, k)).expect("class present");
        (pos, p / pow2(k + 1))
    };
    let split_jobs: Vec<usize> = job_order(inst).into_iter().filter(|&j| home[j].len() == 2).collect();
    let vectors: Vec<Vec<Rat>> = split_jobs
        .iter()
        .map(|&j| {
            let mut v = vec![zero(); coords.len()];
            let (a, va) = entry(home[j][0], j);
            let (b, vb) = entry(home[j][1], j);
            v[a] = va;
            v[b] = -vb;
            v
        })
        .collect();
    let (signs, d) = if vectors.is_empty() {
        (Vec::new(), zero())
    } else {
        let c = colorer.color(coords.len(), &vectors, Mode::Prefix)?;
        (c.signs, c.value)
    };
    let mut sign_of = vec![0i8; inst.n()];
    for (&j, &s) in split_jobs.iter().zip(&signs) {
        sign_of[j] = s;
    }
    let build = |mult: i8| -> TimeIndexedSolution {
        let mut out = TimeIndexedSolution::new(y.horizon);
        for j in 0..inst.n() {
            let i = match home[j].as_slice() {
                [i] => *i,
                [a, b] => {
                    if sign_of[j] * mult > 0 {
                        *a
                    } else {
                        *b
                    }
                }
                _ => unreachable!("validated above"),
            };
            let t = ybar.earliest(i, j).expect("machine carries volume");
            out.add(i, j, t, inst.p(i, j).unwrap().clone());
        }
        out.horizon = y.horizon;
        out
    };
    let plus = build(1);
    let minus = build(-1);
    let cost_plus = plus.cost_auxiliary(inst);
    let cost_minus = minus.cost_auxiliary(inst);
    let mut compact = TimeIndexedSolution::new(y.horizon);
    for j in 0..inst.n() {
        for &i in &home[j] {
            compact.add(i, j, ybar.earliest(i, j).unwrap(), ybar.total(i, j));
        }
    }
    let flipped = cost_minus < cost_plus;
    Ok(HalfRoundingTf {
        y: if flipped { minus } else { plus },
        d,
        coords,
        split_jobs,
        vectors,
        signs,
        flipped,
        cost_plus,
        cost_minus,
        cost_compact: compact.cost_auxiliary(inst),
    })
}

/// One rounding level, alphas in units of the original instance.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LevelTf {
    pub h: u32,
    pub d: Rat,
    pub vectors: usize,
    pub flipped: bool,
    pub alpha_in: Rat,
    pub alpha_out: Rat,
    /// alpha_in + (4D + 4)/2^(h-1).
    pub alpha_bound: Rat,
    pub aux_cost: Rat,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TotalflowTrace {
    pub horizon: usize,
    /// Optimum of the time-indexed LP.
    pub lp_cost: Rat,
    /// Auxiliary cost of the LP optimum.
    pub aux_cost_lp: Rat,
    pub ell: u32,
    pub alpha_quantized: Rat,
    pub aux_cost_quantized: Rat,
    pub levels: Vec<LevelTf>,
    pub alpha_final: Rat,
    /// alpha_quantized + Σ_h (4·D_h + 4)/2^(h-1).
    pub alpha_bound: Rat,
    pub aux_cost_final: Rat,
    pub total_flow: Rat,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScheduleReport {
    pub total_flow: Rat,
    /// Time-indexed objective of the integral solution.
    pub lp_cost: Rat,
    pub aux_cost: Rat,
    pub alpha: Rat,
    /// ⌈log₂ P⌉ for the ratio P of largest to smallest processing time.
    pub log_p: i64,
    /// total_flow / lp_cost.
    pub ratio: Rat,
}

/// Reads the machine assignment off an integral solution and schedules
/// each machine by preemptive SRPT.
pub fn schedule_from_integral(
    inst: &SchedulingInstance,
    y: &TimeIndexedSolution,
) -> Result<(MachineAssignment, ScheduleMetrics, ScheduleReport)> {
    let place = y.integral_placement(inst).ok_or_else(|| Error::NonIntegral("solution is not integral".into()))?;
    let asg = MachineAssignment::new(place.iter().map(|&(i, _)| i).collect());
    let metrics = evaluate_total_flow_srpt(inst, &asg)?;
    let lp_cost = y.cost_time_indexed(inst);
    let report = ScheduleReport {
        total_flow: metrics.total_flow.clone(),
        ratio: if lp_cost.is_zero() { zero() } else { &metrics.total_flow / &lp_cost },
        lp_cost,
        aux_cost: y.cost_auxiliary(inst),
        alpha: measure_alpha(inst, y).alpha,
        log_p: inst.p_ratio().map_or(0, |p| ceil_log2(&p)),
    };
    Ok((asg, metrics, report))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TotalflowResult {
    pub y: TimeIndexedSolution,
    pub assignment: MachineAssignment,
    pub metrics: ScheduleMetrics,
    pub report: ScheduleReport,
    pub trace: TotalflowTrace,
}

#[derive(Serialize)]
struct AlphaLevelJson {
    h: u32,
    #[serde(rename = "D", with = "crate::rational::serde_rat")]
    d: Rat,
    #[serde(with = "crate::rational::serde_rat")]
    alpha: Rat,
}

#[derive(Serialize)]
struct ResultJson<'a> {
    #[serde(with = "crate::rational::serde_rat")]
    lp_cost: Rat,
    alpha_levels: Vec<AlphaLevelJson>,
    #[serde(with = "crate::rational::serde_rat")]
    total_flow: Rat,
    assignment: &'a [usize],
}

impl TotalflowResult {
    pub fn to_json(&self) -> String {
        let out = ResultJson {
            lp_cost: self.trace.lp_cost.clone(),
            alpha_levels: self
                .trace
                .levels
                .iter()
                .map(|l| AlphaLevelJson { h: l.h, d: l.d.clone(), alpha: l.alpha_out.clone() })
                .collect(),
            total_flow: self.trace.total_flow.clone(),
            assignment: &self.assignment.assign,
        };
        serde_json::to_string_pretty(&out).expect("result serializes")
    }
}

/// Solves the time-indexed LP, quantizes to multiples of p_ij/2^ℓ with
/// ℓ = max(1, ⌈log₂ n⌉), then for h = ℓ..1 splits jobs into 2^(h-1) copies
/// and rounds the resulting half-integral solution.
pub fn full_round_totalflow(inst: &SchedulingInstance, colorer: &Colorer) -> Result<TotalflowResult> {
    require_integral(inst)?;
    let horizon = default_horizon(inst);
    let (lp_cost, ystar) = build_time_indexed_lp(inst, horizon)?.solve()?;
    let ell = ceil_log2(&rat(inst.n().max(1) as i64)).max(1) as u32;
    let mut cur = quantize_dyadic_time(inst, &ystar, ell)?;
    let alpha_quantized = measure_alpha(inst, &cur).alpha;
    let aux_cost_quantized = cur.cost_auxiliary(inst);
    let mut alpha_bound = alpha_quantized.clone();
    let mut levels = Vec::new();
    for h in (1..=ell).rev() {
        let alpha_in = measure_alpha(inst, &cur).alpha;
        let (split_inst, back) = split_jobs_instance(inst, h)?;
        let ys = back.split(inst, &cur)?;
        let r = round_half_integral_totalflow(&split_inst, &ys, colorer)?;
        cur = back.merge(&r.y);
        let step = (rat(4) * &r.d + rat(4)) * pow2(-(h as i64 - 1));
        alpha_bound += &step;
        levels.push(LevelTf {
            h,
            vectors: r.vectors.len(),
            flipped: r.flipped,
            alpha_out: measure_alpha(inst, &cur).alpha,
            alpha_bound: &alpha_in + &step,
            alpha_in,
            aux_cost: cur.cost_auxiliary(inst),
            d: r.d,
        });
    }
    let (assignment, metrics, report) = schedule_from_integral(inst, &cur)?;
    let trace = TotalflowTrace {
        horizon,
        lp_cost,
        aux_cost_lp: ystar.cost_auxiliary(inst),
        ell,
        alpha_quantized,
        aux_cost_quantized,
        levels,
        alpha_final: report.alpha.clone(),
        alpha_bound,
        aux_cost_final: report.aux_cost.clone(),
        total_flow: metrics.total_flow.clone(),
    };
    Ok(TotalflowResult { y: cur, assignment, metrics, report, trace })
}
