//! Total flow time: the time-indexed LP, the class-grouped auxiliary LP with
//! relaxed capacities, consistent ordering and discrepancy rounding.

use std::collections::BTreeMap;

use num_traits::{Signed, ToPrimitive, Zero};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lp::{solve_lp, LinearProgram, LpStatus, Relation, VarId};
use crate::model::{ensure_valid, SchedulingInstance};
use crate::rational::{ceil_log2, format_rat, is_integer, one, pow2, rat, ratio, zero, Rat};
use crate::rng::{stream_rng, Stream};

mod rounding;

pub use rounding::{
    full_round_totalflow, quantize_dyadic_time, round_half_integral_totalflow, schedule_from_integral,
    split_jobs_instance, HalfRoundingTf, LevelTf, ScheduleReport, SplitBackMap, TotalflowResult, TotalflowTrace,
};

/// Volume `y[(i, j, t)]` of job j processed on machine i in slot [t, t+1).
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct TimeIndexedSolution {
    pub horizon: usize,
    #[serde(with = "entries_serde")]
    pub y: BTreeMap<(usize, usize, usize), Rat>,
}

mod entries_serde {
    use super::*;
    use serde::{Deserializer, Serializer};

    #[derive(Serialize, Deserialize)]
    struct Entry {
        i: usize,
        j: usize,
        t: usize,
        #[serde(with = "crate::rational::serde_rat")]
        y: Rat,
    }

    type SlotMap = BTreeMap<(usize, usize, usize), Rat>;

    pub fn serialize<S: Serializer>(map: &SlotMap, s: S) -> std::result::Result<S::Ok, S::Error> {
        let v: Vec<Entry> = map.iter().map(|(&(i, j, t), y)| Entry { i, j, t, y: y.clone() }).collect();
        v.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<SlotMap, D::Error> {
        let v: Vec<Entry> = Vec::deserialize(d)?;
        Ok(v.into_iter().map(|e| ((e.i, e.j, e.t), e.y)).collect())
    }
}

impl TimeIndexedSolution {
    pub fn new(horizon: usize) -> Self {
        TimeIndexedSolution { horizon, y: BTreeMap::new() }
    }

    /// Adds volume, dropping entries that reach zero.
    pub fn add(&mut self, i: usize, j: usize, t: usize, v: Rat) {
        let e = self.y.entry((i, j, t)).or_insert_with(zero);
        *e += v;
        if e.is_zero() {
            self.y.remove(&(i, j, t));
        }
        self.horizon = self.horizon.max(t + 1);
    }

    pub fn get(&self, i: usize, j: usize, t: usize) -> Rat {
        self.y.get(&(i, j, t)).cloned().unwrap_or_else(zero)
    }

    /// Entries of (i, j) in slot order.
    pub fn slots(&self, i: usize, j: usize) -> impl Iterator<Item = (usize, &Rat)> {
        self.y.range((i, j, 0)..=(i, j, usize::MAX)).map(|(&(_, _, t), v)| (t, v))
    }

    pub fn total(&self, i: usize, j: usize) -> Rat {
        self.slots(i, j).map(|(_, v)| v).sum()
    }

    pub fn earliest(&self, i: usize, j: usize) -> Option<usize> {
        self.slots(i, j).next().map(|(t, _)| t)
    }

    /// Checks nonnegativity, releases and the completion equalities.
    pub fn check(&self, inst: &SchedulingInstance) -> Result<()> {
        let n = inst.n();
        let mut done = vec![zero(); n];
        for (&(i, j, t), v) in &self.y {
            if i >= inst.m || j >= n {
                return Err(Error::InvalidArgument(format!("entry ({i}, {j}, {t}) out of range")));
            }
            if v.is_negative() {
                return Err(Error::InvalidArgument(format!("negative volume at ({i}, {j}, {t})")));
            }
            if rat(t as i64) < *inst.release(j) {
                return Err(Error::InvalidArgument(format!("job {j} runs at {t} before its release")));
            }
            let p = inst.p(i, j).ok_or(Error::ForbiddenAssignment { job: j, machine: i })?;
            done[j] += v / p;
        }
        for (j, d) in done.iter().enumerate() {
            if *d != one() {
                return Err(Error::InvalidArgument(format!("job {j} completes {} of its work", format_rat(d))));
            }
        }
        Ok(())
    }

    /// The machine and slot of every job, if each job sits whole in one slot.
    pub fn integral_placement(&self, inst: &SchedulingInstance) -> Option<Vec<(usize, usize)>> {
        let mut place = vec![None; inst.n()];
        for (&(i, j, t), v) in &self.y {
            if place[j].is_some() || inst.p(i, j) != Some(v) {
                return None;
            }
            place[j] = Some((i, t));
        }
        place.into_iter().collect()
    }

    pub fn cost_time_indexed(&self, inst: &SchedulingInstance) -> Rat {
        self.y.iter().map(|(&(i, j, t), v)| time_indexed_coeff(inst, i, j, t) * v).sum()
    }

    pub fn cost_auxiliary(&self, inst: &SchedulingInstance) -> Rat {
        self.y.iter().map(|(&(i, j, t), v)| auxiliary_coeff(inst, i, j, t) * v).sum()
    }
}

/// Class k of a processing time: p lies in (2^(k-1), 2^k].
pub fn class_of(p: &Rat) -> i64 {
    ceil_log2(p)
}

fn half() -> Rat {
    ratio(1, 2)
}

/// (t - r_j)/p_ij + 1/2.
pub fn time_indexed_coeff(inst: &SchedulingInstance, i: usize, j: usize, t: usize) -> Rat {
    let p = inst.p(i, j).expect("finite processing time");
    (rat(t as i64) - inst.release(j)) / p + half()
}

/// (t - r_j)/2^k + 1/2 with k the class of p_ij.
pub fn auxiliary_coeff(inst: &SchedulingInstance, i: usize, j: usize, t: usize) -> Rat {
    let p = inst.p(i, j).expect("finite processing time");
    (rat(t as i64) - inst.release(j)) / pow2(class_of(p)) + half()
}

fn require_integral(inst: &SchedulingInstance) -> Result<()> {
    ensure_valid(inst)?;
    if !inst.is_integral() {
        return Err(Error::NonIntegral("releases and processing times must be integers".into()));
    }
    if inst.jobs.iter().any(|j| j.release.is_negative()) {
        return Err(Error::InvalidInstance("negative release".into()));
    }
    Ok(())
}

fn release_slot(inst: &SchedulingInstance, j: usize) -> usize {
    inst.release(j).ceil().to_integer().to_usize().expect("release fits usize")
}

/// Largest release plus the sum of each job's smallest processing time:
/// enough room to run every job on its fastest machine one after another.
pub fn default_horizon(inst: &SchedulingInstance) -> usize {
    let rmax = (0..inst.n()).map(|j| release_slot(inst, j)).max().unwrap_or(0);
    let work: Rat = inst.jobs.iter().map(|job| job.proc.iter().flatten().min().cloned().unwrap_or_else(zero)).sum();
    rmax + work.ceil().to_integer().to_usize().expect("horizon fits usize")
}

/// The classes present among the finite processing times of each machine,
/// ascending.
pub fn machine_classes(inst: &SchedulingInstance) -> Vec<Vec<i64>> {
    (0..inst.m)
        .map(|i| {
            let mut ks: Vec<i64> = (0..inst.n()).filter_map(|j| inst.p(i, j).map(class_of)).collect();
            ks.sort_unstable();
            ks.dedup();
            ks
        })
        .collect()
}

/// An LP over the slot variables plus the map back to (i, j, t).
pub struct TimeIndexedLp {
    pub lp: LinearProgram,
    pub horizon: usize,
    pub vars: Vec<((usize, usize, usize), VarId)>,
}

impl TimeIndexedLp {
    /// Solves and returns the optimum with its solution, or `Infeasible`.
    pub fn solve(&self) -> Result<(Rat, TimeIndexedSolution)> {
        let sol = solve_lp(&self.lp)?;
        match sol.status {
            LpStatus::Optimal => {}
            LpStatus::Infeasible => return Err(Error::Infeasible),
            LpStatus::Unbounded => return Err(Error::Unbounded),
        }
        let mut y = TimeIndexedSolution::new(self.horizon);
        for &((i, j, t), v) in &self.vars {
            let val = sol.value(v);
            if !val.is_zero() {
                y.add(i, j, t, val.clone());
            }
        }
        y.horizon = self.horizon;
        Ok((sol.objective_value, y))
    }
}

fn slot_variables(inst: &SchedulingInstance, horizon: usize, coeff: fn(&SchedulingInstance, usize, usize, usize) -> Rat) -> TimeIndexedLp {
    let mut lp = LinearProgram::new();
    let mut vars = Vec::new();
    for j in 0..inst.n() {
        for i in 0..inst.m {
            if inst.p(i, j).is_none() {
                continue;
            }
            for t in release_slot(inst, j)..horizon {
                let v = lp.add_var(format!("y_{i}_{j}_{t}"));
                lp.set_objective(v, coeff(inst, i, j, t));
                vars.push(((i, j, t), v));
            }
        }
    }
    for j in 0..inst.n() {
        let coeffs = vars
            .iter()
            .filter(|((_, jj, _), _)| *jj == j)
            .map(|&((i, _, _), v)| (v, one() / inst.p(i, j).unwrap()))
            .collect();
        lp.add_constraint(format!("complete_{j}"), coeffs, Relation::Eq, one());
    }
    TimeIndexedLp { lp, horizon, vars }
}

/// The time-indexed LP: completion equalities and unit capacity per machine
/// and slot.
pub fn build_time_indexed_lp(inst: &SchedulingInstance, horizon: usize) -> Result<TimeIndexedLp> {
    require_integral(inst)?;
    let mut tlp = slot_variables(inst, horizon, time_indexed_coeff);
    for i in 0..inst.m {
        for t in 0..horizon {
            let coeffs: Vec<(VarId, Rat)> =
                tlp.vars.iter().filter(|((ii, _, tt), _)| *ii == i && *tt == t).map(|&(_, v)| (v, one())).collect();
            if !coeffs.is_empty() {
                tlp.lp.add_constraint(format!("cap_{i}_{t}"), coeffs, Relation::Le, one());
            }
        }
    }
    Ok(tlp)
}

/// The class-grouped LP: for every machine i, class k present on i and
/// window [t1, t2), the volume of jobs with p_ij ≤ 2^k is at most
/// t2 - t1 + alpha·2^k.
pub fn build_auxiliary_lp(inst: &SchedulingInstance, alpha: &Rat, horizon: usize) -> Result<TimeIndexedLp> {
    require_integral(inst)?;
    if alpha.is_negative() {
        return Err(Error::InvalidArgument("alpha must be nonnegative".into()));
    }
    let mut tlp = slot_variables(inst, horizon, auxiliary_coeff);
    let classes = machine_classes(inst);
    for i in 0..inst.m {
        for &k in &classes[i] {
            let cap = pow2(k);
            let members: Vec<((usize, usize, usize), VarId)> = tlp
                .vars
                .iter()
                .filter(|((ii, j, _), _)| *ii == i && inst.p(i, *j).is_some_and(|p| *p <= cap))
                .copied()
                .collect();
            for t1 in 0..horizon {
                for t2 in t1 + 1..=horizon {
                    let coeffs: Vec<(VarId, Rat)> =
                        members.iter().filter(|((_, _, t), _)| (t1..t2).contains(t)).map(|&(_, v)| (v, one())).collect();
                    if coeffs.is_empty() {
                        continue;
                    }
                    let rhs = rat((t2 - t1) as i64) + alpha * &cap;
                    tlp.lp.add_constraint(format!("win_{i}_{k}_{t1}_{t2}"), coeffs, Relation::Le, rhs);
                }
            }
        }
    }
    Ok(tlp)
}

/// The window attaining alpha: machine, class and slots [t1, t2).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AlphaWitness {
    pub machine: usize,
    pub class: i64,
    pub t1: usize,
    pub t2: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AlphaReport {
    #[serde(with = "crate::rational::serde_rat")]
    pub alpha: Rat,
    pub witness: Option<AlphaWitness>,
}

/// Volume of jobs with p_ij ≤ 2^k on machine i in slots [t1, t2).
pub fn window_volume(inst: &SchedulingInstance, y: &TimeIndexedSolution, w: &AlphaWitness) -> Rat {
    let cap = pow2(w.class);
    y.y.iter()
        .filter(|(&(i, j, t), _)| i == w.machine && (w.t1..w.t2).contains(&t) && inst.p(i, j).is_some_and(|p| *p <= cap))
        .map(|(_, v)| v)
        .sum()
}

/// Relaxation of a window: (volume - width)/2^k.
pub fn window_alpha(inst: &SchedulingInstance, y: &TimeIndexedSolution, w: &AlphaWitness) -> Rat {
    (window_volume(inst, y, w) - rat((w.t2 - w.t1) as i64)) / pow2(w.class)
}

/// Smallest alpha ≥ 0 for which `y` meets every window constraint.
pub fn measure_alpha(inst: &SchedulingInstance, y: &TimeIndexedSolution) -> AlphaReport {
    let end = y.y.keys().map(|&(_, _, t)| t + 1).max().unwrap_or(0).max(y.horizon);
    let classes = machine_classes(inst);
    let mut best = AlphaReport { alpha: zero(), witness: None };
    for (i, ks) in classes.iter().enumerate() {
        for &k in ks {
            let cap = pow2(k);
            let mut vol = vec![zero(); end];
            for (&(ii, j, t), v) in &y.y {
                if ii == i && inst.p(i, j).is_some_and(|p| *p <= cap) {
                    vol[t] += v;
                }
            }
            // g(t) = (volume before t) - t; excess of [t1, t2) is g(t2) - g(t1).
            let mut g = zero();
            let mut min_g = zero();
            let mut arg = 0;
            for t2 in 1..=end {
                g += &vol[t2 - 1] - one();
                let a = (&g - &min_g) / &cap;
                if a > best.alpha {
                    best = AlphaReport {
                        alpha: a,
                        witness: Some(AlphaWitness { machine: i, class: k, t1: arg, t2 }),
                    };
                }
                if g < min_g {
                    min_g = g.clone();
                    arg = t2;
                }
            }
        }
    }
    best
}

/// Jobs sorted by release, ties by index.
pub fn job_order(inst: &SchedulingInstance) -> Vec<usize> {
    inst.release_order()
}

/// Rearranges volume inside each (machine, class) so that an earlier job in
/// `job_order` never runs after a later one, keeping per-slot class volume
/// and per-(i, j) totals.
pub fn normalize_consistent_order(inst: &SchedulingInstance, y: &TimeIndexedSolution) -> Result<TimeIndexedSolution> {
    let order = job_order(inst);
    let mut out = TimeIndexedSolution::new(y.horizon);
    let mut groups: BTreeMap<(usize, i64), BTreeMap<usize, Rat>> = BTreeMap::new();
    for (&(i, j, t), v) in &y.y {
        let p = inst.p(i, j).ok_or(Error::ForbiddenAssignment { job: j, machine: i })?;
        *groups.entry((i, class_of(p))).or_default().entry(t).or_insert_with(zero) += v;
    }
    for ((i, k), slots) in groups {
        let mut slots: Vec<(usize, Rat)> = slots.into_iter().collect();
        let mut s = 0;
        for &j in &order {
            if inst.p(i, j).map(class_of) != Some(k) {
                continue;
            }
            let mut need = y.total(i, j);
            while need.is_positive() {
                let (t, avail) = slots.get_mut(s).ok_or_else(|| Error::Invariant("class volume exhausted".into()))?;
                let take = if *avail < need { avail.clone() } else { need.clone() };
                if rat(*t as i64) < *inst.release(j) {
                    return Err(Error::Invariant(format!("job {j} moved before its release")));
                }
                out.add(i, j, *t, take.clone());
                need -= &take;
                *avail -= &take;
                if avail.is_zero() {
                    s += 1;
                }
            }
        }
    }
    out.horizon = y.horizon;
    Ok(out)
}

/// A random solution meeting the completion equalities: each job on one or
/// two machines (`half_integral`) or any nonempty subset, volume spread over
/// up to three slots in [r_j, horizon).
pub fn random_solution(inst: &SchedulingInstance, horizon: usize, half_integral: bool, seed: u64) -> Result<TimeIndexedSolution> {
    require_integral(inst)?;
    let mut rng = stream_rng(seed, Stream::Vectors);
    let mut y = TimeIndexedSolution::new(horizon);
    for j in 0..inst.n() {
        let r = release_slot(inst, j);
        if r >= horizon {
            return Err(Error::InvalidArgument(format!("job {j} released at or after the horizon")));
        }
        let machines: Vec<usize> = (0..inst.m).filter(|&i| inst.p(i, j).is_some()).collect();
        let mut chosen: Vec<usize> = machines.iter().copied().filter(|_| rng.random_bool(0.5)).collect();
        if half_integral {
            chosen.truncate(2);
        }
        if chosen.is_empty() {
            chosen.push(machines[rng.random_range(0..machines.len())]);
        }
        let weights: Vec<i64> = chosen.iter().map(|_| if half_integral { 1 } else { rng.random_range(1..=4) }).collect();
        let wsum: i64 = weights.iter().sum();
        for (&i, &w) in chosen.iter().zip(&weights) {
            let vol = inst.p(i, j).unwrap() * ratio(w, wsum);
            let parts = rng.random_range(1..=3usize);
            let pw: Vec<i64> = (0..parts).map(|_| rng.random_range(1..=3)).collect();
            let ps: i64 = pw.iter().sum();
            for w2 in pw {
                let t = rng.random_range(r..horizon);
                y.add(i, j, t, &vol * ratio(w2, ps));
            }
        }
    }
    y.horizon = horizon;
    Ok(y)
}

pub(crate) fn units(inst: &SchedulingInstance, y: &TimeIndexedSolution, i: usize, j: usize) -> Rat {
    y.total(i, j) / inst.p(i, j).expect("finite processing time")
}

pub(crate) fn is_dyadic_multiple(u: &Rat, level: u32) -> bool {
    is_integer(&(u * pow2(level as i64)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Job;

    fn inst(m: usize, jobs: &[(i64, &[Option<i64>])]) -> SchedulingInstance {
        SchedulingInstance::new(m, jobs.iter().map(|(r, p)| Job::new(rat(*r), p.iter().map(|x| x.map(rat)).collect())).collect())
    }

    #[test]
    fn single_unit_job_costs_half() {
        let inst = inst(1, &[(0, &[Some(1)])]);
        let (opt, y) = build_time_indexed_lp(&inst, 1).unwrap().solve().unwrap();
        assert_eq!(opt, ratio(1, 2));
        assert_eq!(y.get(0, 0, 0), rat(1));
        let (aux, _) = build_auxiliary_lp(&inst, &zero(), 1).unwrap().solve().unwrap();
        assert_eq!(aux, opt);
    }

    #[test]
    fn two_unit_jobs_cost_two() {
        let inst = inst(1, &[(0, &[Some(1)]), (0, &[Some(1)])]);
        let h = default_horizon(&inst);
        assert_eq!(h, 2);
        let (opt, y) = build_time_indexed_lp(&inst, h).unwrap().solve().unwrap();
        assert_eq!(opt, rat(2));
        assert_eq!(measure_alpha(&inst, &y).alpha, zero());
        assert!(build_time_indexed_lp(&inst, 1).unwrap().solve().is_err());
    }

    #[test]
    fn crowded_slot_has_alpha_one() {
        let inst = inst(1, &[(0, &[Some(1)]), (0, &[Some(1)])]);
        let mut y = TimeIndexedSolution::new(2);
        y.add(0, 0, 1, rat(1));
        y.add(0, 1, 1, rat(1));
        let rep = measure_alpha(&inst, &y);
        assert_eq!(rep.alpha, rat(1));
        let w = rep.witness.unwrap();
        assert_eq!((w.t1, w.t2), (1, 2));
        assert_eq!(window_alpha(&inst, &y, &w), rep.alpha);
    }

    #[test]
    fn time_indexed_point_is_zero_relaxed() {
        let inst = inst(2, &[(0, &[Some(2), Some(3)]), (1, &[Some(1), None]), (0, &[Some(3), Some(1)])]);
        let h = default_horizon(&inst);
        let (opt, y) = build_time_indexed_lp(&inst, h).unwrap().solve().unwrap();
        y.check(&inst).unwrap();
        assert_eq!(measure_alpha(&inst, &y).alpha, zero());
        let aux = build_auxiliary_lp(&inst, &zero(), h).unwrap();
        let point: Vec<Rat> = aux.vars.iter().map(|&((i, j, t), _)| y.get(i, j, t)).collect();
        assert!(crate::lp::check_point(&aux.lp, &point).unwrap().is_empty());
        let ac = y.cost_auxiliary(&inst);
        assert!(ac <= opt && ac * rat(2) >= opt);
    }

    #[test]
    fn exchange_example() {
        let inst = inst(1, &[(0, &[Some(2)]), (0, &[Some(2)])]);
        let mut y = TimeIndexedSolution::new(6);
        y.add(0, 0, 5, rat(1));
        y.add(0, 0, 0, rat(1));
        y.add(0, 1, 3, rat(1));
        y.add(0, 1, 4, rat(1));
        let z = normalize_consistent_order(&inst, &y).unwrap();
        assert_eq!(z.get(0, 0, 0), rat(1));
        assert_eq!(z.get(0, 0, 3), rat(1));
        assert_eq!(z.get(0, 1, 4), rat(1));
        assert_eq!(z.get(0, 1, 5), rat(1));
        assert_eq!(z.cost_auxiliary(&inst), y.cost_auxiliary(&inst));
        assert_eq!(normalize_consistent_order(&inst, &z).unwrap(), z);
    }

    #[test]
    fn random_solutions_complete() {
        let inst = inst(2, &[(0, &[Some(2), Some(3)]), (2, &[Some(1), None])]);
        for seed in 0..10 {
            let y = random_solution(&inst, 6, seed % 2 == 0, seed).unwrap();
            y.check(&inst).unwrap();
        }
    }

    #[test]
    fn class_boundaries() {
        assert_eq!(class_of(&rat(1)), 0);
        assert_eq!(class_of(&rat(2)), 1);
        assert_eq!(class_of(&rat(3)), 2);
        assert_eq!(class_of(&rat(4)), 2);
        assert_eq!(class_of(&ratio(3, 4)), 0);
        assert_eq!(class_of(&ratio(1, 2)), -1);
    }

    #[test]
    fn json_roundtrip() {
        let mut y = TimeIndexedSolution::new(3);
        y.add(1, 0, 2, ratio(1, 3));
        let text = serde_json::to_string(&y).unwrap();
        assert!(text.contains("\"1/3\""));
        assert_eq!(serde_json::from_str::<TimeIndexedSolution>(&text).unwrap(), y);
    }
}
