//! Translation between max flow time and one-sided interval discrepancy of
//! two-sparse vectors with one positive and one negative entry.

use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::maxflow::{lp_value, solve_min_t};
use crate::model::{evaluate_max_flow, Job, MachineAssignment, SchedulingInstance};
use crate::prefix::{color_brute_force, discrepancy_of, Mode, SignedVectorSequence, DEFAULT_BRUTE_FORCE_LIMIT};
use crate::rational::{one, rat, ratio, zero, Rat};

/// The vector with `p1` at coordinate `i1`, `-p2` at `i2`, zero elsewhere.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TwoSparseVector {
    pub i1: usize,
    pub i2: usize,
    #[serde(with = "crate::rational::serde_rat")]
    pub p1: Rat,
    #[serde(with = "crate::rational::serde_rat")]
    pub p2: Rat,
}

impl TwoSparseVector {
    pub fn new(i1: usize, i2: usize, p1: Rat, p2: Rat) -> Self {
        TwoSparseVector { i1, i2, p1, p2 }
    }

    pub fn check(&self, m: usize) -> Result<()> {
        let range = zero()..=ratio(1, 2);
        if self.i1 == self.i2 || self.i1 >= m || self.i2 >= m {
            return Err(Error::Precondition(format!("coordinates {} and {} invalid for m = {m}", self.i1, self.i2)));
        }
        if !range.contains(&self.p1) || !range.contains(&self.p2) {
            return Err(Error::Precondition("entries must lie in [0, 1/2]".into()));
        }
        Ok(())
    }

    pub fn to_dense(&self, m: usize) -> Vec<Rat> {
        let mut v = vec![zero(); m];
        v[self.i1] = self.p1.clone();
        v[self.i2] = -self.p2.clone();
        v
    }

    /// Reads a dense vector with at most one positive and one negative
    /// entry; missing coordinates are taken as the lowest unused ones.
    pub fn from_dense(v: &[Rat]) -> Result<Self> {
        let pos: Vec<usize> = (0..v.len()).filter(|&i| v[i].is_positive()).collect();
        let neg: Vec<usize> = (0..v.len()).filter(|&i| v[i].is_negative()).collect();
        if pos.len() > 1 || neg.len() > 1 || v.len() < 2 {
            return Err(Error::Precondition("not a two-sparse vector of the required sign pattern".into()));
        }
        let i1 = pos.first().copied().unwrap_or_else(|| (0..v.len()).find(|i| !neg.contains(i)).unwrap());
        let i2 = neg.first().copied().unwrap_or_else(|| (0..v.len()).find(|&i| i != i1).unwrap());
        let out = TwoSparseVector::new(i1, i2, v[i1].clone(), -v[i2].clone());
        out.check(v.len())?;
        Ok(out)
    }
}

/// The constructed instance and where each step's jobs sit in it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EquivalenceInstance {
    pub m: usize,
    pub vectors: Vec<TwoSparseVector>,
    pub inst: SchedulingInstance,
    /// Index of the special job of step t, absent when an entry of v^(t)
    /// is zero.
    pub special: Vec<Option<usize>>,
    /// Sign used for steps without a special job.
    pub fixed_sign: Vec<i8>,
}

/// Builds m machines and, at each time t = 1..n, a special job with
/// processing time 2·p1 on i1 and 2·p2 on i2, plus one job pinned to each
/// machine with time 1 - p1 on i1, 1 - p2 on i2 and 1 elsewhere.
///
/// A special job with a zero entry would need a zero processing time; it is
/// left out and the step's sign fixed to the zero coordinate's side, which
/// keeps the per-step load identity exact.
pub fn vectors_to_maxflow_instance(vectors: &[TwoSparseVector], m: usize) -> Result<EquivalenceInstance> {
    let mut jobs = Vec::new();
    let mut special = Vec::new();
    let mut fixed_sign = Vec::new();
    for (s, v) in vectors.iter().enumerate() {
        v.check(m)?;
        let release = rat(s as i64 + 1);
        if v.p1.is_positive() && v.p2.is_positive() {
            let mut proc = vec![None; m];
            proc[v.i1] = Some(&v.p1 * rat(2));
            proc[v.i2] = Some(&v.p2 * rat(2));
            special.push(Some(jobs.len()));
            fixed_sign.push(0);
            jobs.push(Job::new(release.clone(), proc));
        } else {
            special.push(None);
            fixed_sign.push(if v.p1.is_zero() { 1 } else { -1 });
        }
        for i in 0..m {
            let p = if i == v.i1 {
                one() - &v.p1
            } else if i == v.i2 {
                one() - &v.p2
            } else {
                one()
            };
            let mut proc = vec![None; m];
            proc[i] = Some(p);
            jobs.push(Job::new(release.clone(), proc));
        }
    }
    Ok(EquivalenceInstance {
        m,
        vectors: vectors.to_vec(),
        inst: SchedulingInstance::new(m, jobs),
        special,
        fixed_sign,
    })
}

impl EquivalenceInstance {
    pub fn dense_vectors(&self) -> Vec<Vec<Rat>> {
        self.vectors.iter().map(|v| v.to_dense(self.m)).collect()
    }

    /// Every special job split evenly over its two machines.
    pub fn half_assignment(&self) -> Vec<Vec<Rat>> {
        let half = ratio(1, 2);
        self.inst
            .jobs
            .iter()
            .map(|job| {
                let finite = job.proc.iter().filter(|p| p.is_some()).count();
                job.proc
                    .iter()
                    .map(|p| match (p, finite) {
                        (None, _) => zero(),
                        (Some(_), 1) => one(),
                        (Some(_), _) => half.clone(),
                    })
                    .collect()
            })
            .collect()
    }

    /// The assignment realizing `signs`: +1 puts the special job on i1.
    pub fn assignment_for(&self, signs: &[i8]) -> Result<MachineAssignment> {
        if signs.len() != self.vectors.len() {
            return Err(Error::Dimension { expected: self.vectors.len(), got: signs.len() });
        }
        let mut assign = Vec::with_capacity(self.inst.n());
        for (j, job) in self.inst.jobs.iter().enumerate() {
            let step = job.release.to_integer().try_into().map(|t: usize| t - 1).expect("release is a step");
            let home = if self.special[step] == Some(j) {
                if signs[step] > 0 {
                    self.vectors[step].i1
                } else {
                    self.vectors[step].i2
                }
            } else {
                job.proc.iter().position(Option::is_some).expect("pinned job")
            };
            assign.push(home);
        }
        Ok(MachineAssignment::new(assign))
    }
}

/// Reads one sign per step off the special job's machine.
pub fn signs_from_assignment(eq: &EquivalenceInstance, asg: &MachineAssignment) -> Result<Vec<i8>> {
    asg.check(&eq.inst)?;
    (0..eq.vectors.len())
        .map(|t| match eq.special[t] {
            None => Ok(eq.fixed_sign[t]),
            Some(j) => {
                let v = &eq.vectors[t];
                match asg.assign[j] {
                    i if i == v.i1 => Ok(1),
                    i if i == v.i2 => Ok(-1),
                    i => Err(Error::InvalidArgument(format!("special job {j} on machine {i}"))),
                }
            }
        })
        .collect()
}

/// Checks load(i, t) - 1 = ε_t · v^(t)_i for every machine and step.
pub fn load_identity_holds(eq: &EquivalenceInstance, asg: &MachineAssignment, signs: &[i8]) -> bool {
    let n = eq.vectors.len();
    let mut load = vec![vec![zero(); eq.m]; n];
    for (j, &i) in asg.assign.iter().enumerate() {
        let t: usize = eq.inst.release(j).to_integer().try_into().expect("step");
        load[t - 1][i] += eq.inst.p(i, j).expect("checked assignment");
    }
    (0..n).all(|t| {
        let v = eq.vectors[t].to_dense(eq.m);
        (0..eq.m).all(|i| &load[t][i] - one() == &v[i] * rat(signs[t].into()))
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RoundtripReport {
    /// Assignment LP optimum of the constructed instance.
    pub lp_optimum: Rat,
    /// Best max flow over all integral assignments.
    pub opt_max_flow: Rat,
    pub opt_assignment: MachineAssignment,
    /// Signs read off the optimal assignment.
    pub signs: Vec<i8>,
    /// One-sided interval discrepancy of those signs.
    pub extracted: Rat,
    /// Best one-sided interval discrepancy over all signs.
    pub optimum: Rat,
    pub optimum_signs: Vec<i8>,
    pub identity_holds: bool,
}

/// Builds the instance, finds its best integral assignment by enumerating
/// the special jobs' machines, extracts signs, and compares their
/// discrepancy with the exhaustive optimum.
pub fn roundtrip_check(vectors: &[TwoSparseVector], m: usize) -> Result<RoundtripReport> {
    let eq = vectors_to_maxflow_instance(vectors, m)?;
    let n = vectors.len();
    if n > DEFAULT_BRUTE_FORCE_LIMIT {
        return Err(Error::LimitExceeded { n, limit: DEFAULT_BRUTE_FORCE_LIMIT });
    }
    let free: Vec<usize> = (0..n).filter(|&t| eq.special[t].is_some()).collect();
    let mut best: Option<(Rat, MachineAssignment)> = None;
    for mask in 0u64..(1u64 << free.len()) {
        let mut signs = eq.fixed_sign.clone();
        for (b, &t) in free.iter().enumerate() {
            signs[t] = if mask >> b & 1 == 0 { 1 } else { -1 };
        }
        let asg = eq.assignment_for(&signs)?;
        let flow = evaluate_max_flow(&eq.inst, &asg)?.max_flow;
        if best.as_ref().is_none_or(|(b, _)| flow < *b) {
            best = Some((flow, asg));
        }
    }
    let (opt_max_flow, opt_assignment) = best.expect("at least one assignment");
    let signs = signs_from_assignment(&eq, &opt_assignment)?;
    let dense = eq.dense_vectors();
    let extracted = if n == 0 { zero() } else { discrepancy_of(m, &dense, &signs, Mode::OneSidedInterval)?.value };
    let (optimum, optimum_signs) = if n == 0 {
        (zero(), Vec::new())
    } else {
        let c = color_brute_force(&SignedVectorSequence::new(m, dense)?, Mode::OneSidedInterval, DEFAULT_BRUTE_FORCE_LIMIT)?;
        (c.value, c.signs)
    };
    let lp_optimum = if n == 0 { zero() } else { solve_min_t(&eq.inst)?.t_star };
    Ok(RoundtripReport {
        lp_optimum,
        identity_holds: load_identity_holds(&eq, &opt_assignment, &signs),
        opt_max_flow,
        opt_assignment,
        signs,
        extracted,
        optimum,
        optimum_signs,
    })
}

/// The assignment LP value of the even split; equals 1 by construction.
pub fn half_assignment_value(eq: &EquivalenceInstance) -> Result<Rat> {
    lp_value(&eq.inst, &eq.half_assignment())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(i1: usize, i2: usize, p1: (i64, i64), p2: (i64, i64)) -> TwoSparseVector {
        TwoSparseVector::new(i1, i2, ratio(p1.0, p1.1), ratio(p2.0, p2.1))
    }

    #[test]
    fn construction_example() {
        let eq = vectors_to_maxflow_instance(&[v(0, 1, (3, 10), (1, 2))], 2).unwrap();
        let inst = &eq.inst;
        assert_eq!(inst.n(), 3);
        assert_eq!(eq.special, vec![Some(0)]);
        assert_eq!(inst.jobs[0].proc, vec![Some(ratio(3, 5)), Some(rat(1))]);
        assert_eq!(inst.jobs[1].proc, vec![Some(ratio(7, 10)), None]);
        assert_eq!(inst.jobs[2].proc, vec![None, Some(ratio(1, 2))]);
        assert!(inst.jobs.iter().all(|j| j.release == rat(1)));
        assert_eq!(solve_min_t(inst).unwrap().t_star, rat(1));
        assert_eq!(half_assignment_value(&eq).unwrap(), rat(1));
    }

    #[test]
    fn zero_vector_is_free() {
        let eq = vectors_to_maxflow_instance(&[v(0, 1, (0, 1), (0, 1))], 3).unwrap();
        assert_eq!(eq.special, vec![None]);
        assert!(eq.inst.jobs.iter().all(|j| j.proc.iter().flatten().all(|p| *p == rat(1))));
        let r = roundtrip_check(&[v(0, 1, (0, 1), (0, 1)), v(2, 0, (0, 1), (0, 1))], 3).unwrap();
        assert_eq!(r.extracted, zero());
        assert_eq!(r.optimum, zero());
        assert!(r.identity_holds);
    }

    #[test]
    fn all_on_first_machine_gives_plus() {
        let vs = vec![v(0, 1, (1, 2), (1, 4)), v(1, 0, (1, 3), (1, 2))];
        let eq = vectors_to_maxflow_instance(&vs, 2).unwrap();
        let asg = eq.assignment_for(&[1, 1]).unwrap();
        let signs = signs_from_assignment(&eq, &asg).unwrap();
        assert_eq!(signs, vec![1, 1]);
        assert!(load_identity_holds(&eq, &asg, &signs));
        let asg = eq.assignment_for(&[-1, 1]).unwrap();
        assert!(load_identity_holds(&eq, &asg, &[-1, 1]));
        assert!(!load_identity_holds(&eq, &asg, &[1, 1]));
    }

    #[test]
    fn roundtrip_bounds() {
        let vs = vec![v(0, 1, (1, 2), (1, 2)), v(0, 1, (1, 2), (1, 2)), v(1, 0, (1, 4), (1, 3))];
        let r = roundtrip_check(&vs, 2).unwrap();
        assert_eq!(r.lp_optimum, rat(1));
        assert!(r.identity_holds);
        assert!(r.optimum <= r.extracted);
        assert!(r.extracted <= &r.opt_max_flow - rat(1));
    }

    #[test]
    fn rejects_outside_vm() {
        assert!(vectors_to_maxflow_instance(&[v(0, 0, (1, 4), (1, 4))], 2).is_err());
        assert!(vectors_to_maxflow_instance(&[v(0, 1, (3, 4), (1, 4))], 2).is_err());
    }

    #[test]
    fn dense_roundtrip() {
        let x = v(2, 0, (1, 3), (1, 5));
        assert_eq!(TwoSparseVector::from_dense(&x.to_dense(3)).unwrap(), x);
    }
}
