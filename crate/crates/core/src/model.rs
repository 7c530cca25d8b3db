//! Scheduling instances on unrelated machines, schedule evaluation and
//! instance generators.

use std::cmp::Ordering;
use std::collections::BTreeMap;

use num_traits::{Signed, ToPrimitive, Zero};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::{format_rat, parse_rat, rat, Rat};
use crate::rng::{stream_rng, Stream};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Job {
    pub release: Rat,
    /// One entry per machine; `None` means the job cannot run there.
    pub proc: Vec<Option<Rat>>,
}

impl Job {
    pub fn new(release: Rat, proc: Vec<Option<Rat>>) -> Self {
        Job { release, proc }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SchedulingInstance {
    pub m: usize,
    pub jobs: Vec<Job>,
}

impl SchedulingInstance {
    pub fn new(m: usize, jobs: Vec<Job>) -> Self {
        SchedulingInstance { m, jobs }
    }

    pub fn n(&self) -> usize {
        self.jobs.len()
    }

    pub fn p(&self, machine: usize, job: usize) -> Option<&Rat> {
        self.jobs[job].proc[machine].as_ref()
    }

    pub fn release(&self, job: usize) -> &Rat {
        &self.jobs[job].release
    }

    fn finite(&self) -> impl Iterator<Item = &Rat> {
        self.jobs.iter().flat_map(|j| j.proc.iter().flatten())
    }

    /// Largest finite processing time (zero for an empty instance).
    pub fn p_max(&self) -> Rat {
        self.finite().max().cloned().unwrap_or_else(Rat::zero)
    }

    pub fn p_min(&self) -> Option<Rat> {
        self.finite().min().cloned()
    }

    /// Ratio between the largest and the smallest finite processing time.
    pub fn p_ratio(&self) -> Option<Rat> {
        let lo = self.p_min()?;
        Some(self.p_max() / lo)
    }

    /// Releases and all finite processing times are integers.
    pub fn is_integral(&self) -> bool {
        self.jobs
            .iter()
            .all(|j| j.release.is_integer() && j.proc.iter().flatten().all(|p| p.is_integer()))
    }

    /// Jobs sorted by release time, ties by index.
    pub fn release_order(&self) -> Vec<usize> {
        let mut order: Vec<usize> = (0..self.n()).collect();
        order.sort_by(|&a, &b| self.jobs[a].release.cmp(&self.jobs[b].release).then(a.cmp(&b)));
        order
    }

    /// Distinct release times in increasing order.
    pub fn release_times(&self) -> Vec<Rat> {
        let mut times: Vec<Rat> = self.jobs.iter().map(|j| j.release.clone()).collect();
        times.sort();
        times.dedup();
        times
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&InstanceFile::from(self)).expect("instance serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: InstanceFile =
            serde_json::from_str(text).map_err(|e| Error::Format(format!("instance: {e}")))?;
        file.try_into()
    }
}

/// Returns one description per violated instance invariant.
pub fn validate_instance(inst: &SchedulingInstance) -> Vec<String> {
    let mut out = Vec::new();
    if inst.m == 0 {
        out.push("machine count must be positive".to_string());
    }
    for (j, job) in inst.jobs.iter().enumerate() {
        if job.proc.len() != inst.m {
            out.push(format!(
                "job {j}: {} processing times for {} machines",
                job.proc.len(),
                inst.m
            ));
        }
        if job.release.is_negative() {
            out.push(format!("job {j}: negative release time {}", job.release));
        }
        if job.proc.iter().all(Option::is_none) {
            out.push(format!("job {j}: no machine with finite processing time"));
        }
        for (i, p) in job.proc.iter().enumerate() {
            if let Some(p) = p {
                if !p.is_positive() {
                    out.push(format!("job {j}: non-positive processing time {p} on machine {i}"));
                }
            }
        }
    }
    out
}

pub(crate) fn ensure_valid(inst: &SchedulingInstance) -> Result<()> {
    let violations = validate_instance(inst);
    if violations.is_empty() {
        Ok(())
    } else {
        Err(Error::InvalidInstance(violations.join("; ")))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MachineAssignment {
    pub assign: Vec<usize>,
}

impl MachineAssignment {
    pub fn new(assign: Vec<usize>) -> Self {
        MachineAssignment { assign }
    }

    pub fn check(&self, inst: &SchedulingInstance) -> Result<()> {
        if self.assign.len() != inst.n() {
            return Err(Error::AssignmentLength {
                expected: inst.n(),
                got: self.assign.len(),
            });
        }
        for (job, &machine) in self.assign.iter().enumerate() {
            if machine >= inst.m || inst.p(machine, job).is_none() {
                return Err(Error::ForbiddenAssignment { job, machine });
            }
        }
        Ok(())
    }

    pub fn jobs_on(&self, machine: usize) -> Vec<usize> {
        (0..self.assign.len()).filter(|&j| self.assign[j] == machine).collect()
    }
}

/// One contiguous piece of processing.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Segment {
    pub machine: usize,
    pub job: usize,
    pub start: Rat,
    pub end: Rat,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScheduleMetrics {
    pub per_job_flow: Vec<Rat>,
    pub max_flow: Rat,
    pub total_flow: Rat,
    pub timeline: Vec<Segment>,
}

impl ScheduleMetrics {
    fn from_completions(inst: &SchedulingInstance, completion: Vec<Rat>, timeline: Vec<Segment>) -> Self {
        let per_job_flow: Vec<Rat> = completion
            .iter()
            .enumerate()
            .map(|(j, c)| c - inst.release(j))
            .collect();
        let max_flow = per_job_flow.iter().max().cloned().unwrap_or_else(Rat::zero);
        let total_flow = per_job_flow.iter().fold(Rat::zero(), |acc, f| acc + f);
        ScheduleMetrics {
            per_job_flow,
            max_flow,
            total_flow,
            timeline,
        }
    }
}

/// Non-preemptive FIFO per machine: jobs in release order (ties by index),
/// each started as early as possible.
pub fn evaluate_max_flow(inst: &SchedulingInstance, asg: &MachineAssignment) -> Result<ScheduleMetrics> {
    asg.check(inst)?;
    let mut completion = vec![Rat::zero(); inst.n()];
    let mut timeline = Vec::with_capacity(inst.n());
    let order = inst.release_order();
    let mut free_at: Vec<Option<Rat>> = vec![None; inst.m];
    for j in order {
        let i = asg.assign[j];
        let p = inst.p(i, j).expect("checked assignment");
        let start = match &free_at[i] {
            Some(t) if t > inst.release(j) => t.clone(),
            _ => inst.release(j).clone(),
        };
        let end = &start + p;
        timeline.push(Segment {
            machine: i,
            job: j,
            start,
            end: end.clone(),
        });
        completion[j] = end.clone();
        free_at[i] = Some(end);
    }
    Ok(ScheduleMetrics::from_completions(inst, completion, timeline))
}

/// Preemptive SRPT per machine over unit time slots. Requires integral
/// releases and processing times of the assigned jobs.
pub fn evaluate_total_flow_srpt(inst: &SchedulingInstance, asg: &MachineAssignment) -> Result<ScheduleMetrics> {
    asg.check(inst)?;
    let mut completion = vec![Rat::zero(); inst.n()];
    let mut timeline = Vec::new();
    for machine in 0..inst.m {
        let jobs = asg.jobs_on(machine);
        let mut remaining = BTreeMap::new();
        let mut release = BTreeMap::new();
        for &j in &jobs {
            let r = inst.release(j);
            let p = inst.p(machine, j).expect("checked assignment");
            if !r.is_integer() || !p.is_integer() {
                return Err(Error::NonIntegral(format!("job {j} on machine {machine}")));
            }
            release.insert(j, r.to_integer().to_i64().expect("release fits i64"));
            remaining.insert(j, p.to_integer().to_i64().expect("processing time fits i64"));
        }
        let mut t = release.values().copied().min().unwrap_or(0);
        let mut current: Option<(usize, i64)> = None;
        while !remaining.is_empty() {
            let pick = remaining
                .iter()
                .filter(|(j, _)| release[j] <= t)
                .min_by(|a, b| a.1.cmp(b.1).then(a.0.cmp(b.0)))
                .map(|(&j, _)| j);
            let Some(j) = pick else {
                flush(&mut current, machine, t, &mut timeline);
                t = remaining.keys().map(|j| release[j]).min().expect("nonempty");
                continue;
            };
            match current {
                Some((cj, _)) if cj == j => {}
                _ => {
                    flush(&mut current, machine, t, &mut timeline);
                    current = Some((j, t));
                }
            }
            let left = remaining.get_mut(&j).expect("picked job");
            *left -= 1;
            t += 1;
            if *left == 0 {
                remaining.remove(&j);
                completion[j] = rat(t);
                flush(&mut current, machine, t, &mut timeline);
            }
        }
    }
    Ok(ScheduleMetrics::from_completions(inst, completion, timeline))
}

fn flush(current: &mut Option<(usize, i64)>, machine: usize, t: i64, timeline: &mut Vec<Segment>) {
    if let Some((job, start)) = current.take() {
        if start < t {
            timeline.push(Segment {
                machine,
                job,
                start: rat(start),
                end: rat(t),
            });
        }
    }
}

/// `copies` copies of a makespan instance, released at `T, 2T, ..., copies*T`.
pub fn gen_periodic_instance(base: &SchedulingInstance, period: &Rat, copies: usize) -> Result<SchedulingInstance> {
    if copies < 1 {
        return Err(Error::InvalidArgument("repetition count must be at least 1".into()));
    }
    if base.jobs.iter().any(|j| !j.release.is_zero()) {
        return Err(Error::InvalidArgument("base instance must release every job at 0".into()));
    }
    let mut jobs = Vec::with_capacity(base.n() * copies);
    for c in 1..=copies {
        let release = period * rat(c as i64);
        for job in &base.jobs {
            jobs.push(Job::new(release.clone(), job.proc.clone()));
        }
    }
    Ok(SchedulingInstance::new(base.m, jobs))
}

#[derive(Debug, Clone, PartialEq)]
pub struct RandomInstanceParams {
    pub n: usize,
    pub m: usize,
    /// Inclusive integer range of processing times.
    pub p_range: (i64, i64),
    /// Inclusive integer range of release times.
    pub r_range: (i64, i64),
    pub infinity_prob: f64,
}

/// Integral random instance, deterministic in `seed`. Rows without any finite
/// processing time are resampled.
pub fn gen_random_instance(params: &RandomInstanceParams, seed: u64) -> Result<SchedulingInstance> {
    let RandomInstanceParams {
        n,
        m,
        p_range,
        r_range,
        infinity_prob,
    } = *params;
    if m == 0 {
        return Err(Error::InvalidArgument("m must be positive".into()));
    }
    if p_range.0 < 1 || p_range.1 < p_range.0 || r_range.0 < 0 || r_range.1 < r_range.0 {
        return Err(Error::InvalidArgument("ranges must be non-empty with p >= 1, r >= 0".into()));
    }
    if !(0.0..1.0).contains(&infinity_prob) {
        return Err(Error::InvalidArgument("infinity_prob must lie in [0, 1)".into()));
    }
    let mut rng = stream_rng(seed, Stream::InstanceGen);
    let mut jobs = Vec::with_capacity(n);
    for _ in 0..n {
        let release = rat(rng.random_range(r_range.0..=r_range.1));
        let proc = loop {
            let row: Vec<Option<Rat>> = (0..m)
                .map(|_| {
                    let forbidden = infinity_prob > 0.0 && rng.random_bool(infinity_prob);
                    let p = rng.random_range(p_range.0..=p_range.1);
                    (!forbidden).then(|| rat(p))
                })
                .collect();
            if row.iter().any(Option::is_some) {
                break row;
            }
        };
        jobs.push(Job::new(release, proc));
    }
    Ok(SchedulingInstance::new(m, jobs))
}

#[derive(Serialize, Deserialize)]
struct InstanceFile {
    m: usize,
    jobs: Vec<JobFile>,
}

#[derive(Serialize, Deserialize)]
struct JobFile {
    r: String,
    p: Vec<Option<String>>,
}

impl From<&SchedulingInstance> for InstanceFile {
    fn from(inst: &SchedulingInstance) -> Self {
        InstanceFile {
            m: inst.m,
            jobs: inst
                .jobs
                .iter()
                .map(|j| JobFile {
                    r: format_rat(&j.release),
                    p: j.proc.iter().map(|p| p.as_ref().map(format_rat)).collect(),
                })
                .collect(),
        }
    }
}

impl TryFrom<InstanceFile> for SchedulingInstance {
    type Error = Error;

    fn try_from(file: InstanceFile) -> Result<Self> {
        let mut jobs = Vec::with_capacity(file.jobs.len());
        for (j, job) in file.jobs.into_iter().enumerate() {
            let release = parse_rat(&job.r).map_err(|e| Error::Format(format!("jobs[{j}].r: {e}")))?;
            let mut proc = Vec::with_capacity(job.p.len());
            for (i, p) in job.p.into_iter().enumerate() {
                proc.push(match p {
                    None => None,
                    Some(s) => Some(parse_rat(&s).map_err(|e| Error::Format(format!("jobs[{j}].p[{i}]: {e}")))?),
                });
            }
            jobs.push(Job::new(release, proc));
        }
        Ok(SchedulingInstance::new(file.m, jobs))
    }
}

/// Orders two optional processing times with `None` (forbidden) last.
pub fn cmp_proc(a: &Option<Rat>, b: &Option<Rat>) -> Ordering {
    match (a, b) {
        (Some(x), Some(y)) => x.cmp(y),
        (Some(_), None) => Ordering::Less,
        (None, Some(_)) => Ordering::Greater,
        (None, None) => Ordering::Equal,
    }
}
