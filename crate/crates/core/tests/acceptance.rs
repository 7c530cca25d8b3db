//! End-to-end acceptance run. Prints one PASS/FAIL line per criterion and
//! exits nonzero if any criterion fails.

#![allow(clippy::needless_range_loop)]

use std::time::Instant;

use num_traits::Signed;
use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};

use flowdisc::equivalence::{signs_from_assignment, vectors_to_maxflow_instance, TwoSparseVector};
use flowdisc::game::{
    breaker_hard_instance, exhaustive_breaker_value, color_two_permutation, GameState, GreedyMaker, HardTree, Move, PairingMaker,
    Player, SearchConfig, Strategy, TreeBreaker,
};
use flowdisc::maxflow::{full_round_maxflow, lp_value, round_half_integral_maxflow, solve_min_t, FractionalAssignment};
use flowdisc::model::{
    evaluate_max_flow, evaluate_total_flow_srpt, gen_periodic_instance, gen_random_instance, Job, MachineAssignment,
    RandomInstanceParams, SchedulingInstance,
};
use flowdisc::prefix::{color_brute_force, color_floating, color_two_sparse_paired, gen_random_vectors, Colorer, Mode, SignedVectorSequence, VectorKind};
use flowdisc::rational::{format_rat, one, pow2, rat, ratio, zero, Rat};
use flowdisc::sdp::{block_prefix_point, build_block_instance, choose_r, gaussian_measure_mc, in_body_k, sdp_prefix_discrepancy, signs_to_sdp_vectors};
use flowdisc::totalflow::{
    build_time_indexed_lp, default_horizon, job_order, measure_alpha, normalize_consistent_order, random_solution,
    round_half_integral_totalflow, TimeIndexedSolution,
};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn ok<T, E: std::fmt::Display>(r: Result<T, E>) -> Result<T, String> {
    r.map_err(|e| e.to_string())
}

// Independent oracles.

/// Discrepancy by enumerating every nonempty interval (prefixes when the
/// start is pinned to the first element). One-sided values can be negative.
fn disc_oracle(vectors: &[Vec<Rat>], signs: &[i8], mode: Mode) -> Rat {
    let n = vectors.len();
    let m = vectors.first().map_or(0, Vec::len);
    let mut best: Option<Rat> = None;
    for c in 0..m {
        let starts = if mode == Mode::Prefix { 0..1 } else { 0..n };
        for a in starts {
            let mut s = zero();
            for b in a..n {
                s += &vectors[b][c] * rat(signs[b].into());
                let v = match mode {
                    Mode::OneSidedInterval => s.clone(),
                    _ => s.abs(),
                };
                if best.as_ref().is_none_or(|b| v > *b) {
                    best = Some(v);
                }
            }
        }
    }
    best.unwrap_or_else(zero)
}

/// Minimum discrepancy over all 2^n sign patterns.
fn min_disc_oracle(vectors: &[Vec<Rat>], mode: Mode) -> Rat {
    let n = vectors.len();
    (0u32..1 << n)
        .map(|mask| {
            let signs: Vec<i8> = (0..n).map(|j| if mask >> j & 1 == 1 { -1 } else { 1 }).collect();
            disc_oracle(vectors, &signs, mode)
        })
        .min()
        .unwrap_or_else(zero)
}

fn class(p: &Rat) -> i64 {
    let mut k = 0i64;
    while pow2(k) < *p {
        k += 1;
    }
    while k > i64::MIN / 2 && pow2(k - 1) >= *p {
        k -= 1;
    }
    k
}

/// Largest (volume − width)/2^k over every window [t1, t2), machine and
/// class present on the machine, floored at 0.
fn alpha_oracle(inst: &SchedulingInstance, y: &TimeIndexedSolution) -> Rat {
    let end = y.y.keys().map(|&(_, _, t)| t + 1).max().unwrap_or(0).max(y.horizon);
    let mut best = zero();
    for i in 0..inst.m {
        let mut ks: Vec<i64> = (0..inst.n()).filter_map(|j| inst.p(i, j).map(class)).collect();
        ks.sort_unstable();
        ks.dedup();
        for k in ks {
            let cap = pow2(k);
            for t1 in 0..end {
                for t2 in t1 + 1..=end {
                    let vol: Rat = y
                        .y
                        .iter()
                        .filter(|(&(ii, j, t), _)| ii == i && t1 <= t && t < t2 && inst.p(i, j).is_some_and(|p| *p <= cap))
                        .map(|(_, v)| v.clone())
                        .sum();
                    let a = (vol - rat((t2 - t1) as i64)) / &cap;
                    if a > best {
                        best = a;
                    }
                }
            }
        }
    }
    best
}

fn aux_cost_oracle(inst: &SchedulingInstance, y: &TimeIndexedSolution) -> Rat {
    y.y.iter()
        .map(|(&(i, j, t), v)| {
            let p = inst.p(i, j).unwrap();
            v * ((rat(t as i64) - inst.release(j)) / pow2(class(p)) + ratio(1, 2))
        })
        .sum()
}

/// Every assignment that uses only finite processing times.
fn all_assignments(inst: &SchedulingInstance) -> Vec<MachineAssignment> {
    let choices: Vec<Vec<usize>> = (0..inst.n()).map(|j| (0..inst.m).filter(|&i| inst.p(i, j).is_some()).collect()).collect();
    let mut out = Vec::new();
    let mut idx = vec![0usize; inst.n()];
    loop {
        out.push(MachineAssignment::new(idx.iter().zip(&choices).map(|(&k, c)| c[k]).collect()));
        let mut j = 0;
        loop {
            if j == idx.len() {
                return out;
            }
            idx[j] += 1;
            if idx[j] < choices[j].len() {
                break;
            }
            idx[j] = 0;
            j += 1;
        }
    }
}

fn random_params(n: usize, m: usize, p_max: i64, r_max: i64) -> RandomInstanceParams {
    RandomInstanceParams {
        n,
        m,
        p_range: (1, p_max),
        r_range: (0, r_max),
        infinity_prob: 0.2,
    }
}

fn maxflow_batch() -> Result<Vec<SchedulingInstance>, String> {
    (0..25u64)
        .map(|seed| ok(gen_random_instance(&random_params(3 + seed as usize % 8, 2 + seed as usize % 3, 5, 6), seed)))
        .collect()
}

fn half_integral_x(inst: &SchedulingInstance, rng: &mut StdRng) -> Vec<Vec<Rat>> {
    (0..inst.n())
        .map(|j| {
            let mut allowed: Vec<usize> = (0..inst.m).filter(|&i| inst.p(i, j).is_some()).collect();
            allowed.shuffle(rng);
            let mut row = vec![zero(); inst.m];
            if allowed.len() >= 2 && rng.random_bool(0.7) {
                row[allowed[0]] = ratio(1, 2);
                row[allowed[1]] = ratio(1, 2);
            } else {
                row[allowed[0]] = one();
            }
            row
        })
        .collect()
}

fn criterion_1() -> Outcome {
    let mut rng = StdRng::seed_from_u64(1);
    let mut worst_slack: Option<Rat> = None;
    for (s, inst) in maxflow_batch()?.iter().enumerate() {
        let x = half_integral_x(inst, &mut rng);
        let t = ok(lp_value(inst, &x))?;
        let fa = FractionalAssignment { x, t: t.clone() };
        let r = ok(round_half_integral_maxflow(inst, &fa, &Colorer::default()))?;
        let d = if r.vectors.is_empty() { zero() } else { disc_oracle(&r.vectors, &r.signs, Mode::Prefix) };
        ensure(d == r.d, || format!("instance {s}: reported D {} but coloring has {}", r.d, d))?;
        let p_max = inst.jobs.iter().flat_map(|j| j.proc.iter().flatten()).max().unwrap().clone();
        let value = ok(evaluate_max_flow(inst, &r.assignment))?.max_flow;
        let bound = &t + rat(2) * &d * &p_max;
        ensure(value <= bound, || format!("instance {s}: max flow {value} > {bound}"))?;
        let slack = bound - value;
        worst_slack = Some(worst_slack.map_or(slack.clone(), |w| w.min(slack)));
    }
    Ok(format!("25 instances, smallest slack {}", format_rat(&worst_slack.unwrap())))
}

fn periodic_base() -> SchedulingInstance {
    let job = |a: i64, b: i64| Job::new(zero(), vec![Some(rat(a)), Some(rat(b))]);
    SchedulingInstance::new(2, vec![job(2, 3), job(3, 2), job(1, 1), job(1, 1)])
}

fn criterion_2() -> Outcome {
    for (s, inst) in maxflow_batch()?.iter().enumerate() {
        let r = ok(full_round_maxflow(inst, &Colorer::default()))?;
        let t = &r.trace;
        let mut bound = &t.t_star + &t.p_max;
        for l in &t.levels {
            bound += rat(2) * &l.d * &t.p_max / pow2(l.h as i64 - 1);
        }
        let value = ok(evaluate_max_flow(inst, &r.assignment))?.max_flow;
        ensure(value == t.max_flow, || format!("instance {s}: trace reports {} but schedule has {value}", t.max_flow))?;
        ensure(value <= bound, || format!("instance {s}: max flow {value} > bound {bound}"))?;
    }
    let base = periodic_base();
    let mut errors = Vec::new();
    for copies in [2usize, 4, 8] {
        let inst = ok(gen_periodic_instance(&base, &rat(3), copies))?;
        let r = match full_round_maxflow(&inst, &Colorer::default()) {
            Ok(r) => r,
            Err(flowdisc::Error::LimitExceeded { .. }) => ok(full_round_maxflow(&inst, &Colorer::Greedy))?,
            Err(e) => return Err(e.to_string()),
        };
        ensure(r.trace.t_star == rat(3), || format!("periodic T* {} for {copies} copies", r.trace.t_star))?;
        errors.push(r.trace.additive_error());
    }
    let monotone = errors.windows(2).all(|w| w[1] <= w[0]);
    let shown: Vec<String> = errors.iter().map(format_rat).collect();
    Ok(format!("25 bounds hold; periodic additive error for t=2,4,8: {} (non-increasing: {monotone})", shown.join(", ")))
}

fn criterion_3() -> Outcome {
    let mut count = 0;
    for seed in 0..12u64 {
        let params = RandomInstanceParams {
            infinity_prob: 0.15,
            ..random_params(2 + seed as usize % 6, 1 + seed as usize % 3, 3, 3)
        };
        let inst = ok(gen_random_instance(&params, 100 + seed))?;
        let t_star = ok(solve_min_t(&inst))?.t_star;
        let assignments = all_assignments(&inst);
        let mut opt_max = None::<Rat>;
        let mut opt_total = None::<Rat>;
        for a in &assignments {
            let mf = ok(evaluate_max_flow(&inst, a))?.max_flow;
            let tf = ok(evaluate_total_flow_srpt(&inst, a))?.total_flow;
            opt_max = Some(opt_max.map_or(mf.clone(), |o| o.min(mf)));
            opt_total = Some(opt_total.map_or(tf.clone(), |o| o.min(tf)));
        }
        let (opt_max, opt_total) = (opt_max.unwrap(), opt_total.unwrap());
        ensure(t_star <= opt_max, || format!("seed {seed}: T* {t_star} > OPT {opt_max}"))?;
        let (lp, _) = ok(ok(build_time_indexed_lp(&inst, default_horizon(&inst)))?.solve())?;
        ensure(lp <= opt_total, || format!("seed {seed}: LP {lp} > SRPT OPT {opt_total}"))?;
        count += assignments.len();
    }
    Ok(format!("12 instances, {count} assignments enumerated"))
}

fn random_tf_instance(seed: u64) -> Result<SchedulingInstance, String> {
    ok(gen_random_instance(&random_params(3 + seed as usize % 6, 2 + seed as usize % 2, 4, 4), 200 + seed))
}

fn criterion_4() -> Outcome {
    for seed in 0..25u64 {
        let inst = random_tf_instance(seed)?;
        let y = ok(random_solution(&inst, default_horizon(&inst) + 2, false, seed))?;
        let z = ok(normalize_consistent_order(&inst, &y))?;
        ensure(aux_cost_oracle(&inst, &y) == aux_cost_oracle(&inst, &z), || format!("seed {seed}: objective changed"))?;
        for i in 0..inst.m {
            for j in 0..inst.n() {
                ensure(y.total(i, j) == z.total(i, j), || format!("seed {seed}: total of ({i}, {j}) changed"))?;
            }
        }
        let (a, b) = (alpha_oracle(&inst, &y), alpha_oracle(&inst, &z));
        ensure(a == b, || format!("seed {seed}: alpha {a} became {b}"))?;
        ensure(measure_alpha(&inst, &z).alpha == b, || format!("seed {seed}: measured alpha disagrees with oracle"))?;
        let order = job_order(&inst);
        for i in 0..inst.m {
            let mut last: std::collections::BTreeMap<i64, usize> = Default::default();
            for &j in &order {
                let Some(p) = inst.p(i, j) else { continue };
                let slots: Vec<usize> = z.slots(i, j).map(|(t, _)| t).collect();
                if let (Some(&first), Some(&end)) = (slots.first(), slots.last()) {
                    let k = class(p);
                    if let Some(&prev) = last.get(&k) {
                        ensure(prev <= first, || format!("seed {seed}: job {j} starts before an earlier job ends"))?;
                    }
                    last.insert(k, end);
                }
            }
        }
    }
    Ok("25 solutions".into())
}

fn criterion_5() -> Outcome {
    let mut worst = None::<Rat>;
    for seed in 0..25u64 {
        let inst = random_tf_instance(seed)?;
        let y = ok(random_solution(&inst, default_horizon(&inst) + 2, true, 50 + seed))?;
        let r = ok(round_half_integral_totalflow(&inst, &y, &Colorer::default()))?;
        let d = if r.vectors.is_empty() { zero() } else { disc_oracle(&r.vectors, &r.signs, Mode::Prefix) };
        let (a_in, a_out) = (alpha_oracle(&inst, &y), alpha_oracle(&inst, &r.y));
        let bound = &a_in + rat(4) * &d + rat(4);
        ensure(a_out <= bound, || format!("seed {seed}: alpha {a_out} > {bound}"))?;
        let ybar = ok(normalize_consistent_order(&inst, &y))?;
        let mut compact = TimeIndexedSolution::new(y.horizon);
        for i in 0..inst.m {
            for j in 0..inst.n() {
                if let Some((t, _)) = ybar.slots(i, j).next() {
                    compact.add(i, j, t, ybar.total(i, j));
                }
            }
        }
        let (cost, cap) = (aux_cost_oracle(&inst, &r.y), aux_cost_oracle(&inst, &compact));
        ensure(cost <= cap, || format!("seed {seed}: auxiliary cost {cost} > compaction {cap}"))?;
        for j in 0..inst.n() {
            let parts: Vec<_> = r.y.y.iter().filter(|(&(_, jj, _), _)| jj == j).collect();
            ensure(parts.len() == 1 && *parts[0].1 == *inst.p(parts[0].0 .0, j).unwrap(), || format!("seed {seed}: job {j} not integral"))?;
        }
        let slack = bound - a_out;
        worst = Some(worst.map_or(slack.clone(), |w| w.min(slack)));
    }
    Ok(format!("25 solutions, smallest alpha slack {}", format_rat(&worst.unwrap())))
}

fn v_m_vectors(grid: &[Rat]) -> Vec<TwoSparseVector> {
    let mut out = Vec::new();
    for (i1, i2) in [(0, 1), (1, 0)] {
        for p1 in grid {
            for p2 in grid {
                out.push(TwoSparseVector::new(i1, i2, p1.clone(), p2.clone()));
            }
        }
    }
    out
}

fn criterion_6() -> Outcome {
    let coarse = v_m_vectors(&[zero(), ratio(1, 4), ratio(1, 2)]);
    let fine = v_m_vectors(&(0..=4).map(|k| ratio(k, 8)).collect::<Vec<_>>());
    let mut sequences: Vec<Vec<TwoSparseVector>> = fine.iter().map(|v| vec![v.clone()]).collect();
    for a in &fine {
        for b in &fine {
            sequences.push(vec![a.clone(), b.clone()]);
        }
    }
    for a in &coarse {
        for b in &coarse {
            for c in &coarse {
                sequences.push(vec![a.clone(), b.clone(), c.clone()]);
            }
        }
    }
    let mut tight = 0;
    for vs in &sequences {
        let eq = ok(vectors_to_maxflow_instance(vs, 2))?;
        let t_star = ok(solve_min_t(&eq.inst))?.t_star;
        ensure(t_star == one(), || format!("{vs:?}: LP optimum {t_star}"))?;
        let mut best: Option<(Rat, MachineAssignment)> = None;
        for a in all_assignments(&eq.inst) {
            let v = ok(evaluate_max_flow(&eq.inst, &a))?.max_flow;
            if best.as_ref().is_none_or(|(b, _)| v < *b) {
                best = Some((v, a));
            }
        }
        let (opt, asg) = best.unwrap();
        let signs = ok(signs_from_assignment(&eq, &asg))?;
        let disc = disc_oracle(&eq.dense_vectors(), &signs, Mode::OneSidedInterval);
        ensure(disc <= opt, || format!("{vs:?}: discrepancy {disc} > OPT {opt}"))?;
        if disc == &opt - one() {
            tight += 1;
        }
    }
    Ok(format!("{} sequences; discrepancy = OPT - 1 in {tight}", sequences.len()))
}

fn criterion_7() -> Outcome {
    let mut worst = zero();
    for n in 1..=10usize {
        let values = vec![one(); n];
        for starter in [Player::Maker, Player::Breaker] {
            for breaker_may_wait in [false, true] {
                let config = SearchConfig { starter, breaker_may_wait, limit: 12 };
                let v = ok(exhaustive_breaker_value(&values, &PairingMaker::strict(), config))?;
                ensure(v <= rat(4), || format!("n={n}, {starter} starts, waits {breaker_may_wait}: value {v}"))?;
                worst = worst.max(v);
            }
        }
    }
    Ok(format!("largest certified value {}", format_rat(&worst)))
}

fn criterion_8() -> Outcome {
    let (mut worst_paired, mut worst_perm) = (zero(), zero());
    for seed in 0..100u64 {
        let n = 1 + seed as usize % 24;
        let seq = ok(gen_random_vectors(2 + seed as usize % 4, n, VectorKind::TwoSparseUnit, seed))?;
        let c = ok(color_two_sparse_paired(&seq))?;
        let d = disc_oracle(&seq.vectors, &c.signs, Mode::Prefix);
        ensure(d <= rat(8), || format!("seed {seed}: paired coloring has {d}"))?;
        worst_paired = worst_paired.max(d);

        let mut rng = StdRng::seed_from_u64(seed);
        let values: Vec<Rat> = (0..n).map(|_| rat(rng.random_range(-1..=1))).collect();
        let mut sigma: Vec<usize> = (0..n).collect();
        sigma.shuffle(&mut rng);
        let r = ok(color_two_permutation(&values, &sigma))?;
        let col = |order: &[usize]| -> Vec<Vec<Rat>> { order.iter().map(|&j| vec![values[j].clone()]).collect() };
        let ident: Vec<usize> = (0..n).collect();
        let signs_in = |order: &[usize]| -> Vec<i8> { order.iter().map(|&j| r.signs[j]).collect() };
        let a = disc_oracle(&col(&ident), &signs_in(&ident), Mode::Prefix);
        let b = disc_oracle(&col(&sigma), &signs_in(&sigma), Mode::Prefix);
        ensure(a <= rat(4) && b <= rat(4), || format!("seed {seed}: two-permutation prefixes {a}, {b}"))?;
        worst_perm = worst_perm.max(a).max(b);
    }
    Ok(format!("100 inputs; worst paired {}, worst two-permutation {}", format_rat(&worst_paired), format_rat(&worst_perm)))
}

/// Plays the tree breaker against `maker`, re-checking the breaker's
/// structure after each of its moves.
fn play_checked(k: usize, maker: &mut dyn Strategy) -> Result<Rat, String> {
    let values = ok(breaker_hard_instance(k))?;
    let tree = ok(HardTree::new(k))?;
    let mut breaker = ok(TreeBreaker::new(k))?;
    let mut state = ok(GameState::new(values, Player::Breaker, [false, false]))?;
    let mut payoff = zero();
    while !state.is_finished() {
        let player = state.to_move;
        let mv = match player {
            Player::Maker => ok(maker.next_move(&state))?,
            Player::Breaker => ok(breaker.next_move(&state))?,
        };
        ok(state.apply(mv))?;
        if player == Player::Breaker {
            if let Some(s) = breaker.structure() {
                ok(s.check(&tree, &state.scaled.ints, state.scaled.scale, &state.colors))?;
            }
        }
        payoff = payoff.max(state.max_abs_prefix());
        if mv == Move::Wait {
            return Err("unexpected wait".into());
        }
    }
    Ok(payoff)
}

fn criterion_9() -> Outcome {
    let mut lines = Vec::new();
    for (name, make) in [
        ("pairing", (|| Box::new(PairingMaker::relaxed()) as Box<dyn Strategy>) as fn() -> Box<dyn Strategy>),
        ("greedy", || Box::new(GreedyMaker)),
    ] {
        let mut payoffs = Vec::new();
        for k in [2usize, 4, 6] {
            payoffs.push(play_checked(k, make().as_mut())?);
        }
        ensure(payoffs.windows(2).all(|w| w[0] <= w[1]), || format!("{name}: payoffs {payoffs:?} decrease in k"))?;
        lines.push(format!("{name} [{}]", payoffs.iter().map(format_rat).collect::<Vec<_>>().join(", ")));
    }
    Ok(format!("payoffs for k = 2, 4, 6: {}", lines.join(", ")))
}

fn criterion_10() -> Outcome {
    let mut rng = StdRng::seed_from_u64(10);
    let (mut inside, mut outside) = (0, 0);
    for case in 0..20 {
        let m = rng.random_range(1..=2usize);
        let n = rng.random_range(1..=3usize);
        let r = rng.random_range(1..=4usize);
        let vectors: Vec<Vec<Rat>> = (0..n).map(|_| (0..m).map(|_| ratio(rng.random_range(-4..=4), 4)).collect()).collect();
        let seq = ok(SignedVectorSequence::new(m, vectors))?;
        let delta = ratio(rng.random_range(0..=4), 4);
        let signs: Vec<i8> = (0..n * r).map(|_| if rng.random_bool(0.5) { 1 } else { -1 }).collect();
        let block = ok(build_block_instance(&seq, r))?;
        let mut in_k = true;
        for k in 1..=n {
            in_k &= ok(in_body_k(&block_prefix_point(&block, &signs, k * r), r, m, &delta))?.inside;
        }
        let sdp = ok(sdp_prefix_discrepancy(&seq, &ok(signs_to_sdp_vectors(&signs, r))?))?;
        let cap = (one() + &delta) * (one() + &delta);
        let small = sdp.value_sq <= cap;
        ensure(in_k == small, || format!("case {case}: in K {in_k} but SDP value^2 {} vs {cap}", sdp.value_sq))?;
        if in_k {
            inside += 1;
        } else {
            outside += 1;
        }
    }
    let r = ok(choose_r(0.5, 4, 2))?;
    let est = ok(gaussian_measure_mc(r, 0.5, 4, 2, 100_000, 10))?;
    ensure(est.fraction <= est.target + est.slack, || {
        format!("r={r}: tail {} > {} + {}", est.fraction, est.target, est.slack)
    })?;
    Ok(format!(
        "identity on 20 colorings ({inside} inside, {outside} outside); r={r}, tail {}/{} vs {:.5} + {:.5}",
        est.exceed, est.samples, est.target, est.slack
    ))
}

fn criterion_11() -> Outcome {
    let mut checked = 0;
    for mode in [Mode::Prefix, Mode::Interval, Mode::OneSidedInterval] {
        for seed in 0..10u64 {
            let n = 3 + seed as usize;
            let m = 1 + seed as usize % 3;
            let seq = ok(gen_random_vectors(m, n, VectorKind::BeckFiala, 300 + seed))?;
            let c = ok(color_brute_force(&seq, mode, 20))?;
            let best = min_disc_oracle(&seq.vectors, mode);
            ensure(c.value == best, || format!("{mode} seed {seed}: brute force {} vs oracle {best}", c.value))?;
            ensure(disc_oracle(&seq.vectors, &c.signs, mode) == best, || format!("{mode} seed {seed}: signs do not attain the value"))?;
            let (f, _) = ok(color_floating(&seq))?;
            let fv = disc_oracle(&seq.vectors, &f.signs, Mode::Prefix);
            ensure(fv <= rat(2 * m as i64), || format!("seed {seed}: floating {fv} > 2m"))?;
            checked += 1;
        }
    }
    Ok(format!("{checked} sequences match the enumerator; floating within 2m"))
}

fn main() {
    let criteria: [Criterion; 11] = [
        ("half-integral max-flow rounding bound", criterion_1),
        ("telescoped max-flow bound", criterion_2),
        ("LP lower bounds", criterion_3),
        ("consistent-order normalization", criterion_4),
        ("half-integral total-flow rounding", criterion_5),
        ("scheduling/discrepancy equivalence", criterion_6),
        ("pairing maker value", criterion_7),
        ("2-sparse and two-permutation colorers", criterion_8),
        ("tree breaker invariants", criterion_9),
        ("block SDP identity and Gaussian tail", criterion_10),
        ("brute-force oracle and floating colorer", criterion_11),
    ];
    let mut failed = 0;
    for (k, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = std::panic::catch_unwind(run).unwrap_or_else(|_| Err("panicked".into()));
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {:>2} PASS  {name}: {detail} ({secs:.1}s)", k + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name}: {why} ({secs:.1}s)", k + 1);
            }
        }
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
