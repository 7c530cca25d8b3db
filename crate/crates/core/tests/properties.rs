use num_traits::{Signed, Zero};
use proptest::prelude::*;

use flowdisc::game::{play_game, GameState, GreedyMaker, PairingMaker, Player, RandomBreaker, Strategy};
use flowdisc::maxflow::{lp_value, quantize_dyadic, solve_assignment_lp, solve_min_t, split_to_pair_instance, FractionalAssignment};
use flowdisc::model::{gen_random_instance, RandomInstanceParams, SchedulingInstance};
use flowdisc::prefix::{color_floating, discrepancy_of, gen_random_vectors, Colorer, Mode, VectorKind};
use flowdisc::rational::{ceil_log2, is_integer, one, pow2, rat, ratio, zero, Rat};
use flowdisc::totalflow::{
    build_time_indexed_lp, default_horizon, measure_alpha, normalize_consistent_order, quantize_dyadic_time, random_solution,
    split_jobs_instance,
};

fn instance(n: usize, m: usize, seed: u64) -> SchedulingInstance {
    let params = RandomInstanceParams {
        n,
        m,
        p_range: (1, 4),
        r_range: (0, 4),
        infinity_prob: 0.2,
    };
    gen_random_instance(&params, seed).unwrap()
}

fn level_for(n: usize) -> u32 {
    ceil_log2(&rat(n.max(2) as i64)) as u32
}

/// Random fractional rows over the allowed machines with weights 1..=7.
fn fractional(inst: &SchedulingInstance, weights: &[u8]) -> FractionalAssignment {
    let mut w = weights.iter().cycle();
    let x: Vec<Vec<Rat>> = (0..inst.n())
        .map(|j| {
            let raw: Vec<i64> = (0..inst.m).map(|i| if inst.p(i, j).is_some() { i64::from(*w.next().unwrap() % 7) } else { 0 }).collect();
            let mut raw = raw;
            if raw.iter().all(|&v| v == 0) {
                let i = (0..inst.m).find(|&i| inst.p(i, j).is_some()).unwrap();
                raw[i] = 1;
            }
            let total: i64 = raw.iter().sum();
            raw.iter().map(|&v| ratio(v, total)).collect()
        })
        .collect();
    let t = lp_value(inst, &x).unwrap();
    FractionalAssignment { x, t }
}

fn units(inst: &SchedulingInstance, y: &flowdisc::totalflow::TimeIndexedSolution, i: usize, j: usize) -> Rat {
    inst.p(i, j).map_or_else(zero, |p| y.total(i, j) / p)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn maxflow_quantize_stays_on_grid(n in 1usize..8, m in 1usize..4, seed in any::<u64>(), weights in prop::collection::vec(any::<u8>(), 1..40)) {
        let inst = instance(n, m, seed);
        let fa = fractional(&inst, &weights);
        let ell = level_for(n);
        let q = quantize_dyadic(&inst, &fa, ell).unwrap();
        let step = pow2(-(ell as i64));
        for (row, old) in q.x.iter().zip(&fa.x) {
            prop_assert_eq!(row.iter().sum::<Rat>(), one());
            for (v, o) in row.iter().zip(old) {
                prop_assert!(!v.is_negative());
                prop_assert!(is_integer(&(v / &step)));
                prop_assert!((v - o).abs() < step);
            }
        }
        prop_assert!(q.t <= &fa.t + inst.p_max());
    }

    #[test]
    fn pair_split_maps_back(n in 1usize..7, m in 1usize..4, seed in any::<u64>(), weights in prop::collection::vec(any::<u8>(), 1..40)) {
        let inst = instance(n, m, seed);
        let h = level_for(n);
        let q = quantize_dyadic(&inst, &fractional(&inst, &weights), h).unwrap();
        let (pairs, back, half) = split_to_pair_instance(&inst, &q, h).unwrap();
        prop_assert_eq!(pairs.n(), n << (h - 1));
        prop_assert_eq!(back.half_solution(n, m), q.x);
        prop_assert!(half.x.iter().flatten().all(|v| v.is_zero() || *v == ratio(1, 2) || *v == one()));
    }

    #[test]
    fn totalflow_quantize_keeps_jobs_whole(n in 1usize..7, m in 1usize..4, seed in any::<u64>()) {
        let inst = instance(n, m, seed);
        let y = random_solution(&inst, default_horizon(&inst) + 2, false, seed).unwrap();
        let ell = level_for(n);
        let q = quantize_dyadic_time(&inst, &y, ell).unwrap();
        q.check(&inst).unwrap();
        let step = pow2(-(ell as i64));
        for j in 0..n {
            let mut sum = zero();
            for i in 0..m {
                let (u, u0) = (units(&inst, &q, i, j), units(&inst, &y, i, j));
                prop_assert!(is_integer(&(&u / &step)));
                prop_assert!((&u - &u0).abs() < step);
                sum += u;
            }
            prop_assert_eq!(sum, one());
        }
        prop_assert!(q.cost_auxiliary(&inst) <= y.cost_auxiliary(&inst));
    }

    #[test]
    fn job_split_round_trips(n in 1usize..6, m in 1usize..4, seed in any::<u64>(), h in 1u32..4) {
        let inst = instance(n, m, seed);
        let y = random_solution(&inst, default_horizon(&inst) + 2, false, seed).unwrap();
        let q = quantize_dyadic_time(&inst, &y, h).unwrap();
        let (split, back) = split_jobs_instance(&inst, h).unwrap();
        let z = back.split(&inst, &q).unwrap();
        z.check(&split).unwrap();
        prop_assert_eq!(back.merge(&z).y, q.y);
        for c in 0..split.n() {
            for i in 0..m {
                let u = units(&split, &z, i, c);
                prop_assert!(u.is_zero() || u == ratio(1, 2) || u == one());
            }
        }
    }

    #[test]
    fn normalization_preserves_totals_cost_and_alpha(n in 1usize..8, m in 1usize..4, seed in any::<u64>()) {
        let inst = instance(n, m, seed);
        let y = random_solution(&inst, default_horizon(&inst) + 2, false, seed).unwrap();
        let z = normalize_consistent_order(&inst, &y).unwrap();
        z.check(&inst).unwrap();
        for i in 0..m {
            for j in 0..n {
                prop_assert_eq!(y.total(i, j), z.total(i, j));
            }
        }
        prop_assert_eq!(y.cost_auxiliary(&inst), z.cost_auxiliary(&inst));
        prop_assert_eq!(measure_alpha(&inst, &y).alpha, measure_alpha(&inst, &z).alpha);
        prop_assert_eq!(normalize_consistent_order(&inst, &z).unwrap(), z);
    }

    #[test]
    fn colorers_report_their_own_value(n in 1usize..11, m in 1usize..4, seed in any::<u64>(), which in 0usize..3, mode in 0usize..3) {
        let seq = gen_random_vectors(m, n, VectorKind::BeckFiala, seed).unwrap();
        let colorer = [Colorer::default(), Colorer::Greedy, Colorer::Floating][which];
        let mode = [Mode::Prefix, Mode::Interval, Mode::OneSidedInterval][mode];
        let c = colorer.color(m, &seq.vectors, mode).unwrap();
        prop_assert_eq!(c.signs.len(), n);
        prop_assert_eq!(c.value, discrepancy_of(m, &seq.vectors, &c.signs, mode).unwrap().value);
    }

    #[test]
    fn floating_keeps_at_most_m_fractional(n in 1usize..14, m in 1usize..5, seed in any::<u64>()) {
        let seq = gen_random_vectors(m, n, VectorKind::BeckFiala, seed).unwrap();
        let (c, trace) = color_floating(&seq).unwrap();
        prop_assert!(trace.max_fractional <= m);
        prop_assert!(c.value <= rat(2 * m as i64));
    }

    #[test]
    fn brute_force_beats_greedy(n in 1usize..11, m in 1usize..4, seed in any::<u64>()) {
        let seq = gen_random_vectors(m, n, VectorKind::BeckFiala, seed).unwrap();
        let best = Colorer::default().color(m, &seq.vectors, Mode::Prefix).unwrap();
        let greedy = Colorer::Greedy.color(m, &seq.vectors, Mode::Prefix).unwrap();
        prop_assert!(best.value <= greedy.value);
    }

    #[test]
    fn games_replay_to_the_same_state(
        raw in prop::collection::vec(prop_oneof![-4i64..=-1, 1i64..=4], 1..14),
        seed in any::<u64>(),
        greedy in any::<bool>(),
        maker_starts in any::<bool>(),
        waits in any::<[bool; 2]>(),
    ) {
        let values: Vec<Rat> = raw.iter().map(|&v| ratio(v, 4)).collect();
        let mut maker: Box<dyn Strategy> = if greedy { Box::new(GreedyMaker) } else { Box::new(PairingMaker::relaxed()) };
        let mut breaker = RandomBreaker::new(seed, 0.3);
        let starter = if maker_starts { Player::Maker } else { Player::Breaker };
        let out = play_game(values.clone(), maker.as_mut(), &mut breaker, starter, waits).unwrap();
        let replayed = GameState::replay(values, starter, waits, &out.state.history).unwrap();
        prop_assert_eq!(&replayed, &out.state);
        prop_assert!(out.payoff >= out.state.max_abs_prefix());
        prop_assert_eq!(out.trace.len(), out.state.history.len());
    }

    #[test]
    fn assignment_lp_optimum_is_tight(n in 1usize..6, m in 1usize..4, seed in any::<u64>()) {
        let inst = instance(n, m, seed);
        let min = solve_min_t(&inst).unwrap();
        prop_assert!(solve_assignment_lp(&inst, &min.t_star).unwrap().is_some());
        prop_assert!(solve_assignment_lp(&inst, &(&min.t_star + one())).unwrap().is_some());
        if min.infeasible_below.is_positive() {
            prop_assert!(solve_assignment_lp(&inst, &min.infeasible_below).unwrap().is_none());
        }
        prop_assert!(lp_value(&inst, &min.fa.x).unwrap() <= min.t_star);
    }

    #[test]
    fn time_indexed_lp_solution_is_feasible(n in 1usize..5, m in 1usize..3, seed in any::<u64>()) {
        let inst = instance(n, m, seed);
        let (opt, y) = build_time_indexed_lp(&inst, default_horizon(&inst)).unwrap().solve().unwrap();
        y.check(&inst).unwrap();
        prop_assert_eq!(y.cost_time_indexed(&inst), opt);
    }

    #[test]
    fn instances_round_trip_through_json(n in 1usize..8, m in 1usize..4, seed in any::<u64>()) {
        let inst = instance(n, m, seed);
        prop_assert_eq!(SchedulingInstance::from_json(&inst.to_json()).unwrap(), inst);
    }
}
