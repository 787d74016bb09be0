//! Invariants of the cost model, the solvers and the mechanisms, checked on
//! random rational instances.

use num_traits::{One, Signed};
use proptest::prelude::*;
use twinpeak_core::experiments::ratio_on;
use twinpeak_core::mechanisms::{m1, m2, median_index, BuiltinMechanism, Side};
use twinpeak_core::model::{
    agent_cost, expected_cost, expected_objective, max_cost, social_cost, CostParams, Instance, Lottery,
    Objective,
};
use twinpeak_core::optimal::{
    default_grid, grid_scan, mc_candidates, optimal_max, optimal_social, sc_candidates,
};
use twinpeak_core::rational::{int, ratio, Rational};
use twinpeak_core::verification::{find_sp_violation, recheck};
use twinpeak_core::Mechanism;

/// Symmetric cost written as distance to the nearer peak; shares no code
/// with the library.
fn nearest_peak_cost(b: &Rational, c: &Rational, x: &Rational, y: &Rational) -> Rational {
    let left = (y - (x - b)).abs();
    let right = (y - (x + b)).abs();
    c + left.min(right)
}

fn rational() -> impl Strategy<Value = Rational> {
    (-200i64..=200, 1i64..=6).prop_map(|(p, q)| ratio(p, q))
}

fn small_positive() -> impl Strategy<Value = Rational> {
    prop_oneof![Just(ratio(1, 2)), Just(int(1)), Just(int(2)), Just(int(3))]
}

fn symmetric_params() -> impl Strategy<Value = CostParams> {
    (small_positive(), small_positive()).prop_map(|(b, c)| CostParams::symmetric(b, c).unwrap())
}

fn any_params() -> impl Strategy<Value = CostParams> {
    (small_positive(), small_positive(), small_positive())
        .prop_map(|(bl, br, c)| CostParams::new(bl, br, c).unwrap())
}

fn instance_with(params: impl Strategy<Value = CostParams>, max_n: usize) -> impl Strategy<Value = Instance> {
    (prop::collection::vec((-20i64..=20, 1i64..=2), 1..=max_n), params).prop_map(|(xs, p)| {
        let raw = xs.into_iter().map(|(a, q)| ratio(a, q)).collect();
        Instance::normalize(raw, p).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn cost_is_at_least_c_with_equality_only_at_peaks(p in any_params(), x in rational(), y in rational()) {
        let cost = agent_cost(&p, &x, &y);
        prop_assert!(&cost >= p.c());
        let at_peak = y == p.left_peak(&x) || y == p.right_peak(&x);
        prop_assert_eq!(&cost == p.c(), at_peak);
    }

    #[test]
    fn symmetric_cost_matches_nearest_peak_oracle(p in symmetric_params(), x in rational(), y in rational()) {
        let b = p.b().unwrap();
        prop_assert_eq!(agent_cost(&p, &x, &y), nearest_peak_cost(b, p.c(), &x, &y));
    }

    #[test]
    fn symmetric_cost_is_reflection_symmetric(p in symmetric_params(), x in rational(), t in rational()) {
        let t = t.abs();
        prop_assert_eq!(agent_cost(&p, &x, &(&x + &t)), agent_cost(&p, &x, &(&x - &t)));
    }

    #[test]
    fn cost_is_lipschitz_up_to_the_jump(p in any_params(), x in rational(), y in rational(), z in rational()) {
        let jump = (p.b_left() - p.b_right()).abs();
        let gap = (agent_cost(&p, &x, &y) - agent_cost(&p, &x, &z)).abs();
        let crosses = (y <= x) != (z <= x);
        let allowance = if crosses { jump } else { int(0) };
        prop_assert!(gap <= (&y - &z).abs() + allowance);
    }

    #[test]
    fn objectives_are_translation_invariant(i in instance_with(any_params(), 6), y in rational(), t in rational()) {
        let moved = i.shifted(&t);
        let y2 = &y + &t;
        prop_assert_eq!(social_cost(&i, &y), social_cost(&moved, &y2));
        prop_assert_eq!(max_cost(&i, &y), max_cost(&moved, &y2));
        let x = i.first();
        prop_assert_eq!(agent_cost(i.params(), x, &y), agent_cost(i.params(), &(x + &t), &y2));
    }

    #[test]
    fn objective_lower_bounds(i in instance_with(any_params(), 6), y in rational()) {
        let n = Rational::from_integer(i.len().into());
        prop_assert!(social_cost(&i, &y) >= i.params().c() * n);
        prop_assert!(&max_cost(&i, &y) >= i.params().c());
    }

    #[test]
    fn point_lottery_is_deterministic_objective(i in instance_with(any_params(), 5), y in rational()) {
        let l = Lottery::point(y.clone());
        prop_assert_eq!(expected_objective(&i, &l, Objective::Social), social_cost(&i, &y));
        prop_assert_eq!(expected_objective(&i, &l, Objective::Max), max_cost(&i, &y));
    }

    #[test]
    fn optimum_never_beaten_by_grid(i in instance_with(symmetric_params(), 5)) {
        let (lo, hi, step) = default_grid(&i);
        for (objective, opt) in [(Objective::Social, optimal_social(&i)), (Objective::Max, optimal_max(&i))] {
            let grid = grid_scan(&i, objective, &lo, &hi, &step).unwrap();
            prop_assert!(opt.value <= grid.value);
            prop_assert!(&grid.value - &opt.value <= step);
            prop_assert_eq!(objective.evaluate(&i, &opt.location), opt.value.clone());
        }
        prop_assert!(sc_candidates(&i).contains(&optimal_social(&i).location));
        prop_assert!(mc_candidates(&i).contains(&optimal_max(&i).location));
    }

    #[test]
    fn asymmetric_optimum_is_the_infimum(i in instance_with(any_params(), 4)) {
        let (lo, hi, step) = default_grid(&i);
        for (objective, opt) in [(Objective::Social, optimal_social(&i)), (Objective::Max, optimal_max(&i))] {
            let grid = grid_scan(&i, objective, &lo, &hi, &step).unwrap();
            // Attained candidates can lose to grid points sitting just right
            // of an agent; the infimum never does.
            let inf = opt.right_limit.as_ref().map_or(opt.value.clone(), |(_, v)| v.clone());
            prop_assert!(inf <= grid.value);
            prop_assert!(inf <= opt.value);
            prop_assert!(&grid.value - &inf <= step);
        }
    }

    #[test]
    fn optimum_is_translation_and_permutation_invariant(
        i in instance_with(any_params(), 5),
        t in rational(),
        rot in 0usize..5,
    ) {
        let moved = i.shifted(&t);
        let (a, b) = (optimal_social(&i), optimal_social(&moved));
        prop_assert_eq!(&a.location + &t, b.location);
        prop_assert_eq!(a.value, b.value);
        let (a, b) = (optimal_max(&i), optimal_max(&moved));
        prop_assert_eq!(&a.location + &t, b.location);
        prop_assert_eq!(a.value, b.value);

        let mut raw = i.raw_locations();
        let len = raw.len();
        raw.rotate_left(rot % len);
        let permuted = Instance::normalize(raw, i.params().clone()).unwrap();
        prop_assert_eq!(optimal_social(&i), optimal_social(&permuted));
        prop_assert_eq!(optimal_max(&i), optimal_max(&permuted));
    }

    #[test]
    fn median_interval_contains_a_social_optimum(i in instance_with(symmetric_params(), 7)) {
        let b = i.params().b().unwrap().clone();
        let xm = &i.locations()[median_index(i.len()).unwrap() - 1];
        let (lo, hi) = (xm - &b, xm + &b);
        let restricted = sc_candidates(&i)
            .into_iter()
            .filter(|y| *y >= lo && *y <= hi)
            .map(|y| social_cost(&i, &y))
            .min()
            .unwrap();
        prop_assert_eq!(restricted, optimal_social(&i).value);
    }

    #[test]
    fn mechanisms_are_anonymous_and_position_invariant(
        i in instance_with(any_params(), 5),
        t in rational(),
        rot in 0usize..5,
    ) {
        let mechs = [
            BuiltinMechanism::M1,
            BuiltinMechanism::M2(Side::Left),
            BuiltinMechanism::M2(Side::Right),
            BuiltinMechanism::KthPeak { k: 1, side: Side::Left },
            BuiltinMechanism::OptSocial,
            BuiltinMechanism::OptMax,
        ];
        let mut raw = i.raw_locations();
        let len = raw.len();
        raw.rotate_left(rot % len);
        raw.reverse();
        let permuted = Instance::normalize(raw, i.params().clone()).unwrap();
        for mech in mechs {
            let out = mech.apply(&i).unwrap();
            prop_assert_eq!(mech.apply(&permuted).unwrap(), out.clone());
            prop_assert_eq!(mech.apply(&i.shifted(&t)).unwrap(), out.shifted(&t));
        }
    }

    #[test]
    fn lottery_shapes(i in instance_with(any_params(), 6)) {
        let l = m1(&i);
        prop_assert_eq!(l.atoms().len(), 2);
        prop_assert!(l.atoms().iter().all(|(_, p)| *p == ratio(1, 2)));
        prop_assert_eq!(&l.atoms()[1].0 - &l.atoms()[0].0, i.params().spread());

        let y = m2(&i, Side::Left).atoms()[0].0.clone();
        prop_assert!(i.locations().iter().all(|x| i.params().left_peak(x) >= y));
        let total: Rational = l.atoms().iter().map(|(_, p)| p.clone()).sum();
        prop_assert!(total.is_one());
    }

    #[test]
    fn single_agent_pays_c(p in any_params(), x in rational()) {
        let i = Instance::normalize(vec![x.clone()], p.clone()).unwrap();
        prop_assert_eq!(&expected_cost(&p, &x, &m1(&i)), p.c());
        prop_assert_eq!(&expected_cost(&p, &x, &m2(&i, Side::Right)), p.c());
    }

    #[test]
    fn ratio_bounds(i in instance_with(symmetric_params(), 6)) {
        let p = i.params().clone();
        let (b, c) = (p.b().unwrap().clone(), p.c().clone());
        let one = int(1);
        let sc = ratio_on(&BuiltinMechanism::M1, &i, Objective::Social).unwrap();
        let mc = ratio_on(&BuiltinMechanism::M1, &i, Objective::Max).unwrap();
        prop_assert!(sc.ratio >= one && sc.ratio <= &one + &b / &c);
        prop_assert!(mc.ratio >= one && mc.ratio <= (&one + &b / &c).max(int(2)));
        prop_assert_eq!(&sc.mech_value / &sc.opt_value, sc.ratio.clone());

        let m2l = BuiltinMechanism::M2(Side::Left);
        let sc2 = ratio_on(&m2l, &i, Objective::Social).unwrap();
        let n = Rational::from_integer(i.len().into());
        prop_assert!(sc2.ratio >= one);
        if i.len() > 3 {
            prop_assert!(sc2.ratio <= &n - &one);
        }
        if b >= c {
            let mc2 = ratio_on(&m2l, &i, Objective::Max).unwrap();
            prop_assert!(mc2.ratio <= &one + (&b * int(2)) / &c);
        }
    }

    #[test]
    fn ratios_ignore_translation_and_order(i in instance_with(any_params(), 5), t in rational()) {
        let mut raw = i.raw_locations();
        raw.reverse();
        let other = Instance::normalize(raw, i.params().clone()).unwrap().shifted(&t);
        for objective in [Objective::Social, Objective::Max] {
            let a = ratio_on(&BuiltinMechanism::M1, &i, objective).unwrap();
            let b = ratio_on(&BuiltinMechanism::M1, &other, objective).unwrap();
            prop_assert_eq!(a.ratio, b.ratio);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn truthful_mechanisms_have_no_violation(i in instance_with(symmetric_params(), 3)) {
        for mech in [BuiltinMechanism::M1, BuiltinMechanism::M2(Side::Left), BuiltinMechanism::M2(Side::Right)] {
            prop_assert_eq!(find_sp_violation(&mech, &i), Ok(None));
        }
    }

    #[test]
    fn reported_violations_recheck(i in instance_with(symmetric_params(), 3), k in 1usize..=3) {
        let mech = BuiltinMechanism::KthPeak { k: k.min(i.len()), side: Side::Right };
        if let Some(report) = find_sp_violation(&mech, &i).unwrap() {
            prop_assert_eq!(recheck(&mech, &report), Ok(true));
            let d = report.deviation().unwrap();
            let a = d.deviators[0];
            prop_assert!(d.cost_after[&a] < d.cost_before[&a]);
        }
    }
}
