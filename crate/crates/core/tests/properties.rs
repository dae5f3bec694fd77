use std::collections::BTreeMap;

use proptest::prelude::*;

use locpack::classic::{bounded_best_fit, first_fit, first_fit_decreasing, replay_bbf};
use locpack::metrics::colour_spans;
use locpack::online::{audit_levels, run_online, LevelScheme, OnlineAlgorithm, RegionRule, ThresholdScheme};
use locpack::oracle::{exact_opt, per_colour_opt};
use locpack::{run_algorithm, validate_packing, Algorithm, BinKind, Instance, Rational, RunParams};

const DEN: u128 = 64;

fn instance(max_n: usize, max_m: u32, min_num: u128) -> impl Strategy<Value = Instance> {
    (1..=max_m).prop_flat_map(move |m| {
        prop::collection::vec((min_num..=DEN, 1..=m), 1..=max_n).prop_map(move |v| {
            Instance::from_sizes(m, v.into_iter().map(|(s, c)| (Rational::frac(s, DEN), c))).unwrap()
        })
    })
}

fn eps_pow() -> impl Strategy<Value = u32> {
    2u32..=4
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn replaying_a_packing_costs_at_most_k_extra(inst in instance(14, 3, 1), k in 1usize..=3) {
        let p = first_fit(&inst.items, None).unwrap();
        let replay = replay_bbf(&p, k, Vec::new()).unwrap();
        prop_assert!(validate_packing(&replay, &inst).is_valid());
        prop_assert!(replay.total_bins() <= p.total_bins() + k);
    }

    #[test]
    fn classic_packings_are_feasible(inst in instance(20, 3, 1)) {
        for p in [
            first_fit(&inst.items, None).unwrap(),
            first_fit_decreasing(&inst.items).unwrap(),
            bounded_best_fit(&inst.items, Some(2), Vec::new()).unwrap(),
        ] {
            prop_assert!(validate_packing(&p, &inst).is_valid());
            prop_assert!(p.total_bins() >= inst.weight_bound());
        }
    }

    #[test]
    fn level_scheme_invariants(inst in instance(40, 5, 1), j in eps_pow(), ff in any::<bool>(), isolate in any::<bool>()) {
        let eps = Rational::inverse_power_of_two(j);
        let rule = if ff { RegionRule::FirstFit } else { RegionRule::NextFit };
        // items below ε are rejected, so lift every size to at least ε
        let items: Vec<_> = inst.items.iter().cloned().map(|mut e| { e.size = e.size.max(eps); e }).collect();
        let inst = Instance::new(inst.m, items).unwrap();
        let mut alg = LevelScheme::new(eps, rule, isolate).unwrap();
        let (p, trace) = run_online(&mut alg, &inst.items).unwrap();
        prop_assert!(validate_packing(&p, &inst).is_valid());
        prop_assert_eq!(trace.len(), inst.len());

        let audit = audit_levels(&p);
        prop_assert!(audit.partial_bins.values().all(|&n| n <= 1), "{:?}", audit.partial_bins);
        if isolate {
            prop_assert!(audit.max_colour_bins_per_level <= 1);
            prop_assert!(audit.max_colour_shared_bins <= j as usize);
            prop_assert!(audit.average_fill_at_least_third());
            let mut open: BTreeMap<u32, usize> = BTreeMap::new();
            for b in p.bins.iter().filter(|b| b.kind == BinKind::Isolated && b.open) {
                *open.entry(b.items[0].colour).or_default() += 1;
            }
            prop_assert!(open.values().all(|&n| n <= 2));
        }

        // deterministic: the same input gives the same packing
        let mut again = LevelScheme::new(eps, rule, isolate).unwrap();
        let (q, _) = run_online(&mut again, &inst.items).unwrap();
        prop_assert_eq!(p, q);
    }

    #[test]
    fn threshold_weights_and_isolation(inst in instance(30, 4, 1), g in 2u128..=6) {
        let eps = Rational::frac(1, g);
        let items: Vec<_> = inst.items.iter().cloned().map(|mut e| { e.size = e.size.max(eps); e }).collect();
        let inst = Instance::new(inst.m, items).unwrap();
        let mut alg = ThresholdScheme::new(eps).unwrap();
        let (p, _) = run_online(&mut alg, &inst.items).unwrap();
        prop_assert!(validate_packing(&p, &inst).is_valid());
        for c in inst.colours() {
            prop_assert!(alg.weight(c) <= Rational::integer(g + 1));
        }
        for b in p.bins.iter().filter(|b| b.kind == BinKind::Isolated) {
            prop_assert!(b.items.iter().all(|e| e.colour == b.items[0].colour));
        }
        alg.reset();
        prop_assert_eq!(alg.snapshot().total_bins(), 0);
    }

    #[test]
    fn offline_schemes_meet_their_bounds(inst in instance(10, 3, 1), j in eps_pow()) {
        let eps = Rational::inverse_power_of_two(j);
        let opt = exact_opt(&inst.items, 12).unwrap();
        let opt_c = per_colour_opt(&inst, 12).unwrap();
        let params = RunParams { epsilon: Some(eps), ..RunParams::default() };
        let factor = Rational::ONE + eps.mul_int(2);

        let vl = run_algorithm(Algorithm::Vl1eps, &inst, &params).unwrap().packing;
        prop_assert!(validate_packing(&vl, &inst).is_valid());
        prop_assert!(Rational::integer(vl.total_bins() as u128) <= factor.mul_int(opt as u128) + Rational::integer(2));

        let off = run_algorithm(Algorithm::Off17, &inst, &params).unwrap().packing;
        prop_assert!(validate_packing(&off, &inst).is_valid());
        for (c, span) in colour_spans(&off, inst.m) {
            prop_assert!(Rational::integer(span as u128) <= factor.mul_int(opt_c[&c] as u128) + Rational::integer(3));
        }
    }

    #[test]
    fn every_algorithm_is_feasible(inst in instance(8, 2, 16)) {
        let params = RunParams { epsilon: Some(Rational::frac(1, 4)), ..RunParams::default() };
        for algo in Algorithm::ALL {
            let out = run_algorithm(algo, &inst, &params).unwrap();
            prop_assert!(validate_packing(&out.packing, &inst).is_valid(), "{}", algo);
            if let Some(trace) = out.trace {
                prop_assert_eq!(trace.len(), inst.len());
            }
        }
    }
}
