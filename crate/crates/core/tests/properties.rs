use proptest::prelude::*;

use ivt::adds::{global_stability, local_stability, steady_states, AddsSpec, Quotient, Variant};
use ivt::dynamics::{ivt_orbit, OrbitLimits};
use ivt::ivt::{digits_of, rule_count, value_of};
use ivt::odpe::build_topology;
use ivt::{Base, Ivt, IvtIndex, LocalRule, Value};

fn base_and_rule(max_p: u32) -> impl Strategy<Value = (u32, u64)> {
    (2..=max_p).prop_flat_map(|p| {
        let count = rule_count(Base::new(p).unwrap(), 1).unwrap();
        (Just(p), 0..count)
    })
}

proptest! {
    #[test]
    fn codec_round_trips(p in 2u32..=255, x in any::<u64>()) {
        let base = Base::new(p).unwrap();
        let d = digits_of(x, base);
        prop_assert_eq!(value_of(base, d.digits()).unwrap(), x);
    }

    #[test]
    fn digits_are_bounded_and_trimmed(p in 2u32..=40, x in any::<u64>()) {
        let d = digits_of(x, Base::new(p).unwrap());
        prop_assert!(d.digits().iter().all(|&g| u32::from(g) < p));
        prop_assert!(d.digits().len() == 1 || d.digits()[0] != 0);
        prop_assert_eq!(d.digits().len() as u32, Base::new(p).unwrap().digit_len(x));
    }

    #[test]
    fn rule_index_round_trips(p in 2u32..=6, k in 1u32..=2, seed in any::<u64>()) {
        let base = Base::new(p).unwrap();
        let Ok(count) = rule_count(base, k) else { return Ok(()); };
        let idx = IvtIndex::new(base, k, seed % count).unwrap();
        let rule = LocalRule::from_index(idx);
        prop_assert_eq!(rule.index(), idx);
        let again = LocalRule::from_table(base, k, rule.table().to_vec()).unwrap();
        prop_assert_eq!(again.index(), idx);
    }

    #[test]
    fn unary_rules_agree((p, j) in base_and_rule(7), x in 0u64..1_000_000) {
        let base = Base::new(p).unwrap();
        let ivt = Ivt::new(base, j).unwrap();
        let rule = LocalRule::from_index(IvtIndex::unary(base, j).unwrap());
        prop_assert_eq!(rule.apply_k(&[x]).unwrap(), ivt.apply(x).unwrap());
    }

    #[test]
    fn application_preserves_positions((p, j) in base_and_rule(7), x in 0u64..1_000_000) {
        let base = Base::new(p).unwrap();
        let ivt = Ivt::new(base, j).unwrap();
        let y = ivt.apply(x).unwrap();
        let dx = digits_of(x, base);
        let dy = digits_of(y, base);
        // Leading zeros may drop, never digits added; aligned from the right.
        prop_assert!(dy.len() <= dx.len());
        for (i, &d) in dx.digits().iter().rev().enumerate() {
            let got = dy.digits().iter().rev().nth(i).copied().unwrap_or(0);
            prop_assert_eq!(got, ivt.image(d));
        }
    }

    #[test]
    fn pure_orbits_are_eventually_periodic((p, j) in base_and_rule(7), start in 0u64..100_000) {
        let base = Base::new(p).unwrap();
        let ivt = Ivt::new(base, j).unwrap();
        let o = ivt_orbit(&ivt, start, OrbitLimits::default()).unwrap();
        prop_assert!(o.converged());
        let last = *o.cycle.last().unwrap();
        prop_assert_eq!(ivt.apply(last).unwrap(), o.cycle[0]);
        let len = base.digit_len(start);
        prop_assert!(o.values().all(|v| base.digit_len(v) <= len));
    }

    #[test]
    fn topology_partitions_and_routes((p, j) in base_and_rule(4), n in 1u32..=4) {
        let base = Base::new(p).unwrap();
        let Ok(t) = build_topology(IvtIndex::unary(base, j).unwrap(), n) else {
            return Ok(());
        };
        let ivt = Ivt::new(base, j).unwrap();
        let mut nodes: Vec<Value> = std::iter::once(t.sca)
            .chain(t.stations.iter().copied())
            .chain(t.substations.iter().copied())
            .collect();
        nodes.sort_unstable();
        prop_assert_eq!(nodes, (0..t.node_count).collect::<Vec<_>>());
        for s in &t.stations {
            prop_assert_eq!(ivt.apply(*s).unwrap(), t.sca);
        }
        for u in &t.substations {
            let path = t.route(*u).unwrap();
            prop_assert_eq!(path[0], *u);
            prop_assert!(path.windows(2).all(|w| ivt.apply(w[0]).unwrap() == w[1]));
            prop_assert_eq!(t.layer(*path.last().unwrap()), Some(1));
        }
    }

    #[test]
    fn type_one_orbit_is_affine_image_of_type_two(
        j in 0u64..27, a in 1u64..3, b in 0u64..3, start in 0u64..243,
    ) {
        let base = Base::new(3).unwrap();
        let one = AddsSpec::type_i(base, j, a, b).unwrap();
        let two = one.counterpart();
        prop_assert_eq!(two.variant, Variant::TypeII);
        let ivt = Ivt::new(base, j).unwrap();
        let (mut y1, mut y2) = (start, ivt.apply(start).unwrap());
        for _ in 0..20 {
            y1 = one.step(y1).unwrap();
            prop_assert_eq!(y1, a * y2 + b);
            y2 = two.step(y2).unwrap();
        }
    }

    #[test]
    fn global_quotient_dominates_local(
        variant in prop_oneof![Just(Variant::TypeI), Just(Variant::TypeII)],
        j in 0u64..27, a in 1u64..3, b in 0u64..3,
    ) {
        let base = Base::new(3).unwrap();
        let spec = AddsSpec::new(variant, IvtIndex::unary(base, j).unwrap(), a, b).unwrap();
        let bound = 242;
        let steady = steady_states(&spec, bound).unwrap();
        for &y in &steady.steady_points {
            if y + 2 > bound {
                continue;
            }
            let local = local_stability(&spec, y, 2).unwrap();
            let global = global_stability(&spec, bound).unwrap();
            prop_assert!(global.max_quotient >= local.max_quotient);
        }
    }

    #[test]
    fn quotient_order_matches_floats(a in 0u64..10_000, b in 1u64..10_000, c in 0u64..10_000, d in 1u64..10_000) {
        let (x, y) = (Quotient::new(a, b), Quotient::new(c, d));
        let (fx, fy) = (a as f64 / b as f64, c as f64 / d as f64);
        if (fx - fy).abs() > 1e-9 {
            prop_assert_eq!(x < y, fx < fy);
        }
        prop_assert_eq!(x == y, u128::from(a) * u128::from(d) == u128::from(c) * u128::from(b));
    }
}
