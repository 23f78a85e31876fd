use proptest::prelude::*;
use wildfire_lbbd::firedyn::{brute_force, evaluate, for_each_plan, InterdictionPlan};
use wildfire_lbbd::instance::{generate_grid, preprocess, random_instance, small_preset};
use wildfire_lbbd::netgraph::UNREACHABLE;
use wildfire_lbbd::Instance;

fn plans(inst: &Instance) -> Vec<InterdictionPlan> {
    let mut out = Vec::new();
    for_each_plan(inst, 100_000, |p| out.push(p.clone())).unwrap();
    out
}

/// Arrival times by Bellman-Ford over hand-slowed arcs.
fn slowed_arrivals(inst: &Instance, plan: &InterdictionPlan) -> Vec<i64> {
    let (spread, root) = inst.spread_network();
    let n = spread.node_count();
    let mut d = vec![UNREACHABLE; n];
    d[root] = 0;
    for _ in 0..n {
        for a in spread.arcs() {
            let hosted = a.tail < inst.node_count() && plan.hosts(a.tail);
            let w = a.weight + if hosted { inst.delta() } else { 0 };
            if d[a.tail] != UNREACHABLE && d[a.tail] + w < d[a.head] {
                d[a.head] = d[a.tail] + w;
            }
        }
    }
    d.truncate(inst.node_count());
    d
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn arrivals_match_slowed_bellman_ford(seed in any::<u64>()) {
        let inst = random_instance(seed);
        for plan in plans(&inst) {
            let d = evaluate(&inst, &plan).unwrap();
            prop_assert_eq!(d.arrivals(), &slowed_arrivals(&inst, &plan)[..]);
            for n in 0..inst.node_count() {
                prop_assert_eq!(d.is_unprotected(n), d.arrival(n) < inst.psi());
            }
            for p in plan.placements() {
                let late = d.arrival(p.node) < p.time;
                prop_assert_eq!(late, d.violations().contains(p));
            }
        }
    }

    #[test]
    fn adding_a_placement_never_speeds_the_fire(seed in any::<u64>()) {
        let inst = random_instance(seed);
        let all = plans(&inst);
        for small in &all {
            let base = evaluate(&inst, small).unwrap();
            for big in all.iter().filter(|b| b.len() == small.len() + 1) {
                if !small.placements().all(|p| big.contains(p.node, p.time)) {
                    continue;
                }
                let more = evaluate(&inst, big).unwrap();
                for n in 0..inst.node_count() {
                    prop_assert!(more.arrival(n) >= base.arrival(n));
                }
            }
        }
    }

    #[test]
    fn preprocessing_keeps_the_optimum(seed in any::<u64>()) {
        let inst = random_instance(seed);
        let (reduced, report) = preprocess(&inst).unwrap();
        prop_assert_eq!(report.kept.len() + report.removed.len(), inst.node_count());
        for &v in &report.removed {
            prop_assert!(report.base_arrivals[v] >= inst.psi());
        }
        let a = brute_force(&inst, 100_000).unwrap().objective;
        let b = brute_force(&reduced, 100_000).unwrap().objective;
        prop_assert_eq!(a, b);
    }
}

#[test]
fn preprocessing_grid_presets_keeps_unprotected_set() {
    for id in [0, 8, 16] {
        let inst = generate_grid(&small_preset(id, 1).unwrap()).unwrap();
        let (reduced, report) = preprocess(&inst).unwrap();
        let before = evaluate(&inst, &InterdictionPlan::new()).unwrap();
        let after = evaluate(&reduced, &InterdictionPlan::new()).unwrap();
        let lifted: Vec<_> = after
            .unprotected()
            .iter()
            .map(|&v| report.kept[v])
            .collect();
        assert_eq!(before.unprotected(), &lifted[..]);
        assert!(reduced.node_count() < inst.node_count());
    }
}
