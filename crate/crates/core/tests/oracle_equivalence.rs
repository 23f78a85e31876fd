use wildfire_lbbd::firedyn::{brute_force, evaluate, for_each_plan};
use wildfire_lbbd::instance::random_instance;
use wildfire_lbbd::lbbd::{solve_greedy, solve_lbbd, LbbdOptions, Mode};
use wildfire_lbbd::milp::{
    build_direct_mip, solve_external, solve_reference, verify_solution, ExternalConfig,
    SolutionClaim, Status,
};

fn options(mode: Mode) -> LbbdOptions {
    LbbdOptions {
        mode,
        ..Default::default()
    }
}

#[test]
fn lbbd_modes_match_brute_force() {
    for seed in 0..200 {
        let inst = random_instance(seed);
        let oracle = brute_force(&inst, 1_000_000).unwrap().objective;
        for mode in [Mode::Iterative, Mode::BranchAndCheck] {
            let r = solve_lbbd(&inst, &options(mode)).unwrap();
            assert_eq!(r.status, Status::Optimal, "seed {seed} {mode:?}");
            assert_eq!(r.objective, oracle, "seed {seed} {mode:?}");
            assert_eq!(r.lower_bound, oracle);
            let claim = SolutionClaim::from_plan(&r.plan, Some(r.objective));
            assert!(verify_solution(&inst, &claim).is_valid());
        }
        let g = solve_greedy(&inst, &LbbdOptions::default()).unwrap();
        assert!(g.objective >= oracle, "seed {seed}");
        if inst.periods().len() == 1 {
            assert_eq!(g.objective, oracle, "seed {seed}");
        }
    }
}

#[test]
fn warm_start_never_changes_the_optimum() {
    for seed in 300..340 {
        let inst = random_instance(seed);
        let oracle = brute_force(&inst, 1_000_000).unwrap().objective;
        let mut starts = Vec::new();
        for_each_plan(&inst, 1_000_000, |p| {
            if evaluate(&inst, p).unwrap().is_feasible() {
                starts.push(p.clone());
            }
        })
        .unwrap();
        for start in starts.into_iter().step_by(3) {
            for mode in [Mode::Iterative, Mode::BranchAndCheck] {
                let opts = LbbdOptions {
                    warm_start: Some(start.clone()),
                    ..options(mode)
                };
                assert_eq!(solve_lbbd(&inst, &opts).unwrap().objective, oracle);
            }
        }
    }
}

#[test]
fn direct_mip_reference_backend_matches_brute_force() {
    for seed in 0..40 {
        let inst = random_instance(seed);
        let oracle = brute_force(&inst, 1_000_000).unwrap().objective;
        let (model, layout) = build_direct_mip(&inst).unwrap();
        let r = solve_reference(&model, None, &Default::default()).unwrap();
        assert_eq!(r.status, Status::Optimal);
        assert_eq!(r.objective.unwrap().round() as u32, oracle, "seed {seed}");
        let plan = layout.plan(&inst, &r.values);
        let d = evaluate(&inst, &plan).unwrap();
        assert_eq!(d.objective().value(), Some(oracle), "seed {seed}");
    }
}

/// Runs only when an external solver is configured in the environment.
#[test]
fn direct_mip_external_backend_matches_brute_force() {
    let Some(config) = ExternalConfig::from_env().unwrap() else {
        eprintln!("no external solver configured; skipped");
        return;
    };
    for seed in 0..25 {
        let inst = random_instance(seed);
        let oracle = brute_force(&inst, 1_000_000).unwrap().objective;
        let (model, layout) = build_direct_mip(&inst).unwrap();
        let r = solve_external(&model, &config, None).unwrap();
        assert_eq!(r.status, Status::Optimal);
        assert_eq!(r.objective.unwrap().round() as u32, oracle, "seed {seed}");
        let claim = SolutionClaim {
            placements: layout
                .plan(&inst, &r.values)
                .placements()
                .copied()
                .collect(),
            objective: Some(oracle),
            arrivals: None,
            unprotected: Some(layout.unprotected(&r.values)),
        };
        let report = verify_solution(&inst, &claim);
        assert!(report.is_valid(), "seed {seed}: {report:?}");
    }
}
