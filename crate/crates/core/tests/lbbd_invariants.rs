use num_rational::Ratio;
use proptest::prelude::*;
use wildfire_lbbd::firedyn::evaluate;
use wildfire_lbbd::instance::{generate_grid, random_instance, small_preset};
use wildfire_lbbd::lbbd::{solve_lbbd_with_pool, CutPool, CutStrength, LbbdOptions, Mode};
use wildfire_lbbd::milp::Status;
use wildfire_lbbd::Instance;

fn check(inst: &Instance, mode: Mode, strength: CutStrength) -> Result<(), TestCaseError> {
    let mut pool = CutPool::new();
    let opts = LbbdOptions {
        mode,
        strength,
        ..Default::default()
    };
    let r = solve_lbbd_with_pool(inst, &opts, &mut pool).unwrap();
    prop_assert_eq!(r.status, Status::Optimal);
    prop_assert!(r.master_bounds.windows(2).all(|w| w[0] <= w[1] + 1e-6));
    if let Some(last) = r.master_bounds.last() {
        prop_assert!(*last <= f64::from(r.objective) + 1e-6);
    }
    let d = evaluate(inst, &r.plan).unwrap();
    prop_assert!(d.is_feasible());
    let theta = pool.theta(&r.plan, inst.node_count());
    for n in 0..inst.node_count() {
        let exact = Ratio::from_integer(i64::from(d.is_unprotected(n)));
        prop_assert_eq!(theta[n], exact, "node {}", n);
    }
    prop_assert!(pool.admits(&r.plan));
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn random_instances(seed in any::<u64>()) {
        let inst = random_instance(seed);
        for mode in [Mode::Iterative, Mode::BranchAndCheck] {
            for strength in [CutStrength::Strengthened, CutStrength::Basic] {
                check(&inst, mode, strength)?;
            }
        }
    }
}

#[test]
fn grid_presets() {
    for id in [0, 4, 8, 12] {
        let inst = generate_grid(&small_preset(id, 5).unwrap()).unwrap();
        check(&inst, Mode::Iterative, CutStrength::Strengthened).unwrap();
        check(&inst, Mode::BranchAndCheck, CutStrength::Strengthened).unwrap();
    }
}
