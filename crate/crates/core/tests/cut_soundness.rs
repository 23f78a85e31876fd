mod common;

use common::{check_all_plan_cuts, cut_defect, Enumerated};
use wildfire_lbbd::instance::random_instance;
use wildfire_lbbd::lbbd::{solve_lbbd_with_pool, CutPool, CutStrength, LbbdOptions, Mode};

#[test]
fn cuts_from_every_plan_are_valid_and_tight() {
    let (mut optimality, mut feasibility) = (0, 0);
    for seed in 0..150 {
        let inst = random_instance(seed);
        for strength in [CutStrength::Strengthened, CutStrength::Basic] {
            let check = check_all_plan_cuts(&inst, strength);
            assert!(check.defects.is_empty(), "seed {seed}: {:?}", check.defects);
            optimality += check.optimality;
            feasibility += check.feasibility;
        }
    }
    assert!(
        optimality > 1000 && feasibility > 100,
        "{optimality} {feasibility}"
    );
}

#[test]
fn pooled_cuts_are_valid() {
    for seed in 1000..1100 {
        let inst = random_instance(seed);
        let all = Enumerated::new(&inst);
        for mode in [Mode::Iterative, Mode::BranchAndCheck] {
            let mut pool = CutPool::new();
            let opts = LbbdOptions {
                mode,
                ..Default::default()
            };
            solve_lbbd_with_pool(&inst, &opts, &mut pool).unwrap();
            for cut in pool.cuts() {
                assert_eq!(cut_defect(cut, None, &all), None, "seed {seed}");
            }
        }
    }
}
