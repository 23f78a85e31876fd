#![allow(dead_code)]

use num_rational::Ratio;
use wildfire_lbbd::firedyn::{evaluate, for_each_plan, FireDynamics, InterdictionPlan};
use wildfire_lbbd::lbbd::{callback, BendersCut, CutKind, CutStrength};
use wildfire_lbbd::Instance;

pub struct Enumerated {
    pub plans: Vec<(InterdictionPlan, FireDynamics)>,
}

impl Enumerated {
    pub fn new(inst: &Instance) -> Self {
        let mut plans = Vec::new();
        for_each_plan(inst, 1_000_000, |p| {
            plans.push((p.clone(), evaluate(inst, p).unwrap()));
        })
        .unwrap();
        Self { plans }
    }
}

/// Why a cut fails, if it does.
pub fn cut_defect(
    cut: &BendersCut,
    source: Option<&InterdictionPlan>,
    all: &Enumerated,
) -> Option<String> {
    let zero = Ratio::from_integer(0);
    let one = Ratio::from_integer(1);
    match cut.kind {
        CutKind::Optimality { node } => {
            if let Some(src) = source {
                if cut.bound_at(src) != one {
                    return Some(format!("{cut} not tight at {src:?}"));
                }
            }
            for (plan, d) in all.plans.iter().filter(|(_, d)| d.is_feasible()) {
                let theta = if d.is_unprotected(node) { one } else { zero };
                if !cut.admits(plan, theta) {
                    return Some(format!("{cut} cuts off feasible {plan:?}"));
                }
            }
        }
        CutKind::Feasibility { .. } => {
            if let Some(src) = source {
                if cut.admits(src, zero) {
                    return Some(format!("{cut} does not exclude {src:?}"));
                }
            }
            for (plan, _) in all.plans.iter().filter(|(_, d)| d.is_feasible()) {
                if !cut.admits(plan, zero) {
                    return Some(format!("{cut} excludes feasible {plan:?}"));
                }
            }
        }
    }
    None
}

#[derive(Debug, Default)]
pub struct CutCheck {
    pub defects: Vec<String>,
    pub optimality: usize,
    pub feasibility: usize,
}

/// Generates the callback cuts of every enumerated plan (theta all zero)
/// and checks each one against every plan.
pub fn check_all_plan_cuts(inst: &Instance, strength: CutStrength) -> CutCheck {
    let all = Enumerated::new(inst);
    let theta = vec![0.0; inst.node_count()];
    let mut check = CutCheck::default();
    for (plan, _) in &all.plans {
        let (_, cuts) = callback(inst, plan, &theta, strength).unwrap();
        for cut in &cuts {
            match cut.kind {
                CutKind::Optimality { .. } => check.optimality += 1,
                CutKind::Feasibility { .. } => check.feasibility += 1,
            }
            if let Some(d) = cut_defect(cut, Some(plan), &all) {
                check.defects.push(d);
            }
        }
    }
    check
}
