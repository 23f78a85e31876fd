//! Rolling-horizon heuristic: decide one period at a time.
//!
//! For period `k` the later periods get no resources, the earlier ones are
//! fixed to the choices already made, and the exact engine picks the
//! placements of period `k`. All steps share one cut pool.

use std::time::{Duration, Instant};

use crate::firedyn::{self, InterdictionPlan};
use crate::instance::Instance;
use crate::milp::Status;

use super::cuts::CutPool;
use super::engine::{solve_lbbd_with_pool, CutStats, LbbdError, LbbdOptions, SolveReport};
use super::master::PeriodFix;

#[derive(Debug, Clone, PartialEq)]
pub struct GreedyReport {
    pub plan: InterdictionPlan,
    pub objective: u32,
    pub stats: CutStats,
    /// One report per period.
    pub steps: Vec<SolveReport>,
    /// Whether every step was solved to optimality.
    pub steps_optimal: bool,
    pub wall_time: Duration,
}

/// Runs the heuristic. `options.fix` and `options.warm_start` are ignored;
/// the time limit is shared out evenly over the remaining periods.
pub fn solve_greedy(instance: &Instance, options: &LbbdOptions) -> Result<GreedyReport, LbbdError> {
    let started = Instant::now();
    let deadline = options
        .deadline
        .or_else(|| options.time_limit.map(|d| started + d));
    let periods = instance.periods().len();
    let mut pool = CutPool::new();
    let mut plan = InterdictionPlan::new();
    let mut stats = CutStats::default();
    let mut steps = Vec::with_capacity(periods);
    for k in 0..periods {
        let capacity = instance
            .capacity()
            .iter()
            .enumerate()
            .map(|(j, &a)| if j <= k { a } else { 0 })
            .collect();
        let step = instance
            .with_capacity(capacity)
            .expect("same number of periods");
        let step_deadline = deadline.map(|d| {
            let left = d.saturating_duration_since(Instant::now());
            Instant::now() + left / (periods - k) as u32
        });
        let opts = LbbdOptions {
            deadline: step_deadline,
            time_limit: None,
            warm_start: None,
            fix: PeriodFix {
                periods: k,
                plan: plan.clone(),
            },
            ..options.clone()
        };
        let report = solve_lbbd_with_pool(&step, &opts, &mut pool)?;
        stats.absorb(&report.stats);
        plan = report.plan.clone();
        steps.push(report);
    }
    let objective = firedyn::evaluate(instance, &plan)?
        .objective()
        .value()
        .expect("every step returns a feasible plan");
    Ok(GreedyReport {
        plan,
        objective,
        stats,
        steps_optimal: steps.iter().all(|s| s.status == Status::Optimal),
        steps,
        wall_time: started.elapsed(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lbbd::engine::solve_lbbd;
    use crate::netgraph::{Arc, Network};

    #[test]
    fn single_period_is_exact() {
        let spec = crate::instance::GridSpec {
            rows: 4,
            cols: 4,
            ignition: (2, 2),
            ..crate::instance::small_preset(0, 11).unwrap()
        };
        let inst = crate::instance::generate_grid(&spec).unwrap();
        let one = inst.with_capacity(vec![inst.total_capacity(), 0]).unwrap();
        let g = solve_greedy(&one, &LbbdOptions::default()).unwrap();
        let e = solve_lbbd(&one, &LbbdOptions::default()).unwrap();
        assert_eq!(g.objective, e.objective);
    }

    #[test]
    fn greedy_is_feasible_and_no_better_than_exact() {
        // Two ignition-adjacent branches; the second period can only help
        // the far branch.
        let net = Network::new(
            5,
            vec![
                Arc::new(0, 1, 5),
                Arc::new(1, 2, 5),
                Arc::new(0, 3, 20),
                Arc::new(3, 4, 5),
            ],
        )
        .unwrap();
        let inst = Instance::new("fork", net, vec![0], 40, 50, vec![(4, 1), (18, 1)]).unwrap();
        let g = solve_greedy(&inst, &LbbdOptions::default()).unwrap();
        let e = solve_lbbd(&inst, &LbbdOptions::default()).unwrap();
        assert!(firedyn::evaluate(&inst, &g.plan).unwrap().is_feasible());
        assert!(g.objective >= e.objective);
        assert_eq!(g.steps.len(), 2);
        assert!(g.steps_optimal);
    }
}
