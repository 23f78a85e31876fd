//! Iterative and branch-and-check drivers.

use std::collections::HashSet;
use std::time::{Duration, Instant};

use thiserror::Error;

use crate::firedyn::{self, InterdictionPlan, Placement, PlanError};
use crate::instance::Instance;
use crate::milp::{
    solve_external, solve_reference, BackendResult, ExternalConfig, HookDecision, IncumbentHook,
    MilpError, MilpModel, ReferenceOptions, Status,
};

use super::cuts::{self, BendersCut, CutError, CutPool, CutStrength};
use super::master::{build_master, cut_name, MasterLayout, PeriodFix};

/// A `theta` this far below 1 counts as below 1.
const THETA_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Mode {
    /// Solve the master to optimality, add cuts, repeat.
    Iterative,
    /// One branch-and-bound search; cuts are added at integral solutions.
    #[default]
    BranchAndCheck,
}

#[derive(Debug, Clone, Default)]
pub enum MasterBackend {
    #[default]
    Reference,
    /// Iterative mode only.
    External(ExternalConfig),
}

#[derive(Debug, Clone, Default)]
pub struct LbbdOptions {
    pub mode: Mode,
    pub strength: CutStrength,
    pub backend: MasterBackend,
    pub time_limit: Option<Duration>,
    /// Overrides `time_limit` when set.
    pub deadline: Option<Instant>,
    pub node_limit: Option<u64>,
    /// A feasible plan to start from.
    pub warm_start: Option<InterdictionPlan>,
    pub fix: PeriodFix,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct CutStats {
    /// Cuts added to the pool during the solve, by family.
    pub optimality: usize,
    pub feasibility: usize,
    /// Plans passed to the cut generator.
    pub iterations: usize,
    pub master_solves: usize,
    pub master_nodes: u64,
    pub subproblem_time: Duration,
    pub master_time: Duration,
}

impl CutStats {
    pub fn absorb(&mut self, other: &CutStats) {
        self.optimality += other.optimality;
        self.feasibility += other.feasibility;
        self.iterations += other.iterations;
        self.master_solves += other.master_solves;
        self.master_nodes += other.master_nodes;
        self.subproblem_time += other.subproblem_time;
        self.master_time += other.master_time;
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport {
    /// `Optimal` or `Feasible`.
    pub status: Status,
    pub plan: InterdictionPlan,
    pub objective: u32,
    pub lower_bound: u32,
    pub stats: CutStats,
    /// Master optimum after each iterative round.
    pub master_bounds: Vec<f64>,
    pub wall_time: Duration,
}

impl SolveReport {
    pub fn gap(&self) -> u32 {
        self.objective - self.lower_bound
    }
}

#[derive(Debug, Error)]
pub enum LbbdError {
    #[error("invalid plan: {0}")]
    Plan(#[from] PlanError),
    #[error("starting plan places resources on burning nodes: {0:?}")]
    InfeasibleStart(Vec<Placement>),
    #[error(transparent)]
    Cut(#[from] CutError),
    #[error("master problem: {source}")]
    Master {
        source: MilpError,
        partial: Box<SolveReport>,
    },
    #[error("starting plan disagrees with the fixed periods")]
    StartConflict,
    #[error("branch-and-check needs the reference backend")]
    Unsupported,
}

struct Engine<'a> {
    instance: &'a Instance,
    strength: CutStrength,
    pool: &'a mut CutPool,
    best: (InterdictionPlan, u32),
    stats: CutStats,
    error: Option<LbbdError>,
}

impl Engine<'_> {
    /// Evaluates `plan`, updates the incumbent and returns the cuts that
    /// were new to the pool.
    fn check(
        &mut self,
        plan: &InterdictionPlan,
        theta: &[f64],
    ) -> Result<Vec<BendersCut>, LbbdError> {
        let started = Instant::now();
        self.stats.iterations += 1;
        let source = self.stats.iterations as u64;
        let (value, mut fresh) = callback(self.instance, plan, theta, self.strength)?;
        if let Some(v) = value {
            if v < self.best.1 {
                self.best = (plan.clone(), v);
            }
        }
        fresh.retain_mut(|c| {
            c.source = source;
            self.pool.insert(c.clone())
        });
        for c in &fresh {
            match c.kind {
                cuts::CutKind::Optimality { .. } => self.stats.optimality += 1,
                cuts::CutKind::Feasibility { .. } => self.stats.feasibility += 1,
            }
        }
        self.stats.subproblem_time += started.elapsed();
        Ok(fresh)
    }

    fn report(
        &self,
        status: Status,
        lower_bound: u32,
        master_bounds: Vec<f64>,
        started: Instant,
    ) -> SolveReport {
        SolveReport {
            status,
            plan: self.best.0.clone(),
            objective: self.best.1,
            lower_bound: lower_bound.min(self.best.1),
            stats: self.stats.clone(),
            master_bounds,
            wall_time: started.elapsed(),
        }
    }
}

/// Evaluates an integral master solution and returns its objective (when
/// feasible) with the cuts it violates: a feasibility cut per placement on
/// a burning node, and an optimality cut per unprotected node whose `theta`
/// is below 1. No cuts means the plan is feasible and `theta` is exact.
pub fn callback(
    instance: &Instance,
    plan: &InterdictionPlan,
    theta: &[f64],
    strength: CutStrength,
) -> Result<(Option<u32>, Vec<BendersCut>), LbbdError> {
    let dynamics = firedyn::evaluate(instance, plan)?;
    let mut cuts = Vec::new();
    for &p in dynamics.violations() {
        cuts.push(cuts::feasibility_cut(instance, plan, &dynamics, p)?);
    }
    for &n in dynamics.unprotected() {
        if theta.get(n).copied().unwrap_or(0.0) < 1.0 - THETA_TOLERANCE {
            cuts.push(cuts::optimality_cut(
                instance, plan, &dynamics, n, strength,
            )?);
        }
    }
    Ok((dynamics.objective().value(), cuts))
}

fn ceil_bound(bound: f64) -> u32 {
    (bound - THETA_TOLERANCE).ceil().max(0.0) as u32
}

/// Solves `instance` exactly (up to the limits in `options`) with a fresh
/// cut pool.
pub fn solve_lbbd(instance: &Instance, options: &LbbdOptions) -> Result<SolveReport, LbbdError> {
    solve_lbbd_with_pool(instance, options, &mut CutPool::new())
}

/// As [`solve_lbbd`], reusing and extending `pool`. Cuts in the pool must
/// come from the same landscape, target time and resource effect.
pub fn solve_lbbd_with_pool(
    instance: &Instance,
    options: &LbbdOptions,
    pool: &mut CutPool,
) -> Result<SolveReport, LbbdError> {
    let started = Instant::now();
    let deadline = options
        .deadline
        .or_else(|| options.time_limit.map(|d| started + d));
    if options.mode == Mode::BranchAndCheck && !matches!(options.backend, MasterBackend::Reference)
    {
        return Err(LbbdError::Unsupported);
    }
    let base = options.fix.base_plan(instance);
    base.validate(instance)?;
    let dynamics = firedyn::evaluate(instance, &base)?;
    let Some(base_value) = dynamics.objective().value() else {
        return Err(LbbdError::InfeasibleStart(dynamics.violations().to_vec()));
    };
    let mut engine = Engine {
        instance,
        strength: options.strength,
        pool,
        best: (base.clone(), base_value),
        stats: CutStats::default(),
        error: None,
    };
    for cut in cuts::initial_cuts(instance, options.strength) {
        if engine.pool.insert(cut) {
            engine.stats.optimality += 1;
        }
    }
    if !base.is_empty() {
        engine.check(&base, &[])?;
    }
    if let Some(warm) = &options.warm_start {
        warm.validate(instance)?;
        let warm_fix = PeriodFix {
            periods: options.fix.periods,
            plan: warm.clone(),
        };
        if warm_fix.base_plan(instance) != base {
            return Err(LbbdError::StartConflict);
        }
        let d = firedyn::evaluate(instance, warm)?;
        if !d.is_feasible() {
            return Err(LbbdError::InfeasibleStart(d.violations().to_vec()));
        }
        engine.check(warm, &[])?;
    }
    match options.mode {
        Mode::Iterative => iterative(&mut engine, options, deadline, started),
        Mode::BranchAndCheck => branch_and_check(&mut engine, options, deadline, started),
    }
}

struct Bound(f64);

impl IncumbentHook for Bound {
    fn on_integral(&mut self, _: &[f64], _: f64) -> Result<HookDecision, MilpError> {
        Ok(HookDecision::Accept)
    }

    fn upper_bound(&self) -> Option<f64> {
        Some(self.0)
    }
}

fn solve_master(
    model: &MilpModel,
    options: &LbbdOptions,
    deadline: Option<Instant>,
    upper: u32,
) -> Result<BackendResult, MilpError> {
    match &options.backend {
        MasterBackend::Reference => {
            let mut hook = Bound(f64::from(upper));
            let ropts = ReferenceOptions {
                deadline,
                node_limit: options.node_limit,
                integral_objective: true,
                ..Default::default()
            };
            solve_reference(model, Some(&mut hook), &ropts)
        }
        MasterBackend::External(config) => {
            let left = deadline.map(|d| d.saturating_duration_since(Instant::now()));
            solve_external(model, config, left)
        }
    }
}

fn iterative(
    engine: &mut Engine,
    options: &LbbdOptions,
    deadline: Option<Instant>,
    started: Instant,
) -> Result<SolveReport, LbbdError> {
    let mut bounds: Vec<f64> = Vec::new();
    let mut lower = 0u32;
    loop {
        if lower >= engine.best.1 {
            return Ok(engine.report(Status::Optimal, lower, bounds, started));
        }
        if deadline.is_some_and(|d| Instant::now() >= d) {
            return Ok(engine.report(Status::Feasible, lower, bounds, started));
        }
        let (model, layout) = build_master(engine.instance, engine.pool, &options.fix, false)
            .map_err(|e| master_error(engine, e, lower, &bounds, started))?;
        let t0 = Instant::now();
        let result = solve_master(&model, options, deadline, engine.best.1);
        engine.stats.master_time += t0.elapsed();
        engine.stats.master_solves += 1;
        let result = result.map_err(|e| master_error(engine, e, lower, &bounds, started))?;
        engine.stats.master_nodes += result.nodes;
        match result.status {
            // Nothing better than the incumbent is left.
            Status::Infeasible => lower = engine.best.1,
            Status::Limit => {
                lower = lower.max(ceil_bound(result.bound));
                return Ok(engine.report(Status::Feasible, lower, bounds, started));
            }
            Status::Optimal => {
                let value = result.objective.unwrap_or(result.bound);
                bounds.push(value);
                lower = lower.max(ceil_bound(value));
                accept_round(engine, &layout, &result, &mut lower)?;
            }
            Status::Feasible => {
                lower = lower.max(ceil_bound(result.bound));
                engine.check(&layout.plan(&result.values), &layout.theta(&result.values))?;
                let status = if lower >= engine.best.1 {
                    Status::Optimal
                } else {
                    Status::Feasible
                };
                return Ok(engine.report(status, lower, bounds, started));
            }
        }
    }
}

fn accept_round(
    engine: &mut Engine,
    layout: &MasterLayout,
    result: &BackendResult,
    lower: &mut u32,
) -> Result<(), LbbdError> {
    let plan = layout.plan(&result.values);
    let fresh = engine.check(&plan, &layout.theta(&result.values))?;
    if fresh.is_empty() {
        // The master optimum is feasible and its theta is exact.
        *lower = (*lower).max(engine.best.1);
    }
    Ok(())
}

fn master_error(
    engine: &Engine,
    source: MilpError,
    lower: u32,
    bounds: &[f64],
    started: Instant,
) -> LbbdError {
    LbbdError::Master {
        source,
        partial: Box::new(engine.report(Status::Feasible, lower, bounds.to_vec(), started)),
    }
}

struct Callback<'e, 'a> {
    engine: &'e mut Engine<'a>,
    layout: &'e MasterLayout,
    blocked: HashSet<usize>,
}

impl IncumbentHook for Callback<'_, '_> {
    fn on_integral(&mut self, values: &[f64], _: f64) -> Result<HookDecision, MilpError> {
        let plan = self.layout.plan(values);
        let theta = self.layout.theta(values);
        let fresh = match self.engine.check(&plan, &theta) {
            Ok(f) => f,
            Err(e) => {
                let msg = e.to_string();
                self.engine.error = Some(e);
                return Err(MilpError::Hook(msg));
            }
        };
        if fresh.is_empty() {
            return Ok(HookDecision::Accept);
        }
        let base = self.engine.pool.len() - fresh.len();
        let mut rows = Vec::new();
        let mut release = Vec::new();
        for (i, cut) in fresh.iter().enumerate() {
            if let Some(row) = self.layout.row(cut_name(base + i, cut), cut) {
                rows.push(row);
            }
            let anchor = match cut.kind {
                cuts::CutKind::Feasibility { anchor } => Some(anchor),
                cuts::CutKind::Optimality { .. } => None,
            };
            for p in cut.terms.iter().chain(anchor.iter()) {
                if let Some(&j) = self.layout.z.get(p) {
                    if self.blocked.remove(&j) {
                        release.push(j);
                    }
                }
            }
        }
        Ok(HookDecision::Reject { rows, release })
    }

    fn upper_bound(&self) -> Option<f64> {
        Some(f64::from(self.engine.best.1))
    }
}

fn branch_and_check(
    engine: &mut Engine,
    options: &LbbdOptions,
    deadline: Option<Instant>,
    started: Instant,
) -> Result<SolveReport, LbbdError> {
    let (model, layout) = build_master(engine.instance, engine.pool, &options.fix, true)
        .map_err(|e| master_error(engine, e, 0, &[], started))?;
    let ropts = ReferenceOptions {
        deadline,
        node_limit: options.node_limit,
        integral_objective: true,
        incumbent: None,
        blocked: layout.blocked.clone(),
    };
    let t0 = Instant::now();
    let sub0 = engine.stats.subproblem_time;
    let mut hook = Callback {
        blocked: layout.blocked.iter().copied().collect(),
        engine,
        layout: &layout,
    };
    let result = solve_reference(&model, Some(&mut hook), &ropts);
    let engine = hook.engine;
    let elapsed = t0.elapsed();
    engine.stats.master_solves += 1;
    engine.stats.master_time += elapsed.saturating_sub(engine.stats.subproblem_time - sub0);
    if let Some(e) = engine.error.take() {
        return Err(e);
    }
    let result = result.map_err(|e| master_error(engine, e, 0, &[], started))?;
    engine.stats.master_nodes += result.nodes;
    let (status, lower) = match result.status {
        Status::Optimal | Status::Infeasible => (Status::Optimal, engine.best.1),
        Status::Feasible | Status::Limit => {
            let lower = ceil_bound(result.bound);
            let status = if lower >= engine.best.1 {
                Status::Optimal
            } else {
                Status::Feasible
            };
            (status, lower)
        }
    };
    Ok(engine.report(status, lower, Vec::new(), started))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::firedyn::brute_force;
    use crate::netgraph::{Arc, Network};

    fn chain(psi: i64) -> Instance {
        let net = Network::new(3, vec![Arc::new(0, 1, 10), Arc::new(1, 2, 10)]).unwrap();
        Instance::new("chain", net, vec![0], psi, 50, vec![(5, 1)]).unwrap()
    }

    fn both(inst: &Instance) -> [SolveReport; 2] {
        [Mode::Iterative, Mode::BranchAndCheck].map(|mode| {
            let opts = LbbdOptions {
                mode,
                ..Default::default()
            };
            solve_lbbd(inst, &opts).unwrap()
        })
    }

    #[test]
    fn chain_matches_brute_force() {
        for psi in [15, 25] {
            let inst = chain(psi);
            let oracle = brute_force(&inst, 1000).unwrap();
            for r in both(&inst) {
                assert_eq!(r.status, Status::Optimal);
                assert_eq!(r.objective, oracle.objective);
                assert_eq!(r.lower_bound, r.objective);
                let d = firedyn::evaluate(&inst, &r.plan).unwrap();
                assert_eq!(d.objective().value(), Some(r.objective));
            }
        }
    }

    #[test]
    fn grid_matches_brute_force() {
        let spec = crate::instance::GridSpec {
            rows: 3,
            cols: 3,
            ignition: (1, 1),
            ..crate::instance::small_preset(0, 3).unwrap()
        };
        let inst = crate::instance::generate_grid(&spec).unwrap();
        let oracle = brute_force(&inst, 1_000_000).unwrap();
        for r in both(&inst) {
            assert_eq!(r.objective, oracle.objective, "{:?}", r.stats);
            assert_eq!(r.status, Status::Optimal);
        }
    }

    #[test]
    fn iterative_bounds_increase() {
        let spec = crate::instance::small_preset(1, 7).unwrap();
        let inst = crate::instance::generate_grid(&spec).unwrap();
        let opts = LbbdOptions {
            mode: Mode::Iterative,
            time_limit: Some(Duration::from_secs(60)),
            ..Default::default()
        };
        let r = solve_lbbd(&inst, &opts).unwrap();
        assert!(
            r.master_bounds.windows(2).all(|w| w[0] <= w[1] + 1e-6),
            "{:?}",
            r.master_bounds
        );
        let bc = solve_lbbd(&inst, &LbbdOptions::default()).unwrap();
        assert_eq!(r.objective, bc.objective);
    }

    #[test]
    fn callback_counts() {
        // 0 -> 1 -> 2 -> 3 with a resource on 1 after the fire got there.
        let net = Network::new(
            4,
            vec![Arc::new(0, 1, 2), Arc::new(1, 2, 10), Arc::new(2, 3, 10)],
        )
        .unwrap();
        let inst = Instance::new("line", net, vec![0], 65, 50, vec![(5, 1)]).unwrap();
        let plan = InterdictionPlan::from_placements([Placement::new(1, 5)]);
        let (value, cuts) = callback(&inst, &plan, &[0.0; 4], CutStrength::Strengthened).unwrap();
        assert_eq!(value, None);
        // Node 3 is delayed to 72 and safe; 0, 1 and 2 are under-estimated.
        let feas = cuts
            .iter()
            .filter(|c| matches!(c.kind, cuts::CutKind::Feasibility { .. }));
        assert_eq!(feas.count(), 1);
        assert_eq!(cuts.len(), 4);
        let exact = [1.0, 1.0, 1.0, 0.0];
        let (_, cuts) = callback(&inst, &plan, &exact, CutStrength::Strengthened).unwrap();
        assert_eq!(cuts.len(), 1);
        let (value, cuts) = callback(
            &inst,
            &InterdictionPlan::new(),
            &[1.0; 4],
            CutStrength::Strengthened,
        )
        .unwrap();
        assert_eq!((value, cuts.len()), (Some(4), 0));
    }

    #[test]
    fn zero_capacity_converges_at_once() {
        let inst = chain(25).with_capacity(vec![0]).unwrap();
        for r in both(&inst) {
            assert_eq!(r.objective, 3);
            assert_eq!(r.status, Status::Optimal);
            assert_eq!(r.stats.feasibility, 0);
            assert_eq!(r.stats.optimality, 3);
        }
    }

    #[test]
    fn zero_time_limit_returns_start() {
        let inst = chain(25);
        let opts = LbbdOptions {
            mode: Mode::Iterative,
            time_limit: Some(Duration::ZERO),
            ..Default::default()
        };
        let r = solve_lbbd(&inst, &opts).unwrap();
        assert_eq!(r.status, Status::Feasible);
        assert_eq!(r.objective, 3);
        assert!(r.plan.is_empty());
    }

    #[test]
    fn warm_start_is_checked() {
        let net = Network::new(3, vec![Arc::new(0, 1, 1), Arc::new(1, 2, 10)]).unwrap();
        let inst = Instance::new("fast", net, vec![0], 25, 50, vec![(5, 1)]).unwrap();
        let opts = LbbdOptions {
            warm_start: Some(InterdictionPlan::from_placements([Placement::new(1, 5)])),
            ..Default::default()
        };
        assert!(matches!(
            solve_lbbd(&inst, &opts),
            Err(LbbdError::InfeasibleStart(_))
        ));
        let good = LbbdOptions {
            warm_start: Some(InterdictionPlan::from_placements([Placement::new(2, 5)])),
            ..Default::default()
        };
        let r = solve_lbbd(&inst, &good).unwrap();
        // A resource on the last node slows nothing downstream.
        assert_eq!(r.objective, 3);
        assert!(r.plan.is_empty());
    }
}
