//! The solve pipeline shared by `solve` and `bench`, and the run record.

use std::fmt;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use clap::ValueEnum;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use wildfire_lbbd::firedyn::{self, brute_force, FiredynError, InterdictionPlan, Placement};
use wildfire_lbbd::instance::{preprocess, to_canonical_string, Instance};
use wildfire_lbbd::lbbd::{
    solve_greedy, solve_lbbd_with_pool, CutPool, CutStats, CutStrength, LbbdError, LbbdOptions,
    MasterBackend, Mode, SolveReport,
};
use wildfire_lbbd::milp::{
    build_direct_mip, solve_external, solve_reference, verify_solution, BackendResult,
    ExternalConfig, ReferenceOptions, SolutionClaim, Status,
};
use wildfire_lbbd::netgraph::UNREACHABLE;

/// Record schema version; bump on incompatible changes.
pub const RECORD_SCHEMA: u32 = 1;

/// Enumeration budget of the brute-force method.
pub const BRUTE_FORCE_LIMIT: u128 = 5_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    #[default]
    LbbdExact,
    LbbdGreedy,
    MipDirect,
    BruteForce,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::LbbdExact => "lbbd-exact",
            Method::LbbdGreedy => "lbbd-greedy",
            Method::MipDirect => "mip-direct",
            Method::BruteForce => "brute-force",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum ModeArg {
    Iterative,
    #[default]
    BranchAndCheck,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum StrengthArg {
    /// One new interdiction on the binding path suffices.
    Basic,
    /// Weights cuts by the number of interdictions still needed.
    #[default]
    Strengthened,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum BackendArg {
    #[default]
    Reference,
    External,
}

/// Where an exact solve gets its starting plan.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(into = "String", from = "String")]
pub enum WarmStart {
    #[default]
    None,
    Greedy,
    File(PathBuf),
}

impl From<String> for WarmStart {
    fn from(s: String) -> Self {
        match s.as_str() {
            "" | "none" => WarmStart::None,
            "greedy" => WarmStart::Greedy,
            _ => WarmStart::File(PathBuf::from(s)),
        }
    }
}

impl From<WarmStart> for String {
    fn from(w: WarmStart) -> Self {
        match w {
            WarmStart::None => "none".into(),
            WarmStart::Greedy => "greedy".into(),
            WarmStart::File(p) => p.to_string_lossy().into_owned(),
        }
    }
}

/// Everything that determines what a run computes, apart from the instance.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields, rename_all = "kebab-case")]
pub struct Params {
    pub method: Method,
    pub mode: ModeArg,
    pub strength: StrengthArg,
    pub backend: BackendArg,
    pub warm_start: WarmStart,
    /// Seconds.
    pub time_limit: Option<f64>,
    pub preprocess: bool,
}

#[derive(Debug)]
pub enum RunError {
    Lbbd(LbbdError),
    Firedyn(FiredynError),
    Other(String),
}

impl fmt::Display for RunError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RunError::Lbbd(e) => write!(f, "{e}"),
            RunError::Firedyn(e) => write!(f, "{e}"),
            RunError::Other(e) => f.write_str(e),
        }
    }
}

impl std::error::Error for RunError {}

impl From<LbbdError> for RunError {
    fn from(e: LbbdError) -> Self {
        RunError::Lbbd(e)
    }
}

impl From<FiredynError> for RunError {
    fn from(e: FiredynError) -> Self {
        RunError::Firedyn(e)
    }
}

fn other(e: impl fmt::Display) -> RunError {
    RunError::Other(e.to_string())
}

/// One line of a records file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub schema: u32,
    pub instance: String,
    /// Method label; the method name unless a bench manifest renames it.
    pub label: String,
    pub method: Method,
    pub params: Params,
    pub nodes: usize,
    /// `rows x cols` for grid instances.
    pub grid: Option<String>,
    pub seed: Option<u64>,
    /// `optimal`, `feasible` (incumbent without proof) or `limit`.
    pub status: String,
    pub objective: Option<u32>,
    pub lower_bound: Option<u32>,
    pub wall_time: f64,
    pub optimality_cuts: usize,
    pub feasibility_cuts: usize,
    pub iterations: usize,
    pub master_solves: usize,
    pub search_nodes: u64,
    /// Objective of the greedy phase of a warm-started exact run.
    pub greedy_objective: Option<u32>,
    /// The plan passed an independent re-evaluation.
    pub verified: bool,
    pub placements: Vec<Placement>,
    pub config_hash: String,
}

impl RunRecord {
    pub fn summary(&self) -> String {
        let show = |v: Option<u32>| v.map_or("-".to_string(), |v| v.to_string());
        format!(
            "{} {}: {} obj {} lb {} in {:.3}s ({} opt cuts, {} feas cuts)",
            self.label,
            self.instance,
            self.status,
            show(self.objective),
            show(self.lower_bound),
            self.wall_time,
            self.optimality_cuts,
            self.feasibility_cuts
        )
    }
}

/// A finished run before it is turned into a record.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub status: Status,
    /// In the numbering of the input instance.
    pub plan: InterdictionPlan,
    pub objective: Option<u32>,
    pub lower_bound: Option<u32>,
    pub stats: CutStats,
    pub search_nodes: u64,
    pub greedy_objective: Option<u32>,
    pub wall_time: Duration,
    /// Cuts of an LBBD run, in the numbering of the solved instance.
    pub pool: Option<CutPool>,
    /// Input node of each solved node when preprocessing renumbered them.
    pub kept: Option<Vec<usize>>,
}

/// Hash of the canonical instance text, the parameters and the contents of
/// a warm-start file.
pub fn config_hash(instance: &Instance, params: &Params) -> Result<String, RunError> {
    let mut h = Sha256::new();
    h.update(to_canonical_string(instance).as_bytes());
    h.update(b"\n");
    h.update(serde_json::to_string(params).map_err(other)?.as_bytes());
    if let WarmStart::File(path) = &params.warm_start {
        h.update(b"\n");
        h.update(std::fs::read(path).map_err(|e| other(format!("{}: {e}", path.display())))?);
    }
    Ok(h.finalize().iter().map(|b| format!("{b:02x}")).collect())
}

fn lbbd_options(params: &Params, external: Option<&ExternalConfig>) -> LbbdOptions {
    LbbdOptions {
        mode: match params.mode {
            ModeArg::Iterative => Mode::Iterative,
            ModeArg::BranchAndCheck => Mode::BranchAndCheck,
        },
        strength: match params.strength {
            StrengthArg::Basic => CutStrength::Basic,
            StrengthArg::Strengthened => CutStrength::Strengthened,
        },
        backend: match external {
            Some(c) if params.backend == BackendArg::External => MasterBackend::External(c.clone()),
            _ => MasterBackend::Reference,
        },
        ..LbbdOptions::default()
    }
}

fn map_plan(plan: &InterdictionPlan, kept: Option<&[usize]>) -> InterdictionPlan {
    match kept {
        Some(kept) => plan
            .placements()
            .map(|p| Placement::new(kept[p.node], p.time))
            .collect(),
        None => plan.clone(),
    }
}

fn unmap_plan(
    plan: &InterdictionPlan,
    kept: Option<&[usize]>,
) -> Result<InterdictionPlan, RunError> {
    let Some(kept) = kept else {
        return Ok(plan.clone());
    };
    plan.placements()
        .map(|p| {
            kept.binary_search(&p.node)
                .map(|n| Placement::new(n, p.time))
                .map_err(|_| {
                    other(format!(
                        "warm start places a resource on node {}, which is never threatened",
                        p.node
                    ))
                })
        })
        .collect()
}

fn from_report(report: SolveReport, pool: CutPool, greedy: Option<u32>) -> Outcome {
    Outcome {
        status: report.status,
        plan: report.plan,
        objective: Some(report.objective),
        lower_bound: Some(report.lower_bound),
        stats: report.stats,
        search_nodes: 0,
        greedy_objective: greedy,
        wall_time: report.wall_time,
        pool: Some(pool),
        kept: None,
    }
}

/// Runs `params.method` on `instance`.
///
/// `external` is required when `params.backend` is `external`.
pub fn run(
    instance: &Instance,
    params: &Params,
    external: Option<&ExternalConfig>,
) -> Result<Outcome, RunError> {
    let started = Instant::now();
    let deadline = params
        .time_limit
        .map(|s| started + Duration::from_secs_f64(s.max(0.0)));
    if params.backend == BackendArg::External && external.is_none() {
        return Err(other(
            "the external backend needs a solver command (--solver-config or WILDFIRE_MIP_COMMAND)",
        ));
    }
    let (solved, kept) = if params.preprocess {
        let (reduced, report) = preprocess(instance).map_err(other)?;
        (reduced, Some(report.kept))
    } else {
        (instance.clone(), None)
    };
    let warm_file = match &params.warm_start {
        WarmStart::File(path) => {
            let claim =
                SolutionClaim::load(path).map_err(|e| other(format!("{}: {e}", path.display())))?;
            Some(unmap_plan(&claim.plan(), kept.as_deref())?)
        }
        _ => None,
    };
    if params.method != Method::LbbdExact && params.warm_start != WarmStart::None {
        return Err(other(format!(
            "{} does not take a warm start",
            params.method
        )));
    }
    let mut options = lbbd_options(params, external);
    options.deadline = deadline;

    let mut outcome = match params.method {
        Method::LbbdExact => {
            let mut stats = CutStats::default();
            let mut greedy_objective = None;
            options.warm_start = warm_file;
            if params.warm_start == WarmStart::Greedy {
                let greedy = solve_greedy(&solved, &options)?;
                stats.absorb(&greedy.stats);
                greedy_objective = Some(greedy.objective);
                options.warm_start = Some(greedy.plan);
            }
            let mut pool = CutPool::new();
            let report = match solve_lbbd_with_pool(&solved, &options, &mut pool) {
                Ok(r) => r,
                Err(LbbdError::Master { partial, source }) => {
                    eprintln!(
                        "warning: master solve failed ({source}); reporting the partial result"
                    );
                    *partial
                }
                Err(e) => return Err(e.into()),
            };
            stats.absorb(&report.stats);
            let mut outcome = from_report(report, pool, greedy_objective);
            outcome.stats = stats;
            outcome
        }
        Method::LbbdGreedy => {
            let greedy = solve_greedy(&solved, &options)?;
            Outcome {
                status: Status::Feasible,
                plan: greedy.plan,
                objective: Some(greedy.objective),
                lower_bound: None,
                stats: greedy.stats,
                search_nodes: 0,
                greedy_objective: Some(greedy.objective),
                wall_time: greedy.wall_time,
                pool: None,
                kept: None,
            }
        }
        Method::MipDirect => run_mip(&solved, params, external, deadline)?,
        Method::BruteForce => {
            let result = brute_force(&solved, BRUTE_FORCE_LIMIT)?;
            Outcome {
                status: Status::Optimal,
                plan: result.plan,
                objective: Some(result.objective),
                lower_bound: Some(result.objective),
                stats: CutStats::default(),
                search_nodes: result.evaluated,
                greedy_objective: None,
                wall_time: Duration::ZERO,
                pool: None,
                kept: None,
            }
        }
    };
    outcome.plan = map_plan(&outcome.plan, kept.as_deref());
    outcome.kept = kept;
    outcome.wall_time = started.elapsed();
    Ok(outcome)
}

fn run_mip(
    instance: &Instance,
    params: &Params,
    external: Option<&ExternalConfig>,
    deadline: Option<Instant>,
) -> Result<Outcome, RunError> {
    let (model, layout) = build_direct_mip(instance).map_err(other)?;
    let result: BackendResult = match params.backend {
        BackendArg::Reference => solve_reference(
            &model,
            None,
            &ReferenceOptions {
                deadline,
                integral_objective: true,
                ..ReferenceOptions::default()
            },
        )
        .map_err(other)?,
        BackendArg::External => {
            let config = external.expect("checked by the caller");
            let limit = deadline.map(|d| d.saturating_duration_since(Instant::now()));
            solve_external(&model, config, limit).map_err(other)?
        }
    };
    let has_incumbent = !result.values.is_empty();
    let plan = if has_incumbent {
        layout.plan(instance, &result.values)
    } else {
        InterdictionPlan::new()
    };
    let objective = result.objective.map(|v| (v - 1e-6).ceil().max(0.0) as u32);
    let lower_bound = (result.bound - 1e-6).ceil().max(0.0) as u32;
    Ok(Outcome {
        status: result.status,
        plan,
        objective: objective.filter(|_| has_incumbent),
        lower_bound: Some(objective.map_or(lower_bound, |o| lower_bound.min(o))),
        stats: CutStats::default(),
        search_nodes: result.nodes,
        greedy_objective: None,
        wall_time: result.wall_time,
        pool: None,
        kept: None,
    })
}

/// The solution file for `outcome`, with arrivals and protection status
/// recomputed on the input instance.
pub fn claim(instance: &Instance, outcome: &Outcome) -> SolutionClaim {
    let mut claim = SolutionClaim::from_plan(&outcome.plan, outcome.objective);
    if let Ok(dynamics) = firedyn::evaluate(instance, &outcome.plan) {
        claim.arrivals = Some(
            dynamics
                .arrivals()
                .iter()
                .take(instance.node_count())
                .map(|&d| (d != UNREACHABLE).then_some(d as f64))
                .collect(),
        );
        claim.unprotected = Some(dynamics.unprotected().to_vec());
    }
    claim
}

pub fn record(
    instance: &Instance,
    label: &str,
    params: &Params,
    outcome: &Outcome,
    hash: String,
) -> RunRecord {
    let status = match outcome.status {
        Status::Optimal => "optimal",
        Status::Feasible => "feasible",
        Status::Limit => "limit",
        Status::Infeasible => "infeasible",
    };
    let verified = verify_solution(instance, &claim(instance, outcome)).is_valid()
        && outcome.objective.is_some();
    RunRecord {
        schema: RECORD_SCHEMA,
        instance: instance.id().to_string(),
        label: label.to_string(),
        method: params.method,
        params: params.clone(),
        nodes: instance.node_count(),
        grid: instance
            .generator()
            .map(|g| format!("{}x{}", g.rows, g.cols)),
        seed: instance.generator().map(|g| g.seed),
        status: status.to_string(),
        objective: outcome.objective,
        lower_bound: outcome.lower_bound,
        wall_time: outcome.wall_time.as_secs_f64(),
        optimality_cuts: outcome.stats.optimality,
        feasibility_cuts: outcome.stats.feasibility,
        iterations: outcome.stats.iterations,
        master_solves: outcome.stats.master_solves,
        search_nodes: outcome.search_nodes + outcome.stats.master_nodes,
        greedy_objective: outcome.greedy_objective,
        verified,
        placements: outcome.plan.placements().copied().collect(),
        config_hash: hash,
    }
}

/// Writes the cut pool of `outcome`, if any, headed by the node map when
/// preprocessing renumbered the nodes.
pub fn write_cuts(outcome: &Outcome, path: &Path) -> Result<(), RunError> {
    let Some(pool) = &outcome.pool else {
        return Err(other("this method produces no cuts"));
    };
    let mut out = Vec::new();
    if let Some(kept) = &outcome.kept {
        let ids: Vec<String> = kept.iter().map(|n| n.to_string()).collect();
        out.extend_from_slice(format!("# nodes {}\n", ids.join(" ")).as_bytes());
    }
    pool.dump(&mut out).map_err(other)?;
    std::fs::write(path, out).map_err(|e| other(format!("{}: {e}", path.display())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use wildfire_lbbd::instance::random_instance;

    #[test]
    fn warm_start_strings() {
        assert_eq!(WarmStart::from("greedy".to_string()), WarmStart::Greedy);
        assert_eq!(WarmStart::from("none".to_string()), WarmStart::None);
        let w = WarmStart::File("a/b.json".into());
        assert_eq!(WarmStart::from(String::from(w.clone())), w);
    }

    #[test]
    fn hash_depends_on_params_and_instance() {
        let a = random_instance(3);
        let b = random_instance(4);
        let p = Params::default();
        let q = Params {
            strength: StrengthArg::Basic,
            ..Params::default()
        };
        let h = config_hash(&a, &p).unwrap();
        assert_eq!(h.len(), 64);
        assert_eq!(h, config_hash(&a, &p).unwrap());
        assert_ne!(h, config_hash(&a, &q).unwrap());
        assert_ne!(h, config_hash(&b, &p).unwrap());
    }

    #[test]
    fn methods_agree_with_preprocessing() {
        for seed in 0..20 {
            let inst = random_instance(seed);
            let mut objectives = Vec::new();
            for method in [Method::BruteForce, Method::LbbdExact, Method::MipDirect] {
                for pre in [false, true] {
                    let params = Params {
                        method,
                        preprocess: pre,
                        ..Params::default()
                    };
                    let out = run(&inst, &params, None).unwrap();
                    let rec = record(&inst, "x", &params, &out, String::new());
                    assert!(rec.verified, "seed {seed} {method} {pre}");
                    objectives.push(out.objective.unwrap());
                }
            }
            assert!(
                objectives.windows(2).all(|w| w[0] == w[1]),
                "seed {seed}: {objectives:?}"
            );
        }
    }
}
