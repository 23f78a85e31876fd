//! Benders cuts derived from binding fire paths.
//!
//! Both cut families have the same shape: a set of placement variables
//! ("new interdictions on the binding path, early enough to matter") and a
//! divisor `k`, the number of such interdictions needed.
//!
//! - Optimality cut for node `n`: `theta_n >= 1 - sum(z) / k`, stored in
//!   the integer form `k * theta_n + sum(z) >= k`.
//! - Feasibility cut for a placement `(n, t')` on a node that was already
//!   burning: `1 - z_{n t'} + sum(z) / k >= 1`, stored as
//!   `sum(z) - k * z_{n t'} >= 0`.

use std::collections::{BTreeSet, HashSet};
use std::fmt;
use std::io::Write;

use num_rational::Ratio;
use thiserror::Error;

use crate::firedyn::{FireDynamics, InterdictionPlan, Placement};
use crate::instance::Instance;
use crate::netgraph::{GraphError, NodeId, Time};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CutError {
    #[error("node {node} is protected (arrival {arrival}, target {psi})")]
    Protected {
        node: NodeId,
        arrival: Time,
        psi: Time,
    },
    #[error("placement {node}@{time} is not on a burning node (arrival {arrival})")]
    NoViolation {
        node: NodeId,
        time: Time,
        arrival: Time,
    },
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// Which optimality cut to generate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CutStrength {
    /// Unit coefficients, window `t <= d(n')`.
    Basic,
    /// Coefficients `1/R` with the window widened by `(R - 1) * delta`.
    #[default]
    Strengthened,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CutKind {
    Optimality { node: NodeId },
    Feasibility { anchor: Placement },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BendersCut {
    pub kind: CutKind,
    /// `R` for optimality cuts, `Q` for feasibility cuts.
    pub divisor: u32,
    /// Placement variables with coefficient `1 / divisor`, sorted.
    pub terms: Vec<Placement>,
    /// Identifier of the plan the cut was generated from.
    pub source: u64,
}

impl BendersCut {
    pub fn coefficient(&self) -> Ratio<i64> {
        Ratio::new(1, i64::from(self.divisor))
    }

    /// The constant 1 on the right-hand side of both cut forms.
    pub fn constant(&self) -> Ratio<i64> {
        Ratio::from_integer(1)
    }

    /// Number of terms switched on in `plan`.
    pub fn covered(&self, plan: &InterdictionPlan) -> u32 {
        self.terms
            .iter()
            .filter(|p| plan.contains(p.node, p.time))
            .count() as u32
    }

    /// Right-hand side `1 - covered / R` of an optimality cut at `plan`.
    pub fn bound_at(&self, plan: &InterdictionPlan) -> Ratio<i64> {
        self.constant() - self.coefficient() * i64::from(self.covered(plan))
    }

    /// Whether `plan` satisfies the cut; `theta` is only read for
    /// optimality cuts.
    pub fn admits(&self, plan: &InterdictionPlan, theta: Ratio<i64>) -> bool {
        match self.kind {
            CutKind::Optimality { .. } => theta >= self.bound_at(plan),
            CutKind::Feasibility { anchor } => {
                !plan.contains(anchor.node, anchor.time) || self.covered(plan) >= self.divisor
            }
        }
    }

    pub fn target(&self) -> NodeId {
        match self.kind {
            CutKind::Optimality { node } => node,
            CutKind::Feasibility { anchor } => anchor.node,
        }
    }
}

impl fmt::Display for BendersCut {
    /// `O <node> <R> n:t ...` or `F <node>:<t'> <Q> n:t ...`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            CutKind::Optimality { node } => write!(f, "O {node} {}", self.divisor)?,
            CutKind::Feasibility { anchor } => {
                write!(f, "F {}:{} {}", anchor.node, anchor.time, self.divisor)?
            }
        }
        for p in &self.terms {
            write!(f, " {}:{}", p.node, p.time)?;
        }
        Ok(())
    }
}

fn ceil_div(a: Time, b: Time) -> Time {
    (a + b - 1) / b
}

/// Minimum number of further interdictions that could protect a node the
/// fire reaches at `arrival`: `ceil((psi - arrival) / delta)`.
pub fn resilience(instance: &Instance, node: NodeId, arrival: Time) -> Result<u32, CutError> {
    if arrival >= instance.psi() {
        return Err(CutError::Protected {
            node,
            arrival,
            psi: instance.psi(),
        });
    }
    Ok(ceil_div(instance.psi() - arrival, instance.delta()) as u32)
}

/// Minimum number of further interdictions that make a placement at time
/// `time` on a node reached at `arrival` legal:
/// `ceil((time - arrival) / delta)`.
pub fn infeasibility_depth(
    instance: &Instance,
    node: NodeId,
    arrival: Time,
    time: Time,
) -> Result<u32, CutError> {
    if arrival >= time {
        return Err(CutError::NoViolation {
            node,
            time,
            arrival,
        });
    }
    Ok(ceil_div(time - arrival, instance.delta()) as u32)
}

/// Placement variables on the binding path interior of `node` that are off
/// in `plan` and whose time is at most `window(n')`.
fn path_terms(
    instance: &Instance,
    plan: &InterdictionPlan,
    dynamics: &FireDynamics,
    node: NodeId,
    window: impl Fn(NodeId) -> Time,
) -> Result<Vec<Placement>, CutError> {
    let mut terms = Vec::new();
    for v in dynamics.path_interior(node)? {
        if instance.is_ignition(v) {
            continue;
        }
        let latest = window(v);
        for &t in instance.periods().iter().take_while(|&&t| t <= latest) {
            if !plan.contains(v, t) {
                terms.push(Placement::new(v, t));
            }
        }
    }
    terms.sort_unstable();
    Ok(terms)
}

/// Optimality cut for a node left unprotected by `plan`.
pub fn optimality_cut(
    instance: &Instance,
    plan: &InterdictionPlan,
    dynamics: &FireDynamics,
    node: NodeId,
    strength: CutStrength,
) -> Result<BendersCut, CutError> {
    let r = resilience(instance, node, dynamics.arrival(node))?;
    let r = match strength {
        CutStrength::Basic => 1,
        CutStrength::Strengthened => r,
    };
    let widen = Time::from(r - 1) * instance.delta();
    let terms = path_terms(instance, plan, dynamics, node, |v| {
        dynamics.arrival(v) + widen
    })?;
    Ok(BendersCut {
        kind: CutKind::Optimality { node },
        divisor: r,
        terms,
        source: 0,
    })
}

/// Feasibility cut for a placement on a node the fire reached before the
/// placement time.
pub fn feasibility_cut(
    instance: &Instance,
    plan: &InterdictionPlan,
    dynamics: &FireDynamics,
    anchor: Placement,
) -> Result<BendersCut, CutError> {
    let arrival = dynamics.arrival(anchor.node);
    if !plan.contains(anchor.node, anchor.time) {
        return Err(CutError::NoViolation {
            node: anchor.node,
            time: anchor.time,
            arrival,
        });
    }
    let q = infeasibility_depth(instance, anchor.node, arrival, anchor.time)?;
    let latest = arrival + Time::from(q - 1) * instance.delta();
    let terms = path_terms(instance, plan, dynamics, anchor.node, |_| latest)?;
    Ok(BendersCut {
        kind: CutKind::Feasibility { anchor },
        divisor: q,
        terms,
        source: 0,
    })
}

/// Optimality cuts for every node unprotected when no resource is placed.
pub fn initial_cuts(instance: &Instance, strength: CutStrength) -> Vec<BendersCut> {
    let plan = InterdictionPlan::new();
    let dynamics = crate::firedyn::evaluate(instance, &plan).expect("empty plan is valid");
    dynamics
        .unprotected()
        .iter()
        .map(|&n| {
            optimality_cut(instance, &plan, &dynamics, n, strength)
                .expect("unprotected nodes have a path")
        })
        .collect()
}

/// A deduplicated collection of cuts.
#[derive(Debug, Clone, Default)]
pub struct CutPool {
    cuts: Vec<BendersCut>,
    seen: HashSet<(CutKind, u32, Vec<Placement>)>,
    covered: BTreeSet<Placement>,
    optimality: usize,
    feasibility: usize,
}

impl CutPool {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds `cut` unless an identical one is present.
    pub fn insert(&mut self, cut: BendersCut) -> bool {
        let key = (cut.kind, cut.divisor, cut.terms.clone());
        if !self.seen.insert(key) {
            return false;
        }
        self.covered.extend(cut.terms.iter().copied());
        if let CutKind::Feasibility { anchor } = cut.kind {
            self.covered.insert(anchor);
        }
        match cut.kind {
            CutKind::Optimality { .. } => self.optimality += 1,
            CutKind::Feasibility { .. } => self.feasibility += 1,
        }
        self.cuts.push(cut);
        true
    }

    pub fn cuts(&self) -> &[BendersCut] {
        &self.cuts
    }

    pub fn len(&self) -> usize {
        self.cuts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cuts.is_empty()
    }

    pub fn optimality_count(&self) -> usize {
        self.optimality
    }

    pub fn feasibility_count(&self) -> usize {
        self.feasibility
    }

    /// Whether some cut mentions the placement variable.
    pub fn covers(&self, p: Placement) -> bool {
        self.covered.contains(&p)
    }

    /// Smallest `theta` satisfying every optimality cut at `plan`, exactly.
    pub fn theta(&self, plan: &InterdictionPlan, node_count: usize) -> Vec<Ratio<i64>> {
        let zero = Ratio::from_integer(0);
        let mut theta = vec![zero; node_count];
        for cut in &self.cuts {
            if let CutKind::Optimality { node } = cut.kind {
                let b = cut.bound_at(plan);
                if b > theta[node] {
                    theta[node] = b;
                }
            }
        }
        theta
    }

    /// Whether `plan` passes every feasibility cut.
    pub fn admits(&self, plan: &InterdictionPlan) -> bool {
        let zero = Ratio::from_integer(0);
        self.cuts.iter().all(|c| match c.kind {
            CutKind::Feasibility { .. } => c.admits(plan, zero),
            CutKind::Optimality { .. } => true,
        })
    }

    /// Writes one cut per line in the [`BendersCut`] display form.
    pub fn dump(&self, mut out: impl Write) -> std::io::Result<()> {
        for cut in &self.cuts {
            writeln!(out, "{cut}")?;
        }
        Ok(())
    }
}
