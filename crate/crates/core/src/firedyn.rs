//! Fire spread under a fixed interdiction plan.
//!
//! Given a plan, every arc leaving a node that hosts a resource (at any
//! time) is slowed by `delta`. One shortest-path computation then yields
//! the arrival time of the fire at every node, the binding fire paths, the
//! unprotected nodes (arrival strictly before `psi`) and the placements
//! that violate the rule that a resource may not be put on a node that is
//! already burning (arrival strictly before the placement time).

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::instance::Instance;
use crate::netgraph::{self, GraphError, Network, NodeId, ShortestPathTree, Time};

/// One resource at `node`, deployed at period time `time`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Placement {
    pub node: NodeId,
    pub time: Time,
}

impl Placement {
    pub fn new(node: NodeId, time: Time) -> Self {
        Self { node, time }
    }
}

impl std::fmt::Display for Placement {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}@{}", self.node, self.time)
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PlanError {
    #[error("node {node} is not in the instance")]
    UnknownNode { node: NodeId },
    #[error("time {time} is not a resource period")]
    UnknownPeriod { time: Time },
    #[error("node {node} is an ignition node and cannot host a resource")]
    IgnitionPlacement { node: NodeId },
    #[error("period {time} uses {used} resources but only {available} are available")]
    CapacityExceeded {
        time: Time,
        used: u32,
        available: u32,
    },
    #[error("node {node} hosts more than one resource")]
    DuplicateNode { node: NodeId },
}

#[derive(Debug, Error)]
pub enum FiredynError {
    #[error(transparent)]
    Plan(#[from] PlanError),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("search space has {count} plans, above the limit of {limit}")]
    SearchTooLarge { count: u128, limit: u128 },
}

/// A set of placements, kept sorted by `(node, time)`.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct InterdictionPlan {
    placements: BTreeSet<Placement>,
}

impl InterdictionPlan {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_placements(placements: impl IntoIterator<Item = Placement>) -> Self {
        Self {
            placements: placements.into_iter().collect(),
        }
    }

    pub fn insert(&mut self, placement: Placement) -> bool {
        self.placements.insert(placement)
    }

    pub fn remove(&mut self, placement: &Placement) -> bool {
        self.placements.remove(placement)
    }

    pub fn contains(&self, node: NodeId, time: Time) -> bool {
        self.placements.contains(&Placement::new(node, time))
    }

    /// Whether `node` hosts a resource at any time.
    pub fn hosts(&self, node: NodeId) -> bool {
        self.placements
            .range(Placement::new(node, Time::MIN)..=Placement::new(node, Time::MAX))
            .next()
            .is_some()
    }

    pub fn placements(&self) -> impl Iterator<Item = &Placement> + '_ {
        self.placements.iter()
    }

    pub fn len(&self) -> usize {
        self.placements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.placements.is_empty()
    }

    /// Every structural violation: unknown nodes or periods, ignition
    /// placements, per-period capacity and one resource per node.
    pub fn check(&self, instance: &Instance) -> Vec<PlanError> {
        let mut errors = Vec::new();
        let mut used = vec![0u32; instance.periods().len()];
        let mut last_node = None;
        for p in &self.placements {
            if p.node >= instance.node_count() {
                errors.push(PlanError::UnknownNode { node: p.node });
                continue;
            }
            if instance.is_ignition(p.node) {
                errors.push(PlanError::IgnitionPlacement { node: p.node });
            }
            if last_node == Some(p.node) {
                errors.push(PlanError::DuplicateNode { node: p.node });
            }
            last_node = Some(p.node);
            match instance.period_index(p.time) {
                Some(i) => used[i] += 1,
                None => errors.push(PlanError::UnknownPeriod { time: p.time }),
            }
        }
        for (i, &count) in used.iter().enumerate() {
            if count > instance.capacity()[i] {
                errors.push(PlanError::CapacityExceeded {
                    time: instance.periods()[i],
                    used: count,
                    available: instance.capacity()[i],
                });
            }
        }
        errors
    }

    pub fn validate(&self, instance: &Instance) -> Result<(), PlanError> {
        match self.check(instance).into_iter().next() {
            Some(e) => Err(e),
            None => Ok(()),
        }
    }
}

impl FromIterator<Placement> for InterdictionPlan {
    fn from_iter<I: IntoIterator<Item = Placement>>(iter: I) -> Self {
        Self::from_placements(iter)
    }
}

/// Spread network weights under `plan`: arcs leaving a node that hosts a
/// resource at any time are `delta` slower.
pub fn modified_weights(
    instance: &Instance,
    plan: &InterdictionPlan,
) -> Result<Network, PlanError> {
    let n = instance.node_count();
    let mut hosts = vec![false; n];
    for p in plan.placements() {
        if p.node >= n {
            return Err(PlanError::UnknownNode { node: p.node });
        }
        hosts[p.node] = true;
    }
    let (spread, _) = instance.spread_network();
    let delta = instance.delta();
    Ok(spread.reweighted(|_, arc| {
        if arc.tail < n && hosts[arc.tail] {
            arc.weight + delta
        } else {
            arc.weight
        }
    }))
}

/// Objective value of a plan: the number of unprotected nodes, or
/// infeasible when some resource sits on a node already on fire.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Objective {
    Feasible(u32),
    Infeasible { violations: Vec<Placement> },
}

impl Objective {
    pub fn value(&self) -> Option<u32> {
        match self {
            Objective::Feasible(v) => Some(*v),
            Objective::Infeasible { .. } => None,
        }
    }
}

/// Fire arrival times and derived indicators for one plan.
#[derive(Debug, Clone)]
pub struct FireDynamics {
    arrivals: Vec<Time>,
    tree: ShortestPathTree,
    unprotected: Vec<NodeId>,
    is_unprotected: Vec<bool>,
    violations: Vec<Placement>,
}

impl FireDynamics {
    /// Arrival time at landscape node `node`.
    pub fn arrival(&self, node: NodeId) -> Time {
        self.arrivals[node]
    }

    pub fn arrivals(&self) -> &[Time] {
        &self.arrivals
    }

    /// Shortest-path tree over the spread network (which may include a
    /// super-source beyond the landscape nodes).
    pub fn tree(&self) -> &ShortestPathTree {
        &self.tree
    }

    pub fn unprotected(&self) -> &[NodeId] {
        &self.unprotected
    }

    pub fn is_unprotected(&self, node: NodeId) -> bool {
        self.is_unprotected[node]
    }

    pub fn violations(&self) -> &[Placement] {
        &self.violations
    }

    pub fn is_feasible(&self) -> bool {
        self.violations.is_empty()
    }

    /// Binding fire path from the root to `node`, inclusive.
    pub fn binding_path(&self, node: NodeId) -> Result<Vec<NodeId>, GraphError> {
        netgraph::extract_path(&self.tree, node)
    }

    /// Landscape nodes strictly inside the binding path to `node`.
    pub fn path_interior(&self, node: NodeId) -> Result<Vec<NodeId>, GraphError> {
        let n = self.arrivals.len();
        let mut interior = netgraph::path_interior(&self.tree, node)?;
        interior.retain(|&v| v < n);
        Ok(interior)
    }

    pub fn objective(&self) -> Objective {
        objective(self)
    }
}

/// Evaluates `plan` with one shortest-path computation.
pub fn evaluate(instance: &Instance, plan: &InterdictionPlan) -> Result<FireDynamics, PlanError> {
    let weights = modified_weights(instance, plan)?;
    let (_, root) = instance.spread_network();
    let tree = netgraph::shortest_path_tree(&weights, root);
    let n = instance.node_count();
    let arrivals: Vec<Time> = (0..n).map(|v| tree.dist(v)).collect();
    let is_unprotected: Vec<bool> = arrivals.iter().map(|&d| d < instance.psi()).collect();
    let unprotected = (0..n).filter(|&v| is_unprotected[v]).collect();
    let violations = plan
        .placements()
        .filter(|p| arrivals[p.node] < p.time)
        .copied()
        .collect();
    Ok(FireDynamics {
        arrivals,
        tree,
        unprotected,
        is_unprotected,
        violations,
    })
}

pub fn objective(dynamics: &FireDynamics) -> Objective {
    if dynamics.violations.is_empty() {
        Objective::Feasible(dynamics.unprotected.len() as u32)
    } else {
        Objective::Infeasible {
            violations: dynamics.violations.clone(),
        }
    }
}

/// Result of exhaustive enumeration.
#[derive(Debug, Clone)]
pub struct BruteForce {
    pub plan: InterdictionPlan,
    pub objective: u32,
    pub evaluated: u64,
}

fn binomial(n: u128, k: u128) -> u128 {
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.saturating_mul(n - i) / (i + 1);
    }
    acc
}

/// Number of plans in the feasible region (ignoring the burning-node rule).
pub fn plan_space_size(instance: &Instance) -> u128 {
    fn count(caps: &[u32], free: u128) -> u128 {
        let Some((&a, rest)) = caps.split_first() else {
            return 1;
        };
        (0..=(a as u128).min(free))
            .map(|k| binomial(free, k).saturating_mul(count(rest, free - k)))
            .fold(0u128, |s, v| s.saturating_add(v))
    }
    count(
        instance.capacity(),
        instance.decision_nodes().count() as u128,
    )
}

/// Calls `visit` on every plan that respects capacities and places at
/// most one resource per non-ignition node, the empty plan first.
pub fn for_each_plan(
    instance: &Instance,
    limit: u128,
    mut visit: impl FnMut(&InterdictionPlan),
) -> Result<(), FiredynError> {
    let count = plan_space_size(instance);
    if count > limit {
        return Err(FiredynError::SearchTooLarge { count, limit });
    }
    struct Walk<'a, F> {
        instance: &'a Instance,
        nodes: Vec<NodeId>,
        used: Vec<bool>,
        current: InterdictionPlan,
        visit: F,
    }
    impl<F: FnMut(&InterdictionPlan)> Walk<'_, F> {
        fn period(&mut self, p: usize) {
            if p == self.instance.periods().len() {
                (self.visit)(&self.current);
                return;
            }
            self.choose(p, 0, self.instance.capacity()[p]);
        }

        fn choose(&mut self, p: usize, from: usize, left: u32) {
            self.period(p + 1);
            if left == 0 {
                return;
            }
            let time = self.instance.periods()[p];
            for i in from..self.nodes.len() {
                if self.used[i] {
                    continue;
                }
                let placement = Placement::new(self.nodes[i], time);
                self.used[i] = true;
                self.current.insert(placement);
                self.choose(p, i + 1, left - 1);
                self.current.remove(&placement);
                self.used[i] = false;
            }
        }
    }
    let nodes: Vec<NodeId> = instance.decision_nodes().collect();
    let mut walk = Walk {
        instance,
        used: vec![false; nodes.len()],
        nodes,
        current: InterdictionPlan::new(),
        visit: &mut visit,
    };
    walk.period(0);
    Ok(())
}

/// Exact optimum by evaluating every plan; ties keep the first plan found.
pub fn brute_force(instance: &Instance, limit: u128) -> Result<BruteForce, FiredynError> {
    let mut best: Option<(InterdictionPlan, u32)> = None;
    let mut evaluated = 0u64;
    for_each_plan(instance, limit, |plan| {
        evaluated += 1;
        let dynamics = evaluate(instance, plan).expect("enumerated plans are valid");
        if let Objective::Feasible(v) = dynamics.objective() {
            if best.as_ref().is_none_or(|(_, b)| v < *b) {
                best = Some((plan.clone(), v));
            }
        }
    })?;
    let (plan, objective) = best.expect("the empty plan is always feasible");
    Ok(BruteForce {
        plan,
        objective,
        evaluated,
    })
}
