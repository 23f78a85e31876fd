//! Independent checking of reported solutions.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::firedyn::{self, InterdictionPlan, Objective, Placement, PlanError};
use crate::instance::Instance;
use crate::netgraph::NodeId;

/// Tolerance on reported arrival times.
pub const ARRIVAL_TOLERANCE: f64 = 1e-6;

/// A solution as reported by some method, in the JSON solution-file shape.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolutionClaim {
    pub placements: Vec<Placement>,
    /// Claimed number of unprotected nodes.
    #[serde(default)]
    pub objective: Option<u32>,
    /// Claimed arrival time per node (`null` where not reported).
    #[serde(default)]
    pub arrivals: Option<Vec<Option<f64>>>,
    /// Nodes claimed to be unprotected.
    #[serde(default)]
    pub unprotected: Option<Vec<NodeId>>,
}

impl SolutionClaim {
    pub fn from_plan(plan: &InterdictionPlan, objective: Option<u32>) -> Self {
        Self {
            placements: plan.placements().copied().collect(),
            objective,
            arrivals: None,
            unprotected: None,
        }
    }

    pub fn plan(&self) -> InterdictionPlan {
        self.placements.iter().copied().collect()
    }

    pub fn load(path: impl AsRef<Path>) -> std::io::Result<Self> {
        let text = std::fs::read_to_string(path)?;
        serde_json::from_str(&text).map_err(std::io::Error::other)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> std::io::Result<()> {
        let mut text = serde_json::to_string_pretty(self).map_err(std::io::Error::other)?;
        text.push('\n');
        std::fs::write(path, text)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyReport {
    pub structural: Vec<PlanError>,
    /// Placements on nodes that were already burning.
    pub violations: Vec<Placement>,
    /// Objective recomputed from the placements alone.
    pub recomputed: Option<u32>,
    pub claimed: Option<u32>,
    /// `(node, claimed, recomputed)` arrival mismatches.
    pub arrival_mismatches: Vec<(NodeId, f64, i64)>,
    /// Nodes whose claimed protection status is wrong.
    pub protection_mismatches: Vec<NodeId>,
}

impl VerifyReport {
    pub fn objective_matches(&self) -> bool {
        match (self.claimed, self.recomputed) {
            (Some(c), Some(r)) => c == r,
            (None, _) => true,
            (Some(_), None) => false,
        }
    }

    pub fn is_valid(&self) -> bool {
        self.structural.is_empty()
            && self.violations.is_empty()
            && self.objective_matches()
            && self.arrival_mismatches.is_empty()
            && self.protection_mismatches.is_empty()
    }
}

/// Recomputes the fire dynamics of the claimed placements and compares
/// every claimed quantity against them.
pub fn verify_solution(instance: &Instance, claim: &SolutionClaim) -> VerifyReport {
    let plan = claim.plan();
    let structural = plan.check(instance);
    let mut report = VerifyReport {
        structural,
        violations: Vec::new(),
        recomputed: None,
        claimed: claim.objective,
        arrival_mismatches: Vec::new(),
        protection_mismatches: Vec::new(),
    };
    if report
        .structural
        .iter()
        .any(|e| matches!(e, PlanError::UnknownNode { .. }))
    {
        return report;
    }
    let dynamics = firedyn::evaluate(instance, &plan).expect("nodes were checked");
    report.violations = dynamics.violations().to_vec();
    report.recomputed = match dynamics.objective() {
        Objective::Feasible(v) => Some(v),
        Objective::Infeasible { .. } => None,
    };
    if let Some(arrivals) = &claim.arrivals {
        for (n, claimed) in arrivals.iter().enumerate().take(instance.node_count()) {
            if let Some(c) = *claimed {
                let d = dynamics.arrival(n);
                if (c - d as f64).abs() > ARRIVAL_TOLERANCE {
                    report.arrival_mismatches.push((n, c, d));
                }
            }
        }
    }
    if let Some(unprotected) = &claim.unprotected {
        let mut claimed = vec![false; instance.node_count()];
        for &n in unprotected.iter().filter(|&&n| n < instance.node_count()) {
            claimed[n] = true;
        }
        report.protection_mismatches = (0..instance.node_count())
            .filter(|&n| claimed[n] != dynamics.is_unprotected(n))
            .collect();
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netgraph::{Arc, Network};

    fn chain() -> Instance {
        let net = Network::new(3, vec![Arc::new(0, 1, 10), Arc::new(1, 2, 10)]).unwrap();
        Instance::new("chain", net, vec![0], 25, 50, vec![(5, 1)]).unwrap()
    }

    #[test]
    fn empty_plan() {
        let claim = SolutionClaim {
            objective: Some(3),
            ..Default::default()
        };
        let r = verify_solution(&chain(), &claim);
        assert!(r.is_valid());
        assert_eq!(r.recomputed, Some(3));
    }

    #[test]
    fn flipped_protection_is_flagged() {
        let claim = SolutionClaim {
            placements: vec![Placement::new(1, 5)],
            objective: Some(2),
            arrivals: Some(vec![Some(0.0), Some(10.0), Some(70.0)]),
            unprotected: Some(vec![0, 1]),
        };
        assert!(verify_solution(&chain(), &claim).is_valid());
        let mut bad = claim.clone();
        bad.unprotected = Some(vec![0, 1, 2]);
        assert_eq!(
            verify_solution(&chain(), &bad).protection_mismatches,
            vec![2]
        );
        let mut bad = claim;
        bad.arrivals = Some(vec![Some(0.0), Some(10.0), Some(20.0)]);
        assert_eq!(
            verify_solution(&chain(), &bad).arrival_mismatches,
            vec![(2, 20.0, 70)]
        );
    }

    #[test]
    fn violations_and_capacity() {
        let late = SolutionClaim {
            placements: vec![Placement::new(1, 5)],
            ..Default::default()
        };
        let net = Network::new(3, vec![Arc::new(0, 1, 1), Arc::new(1, 2, 10)]).unwrap();
        let inst = Instance::new("fast", net, vec![0], 25, 50, vec![(5, 1)]).unwrap();
        let r = verify_solution(&inst, &late);
        assert_eq!(r.violations, vec![Placement::new(1, 5)]);
        assert!(!r.is_valid());
        let over = SolutionClaim {
            placements: vec![Placement::new(1, 5), Placement::new(2, 5)],
            ..Default::default()
        };
        let r = verify_solution(&chain(), &over);
        assert!(matches!(
            r.structural[..],
            [PlanError::CapacityExceeded { time: 5, .. }]
        ));
    }

    #[test]
    fn json_shape() {
        let claim = SolutionClaim::from_plan(
            &InterdictionPlan::from_placements([Placement::new(1, 5)]),
            Some(2),
        );
        let text = serde_json::to_string(&claim).unwrap();
        assert_eq!(
            text,
            r#"{"placements":[{"node":1,"time":5}],"objective":2,"arrivals":null,"unprotected":null}"#
        );
        let back: SolutionClaim = serde_json::from_str(r#"{"placements":[]}"#).unwrap();
        assert!(back.placements.is_empty());
    }
}
