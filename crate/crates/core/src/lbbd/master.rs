//! The master problem: placement and `theta` columns, resource rows and
//! one row per cut.

use std::collections::BTreeMap;

use crate::firedyn::{InterdictionPlan, Placement};
use crate::instance::Instance;
use crate::milp::{ColumnKind, MilpError, MilpModel, Row, Sense};
use crate::netgraph::NodeId;

use super::cuts::{BendersCut, CutKind, CutPool};

/// Placements in the first `periods` periods are fixed to those of `plan`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PeriodFix {
    pub periods: usize,
    pub plan: InterdictionPlan,
}

impl PeriodFix {
    /// The fixed placements that lie in the fixed periods.
    pub fn base_plan(&self, instance: &Instance) -> InterdictionPlan {
        self.plan
            .placements()
            .filter(|p| {
                instance
                    .period_index(p.time)
                    .is_some_and(|k| k < self.periods)
            })
            .copied()
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Slot {
    Absent,
    One,
    Free,
}

fn slot(instance: &Instance, fix: &PeriodFix, p: Placement) -> Slot {
    let Some(k) = instance.period_index(p.time) else {
        return Slot::Absent;
    };
    if instance.capacity()[k] == 0 || instance.is_ignition(p.node) {
        Slot::Absent
    } else if k < fix.periods {
        if fix.plan.contains(p.node, p.time) {
            Slot::One
        } else {
            Slot::Absent
        }
    } else {
        Slot::Free
    }
}

/// Column indices of a master model.
#[derive(Debug, Clone)]
pub struct MasterLayout {
    pub z: BTreeMap<Placement, usize>,
    /// Per landscape node.
    pub theta: Vec<Option<usize>>,
    /// Free placement columns no cut mentions yet.
    pub blocked: Vec<usize>,
}

impl MasterLayout {
    pub fn plan(&self, values: &[f64]) -> InterdictionPlan {
        self.z
            .iter()
            .filter(|&(_, &j)| values[j] > 0.5)
            .map(|(&p, _)| p)
            .collect()
    }

    /// `theta` per node, zero where the node has no column.
    pub fn theta(&self, values: &[f64]) -> Vec<f64> {
        self.theta
            .iter()
            .map(|c| c.map_or(0.0, |j| values[j]))
            .collect()
    }

    /// Column values of `plan` with the smallest `theta` the cuts allow.
    pub fn values(
        &self,
        model: &MilpModel,
        plan: &InterdictionPlan,
        pool: &CutPool,
        node_count: usize,
    ) -> Vec<f64> {
        let mut values = vec![0.0; model.columns().len()];
        for (p, &j) in &self.z {
            if plan.contains(p.node, p.time) {
                values[j] = 1.0;
            }
        }
        let theta = pool.theta(plan, node_count);
        for (n, c) in self.theta.iter().enumerate() {
            if let Some(j) = *c {
                values[j] = *theta[n].numer() as f64 / *theta[n].denom() as f64;
            }
        }
        values
    }

    /// The cut as a master row, or `None` when it holds for every plan the
    /// layout can express.
    pub fn row(&self, name: String, cut: &BendersCut) -> Option<Row> {
        let mut terms: Vec<(usize, f64)> = cut
            .terms
            .iter()
            .filter_map(|p| self.z.get(p).map(|&j| (j, 1.0)))
            .collect();
        let k = f64::from(cut.divisor);
        match cut.kind {
            CutKind::Optimality { node } => {
                let theta = self.theta[node]?;
                terms.push((theta, k));
                Some(Row::new(name, Sense::Ge, k, terms))
            }
            CutKind::Feasibility { anchor } => {
                let j = *self.z.get(&anchor)?;
                terms.push((j, -k));
                Some(Row::new(name, Sense::Ge, 0.0, terms))
            }
        }
    }
}

/// Builds the master over the cuts in `pool`.
///
/// With `all_columns`, every free placement gets a column and those not yet
/// in a cut are listed as blocked; otherwise only covered placements get
/// one, and `theta` columns exist only for nodes with an optimality cut.
pub fn build_master(
    instance: &Instance,
    pool: &CutPool,
    fix: &PeriodFix,
    all_columns: bool,
) -> Result<(MilpModel, MasterLayout), MilpError> {
    let mut model = MilpModel::new(instance.id(), "master");
    let mut layout = MasterLayout {
        z: BTreeMap::new(),
        theta: vec![None; instance.node_count()],
        blocked: Vec::new(),
    };
    let mut has_cut = vec![all_columns; instance.node_count()];
    for cut in pool.cuts() {
        if let CutKind::Optimality { node } = cut.kind {
            has_cut[node] = true;
        }
    }
    for (n, _) in has_cut.iter().enumerate().filter(|(_, &c)| c) {
        layout.theta[n] =
            Some(model.add_column(format!("th{n}"), ColumnKind::Continuous, 0.0, 1.0, 1.0)?);
    }
    let mut by_period: Vec<Vec<usize>> = vec![Vec::new(); instance.periods().len()];
    let mut by_node: BTreeMap<NodeId, Vec<usize>> = BTreeMap::new();
    for n in instance.decision_nodes() {
        for (k, &t) in instance.periods().iter().enumerate() {
            let p = Placement::new(n, t);
            let s = slot(instance, fix, p);
            let covered = pool.covers(p);
            let j = match s {
                Slot::Absent => continue,
                Slot::One => {
                    model.add_column(format!("z{n}t{k}"), ColumnKind::Binary, 1.0, 1.0, 0.0)?
                }
                Slot::Free if all_columns || covered => {
                    let j = model.add_binary(format!("z{n}t{k}"), 0.0)?;
                    if !covered {
                        layout.blocked.push(j);
                    }
                    j
                }
                Slot::Free => continue,
            };
            layout.z.insert(p, j);
            by_period[k].push(j);
            by_node.entry(n).or_default().push(j);
        }
    }
    for (k, cols) in by_period.iter().enumerate() {
        let terms = cols.iter().map(|&j| (j, 1.0)).collect();
        model.add_row(Row::new(
            format!("cap{k}"),
            Sense::Le,
            f64::from(instance.capacity()[k]),
            terms,
        ))?;
    }
    for (n, cols) in by_node.iter().filter(|(_, c)| c.len() > 1) {
        let terms = cols.iter().map(|&j| (j, 1.0)).collect();
        model.add_row(Row::new(format!("one{n}"), Sense::Le, 1.0, terms))?;
    }
    for (i, cut) in pool.cuts().iter().enumerate() {
        if let Some(row) = layout.row(cut_name(i, cut), cut) {
            model.add_row(row)?;
        }
    }
    Ok((model, layout))
}

pub(crate) fn cut_name(index: usize, cut: &BendersCut) -> String {
    match cut.kind {
        CutKind::Optimality { .. } => format!("o{index}"),
        CutKind::Feasibility { .. } => format!("f{index}"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lbbd::cuts::{initial_cuts, CutStrength};
    use crate::netgraph::{Arc, Network};

    fn chain() -> Instance {
        let net = Network::new(3, vec![Arc::new(0, 1, 10), Arc::new(1, 2, 10)]).unwrap();
        Instance::new("chain", net, vec![0], 25, 50, vec![(5, 1), (20, 0)]).unwrap()
    }

    #[test]
    fn restricted_master() {
        let inst = chain();
        let mut pool = CutPool::new();
        for c in initial_cuts(&inst, CutStrength::Strengthened) {
            pool.insert(c);
        }
        let (model, layout) = build_master(&inst, &pool, &PeriodFix::default(), false).unwrap();
        // theta for all three burning nodes, z only for 1@5.
        assert_eq!(model.columns().len(), 4);
        assert_eq!(
            layout.z.keys().copied().collect::<Vec<_>>(),
            vec![Placement::new(1, 5)]
        );
        let o2 = model.row("o2").unwrap();
        assert_eq!(o2.sense, Sense::Ge);
        assert_eq!(o2.rhs, 1.0);
        assert!(layout.blocked.is_empty());
        let plan = InterdictionPlan::from_placements([Placement::new(1, 5)]);
        let v = layout.values(&model, &plan, &pool, 3);
        assert_eq!(model.objective(&v), 2.0);
        assert!(model.max_violation(&v) < 1e-9);
    }

    #[test]
    fn full_master_blocks_uncovered() {
        let inst = chain();
        let mut pool = CutPool::new();
        for c in initial_cuts(&inst, CutStrength::Strengthened) {
            pool.insert(c);
        }
        let (model, layout) = build_master(&inst, &pool, &PeriodFix::default(), true).unwrap();
        // Period 20 has no capacity, so only 1@5 and 2@5.
        assert_eq!(layout.z.len(), 2);
        assert_eq!(layout.blocked, vec![layout.z[&Placement::new(2, 5)]]);
        assert_eq!(model.columns().len(), 5);
    }

    #[test]
    fn fixed_periods() {
        let net = Network::new(3, vec![Arc::new(0, 1, 10), Arc::new(1, 2, 10)]).unwrap();
        let inst = Instance::new("chain", net, vec![0], 25, 50, vec![(5, 1), (20, 1)]).unwrap();
        let fix = PeriodFix {
            periods: 1,
            plan: InterdictionPlan::from_placements([Placement::new(1, 5)]),
        };
        let (model, layout) = build_master(&inst, &CutPool::new(), &fix, true).unwrap();
        let j = layout.z[&Placement::new(1, 5)];
        assert_eq!(model.columns()[j].lower, 1.0);
        assert!(!layout.z.contains_key(&Placement::new(2, 5)));
        assert!(layout.z.contains_key(&Placement::new(2, 20)));
        assert_eq!(fix.base_plan(&inst).len(), 1);
    }
}
