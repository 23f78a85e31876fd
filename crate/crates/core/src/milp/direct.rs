//! The direct MIP: shortest-path-tree flow, its dual with interdicted arc
//! lengths, complementary slackness by big-M, and the resource rules.
//!
//! Variables, per arc `a` of the spread network: `x` (paths through `a`),
//! `s` (dual slack), `q` (arc is in the tree). Per node: `lm` (arrival
//! time) and `y` (node burns before the target). Per decision node and
//! period: `z`. Nodes the fire can never reach are left out; they are
//! protected by every plan and would make the flow rows infeasible.

use crate::firedyn::{InterdictionPlan, Placement};
use crate::instance::Instance;
use crate::netgraph::{self, NodeId, Time};

use super::{ColumnKind, MilpError, MilpModel, Row, Sense};

/// Column indices of the direct MIP, for reading solutions back.
#[derive(Debug, Clone)]
pub struct DirectLayout {
    pub root: NodeId,
    /// Per spread-network arc index.
    pub x: Vec<Option<usize>>,
    pub s: Vec<Option<usize>>,
    pub q: Vec<Option<usize>>,
    /// Per spread-network node.
    pub arrival: Vec<Option<usize>>,
    /// Per landscape node.
    pub y: Vec<Option<usize>>,
    /// `(node, period index, column)`.
    pub z: Vec<(NodeId, usize, usize)>,
    pub big_m: f64,
}

impl DirectLayout {
    pub fn plan(&self, instance: &Instance, values: &[f64]) -> InterdictionPlan {
        self.z
            .iter()
            .filter(|&&(_, _, j)| values[j] > 0.5)
            .map(|&(n, k, _)| Placement::new(n, instance.periods()[k]))
            .collect()
    }

    /// Arrival time per landscape node, `None` where the node is unreachable.
    pub fn arrivals(&self, instance: &Instance, values: &[f64]) -> Vec<Option<f64>> {
        (0..instance.node_count())
            .map(|n| self.arrival[n].map(|j| values[j]))
            .collect()
    }

    /// Landscape nodes whose `y` is set.
    pub fn unprotected(&self, values: &[f64]) -> Vec<NodeId> {
        (0..self.y.len())
            .filter(|&n| self.y[n].is_some_and(|j| values[j] > 0.5))
            .collect()
    }

    /// Column values describing `plan`, for checking a plan against the
    /// model.
    pub fn z_values(&self, instance: &Instance, plan: &InterdictionPlan) -> Vec<(usize, f64)> {
        self.z
            .iter()
            .map(|&(n, k, j)| {
                let on = plan.contains(n, instance.periods()[k]);
                (j, if on { 1.0 } else { 0.0 })
            })
            .collect()
    }
}

/// How the complementary-slackness constant is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BigMRule {
    /// `(nodes - 1) * max_weight + (resources - 1) * delta`. Too small when
    /// an arc leads from the end of a long interdicted path back to an early
    /// node; see [`slack_bound`].
    PathLength,
    /// [`slack_bound`], which no dual slack can exceed.
    #[default]
    SlackBound,
}

/// Largest possible slack `lambda_tail + c + delta * z_tail - lambda_head`:
/// `nodes * max_weight + resources * delta`.
pub fn slack_bound(nodes: usize, max_weight: Time, resources: u32, delta: Time) -> f64 {
    nodes as f64 * max_weight as f64 + f64::from(resources) * delta as f64
}

/// `(nodes - 1) * max_weight + (resources - 1) * delta`.
pub fn big_m(nodes: usize, max_weight: Time, resources: u32, delta: Time) -> f64 {
    let nodes = nodes as f64;
    (nodes - 1.0) * max_weight as f64 + (f64::from(resources) - 1.0) * delta as f64
}

/// Builds the direct MIP for `instance` over its spread network, with the
/// default [`BigMRule`].
pub fn build_direct_mip(instance: &Instance) -> Result<(MilpModel, DirectLayout), MilpError> {
    build_direct_mip_with(instance, BigMRule::default())
}

/// Builds the direct MIP with an explicit big-M rule.
///
/// The rule forbidding placements on burning nodes is written as
/// `t * z <= lambda`, which also holds for `t = 0`.
pub fn build_direct_mip_with(
    instance: &Instance,
    rule: BigMRule,
) -> Result<(MilpModel, DirectLayout), MilpError> {
    let (spread, root) = instance.spread_network();
    let tree = netgraph::shortest_path_tree(spread, root);
    let reachable: Vec<bool> = (0..spread.node_count())
        .map(|v| tree.is_reachable(v))
        .collect();
    let node_count = reachable.iter().filter(|&&r| r).count();
    let arcs: Vec<usize> = (0..spread.arc_count())
        .filter(|&a| reachable[spread.arc(a).tail])
        .collect();
    let max_weight = arcs
        .iter()
        .map(|&a| spread.arc(a).weight)
        .max()
        .unwrap_or(0);
    let delta = instance.delta();
    let resources = instance.total_capacity();
    let m = match rule {
        BigMRule::PathLength => big_m(node_count, max_weight, resources, delta),
        BigMRule::SlackBound => slack_bound(node_count, max_weight, resources, delta),
    };
    let latest =
        (node_count as f64 - 1.0) * max_weight as f64 + f64::from(resources) * delta as f64;
    let flow = node_count as f64 - 1.0;

    let mut model = MilpModel::new(instance.id(), "direct");
    let mut layout = DirectLayout {
        root,
        x: vec![None; spread.arc_count()],
        s: vec![None; spread.arc_count()],
        q: vec![None; spread.arc_count()],
        arrival: vec![None; spread.node_count()],
        y: vec![None; instance.node_count()],
        z: Vec::new(),
        big_m: m,
    };
    for &a in &arcs {
        layout.x[a] =
            Some(model.add_column(format!("x{a}"), ColumnKind::Continuous, 0.0, flow, 0.0)?);
        layout.s[a] = Some(model.add_column(
            format!("s{a}"),
            ColumnKind::Continuous,
            0.0,
            latest + (max_weight + delta) as f64,
            0.0,
        )?);
        layout.q[a] = Some(model.add_binary(format!("q{a}"), 0.0)?);
    }
    for v in (0..spread.node_count()).filter(|&v| reachable[v]) {
        layout.arrival[v] =
            Some(model.add_column(format!("lm{v}"), ColumnKind::Continuous, 0.0, latest, 0.0)?);
        if v < instance.node_count() {
            layout.y[v] = Some(model.add_binary(format!("y{v}"), 1.0)?);
        }
    }
    let mut z_of: Vec<Vec<usize>> = vec![Vec::new(); spread.node_count()];
    for v in instance
        .decision_nodes()
        .filter(|&v| reachable[v] && v != root)
    {
        for k in 0..instance.periods().len() {
            let j = model.add_binary(format!("z{v}t{k}"), 0.0)?;
            layout.z.push((v, k, j));
            z_of[v].push(j);
        }
    }
    let col = |c: &Vec<Option<usize>>, i: usize| c[i].expect("column exists for reachable items");

    let out_flow = spread
        .out_arcs(root)
        .map(|(a, _)| (col(&layout.x, a), 1.0))
        .collect();
    model.add_row(Row::new("flow", Sense::Eq, flow, out_flow))?;
    let mut in_arcs: Vec<Vec<usize>> = vec![Vec::new(); spread.node_count()];
    for &a in &arcs {
        in_arcs[spread.arc(a).head].push(a);
    }
    for v in (0..spread.node_count()).filter(|&v| reachable[v] && v != root) {
        let mut terms: Vec<(usize, f64)> = in_arcs[v]
            .iter()
            .map(|&a| (col(&layout.x, a), 1.0))
            .collect();
        terms.extend(spread.out_arcs(v).map(|(a, _)| (col(&layout.x, a), -1.0)));
        model.add_row(Row::new(format!("bal{v}"), Sense::Eq, 1.0, terms))?;
    }
    for &a in &arcs {
        let arc = spread.arc(a);
        let mut terms = vec![
            (col(&layout.arrival, arc.head), 1.0),
            (col(&layout.arrival, arc.tail), -1.0),
            (col(&layout.s, a), 1.0),
        ];
        terms.extend(z_of[arc.tail].iter().map(|&j| (j, -(delta as f64))));
        model.add_row(Row::new(
            format!("dual{a}"),
            Sense::Eq,
            arc.weight as f64,
            terms,
        ))?;
    }
    model.add_row(Row::new(
        "root",
        Sense::Eq,
        0.0,
        vec![(col(&layout.arrival, root), 1.0)],
    ))?;
    for &a in &arcs {
        model.add_row(Row::new(
            format!("link{a}"),
            Sense::Le,
            0.0,
            vec![(col(&layout.x, a), 1.0), (col(&layout.q, a), -flow)],
        ))?;
        model.add_row(Row::new(
            format!("slk{a}"),
            Sense::Le,
            m,
            vec![(col(&layout.s, a), 1.0), (col(&layout.q, a), m)],
        ))?;
    }
    for (k, &a_t) in instance.capacity().iter().enumerate() {
        let terms = layout
            .z
            .iter()
            .filter(|&&(_, kk, _)| kk == k)
            .map(|&(_, _, j)| (j, 1.0))
            .collect();
        model.add_row(Row::new(
            format!("cap{k}"),
            Sense::Le,
            f64::from(a_t),
            terms,
        ))?;
    }
    for (v, cols) in z_of.iter().enumerate().filter(|(_, c)| !c.is_empty()) {
        let terms = cols.iter().map(|&j| (j, 1.0)).collect();
        model.add_row(Row::new(format!("one{v}"), Sense::Le, 1.0, terms))?;
    }
    for &(v, k, j) in &layout.z {
        let t = instance.periods()[k] as f64;
        model.add_row(Row::new(
            format!("tm{v}t{k}"),
            Sense::Le,
            0.0,
            vec![(j, t), (col(&layout.arrival, v), -1.0)],
        ))?;
    }
    let psi = instance.psi() as f64;
    for v in (0..instance.node_count()).filter(|&v| reachable[v]) {
        model.add_row(Row::new(
            format!("prot{v}"),
            Sense::Ge,
            psi,
            vec![(col(&layout.y, v), psi), (col(&layout.arrival, v), 1.0)],
        ))?;
    }
    Ok((model, layout))
}
