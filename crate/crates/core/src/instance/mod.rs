//! Problem instances: the landscape, ignitions, arrival-time target and the
//! schedule of suppression resources.

mod io;
mod presets;
mod random;
mod rng;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::netgraph::{self, Arc, GraphError, Network, NodeId, Time};

pub use io::{load, load_str, save, to_canonical_string, SCHEMA_VERSION};
pub use presets::{
    generate_large, large_preset, preset, small_preset, LargeKind, TRAVEL_TIME_ROWS,
};
pub use random::{random_instance, RANDOM_MAX_NODES};
pub use rng::SplitMix64;

#[derive(Debug, Error)]
pub enum InstanceError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("{field}: {message}")]
    Invalid { field: String, message: String },
    #[error("schema error at {path}: {message}")]
    Schema { path: String, message: String },
    #[error("unknown preset `{0}`")]
    UnknownPreset(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub(crate) fn invalid(field: impl Into<String>, message: impl Into<String>) -> InstanceError {
    InstanceError::Invalid {
        field: field.into(),
        message: message.into(),
    }
}

/// A validated problem instance.
///
/// Resources become available at the listed `periods`, `capacity[i]` of
/// them at `periods[i]`. A resource at node `n` adds `delta` minutes to
/// every arc leaving `n`; a node is protected when the fire reaches it no
/// earlier than `psi`.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    id: String,
    network: Network,
    ignitions: Vec<NodeId>,
    psi: Time,
    delta: Time,
    periods: Vec<Time>,
    capacity: Vec<u32>,
    labels: Option<Vec<(u32, u32)>>,
    generator: Option<GridSpec>,
    spread: Network,
    root: NodeId,
    is_ignition: Vec<bool>,
}

impl Instance {
    /// `schedule` lists `(time, resources)` pairs; it is sorted here and
    /// must not repeat a time.
    pub fn new(
        id: impl Into<String>,
        network: Network,
        ignitions: Vec<NodeId>,
        psi: Time,
        delta: Time,
        schedule: Vec<(Time, u32)>,
    ) -> Result<Self, InstanceError> {
        if psi <= 0 {
            return Err(invalid("psi", format!("must be positive, got {psi}")));
        }
        if delta <= 0 {
            return Err(invalid("delta", format!("must be positive, got {delta}")));
        }
        let mut schedule = schedule;
        schedule.sort_unstable_by_key(|&(t, _)| t);
        for (i, w) in schedule.windows(2).enumerate() {
            if w[0].0 == w[1].0 {
                return Err(invalid(
                    format!("periods[{}]", i + 1),
                    format!("time {} listed twice", w[0].0),
                ));
            }
        }
        for (i, &(t, _)) in schedule.iter().enumerate() {
            if t < 0 || t >= psi {
                return Err(invalid(
                    format!("periods[{i}]"),
                    format!("time {t} outside [0, psi = {psi})"),
                ));
            }
        }
        let mut ignitions = ignitions;
        ignitions.sort_unstable();
        ignitions.dedup();
        if ignitions.is_empty() {
            return Err(invalid(
                "ignitions",
                "at least one ignition node is required",
            ));
        }
        if let Some(&n) = ignitions.iter().find(|&&n| n >= network.node_count()) {
            return Err(invalid(
                "ignitions",
                format!("node {n} is not in the network"),
            ));
        }
        let (spread, root) = netgraph::super_source_reduce(&network, &ignitions)?;
        let mut is_ignition = vec![false; network.node_count()];
        for &n in &ignitions {
            is_ignition[n] = true;
        }
        Ok(Self {
            id: id.into(),
            ignitions,
            psi,
            delta,
            periods: schedule.iter().map(|&(t, _)| t).collect(),
            capacity: schedule.iter().map(|&(_, a)| a).collect(),
            labels: None,
            generator: None,
            spread,
            root,
            is_ignition,
            network,
        })
    }

    /// Attaches `(row, col)` grid coordinates, one per node.
    pub fn with_labels(mut self, labels: Vec<(u32, u32)>) -> Result<Self, InstanceError> {
        if labels.len() != self.node_count() {
            return Err(invalid(
                "labels",
                format!(
                    "expected {} labels, got {}",
                    self.node_count(),
                    labels.len()
                ),
            ));
        }
        self.labels = Some(labels);
        Ok(self)
    }

    pub fn with_generator(mut self, spec: GridSpec) -> Self {
        self.generator = Some(spec);
        self
    }

    pub fn with_id(mut self, id: impl Into<String>) -> Self {
        self.id = id.into();
        self
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn network(&self) -> &Network {
        &self.network
    }

    pub fn node_count(&self) -> usize {
        self.network.node_count()
    }

    pub fn ignitions(&self) -> &[NodeId] {
        &self.ignitions
    }

    pub fn is_ignition(&self, node: NodeId) -> bool {
        self.is_ignition.get(node).copied().unwrap_or(false)
    }

    pub fn psi(&self) -> Time {
        self.psi
    }

    pub fn delta(&self) -> Time {
        self.delta
    }

    pub fn periods(&self) -> &[Time] {
        &self.periods
    }

    /// Resources per period, parallel to [`Instance::periods`].
    pub fn capacity(&self) -> &[u32] {
        &self.capacity
    }

    pub fn period_index(&self, time: Time) -> Option<usize> {
        self.periods.binary_search(&time).ok()
    }

    pub fn total_capacity(&self) -> u32 {
        self.capacity.iter().sum()
    }

    pub fn labels(&self) -> Option<&[(u32, u32)]> {
        self.labels.as_deref()
    }

    pub fn generator(&self) -> Option<&GridSpec> {
        self.generator.as_ref()
    }

    /// `(rows, cols)` spanned by the labels, if this is a grid instance.
    pub fn grid_shape(&self) -> Option<(u32, u32)> {
        let labels = self.labels.as_ref()?;
        let rows = labels.iter().map(|l| l.0).max()? + 1;
        let cols = labels.iter().map(|l| l.1).max()? + 1;
        Some((rows, cols))
    }

    /// The network fire actually spreads on, with a single root. For a
    /// single ignition this is the landscape itself; otherwise a super-source
    /// with index `node_count()` is appended.
    pub fn spread_network(&self) -> (&Network, NodeId) {
        (&self.spread, self.root)
    }

    /// Nodes that may host a resource: every node except the ignitions.
    pub fn decision_nodes(&self) -> impl Iterator<Item = NodeId> + '_ {
        (0..self.node_count()).filter(|&n| !self.is_ignition[n])
    }

    /// Copy with a different resource schedule (same times).
    pub fn with_capacity(&self, capacity: Vec<u32>) -> Result<Self, InstanceError> {
        if capacity.len() != self.periods.len() {
            return Err(invalid(
                "capacity",
                format!(
                    "expected {} entries, got {}",
                    self.periods.len(),
                    capacity.len()
                ),
            ));
        }
        let mut out = self.clone();
        out.capacity = capacity;
        Ok(out)
    }
}

/// Parameters of a generated grid landscape.
///
/// Arc `u -> v` draws its travel time from the distribution of the compass
/// direction it points to: an arc to the northern neighbour uses `north`,
/// and so on. Row indices grow southwards, column indices eastwards.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridSpec {
    pub rows: u32,
    pub cols: u32,
    pub ignition: (u32, u32),
    pub north: (i64, i64),
    pub south: (i64, i64),
    pub east: (i64, i64),
    pub west: (i64, i64),
    pub seed: u64,
    pub psi: Time,
    pub delta: Time,
    pub periods: Vec<Time>,
    pub capacity: Vec<u32>,
}

impl GridSpec {
    pub fn validate(&self) -> Result<(), InstanceError> {
        if self.rows == 0 || self.cols == 0 {
            return Err(invalid("rows/cols", "grid must be non-empty"));
        }
        if self.ignition.0 >= self.rows || self.ignition.1 >= self.cols {
            return Err(invalid(
                "ignition",
                format!(
                    "({}, {}) outside a {}x{} grid",
                    self.ignition.0, self.ignition.1, self.rows, self.cols
                ),
            ));
        }
        for (name, (lo, hi)) in [
            ("north", self.north),
            ("south", self.south),
            ("east", self.east),
            ("west", self.west),
        ] {
            if lo < 1 || lo > hi {
                return Err(invalid(
                    name,
                    format!("bounds ({lo}, {hi}) need 1 <= lo <= hi"),
                ));
            }
        }
        if self.periods.len() != self.capacity.len() {
            return Err(invalid("capacity", "one entry per period is required"));
        }
        Ok(())
    }

    pub fn node_id(&self, row: u32, col: u32) -> NodeId {
        (row * self.cols + col) as NodeId
    }
}

/// Builds the grid landscape described by `spec`.
///
/// Draws are taken in row-major node order and, per node, in the order
/// north, south, east, west, skipping neighbours outside the grid.
pub fn generate_grid(spec: &GridSpec) -> Result<Instance, InstanceError> {
    spec.validate()?;
    let (rows, cols) = (spec.rows as i64, spec.cols as i64);
    let mut rng = SplitMix64::new(spec.seed);
    let mut arcs = Vec::with_capacity((4 * rows * cols) as usize);
    let mut labels = Vec::with_capacity((rows * cols) as usize);
    for r in 0..rows {
        for c in 0..cols {
            labels.push((r as u32, c as u32));
            let u = (r * cols + c) as NodeId;
            let moves = [
                (-1, 0, spec.north),
                (1, 0, spec.south),
                (0, 1, spec.east),
                (0, -1, spec.west),
            ];
            for (dr, dc, (lo, hi)) in moves {
                let (nr, nc) = (r + dr, c + dc);
                if (0..rows).contains(&nr) && (0..cols).contains(&nc) {
                    let v = (nr * cols + nc) as NodeId;
                    arcs.push(Arc::new(u, v, rng.uniform_inclusive(lo, hi)));
                }
            }
        }
    }
    let network = Network::new(labels.len(), arcs)?;
    let ignition = spec.node_id(spec.ignition.0, spec.ignition.1);
    let schedule = spec
        .periods
        .iter()
        .copied()
        .zip(spec.capacity.iter().copied())
        .collect();
    let id = format!("grid{}x{}-s{}", spec.rows, spec.cols, spec.seed);
    Ok(
        Instance::new(id, network, vec![ignition], spec.psi, spec.delta, schedule)?
            .with_labels(labels)?
            .with_generator(spec.clone()),
    )
}

/// Outcome of [`preprocess`], in the node numbering of the input instance.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PreprocessReport {
    pub kept: Vec<NodeId>,
    pub removed: Vec<NodeId>,
    /// Arrival times with no resources deployed.
    pub base_arrivals: Vec<Time>,
}

/// Drops every non-ignition node the fire cannot reach before `psi` even
/// when no resource is deployed. Resources only ever delay the fire, so
/// such nodes are protected by every plan and paths through them never
/// matter. Kept nodes are renumbered in increasing order.
pub fn preprocess(instance: &Instance) -> Result<(Instance, PreprocessReport), InstanceError> {
    let (spread, root) = instance.spread_network();
    let tree = netgraph::shortest_path_tree(spread, root);
    let n = instance.node_count();
    let base_arrivals: Vec<Time> = (0..n).map(|v| tree.dist(v)).collect();
    let (kept, removed): (Vec<NodeId>, Vec<NodeId>) =
        (0..n).partition(|&v| instance.is_ignition(v) || base_arrivals[v] < instance.psi());

    let mut new_id = vec![usize::MAX; n];
    for (i, &v) in kept.iter().enumerate() {
        new_id[v] = i;
    }
    let arcs = instance
        .network()
        .arcs()
        .iter()
        .filter(|a| new_id[a.tail] != usize::MAX && new_id[a.head] != usize::MAX)
        .map(|a| Arc::new(new_id[a.tail], new_id[a.head], a.weight))
        .collect();
    let network = Network::new(kept.len(), arcs)?;
    let ignitions = instance.ignitions().iter().map(|&v| new_id[v]).collect();
    let schedule = instance
        .periods()
        .iter()
        .copied()
        .zip(instance.capacity().iter().copied())
        .collect();
    let mut reduced = Instance::new(
        instance.id(),
        network,
        ignitions,
        instance.psi(),
        instance.delta(),
        schedule,
    )?;
    if let Some(labels) = instance.labels() {
        reduced = reduced.with_labels(kept.iter().map(|&v| labels[v]).collect())?;
    }
    if let Some(spec) = instance.generator() {
        reduced = reduced.with_generator(spec.clone());
    }
    Ok((
        reduced,
        PreprocessReport {
            kept,
            removed,
            base_arrivals,
        },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chain(psi: Time) -> Instance {
        let net = Network::new(3, vec![Arc::new(0, 1, 10), Arc::new(1, 2, 10)]).unwrap();
        Instance::new("chain", net, vec![0], psi, 50, vec![(psi - 1, 1)]).unwrap()
    }

    #[test]
    fn table_one_row_zero() {
        let spec = small_preset(0, 1).unwrap();
        let inst = generate_grid(&spec).unwrap();
        assert_eq!(inst.node_count(), 100);
        assert_eq!(inst.network().arc_count(), 360);
        assert_eq!(inst.psi(), 28);
        assert_eq!(inst.delta(), 50);
        assert_eq!(inst.periods(), &[10, 15]);
        assert_eq!(inst.capacity(), &[3, 3]);
        assert_eq!(inst.ignitions(), &[55]);
        assert_eq!(inst.grid_shape(), Some((10, 10)));
    }

    #[test]
    fn weights_follow_direction() {
        let spec = small_preset(0, 3).unwrap();
        let inst = generate_grid(&spec).unwrap();
        for a in inst.network().arcs() {
            let (lo, hi) = match a.head as i64 - a.tail as i64 {
                -10 => spec.north,
                10 => spec.south,
                1 => spec.east,
                -1 => spec.west,
                d => panic!("unexpected offset {d}"),
            };
            assert!((lo..=hi).contains(&a.weight), "{a:?}");
        }
    }

    #[test]
    fn one_by_two_grid() {
        let mut spec = small_preset(0, 9).unwrap();
        spec.rows = 1;
        spec.cols = 2;
        spec.ignition = (0, 0);
        let inst = generate_grid(&spec).unwrap();
        assert_eq!(inst.node_count(), 2);
        let arcs = inst.network().arcs();
        assert_eq!(arcs.len(), 2);
        let mut rng = SplitMix64::new(9);
        assert_eq!(arcs[0].weight, rng.uniform_inclusive(4, 6));
        assert_eq!(arcs[1].weight, rng.uniform_inclusive(6, 8));
    }

    #[test]
    fn rejects_bad_schedule() {
        let net = Network::new(2, vec![Arc::new(0, 1, 1)]).unwrap();
        let err = Instance::new("x", net.clone(), vec![0], 10, 5, vec![(10, 1)]).unwrap_err();
        assert!(matches!(err, InstanceError::Invalid { ref field, .. } if field == "periods[0]"));
        assert!(Instance::new("x", net.clone(), vec![], 10, 5, vec![]).is_err());
        assert!(Instance::new("x", net.clone(), vec![0], 10, 0, vec![]).is_err());
        assert!(Instance::new("x", net, vec![0], 10, 5, vec![(1, 1), (1, 2)]).is_err());
    }

    #[test]
    fn preprocess_keeps_everything_when_all_burn() {
        let inst = chain(100);
        let (out, report) = preprocess(&inst).unwrap();
        assert_eq!(out, inst);
        assert!(report.removed.is_empty());
        assert_eq!(report.base_arrivals, vec![0, 10, 20]);
    }

    #[test]
    fn preprocess_tiny_psi_keeps_only_ignition() {
        let inst = chain(5);
        let (out, report) = preprocess(&inst).unwrap();
        assert_eq!(out.node_count(), 1);
        assert_eq!(report.kept, vec![0]);
        assert_eq!(report.removed, vec![1, 2]);
        assert_eq!(out.network().arc_count(), 0);
    }

    #[test]
    fn preprocess_renumbers_labels() {
        let inst = generate_grid(&small_preset(0, 1).unwrap()).unwrap();
        let (out, report) = preprocess(&inst).unwrap();
        assert_eq!(report.kept.len() + report.removed.len(), 100);
        assert_eq!(out.node_count(), report.kept.len());
        for (new, &old) in report.kept.iter().enumerate() {
            assert_eq!(out.labels().unwrap()[new], inst.labels().unwrap()[old]);
            assert!(report.base_arrivals[old] < 28 || inst.is_ignition(old));
        }
        for &old in &report.removed {
            assert!(report.base_arrivals[old] >= 28);
        }
        assert_eq!(out.ignitions().len(), 1);
        assert_eq!(out.labels().unwrap()[out.ignitions()[0]], (5, 5));
    }
}
