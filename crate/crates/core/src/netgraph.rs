//! Directed landscape graphs and deterministic shortest-path trees.
//!
//! Arc weights are integer minutes. The only arcs allowed to carry a zero
//! weight are the ones leaving a super-source created by
//! [`super_source_reduce`].

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Dense node identifier, `0..node_count`.
pub type NodeId = usize;

/// Travel or arrival time in integer minutes.
pub type Time = i64;

/// Distance reported for nodes the fire can never reach.
pub const UNREACHABLE: Time = Time::MAX;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GraphError {
    #[error("network must contain at least one node")]
    Empty,
    #[error("arc {index} references node {node}, but the network has {node_count} nodes")]
    InvalidNode {
        index: usize,
        node: NodeId,
        node_count: usize,
    },
    #[error("arc {index} is a self-loop at node {node}")]
    SelfLoop { index: usize, node: NodeId },
    #[error("arc ({tail}, {head}) appears more than once")]
    DuplicateArc { tail: NodeId, head: NodeId },
    #[error("arc ({tail}, {head}) has non-positive weight {weight}")]
    NonPositiveWeight {
        tail: NodeId,
        head: NodeId,
        weight: Time,
    },
    #[error("ignition set is empty")]
    NoIgnition,
    #[error("node {node} is not in the network")]
    UnknownNode { node: NodeId },
    #[error("node {node} is not reachable from the root {root}")]
    Unreachable { node: NodeId, root: NodeId },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Arc {
    pub tail: NodeId,
    pub head: NodeId,
    pub weight: Time,
}

impl Arc {
    pub fn new(tail: NodeId, head: NodeId, weight: Time) -> Self {
        Self { tail, head, weight }
    }
}

/// A weighted directed graph in compressed adjacency form.
///
/// Arcs are kept sorted by `(tail, head)`, so the outgoing arcs of a node
/// form one contiguous slice and arc indices are stable across
/// re-weightings produced by [`Network::reweighted`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Network {
    node_count: usize,
    arcs: Vec<Arc>,
    out_start: Vec<usize>,
    zero_weight_tail: Option<NodeId>,
}

impl Network {
    /// Builds a network, rejecting self-loops, parallel arcs and any weight
    /// that is not strictly positive.
    pub fn new(node_count: usize, arcs: Vec<Arc>) -> Result<Self, GraphError> {
        Self::build(node_count, arcs, None)
    }

    fn build(
        node_count: usize,
        mut arcs: Vec<Arc>,
        zero_weight_tail: Option<NodeId>,
    ) -> Result<Self, GraphError> {
        if node_count == 0 {
            return Err(GraphError::Empty);
        }
        for (index, arc) in arcs.iter().enumerate() {
            for node in [arc.tail, arc.head] {
                if node >= node_count {
                    return Err(GraphError::InvalidNode {
                        index,
                        node,
                        node_count,
                    });
                }
            }
            if arc.tail == arc.head {
                return Err(GraphError::SelfLoop {
                    index,
                    node: arc.tail,
                });
            }
            let zero_ok = Some(arc.tail) == zero_weight_tail && arc.weight == 0;
            if arc.weight <= 0 && !zero_ok {
                return Err(GraphError::NonPositiveWeight {
                    tail: arc.tail,
                    head: arc.head,
                    weight: arc.weight,
                });
            }
        }
        arcs.sort_unstable_by_key(|a| (a.tail, a.head));
        if let Some(w) = arcs
            .windows(2)
            .find(|w| (w[0].tail, w[0].head) == (w[1].tail, w[1].head))
        {
            return Err(GraphError::DuplicateArc {
                tail: w[0].tail,
                head: w[0].head,
            });
        }
        let mut out_start = vec![0; node_count + 1];
        for arc in &arcs {
            out_start[arc.tail + 1] += 1;
        }
        for i in 0..node_count {
            out_start[i + 1] += out_start[i];
        }
        Ok(Self {
            node_count,
            arcs,
            out_start,
            zero_weight_tail,
        })
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn arc_count(&self) -> usize {
        self.arcs.len()
    }

    /// All arcs, sorted by `(tail, head)`.
    pub fn arcs(&self) -> &[Arc] {
        &self.arcs
    }

    pub fn arc(&self, index: usize) -> Arc {
        self.arcs[index]
    }

    /// Outgoing arcs of `node` together with their arc indices.
    pub fn out_arcs(&self, node: NodeId) -> impl Iterator<Item = (usize, &Arc)> + '_ {
        let range = self.out_start[node]..self.out_start[node + 1];
        range.clone().zip(self.arcs[range].iter())
    }

    pub fn out_degree(&self, node: NodeId) -> usize {
        self.out_start[node + 1] - self.out_start[node]
    }

    /// Index of arc `(tail, head)` if present.
    pub fn find_arc(&self, tail: NodeId, head: NodeId) -> Option<usize> {
        let range = self.out_start[tail]..self.out_start[tail + 1];
        self.arcs[range.clone()]
            .binary_search_by_key(&head, |a| a.head)
            .ok()
            .map(|i| range.start + i)
    }

    pub fn max_weight(&self) -> Time {
        self.arcs.iter().map(|a| a.weight).max().unwrap_or(0)
    }

    /// Node that is allowed zero-weight outgoing arcs, if this network was
    /// produced by a super-source reduction.
    pub fn super_source(&self) -> Option<NodeId> {
        self.zero_weight_tail
    }

    /// Same topology with every arc weight replaced by `weight(index, arc)`.
    pub fn reweighted(&self, mut weight: impl FnMut(usize, &Arc) -> Time) -> Self {
        let arcs = self
            .arcs
            .iter()
            .enumerate()
            .map(|(i, a)| Arc::new(a.tail, a.head, weight(i, a)))
            .collect();
        Self {
            node_count: self.node_count,
            arcs,
            out_start: self.out_start.clone(),
            zero_weight_tail: self.zero_weight_tail,
        }
    }
}

/// Reduces a multi-ignition network to a single root.
///
/// A single ignition leaves the network untouched. Otherwise one node is
/// appended with a zero-weight arc to every ignition node and becomes the
/// root.
pub fn super_source_reduce(
    network: &Network,
    ignitions: &[NodeId],
) -> Result<(Network, NodeId), GraphError> {
    let mut unique: Vec<NodeId> = ignitions.to_vec();
    unique.sort_unstable();
    unique.dedup();
    if unique.is_empty() {
        return Err(GraphError::NoIgnition);
    }
    if let Some(&node) = unique.iter().find(|&&n| n >= network.node_count()) {
        return Err(GraphError::UnknownNode { node });
    }
    if let [root] = unique[..] {
        return Ok((network.clone(), root));
    }
    let root = network.node_count();
    let mut arcs = network.arcs.clone();
    arcs.extend(unique.iter().map(|&n| Arc::new(root, n, 0)));
    Ok((Network::build(root + 1, arcs, Some(root))?, root))
}

/// Single-source shortest paths with one fixed predecessor per node.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ShortestPathTree {
    root: NodeId,
    dist: Vec<Time>,
    pred: Vec<Option<usize>>,
    pred_tail: Vec<Option<NodeId>>,
}

impl ShortestPathTree {
    pub fn root(&self) -> NodeId {
        self.root
    }

    /// Distance from the root, [`UNREACHABLE`] when no path exists.
    pub fn dist(&self, node: NodeId) -> Time {
        self.dist[node]
    }

    pub fn distances(&self) -> &[Time] {
        &self.dist
    }

    pub fn is_reachable(&self, node: NodeId) -> bool {
        self.dist[node] != UNREACHABLE
    }

    /// Index of the tree arc entering `node`.
    pub fn pred_arc(&self, node: NodeId) -> Option<usize> {
        self.pred[node]
    }

    pub fn pred_node(&self, node: NodeId) -> Option<NodeId> {
        self.pred_tail[node]
    }

    pub fn node_count(&self) -> usize {
        self.dist.len()
    }
}

/// Dijkstra with a lazily-pruned binary heap.
///
/// Ties are broken deterministically: the heap pops the smallest
/// `(distance, node)` pair, and among equally short predecessors the one
/// with the smaller node id wins.
pub fn shortest_path_tree(network: &Network, root: NodeId) -> ShortestPathTree {
    let n = network.node_count();
    let mut dist = vec![UNREACHABLE; n];
    let mut pred: Vec<Option<usize>> = vec![None; n];
    let mut pred_tail: Vec<Option<NodeId>> = vec![None; n];
    let mut settled = vec![false; n];
    let mut heap = BinaryHeap::new();

    dist[root] = 0;
    heap.push(Reverse((0, root)));
    while let Some(Reverse((d, u))) = heap.pop() {
        if settled[u] || d > dist[u] {
            continue;
        }
        settled[u] = true;
        for (index, arc) in network.out_arcs(u) {
            let v = arc.head;
            if settled[v] {
                continue;
            }
            let candidate = d + arc.weight;
            let better = candidate < dist[v]
                || (candidate == dist[v] && pred_tail[v].is_some_and(|t| u < t));
            if better {
                if candidate < dist[v] {
                    heap.push(Reverse((candidate, v)));
                }
                dist[v] = candidate;
                pred[v] = Some(index);
                pred_tail[v] = Some(u);
            }
        }
    }
    ShortestPathTree {
        root,
        dist,
        pred,
        pred_tail,
    }
}

/// Path `root ..= node` in the tree, inclusive at both ends.
pub fn extract_path(tree: &ShortestPathTree, node: NodeId) -> Result<Vec<NodeId>, GraphError> {
    if node >= tree.node_count() {
        return Err(GraphError::UnknownNode { node });
    }
    if !tree.is_reachable(node) {
        return Err(GraphError::Unreachable {
            node,
            root: tree.root,
        });
    }
    let mut path = vec![node];
    let mut cur = node;
    while let Some(p) = tree.pred_tail[cur] {
        path.push(p);
        cur = p;
    }
    path.reverse();
    Ok(path)
}

/// Nodes strictly between the root and `node` on its tree path.
pub fn path_interior(tree: &ShortestPathTree, node: NodeId) -> Result<Vec<NodeId>, GraphError> {
    let path = extract_path(tree, node)?;
    if path.len() <= 2 {
        return Ok(Vec::new());
    }
    Ok(path[1..path.len() - 1].to_vec())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(rows: usize, cols: usize, w: Time) -> Network {
        let mut arcs = Vec::new();
        for r in 0..rows {
            for c in 0..cols {
                let u = r * cols + c;
                if r > 0 {
                    arcs.push(Arc::new(u, u - cols, w));
                }
                if r + 1 < rows {
                    arcs.push(Arc::new(u, u + cols, w));
                }
                if c + 1 < cols {
                    arcs.push(Arc::new(u, u + 1, w));
                }
                if c > 0 {
                    arcs.push(Arc::new(u, u - 1, w));
                }
            }
        }
        Network::new(rows * cols, arcs).unwrap()
    }

    /// Minimum over all simple paths, by exhaustive DFS.
    fn brute_force_dist(net: &Network, root: NodeId, target: NodeId) -> Option<Time> {
        fn go(
            net: &Network,
            u: NodeId,
            target: NodeId,
            acc: Time,
            seen: &mut Vec<bool>,
            best: &mut Option<Time>,
        ) {
            if u == target {
                *best = Some(best.map_or(acc, |b| b.min(acc)));
                return;
            }
            for (_, a) in net.out_arcs(u) {
                if !seen[a.head] {
                    seen[a.head] = true;
                    go(net, a.head, target, acc + a.weight, seen, best);
                    seen[a.head] = false;
                }
            }
        }
        let mut seen = vec![false; net.node_count()];
        seen[root] = true;
        let mut best = None;
        go(net, root, target, 0, &mut seen, &mut best);
        best
    }

    #[test]
    fn single_arc() {
        let net = Network::new(2, vec![Arc::new(0, 1, 3)]).unwrap();
        let tree = shortest_path_tree(&net, 0);
        assert_eq!(tree.distances(), &[0, 3]);
        assert_eq!(tree.pred_node(1), Some(0));
        assert_eq!(net.arc(tree.pred_arc(1).unwrap()), Arc::new(0, 1, 3));
        assert_eq!(tree.pred_arc(0), None);
    }

    #[test]
    fn isolated_root() {
        let net = Network::new(3, vec![Arc::new(1, 2, 4)]).unwrap();
        let tree = shortest_path_tree(&net, 0);
        assert_eq!(tree.distances(), &[0, UNREACHABLE, UNREACHABLE]);
        assert!(matches!(
            extract_path(&tree, 2),
            Err(GraphError::Unreachable { node: 2, root: 0 })
        ));
    }

    #[test]
    fn grid_corner_matches_enumeration() {
        let net = grid(3, 3, 2);
        let tree = shortest_path_tree(&net, 4);
        for corner in [0, 2, 6, 8] {
            let oracle = brute_force_dist(&net, 4, corner).unwrap();
            assert_eq!(oracle, 4);
            assert_eq!(tree.dist(corner), oracle);
            let path = extract_path(&tree, corner).unwrap();
            assert_eq!(path.len(), 3);
            assert_eq!(path_interior(&tree, corner).unwrap().len(), 1);
            let length: Time = path
                .windows(2)
                .map(|w| net.arc(net.find_arc(w[0], w[1]).unwrap()).weight)
                .sum();
            assert_eq!(length, oracle);
        }
    }

    #[test]
    fn tie_break_prefers_smaller_predecessor() {
        // 0 -> 1 -> 3 and 0 -> 2 -> 3 are both of length 2.
        let arcs = vec![
            Arc::new(0, 2, 1),
            Arc::new(0, 1, 1),
            Arc::new(2, 3, 1),
            Arc::new(1, 3, 1),
        ];
        let net = Network::new(4, arcs).unwrap();
        let tree = shortest_path_tree(&net, 0);
        assert_eq!(tree.pred_node(3), Some(1));
        // corner of the 3x3 grid: both neighbours of the corner are tied.
        let tree = shortest_path_tree(&grid(3, 3, 2), 4);
        assert_eq!(extract_path(&tree, 0).unwrap(), vec![4, 1, 0]);
    }

    #[test]
    fn path_to_root_and_chain() {
        let net = Network::new(3, vec![Arc::new(0, 1, 1), Arc::new(1, 2, 1)]).unwrap();
        let tree = shortest_path_tree(&net, 0);
        assert_eq!(extract_path(&tree, 0).unwrap(), vec![0]);
        assert_eq!(extract_path(&tree, 2).unwrap(), vec![0, 1, 2]);
        assert_eq!(path_interior(&tree, 2).unwrap(), vec![1]);
        assert!(path_interior(&tree, 1).unwrap().is_empty());
    }

    #[test]
    fn rejects_bad_networks() {
        assert_eq!(Network::new(0, vec![]), Err(GraphError::Empty));
        assert!(matches!(
            Network::new(2, vec![Arc::new(0, 2, 1)]),
            Err(GraphError::InvalidNode { node: 2, .. })
        ));
        assert!(matches!(
            Network::new(2, vec![Arc::new(1, 1, 1)]),
            Err(GraphError::SelfLoop { node: 1, .. })
        ));
        assert!(matches!(
            Network::new(2, vec![Arc::new(0, 1, 1), Arc::new(0, 1, 2)]),
            Err(GraphError::DuplicateArc { tail: 0, head: 1 })
        ));
        assert!(matches!(
            Network::new(2, vec![Arc::new(0, 1, 0)]),
            Err(GraphError::NonPositiveWeight { .. })
        ));
    }

    #[test]
    fn super_source_single_and_multi() {
        let net = grid(2, 2, 1);
        let (same, root) = super_source_reduce(&net, &[3]).unwrap();
        assert_eq!(same, net);
        assert_eq!(root, 3);

        let (reduced, root) = super_source_reduce(&net, &[2, 0]).unwrap();
        assert_eq!(root, 4);
        assert_eq!(reduced.node_count(), 5);
        assert_eq!(reduced.arc_count(), net.arc_count() + 2);
        assert_eq!(reduced.super_source(), Some(4));
        let added: Vec<Arc> = reduced.out_arcs(4).map(|(_, a)| *a).collect();
        assert_eq!(added, vec![Arc::new(4, 0, 0), Arc::new(4, 2, 0)]);
        let tree = shortest_path_tree(&reduced, root);
        assert_eq!(tree.dist(0), 0);
        assert_eq!(tree.dist(2), 0);
        assert_eq!(tree.dist(1), 1);

        assert_eq!(super_source_reduce(&net, &[]), Err(GraphError::NoIgnition));
        assert_eq!(
            super_source_reduce(&net, &[9]),
            Err(GraphError::UnknownNode { node: 9 })
        );
    }
}
