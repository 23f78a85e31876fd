use proptest::prelude::*;
use wildfire_lbbd::netgraph::{
    extract_path, shortest_path_tree, super_source_reduce, Arc, Network, UNREACHABLE,
};

fn bellman_ford(n: usize, arcs: &[Arc], root: usize) -> Vec<i64> {
    let mut d = vec![UNREACHABLE; n];
    d[root] = 0;
    for _ in 0..n {
        for a in arcs {
            if d[a.tail] != UNREACHABLE && d[a.tail] + a.weight < d[a.head] {
                d[a.head] = d[a.tail] + a.weight;
            }
        }
    }
    d
}

fn network() -> impl Strategy<Value = (usize, Vec<Arc>)> {
    (2usize..12).prop_flat_map(|n| {
        let arc = (0..n, 0..n, 1i64..20).prop_map(|(u, v, w)| Arc::new(u, v, w));
        (
            Just(n),
            prop::collection::vec(arc, 0..40).prop_map(|arcs| {
                let mut seen = std::collections::HashSet::new();
                arcs.into_iter()
                    .filter(|a| a.tail != a.head && seen.insert((a.tail, a.head)))
                    .collect::<Vec<_>>()
            }),
        )
    })
}

proptest! {
    #[test]
    fn distances_match_bellman_ford((n, arcs) in network(), root in 0usize..12) {
        let root = root % n;
        let net = Network::new(n, arcs.clone()).unwrap();
        let tree = shortest_path_tree(&net, root);
        prop_assert_eq!(tree.distances(), &bellman_ford(n, &arcs, root)[..]);
    }

    #[test]
    fn tree_paths_are_shortest_with_smallest_predecessor((n, arcs) in network()) {
        let net = Network::new(n, arcs).unwrap();
        let tree = shortest_path_tree(&net, 0);
        for v in (1..n).filter(|&v| tree.is_reachable(v)) {
            let path = extract_path(&tree, v).unwrap();
            prop_assert_eq!(path[0], 0);
            let mut length = 0;
            for w in path.windows(2) {
                length += net.arc(net.find_arc(w[0], w[1]).unwrap()).weight;
            }
            prop_assert_eq!(length, tree.dist(v));
            let best = net
                .arcs()
                .iter()
                .filter(|a| a.head == v && tree.is_reachable(a.tail))
                .filter(|a| tree.dist(a.tail) + a.weight == tree.dist(v))
                .map(|a| a.tail)
                .min();
            prop_assert_eq!(tree.pred_node(v), best);
        }
    }

    #[test]
    fn deterministic((n, arcs) in network()) {
        let net = Network::new(n, arcs.clone()).unwrap();
        let again = Network::new(n, arcs).unwrap();
        prop_assert_eq!(shortest_path_tree(&net, 0), shortest_path_tree(&again, 0));
    }

    #[test]
    fn super_source_distance_is_nearest_ignition((n, arcs) in network(), a in 0usize..12, b in 0usize..12) {
        let net = Network::new(n, arcs).unwrap();
        let ignitions = vec![a % n, b % n];
        let (spread, root) = super_source_reduce(&net, &ignitions).unwrap();
        let tree = shortest_path_tree(&spread, root);
        let from: Vec<_> = ignitions.iter().map(|&i| shortest_path_tree(&net, i)).collect();
        for v in 0..n {
            let nearest = from.iter().map(|t| t.dist(v)).min().unwrap();
            prop_assert_eq!(tree.dist(v), nearest);
        }
    }
}
