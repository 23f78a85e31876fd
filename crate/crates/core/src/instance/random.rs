//! Small random instances on general digraphs, for oracle comparisons.

use crate::netgraph::{Arc, Network};

use super::{Instance, SplitMix64};

/// Largest node count [`random_instance`] produces.
pub const RANDOM_MAX_NODES: usize = 9;

/// A random instance with 3 to 9 nodes, one or two ignitions, one or two
/// periods and at most two resources in total.
///
/// Every node is reachable: a random spanning arborescence from node 0 is
/// laid down first, then each remaining ordered pair gets an arc with
/// probability 3/10. Weights are uniform on 1..=10. Unlike grids, the
/// arcs need not come in opposite pairs.
pub fn random_instance(seed: u64) -> Instance {
    let mut rng = SplitMix64::new(seed);
    let n = rng.uniform_inclusive(3, RANDOM_MAX_NODES as i64) as usize;
    let mut present = vec![vec![false; n]; n];
    let mut arcs = Vec::new();
    for v in 1..n {
        let u = rng.uniform_inclusive(0, v as i64 - 1) as usize;
        present[u][v] = true;
        arcs.push(Arc::new(u, v, rng.uniform_inclusive(1, 10)));
    }
    for u in 0..n {
        for v in 0..n {
            if u != v && !present[u][v] && rng.uniform_inclusive(1, 10) <= 3 {
                present[u][v] = true;
                arcs.push(Arc::new(u, v, rng.uniform_inclusive(1, 10)));
            }
        }
    }
    let mut ignitions = vec![0];
    if rng.uniform_inclusive(1, 4) == 1 {
        ignitions.push(rng.uniform_inclusive(1, n as i64 - 1) as usize);
    }
    let psi = rng.uniform_inclusive(8, 40);
    let delta = rng.uniform_inclusive(1, 30);
    let first = rng.uniform_inclusive(0, psi - 1);
    let a = rng.uniform_inclusive(0, 2) as u32;
    let mut schedule = vec![(first, a)];
    if rng.uniform_inclusive(0, 1) == 1 {
        let second = rng.uniform_inclusive(0, psi - 1);
        if second != first {
            schedule.push((second, rng.uniform_inclusive(0, i64::from(2 - a)) as u32));
        }
    }
    let network = Network::new(n, arcs).expect("arcs are in range");
    Instance::new(
        format!("random-{seed}"),
        network,
        ignitions,
        psi,
        delta,
        schedule,
    )
    .expect("parameters are in range")
}
