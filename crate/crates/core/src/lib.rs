//! Locating wildfire suppression resources on a landscape graph.
//!
//! Fire spreads from one or more ignition nodes along the arcs of a
//! weighted directed graph. Resources become available at fixed times;
//! a resource placed on a node slows every arc leaving that node. The goal
//! is to place resources so that as few nodes as possible burn before a
//! target time.
//!
//! The crate is organised bottom-up:
//!
//! - [`netgraph`]: graphs and deterministic shortest-path trees.
//! - [`instance`]: problem instances, grid generators, preprocessing and
//!   the canonical file format.
//! - [`firedyn`]: fire arrival times under a plan, and a brute-force
//!   oracle for tiny instances.
//! - [`milp`]: linear models, an in-process branch-and-bound backend, MPS
//!   files, an external-solver adapter and the direct MIP formulation.
//! - [`lbbd`]: the Benders engine (cuts, iterative and branch-and-check
//!   drivers) and the rolling-horizon heuristic.

pub mod firedyn;
pub mod instance;
pub mod lbbd;
pub mod milp;
pub mod netgraph;

pub use firedyn::{evaluate, FireDynamics, InterdictionPlan, Objective, Placement};
pub use instance::{generate_grid, preprocess, GridSpec, Instance};
pub use netgraph::{Network, NodeId, Time};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    struct Introduction;
    #[doc = include_str!("../../../book/src/landscapes.md")]
    struct Landscapes;
    #[doc = include_str!("../../../book/src/fire.md")]
    struct Fire;
    #[doc = include_str!("../../../book/src/cuts.md")]
    struct Cuts;
    #[doc = include_str!("../../../book/src/solving.md")]
    struct Solving;
    #[doc = include_str!("../../../book/src/mip.md")]
    struct Mip;
    #[doc = include_str!("../../../book/src/cli.md")]
    struct Cli;
}
