//! Logic-based Benders decomposition.
//!
//! The master chooses placements and estimates, per node, whether it burns
//! before the target time (`theta`). The subproblem is a single
//! shortest-path computation under the chosen placements; its binding fire
//! paths yield cuts that either correct an optimistic `theta` or forbid a
//! placement on a node that was already burning.

pub mod cuts;
pub mod engine;
pub mod greedy;
pub mod master;

pub use cuts::{
    feasibility_cut, infeasibility_depth, initial_cuts, optimality_cut, resilience, BendersCut,
    CutError, CutKind, CutPool, CutStrength,
};
pub use engine::{
    callback, solve_lbbd, solve_lbbd_with_pool, CutStats, LbbdError, LbbdOptions, MasterBackend,
    Mode, SolveReport,
};
pub use greedy::{solve_greedy, GreedyReport};
pub use master::{build_master, MasterLayout, PeriodFix};
