//! In-process branch-and-bound.
//!
//! Node bounds come from linear relaxations solved with `microlp`. Each
//! open node keeps a shared handle to its parent's optimal relaxation and
//! re-solves from there after applying the pending global edits (rows and
//! column releases added by the incumbent hook) and its own branching fix,
//! so children are warm-started with dual simplex.
//!
//! The search is best-first on the node bound, deeper nodes first on ties,
//! and branches on the most fractional binary column (lowest index on
//! ties).

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::rc::Rc;
use std::time::Instant;

use microlp::{ComparisonOp, LinearExpr, OptimizationDirection, Problem, Solution, Variable};

use super::{BackendResult, ColumnKind, MilpError, MilpModel, Row, Sense, Status};

/// Distance from the nearest integer below which a binary counts as
/// integral.
pub const INTEGRALITY_TOLERANCE: f64 = 1e-6;

/// Answer of an [`IncumbentHook`] to an integral relaxation solution.
#[derive(Debug, Clone, PartialEq)]
pub enum HookDecision {
    Accept,
    /// Add `rows` to every open node, release the blocked columns in
    /// `release`, and re-solve.
    Reject {
        rows: Vec<Row>,
        release: Vec<usize>,
    },
}

/// Called on every integral solution found during the search.
pub trait IncumbentHook {
    fn on_integral(&mut self, values: &[f64], objective: f64) -> Result<HookDecision, MilpError>;

    /// Objective of the best solution known to the hook, used for pruning.
    fn upper_bound(&self) -> Option<f64> {
        None
    }
}

#[derive(Debug, Clone, Default)]
pub struct ReferenceOptions {
    pub deadline: Option<Instant>,
    pub node_limit: Option<u64>,
    /// Every feasible objective value is an integer, so a node whose bound
    /// rounds up to the incumbent value can be pruned.
    pub integral_objective: bool,
    /// A feasible starting solution.
    pub incumbent: Option<Vec<f64>>,
    /// Columns held at zero until the hook releases them.
    pub blocked: Vec<usize>,
}

enum Edit {
    Row(Row),
    Release(usize),
}

struct Node {
    bound: f64,
    depth: u32,
    seq: u64,
    parent: Rc<Solution>,
    applied: usize,
    fix: Option<(usize, f64)>,
}

impl PartialEq for Node {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Node {}

impl PartialOrd for Node {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Node {
    // BinaryHeap pops the maximum: smallest bound, then deepest, then oldest.
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .bound
            .total_cmp(&self.bound)
            .then(self.depth.cmp(&other.depth))
            .then(other.seq.cmp(&self.seq))
    }
}

fn comparison(sense: Sense) -> ComparisonOp {
    match sense {
        Sense::Le => ComparisonOp::Le,
        Sense::Ge => ComparisonOp::Ge,
        Sense::Eq => ComparisonOp::Eq,
    }
}

fn expression(row: &Row, vars: &[Variable]) -> LinearExpr {
    let mut terms = row.terms.clone();
    terms.sort_unstable_by_key(|&(j, _)| j);
    let mut expr = LinearExpr::empty();
    let mut i = 0;
    while i < terms.len() {
        let (j, mut a) = terms[i];
        i += 1;
        while i < terms.len() && terms[i].0 == j {
            a += terms[i].1;
            i += 1;
        }
        if a != 0.0 {
            expr.add(vars[j], a);
        }
    }
    expr
}

fn lp_error(e: microlp::Error) -> MilpError {
    match e {
        microlp::Error::Unbounded => MilpError::Unbounded,
        other => MilpError::Lp(other.to_string()),
    }
}

/// `Ok(None)` when the edit makes the relaxation infeasible.
fn settle(
    outcome: Result<microlp::SolveOutcome, microlp::Error>,
) -> Result<Option<Solution>, MilpError> {
    match outcome {
        Ok(o) => o
            .into_solution()
            .map(Some)
            .map_err(|_| MilpError::Lp("relaxation interrupted".into())),
        Err(microlp::Error::Infeasible) => Ok(None),
        Err(e) => Err(lp_error(e)),
    }
}

fn apply(sol: Solution, edit: &Edit, vars: &[Variable]) -> Result<Option<Solution>, MilpError> {
    match edit {
        Edit::Row(row) => {
            settle(sol.add_constraint(expression(row, vars), comparison(row.sense), row.rhs))
        }
        Edit::Release(j) => settle(sol.unfix_var(vars[*j]).map(|(o, _)| o)),
    }
}

struct Search<'a> {
    model: &'a MilpModel,
    vars: Vec<Variable>,
    edits: Vec<Edit>,
    integral: bool,
    best: Option<(Vec<f64>, f64)>,
}

impl Search<'_> {
    fn upper(&self, hook: &Option<&mut dyn IncumbentHook>) -> f64 {
        let own = self.best.as_ref().map_or(f64::INFINITY, |b| b.1);
        let theirs = hook
            .as_ref()
            .and_then(|h| h.upper_bound())
            .unwrap_or(f64::INFINITY);
        own.min(theirs)
    }

    fn dominated(&self, bound: f64, upper: f64) -> bool {
        if upper == f64::INFINITY {
            return false;
        }
        if self.integral {
            (bound - INTEGRALITY_TOLERANCE).ceil() >= upper - INTEGRALITY_TOLERANCE
        } else {
            bound >= upper - INTEGRALITY_TOLERANCE
        }
    }

    fn materialize(&self, node: Node) -> Result<Option<Solution>, MilpError> {
        let mut sol = Rc::try_unwrap(node.parent).unwrap_or_else(|rc| (*rc).clone());
        for edit in &self.edits[node.applied..] {
            match apply(sol, edit, &self.vars)? {
                Some(s) => sol = s,
                None => return Ok(None),
            }
        }
        match node.fix {
            Some((j, v)) => settle(sol.fix_var(self.vars[j], v)),
            None => Ok(Some(sol)),
        }
    }

    fn values(&self, sol: &Solution) -> Vec<f64> {
        self.model
            .columns()
            .iter()
            .zip(&self.vars)
            .map(|(c, &v)| {
                let x = sol.var_value_raw(v).clamp(c.lower, c.upper);
                match c.kind {
                    ColumnKind::Binary => x.round(),
                    ColumnKind::Continuous => x,
                }
            })
            .collect()
    }

    fn branching_column(&self, sol: &Solution) -> Option<(usize, f64)> {
        let mut pick: Option<(usize, f64, f64)> = None;
        for (j, c) in self.model.columns().iter().enumerate() {
            if c.kind != ColumnKind::Binary {
                continue;
            }
            let x = sol.var_value_raw(self.vars[j]);
            let frac = (x - x.floor()).min(x.ceil() - x);
            if frac > INTEGRALITY_TOLERANCE && pick.is_none_or(|p| frac > p.2) {
                pick = Some((j, x, frac));
            }
        }
        pick.map(|(j, x, _)| (j, x))
    }
}

/// Solves `model` to optimality (or until a limit) by branch-and-bound.
///
/// With a hook, every integral relaxation solution is offered to it before
/// it may become the incumbent; a rejection adds rows globally and the
/// node is re-solved.
pub fn solve_reference(
    model: &MilpModel,
    mut hook: Option<&mut dyn IncumbentHook>,
    options: &ReferenceOptions,
) -> Result<BackendResult, MilpError> {
    let started = Instant::now();
    let mut problem = Problem::new(OptimizationDirection::Minimize);
    let vars: Vec<Variable> = model
        .columns()
        .iter()
        .map(|c| problem.add_var(c.cost, (c.lower, c.upper)))
        .collect();
    for row in model.rows() {
        problem.add_constraint(expression(row, &vars), comparison(row.sense), row.rhs);
    }
    let mut search = Search {
        model,
        vars,
        edits: Vec::new(),
        integral: options.integral_objective,
        best: None,
    };
    if let Some(values) = &options.incumbent {
        if values.len() != model.columns().len() || model.max_violation(values) > 1e-6 {
            return Err(MilpError::Unsupported(
                "initial incumbent is infeasible".into(),
            ));
        }
        search.best = Some((values.clone(), model.objective(values)));
    }
    let finish = |search: Search, status: Status, bound: f64, nodes: u64| {
        let (values, objective) = match search.best {
            Some((v, o)) => (v, Some(o)),
            None => (Vec::new(), None),
        };
        BackendResult {
            status,
            values,
            objective,
            bound,
            nodes,
            wall_time: started.elapsed(),
        }
    };

    let mut root = settle(problem.solve())?;
    for &j in &options.blocked {
        if let Some(sol) = root {
            root = settle(sol.fix_var(search.vars[j], 0.0))?;
        }
    }
    let Some(root) = root else {
        let upper = search.upper(&hook);
        let status = if search.best.is_some() {
            Status::Optimal
        } else {
            Status::Infeasible
        };
        return Ok(finish(search, status, upper, 0));
    };

    let mut heap = BinaryHeap::new();
    let mut seq = 0u64;
    heap.push(Node {
        bound: root.objective(),
        depth: 0,
        seq,
        parent: Rc::new(root),
        applied: 0,
        fix: None,
    });
    let mut nodes = 0u64;
    while let Some(node) = heap.pop() {
        let out_of_time = options.deadline.is_some_and(|d| Instant::now() >= d);
        let out_of_nodes = options.node_limit.is_some_and(|l| nodes >= l);
        if out_of_time || out_of_nodes {
            let open = node
                .bound
                .min(heap.iter().map(|n| n.bound).fold(f64::INFINITY, f64::min));
            let upper = search.upper(&hook);
            let status = if search.best.is_some() {
                Status::Feasible
            } else {
                Status::Limit
            };
            return Ok(finish(search, status, open.min(upper), nodes));
        }
        if search.dominated(node.bound, search.upper(&hook)) {
            continue;
        }
        nodes += 1;
        let depth = node.depth;
        let Some(mut sol) = search.materialize(node)? else {
            continue;
        };
        loop {
            let objective = sol.objective();
            if search.dominated(objective, search.upper(&hook)) {
                break;
            }
            if let Some((j, x)) = search.branching_column(&sol) {
                let parent = Rc::new(sol);
                let (first, second) = if x >= 0.5 { (1.0, 0.0) } else { (0.0, 1.0) };
                for v in [first, second] {
                    seq += 1;
                    heap.push(Node {
                        bound: objective,
                        depth: depth + 1,
                        seq,
                        parent: Rc::clone(&parent),
                        applied: search.edits.len(),
                        fix: Some((j, v)),
                    });
                }
                break;
            }
            let values = search.values(&sol);
            let decision = match hook.as_mut() {
                Some(h) => h.on_integral(&values, objective)?,
                None => HookDecision::Accept,
            };
            match decision {
                HookDecision::Accept => {
                    if search.best.as_ref().is_none_or(|b| objective < b.1) {
                        search.best = Some((values, objective));
                    }
                    break;
                }
                HookDecision::Reject { rows, release } => {
                    if rows.is_empty() && release.is_empty() {
                        return Err(MilpError::Hook(
                            "incumbent rejected without new rows".into(),
                        ));
                    }
                    let start = search.edits.len();
                    search.edits.extend(rows.into_iter().map(Edit::Row));
                    search.edits.extend(release.into_iter().map(Edit::Release));
                    let mut current = Some(sol);
                    for edit in &search.edits[start..] {
                        current = match current {
                            Some(s) => apply(s, edit, &search.vars)?,
                            None => None,
                        };
                    }
                    match current {
                        Some(s) => sol = s,
                        None => break,
                    }
                }
            }
        }
    }
    let upper = search.upper(&hook);
    let status = if search.best.is_some() {
        Status::Optimal
    } else {
        Status::Infeasible
    };
    Ok(finish(search, status, upper, nodes))
}
