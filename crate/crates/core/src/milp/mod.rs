//! Mixed-integer linear models and the backends that solve them.
//!
//! [`MilpModel`] is a plain column/row description shared by the Benders
//! master problem and the direct formulation. It can be solved in process
//! by [`solve_reference`], or written as MPS and handed to an external
//! solver through [`solve_external`].

mod direct;
mod external;
mod mps;
mod reference;
mod verify;

use std::collections::HashMap;
use std::time::Duration;

use thiserror::Error;

pub use direct::{
    big_m, build_direct_mip, build_direct_mip_with, slack_bound, BigMRule, DirectLayout,
};
pub use external::{
    parse_solution, solve_external, ExternalConfig, ParsedSolution, SolutionFormat, ENV_COMMAND,
    ENV_FORMAT, ENV_TIME_ARGS, ENV_TIME_LIMIT,
};
pub use mps::{read_mps, write_mps};
pub use reference::{
    solve_reference, HookDecision, IncumbentHook, ReferenceOptions, INTEGRALITY_TOLERANCE,
};
pub use verify::{verify_solution, SolutionClaim, VerifyReport, ARRIVAL_TOLERANCE};

#[derive(Debug, Error)]
pub enum MilpError {
    #[error("duplicate column name `{0}`")]
    DuplicateColumn(String),
    #[error("duplicate row name `{0}`")]
    DuplicateRow(String),
    #[error("column `{name}`: {message}")]
    BadColumn { name: String, message: String },
    #[error("row `{row}` references column {column}, but the model has {columns}")]
    BadTerm {
        row: String,
        column: usize,
        columns: usize,
    },
    #[error("linear relaxation is unbounded")]
    Unbounded,
    #[error("LP solver failure: {0}")]
    Lp(String),
    #[error("incumbent hook failed: {0}")]
    Hook(String),
    #[error("MPS line {line}: {message}")]
    Mps { line: usize, message: String },
    #[error("solution file line {line}: {message}")]
    SolutionParse { line: usize, message: String },
    #[error("external solver: {0}")]
    External(String),
    #[error("model is not supported: {0}")]
    Unsupported(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ColumnKind {
    Binary,
    Continuous,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Column {
    pub name: String,
    pub kind: ColumnKind,
    pub lower: f64,
    pub upper: f64,
    pub cost: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Le,
    Ge,
    Eq,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub name: String,
    pub sense: Sense,
    pub rhs: f64,
    pub terms: Vec<(usize, f64)>,
}

impl Row {
    pub fn new(name: impl Into<String>, sense: Sense, rhs: f64, terms: Vec<(usize, f64)>) -> Self {
        Self {
            name: name.into(),
            sense,
            rhs,
            terms,
        }
    }

    pub fn activity(&self, values: &[f64]) -> f64 {
        self.terms.iter().map(|&(j, a)| a * values[j]).sum()
    }

    /// Amount by which `values` violate the row (0 when satisfied).
    pub fn violation(&self, values: &[f64]) -> f64 {
        let lhs = self.activity(values);
        match self.sense {
            Sense::Le => (lhs - self.rhs).max(0.0),
            Sense::Ge => (self.rhs - lhs).max(0.0),
            Sense::Eq => (lhs - self.rhs).abs(),
        }
    }
}

/// A minimisation model over bounded columns.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct MilpModel {
    pub name: String,
    pub formulation: String,
    columns: Vec<Column>,
    rows: Vec<Row>,
    column_index: HashMap<String, usize>,
    row_names: HashMap<String, usize>,
}

impl MilpModel {
    pub fn new(name: impl Into<String>, formulation: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            formulation: formulation.into(),
            ..Self::default()
        }
    }

    pub fn add_column(
        &mut self,
        name: impl Into<String>,
        kind: ColumnKind,
        lower: f64,
        upper: f64,
        cost: f64,
    ) -> Result<usize, MilpError> {
        let name = name.into();
        if self.column_index.contains_key(&name) {
            return Err(MilpError::DuplicateColumn(name));
        }
        let bad = |message: &str| MilpError::BadColumn {
            name: name.clone(),
            message: message.to_string(),
        };
        if !lower.is_finite() || !upper.is_finite() {
            return Err(bad("bounds must be finite"));
        }
        if lower > upper {
            return Err(bad("lower bound above upper bound"));
        }
        if kind == ColumnKind::Binary && (lower < 0.0 || upper > 1.0) {
            return Err(bad("binary bounds must lie in [0, 1]"));
        }
        let index = self.columns.len();
        self.column_index.insert(name.clone(), index);
        self.columns.push(Column {
            name,
            kind,
            lower,
            upper,
            cost,
        });
        Ok(index)
    }

    pub fn add_binary(&mut self, name: impl Into<String>, cost: f64) -> Result<usize, MilpError> {
        self.add_column(name, ColumnKind::Binary, 0.0, 1.0, cost)
    }

    pub fn add_row(&mut self, row: Row) -> Result<usize, MilpError> {
        if self.row_names.contains_key(&row.name) {
            return Err(MilpError::DuplicateRow(row.name));
        }
        if let Some(&(column, _)) = row.terms.iter().find(|(j, _)| *j >= self.columns.len()) {
            return Err(MilpError::BadTerm {
                row: row.name,
                column,
                columns: self.columns.len(),
            });
        }
        let index = self.rows.len();
        self.row_names.insert(row.name.clone(), index);
        self.rows.push(row);
        Ok(index)
    }

    pub fn columns(&self) -> &[Column] {
        &self.columns
    }

    pub fn rows(&self) -> &[Row] {
        &self.rows
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.column_index.get(name).copied()
    }

    pub fn row(&self, name: &str) -> Option<&Row> {
        self.row_names.get(name).map(|&i| &self.rows[i])
    }

    /// Sorts every row's terms by column, merging repeats and dropping
    /// zeros. MPS round trips preserve models in this form.
    pub fn canonicalize(&mut self) {
        for row in &mut self.rows {
            row.terms.sort_by_key(|&(j, _)| j);
            let mut merged: Vec<(usize, f64)> = Vec::with_capacity(row.terms.len());
            for &(j, a) in &row.terms {
                match merged.last_mut() {
                    Some(last) if last.0 == j => last.1 += a,
                    _ => merged.push((j, a)),
                }
            }
            merged.retain(|&(_, a)| a != 0.0);
            row.terms = merged;
        }
    }

    pub fn objective(&self, values: &[f64]) -> f64 {
        self.columns
            .iter()
            .zip(values)
            .map(|(c, v)| c.cost * v)
            .sum()
    }

    /// Largest bound, integrality or row violation of `values`.
    pub fn max_violation(&self, values: &[f64]) -> f64 {
        let mut worst: f64 = 0.0;
        for (c, &v) in self.columns.iter().zip(values) {
            worst = worst.max(c.lower - v).max(v - c.upper);
            if c.kind == ColumnKind::Binary {
                worst = worst.max((v - v.round()).abs());
            }
        }
        for r in &self.rows {
            worst = worst.max(r.violation(values));
        }
        worst
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Optimal,
    /// An incumbent exists but a limit stopped the search.
    Feasible,
    Infeasible,
    /// A limit stopped the search before any incumbent was found.
    Limit,
}

impl std::fmt::Display for Status {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Status::Optimal => "optimal",
            Status::Feasible => "feasible",
            Status::Infeasible => "infeasible",
            Status::Limit => "limit",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BackendResult {
    pub status: Status,
    /// Column values of the incumbent; empty without one.
    pub values: Vec<f64>,
    pub objective: Option<f64>,
    /// Proven lower bound on the optimum.
    pub bound: f64,
    pub nodes: u64,
    pub wall_time: Duration,
}

impl BackendResult {
    pub fn value(&self, column: usize) -> f64 {
        self.values[column]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_duplicates_and_bad_bounds() {
        let mut m = MilpModel::new("m", "test");
        m.add_binary("x", 1.0).unwrap();
        assert!(matches!(
            m.add_binary("x", 1.0),
            Err(MilpError::DuplicateColumn(_))
        ));
        assert!(m
            .add_column("y", ColumnKind::Continuous, 0.0, f64::INFINITY, 0.0)
            .is_err());
        assert!(m
            .add_column("b", ColumnKind::Binary, 0.0, 2.0, 0.0)
            .is_err());
        m.add_row(Row::new("r", Sense::Le, 1.0, vec![(0, 1.0)]))
            .unwrap();
        assert!(matches!(
            m.add_row(Row::new("r", Sense::Le, 1.0, vec![])),
            Err(MilpError::DuplicateRow(_))
        ));
        assert!(matches!(
            m.add_row(Row::new("s", Sense::Le, 1.0, vec![(3, 1.0)])),
            Err(MilpError::BadTerm { column: 3, .. })
        ));
    }

    #[test]
    fn violation_measures() {
        let mut m = MilpModel::new("m", "test");
        m.add_binary("x", 1.0).unwrap();
        m.add_binary("y", 1.0).unwrap();
        m.add_row(Row::new("r", Sense::Ge, 1.0, vec![(0, 1.0), (1, 1.0)]))
            .unwrap();
        assert_eq!(m.max_violation(&[0.0, 0.0]), 1.0);
        assert_eq!(m.max_violation(&[1.0, 0.0]), 0.0);
        assert!((m.max_violation(&[0.5, 0.5]) - 0.5).abs() < 1e-12);
        assert_eq!(m.objective(&[1.0, 1.0]), 2.0);
    }
}
