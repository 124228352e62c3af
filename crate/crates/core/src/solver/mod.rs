//! Decision procedures: a linear-time solver for width-2 formulas, a
//! budgeted DPLL search for wider ones, and the structural witnesses
//! (contradiction paths, snakes, bicycles) that certify unsatisfiable
//! width-2 formulas.

mod bicycle;
mod dpll;
mod snake;
mod twosat;

pub use bicycle::{find_bicycle, is_bicycle};
pub use dpll::{solve_dpll, DEFAULT_DPLL_BUDGET};
pub use snake::snake_formula;
pub use twosat::{solve_2sat, ContradictionCertificate, ImplicationStep};
pub(crate) use twosat::TwoSatSolver;

use thiserror::Error;

use crate::model::{Instance, Literal, ModelError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolverError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("clause of length {len} where at most 2 literals are supported")]
    ClauseTooLong { len: usize },
    #[error("assignment covers {got} variables, instance has {expected}")]
    PartialAssignment { expected: u32, got: usize },
    #[error("search budget of {budget} nodes exhausted")]
    BudgetExceeded { budget: u64 },
    #[error("literals {a} and {b} are complementary")]
    ComplementaryPair { a: Literal, b: Literal },
    #[error("literal {literal} appears twice")]
    DuplicateLiteral { literal: Literal },
    #[error("index t={t} outside 1..={s}")]
    IndexOutOfRange { t: usize, s: usize },
    #[error("need at least 2 literals, got {s}")]
    TooShort { s: usize },
}

/// A total truth assignment for variables `1..=n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Assignment {
    values: Vec<bool>,
}

impl Assignment {
    pub fn new(values: Vec<bool>) -> Assignment {
        Assignment { values }
    }

    pub fn var_count(&self) -> usize {
        self.values.len()
    }

    /// Truth value of a variable (1-based).
    pub fn get(&self, var: u32) -> bool {
        self.values[var as usize - 1]
    }

    /// Whether a literal evaluates to true.
    pub fn satisfies(&self, lit: Literal) -> bool {
        self.get(lit.var()) == lit.is_positive()
    }

    pub fn values(&self) -> &[bool] {
        &self.values
    }
}

/// Outcome of a complete solver run.
///
/// The unsat arm optionally carries a [`ContradictionCertificate`]; the
/// width-2 solver always provides one, the DPLL search never does.
#[derive(Debug, Clone, PartialEq)]
pub enum SolveResult {
    Sat(Assignment),
    Unsat(Option<ContradictionCertificate>),
}

impl SolveResult {
    pub fn is_sat(&self) -> bool {
        matches!(self, SolveResult::Sat(_))
    }

    pub fn assignment(&self) -> Option<&Assignment> {
        match self {
            SolveResult::Sat(a) => Some(a),
            SolveResult::Unsat(_) => None,
        }
    }

    pub fn certificate(&self) -> Option<&ContradictionCertificate> {
        match self {
            SolveResult::Sat(_) => None,
            SolveResult::Unsat(cert) => cert.as_ref(),
        }
    }
}

/// Evaluates `instance` under a total assignment: true when every
/// clause holds. The assignment must cover exactly the instance's
/// variables.
pub fn verify_assignment(
    instance: &Instance,
    assignment: &Assignment,
) -> Result<bool, SolverError> {
    let n = instance.var_count();
    if assignment.var_count() != n as usize {
        return Err(SolverError::PartialAssignment {
            expected: n,
            got: assignment.var_count(),
        });
    }
    Ok(instance
        .clauses()
        .iter()
        .all(|clause| clause.literals().iter().any(|&l| assignment.satisfies(l))))
}
