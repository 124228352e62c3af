//! Budgeted DPLL search for clauses of any width.
//!
//! Plain unit propagation plus branching on the literal occurring most
//! often in not-yet-satisfied clauses (ties: lowest variable, positive
//! first). The budget counts search nodes; exceeding it aborts with an
//! error rather than guessing, so callers can treat the run as
//! indeterminate.

use super::{Assignment, SolveResult, SolverError};
use crate::model::{Instance, Literal};

/// Node allowance used when callers have no reason to pick another.
pub const DEFAULT_DPLL_BUDGET: u64 = 10_000_000;

/// Complete search over an instance of arbitrary clause width. Never
/// returns a certificate on the unsat side.
pub fn solve_dpll(instance: &Instance, budget: u64) -> Result<SolveResult, SolverError> {
    let mut search = Search {
        clauses: instance.clauses().iter().map(|c| c.literals().to_vec()).collect(),
        values: vec![None; instance.var_count() as usize],
        trail: Vec::new(),
        counts: vec![0; 2 * instance.var_count() as usize],
        budget,
        budget_limit: budget,
    };
    if search.node()? {
        let values = search.values.iter().map(|v| v.unwrap_or(false)).collect();
        Ok(SolveResult::Sat(Assignment::new(values)))
    } else {
        Ok(SolveResult::Unsat(None))
    }
}

struct Search {
    clauses: Vec<Vec<Literal>>,
    values: Vec<Option<bool>>,
    trail: Vec<u32>,
    counts: Vec<u32>,
    budget: u64,
    budget_limit: u64,
}

impl Search {
    fn literal_value(&self, lit: Literal) -> Option<bool> {
        self.values[lit.var() as usize - 1].map(|v| v == lit.is_positive())
    }

    fn assign(&mut self, lit: Literal) {
        self.values[lit.var() as usize - 1] = Some(lit.is_positive());
        self.trail.push(lit.var());
    }

    fn undo_to(&mut self, mark: usize) {
        while self.trail.len() > mark {
            let var = self.trail.pop().unwrap();
            self.values[var as usize - 1] = None;
        }
    }

    /// One search node: propagate units to fixpoint, then branch.
    /// Returns Ok(true) with the model left in `values`, or Ok(false)
    /// with the trail restored to its state at entry.
    fn node(&mut self) -> Result<bool, SolverError> {
        if self.budget == 0 {
            return Err(SolverError::BudgetExceeded {
                budget: self.budget_limit,
            });
        }
        self.budget -= 1;

        let mark = self.trail.len();
        if self.propagate_is_conflict() {
            self.undo_to(mark);
            return Ok(false);
        }
        let Some(branch) = self.pick_branch_literal() else {
            return Ok(true);
        };
        for lit in [branch, !branch] {
            self.assign(lit);
            match self.node() {
                Ok(true) => return Ok(true),
                Ok(false) => self.undo_to(self.trail.len() - 1),
                Err(e) => return Err(e),
            }
        }
        self.undo_to(mark);
        Ok(false)
    }

    /// Unit propagation to fixpoint; true when some clause went empty.
    fn propagate_is_conflict(&mut self) -> bool {
        loop {
            let mut progressed = false;
            for ci in 0..self.clauses.len() {
                let mut unassigned = None;
                let mut free = 0;
                let mut satisfied = false;
                for i in 0..self.clauses[ci].len() {
                    let lit = self.clauses[ci][i];
                    match self.literal_value(lit) {
                        Some(true) => {
                            satisfied = true;
                            break;
                        }
                        Some(false) => {}
                        None => {
                            free += 1;
                            unassigned = Some(lit);
                        }
                    }
                }
                if satisfied {
                    continue;
                }
                match free {
                    0 => return true,
                    1 => {
                        self.assign(unassigned.unwrap());
                        progressed = true;
                    }
                    _ => {}
                }
            }
            if !progressed {
                return false;
            }
        }
    }

    /// Most frequent unassigned literal among unsatisfied clauses; None
    /// when every clause is already satisfied. After propagation each
    /// unsatisfied clause has two or more free literals, so a branch
    /// literal exists whenever work remains.
    fn pick_branch_literal(&mut self) -> Option<Literal> {
        self.counts.fill(0);
        let mut any = false;
        for clause in &self.clauses {
            let satisfied = clause
                .iter()
                .any(|&l| self.literal_value(l) == Some(true));
            if satisfied {
                continue;
            }
            any = true;
            for &lit in clause {
                if self.literal_value(lit).is_none() {
                    let slot = 2 * (lit.var() as usize - 1) + !lit.is_positive() as usize;
                    self.counts[slot] += 1;
                }
            }
        }
        if !any {
            return None;
        }
        let mut best = 0;
        let mut best_count = 0;
        for (slot, &count) in self.counts.iter().enumerate() {
            if count > best_count {
                best_count = count;
                best = slot;
            }
        }
        debug_assert!(best_count > 0);
        let var = (best / 2 + 1) as i32;
        Some(Literal::new(if best % 2 == 0 { var } else { -var }))
    }
}
