//! Snake formulas: canonical unsatisfiable width-2 instances.
//!
//! A snake is a sequence of distinct, pairwise non-complementary literals
//! l_1..l_s together with a pivot index t. Writing l_0 = l_{s+1} = !l_t,
//! its formula holds the s+1 clauses (!l_i v l_{i+1}) for 0 <= i <= s.
//! Reading the clauses as implications, !l_t starts a chain through
//! l_1, .., l_s that passes l_t itself, and from l_t the tail of the chain
//! reaches !l_t again, so neither value of l_t survives.

use super::SolverError;
use crate::model::{Clause, Instance, Layout, Literal};

/// Builds the snake formula for `literals` and pivot `t` (1-based).
///
/// Clauses come out in chain order. The boundary clause degenerates to a
/// unit exactly when the pivot sits at an end: t = 1 gives the unit
/// (l_1), t = s gives (!l_s).
pub fn snake_formula(layout: Layout, literals: &[Literal], t: usize) -> Result<Instance, SolverError> {
    let s = literals.len();
    if s < 2 {
        return Err(SolverError::TooShort { s });
    }
    if t == 0 || t > s {
        return Err(SolverError::IndexOutOfRange { t, s });
    }
    let mut by_var: Vec<Literal> = literals.to_vec();
    by_var.sort_unstable_by_key(|l| (l.var(), l.code()));
    for pair in by_var.windows(2) {
        if pair[0] == pair[1] {
            return Err(SolverError::DuplicateLiteral { literal: pair[0] });
        }
        if pair[0].var() == pair[1].var() {
            return Err(SolverError::ComplementaryPair {
                a: pair[0],
                b: pair[1],
            });
        }
    }

    let anchor = !literals[t - 1];
    let mut chain = Vec::with_capacity(s + 2);
    chain.push(anchor);
    chain.extend_from_slice(literals);
    chain.push(anchor);

    let clauses = chain
        .windows(2)
        .map(|pair| {
            let a = !pair[0];
            let b = pair[1];
            if a == b {
                Clause::new(vec![a])
            } else {
                Clause::new(vec![a, b])
            }
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Instance::new(layout, clauses)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::solve_2sat;

    fn lits(codes: &[i32]) -> Vec<Literal> {
        codes.iter().map(|&c| Literal::new(c)).collect()
    }

    fn layout(n: u32) -> Layout {
        Layout::new(1, n).unwrap()
    }

    #[test]
    fn clause_count_is_s_plus_one() {
        let inst = snake_formula(layout(4), &lits(&[1, -2, 3, 4]), 2).unwrap();
        assert_eq!(inst.clause_count(), 5);
    }

    #[test]
    fn pivot_at_front_makes_leading_unit() {
        let inst = snake_formula(layout(2), &lits(&[1, 2]), 1).unwrap();
        let clauses = inst.clauses();
        assert_eq!(clauses[0].literals(), [Literal::new(1)]);
        assert!(clauses.iter().skip(1).all(|c| c.len() == 2));
    }

    #[test]
    fn pivot_at_back_makes_trailing_unit() {
        let inst = snake_formula(layout(3), &lits(&[1, 2, 3]), 3).unwrap();
        let clauses = inst.clauses();
        assert_eq!(clauses[3].literals(), [Literal::new(-3)]);
        assert!(clauses.iter().take(3).all(|c| c.len() == 2));
    }

    #[test]
    fn interior_pivot_keeps_every_clause_binary() {
        let inst = snake_formula(layout(5), &lits(&[2, -4, 5]), 2).unwrap();
        assert!(inst.clauses().iter().all(|c| c.len() == 2));
    }

    #[test]
    fn snakes_are_unsatisfiable() {
        let cases: &[(&[i32], usize)] = &[
            (&[1, 2], 1),
            (&[1, 2], 2),
            (&[-1, 2, -3], 2),
            (&[5, -1, 4, -2, 3], 4),
            (&[2, 1], 1),
        ];
        for &(codes, t) in cases {
            let inst = snake_formula(layout(5), &lits(codes), t).unwrap();
            let result = solve_2sat(&inst).unwrap();
            assert!(!result.is_sat(), "snake {codes:?} t={t} should refute");
            assert!(result.certificate().unwrap().verify(&inst));
        }
    }

    #[test]
    fn rejects_malformed_input() {
        assert_eq!(
            snake_formula(layout(3), &lits(&[1]), 1).unwrap_err(),
            SolverError::TooShort { s: 1 }
        );
        assert_eq!(
            snake_formula(layout(3), &lits(&[1, 2]), 0).unwrap_err(),
            SolverError::IndexOutOfRange { t: 0, s: 2 }
        );
        assert_eq!(
            snake_formula(layout(3), &lits(&[1, 2]), 3).unwrap_err(),
            SolverError::IndexOutOfRange { t: 3, s: 2 }
        );
        assert_eq!(
            snake_formula(layout(3), &lits(&[1, 2, 1]), 1).unwrap_err(),
            SolverError::DuplicateLiteral {
                literal: Literal::new(1)
            }
        );
        assert_eq!(
            snake_formula(layout(3), &lits(&[1, 2, -1]), 1).unwrap_err(),
            SolverError::ComplementaryPair {
                a: Literal::new(-1),
                b: Literal::new(1)
            }
        );
    }

    #[test]
    fn literal_outside_layout_is_rejected() {
        let err = snake_formula(layout(2), &lits(&[1, 3]), 1).unwrap_err();
        assert!(matches!(err, SolverError::Model(_)));
    }
}
