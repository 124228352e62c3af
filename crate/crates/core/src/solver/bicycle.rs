//! Bicycles: the width-2 substructure behind unsatisfiability.
//!
//! A bicycle over distinct variables v_1..v_s (s >= 2) picks literals
//! w_i in {v_i, !v_i} and two more literals u, v on those same variables,
//! and consists of the s+1 clauses
//!
//! ```text
//!   C_0 = (u v w_1),  C_i = (!w_i v w_{i+1}) for 1 <= i <= s-1,
//!   C_s = (!w_s v v)
//! ```
//!
//! Boundary clauses may degenerate to units ((w_1) when u = w_1, (!w_s)
//! when v = !w_s); middles never can. Every unsatisfiable width-2 formula
//! with a non-unit contradiction contains one, and [`find_bicycle`]
//! extracts it from the solver's contradiction certificate: the two
//! implication paths concatenate into a closed literal walk, and any
//! maximal distinct-variable stretch of that walk that is blocked on both
//! sides reads off directly as C_0..C_s. The exhaustive matcher backs the
//! walk up on degenerate collisions and powers [`is_bicycle`].

use std::collections::HashMap;

use super::twosat::ContradictionCertificate;
use super::{solve_2sat, SolveResult, SolverError};
use crate::model::{Instance, Literal};

/// Whether the instance's clause multiset is exactly a bicycle: every
/// clause takes one role C_0..C_s under some choice of chain, u and v.
/// The search is exponential in the clause count and meant for small
/// certificates, not bulk instances.
pub fn is_bicycle(instance: &Instance) -> bool {
    Matcher::new(instance, true).search().is_some()
}

/// Finds a sub-multiset of clauses forming a bicycle, if one exists.
///
/// Unsatisfiable instances are handled by reading the bicycle off the
/// contradiction certificate; anything that slips past that (including
/// satisfiable instances, which may still contain bicycles) falls back to
/// exhaustive search. `None` therefore means the instance genuinely
/// contains no bicycle, which forces it to be built from units alone.
pub fn find_bicycle(instance: &Instance) -> Result<Option<Instance>, SolverError> {
    if let Some(wide) = instance.clauses().iter().find(|c| c.len() > 2) {
        return Err(SolverError::ClauseTooLong { len: wide.len() });
    }
    if let SolveResult::Unsat(Some(cert)) = solve_2sat(instance)? {
        if let Some(roles) = bicycle_from_walk(instance, &cert) {
            return Ok(Some(sub_instance(instance, &roles)));
        }
    }
    Ok(Matcher::new(instance, false)
        .search()
        .map(|roles| sub_instance(instance, &roles)))
}

fn sub_instance(instance: &Instance, roles: &[usize]) -> Instance {
    let clauses = roles
        .iter()
        .map(|&i| instance.clauses()[i].clone())
        .collect();
    Instance::new(*instance.layout(), clauses).expect("clauses come from a valid instance")
}

/// Scans the closed implication walk for a doubly-blocked run: a maximal
/// stretch of pairwise-distinct variables whose neighbors on both sides
/// reuse a variable from inside the stretch. The stretch is the chain
/// w_1..w_s, the arc entering it is C_0 and the arc leaving it is C_s;
/// blocking makes u and v land on chain variables as required. Middle
/// clauses are distinct by construction, so only a C_0/C_s collision can
/// invalidate a run, and a run that collides is skipped.
fn bicycle_from_walk(instance: &Instance, cert: &ContradictionCertificate) -> Option<Vec<usize>> {
    let arcs: Vec<_> = cert.forward.iter().chain(cert.backward.iter()).collect();
    let t = arcs.len();
    let var_at = |pos: usize| arcs[pos % t].from.var();
    let clause_at = |pos: usize| arcs[pos % t].clause_index;

    let mut counts = vec![0u32; instance.var_count() as usize + 1];
    let mut j = 0usize;
    for i in 0..t {
        if j < i {
            j = i;
        }
        while j < i + t && counts[var_at(j) as usize] == 0 {
            counts[var_at(j) as usize] += 1;
            j += 1;
        }
        let blocked_right = j < i + t;
        let blocked_left = counts[var_at(i + t - 1) as usize] > 0;
        if j - i >= 2 && blocked_right && blocked_left {
            let c_first = clause_at(i + t - 1);
            let c_last = clause_at(j - 1);
            if c_first != c_last {
                let mut roles = Vec::with_capacity(j - i + 1);
                roles.push(c_first);
                roles.extend((i..j - 1).map(clause_at));
                roles.push(c_last);
                return Some(roles);
            }
        }
        counts[var_at(i) as usize] -= 1;
    }
    None
}

/// Depth-first role assignment: pick C_0 and its orientation, grow the
/// chain through clauses (!w_k v w_{k+1}) over fresh variables, close on
/// a clause (!w_s v v) with v (and u) landing on chain variables. In
/// exact mode the closing step must consume the final unused clause.
struct Matcher<'a> {
    instance: &'a Instance,
    occurrences: HashMap<i32, Vec<(usize, Literal)>>,
    used: Vec<bool>,
    in_vars: Vec<bool>,
    roles: Vec<usize>,
    exact: bool,
    used_count: usize,
    chain_len: usize,
    u_var: u32,
}

impl<'a> Matcher<'a> {
    fn new(instance: &'a Instance, exact: bool) -> Matcher<'a> {
        let mut occurrences: HashMap<i32, Vec<(usize, Literal)>> = HashMap::new();
        for (idx, clause) in instance.clauses().iter().enumerate() {
            match *clause.literals() {
                [l] => occurrences.entry(l.code()).or_default().push((idx, l)),
                [a, b] => {
                    occurrences.entry(a.code()).or_default().push((idx, b));
                    occurrences.entry(b.code()).or_default().push((idx, a));
                }
                _ => {}
            }
        }
        Matcher {
            instance,
            occurrences,
            used: vec![false; instance.clause_count()],
            in_vars: vec![false; instance.var_count() as usize + 1],
            roles: Vec::new(),
            exact,
            used_count: 0,
            chain_len: 0,
            u_var: 0,
        }
    }

    fn search(&mut self) -> Option<Vec<usize>> {
        let m = self.instance.clause_count();
        if m < 3 {
            return None;
        }
        if self.exact && self.instance.clauses().iter().any(|c| c.len() > 2) {
            return None;
        }
        for c0 in 0..m {
            let starts: &[(Literal, Literal)] = match *self.instance.clauses()[c0].literals() {
                [l] => &[(l, l)],
                [a, b] => &[(a, b), (b, a)],
                _ => continue,
            };
            for &(u, w1) in starts {
                self.used[c0] = true;
                self.used_count = 1;
                self.in_vars[w1.var() as usize] = true;
                self.u_var = u.var();
                self.roles.clear();
                self.roles.push(c0);
                self.chain_len = 1;
                if self.extend(w1) {
                    return Some(self.roles.clone());
                }
                self.in_vars[w1.var() as usize] = false;
                self.used[c0] = false;
            }
        }
        None
    }

    fn extend(&mut self, tip: Literal) -> bool {
        let key = (!tip).code();
        let candidates = self.occurrences.get(&key).map_or(0, |list| list.len());
        for slot in 0..candidates {
            let (idx, other) = self.occurrences[&key][slot];
            if self.used[idx] {
                continue;
            }
            if self.in_vars[other.var() as usize] {
                // closing clause: v = other already lies on the chain
                let last_needed = !self.exact || self.used_count == self.used.len() - 1;
                if self.chain_len >= 2 && last_needed && self.in_vars[self.u_var as usize] {
                    self.roles.push(idx);
                    return true;
                }
            } else if !self.exact || self.used_count < self.used.len() - 1 {
                self.used[idx] = true;
                self.used_count += 1;
                self.in_vars[other.var() as usize] = true;
                self.roles.push(idx);
                self.chain_len += 1;
                if self.extend(other) {
                    return true;
                }
                self.chain_len -= 1;
                self.roles.pop();
                self.in_vars[other.var() as usize] = false;
                self.used[idx] = false;
                self.used_count -= 1;
            }
        }
        false
    }
}
