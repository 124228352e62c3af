//! Width-2 solving via the implication graph.
//!
//! A clause (a v b) forces the arcs !a -> b and !b -> a; a unit clause (a)
//! contributes !a -> a. The formula is unsatisfiable exactly when some
//! variable shares a strongly connected component with its complement.
//! Otherwise setting each variable true when its positive node's component
//! is completed earlier than its negative node's yields a model.
//!
//! Components are found with an iterative single-array SCC scan (Pearce's
//! variant of Tarjan), so million-variable instances run in linear time
//! without blowing the call stack, and a contradiction aborts the scan as
//! soon as its component completes. On the unsatisfiable side the solver
//! emits a [`ContradictionCertificate`]: a shortest implication path
//! x => .. => !x and one back, each step tagged with the clause that
//! produced the arc.

use super::{Assignment, SolveResult, SolverError};
use crate::model::{Instance, Literal};

const UNSET: u32 = u32::MAX;

/// Positive literal of variable v (1-based) maps to node 2(v-1), the
/// negative one to 2(v-1)+1, so complementation is xor 1.
fn node_of(code: i32) -> u32 {
    2 * (code.unsigned_abs() - 1) + (code < 0) as u32
}

fn literal_of(node: u32) -> Literal {
    let var = (node / 2 + 1) as i32;
    Literal::new(if node & 1 == 0 { var } else { -var })
}

/// One arc of an implication path: `from` being true forces `to` via the
/// clause at `clause_index`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ImplicationStep {
    pub from: Literal,
    pub to: Literal,
    pub clause_index: usize,
}

/// Proof that `variable` cannot take either truth value: a chain of
/// implications from x to !x and another from !x back to x. Every step
/// names the clause that justifies it, so the certificate can be checked
/// against the instance without re-running the solver.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContradictionCertificate {
    pub variable: u32,
    pub forward: Vec<ImplicationStep>,
    pub backward: Vec<ImplicationStep>,
}

impl ContradictionCertificate {
    /// Checks the certificate against `instance`: both chains must be
    /// nonempty, connect x to !x and back, and every step must be licensed
    /// by the clause it cites.
    pub fn verify(&self, instance: &Instance) -> bool {
        if self.variable == 0 || self.variable > instance.var_count() {
            return false;
        }
        let x = Literal::new(self.variable as i32);
        chain_ok(&self.forward, x, !x, instance) && chain_ok(&self.backward, !x, x, instance)
    }
}

fn chain_ok(steps: &[ImplicationStep], start: Literal, end: Literal, instance: &Instance) -> bool {
    let Some(first) = steps.first() else {
        return false;
    };
    if first.from != start || steps.last().unwrap().to != end {
        return false;
    }
    for pair in steps.windows(2) {
        if pair[0].to != pair[1].from {
            return false;
        }
    }
    steps.iter().all(|step| step_licensed(step, instance))
}

/// The arc from -> to is licensed by clause (!from v to); for a unit
/// clause the two coincide.
fn step_licensed(step: &ImplicationStep, instance: &Instance) -> bool {
    let Some(clause) = instance.clauses().get(step.clause_index) else {
        return false;
    };
    let a = !step.from;
    let b = step.to;
    let lits = clause.literals();
    if a == b {
        return lits == [a];
    }
    if a.var() == b.var() {
        // would require a tautological clause, which instances never hold
        return false;
    }
    let want = if a.var() < b.var() { [a, b] } else { [b, a] };
    lits == want
}

/// Completed nodes carry this bit in `rindex`; the low bits hold their
/// component id. In-progress visit indices never have it, so one array
/// serves as visit order, lowlink and component id at once.
const DONE: u32 = 1 << 31;

/// Reusable scratch for implication-graph solving. Buffers persist across
/// calls so a long experiment run allocates once per worker.
pub(crate) struct TwoSatSolver {
    heads: Vec<u32>,
    arc_targets: Vec<u32>,
    arc_clauses: Vec<u32>,
    rindex: Vec<u32>,
    cursors: Vec<u32>,
    scc_stack: Vec<u32>,
    frames: Vec<(u32, u32, bool)>,
}

impl TwoSatSolver {
    pub(crate) fn new() -> TwoSatSolver {
        TwoSatSolver {
            heads: Vec::new(),
            arc_targets: Vec::new(),
            arc_clauses: Vec::new(),
            rindex: Vec::new(),
            cursors: Vec::new(),
            scc_stack: Vec::new(),
            frames: Vec::new(),
        }
    }

    /// Satisfiability only, skipping witness and certificate work. Each
    /// pair is one clause; a unit clause is encoded as (l, l).
    pub(crate) fn decide_pairs(&mut self, n: u32, pairs: &[(i32, i32)]) -> bool {
        self.run(n, pairs).is_none()
    }

    pub(crate) fn solve_instance(&mut self, instance: &Instance) -> Result<SolveResult, SolverError> {
        let n = instance.var_count();
        let mut pairs = Vec::with_capacity(instance.clause_count());
        for clause in instance.clauses() {
            match *clause.literals() {
                [l] => pairs.push((l.code(), l.code())),
                [a, b] => pairs.push((a.code(), b.code())),
                ref longer => return Err(SolverError::ClauseTooLong { len: longer.len() }),
            }
        }
        match self.run(n, &pairs) {
            Some(var) => {
                let pos = node_of(var as i32);
                let certificate = ContradictionCertificate {
                    variable: var,
                    forward: self.implication_path(pos, pos ^ 1),
                    backward: self.implication_path(pos ^ 1, pos),
                };
                debug_assert!(certificate.verify(instance));
                Ok(SolveResult::Unsat(Some(certificate)))
            }
            None => {
                // the positive literal's component completing first puts it
                // later in topological order, which is what makes it safe
                // to satisfy; ids count down, so earlier completion means a
                // larger id
                let values = (0..n)
                    .map(|v| self.rindex[2 * v as usize] > self.rindex[2 * v as usize + 1])
                    .collect();
                Ok(SolveResult::Sat(Assignment::new(values)))
            }
        }
    }

    /// Builds the implication graph in CSR form and finds its strongly
    /// connected components, stopping at the first variable that shares a
    /// component with its complement.
    fn run(&mut self, n: u32, pairs: &[(i32, i32)]) -> Option<u32> {
        let nodes = 2 * n as usize;
        debug_assert!(pairs.len() <= u32::MAX as usize / 2);

        self.heads.clear();
        self.heads.resize(nodes + 1, 0);
        for &(a, b) in pairs {
            if a == b {
                self.heads[(node_of(a) ^ 1) as usize + 1] += 1;
            } else {
                self.heads[(node_of(a) ^ 1) as usize + 1] += 1;
                self.heads[(node_of(b) ^ 1) as usize + 1] += 1;
            }
        }
        for i in 0..nodes {
            self.heads[i + 1] += self.heads[i];
        }
        let arcs = self.heads[nodes] as usize;
        self.arc_targets.clear();
        self.arc_targets.resize(arcs, 0);
        self.arc_clauses.clear();
        self.arc_clauses.resize(arcs, 0);

        self.cursors.clear();
        self.cursors.extend_from_slice(&self.heads[..nodes]);
        for (ci, &(a, b)) in pairs.iter().enumerate() {
            if a == b {
                self.push_arc(node_of(a) ^ 1, node_of(a), ci as u32);
            } else {
                self.push_arc(node_of(a) ^ 1, node_of(b), ci as u32);
                self.push_arc(node_of(b) ^ 1, node_of(a), ci as u32);
            }
        }

        self.pearce(nodes)
    }

    fn push_arc(&mut self, from: u32, to: u32, clause: u32) {
        let slot = self.cursors[from as usize] as usize;
        self.cursors[from as usize] += 1;
        self.arc_targets[slot] = to;
        self.arc_clauses[slot] = clause;
    }

    /// Iterative SCC scan in Pearce's single-array style: `rindex` holds
    /// the visit index while a node is in progress and the component id
    /// (tagged [`DONE`]) once settled, with ids assigned in descending
    /// order of completion. A variable contradicts itself exactly when
    /// its two literal nodes settle into the same component; since those
    /// nodes are array neighbors, checking the complement as each node
    /// settles is nearly free and lets the scan abort on the first
    /// contradiction. Returns that variable, or None when the formula is
    /// satisfiable.
    fn pearce(&mut self, nodes: usize) -> Option<u32> {
        self.rindex.clear();
        self.rindex.resize(nodes, 0);
        self.scc_stack.clear();
        self.frames.clear();

        let mut index: u32 = 1;
        let mut next_id: u32 = nodes as u32;
        for start in 0..nodes as u32 {
            if self.rindex[start as usize] != 0 {
                continue;
            }
            self.rindex[start as usize] = index;
            index += 1;
            self.frames.push((start, self.heads[start as usize], true));
            while let Some(&(v, cursor, root)) = self.frames.last() {
                let vi = v as usize;
                if cursor < self.heads[vi + 1] {
                    let w = self.arc_targets[cursor as usize] as usize;
                    let rw = self.rindex[w];
                    if rw == 0 {
                        self.rindex[w] = index;
                        index += 1;
                        // leave the cursor in place; the child's final
                        // value is folded in when this arc is re-read
                        self.frames.push((w as u32, self.heads[w], true));
                    } else {
                        let frame = self.frames.last_mut().unwrap();
                        frame.1 = cursor + 1;
                        if rw < self.rindex[vi] {
                            // settled targets carry DONE and never pass
                            self.rindex[vi] = rw;
                            frame.2 = false;
                        }
                    }
                } else {
                    self.frames.pop();
                    if root {
                        let rv = self.rindex[vi];
                        let id = next_id | DONE;
                        next_id -= 1;
                        while let Some(&top) = self.scc_stack.last() {
                            if self.rindex[top as usize] < rv {
                                break;
                            }
                            self.scc_stack.pop();
                            self.rindex[top as usize] = id;
                            if self.rindex[(top ^ 1) as usize] == id {
                                return Some(top / 2 + 1);
                            }
                        }
                        self.rindex[vi] = id;
                        if self.rindex[(v ^ 1) as usize] == id {
                            return Some(v / 2 + 1);
                        }
                    } else {
                        self.scc_stack.push(v);
                    }
                }
            }
        }
        None
    }

    /// Shortest arc path between two literal nodes, by breadth-first
    /// search. Callers only ask for paths inside one component, so the
    /// target is always reachable.
    fn implication_path(&self, from: u32, to: u32) -> Vec<ImplicationStep> {
        let nodes = self.rindex.len();
        let mut parent_node = vec![UNSET; nodes];
        let mut parent_arc = vec![UNSET; nodes];
        let mut queue = Vec::with_capacity(64);
        parent_node[from as usize] = from;
        queue.push(from);
        let mut head = 0;
        'search: while head < queue.len() {
            let v = queue[head] as usize;
            head += 1;
            for arc in self.heads[v]..self.heads[v + 1] {
                let w = self.arc_targets[arc as usize];
                if parent_node[w as usize] == UNSET {
                    parent_node[w as usize] = v as u32;
                    parent_arc[w as usize] = arc;
                    if w == to {
                        break 'search;
                    }
                    queue.push(w);
                }
            }
        }

        let mut steps = Vec::new();
        let mut cur = to;
        while cur != from {
            let arc = parent_arc[cur as usize];
            let parent = parent_node[cur as usize];
            steps.push(ImplicationStep {
                from: literal_of(parent),
                to: literal_of(cur),
                clause_index: self.arc_clauses[arc as usize] as usize,
            });
            cur = parent;
        }
        steps.reverse();
        steps
    }
}

/// Decides a width-2 instance (clauses of length 1 or 2). Satisfiable
/// instances come back with a verified-correct assignment, unsatisfiable
/// ones with a contradiction certificate.
pub fn solve_2sat(instance: &Instance) -> Result<SolveResult, SolverError> {
    TwoSatSolver::new().solve_instance(instance)
}
