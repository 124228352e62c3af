//! Variable-incidence multigraph of a formula.

use std::collections::BTreeMap;

use super::Instance;

/// Vertices are variables; every pair of variables sharing a clause
/// contributes one edge per clause, so repeated co-occurrence shows up
/// as edge multiplicity (a clause of length k adds C(k,2) edges).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IncidenceMultigraph {
    vertex_count: u32,
    multiplicities: BTreeMap<(u32, u32), u32>,
    total_edges: u64,
}

impl IncidenceMultigraph {
    pub fn vertex_count(&self) -> u32 {
        self.vertex_count
    }

    /// Multiplicity of the undirected edge `{u, v}`.
    pub fn edge_multiplicity(&self, u: u32, v: u32) -> u32 {
        let key = if u <= v { (u, v) } else { (v, u) };
        self.multiplicities.get(&key).copied().unwrap_or(0)
    }

    /// Number of edges counted with multiplicity.
    pub fn total_edges(&self) -> u64 {
        self.total_edges
    }

    /// Number of distinct variable pairs with at least one shared clause.
    pub fn distinct_edge_count(&self) -> usize {
        self.multiplicities.len()
    }

    /// Edges as `((u, v), multiplicity)` in lexicographic order, u < v.
    pub fn edges(&self) -> impl Iterator<Item = ((u32, u32), u32)> + '_ {
        self.multiplicities.iter().map(|(&e, &m)| (e, m))
    }
}

pub fn build_incidence_multigraph(instance: &Instance) -> IncidenceMultigraph {
    let mut multiplicities = BTreeMap::new();
    let mut total_edges = 0u64;
    for clause in instance.clauses() {
        let lits = clause.literals();
        // Literals are sorted by variable, so (i, j) with i < j is
        // already the canonical key order.
        for i in 0..lits.len() {
            for j in i + 1..lits.len() {
                *multiplicities
                    .entry((lits[i].var(), lits[j].var()))
                    .or_insert(0) += 1;
                total_edges += 1;
            }
        }
    }
    IncidenceMultigraph {
        vertex_count: instance.var_count(),
        multiplicities,
        total_edges,
    }
}
