//! Formula types for community-structured random CNF.
//!
//! Variables `1..=n` are split into `B` communities of equal size `h`
//! (`n = B * h`), community `i` owning the contiguous block
//! `(i-1)*h + 1 ..= i*h`. A clause "type" records how many variables a
//! clause draws from each community it touches, written as a
//! non-increasing tuple: `(3)` is three variables from one community,
//! `(1,1,1)` one variable from each of three distinct communities. A
//! [`Mixture`] assigns probability weights to a set of types; classical
//! uniform k-SAT is recovered with a single community (`B = 1`) and the
//! one-entry type `(k)`.

mod counting;
mod dimacs;
mod multigraph;

pub use counting::sample_space_size;
pub use dimacs::{read_dimacs, write_dimacs, DimacsError};
pub use multigraph::{build_incidence_multigraph, IncidenceMultigraph};

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

/// Absolute tolerance for a mixture's weight sum before it is rejected.
pub const WEIGHT_SUM_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("{n} variables cannot be split into {communities} equal communities")]
    LayoutMismatch { n: u32, communities: u32 },
    #[error("layout dimensions must be positive")]
    EmptyLayout,
    #[error("variable {var} out of range 1..={n}")]
    VariableOutOfRange { var: u32, n: u32 },
    #[error("clause has no literals")]
    EmptyClause,
    #[error("variable {var} appears twice in one clause")]
    RepeatedVariable { var: u32 },
    #[error("clause type ({ty}) is not a non-increasing sequence of positive entries")]
    NonMonotoneType { ty: ClauseType },
    #[error("clause type ({ty}) names more communities than the layout has ({communities})")]
    TypeTooLong { ty: ClauseType, communities: u32 },
    #[error("clause type entry {entry} exceeds the community size {community_size}")]
    EntryTooLarge { entry: u32, community_size: u32 },
    #[error("mixture lists type ({ty}) more than once")]
    DuplicateType { ty: ClauseType },
    #[error("mixture weight {weight} is not positive and finite")]
    NonPositiveWeight { weight: f64 },
    #[error("mixture weights sum to {sum}, expected 1 within {WEIGHT_SUM_TOLERANCE:e}")]
    WeightSum { sum: f64 },
    #[error("mixture has no components")]
    EmptyMixture,
    #[error("cannot parse {what} from {text:?}: {detail}")]
    Syntax {
        what: &'static str,
        text: String,
        detail: &'static str,
    },
}

/// A signed propositional literal, encoded DIMACS style.
///
/// The code is the variable index (1-based) with the sign carrying the
/// polarity; `0` is not a literal.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Literal(i32);

impl Literal {
    /// Wraps a raw nonzero DIMACS code.
    pub fn new(code: i32) -> Literal {
        assert!(code != 0, "literal code must be nonzero");
        Literal(code)
    }

    pub fn positive(var: u32) -> Literal {
        Literal(var as i32)
    }

    pub fn negative(var: u32) -> Literal {
        Literal(-(var as i32))
    }

    pub fn code(self) -> i32 {
        self.0
    }

    pub fn var(self) -> u32 {
        self.0.unsigned_abs()
    }

    pub fn is_positive(self) -> bool {
        self.0 > 0
    }
}

impl std::ops::Not for Literal {
    type Output = Literal;

    fn not(self) -> Literal {
        Literal(-self.0)
    }
}

impl fmt::Debug for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A disjunction of literals over pairwise distinct variables, kept
/// sorted by variable index so that equal clauses compare equal.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Clause {
    literals: Vec<Literal>,
}

impl Clause {
    /// Builds a clause, sorting the literals by variable index.
    ///
    /// Rejects empty input and repeated variables (a repeated variable is
    /// either a duplicate literal or a tautological pair; neither is a
    /// clause this model produces).
    pub fn new(mut literals: Vec<Literal>) -> Result<Clause, ModelError> {
        if literals.is_empty() {
            return Err(ModelError::EmptyClause);
        }
        literals.sort_unstable_by_key(|l| l.var());
        for pair in literals.windows(2) {
            if pair[0].var() == pair[1].var() {
                return Err(ModelError::RepeatedVariable { var: pair[0].var() });
            }
        }
        Ok(Clause { literals })
    }

    pub fn unit(literal: Literal) -> Clause {
        Clause {
            literals: vec![literal],
        }
    }

    pub fn literals(&self) -> &[Literal] {
        &self.literals
    }

    pub fn len(&self) -> usize {
        self.literals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.literals.is_empty()
    }

    /// Largest variable index used, for sizing solver structures.
    pub fn max_var(&self) -> u32 {
        // Literals are sorted by variable index.
        self.literals.last().expect("clause is never empty").var()
    }
}

impl fmt::Debug for Clause {
    /// Writes `(l1 v l2 v ...)`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, lit) in self.literals.iter().enumerate() {
            if i > 0 {
                write!(f, " v ")?;
            }
            write!(f, "{lit}")?;
        }
        write!(f, ")")
    }
}

/// How a clause distributes over communities: a tuple of per-community
/// variable counts, canonically non-increasing.
///
/// Construction is unchecked; [`validate`] (or any sampling entry point)
/// rejects malformed or out-of-range types.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ClauseType {
    entries: Vec<u32>,
}

impl ClauseType {
    pub fn new(entries: Vec<u32>) -> ClauseType {
        ClauseType { entries }
    }

    pub fn entries(&self) -> &[u32] {
        &self.entries
    }

    /// Number of communities the type touches.
    pub fn community_count(&self) -> usize {
        self.entries.len()
    }

    /// Total number of literals in a clause of this type.
    pub fn width(&self) -> u32 {
        self.entries.iter().sum()
    }

    pub fn is_well_formed(&self) -> bool {
        !self.entries.is_empty()
            && self.entries.iter().all(|&k| k >= 1)
            && self.entries.windows(2).all(|w| w[0] >= w[1])
    }
}

impl fmt::Display for ClauseType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, k) in self.entries.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{k}")?;
        }
        Ok(())
    }
}

impl fmt::Debug for ClauseType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({self})")
    }
}

impl FromStr for ClauseType {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<ClauseType, ModelError> {
        let syntax = |detail| ModelError::Syntax {
            what: "clause type",
            text: s.to_owned(),
            detail,
        };
        let entries = s
            .split(',')
            .map(|tok| tok.trim().parse::<u32>())
            .collect::<Result<Vec<u32>, _>>()
            .map_err(|_| syntax("entries must be comma-separated integers"))?;
        if entries.is_empty() {
            return Err(syntax("type has no entries"));
        }
        Ok(ClauseType::new(entries))
    }
}

/// A weighted set of clause types; clause sampling first picks a type
/// with probability proportional to its weight.
///
/// Text form: semicolon-separated `entries:weight` components, e.g.
/// `3:0.2;1,1,1:0.8`. Construction is unchecked; [`validate`] enforces
/// distinct well-formed types and a weight sum of 1.
#[derive(Clone, PartialEq)]
pub struct Mixture {
    components: Vec<(ClauseType, f64)>,
}

impl Mixture {
    pub fn new(components: Vec<(ClauseType, f64)>) -> Mixture {
        Mixture { components }
    }

    /// The whole weight on a single type.
    pub fn single(ty: ClauseType) -> Mixture {
        Mixture {
            components: vec![(ty, 1.0)],
        }
    }

    pub fn components(&self) -> &[(ClauseType, f64)] {
        &self.components
    }

    pub fn weight_sum(&self) -> f64 {
        self.components.iter().map(|(_, w)| w).sum()
    }

    /// Rescales the weights to sum to exactly 1.
    ///
    /// Generator configuration does this once after validation, so a
    /// mixture that passed the sum tolerance check samples with exact
    /// probabilities.
    pub fn normalized(&self) -> Mixture {
        let sum = self.weight_sum();
        Mixture {
            components: self
                .components
                .iter()
                .map(|(ty, w)| (ty.clone(), w / sum))
                .collect(),
        }
    }

    /// Largest clause width over the component types, which is what
    /// decides whether the linear-time 2-CNF solver applies.
    pub fn max_width(&self) -> u32 {
        self.components
            .iter()
            .map(|(ty, _)| ty.width())
            .max()
            .unwrap_or(0)
    }
}

impl fmt::Display for Mixture {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, (ty, w)) in self.components.iter().enumerate() {
            if i > 0 {
                write!(f, ";")?;
            }
            write!(f, "{ty}:{w}")?;
        }
        Ok(())
    }
}

impl fmt::Debug for Mixture {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl FromStr for Mixture {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Mixture, ModelError> {
        let syntax = |detail| ModelError::Syntax {
            what: "mixture",
            text: s.to_owned(),
            detail,
        };
        let mut components = Vec::new();
        for part in s.split(';') {
            let part = part.trim();
            let (ty, weight) = part
                .rsplit_once(':')
                .ok_or_else(|| syntax("expected entries:weight"))?;
            let ty: ClauseType = ty.parse()?;
            let weight: f64 = weight
                .trim()
                .parse()
                .map_err(|_| syntax("weight is not a number"))?;
            components.push((ty, weight));
        }
        if components.is_empty() {
            return Err(syntax("mixture has no components"));
        }
        Ok(Mixture::new(components))
    }
}

/// The community structure: `n` variables in `communities` equal blocks
/// of `community_size` variables each.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct Layout {
    n: u32,
    communities: u32,
    community_size: u32,
}

impl Layout {
    /// Layout with `communities * community_size` variables.
    pub fn new(communities: u32, community_size: u32) -> Result<Layout, ModelError> {
        if communities == 0 || community_size == 0 {
            return Err(ModelError::EmptyLayout);
        }
        let n = communities
            .checked_mul(community_size)
            .ok_or(ModelError::EmptyLayout)?;
        Ok(Layout {
            n,
            communities,
            community_size,
        })
    }

    /// Splits `n` variables into `communities` equal blocks; fails when
    /// the count does not divide evenly.
    pub fn split(n: u32, communities: u32) -> Result<Layout, ModelError> {
        if n == 0 || communities == 0 || n % communities != 0 {
            return Err(ModelError::LayoutMismatch { n, communities });
        }
        Ok(Layout {
            n,
            communities,
            community_size: n / communities,
        })
    }

    pub fn var_count(&self) -> u32 {
        self.n
    }

    pub fn communities(&self) -> u32 {
        self.communities
    }

    pub fn community_size(&self) -> u32 {
        self.community_size
    }

    /// Community (1-based) owning a variable.
    pub fn community_of(&self, var: u32) -> Result<u32, ModelError> {
        if var == 0 || var > self.n {
            return Err(ModelError::VariableOutOfRange { var, n: self.n });
        }
        Ok((var - 1) / self.community_size + 1)
    }

    /// The variables `(i-1)*h+1 ..= i*h` owned by community `i`.
    pub fn community_span(&self, community: u32) -> std::ops::RangeInclusive<u32> {
        let first = (community - 1) * self.community_size + 1;
        first..=first + self.community_size - 1
    }

    /// The type a clause realizes under this layout: per-community
    /// variable counts, sorted non-increasing.
    pub fn clause_type_of(&self, clause: &Clause) -> Result<ClauseType, ModelError> {
        let mut counts: Vec<u32> = Vec::new();
        let mut last_community = 0u32;
        // Clause literals are sorted by variable, so equal communities
        // come in runs.
        for lit in clause.literals() {
            let community = self.community_of(lit.var())?;
            if community == last_community {
                *counts.last_mut().expect("run seen before") += 1;
            } else {
                counts.push(1);
                last_community = community;
            }
        }
        counts.sort_unstable_by(|a, b| b.cmp(a));
        Ok(ClauseType::new(counts))
    }
}

impl fmt::Debug for Layout {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "Layout(n={}, B={}, h={})",
            self.n, self.communities, self.community_size
        )
    }
}

/// Checks a mixture against a layout: every type must be a non-empty
/// non-increasing tuple of positive entries, touch at most `B`
/// communities, ask for at most `h` variables from any one of them, and
/// appear only once; weights must be positive and sum to 1 within
/// [`WEIGHT_SUM_TOLERANCE`].
pub fn validate(layout: &Layout, mixture: &Mixture) -> Result<(), ModelError> {
    if mixture.components().is_empty() {
        return Err(ModelError::EmptyMixture);
    }
    for (i, (ty, weight)) in mixture.components().iter().enumerate() {
        if !ty.is_well_formed() {
            return Err(ModelError::NonMonotoneType { ty: ty.clone() });
        }
        if ty.community_count() > layout.communities() as usize {
            return Err(ModelError::TypeTooLong {
                ty: ty.clone(),
                communities: layout.communities(),
            });
        }
        // Entries are non-increasing, so the first is the largest.
        let largest = ty.entries()[0];
        if largest > layout.community_size() {
            return Err(ModelError::EntryTooLarge {
                entry: largest,
                community_size: layout.community_size(),
            });
        }
        if !weight.is_finite() || *weight <= 0.0 {
            return Err(ModelError::NonPositiveWeight { weight: *weight });
        }
        if mixture.components()[..i].iter().any(|(t, _)| t == ty) {
            return Err(ModelError::DuplicateType { ty: ty.clone() });
        }
    }
    let sum = mixture.weight_sum();
    if (sum - 1.0).abs() > WEIGHT_SUM_TOLERANCE {
        return Err(ModelError::WeightSum { sum });
    }
    Ok(())
}

/// Where an instance came from, carried through DIMACS output so runs
/// can be reproduced.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Provenance {
    pub seed: Option<u64>,
    pub mixture: Option<Mixture>,
}

impl Provenance {
    pub fn is_empty(&self) -> bool {
        self.seed.is_none() && self.mixture.is_none()
    }
}

/// A CNF formula over a community layout. Clause order is meaningful
/// (experiments evaluate prefixes of one clause list) and duplicate
/// clauses are allowed, as sampling draws with replacement.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    layout: Layout,
    clauses: Vec<Clause>,
    provenance: Provenance,
}

impl Instance {
    pub fn new(layout: Layout, clauses: Vec<Clause>) -> Result<Instance, ModelError> {
        for clause in &clauses {
            let var = clause.max_var();
            if var > layout.var_count() {
                return Err(ModelError::VariableOutOfRange {
                    var,
                    n: layout.var_count(),
                });
            }
        }
        Ok(Instance {
            layout,
            clauses,
            provenance: Provenance::default(),
        })
    }

    pub fn with_provenance(mut self, provenance: Provenance) -> Instance {
        self.provenance = provenance;
        self
    }

    pub fn layout(&self) -> &Layout {
        &self.layout
    }

    pub fn clauses(&self) -> &[Clause] {
        &self.clauses
    }

    pub fn clause_count(&self) -> usize {
        self.clauses.len()
    }

    pub fn var_count(&self) -> u32 {
        self.layout.var_count()
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    pub fn max_clause_len(&self) -> usize {
        self.clauses.iter().map(Clause::len).max().unwrap_or(0)
    }
}
