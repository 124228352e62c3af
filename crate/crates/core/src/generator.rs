//! Random clause and instance sampling.
//!
//! A clause is drawn in three stages: pick a clause type with
//! probability proportional to its mixture weight, pick that many
//! distinct communities uniformly (ordered), then for the j-th chosen
//! community pick the type's j-th entry worth of distinct member
//! variables; finally negate each picked variable independently with
//! probability 1/2. Instances are `m` such clauses drawn independently
//! with replacement.
//!
//! All randomness flows through [`ChaCha8Rng`]: a keyed counter-mode
//! generator whose 64-bit stream id gives every trial of an experiment
//! its own independent, reproducible sequence regardless of how trials
//! are scheduled across threads.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::model::{validate, Clause, Instance, Layout, Literal, Mixture, ModelError, Provenance};

/// Everything needed to draw one instance reproducibly.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorConfig {
    layout: Layout,
    clause_count: usize,
    mixture: Mixture,
    seed: u64,
}

impl GeneratorConfig {
    /// Validates the mixture against the layout; the stored mixture has
    /// its weights rescaled to sum to exactly 1.
    pub fn new(
        layout: Layout,
        clause_count: usize,
        mixture: Mixture,
        seed: u64,
    ) -> Result<GeneratorConfig, ModelError> {
        validate(&layout, &mixture)?;
        Ok(GeneratorConfig {
            layout,
            clause_count,
            mixture: mixture.normalized(),
            seed,
        })
    }

    pub fn layout(&self) -> &Layout {
        &self.layout
    }

    pub fn clause_count(&self) -> usize {
        self.clause_count
    }

    pub fn mixture(&self) -> &Mixture {
        &self.mixture
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }
}

/// The generator for one trial of an experiment: `seed` keys the
/// generator, `stream` selects the trial's independent substream.
pub fn trial_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Reusable clause-drawing state for one (layout, mixture) pair.
///
/// Sampling through one of these does not allocate, which matters when
/// experiments draw millions of clauses per trial.
#[derive(Debug, Clone)]
pub struct ClauseSampler {
    layout: Layout,
    /// Types with cumulative weights, so a type is found by one uniform
    /// draw and a short forward scan.
    cumulative: Vec<(Vec<u32>, f64)>,
    /// Sparse Fisher-Yates displacement records, reused across draws.
    swaps: Vec<(u32, u32)>,
}

impl ClauseSampler {
    pub fn new(layout: &Layout, mixture: &Mixture) -> Result<ClauseSampler, ModelError> {
        validate(layout, mixture)?;
        let total: f64 = mixture.weight_sum();
        let mut acc = 0.0;
        let cumulative = mixture
            .components()
            .iter()
            .map(|(ty, w)| {
                acc += w / total;
                (ty.entries().to_vec(), acc)
            })
            .collect();
        Ok(ClauseSampler {
            layout: *layout,
            cumulative,
            swaps: Vec::new(),
        })
    }

    /// Draws one clause into `out` (cleared first), sorted by variable.
    pub fn sample_into(&mut self, rng: &mut impl Rng, out: &mut Vec<Literal>) {
        out.clear();
        let entries: &[u32] = if self.cumulative.len() == 1 {
            &self.cumulative[0].0
        } else {
            let u: f64 = rng.gen();
            // The last cumulative weight is 1 up to rounding; fall
            // through to it so u=0.999999... cannot fall off the end.
            let mut pick = self.cumulative.len() - 1;
            for (i, (_, acc)) in self.cumulative.iter().enumerate() {
                if u < *acc {
                    pick = i;
                    break;
                }
            }
            &self.cumulative[pick].0
        };

        let h = self.layout.community_size();
        let b = self.layout.communities();
        // Ordered sample of distinct communities, one per type entry.
        self.swaps.clear();
        for (j, &k) in entries.iter().enumerate() {
            let community = sparse_fisher_yates(&mut self.swaps, j as u32, b, rng);
            let base = community * h;
            let start = self.swaps.len();
            // Nested draw over this community's members; entries are
            // disjoint blocks, so the swap records cannot collide with
            // the community-level ones. Mark a fresh region instead of
            // clearing.
            let offsets_region = start;
            for i in 0..k {
                let offset =
                    sparse_fisher_yates_from(&mut self.swaps, offsets_region, i, h, rng);
                let var = base + offset + 1;
                let lit = if rng.gen::<bool>() {
                    Literal::positive(var)
                } else {
                    Literal::negative(var)
                };
                out.push(lit);
            }
            self.swaps.truncate(offsets_region);
        }
        out.sort_unstable_by_key(|l| l.var());
    }

    /// Convenience form of [`ClauseSampler::sample_into`].
    pub fn sample(&mut self, rng: &mut impl Rng) -> Clause {
        let mut lits = Vec::new();
        self.sample_into(rng, &mut lits);
        Clause::new(lits).expect("sampled clauses have distinct variables")
    }
}

/// One step of a partial Fisher-Yates shuffle over `0..range` without
/// materializing the array: displaced slots live in `swaps` as
/// `(index, value)` pairs. Step `i` returns the i-th element of the
/// shuffle; calling with i = 0, 1, 2, ... yields a uniform ordered
/// sample of distinct values.
fn sparse_fisher_yates(
    swaps: &mut Vec<(u32, u32)>,
    i: u32,
    range: u32,
    rng: &mut impl Rng,
) -> u32 {
    sparse_fisher_yates_from(swaps, 0, i, range, rng)
}

/// As [`sparse_fisher_yates`], but only records at `region..` in
/// `swaps` belong to this shuffle; earlier entries are another shuffle
/// in progress.
fn sparse_fisher_yates_from(
    swaps: &mut Vec<(u32, u32)>,
    region: usize,
    i: u32,
    range: u32,
    rng: &mut impl Rng,
) -> u32 {
    let j = rng.gen_range(i..range);
    let lookup = |swaps: &[(u32, u32)], idx: u32| {
        swaps[region..]
            .iter()
            .find(|(k, _)| *k == idx)
            .map(|(_, v)| *v)
            .unwrap_or(idx)
    };
    let taken = lookup(swaps, j);
    if j != i {
        let displaced = lookup(swaps, i);
        match swaps[region..].iter_mut().find(|(k, _)| *k == j) {
            Some(entry) => entry.1 = displaced,
            None => swaps.push((j, displaced)),
        }
    }
    taken
}

/// Draws the whole instance for `config`, on stream 0 of its seed.
///
/// The result carries the seed and mixture as provenance, so a DIMACS
/// dump of it records how to regenerate it.
pub fn sample_instance(config: &GeneratorConfig) -> Instance {
    let mut rng = trial_rng(config.seed, 0);
    let mut sampler = ClauseSampler::new(&config.layout, &config.mixture)
        .expect("config was validated at construction");
    let mut clauses = Vec::with_capacity(config.clause_count);
    let mut buf = Vec::new();
    for _ in 0..config.clause_count {
        sampler.sample_into(&mut rng, &mut buf);
        clauses.push(Clause::new(buf.clone()).expect("sampled clauses are well-formed"));
    }
    Instance::new(config.layout, clauses)
        .expect("sampled variables lie inside the layout")
        .with_provenance(Provenance {
            seed: Some(config.seed),
            mixture: Some(config.mixture.clone()),
        })
}

/// Draws one clause; allocation-free sampling for bulk use lives on
/// [`ClauseSampler`].
pub fn sample_clause(layout: &Layout, mixture: &Mixture, rng: &mut impl Rng) -> Clause {
    let mut sampler =
        ClauseSampler::new(layout, mixture).expect("layout and mixture must validate");
    sampler.sample(rng)
}

/// An instance split by community reach: clauses whose variables all
/// lie in one community, bucketed by that community, plus the clauses
/// that span several.
///
/// Sub-instances keep the parent layout and variable numbering, so any
/// solver output maps straight back to the original formula.
#[derive(Debug, Clone, PartialEq)]
pub struct Decomposition {
    per_community: Vec<Instance>,
    remainder: Instance,
}

impl Decomposition {
    /// Single-community sub-instances, indexed by community - 1.
    pub fn communities(&self) -> &[Instance] {
        &self.per_community
    }

    /// The sub-instance of clauses owned entirely by `community`
    /// (1-based).
    pub fn community(&self, community: u32) -> &Instance {
        &self.per_community[community as usize - 1]
    }

    /// Clauses spanning two or more communities.
    pub fn remainder(&self) -> &Instance {
        &self.remainder
    }

    /// Per-community clause counts, the occupancy numbers the
    /// balls-in-bins analysis is about.
    pub fn clause_counts(&self) -> Vec<usize> {
        self.per_community.iter().map(Instance::clause_count).collect()
    }
}

/// Buckets every clause of `instance` by whether it stays inside one
/// community, preserving clause order within each bucket.
pub fn decompose_single_community(instance: &Instance) -> Decomposition {
    let layout = *instance.layout();
    let mut buckets: Vec<Vec<Clause>> = vec![Vec::new(); layout.communities() as usize];
    let mut remainder: Vec<Clause> = Vec::new();
    for clause in instance.clauses() {
        let lits = clause.literals();
        // Literals are sorted by variable and communities are
        // contiguous variable blocks, so one clause stays in one
        // community exactly when its first and last variables agree on
        // the community.
        let first = layout
            .community_of(lits[0].var())
            .expect("instance variables are in range");
        let last = layout
            .community_of(lits[lits.len() - 1].var())
            .expect("instance variables are in range");
        if first == last {
            buckets[first as usize - 1].push(clause.clone());
        } else {
            remainder.push(clause.clone());
        }
    }
    Decomposition {
        per_community: buckets
            .into_iter()
            .map(|clauses| {
                Instance::new(layout, clauses).expect("bucketed clauses stay in range")
            })
            .collect(),
        remainder: Instance::new(layout, remainder).expect("remainder clauses stay in range"),
    }
}
