//! Independent oracles for the integration suites: exhaustive
//! satisfiability checks, clause-space enumeration, occupancy-moment
//! enumeration, and a chi-square uniformity test.
#![allow(dead_code)]

use std::collections::HashSet;

use commsat_core::{Clause, ClauseType, Instance, Layout, Literal};
use num_bigint::BigInt;
use num_rational::BigRational;
use statrs::distribution::{ChiSquared, ContinuousCDF};

/// Truth table of variable v within one 64-assignment word, for v <= 6.
/// Assignment index j sets variable v true iff bit v-1 of j is set.
const PATTERNS: [u64; 6] = [
    0xAAAA_AAAA_AAAA_AAAA,
    0xCCCC_CCCC_CCCC_CCCC,
    0xF0F0_F0F0_F0F0_F0F0,
    0xFF00_FF00_FF00_FF00,
    0xFFFF_0000_FFFF_0000,
    0xFFFF_FFFF_0000_0000,
];

fn literal_word(lit: Literal, word: u64) -> u64 {
    let bit = lit.var() - 1;
    let positive = if bit < 6 {
        PATTERNS[bit as usize]
    } else if (word >> (bit - 6)) & 1 == 1 {
        u64::MAX
    } else {
        0
    };
    if lit.is_positive() {
        positive
    } else {
        !positive
    }
}

/// Decides satisfiability by evaluating the formula on every one of the
/// 2^n assignments, 64 assignments per machine word.
pub fn brute_force_sat(instance: &Instance) -> bool {
    let n = instance.var_count();
    assert!(n <= 24, "exhaustive oracle caps at 24 variables");
    let words = 1u64 << n.saturating_sub(6);
    let valid = if n >= 6 { u64::MAX } else { (1u64 << (1u32 << n)) - 1 };
    for word in 0..words {
        let mut live = valid;
        for clause in instance.clauses() {
            let mut satisfied = 0u64;
            for &lit in clause.literals() {
                satisfied |= literal_word(lit, word);
            }
            live &= satisfied;
            if live == 0 {
                break;
            }
        }
        if live != 0 {
            return true;
        }
    }
    false
}

/// Every distinct clause of type `ty` under `layout`, built by direct
/// enumeration: ordered distinct communities per entry, a variable subset
/// per entry, a sign per variable. The set deduplicates the orderings
/// that describe the same clause.
pub fn enumerate_clauses(layout: &Layout, ty: &ClauseType) -> HashSet<Clause> {
    fn subsets(vars: &[u32], k: usize, start: usize, picked: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if picked.len() == k {
            out.push(picked.clone());
            return;
        }
        for i in start..vars.len() {
            picked.push(vars[i]);
            subsets(vars, k, i + 1, picked, out);
            picked.pop();
        }
    }

    fn rec(
        layout: &Layout,
        entries: &[u32],
        used: &mut Vec<bool>,
        lits: &mut Vec<Literal>,
        set: &mut HashSet<Clause>,
    ) {
        let Some((&k, rest)) = entries.split_first() else {
            set.insert(Clause::new(lits.clone()).expect("enumerated clauses are well formed"));
            return;
        };
        for community in 1..=layout.communities() {
            if used[community as usize - 1] {
                continue;
            }
            used[community as usize - 1] = true;
            let vars: Vec<u32> = layout.community_span(community).collect();
            let mut choices = Vec::new();
            subsets(&vars, k as usize, 0, &mut Vec::new(), &mut choices);
            for choice in &choices {
                for signs in 0..(1u32 << k) {
                    let base = lits.len();
                    for (j, &var) in choice.iter().enumerate() {
                        let positive = (signs >> j) & 1 == 0;
                        let code = if positive { var as i32 } else { -(var as i32) };
                        lits.push(Literal::new(code));
                    }
                    rec(layout, rest, used, lits, set);
                    lits.truncate(base);
                }
            }
            used[community as usize - 1] = false;
        }
    }

    let mut set = HashSet::new();
    rec(
        layout,
        ty.entries(),
        &mut vec![false; layout.communities() as usize],
        &mut Vec::new(),
        &mut set,
    );
    set
}

/// Upper-tail p-value of the chi-square statistic for observed counts
/// against a uniform expectation.
pub fn chi_square_uniform_p(counts: &[u64]) -> f64 {
    let cells = counts.len() as f64;
    let total: u64 = counts.iter().sum();
    let expected = total as f64 / cells;
    assert!(expected >= 5.0, "chi-square needs a denser table");
    let stat: f64 = counts
        .iter()
        .map(|&obs| {
            let d = obs as f64 - expected;
            d * d / expected
        })
        .sum();
    let dist = ChiSquared::new(cells - 1.0).expect("positive degrees of freedom");
    1.0 - dist.cdf(stat)
}

/// E[(X_B choose t)] where X_B counts bins with exactly s balls, computed
/// by walking all B^M equiprobable placements. Only feasible for tiny
/// B and M; the result is an exact rational.
pub fn placement_moment(bins: u64, balls: u32, s: u32, t: u32) -> BigRational {
    let total = bins.pow(balls);
    let mut numerator = BigInt::from(0u32);
    let mut counts = vec![0u32; bins as usize];
    for placement in 0..total {
        counts.fill(0);
        let mut rest = placement;
        for _ in 0..balls {
            counts[(rest % bins) as usize] += 1;
            rest /= bins;
        }
        let x = counts.iter().filter(|&&c| c == s).count() as u64;
        numerator += binomial_u64(x, u64::from(t));
    }
    BigRational::new(numerator, BigInt::from(total))
}

pub fn binomial_u64(n: u64, k: u64) -> u64 {
    if k > n {
        return 0;
    }
    let mut result = 1u64;
    for i in 0..k {
        result = result * (n - i) / (i + 1);
    }
    result
}

/// A single-community instance with uniformly random clauses: up to
/// `max_n` variables, widths `1..=max_width`, and up to `density * n`
/// clauses. Coarse by design; it exists to feed the exhaustive oracle.
pub fn random_instance(
    rng: &mut impl rand::Rng,
    max_n: u32,
    max_width: usize,
    density: u32,
) -> Instance {
    let n = rng.gen_range(2..=max_n);
    let m = rng.gen_range(0..=density * n);
    let layout = Layout::new(1, n).unwrap();
    let clauses = (0..m)
        .map(|_| {
            let width = rng.gen_range(1..=max_width.min(n as usize));
            let mut vars: Vec<u32> = Vec::with_capacity(width);
            while vars.len() < width {
                let var = rng.gen_range(1..=n);
                if !vars.contains(&var) {
                    vars.push(var);
                }
            }
            let literals = vars
                .iter()
                .map(|&v| Literal::new(if rng.gen::<bool>() { v as i32 } else { -(v as i32) }))
                .collect();
            Clause::new(literals).unwrap()
        })
        .collect();
    Instance::new(layout, clauses).unwrap()
}
