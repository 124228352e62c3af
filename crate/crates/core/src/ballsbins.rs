//! Balls-and-bins simulation plus the exact factorial moments of the
//! bin-occupancy statistic, used to validate the Poisson limit of the
//! number of bins holding exactly `s` balls.

use std::collections::HashMap;

use num_bigint::BigInt;
use num_integer::binomial;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use rand::Rng;
use thiserror::Error;

/// Bin counts stay in a flat vector up to this many bins; past it only a
/// map of occupied bins is kept, since every consumer reads the histogram.
const DENSE_BIN_LIMIT: u64 = 10_000_000;

/// Exact rational arithmetic is used while the denominator B^M stays
/// under this many bits; beyond it the moment is computed in log space.
const EXACT_BIT_LIMIT: f64 = 4096.0;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BallsError {
    #[error("cannot throw balls into zero bins")]
    ZeroBins,
    #[error("infeasible parameters: {0}")]
    InfeasibleParameters(&'static str),
}

/// Result of throwing M balls uniformly into B bins.
#[derive(Debug)]
pub struct Occupancy {
    bins: u64,
    balls: u64,
    store: Store,
}

#[derive(Debug)]
enum Store {
    Dense(Vec<u32>),
    Sparse(HashMap<u64, u32>),
}

impl Occupancy {
    /// Wraps explicit per-bin counts, mainly for tests and small cases.
    pub fn from_counts(counts: Vec<u32>) -> Occupancy {
        Occupancy {
            bins: counts.len() as u64,
            balls: counts.iter().map(|&c| u64::from(c)).sum(),
            store: Store::Dense(counts),
        }
    }

    pub fn bin_count(&self) -> u64 {
        self.bins
    }

    pub fn ball_count(&self) -> u64 {
        self.balls
    }

    /// Largest number of balls in any single bin.
    pub fn max_load(&self) -> u32 {
        match &self.store {
            Store::Dense(counts) => counts.iter().copied().max().unwrap_or(0),
            Store::Sparse(map) => map.values().copied().max().unwrap_or(0),
        }
    }

    /// The statistic X_B: how many bins hold exactly `s` balls.
    pub fn count_bins_with_exactly(&self, s: u32) -> u64 {
        match &self.store {
            Store::Dense(counts) => counts.iter().filter(|&&c| c == s).count() as u64,
            Store::Sparse(map) => {
                let occupied = map.values().filter(|&&c| c == s).count() as u64;
                if s == 0 {
                    self.bins - map.len() as u64
                } else {
                    occupied
                }
            }
        }
    }
}

/// Throws `balls` balls independently and uniformly into `bins` bins.
pub fn throw(balls: u64, bins: u64, rng: &mut impl Rng) -> Result<Occupancy, BallsError> {
    if bins == 0 {
        return Err(BallsError::ZeroBins);
    }
    if balls > u64::from(u32::MAX) {
        return Err(BallsError::InfeasibleParameters("ball count exceeds counter width"));
    }
    let store = if bins <= DENSE_BIN_LIMIT {
        let mut counts = vec![0u32; bins as usize];
        for _ in 0..balls {
            counts[rng.gen_range(0..bins) as usize] += 1;
        }
        Store::Dense(counts)
    } else {
        let mut map = HashMap::new();
        for _ in 0..balls {
            *map.entry(rng.gen_range(0..bins)).or_insert(0u32) += 1;
        }
        Store::Sparse(map)
    };
    Ok(Occupancy { bins, balls, store })
}

/// The t-th factorial binomial moment E[C(X_B, t)] of the number X_B of
/// bins holding exactly `s` of the `balls` balls:
///
/// ```text
/// C(B,t) C(M,s) C(M-s,s) ... C(M-(t-1)s,s) (B-t)^(M-ts) / B^M
/// ```
///
/// Evaluated as an exact rational while B^M is small enough, otherwise in
/// log space with relative error below 1e-10. When ts > M the event is
/// impossible and the moment is exactly zero.
pub fn exact_binomial_moment(bins: u64, balls: u64, s: u32, t: u32) -> Result<MomentValue, BallsError> {
    if bins == 0 {
        return Err(BallsError::ZeroBins);
    }
    if u64::from(t) > bins {
        return Err(BallsError::InfeasibleParameters("more tagged bins than bins"));
    }
    if u64::from(t) * u64::from(s) > balls {
        return Ok(MomentValue::Exact(BigRational::zero()));
    }
    let bits = balls as f64 * (bins.max(2) as f64).log2();
    if bits <= EXACT_BIT_LIMIT {
        Ok(MomentValue::Exact(moment_exact(bins, balls, s, t)))
    } else {
        Ok(MomentValue::Logspace(moment_logspace(bins, balls, s, t)))
    }
}

/// E[C(X_B, t)] as either an exact rational or a log-space float,
/// depending on parameter size.
#[derive(Debug, Clone, PartialEq)]
pub enum MomentValue {
    Exact(BigRational),
    Logspace(f64),
}

impl MomentValue {
    pub fn to_f64(&self) -> f64 {
        match self {
            MomentValue::Exact(q) => rational_to_f64(q),
            MomentValue::Logspace(x) => *x,
        }
    }

    pub fn exact(&self) -> Option<&BigRational> {
        match self {
            MomentValue::Exact(q) => Some(q),
            MomentValue::Logspace(_) => None,
        }
    }
}

/// Poisson parameter λ = C^s / s! of the limit law of X_B in the critical
/// regime M = C·B^(1-1/s).
pub fn poisson_limit_param(c: f64, s: u32) -> f64 {
    let mut factorial = 1.0f64;
    for i in 2..=u64::from(s) {
        factorial *= i as f64;
    }
    c.powi(s as i32) / factorial
}

fn moment_exact(bins: u64, balls: u64, s: u32, t: u32) -> BigRational {
    let b = BigInt::from(bins);
    let m = BigInt::from(balls);
    let mut numerator = binomial(b.clone(), BigInt::from(t));
    for r in 0..u64::from(t) {
        numerator *= binomial(&m - BigInt::from(r * u64::from(s)), BigInt::from(s));
    }
    let spare = balls - u64::from(t) * u64::from(s);
    numerator *= BigInt::from(bins - u64::from(t)).pow(spare as u32);
    BigRational::new(numerator, b.pow(balls as u32))
}

fn moment_logspace(bins: u64, balls: u64, s: u32, t: u32) -> f64 {
    let spare = balls - u64::from(t) * u64::from(s);
    if bins == u64::from(t) {
        // (B-t)^spare collapses to 0^spare
        return if spare > 0 { 0.0 } else { ln_binomial(bins, u64::from(t)).exp() };
    }
    let mut log = ln_binomial(bins, u64::from(t));
    for r in 0..u64::from(t) {
        log += ln_binomial(balls - r * u64::from(s), u64::from(s));
    }
    // (B-t)^(M-ts) / B^M, rearranged so the huge exponent multiplies the
    // tiny log1p term instead of the difference of two large logs
    log += balls as f64 * (-(t as f64) / (bins as f64)).ln_1p();
    log -= (u64::from(t) * u64::from(s)) as f64 * ((bins - u64::from(t)) as f64).ln();
    log.exp()
}

fn ln_binomial(n: u64, k: u64) -> f64 {
    debug_assert!(k <= n);
    let k = k.min(n - k);
    let mut log = 0.0f64;
    for i in 0..k {
        log += ((n - i) as f64).ln() - ((i + 1) as f64).ln();
    }
    log
}

/// Converting sides that are individually outside f64 range would lose a
/// tame quotient, so each side is shifted into range first and the net
/// power of two restored at the end.
fn rational_to_f64(q: &BigRational) -> f64 {
    if q.is_zero() {
        return 0.0;
    }
    let numer_shift = (q.numer().abs().bits() as i64 - 900).max(0);
    let denom_shift = (q.denom().bits() as i64 - 900).max(0);
    let n = (q.numer() >> numer_shift).to_f64().unwrap_or(0.0);
    let d = (q.denom() >> denom_shift).to_f64().unwrap_or(f64::MAX);
    (n / d) * 2f64.powi((numer_shift - denom_shift).clamp(-3000, 3000) as i32)
}
