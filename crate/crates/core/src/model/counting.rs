//! Exact size of the clause space for one layout and clause type.

use num_bigint::BigUint;
use num_traits::{One, Zero};

use super::{ClauseType, Layout, ModelError};

/// Number of distinct clauses of type `ty` under `layout`.
///
/// A clause of type `(k_1, ..., k_l)` is determined by an unordered
/// choice of `l` distinct communities with one entry assigned to each,
/// a `k_j`-subset of the chosen community for each entry, and a sign
/// for every selected variable:
///
/// ```text
/// B (B-1) ... (B-l+1)
/// ------------------- * prod_j C(h, k_j) * 2^(k_1 + ... + k_l)
///   prod_e mult(e)!
/// ```
///
/// The falling factorial counts ordered community choices; assignments
/// that permute equal entries describe the same clause set, so it is
/// divided by the factorials of the entry multiplicities.
///
/// Counts overflow machine integers at unremarkable sizes (a `(5)`
/// clause over one community of 100 already has ~2.4e9 realizations),
/// hence the big-integer result.
pub fn sample_space_size(layout: &Layout, ty: &ClauseType) -> Result<BigUint, ModelError> {
    if !ty.is_well_formed() {
        return Err(ModelError::NonMonotoneType { ty: ty.clone() });
    }
    let b = layout.communities();
    let h = layout.community_size();
    let l = ty.community_count() as u32;
    if l > b {
        return Err(ModelError::TypeTooLong {
            ty: ty.clone(),
            communities: b,
        });
    }
    if ty.entries()[0] > h {
        return Err(ModelError::EntryTooLarge {
            entry: ty.entries()[0],
            community_size: h,
        });
    }

    let mut ordered = BigUint::one();
    for i in 0..l {
        ordered *= BigUint::from(b - i);
    }
    // Entries are sorted, so equal values form runs.
    let mut repeats = BigUint::one();
    let mut run = 0u32;
    let mut prev = 0u32;
    for &k in ty.entries() {
        if k == prev {
            run += 1;
            repeats *= BigUint::from(run);
        } else {
            prev = k;
            run = 1;
        }
    }
    let mut count = ordered / repeats;
    for &k in ty.entries() {
        count *= binomial(h, k);
    }
    count <<= ty.width();
    Ok(count)
}

/// C(n, k) as a big integer, zero when `k > n`.
fn binomial(n: u32, k: u32) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    let k = k.min(n - k);
    let mut num = BigUint::one();
    let mut den = BigUint::one();
    for i in 0..k {
        num *= BigUint::from(n - i);
        den *= BigUint::from(i + 1);
    }
    num / den
}
