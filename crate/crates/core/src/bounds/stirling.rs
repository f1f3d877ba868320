//! Stirling numbers of the second kind in exact integer arithmetic.

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub const MAX_STIRLING_K: u32 = 64;

/// Row `[S(k, 0), …, S(k, k)]` from `S(k,l) = l·S(k−1,l) + S(k−1,l−1)`.
pub fn stirling_row(k: u32) -> Result<Vec<BigUint>> {
    if k > MAX_STIRLING_K {
        return Err(Error::OutOfRange(format!("Stirling numbers supported for k ≤ {MAX_STIRLING_K}, got {k}")));
    }
    let mut row = vec![BigUint::one()];
    for n in 1..=k as usize {
        let mut next = vec![BigUint::zero(); n + 1];
        for l in 1..=n {
            let carried = if l < n { &row[l] * BigUint::from(l) } else { BigUint::zero() };
            next[l] = carried + &row[l - 1];
        }
        row = next;
    }
    Ok(row)
}

/// `S(k, l)`: partitions of a k-set into l non-empty blocks.
pub fn stirling2(k: u32, l: u32) -> Result<BigUint> {
    if l > k {
        return Err(Error::OutOfRange(format!("S({k}, {l}) needs l ≤ k")));
    }
    Ok(stirling_row(k)?.swap_remove(l as usize))
}

/// `ln S(k, l)`, `-inf` where the number is zero.
pub fn ln_stirling2(k: u32, l: u32) -> Result<f64> {
    let s = stirling2(k, l)?;
    Ok(ln_big(&s))
}

/// Bell number `B(k) = Σ_l S(k, l)`.
pub fn bell(k: u32) -> Result<BigUint> {
    Ok(stirling_row(k)?.into_iter().sum())
}

pub(crate) fn ln_big(v: &BigUint) -> f64 {
    if v.is_zero() {
        return f64::NEG_INFINITY;
    }
    // Every value reachable for k ≤ 64 is far below f64::MAX.
    v.to_f64().expect("finite for supported k").ln()
}
