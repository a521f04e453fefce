//! Exact combinatorial arithmetic on arbitrary-precision naturals.
//!
//! Everything here is integer-only. The incremental steps divide exactly or
//! fail loudly; an inexact division always means the caller passed a value
//! that is not the binomial (or multinomial) it claimed to be.

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, Zero};

use crate::{BigNat, Error, Result};

/// Which neighbor of `C(t, m)` to move to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinomialStep {
    /// `C(t, m) -> C(t-1, m-1)`
    DecTDecM,
    /// `C(t, m) -> C(t-1, m)`
    DecTKeepM,
}

/// `C(t, m)`, zero when `t < m`.
pub fn binomial(t: u64, m: u64) -> BigNat {
    if m > t {
        return BigUint::zero();
    }
    let m = m.min(t - m);
    let mut acc = BigUint::one();
    for i in 1..=m {
        // acc == C(t - m + i - 1, i - 1) here, so the division is exact.
        acc *= t - m + i;
        acc /= i;
    }
    acc
}

/// `n! / prod(counts[i]!)`.
pub fn multinomial(n: u64, counts: &[u64]) -> Result<BigNat> {
    let total: u64 = counts.iter().sum();
    if total != n {
        return Err(Error::CountMismatch {
            expected: n,
            actual: total,
        });
    }
    let mut acc = BigUint::one();
    let mut placed = 0u64;
    for &c in counts {
        for i in 1..=c {
            placed += 1;
            acc *= placed;
            acc /= i;
        }
    }
    Ok(acc)
}

/// Multiply by `numerator` and divide by `denominator`, requiring the
/// division to be exact.
pub(crate) fn scale_exact(current: &BigNat, numerator: u64, denominator: u64) -> Option<BigNat> {
    if denominator == 0 {
        return None;
    }
    let (q, r) = (current * numerator).div_rem(&BigUint::from(denominator));
    r.is_zero().then_some(q)
}

/// Size of the multiset class after one occurrence of a symbol with
/// `symbol_count` remaining copies is removed from a word of `remaining`
/// symbols: `M * symbol_count / remaining`.
pub fn multinomial_next(current: &BigNat, remaining: u64, symbol_count: u64) -> Result<BigNat> {
    if symbol_count > remaining || remaining == 0 {
        return Err(Error::UndefinedStep {
            t: remaining,
            m: symbol_count,
        });
    }
    scale_exact(current, symbol_count, remaining).ok_or(Error::InexactDivision {
        t: remaining,
        m: symbol_count,
    })
}

/// Given `current == C(t, m)`, returns the requested neighbor using one
/// multiplication and one exact division.
pub fn binomial_next(current: &BigNat, t: u64, m: u64, step: BinomialStep) -> Result<BigNat> {
    if t == 0 {
        return Err(Error::UndefinedStep { t, m });
    }
    match step {
        BinomialStep::DecTDecM => {
            if m == 0 {
                return Err(Error::UndefinedStep { t, m });
            }
            if m > t {
                // C(t, m) = 0 and C(t-1, m-1) = 0 as well.
                return if current.is_zero() {
                    Ok(BigUint::zero())
                } else {
                    Err(Error::InexactDivision { t, m })
                };
            }
            multinomial_next(current, t, m)
        }
        BinomialStep::DecTKeepM => {
            if m > t {
                return if current.is_zero() {
                    Ok(BigUint::zero())
                } else {
                    Err(Error::InexactDivision { t, m })
                };
            }
            multinomial_next(current, t, t - m)
        }
    }
}
