//! Fair bit sources and exact sampling built on them.

use num_bigint::BigUint;
use num_traits::{One, Zero};
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;

use crate::stego_core::SizeExpansion;
use crate::{BigNat, Error, Result};

/// A stream of bits consumed one at a time.
pub trait BitSource {
    fn next_bit(&mut self) -> Result<bool>;

    /// Reads `count` bits MSB-first as an integer.
    fn read_uint(&mut self, count: u64) -> Result<BigNat> {
        let mut bits = Vec::with_capacity(count as usize);
        for _ in 0..count {
            bits.push(self.next_bit()?);
        }
        Ok(bits_to_uint(&bits))
    }
}

impl<B: BitSource + ?Sized> BitSource for &mut B {
    fn next_bit(&mut self) -> Result<bool> {
        (**self).next_bit()
    }
}

/// I.i.d. equiprobable bits from a ChaCha20 stream cipher generator.
///
/// A single source must not be shared between concurrent consumers.
#[derive(Debug, Clone)]
pub struct FairBitSource {
    rng: ChaCha20Rng,
    word: u64,
    left: u32,
    drawn: u64,
}

impl FairBitSource {
    /// Reproducible stream for a 64-bit seed.
    pub fn from_seed(seed: u64) -> Self {
        Self::with_rng(ChaCha20Rng::seed_from_u64(seed))
    }

    /// Stream keyed from operating-system entropy.
    pub fn from_entropy() -> Self {
        Self::with_rng(ChaCha20Rng::from_entropy())
    }

    fn with_rng(rng: ChaCha20Rng) -> Self {
        Self {
            rng,
            word: 0,
            left: 0,
            drawn: 0,
        }
    }

    /// Total bits handed out so far.
    pub fn bits_drawn(&self) -> u64 {
        self.drawn
    }

    pub fn bit(&mut self) -> bool {
        if self.left == 0 {
            self.word = self.rng.next_u64();
            self.left = 64;
        }
        self.left -= 1;
        self.drawn += 1;
        (self.word >> self.left) & 1 == 1
    }
}

impl BitSource for FairBitSource {
    fn next_bit(&mut self) -> Result<bool> {
        Ok(self.bit())
    }
}

/// A finite, predetermined bit sequence. Reading past the end fails with
/// [`Error::BitsExhausted`].
#[derive(Debug, Clone, Default)]
pub struct ScriptedBits {
    bits: Vec<bool>,
    pos: usize,
}

impl ScriptedBits {
    pub fn new(bits: Vec<bool>) -> Self {
        Self { bits, pos: 0 }
    }

    /// Parses a string of `0`/`1` characters; anything else is skipped.
    pub fn parse(s: &str) -> Self {
        Self::new(
            s.chars()
                .filter_map(|c| match c {
                    '0' => Some(false),
                    '1' => Some(true),
                    _ => None,
                })
                .collect(),
        )
    }

    pub fn consumed(&self) -> usize {
        self.pos
    }

    pub fn remaining(&self) -> usize {
        self.bits.len() - self.pos
    }
}

impl BitSource for ScriptedBits {
    fn next_bit(&mut self) -> Result<bool> {
        let b = *self.bits.get(self.pos).ok_or(Error::BitsExhausted)?;
        self.pos += 1;
        Ok(b)
    }
}

/// MSB-first bits to integer.
pub fn bits_to_uint(bits: &[bool]) -> BigNat {
    let pad = (8 - bits.len() % 8) % 8;
    let mut bytes = vec![0u8; (bits.len() + pad) / 8];
    for (i, &b) in bits.iter().enumerate() {
        if b {
            let j = i + pad;
            bytes[j / 8] |= 0x80 >> (j % 8);
        }
    }
    BigUint::from_bytes_be(&bytes)
}

/// The `width` low bits of `value`, MSB-first.
pub fn uint_to_bits(value: &BigNat, width: u64) -> Vec<bool> {
    (0..width).rev().map(|i| value.bit(i)).collect()
}

/// Uniform integer in `[0, bound)` by rejection on `ceil(log2 bound)`-bit
/// draws. `bound == 1` consumes no bits.
pub fn uniform_below<B: BitSource + ?Sized>(bound: &BigNat, source: &mut B) -> Result<BigNat> {
    assert!(!bound.is_zero(), "uniform_below needs a positive bound");
    let width = (bound - 1u32).bits();
    loop {
        let mut v = BigUint::zero();
        for _ in 0..width {
            v <<= 1;
            if source.next_bit()? {
                v += 1u32;
            }
        }
        if &v < bound {
            return Ok(v);
        }
    }
}

/// Samples `d` with `P(d = i) = alpha_i 2^i / size`.
///
/// A uniform draw over `[0, size)` is matched against consecutive chunks of
/// length `alpha_i 2^i`, taken for descending `i`.
///
/// A power-of-two size has a single chunk and consumes no bits.
pub fn sample_delta<B: BitSource + ?Sized>(expansion: &SizeExpansion, source: &mut B) -> Result<u64> {
    if expansion.is_power_of_two() {
        return Ok(expansion.m());
    }
    let u = uniform_below(expansion.size(), source)?;
    Ok(expansion.delta_for_offset(&u))
}

/// Chunk `[lo, hi)` of `[0, size)` that maps to `d = i`, or `None` if
/// `alpha_i = 0`.
pub fn delta_chunk(expansion: &SizeExpansion, i: u64) -> Option<(BigNat, BigNat)> {
    if !expansion.digit(i) {
        return None;
    }
    let lo = expansion.offset_above(i);
    let hi = &lo + (BigUint::one() << i);
    Some((lo, hi))
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::BigRational;
    use num_traits::ToPrimitive;

    fn big(v: u64) -> BigUint {
        BigUint::from(v)
    }

    #[test]
    fn bound_one_consumes_nothing() {
        let mut src = ScriptedBits::default();
        assert_eq!(uniform_below(&big(1), &mut src).unwrap(), big(0));
        assert_eq!(src.consumed(), 0);
    }

    #[test]
    fn power_of_two_reads_bits_directly() {
        let mut src = ScriptedBits::parse("101");
        assert_eq!(uniform_below(&big(8), &mut src).unwrap(), big(5));
        assert_eq!(src.consumed(), 3);
    }

    #[test]
    fn rejection_retries() {
        // 111 -> 7 rejected, 110 -> 6 rejected, 011 -> 3
        let mut src = ScriptedBits::parse("111 110 011");
        assert_eq!(uniform_below(&big(6), &mut src).unwrap(), big(3));
        assert_eq!(src.consumed(), 9);
        let mut short = ScriptedBits::parse("111");
        assert_eq!(uniform_below(&big(6), &mut short), Err(Error::BitsExhausted));
    }

    /// Probability mass per outcome over the rejection tree, truncated after
    /// `rounds` attempts.
    fn rejection_tree_masses(bound: u64, rounds: u32) -> (Vec<BigRational>, BigRational) {
        let width = 64 - (bound - 1).leading_zeros();
        let mut masses = vec![BigRational::from_integer(0.into()); bound as usize];
        let mut reach = BigRational::from_integer(1.into());
        for _ in 0..rounds {
            let per_leaf = &reach / BigRational::from_integer((1u64 << width).into());
            let mut rejected = 0u64;
            for leaf in 0..(1u64 << width) {
                // run the sampler on exactly this leaf's bits
                let bits: Vec<bool> = (0..width).rev().map(|i| (leaf >> i) & 1 == 1).collect();
                let mut src = ScriptedBits::new(bits);
                match uniform_below(&big(bound), &mut src) {
                    Ok(v) => masses[v.to_usize().unwrap()] += &per_leaf,
                    Err(Error::BitsExhausted) => rejected += 1,
                    Err(e) => panic!("{e}"),
                }
            }
            reach = &per_leaf * BigRational::from_integer(rejected.into());
        }
        (masses, reach)
    }

    #[test]
    fn bound_six_is_uniform_to_depth_thirty() {
        // 30 rejection rounds of 3 bits each
        let (masses, tail) = rejection_tree_masses(6, 30);
        let sixth = BigRational::new(1.into(), 6.into());
        let eps = BigRational::new(1.into(), (1u64 << 30).into());
        assert!(tail < eps);
        for m in masses {
            let diff = if m > sixth { &m - &sixth } else { &sixth - &m };
            assert!(diff < eps);
        }
    }

    #[test]
    fn small_bounds_uniform_within_truncation() {
        let eps = BigRational::new(1.into(), (1u64 << 50).into());
        for bound in 1..=64u64 {
            let (masses, tail) = rejection_tree_masses(bound, 50);
            assert!(tail < eps, "bound {bound}");
            let target = BigRational::new(1.into(), bound.into());
            for m in masses {
                let diff = if m > target { &m - &target } else { &target - &m };
                assert!(diff <= tail, "bound {bound}");
            }
        }
    }

    #[test]
    fn seeded_sources_are_reproducible() {
        let mut a = FairBitSource::from_seed(42);
        let mut b = FairBitSource::from_seed(42);
        let xs: Vec<bool> = (0..1000).map(|_| a.bit()).collect();
        let ys: Vec<bool> = (0..1000).map(|_| b.bit()).collect();
        assert_eq!(xs, ys);
        assert_eq!(a.bits_drawn(), 1000);
        let ones = xs.iter().filter(|&&x| x).count();
        assert!((400..600).contains(&ones));
    }

    #[test]
    fn bit_integer_conversions() {
        assert_eq!(bits_to_uint(&[]), big(0));
        assert_eq!(bits_to_uint(&[true, true]), big(3));
        assert_eq!(
            bits_to_uint(&[true, false, false, false, false, false, false, false, false]),
            big(256)
        );
        assert_eq!(uint_to_bits(&big(3), 4), vec![false, false, true, true]);
        let mut src = ScriptedBits::parse("0110");
        assert_eq!(src.read_uint(4).unwrap(), big(6));
    }

    #[test]
    fn delta_chunks_partition_the_range() {
        let e = SizeExpansion::new(big(6));
        assert_eq!(delta_chunk(&e, 2), Some((big(0), big(4))));
        assert_eq!(delta_chunk(&e, 1), Some((big(4), big(6))));
        assert_eq!(delta_chunk(&e, 0), None);
        let draws: Vec<u64> = (0..6).map(|u| e.delta_for_offset(&big(u))).collect();
        assert_eq!(draws, vec![2, 2, 2, 2, 1, 1]);
    }
}
