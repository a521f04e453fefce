//! Block stegosystems: the randomized scheme, its deterministic variant and
//! the pairwise scheme.
//!
//! Every block is replaced by a member of its own type class. In randomized
//! mode the class size `|S| = sum_i alpha_i 2^i` is split into chunks of
//! `alpha_i 2^i` consecutive indices (largest first); a chunk is picked with
//! probability proportional to its length and the next `i` secret bits,
//! read MSB-first, select the index inside it. The decoder recovers the chunk
//! from the emitted index alone.

use num_bigint::BigUint;
use num_traits::One;
use rayon::prelude::*;

use crate::enumerate_iid::{self, TypeClassIid};
use crate::enumerate_markov::{self, MarkovLimits, TypeClassMarkov};
use crate::randomness::{sample_delta, uint_to_bits, BitSource};
use crate::{BigNat, Error, Result, SymbolAlphabet, Word};

/// Binary digits of a class size.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SizeExpansion {
    size: BigNat,
    m: u64,
}

impl SizeExpansion {
    /// Panics if `size` is zero; every class contains its own block.
    pub fn new(size: BigNat) -> Self {
        assert!(size.bits() > 0, "class sizes are at least one");
        let m = size.bits() - 1;
        Self { size, m }
    }

    pub fn size(&self) -> &BigNat {
        &self.size
    }

    /// `floor(log2 size)`, the index of the leading one.
    pub fn m(&self) -> u64 {
        self.m
    }

    /// `alpha_i`.
    pub fn digit(&self, i: u64) -> bool {
        self.size.bit(i)
    }

    /// Digits from `alpha_m` down to `alpha_0`.
    pub fn alpha(&self) -> Vec<bool> {
        (0..=self.m).rev().map(|i| self.digit(i)).collect()
    }

    /// `sum_{l > d} alpha_l 2^l`: where the chunk for `d` starts.
    pub fn offset_above(&self, d: u64) -> BigNat {
        (&self.size >> (d + 1)) << (d + 1)
    }

    /// The `d` whose chunk contains `offset`: the largest `d` with
    /// `alpha_d = 1` and `offset < sum_{l >= d} alpha_l 2^l`.
    pub fn delta_for_offset(&self, offset: &BigNat) -> u64 {
        debug_assert!(offset < &self.size);
        (0..=self.m)
            .rev()
            .find(|&d| self.digit(d) && offset < &((&self.size >> d) << d))
            .expect("offset below size lies in some chunk")
    }

    pub fn is_power_of_two(&self) -> bool {
        self.size.count_ones() == 1
    }
}

/// Which type class a block is re-encoded within.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EnumeratorKind {
    /// Same letter frequencies.
    Iid,
    /// Same `(k+1)`-gram counts, same first and last `k` symbols.
    Markov { k: usize, limits: MarkovLimits },
}

impl EnumeratorKind {
    pub fn markov(k: usize) -> Self {
        if k == 0 {
            Self::Iid
        } else {
            Self::Markov {
                k,
                limits: MarkovLimits::default(),
            }
        }
    }

    pub fn order(&self) -> usize {
        match self {
            Self::Iid => 0,
            Self::Markov { k, .. } => *k,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CodecMode {
    /// Embeds a random number of bits per block, always re-encoding.
    Randomized,
    /// Embeds `m` bits when the block's rank is below `2^m`, else nothing.
    Deterministic,
}

/// A type class of either kind.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TypeClass {
    Iid(TypeClassIid),
    Markov(TypeClassMarkov),
}

impl TypeClass {
    pub fn of(word: &[usize], kind: &EnumeratorKind) -> Result<Self> {
        Ok(match kind {
            EnumeratorKind::Iid => Self::Iid(TypeClassIid::of(word)),
            EnumeratorKind::Markov { k, limits } => Self::Markov(TypeClassMarkov::with_limits(word, *k, limits)?),
        })
    }

    pub fn size(&self) -> BigNat {
        match self {
            Self::Iid(c) => c.size(),
            Self::Markov(c) => c.count(),
        }
    }

    pub fn rank(&self, word: &[usize]) -> Result<BigNat> {
        match self {
            Self::Iid(c) => enumerate_iid::rank(word, c),
            Self::Markov(c) => enumerate_markov::markov_rank(word, c),
        }
    }

    pub fn unrank(&self, index: &BigNat) -> Result<Word> {
        match self {
            Self::Iid(c) => enumerate_iid::unrank(c, index),
            Self::Markov(c) => enumerate_markov::markov_unrank(c, index),
        }
    }

    pub fn contains(&self, word: &[usize]) -> bool {
        match self {
            Self::Iid(c) => &TypeClassIid::of(word) == c,
            Self::Markov(c) => c.contains(word),
        }
    }

    /// All members in rank order. Only sensible for small classes.
    pub fn members(&self) -> Result<Vec<Word>> {
        let size = self.size();
        let mut out = Vec::new();
        let mut i = BigUint::default();
        while i < size {
            out.push(self.unrank(&i)?);
            i += 1u32;
        }
        Ok(out)
    }
}

/// Public protocol parameters of a block stegosystem.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockCodec<S> {
    alphabet: SymbolAlphabet<S>,
    n: usize,
    enumerator: EnumeratorKind,
    mode: CodecMode,
}

/// Outcome of encoding one block.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockEncoding {
    pub word: Word,
    pub bits_consumed: u64,
}

/// Outcome of encoding a cover stream.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StreamEncoding<S> {
    pub stego: Vec<S>,
    pub bits_consumed: u64,
    pub blocks: usize,
}

impl<S: Ord + Clone> BlockCodec<S> {
    pub fn new(alphabet: SymbolAlphabet<S>, n: usize, enumerator: EnumeratorKind, mode: CodecMode) -> Result<Self> {
        match enumerator {
            EnumeratorKind::Iid if n <= 1 => {
                return Err(Error::InvalidCodec(format!("block length must exceed 1, got {n}")))
            }
            EnumeratorKind::Markov { k, .. } if n <= 2 * k => return Err(Error::BlockTooShort { n, k }),
            _ => {}
        }
        Ok(Self {
            alphabet,
            n,
            enumerator,
            mode,
        })
    }

    pub fn alphabet(&self) -> &SymbolAlphabet<S> {
        &self.alphabet
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn enumerator(&self) -> &EnumeratorKind {
        &self.enumerator
    }

    pub fn mode(&self) -> CodecMode {
        self.mode
    }

    fn check_len(&self, len: usize) -> Result<()> {
        if len != self.n {
            return Err(Error::WrongBlockLength {
                expected: self.n,
                actual: len,
            });
        }
        Ok(())
    }

    pub fn class_of(&self, word: &[usize]) -> Result<TypeClass> {
        TypeClass::of(word, &self.enumerator)
    }

    /// Encodes one block of symbol indices.
    pub fn encode_word<B, R>(&self, u: &[usize], secret: &mut B, rand: &mut R) -> Result<BlockEncoding>
    where
        B: BitSource + ?Sized,
        R: BitSource + ?Sized,
    {
        self.check_len(u.len())?;
        let class = self.class_of(u)?;
        let expansion = SizeExpansion::new(class.size());
        match self.mode {
            CodecMode::Randomized => {
                let d = sample_delta(&expansion, rand)?;
                emit_with_delta(&class, &expansion, d, secret)
            }
            CodecMode::Deterministic => emit_deterministic(&class, &expansion, u, secret),
        }
    }

    /// Randomized encoding with `d` supplied by the caller instead of
    /// sampled. `d` must index a one digit of the class size.
    pub fn encode_word_with_delta<B: BitSource + ?Sized>(
        &self,
        u: &[usize],
        d: u64,
        secret: &mut B,
    ) -> Result<BlockEncoding> {
        self.check_len(u.len())?;
        let class = self.class_of(u)?;
        let expansion = SizeExpansion::new(class.size());
        emit_with_delta(&class, &expansion, d, secret)
    }

    /// Recovers the bits carried by one block.
    pub fn decode_word(&self, v: &[usize]) -> Result<Vec<bool>> {
        self.check_len(v.len())?;
        let class = self.class_of(v)?;
        let expansion = SizeExpansion::new(class.size());
        let tau = class.rank(v)?;
        Ok(match self.mode {
            CodecMode::Randomized => {
                let d = expansion.delta_for_offset(&tau);
                let r = tau - expansion.offset_above(d);
                uint_to_bits(&r, d)
            }
            CodecMode::Deterministic => {
                let m = expansion.m();
                if tau < (BigUint::one() << m) {
                    uint_to_bits(&tau, m)
                } else {
                    Vec::new()
                }
            }
        })
    }

    pub fn encode_block<B, R>(&self, u: &[S], secret: &mut B, rand: &mut R) -> Result<(Vec<S>, u64)>
    where
        B: BitSource + ?Sized,
        R: BitSource + ?Sized,
    {
        let word = self.alphabet.to_word(u)?;
        let enc = self.encode_word(&word, secret, rand)?;
        Ok((self.alphabet.to_block(&enc.word), enc.bits_consumed))
    }

    pub fn decode_block(&self, v: &[S]) -> Result<Vec<bool>> {
        self.decode_word(&self.alphabet.to_word(v)?)
    }

    /// Encodes whole blocks in order; a trailing partial block is copied
    /// through and carries nothing.
    pub fn encode_stream<B, R>(&self, cover: &[S], secret: &mut B, rand: &mut R) -> Result<StreamEncoding<S>>
    where
        B: BitSource + ?Sized,
        R: BitSource + ?Sized,
    {
        let mut stego = Vec::with_capacity(cover.len());
        let mut bits = 0;
        let mut blocks = 0;
        let mut chunks = cover.chunks_exact(self.n);
        for block in &mut chunks {
            let (out, used) = self.encode_block(block, secret, rand)?;
            stego.extend(out);
            bits += used;
            blocks += 1;
        }
        stego.extend_from_slice(chunks.remainder());
        Ok(StreamEncoding {
            stego,
            bits_consumed: bits,
            blocks,
        })
    }
}

impl<S: Ord + Clone + Send + Sync> BlockCodec<S> {
    /// Concatenated bits of every whole block. Blocks decode independently
    /// and in parallel; a trailing partial block is ignored.
    pub fn decode_stream(&self, stego: &[S]) -> Result<Vec<bool>> {
        let parts: Vec<Vec<bool>> = stego
            .par_chunks_exact(self.n)
            .map(|block| self.decode_block(block))
            .collect::<Result<_>>()?;
        Ok(parts.concat())
    }
}

fn emit_with_delta<B: BitSource + ?Sized>(
    class: &TypeClass,
    expansion: &SizeExpansion,
    d: u64,
    secret: &mut B,
) -> Result<BlockEncoding> {
    if d > expansion.m() || !expansion.digit(d) {
        return Err(Error::InvalidDelta { d });
    }
    let r = secret.read_uint(d)?;
    let tau = expansion.offset_above(d) + r;
    Ok(BlockEncoding {
        word: class.unrank(&tau)?,
        bits_consumed: d,
    })
}

fn emit_deterministic<B: BitSource + ?Sized>(
    class: &TypeClass,
    expansion: &SizeExpansion,
    u: &[usize],
    secret: &mut B,
) -> Result<BlockEncoding> {
    let m = expansion.m();
    if class.rank(u)? >= (BigUint::one() << m) {
        return Ok(BlockEncoding {
            word: u.to_vec(),
            bits_consumed: 0,
        });
    }
    let r = secret.read_uint(m)?;
    Ok(BlockEncoding {
        word: class.unrank(&r)?,
        bits_consumed: m,
    })
}

/// Pairwise scheme: each pair of distinct symbols carries one bit, ascending
/// for 0 and descending for 1. Equal pairs and an odd trailing symbol pass
/// through unchanged.
pub fn pairwise_encode<T, B>(cover: &[T], secret: &mut B) -> Result<(Vec<T>, u64)>
where
    T: Ord + Clone,
    B: BitSource + ?Sized,
{
    let mut out = Vec::with_capacity(cover.len());
    let mut bits = 0;
    let mut pairs = cover.chunks_exact(2);
    for pair in &mut pairs {
        let (x, y) = (&pair[0], &pair[1]);
        if x == y {
            out.extend_from_slice(pair);
            continue;
        }
        let (lo, hi) = if x < y { (x, y) } else { (y, x) };
        if secret.next_bit()? {
            out.push(hi.clone());
            out.push(lo.clone());
        } else {
            out.push(lo.clone());
            out.push(hi.clone());
        }
        bits += 1;
    }
    out.extend_from_slice(pairs.remainder());
    Ok((out, bits))
}

pub fn pairwise_decode<T: Ord>(stego: &[T]) -> Vec<bool> {
    stego
        .chunks_exact(2)
        .filter(|p| p[0] != p[1])
        .map(|p| p[0] > p[1])
        .collect()
}

/// Either a block codec or the pairwise scheme, behind one stream interface.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Scheme<S> {
    Block(BlockCodec<S>),
    /// Pairwise scheme under the alphabet's order.
    Pairwise(SymbolAlphabet<S>),
}

impl<S: Ord + Clone + Send + Sync> Scheme<S> {
    pub fn alphabet(&self) -> &SymbolAlphabet<S> {
        match self {
            Self::Block(c) => c.alphabet(),
            Self::Pairwise(a) => a,
        }
    }

    pub fn encode_stream<B, R>(&self, cover: &[S], secret: &mut B, rand: &mut R) -> Result<StreamEncoding<S>>
    where
        B: BitSource + ?Sized,
        R: BitSource + ?Sized,
    {
        match self {
            Self::Block(c) => c.encode_stream(cover, secret, rand),
            Self::Pairwise(a) => {
                let word = a.to_word(cover)?;
                let (out, bits) = pairwise_encode(&word, secret)?;
                Ok(StreamEncoding {
                    stego: a.to_block(&out),
                    bits_consumed: bits,
                    blocks: cover.len() / 2,
                })
            }
        }
    }

    pub fn decode_stream(&self, stego: &[S]) -> Result<Vec<bool>> {
        match self {
            Self::Block(c) => c.decode_stream(stego),
            Self::Pairwise(a) => Ok(pairwise_decode(&a.to_word(stego)?)),
        }
    }
}

/// Bits as a `0`/`1` string.
pub fn bit_string(bits: &[bool]) -> String {
    bits.iter().map(|&b| if b { '1' } else { '0' }).collect()
}
