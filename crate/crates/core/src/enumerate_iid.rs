//! Lexicographic rank/unrank inside the letter-frequency type class.
//!
//! For a word `u` with remaining letter counts `c` and `r` letters left, the
//! number of completions after emitting letter `a` is `M * c[a] / r`, where
//! `M` is the multinomial of the remaining counts. Summing over all letters
//! below `u_k` collapses into a single term `M * below / r`, so each position
//! costs one multiply/divide for the rank term and one for the update of `M`.

use num_bigint::BigUint;
use num_traits::{ToPrimitive, Zero};

use crate::bigcomb::{binomial_next, multinomial, multinomial_next, scale_exact, BinomialStep};
use crate::{BigNat, Error, Result, SymbolAlphabet, Word};

/// Letter-frequency vector of a block. Only letters that occur are stored,
/// sorted by symbol index.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TypeClassIid {
    counts: Vec<(usize, u64)>,
    n: u64,
}

impl TypeClassIid {
    pub fn of(word: &[usize]) -> Self {
        let mut sorted = word.to_vec();
        sorted.sort_unstable();
        let mut counts: Vec<(usize, u64)> = Vec::new();
        for s in sorted {
            match counts.last_mut() {
                Some((last, c)) if *last == s => *c += 1,
                _ => counts.push((s, 1)),
            }
        }
        Self {
            counts,
            n: word.len() as u64,
        }
    }

    /// Class from a dense frequency vector indexed by symbol.
    pub fn from_freqs(freqs: &[u64]) -> Self {
        let counts: Vec<(usize, u64)> = freqs
            .iter()
            .enumerate()
            .filter(|(_, &c)| c > 0)
            .map(|(s, &c)| (s, c))
            .collect();
        let n = counts.iter().map(|&(_, c)| c).sum();
        Self { counts, n }
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn count(&self, symbol: usize) -> u64 {
        self.counts
            .binary_search_by_key(&symbol, |&(s, _)| s)
            .map_or(0, |i| self.counts[i].1)
    }

    /// `(symbol, count)` for the letters that occur.
    pub fn counts(&self) -> &[(usize, u64)] {
        &self.counts
    }

    /// Dense frequency vector over an alphabet of `alphabet_len` symbols.
    pub fn freqs(&self, alphabet_len: usize) -> Vec<u64> {
        let mut out = vec![0; alphabet_len];
        for &(s, c) in &self.counts {
            out[s] = c;
        }
        out
    }

    pub fn size(&self) -> BigNat {
        let counts: Vec<u64> = self.counts.iter().map(|&(_, c)| c).collect();
        multinomial(self.n, &counts).expect("class counts sum to n by construction")
    }

    /// The lexicographically smallest member.
    pub fn sorted_word(&self) -> Word {
        self.counts
            .iter()
            .flat_map(|&(s, c)| std::iter::repeat_n(s, c as usize))
            .collect()
    }

    fn slot(&self, symbol: usize) -> Option<usize> {
        self.counts.binary_search_by_key(&symbol, |&(s, _)| s).ok()
    }
}

/// Frequency class of a block over an explicit alphabet.
pub fn class_of<S: Ord + Clone>(block: &[S], alphabet: &SymbolAlphabet<S>) -> Result<TypeClassIid> {
    Ok(TypeClassIid::of(&alphabet.to_word(block)?))
}

pub fn class_size(class: &TypeClassIid) -> BigNat {
    class.size()
}

/// 0-based lexicographic index of `word` within `class`.
pub fn rank(word: &[usize], class: &TypeClassIid) -> Result<BigNat> {
    rank_with_size(word, class, class.size())
}

pub(crate) fn rank_with_size(word: &[usize], class: &TypeClassIid, size: BigNat) -> Result<BigNat> {
    if word.len() as u64 != class.n {
        return Err(Error::NotInClass);
    }
    let mut remaining = Fenwick::new(class.counts.iter().map(|&(_, c)| c));
    let mut left = class.n;
    let mut classes = size;
    let mut acc = BigUint::zero();
    for &s in word {
        let slot = class.slot(s).ok_or(Error::NotInClass)?;
        let here = remaining.get(slot);
        if here == 0 {
            return Err(Error::NotInClass);
        }
        let below = remaining.prefix(slot);
        if below > 0 {
            acc += scale_exact(&classes, below, left).ok_or(Error::NotInClass)?;
        }
        classes = multinomial_next(&classes, left, here)?;
        remaining.sub(slot, 1);
        left -= 1;
    }
    Ok(acc)
}

/// The member of `class` whose rank is `index`.
pub fn unrank(class: &TypeClassIid, index: &BigNat) -> Result<Word> {
    unrank_with_size(class, index, class.size())
}

pub(crate) fn unrank_with_size(class: &TypeClassIid, index: &BigNat, size: BigNat) -> Result<Word> {
    if index >= &size {
        return Err(Error::IndexOutOfRange { size: size.to_string() });
    }
    let mut remaining = Fenwick::new(class.counts.iter().map(|&(_, c)| c));
    let mut left = class.n;
    let mut classes = size;
    let mut idx = index.clone();
    let mut out = Vec::with_capacity(class.n as usize);
    while left > 0 {
        // Letters below the chosen one cover floor(idx * left / classes) slots.
        let target = (&idx * left / &classes)
            .to_u64()
            .expect("quotient is below the remaining length");
        let slot = remaining.search(target);
        let below = remaining.prefix(slot);
        if below > 0 {
            idx -= scale_exact(&classes, below, left).expect("integral class count");
        }
        let here = remaining.get(slot);
        classes = multinomial_next(&classes, left, here)?;
        remaining.sub(slot, 1);
        left -= 1;
        out.push(class.counts[slot].0);
    }
    Ok(out)
}

/// Binary lexicographic rank, computed term-by-term with the step-by-step
/// binomial identities: `sum_k x_k * C(n - k, w - ones_before_k)`.
pub fn binary_rank(bits: &[bool]) -> BigNat {
    let n = bits.len() as u64;
    let weight = bits.iter().filter(|&&b| b).count() as u64;
    let mut t = n;
    let mut w = weight;
    // invariant: current == C(t, w)
    let mut current = crate::bigcomb::binomial(t, w);
    let mut acc = BigUint::zero();
    for &bit in bits {
        let keep = binomial_next(&current, t, w, BinomialStep::DecTKeepM).expect("current tracks C(t, w)");
        if bit {
            acc += &keep;
            current = binomial_next(&current, t, w, BinomialStep::DecTDecM).expect("current tracks C(t, w)");
            w -= 1;
        } else {
            current = keep;
        }
        t -= 1;
    }
    acc
}

/// Binary indexed tree over per-slot remaining counts.
struct Fenwick {
    tree: Vec<u64>,
    raw: Vec<u64>,
}

impl Fenwick {
    fn new(values: impl Iterator<Item = u64>) -> Self {
        let raw: Vec<u64> = values.collect();
        let mut tree = vec![0; raw.len() + 1];
        for (i, &v) in raw.iter().enumerate() {
            let mut j = i + 1;
            while j < tree.len() {
                tree[j] += v;
                j += j & j.wrapping_neg();
            }
        }
        Self { tree, raw }
    }

    fn get(&self, slot: usize) -> u64 {
        self.raw[slot]
    }

    /// Sum of slots `0..slot`.
    fn prefix(&self, slot: usize) -> u64 {
        let mut j = slot;
        let mut s = 0;
        while j > 0 {
            s += self.tree[j];
            j &= j - 1;
        }
        s
    }

    fn sub(&mut self, slot: usize, v: u64) {
        self.raw[slot] -= v;
        let mut j = slot + 1;
        while j < self.tree.len() {
            self.tree[j] -= v;
            j += j & j.wrapping_neg();
        }
    }

    /// Slot `i` with `prefix(i) <= target < prefix(i + 1)`.
    fn search(&self, mut target: u64) -> usize {
        let mut pos = 0;
        let mut step = self.tree.len().next_power_of_two();
        while step > 0 {
            let next = pos + step;
            if next < self.tree.len() && self.tree[next] <= target {
                pos = next;
                target -= self.tree[next];
            }
            step >>= 1;
        }
        pos
    }
}
