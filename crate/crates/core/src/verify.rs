//! Exhaustive security oracles, exact rate computations, capacity
//! simulation and entropy estimators.
//!
//! Oracle arithmetic is exact: an encoder is perfectly secure on a class iff
//! its output distribution, for an input drawn uniformly from the class, is
//! exactly uniform on the class. Floating point only appears in the entropy
//! estimators, the capacity simulation and the chi-square p-value.

use std::collections::{BTreeMap, HashMap};
use std::ops::Add;

use num_bigint::{BigInt, BigUint};
use num_traits::{Float, One, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::randomness::{BitSource, FairBitSource, ScriptedBits};
use crate::secret_stream::frame;
use crate::stego_core::{BlockCodec, BlockEncoding, CodecMode, EnumeratorKind, SizeExpansion, TypeClass};
use crate::{BigNat, Error, ExactDistribution, Rational, Result, SymbolAlphabet, Word};

/// Largest class the exhaustive oracle accepts.
pub const MAX_ORACLE_SUPPORT: u64 = 10_000;

/// Probability masses over blocks, generic over the mass type.
#[derive(Debug, Clone, PartialEq)]
pub struct Distribution<P> {
    mass: BTreeMap<Word, P>,
}

impl<P> Default for Distribution<P> {
    fn default() -> Self {
        Self { mass: BTreeMap::new() }
    }
}

impl<P: Clone + Zero + Add<Output = P>> Distribution<P> {
    pub fn add_mass(&mut self, word: Word, p: P) {
        let slot = self.mass.entry(word).or_insert_with(P::zero);
        *slot = slot.clone() + p;
    }

    pub fn mass(&self, word: &[usize]) -> P {
        self.mass.get(word).cloned().unwrap_or_else(P::zero)
    }

    /// Words with an entry, in lexicographic order.
    pub fn support(&self) -> Vec<&Word> {
        self.mass.keys().collect()
    }

    pub fn total(&self) -> P {
        self.mass.values().cloned().fold(P::zero(), |a, b| a + b)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Word, &P)> {
        self.mass.iter()
    }
}

impl<P: Clone + Zero + One + Add<Output = P> + PartialEq> Distribution<P> {
    /// Exactly uniform on `members`: support equals `members`, masses are
    /// all equal and sum to one.
    pub fn is_uniform_on(&self, members: &[Word]) -> bool {
        if self.mass.len() != members.len() || members.iter().any(|w| !self.mass.contains_key(w)) {
            return false;
        }
        let mut masses = self.mass.values();
        let Some(first) = masses.next() else {
            return false;
        };
        masses.all(|m| m == first) && self.total() == P::one()
    }
}

impl Distribution<f64> {
    /// Relative frequencies of `samples`.
    pub fn empirical(samples: &[Word]) -> Self {
        let mut d = Self::default();
        let w = 1.0 / samples.len() as f64;
        for s in samples {
            d.add_mass(s.clone(), w);
        }
        d
    }
}

/// An encoder whose randomness the oracle can enumerate: `delta` is the
/// chunk choice in randomized mode, `None` in deterministic mode.
pub trait OracleEmbedder {
    fn mode(&self) -> CodecMode;
    fn class_of(&self, word: &[usize]) -> Result<TypeClass>;
    fn embed(&self, u: &[usize], delta: Option<u64>, secret: &mut dyn BitSource) -> Result<Word>;
}

impl<S: Ord + Clone> OracleEmbedder for BlockCodec<S> {
    fn mode(&self) -> CodecMode {
        BlockCodec::mode(self)
    }

    fn class_of(&self, word: &[usize]) -> Result<TypeClass> {
        BlockCodec::class_of(self, word)
    }

    fn embed(&self, u: &[usize], delta: Option<u64>, secret: &mut dyn BitSource) -> Result<Word> {
        let enc: BlockEncoding = match delta {
            Some(d) => self.encode_word_with_delta(u, d, secret)?,
            None => self.encode_word(u, secret, &mut ScriptedBits::default())?,
        };
        Ok(enc.word)
    }
}

/// Negative control: consumes secret bits exactly like the wrapped codec but
/// always emits the first member of the class.
#[derive(Debug, Clone)]
pub struct AlwaysFirstEmbedder<'a, S>(pub &'a BlockCodec<S>);

impl<S: Ord + Clone> OracleEmbedder for AlwaysFirstEmbedder<'_, S> {
    fn mode(&self) -> CodecMode {
        self.0.mode()
    }

    fn class_of(&self, word: &[usize]) -> Result<TypeClass> {
        self.0.class_of(word)
    }

    fn embed(&self, u: &[usize], delta: Option<u64>, secret: &mut dyn BitSource) -> Result<Word> {
        self.0.embed(u, delta, secret)?;
        self.0.class_of(u)?.unrank(&BigUint::zero())
    }
}

/// Exact output distribution of `embedder` when its input is uniform on
/// `class` and the secret is fair coin flips.
///
/// Chunk choices are enumerated with their exact weights `alpha_i 2^i/|S|`;
/// secret prefixes are enumerated by rerunning the encoder on every bit
/// string it asks for, each weighted `2^-len`.
pub fn security_oracle<E: OracleEmbedder + ?Sized>(class: &TypeClass, embedder: &E) -> Result<ExactDistribution> {
    let size = class.size();
    if size > BigUint::from(MAX_ORACLE_SUPPORT) {
        return Err(Error::TooLarge { size: size.to_string() });
    }
    let expansion = SizeExpansion::new(size.clone());
    let size_int = BigInt::from(size);
    let per_input = Rational::new(BigInt::one(), size_int.clone());
    let outcomes: Vec<(Option<u64>, Rational)> = match embedder.mode() {
        CodecMode::Randomized => (0..=expansion.m())
            .filter(|&i| expansion.digit(i))
            .map(|i| {
                let w = Rational::new(BigInt::one() << i, size_int.clone());
                (Some(i), w)
            })
            .collect(),
        CodecMode::Deterministic => vec![(None, Rational::one())],
    };
    let mut dist = ExactDistribution::default();
    for u in class.members()? {
        for (delta, w) in &outcomes {
            explore_secrets(embedder, &u, *delta, Vec::new(), &per_input * w, &mut dist)?;
        }
    }
    Ok(dist)
}

fn explore_secrets<E: OracleEmbedder + ?Sized>(
    embedder: &E,
    u: &[usize],
    delta: Option<u64>,
    prefix: Vec<bool>,
    weight: Rational,
    dist: &mut ExactDistribution,
) -> Result<()> {
    let mut src = ScriptedBits::new(prefix.clone());
    match embedder.embed(u, delta, &mut src) {
        Ok(out) => {
            debug_assert_eq!(src.remaining(), 0);
            dist.add_mass(out, weight);
            Ok(())
        }
        Err(Error::BitsExhausted) => {
            let half = weight / Rational::from_integer(BigInt::from(2));
            for bit in [false, true] {
                let mut next = prefix.clone();
                next.push(bit);
                explore_secrets(embedder, u, delta, next, half.clone(), dist)?;
            }
            Ok(())
        }
        Err(e) => Err(e),
    }
}

/// Exact `E[d]`, the expected number of bits one block of a class carries.
pub fn expected_bits(size: &BigNat, mode: CodecMode) -> Rational {
    let e = SizeExpansion::new(size.clone());
    let size = BigInt::from(size.clone());
    match mode {
        CodecMode::Randomized => {
            let num = (0..=e.m())
                .filter(|&i| e.digit(i))
                .fold(BigInt::zero(), |acc, i| acc + (BigInt::from(i) << i));
            Rational::new(num, size)
        }
        CodecMode::Deterministic => Rational::new(BigInt::from(e.m()) << e.m(), size),
    }
}

/// Exact expected bits per symbol for blocks of `class` under `codec`.
pub fn expected_rate<S: Ord + Clone>(class: &TypeClass, codec: &BlockCodec<S>) -> Rational {
    expected_bits(&class.size(), codec.mode()) / Rational::from_integer(BigInt::from(codec.n()))
}

/// `E[d] >= log2|S| - 3`, checked exactly through `E[d] >= m - 2`; the
/// second form implies the first because `log2|S| < m + 1`.
pub fn rate_bound_holds(size: &BigNat) -> bool {
    let m = SizeExpansion::new(size.clone()).m() as i64;
    expected_bits(size, CodecMode::Randomized) >= Rational::from_integer(BigInt::from(m - 2))
}

/// `log2` of a big natural, accurate to `f64` precision.
pub fn log2_big(x: &BigNat) -> f64 {
    let bits = x.bits();
    if bits <= 64 {
        return x.to_f64().unwrap_or(0.0).log2();
    }
    let shift = bits - 64;
    (x >> shift).to_f64().unwrap_or(0.0).log2() + shift as f64
}

/// A covertext source for simulation.
#[derive(Debug, Clone, PartialEq)]
pub enum SourceSpec {
    /// I.i.d. symbols with these probabilities.
    Iid(Vec<f64>),
    /// Order-`k` Markov chain over `alphabet_len` symbols. Row `c` holds
    /// the next-symbol law for context `c`, the base-`alphabet_len` number
    /// of the last `k` symbols (oldest most significant).
    Markov {
        k: usize,
        alphabet_len: usize,
        transitions: Vec<Vec<f64>>,
    },
}

impl SourceSpec {
    pub fn alphabet_len(&self) -> usize {
        match self {
            Self::Iid(p) => p.len(),
            Self::Markov { alphabet_len, .. } => *alphabet_len,
        }
    }

    pub fn order(&self) -> usize {
        match self {
            Self::Iid(_) => 0,
            Self::Markov { k, .. } => *k,
        }
    }

    fn validate(&self) -> Result<()> {
        match self {
            Self::Iid(p) => check_probabilities(p).map(|_| ()),
            Self::Markov {
                k,
                alphabet_len,
                transitions,
            } => {
                let contexts = alphabet_len.pow(*k as u32);
                if transitions.len() != contexts {
                    return Err(Error::InvalidDistribution(format!(
                        "expected {contexts} transition rows, got {}",
                        transitions.len()
                    )));
                }
                for row in transitions {
                    if row.len() != *alphabet_len {
                        return Err(Error::InvalidDistribution("ragged transition row".into()));
                    }
                    check_probabilities(row)?;
                }
                Ok(())
            }
        }
    }

    /// Draws `len` symbols.
    pub fn sample(&self, len: usize, rng: &mut impl Rng) -> Result<Word> {
        self.validate()?;
        Ok(match self {
            Self::Iid(p) => (0..len).map(|_| draw(p, rng)).collect(),
            Self::Markov {
                k,
                alphabet_len,
                transitions,
            } => {
                let contexts = alphabet_len.pow(*k as u32);
                let mut ctx = rng.gen_range(0..contexts);
                let mut out = Vec::with_capacity(len);
                // burn in so the first block is near stationarity
                for i in 0..len + 64 {
                    let a = draw(&transitions[ctx], rng);
                    ctx = (ctx * alphabet_len + a) % contexts;
                    if i >= 64 {
                        out.push(a);
                    }
                }
                out
            }
        })
    }
}

fn draw(p: &[f64], rng: &mut impl Rng) -> usize {
    let x: f64 = rng.gen();
    let mut acc = 0.0;
    for (i, &q) in p.iter().enumerate() {
        acc += q;
        if x < acc {
            return i;
        }
    }
    p.iter().rposition(|&q| q > 0.0).unwrap_or(0)
}

/// One row of a capacity table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CapacityPoint {
    pub n: usize,
    /// Hidden bits per covertext symbol.
    pub rate: f64,
    pub blocks: usize,
}

/// Simulates `blocks` blocks of each length from `source`, embeds a framed
/// random payload with the randomized codec and reports consumed secret
/// bits per cover symbol.
pub fn capacity_trend(
    source: &SourceSpec,
    block_sizes: &[usize],
    blocks: usize,
    seed: u64,
) -> Result<Vec<CapacityPoint>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let alphabet = SymbolAlphabet::sorted(0..source.alphabet_len());
    block_sizes
        .iter()
        .map(|&n| {
            let codec = BlockCodec::new(
                alphabet.clone(),
                n,
                EnumeratorKind::markov(source.order()),
                CodecMode::Randomized,
            )?;
            let cover = source.sample(n * blocks, &mut rng)?;
            let payload: Vec<u8> = (0..(n * blocks / 16).max(1)).map(|_| rng.gen()).collect();
            let mut secret = frame(&payload, FairBitSource::from_seed(rng.gen()))?;
            let mut delta = FairBitSource::from_seed(rng.gen());
            let enc = codec.encode_stream(&cover, &mut secret, &mut delta)?;
            Ok(CapacityPoint {
                n,
                rate: enc.bits_consumed as f64 / cover.len().max(1) as f64,
                blocks,
            })
        })
        .collect()
}

fn check_probabilities<F: Float>(p: &[F]) -> Result<F> {
    if p.is_empty() {
        return Err(Error::InvalidDistribution("empty parameter vector".into()));
    }
    if p.iter().any(|&x| !x.is_finite() || x < F::zero()) {
        return Err(Error::InvalidDistribution("negative or non-finite probability".into()));
    }
    let total = p.iter().fold(F::zero(), |a, &b| a + b);
    let tol = F::epsilon().sqrt() * F::from(p.len()).unwrap_or_else(F::one);
    if (total - F::one()).abs() > tol {
        return Err(Error::InvalidDistribution("probabilities do not sum to one".into()));
    }
    Ok(total)
}

fn plogp<F: Float>(p: F) -> F {
    if p > F::zero() {
        p * p.log2()
    } else {
        F::zero()
    }
}

/// Shannon entropy in bits.
pub fn entropy<F: Float>(p: &[F]) -> Result<F> {
    check_probabilities(p)?;
    Ok(clean_zero(-p.iter().fold(F::zero(), |a, &x| a + plogp(x))))
}

/// Min-entropy `-log2 max p` in bits.
pub fn min_entropy<F: Float>(p: &[F]) -> Result<F> {
    check_probabilities(p)?;
    let max = p.iter().fold(F::zero(), |a, &b| a.max(b));
    Ok(clean_zero(-max.log2()))
}

/// Conditional entropy of the next symbol given the previous `k`, for a
/// stationary order-`k` chain. Rows are indexed as in [`SourceSpec::Markov`].
pub fn k_order_entropy<F: Float>(transitions: &[Vec<F>], alphabet_len: usize, k: usize) -> Result<F> {
    let contexts = alphabet_len.pow(k as u32);
    if transitions.len() != contexts || transitions.iter().any(|r| r.len() != alphabet_len) {
        return Err(Error::InvalidDistribution(format!(
            "expected {contexts} rows of {alphabet_len} probabilities"
        )));
    }
    for row in transitions {
        check_probabilities(row)?;
    }
    let pi = stationary(transitions, alphabet_len);
    let h = pi.iter().zip(transitions).fold(F::zero(), |acc, (&w, row)| {
        acc - w * row.iter().fold(F::zero(), |a, &p| a + plogp(p))
    });
    Ok(clean_zero(h))
}

/// Stationary law of the context chain, by power iteration on the lazy
/// chain `(P + I) / 2` (same fixed point, aperiodic).
fn stationary<F: Float>(transitions: &[Vec<F>], q: usize) -> Vec<F> {
    let c = transitions.len();
    let half = F::from(0.5).unwrap();
    let uniform = F::one() / F::from(c).unwrap();
    let mut pi = vec![uniform; c];
    let tol = F::epsilon() * F::from(16.0).unwrap();
    for _ in 0..200_000 {
        let mut next: Vec<F> = pi.iter().map(|&x| x * half).collect();
        for (ctx, row) in transitions.iter().enumerate() {
            for (a, &p) in row.iter().enumerate() {
                let to = (ctx * q + a) % c;
                next[to] = next[to] + half * pi[ctx] * p;
            }
        }
        let delta = next
            .iter()
            .zip(&pi)
            .fold(F::zero(), |acc, (&x, &y)| acc + (x - y).abs());
        pi = next;
        if delta <= tol {
            break;
        }
    }
    pi
}

fn clean_zero<F: Float>(x: F) -> F {
    if x.abs() < F::epsilon() {
        F::zero()
    } else {
        x
    }
}

/// Plug-in entropy of letter counts.
pub fn empirical_entropy<F: Float>(counts: &[u64]) -> F {
    let total: u64 = counts.iter().sum();
    if total == 0 {
        return F::zero();
    }
    let t = F::from(total).unwrap();
    clean_zero(
        -counts
            .iter()
            .fold(F::zero(), |a, &c| a + plogp(F::from(c).unwrap() / t)),
    )
}

/// Plug-in min-entropy of letter counts.
pub fn empirical_min_entropy<F: Float>(counts: &[u64]) -> F {
    let total: u64 = counts.iter().sum();
    let max = counts.iter().copied().max().unwrap_or(0);
    if total == 0 {
        return F::zero();
    }
    clean_zero(-(F::from(max).unwrap() / F::from(total).unwrap()).log2())
}

/// Plug-in conditional entropy of a symbol given the `k` before it.
pub fn empirical_k_order_entropy<F: Float>(word: &[usize], k: usize) -> F {
    if word.len() <= k {
        return F::zero();
    }
    let mut by_context: HashMap<&[usize], HashMap<usize, u64>> = HashMap::new();
    for g in word.windows(k + 1) {
        *by_context.entry(&g[..k]).or_default().entry(g[k]).or_default() += 1;
    }
    let total = F::from(word.len() - k).unwrap();
    let h = by_context.values().fold(F::zero(), |acc, next| {
        let counts: Vec<u64> = next.values().copied().collect();
        let n: u64 = counts.iter().sum();
        acc + F::from(n).unwrap() / total * empirical_entropy::<F>(&counts)
    });
    clean_zero(h)
}

/// Pearson statistic and p-value of `samples` against the uniform law on
/// `class`. Requires at least five expected samples per member.
pub fn chi_square_uniformity(samples: &[Word], class: &TypeClass) -> Result<(f64, f64)> {
    let size = class.size();
    let cells = size
        .to_u64()
        .filter(|&c| c <= 1 << 24)
        .ok_or_else(|| Error::ChiSquare(format!("class of size {size} has too many cells")))?;
    if cells < 2 {
        return Err(Error::ChiSquare("class has a single member".into()));
    }
    let expected = samples.len() as f64 / cells as f64;
    if expected < 5.0 {
        return Err(Error::ChiSquare(format!(
            "{expected:.2} expected per cell, need at least 5"
        )));
    }
    let mut observed = vec![0u64; cells as usize];
    for s in samples {
        if !class.contains(s) {
            return Err(Error::NotInClass);
        }
        let idx = class.rank(s)?.to_usize().expect("rank below cell count");
        observed[idx] += 1;
    }
    let stat: f64 = observed
        .iter()
        .map(|&o| {
            let d = o as f64 - expected;
            d * d / expected
        })
        .sum();
    let dist = ChiSquared::new((cells - 1) as f64).map_err(|e| Error::ChiSquare(e.to_string()))?;
    Ok((stat, dist.sf(stat)))
}

/// Result of checking every class at one parameter point.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SecuritySweep {
    pub classes: usize,
    pub inputs: usize,
    /// Representative words of classes whose output was not uniform.
    pub failures: Vec<Word>,
}

impl SecuritySweep {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// All words of length `n` over `q` symbols, in lexicographic order.
pub fn all_words(q: usize, n: usize) -> Vec<Word> {
    let mut out: Vec<Word> = vec![Vec::new()];
    for _ in 0..n {
        out = out
            .into_iter()
            .flat_map(|p| {
                (0..q).map(move |a| {
                    let mut v = p.clone();
                    v.push(a);
                    v
                })
            })
            .collect();
    }
    out
}

/// Runs the exact oracle on every class of `A^n`. Classes are formed by
/// grouping all of `A^n` by class, independently of the enumerator, and the
/// oracle's support must match the group exactly.
pub fn exhaustive_security<E: OracleEmbedder + ?Sized>(q: usize, n: usize, embedder: &E) -> Result<SecuritySweep> {
    let mut groups: Vec<(TypeClass, Vec<Word>)> = Vec::new();
    let mut index: HashMap<String, usize> = HashMap::new();
    for u in all_words(q, n) {
        let class = embedder.class_of(&u)?;
        let key = format!("{class:?}");
        match index.get(&key) {
            Some(&i) => groups[i].1.push(u),
            None => {
                index.insert(key, groups.len());
                groups.push((class, vec![u]));
            }
        }
    }
    let mut sweep = SecuritySweep::default();
    for (class, members) in groups {
        let dist = security_oracle(&class, embedder)?;
        sweep.classes += 1;
        sweep.inputs += members.len();
        if !dist.is_uniform_on(&members) {
            sweep.failures.push(members[0].clone());
        }
    }
    Ok(sweep)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::enumerate_iid::TypeClassIid;

    fn w(s: &str) -> Word {
        s.bytes().map(|b| (b - b'a') as usize).collect()
    }

    fn codec(q: usize, n: usize, kind: EnumeratorKind, mode: CodecMode) -> BlockCodec<usize> {
        BlockCodec::new(SymbolAlphabet::sorted(0..q), n, kind, mode).unwrap()
    }

    fn rat(a: i64, b: i64) -> Rational {
        Rational::new(BigInt::from(a), BigInt::from(b))
    }

    #[test]
    fn oracle_uniform_on_six_word_class() {
        let c = codec(3, 3, EnumeratorKind::Iid, CodecMode::Randomized);
        let class = c.class_of(&w("bac")).unwrap();
        let d = security_oracle(&class, &c).unwrap();
        assert_eq!(d.support().len(), 6);
        for (_, m) in d.iter() {
            assert_eq!(m, &rat(1, 6));
        }
        assert!(d.is_uniform_on(&class.members().unwrap()));
    }

    #[test]
    fn oracle_singleton_and_markov() {
        let c = codec(3, 3, EnumeratorKind::Iid, CodecMode::Randomized);
        let class = c.class_of(&w("ccc")).unwrap();
        let d = security_oracle(&class, &c).unwrap();
        assert_eq!(d.mass(&w("ccc")), Rational::one());

        let m = codec(2, 5, EnumeratorKind::markov(1), CodecMode::Randomized);
        let class = m.class_of(&w("aabab")).unwrap();
        let d = security_oracle(&class, &m).unwrap();
        assert_eq!(d.mass(&w("aabab")), rat(1, 2));
        assert_eq!(d.mass(&w("abaab")), rat(1, 2));
    }

    #[test]
    fn oracle_refuses_large_classes() {
        let c = codec(8, 8, EnumeratorKind::Iid, CodecMode::Randomized);
        let class = c.class_of(&[0, 1, 2, 3, 4, 5, 6, 7]).unwrap();
        assert!(matches!(security_oracle(&class, &c), Err(Error::TooLarge { .. })));
    }

    #[test]
    fn biased_embedder_is_caught() {
        let c = codec(3, 3, EnumeratorKind::Iid, CodecMode::Randomized);
        let class = c.class_of(&w("bac")).unwrap();
        let d = security_oracle(&class, &AlwaysFirstEmbedder(&c)).unwrap();
        assert_eq!(d.mass(&w("abc")), Rational::one());
        assert!(!d.is_uniform_on(&class.members().unwrap()));
    }

    #[test]
    fn exhaustive_small_sweeps() {
        for mode in [CodecMode::Randomized, CodecMode::Deterministic] {
            let c = codec(3, 4, EnumeratorKind::Iid, mode);
            let s = exhaustive_security(3, 4, &c).unwrap();
            assert!(s.passed(), "{mode:?}: {:?}", s.failures);
            assert_eq!(s.inputs, 81);
            assert_eq!(s.classes, 15);
        }
        let m = codec(2, 5, EnumeratorKind::markov(1), CodecMode::Randomized);
        assert!(exhaustive_security(2, 5, &m).unwrap().passed());
    }

    #[test]
    fn expected_rate_examples() {
        assert_eq!(expected_bits(&BigUint::from(6u32), CodecMode::Randomized), rat(10, 6));
        let c = codec(3, 3, EnumeratorKind::Iid, CodecMode::Randomized);
        let class = c.class_of(&w("bac")).unwrap();
        assert_eq!(expected_rate(&class, &c), rat(5, 9));
        let one = c.class_of(&w("aaa")).unwrap();
        assert_eq!(expected_rate(&one, &c), Rational::zero());
        // deterministic: (4/6) * 2
        assert_eq!(expected_bits(&BigUint::from(6u32), CodecMode::Deterministic), rat(8, 6));
    }

    #[test]
    fn rate_bound_small_classes() {
        for size in 1u32..5000 {
            let s = BigUint::from(size);
            assert!(rate_bound_holds(&s));
            let e = expected_bits(&s, CodecMode::Randomized);
            let ef = e.numer().to_f64().unwrap() / e.denom().to_f64().unwrap();
            assert!(ef >= (size as f64).log2() - 3.0);
        }
    }

    #[test]
    fn deterministic_rate_exceeds_half_m() {
        for size in 2u32..5000 {
            let s = BigUint::from(size);
            let m = SizeExpansion::new(s.clone()).m() as i64;
            assert!(expected_bits(&s, CodecMode::Deterministic) > rat(m, 2) || m == 0);
        }
    }

    #[test]
    fn entropy_examples() {
        assert!((entropy(&[0.5f64, 0.5]).unwrap() - 1.0).abs() < 1e-15);
        assert!((min_entropy(&[0.5f64, 0.5]).unwrap() - 1.0).abs() < 1e-15);
        let h = entropy(&[0.3f64, 0.7]).unwrap();
        let direct = -(0.3f64 * 0.3f64.ln() + 0.7 * 0.7f64.ln()) / std::f64::consts::LN_2;
        assert!((h - direct).abs() < 1e-12);
        assert!((h - 0.881_290_899_230_693_3).abs() < 1e-12);
        let hinf = min_entropy(&[0.3f64, 0.7]).unwrap();
        assert!((hinf - 0.514_573_172_829_758_2).abs() < 1e-12);
        assert_eq!(entropy(&[1.0f64]).unwrap(), 0.0);
        assert!(entropy(&[0.3f64, 0.3]).is_err());
        assert!(entropy(&[-0.1f64, 1.1]).is_err());
        // f32 works too
        assert!((entropy(&[0.25f32; 4]).unwrap() - 2.0).abs() < 1e-6);
    }

    #[test]
    fn k_order_entropy_of_iid_table() {
        let mu = [0.2f64, 0.5, 0.3];
        let h = entropy(&mu).unwrap();
        for k in 0..=3 {
            let rows = vec![mu.to_vec(); 3usize.pow(k)];
            let hk = k_order_entropy(&rows, 3, k as usize).unwrap();
            assert!((hk - h).abs() < 1e-12, "k={k}");
        }
    }

    #[test]
    fn k_order_entropy_two_state_chain() {
        // stationary law of [[0.9,0.1],[0.4,0.6]] is (0.8, 0.2)
        let rows = vec![vec![0.9f64, 0.1], vec![0.4, 0.6]];
        let hk = k_order_entropy(&rows, 2, 1).unwrap();
        let expected = 0.8 * entropy(&[0.9, 0.1]).unwrap() + 0.2 * entropy(&[0.4, 0.6]).unwrap();
        assert!((hk - expected).abs() < 1e-12);
        // periodic chain still converges through the lazy walk
        let flip = vec![vec![0.0f64, 1.0], vec![1.0, 0.0]];
        assert_eq!(k_order_entropy(&flip, 2, 1).unwrap(), 0.0);
    }

    #[test]
    fn empirical_estimators() {
        assert_eq!(empirical_entropy::<f64>(&[10, 0]), 0.0);
        assert!((empirical_entropy::<f64>(&[5, 5]) - 1.0).abs() < 1e-15);
        assert_eq!(empirical_k_order_entropy::<f64>(&w("aaaaaa"), 1), 0.0);
        assert_eq!(empirical_k_order_entropy::<f64>(&w("abababab"), 1), 0.0);
        assert!((empirical_min_entropy::<f64>(&[1, 3]) - 0.415_037_499_278_843_8).abs() < 1e-12);
    }

    #[test]
    fn chi_square_controls() {
        let c = codec(3, 3, EnumeratorKind::Iid, CodecMode::Randomized);
        let class = c.class_of(&w("bac")).unwrap();
        let members = class.members().unwrap();
        let balanced: Vec<Word> = (0..600).map(|i| members[i % 6].clone()).collect();
        let (stat, p) = chi_square_uniformity(&balanced, &class).unwrap();
        assert_eq!(stat, 0.0);
        assert!((p - 1.0).abs() < 1e-12);
        let biased = vec![members[0].clone(); 600];
        let (_, p) = chi_square_uniformity(&biased, &class).unwrap();
        assert!(p < 1e-6);
        assert!(chi_square_uniformity(&balanced[..20], &class).is_err());
        assert!(chi_square_uniformity(&[w("aab")], &class).is_err());
    }

    #[test]
    fn empirical_distribution_sums_to_one() {
        let d = Distribution::empirical(&[w("ab"), w("ba"), w("ab"), w("ab")]);
        assert!((d.total() - 1.0).abs() < 1e-15);
        assert!((d.mass(&w("ab")) - 0.75).abs() < 1e-15);
    }

    #[test]
    fn capacity_constant_source_is_zero() {
        let t = capacity_trend(&SourceSpec::Iid(vec![1.0, 0.0]), &[4, 16], 50, 1).unwrap();
        assert!(t.iter().all(|p| p.rate == 0.0));
    }

    #[test]
    fn capacity_fair_coin_grows() {
        let t = capacity_trend(&SourceSpec::Iid(vec![0.5, 0.5]), &[4, 16, 64], 200, 7).unwrap();
        assert!(t[0].rate < t[1].rate && t[1].rate < t[2].rate);
        assert!(t[2].rate < 1.0);
    }

    #[test]
    fn capacity_markov_source() {
        let src = SourceSpec::Markov {
            k: 1,
            alphabet_len: 2,
            transitions: vec![vec![0.9, 0.1], vec![0.4, 0.6]],
        };
        let t = capacity_trend(&src, &[32], 100, 3).unwrap();
        let hk = k_order_entropy(&[vec![0.9, 0.1], vec![0.4, 0.6]], 2, 1).unwrap();
        assert!(t[0].rate > 0.0 && t[0].rate < hk);
    }

    #[test]
    fn iid_class_sizes_used_by_oracle() {
        assert_eq!(TypeClassIid::of(&w("aabb")).size(), BigUint::from(6u32));
        assert!((log2_big(&(BigUint::one() << 200u32)) - 200.0).abs() < 1e-12);
    }
}
