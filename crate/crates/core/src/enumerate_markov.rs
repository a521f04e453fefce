//! Counting, ranking and unranking of Markov type classes.
//!
//! A word of length `n` with memory order `k` is a walk in the graph whose
//! vertices are `k`-symbol contexts and whose edges are the `(k+1)`-grams of
//! the word. Two words share a class when they use every gram the same number
//! of times and start and end at the same context, so the class is the set of
//! Eulerian trails from the prefix context to the suffix context, modulo the
//! order of parallel edges with the same label.
//!
//! Trail counts come from the BEST theorem. Closing the trail with an extra
//! edge `suffix -> current` makes it a circuit, and
//!
//! ```text
//! trails = arborescences(current) * prod_v (outdeg(v) - 1)! / prod_g count(g)!
//! ```
//!
//! where the arborescence count is the determinant of the reduced Laplacian.
//! Rank and unrank walk left to right and only ever ask for the number of
//! completions of a partial walk, which is the same formula on the remaining
//! edges.

use std::collections::BTreeMap;

use num_bigint::{BigInt, BigUint, Sign};
use num_traits::{One, Zero};

use crate::{BigNat, Error, Result, SymbolAlphabet, Word};

/// Refusal thresholds for Markov enumeration. The cost of each completion
/// count is cubic in the number of distinct contexts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MarkovLimits {
    pub max_block_len: usize,
    pub max_order: usize,
    pub max_contexts: usize,
}

impl Default for MarkovLimits {
    fn default() -> Self {
        Self {
            max_block_len: 4096,
            max_order: 8,
            max_contexts: 160,
        }
    }
}

/// Gram counts plus the pinned `k`-prefix and `k`-suffix of a block.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TypeClassMarkov {
    k: usize,
    n: usize,
    grams: BTreeMap<Word, u64>,
    prefix: Word,
    suffix: Word,
}

impl TypeClassMarkov {
    /// Class of `word` for memory order `k`. Requires `n > 2k`.
    pub fn of(word: &[usize], k: usize) -> Result<Self> {
        Self::with_limits(word, k, &MarkovLimits::default())
    }

    pub fn with_limits(word: &[usize], k: usize, limits: &MarkovLimits) -> Result<Self> {
        let n = word.len();
        if n <= 2 * k {
            return Err(Error::BlockTooShort { n, k });
        }
        if k > limits.max_order {
            return Err(Error::ScaleLimit(format!(
                "memory order {k} exceeds the limit of {}",
                limits.max_order
            )));
        }
        if n > limits.max_block_len {
            return Err(Error::ScaleLimit(format!(
                "block length {n} exceeds the limit of {}",
                limits.max_block_len
            )));
        }
        let mut grams = BTreeMap::new();
        for g in word.windows(k + 1) {
            *grams.entry(g.to_vec()).or_insert(0) += 1;
        }
        let class = Self {
            k,
            n,
            grams,
            prefix: word[..k].to_vec(),
            suffix: word[n - k..].to_vec(),
        };
        let contexts = class.graph().contexts.len();
        if contexts > limits.max_contexts {
            return Err(Error::ScaleLimit(format!(
                "{contexts} distinct contexts exceed the limit of {}",
                limits.max_contexts
            )));
        }
        Ok(class)
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Overlapping `(k+1)`-gram counts.
    pub fn gram_counts(&self) -> &BTreeMap<Word, u64> {
        &self.grams
    }

    pub fn prefix(&self) -> &[usize] {
        &self.prefix
    }

    pub fn suffix(&self) -> &[usize] {
        &self.suffix
    }

    /// Whether `word` has exactly this class's gram counts, prefix and suffix.
    pub fn contains(&self, word: &[usize]) -> bool {
        word.len() == self.n && TypeClassMarkov::of_unchecked(word, self.k).is_some_and(|c| &c == self)
    }

    fn of_unchecked(word: &[usize], k: usize) -> Option<Self> {
        let n = word.len();
        if n < k {
            return None;
        }
        let mut grams = BTreeMap::new();
        for g in word.windows(k + 1) {
            *grams.entry(g.to_vec()).or_insert(0) += 1;
        }
        Some(Self {
            k,
            n,
            grams,
            prefix: word[..k].to_vec(),
            suffix: word[n - k..].to_vec(),
        })
    }

    fn graph(&self) -> ContextGraph {
        ContextGraph::build(self)
    }

    /// Exact number of words in the class.
    pub fn count(&self) -> BigNat {
        let g = self.graph();
        let counts: Vec<u64> = g.edges.iter().map(|e| e.count).collect();
        g.completions(&counts, g.start)
    }
}

/// Markov class of a block over an explicit alphabet.
pub fn markov_class_of<S: Ord + Clone>(block: &[S], alphabet: &SymbolAlphabet<S>, k: usize) -> Result<TypeClassMarkov> {
    TypeClassMarkov::of(&alphabet.to_word(block)?, k)
}

pub fn markov_class_count(class: &TypeClassMarkov) -> BigNat {
    class.count()
}

/// 0-based lexicographic index of `word` within `class`.
pub fn markov_rank(word: &[usize], class: &TypeClassMarkov) -> Result<BigNat> {
    if word.len() != class.n || word[..class.k] != class.prefix[..] {
        return Err(Error::NotInClass);
    }
    let g = class.graph();
    let mut counts: Vec<u64> = g.edges.iter().map(|e| e.count).collect();
    let mut at = g.start;
    let mut acc = BigUint::zero();
    for &sym in &word[class.k..] {
        let mut next = None;
        for &e in &g.out[at] {
            if counts[e] == 0 {
                continue;
            }
            let edge = &g.edges[e];
            if edge.symbol < sym {
                counts[e] -= 1;
                acc += g.completions(&counts, edge.to);
                counts[e] += 1;
            } else {
                if edge.symbol == sym {
                    next = Some(e);
                }
                break;
            }
        }
        let e = next.ok_or(Error::NotInClass)?;
        counts[e] -= 1;
        at = g.edges[e].to;
    }
    if at != g.end {
        return Err(Error::NotInClass);
    }
    Ok(acc)
}

/// The member of `class` whose rank is `index`.
pub fn markov_unrank(class: &TypeClassMarkov, index: &BigNat) -> Result<Word> {
    let g = class.graph();
    let mut counts: Vec<u64> = g.edges.iter().map(|e| e.count).collect();
    let size = g.completions(&counts, g.start);
    if index >= &size {
        return Err(Error::IndexOutOfRange { size: size.to_string() });
    }
    let mut idx = index.clone();
    let mut at = g.start;
    let mut out = class.prefix.clone();
    out.reserve(class.n - class.k);
    for _ in class.k..class.n {
        let candidates: Vec<usize> = g.out[at].iter().copied().filter(|&e| counts[e] > 0).collect();
        let mut chosen = None;
        for (i, &e) in candidates.iter().enumerate() {
            counts[e] -= 1;
            if i + 1 == candidates.len() {
                chosen = Some(e);
                break;
            }
            let below = g.completions(&counts, g.edges[e].to);
            if idx < below {
                chosen = Some(e);
                break;
            }
            idx -= below;
            counts[e] += 1;
        }
        let e = chosen.expect("index below class size always has a branch");
        at = g.edges[e].to;
        out.push(g.edges[e].symbol);
    }
    debug_assert!(at == g.end && idx.is_zero());
    Ok(out)
}

#[derive(Debug)]
struct Edge {
    from: usize,
    to: usize,
    symbol: usize,
    count: u64,
}

/// De Bruijn-style multigraph of a class: contexts as vertices, grams as
/// labelled edges with multiplicities.
struct ContextGraph {
    contexts: Vec<Word>,
    edges: Vec<Edge>,
    /// Edge indices leaving each vertex, sorted by symbol.
    out: Vec<Vec<usize>>,
    start: usize,
    end: usize,
}

impl ContextGraph {
    fn build(class: &TypeClassMarkov) -> Self {
        let mut ids: BTreeMap<Word, usize> = BTreeMap::new();
        let intern = |ctx: &[usize], ids: &mut BTreeMap<Word, usize>| -> usize {
            let next = ids.len();
            *ids.entry(ctx.to_vec()).or_insert(next)
        };
        let start = intern(&class.prefix, &mut ids);
        let end = intern(&class.suffix, &mut ids);
        let mut edges = Vec::with_capacity(class.grams.len());
        // BTreeMap iteration is lexicographic, so edges out of each context
        // are already sorted by their final symbol.
        for (gram, &count) in &class.grams {
            let from = intern(&gram[..class.k], &mut ids);
            let to = intern(&gram[1..], &mut ids);
            edges.push(Edge {
                from,
                to,
                symbol: gram[class.k],
                count,
            });
        }
        let mut contexts = vec![Vec::new(); ids.len()];
        for (ctx, id) in ids {
            contexts[id] = ctx;
        }
        let mut out = vec![Vec::new(); contexts.len()];
        for (i, e) in edges.iter().enumerate() {
            out[e.from].push(i);
        }
        Self {
            contexts,
            edges,
            out,
            start,
            end,
        }
    }

    /// Number of ways to finish a walk at `at` using exactly the remaining
    /// edge counts and ending at the suffix context.
    fn completions(&self, counts: &[u64], at: usize) -> BigNat {
        let remaining: u64 = counts.iter().sum();
        if remaining == 0 {
            return if at == self.end {
                BigUint::one()
            } else {
                BigUint::zero()
            };
        }
        let v = self.contexts.len();
        let mut outdeg = vec![0u64; v];
        let mut indeg = vec![0u64; v];
        for (e, &c) in self.edges.iter().zip(counts) {
            outdeg[e.from] += c;
            indeg[e.to] += c;
        }
        // closing edge end -> at
        outdeg[self.end] += 1;
        indeg[at] += 1;
        if outdeg.iter().zip(&indeg).any(|(o, i)| o != i) {
            return BigUint::zero();
        }

        // Laplacian over active vertices other than the root `at`.
        let active: Vec<usize> = (0..v).filter(|&x| outdeg[x] > 0 && x != at).collect();
        let mut pos = vec![usize::MAX; v];
        for (i, &x) in active.iter().enumerate() {
            pos[x] = i;
        }
        let d = active.len();
        let mut lap = vec![vec![0i64; d]; d];
        for &x in &active {
            lap[pos[x]][pos[x]] = outdeg[x] as i64;
        }
        let mut add_adjacency = |from: usize, to: usize, c: u64| {
            if from != at && to != at && pos[from] != usize::MAX && pos[to] != usize::MAX {
                lap[pos[from]][pos[to]] -= c as i64;
            }
        };
        for (e, &c) in self.edges.iter().zip(counts) {
            if c > 0 {
                add_adjacency(e.from, e.to, c);
            }
        }
        add_adjacency(self.end, at, 1);

        let trees = determinant(lap);
        if trees.sign() != Sign::Plus {
            return BigUint::zero();
        }
        let mut num = trees.magnitude().clone();
        for &o in &outdeg {
            if o > 1 {
                num *= factorial(o - 1);
            }
        }
        let mut den = BigUint::one();
        for &c in counts {
            if c > 1 {
                den *= factorial(c);
            }
        }
        num / den
    }
}

fn factorial(n: u64) -> BigUint {
    (2..=n).fold(BigUint::one(), |acc, i| acc * i)
}

/// Fraction-free (Bareiss) determinant.
fn determinant(m: Vec<Vec<i64>>) -> BigInt {
    let n = m.len();
    if n == 0 {
        return BigInt::one();
    }
    let mut a: Vec<Vec<BigInt>> = m
        .into_iter()
        .map(|row| row.into_iter().map(BigInt::from).collect())
        .collect();
    let mut sign = BigInt::one();
    let mut prev = BigInt::one();
    for k in 0..n - 1 {
        if a[k][k].is_zero() {
            match (k + 1..n).find(|&r| !a[r][k].is_zero()) {
                Some(r) => {
                    a.swap(k, r);
                    sign = -sign;
                }
                None => return BigInt::zero(),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let v = &a[i][j] * &a[k][k] - &a[i][k] * &a[k][j];
                a[i][j] = v / &prev;
            }
        }
        prev = a[k][k].clone();
    }
    sign * &a[n - 1][n - 1]
}
