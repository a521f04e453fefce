use std::collections::BTreeMap;

use crate::{Error, Result};

/// A word over an alphabet, stored as symbol indices in alphabet order.
pub type Word = Vec<usize>;

/// Ordered finite symbol set. Index order is the lexicographic order used by
/// every enumerator.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SymbolAlphabet<S> {
    symbols: Vec<S>,
    lookup: BTreeMap<S, usize>,
}

impl<S: Ord + Clone> SymbolAlphabet<S> {
    /// Alphabet with an explicit order. Duplicates are rejected.
    pub fn new(symbols: Vec<S>) -> Result<Self> {
        let mut lookup = BTreeMap::new();
        for (i, s) in symbols.iter().enumerate() {
            if lookup.insert(s.clone(), i).is_some() {
                return Err(Error::DuplicateSymbol { position: i });
            }
        }
        Ok(Self { symbols, lookup })
    }

    /// Alphabet of the distinct symbols in `symbols`, in ascending `Ord` order.
    pub fn sorted<I: IntoIterator<Item = S>>(symbols: I) -> Self {
        let lookup: BTreeMap<S, usize> = symbols.into_iter().map(|s| (s, 0)).collect();
        let symbols: Vec<S> = lookup.keys().cloned().collect();
        let lookup = symbols.iter().cloned().zip(0..).collect();
        Self { symbols, lookup }
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn symbols(&self) -> &[S] {
        &self.symbols
    }

    pub fn symbol(&self, index: usize) -> &S {
        &self.symbols[index]
    }

    pub fn index_of(&self, symbol: &S) -> Option<usize> {
        self.lookup.get(symbol).copied()
    }

    /// Maps a block to symbol indices, reporting the first unknown position.
    pub fn to_word(&self, block: &[S]) -> Result<Word> {
        block
            .iter()
            .enumerate()
            .map(|(position, s)| self.index_of(s).ok_or(Error::UnknownSymbol { position }))
            .collect()
    }

    pub fn to_block(&self, word: &[usize]) -> Vec<S> {
        word.iter().map(|&i| self.symbols[i].clone()).collect()
    }
}

impl SymbolAlphabet<u8> {
    /// All 256 byte values in ascending order.
    pub fn bytes() -> Self {
        Self::sorted(0..=u8::MAX)
    }
}

impl SymbolAlphabet<char> {
    /// Characters of `s` in the given order.
    pub fn chars(s: &str) -> Result<Self> {
        Self::new(s.chars().collect())
    }
}
