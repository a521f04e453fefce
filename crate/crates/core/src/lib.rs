//! Perfectly secure steganography for i.i.d. and finite-memory covertext
//! sources.
//!
//! A block of covertext is replaced by another member of its type class (the
//! words the source emits with exactly the same probability). The member is
//! chosen by its lexicographic index, which carries the hidden bits, so the
//! output has the same distribution as the input whenever the hidden bits are
//! fair coin flips.
//!
//! Class sizes and indices are exact [`BigNat`]s; security checks use exact
//! [`Rational`] arithmetic; entropy estimators are generic over
//! [`num_traits::Float`].

pub mod alphabet;
pub mod bigcomb;
pub mod enumerate_iid;
pub mod enumerate_markov;
mod error;
pub mod randomness;
pub mod secret_stream;
pub mod selftest;
pub mod stego_core;
pub mod verify;

pub use alphabet::{SymbolAlphabet, Word};
pub use enumerate_iid::TypeClassIid;
pub use enumerate_markov::{MarkovLimits, TypeClassMarkov};
pub use error::{Error, Result};
pub use randomness::{BitSource, FairBitSource, ScriptedBits};
pub use secret_stream::FramedSecret;
pub use stego_core::{BlockCodec, CodecMode, EnumeratorKind, SizeExpansion};
pub use verify::Distribution;

/// Arbitrary-precision natural number used for class sizes and ranks.
pub type BigNat = num_bigint::BigUint;

/// Exact rational used by the security oracles.
pub type Rational = num_rational::BigRational;

/// Output distribution with exact rational masses.
pub type ExactDistribution = Distribution<Rational>;

/// Output distribution estimated from samples.
pub type EmpiricalDistribution = Distribution<f64>;
