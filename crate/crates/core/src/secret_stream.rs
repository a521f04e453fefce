//! Framing of finite messages into the unbounded bit supply the codecs read.
//!
//! Wire layout: a 32-bit big-endian count of payload bits, the payload bytes
//! MSB-first, then random padding for as long as the encoder keeps reading.
//! The prefix is only indistinguishable from noise when the payload itself
//! is (for example, ciphertext); this module does not whiten anything.

use crate::randomness::BitSource;
use crate::stego_core::{Scheme, StreamEncoding};
use crate::{Error, Result};

const PREFIX_BITS: usize = 32;

/// Length prefix and payload, followed by padding drawn lazily from `R`.
#[derive(Debug, Clone)]
pub struct FramedSecret<R> {
    framed: Vec<bool>,
    pos: usize,
    padding: R,
}

/// Frames `message`, drawing padding from `padding` once the payload is
/// exhausted.
pub fn frame<R: BitSource>(message: &[u8], padding: R) -> Result<FramedSecret<R>> {
    let bits = message.len() as u64 * 8;
    if bits > u64::from(u32::MAX) {
        return Err(Error::MessageTooLarge { bits });
    }
    let mut framed = Vec::with_capacity(PREFIX_BITS + bits as usize);
    push_bytes(&mut framed, &(bits as u32).to_be_bytes());
    push_bytes(&mut framed, message);
    Ok(FramedSecret {
        framed,
        pos: 0,
        padding,
    })
}

fn push_bytes(out: &mut Vec<bool>, bytes: &[u8]) {
    for &b in bytes {
        out.extend((0..8).rev().map(|i| (b >> i) & 1 == 1));
    }
}

impl<R> FramedSecret<R> {
    /// Prefix plus payload, in bits.
    pub fn framed_len(&self) -> u64 {
        self.framed.len() as u64
    }

    /// Bits handed out so far, padding included.
    pub fn consumed(&self) -> u64 {
        self.pos as u64
    }

    /// Framed bits not yet handed out.
    pub fn shortfall(&self) -> u64 {
        self.framed_len().saturating_sub(self.consumed())
    }
}

impl<R: BitSource> BitSource for FramedSecret<R> {
    fn next_bit(&mut self) -> Result<bool> {
        let bit = match self.framed.get(self.pos) {
            Some(&b) => b,
            None => self.padding.next_bit()?,
        };
        self.pos += 1;
        Ok(bit)
    }
}

/// Recovers a framed message, ignoring anything after the payload.
pub fn deframe(bits: &[bool]) -> Result<Vec<u8>> {
    if bits.len() < PREFIX_BITS {
        return Err(Error::Truncated {
            missing: (PREFIX_BITS - bits.len()) as u64,
        });
    }
    let declared = bits[..PREFIX_BITS]
        .iter()
        .fold(0u64, |acc, &b| (acc << 1) | u64::from(b));
    let end = PREFIX_BITS as u64 + declared;
    if (bits.len() as u64) < end {
        return Err(Error::Truncated {
            missing: end - bits.len() as u64,
        });
    }
    if declared % 8 != 0 {
        return Err(Error::Truncated {
            missing: 8 - declared % 8,
        });
    }
    Ok(bits[PREFIX_BITS..end as usize]
        .chunks_exact(8)
        .map(|byte| byte.iter().fold(0u8, |acc, &b| (acc << 1) | u8::from(b)))
        .collect())
}

/// Result of embedding a framed message in a cover.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Embedding<S> {
    pub encoding: StreamEncoding<S>,
    /// Prefix plus payload bits.
    pub framed_bits: u64,
}

/// Frames `message` and embeds it. Fails with [`Error::Shortfall`] if the
/// cover ran out before every framed bit was consumed.
pub fn embed_message<S, D, P>(
    scheme: &Scheme<S>,
    cover: &[S],
    message: &[u8],
    delta_source: &mut D,
    padding: P,
) -> Result<Embedding<S>>
where
    S: Ord + Clone + Send + Sync,
    D: BitSource + ?Sized,
    P: BitSource,
{
    let mut secret = frame(message, padding)?;
    let encoding = scheme.encode_stream(cover, &mut secret, delta_source)?;
    if secret.shortfall() > 0 {
        return Err(Error::Shortfall {
            missing: secret.shortfall(),
        });
    }
    Ok(Embedding {
        encoding,
        framed_bits: secret.framed_len(),
    })
}

pub fn extract_message<S>(scheme: &Scheme<S>, stego: &[S]) -> Result<Vec<u8>>
where
    S: Ord + Clone + Send + Sync,
{
    deframe(&scheme.decode_stream(stego)?)
}
