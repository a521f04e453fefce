//! Built-in self-test: worked examples plus the exhaustive security and rate
//! checks, each timed.

use std::time::{Duration, Instant};

use num_bigint::BigUint;

use crate::enumerate_iid::{self, TypeClassIid};
use crate::randomness::{FairBitSource, ScriptedBits};
use crate::stego_core::{
    bit_string, pairwise_decode, pairwise_encode, BlockCodec, CodecMode, EnumeratorKind, SizeExpansion,
};
use crate::verify::{self, AlwaysFirstEmbedder, OracleEmbedder};
use crate::{Result, SymbolAlphabet, Word};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SelftestOptions {
    /// Smaller exhaustive ranges.
    pub quick: bool,
    /// Swap the real encoder for one that always emits the first class
    /// member; the uniformity checks must then fail.
    pub inject_bias: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    pub elapsed: Duration,
}

type Check = fn(&SelftestOptions) -> Result<(bool, String)>;

const CHECKS: &[(&str, Check)] = &[
    ("block_worked_example", block_worked_example),
    ("binary_rank_example", binary_rank_example),
    ("pairwise_worked_example", pairwise_worked_example),
    ("iid_bijection", iid_bijection),
    ("iid_security_randomized", |o| iid_security(o, CodecMode::Randomized)),
    ("iid_security_deterministic", |o| {
        iid_security(o, CodecMode::Deterministic)
    }),
    ("markov_security", markov_security),
    ("rate_bound", rate_bound),
    ("chi_square_encoder_output", chi_square_encoder_output),
];

pub fn run_selftest(options: &SelftestOptions) -> Vec<CheckResult> {
    CHECKS
        .iter()
        .map(|(name, check)| {
            let start = Instant::now();
            let (passed, detail) = match check(options) {
                Ok(r) => r,
                Err(e) => (false, format!("error: {e}")),
            };
            CheckResult {
                name,
                passed,
                detail,
                elapsed: start.elapsed(),
            }
        })
        .collect()
}

fn chars(s: &str) -> Vec<char> {
    s.chars().collect()
}

fn block_worked_example(_: &SelftestOptions) -> Result<(bool, String)> {
    let codec = BlockCodec::new(
        SymbolAlphabet::chars("abc")?,
        3,
        EnumeratorKind::Iid,
        CodecMode::Randomized,
    )?;
    let u = codec.alphabet().to_word(&chars("bac"))?;
    let enc = codec.encode_word_with_delta(&u, 1, &mut ScriptedBits::parse("0110"))?;
    let out: String = codec.alphabet().to_block(&enc.word).into_iter().collect();
    let back = bit_string(&codec.decode_block(&chars(&out))?);
    Ok((out == "cab" && back == "0", format!("bac -> {out}, decoded {back}")))
}

fn binary_rank_example(_: &SelftestOptions) -> Result<(bool, String)> {
    let u = vec![1, 0, 1, 0];
    let r = enumerate_iid::rank(&u, &TypeClassIid::of(&u))?;
    Ok((r == BigUint::from(4u32), format!("rank(1010) = {r}")))
}

fn pairwise_worked_example(_: &SelftestOptions) -> Result<(bool, String)> {
    let (out, _) = pairwise_encode(&chars("aababaaaabbaaaaabb"), &mut ScriptedBits::parse("01100"))?;
    let out: String = out.into_iter().collect();
    let back = bit_string(&pairwise_decode(&chars(&out)));
    Ok((
        out == "aaabbaaabaabaaaabb" && back == "0110",
        format!("stego {out}, decoded {back}"),
    ))
}

fn iid_bijection(o: &SelftestOptions) -> Result<(bool, String)> {
    let max_n = if o.quick { 5 } else { 7 };
    let mut checked = 0usize;
    for q in 1..=3 {
        for n in 1..=max_n {
            for u in verify::all_words(q, n) {
                let c = TypeClassIid::of(&u);
                let r = enumerate_iid::rank(&u, &c)?;
                if enumerate_iid::unrank(&c, &r)? != u {
                    return Ok((false, format!("round trip failed for {u:?}")));
                }
                checked += 1;
            }
        }
    }
    Ok((true, format!("{checked} words")))
}

fn sweep<E: OracleEmbedder + ?Sized>(q: usize, n: usize, e: &E, total: &mut (usize, usize)) -> Result<Option<Word>> {
    let s = verify::exhaustive_security(q, n, e)?;
    total.0 += s.classes;
    total.1 += s.inputs;
    Ok(s.failures.into_iter().next())
}

fn iid_security(o: &SelftestOptions, mode: CodecMode) -> Result<(bool, String)> {
    let max_n = if o.quick { 4 } else { 5 };
    let mut total = (0, 0);
    for q in 1..=3 {
        for n in 2..=max_n {
            let codec = BlockCodec::new(SymbolAlphabet::sorted(0..q), n, EnumeratorKind::Iid, mode)?;
            let failure = if o.inject_bias {
                sweep(q, n, &AlwaysFirstEmbedder(&codec), &mut total)?
            } else {
                sweep(q, n, &codec, &mut total)?
            };
            if let Some(w) = failure {
                return Ok((false, format!("non-uniform output for class of {w:?} (q={q}, n={n})")));
            }
        }
    }
    Ok((true, format!("{} classes, {} inputs", total.0, total.1)))
}

fn markov_security(o: &SelftestOptions) -> Result<(bool, String)> {
    let max_n = if o.quick { 5 } else { 6 };
    let mut total = (0, 0);
    for n in 3..=max_n {
        let codec = BlockCodec::new(
            SymbolAlphabet::sorted(0..2),
            n,
            EnumeratorKind::markov(1),
            CodecMode::Randomized,
        )?;
        let failure = if o.inject_bias {
            sweep(2, n, &AlwaysFirstEmbedder(&codec), &mut total)?
        } else {
            sweep(2, n, &codec, &mut total)?
        };
        if let Some(w) = failure {
            return Ok((false, format!("non-uniform output for class of {w:?} (n={n})")));
        }
    }
    Ok((true, format!("{} classes, {} inputs", total.0, total.1)))
}

fn rate_bound(o: &SelftestOptions) -> Result<(bool, String)> {
    let max_n = if o.quick { 8 } else { 12 };
    let mut classes = 0usize;
    for n in 1..=max_n as u64 {
        for a in 0..=n {
            for b in 0..=n - a {
                for c in 0..=n - a - b {
                    let class = TypeClassIid::from_freqs(&[a, b, c, n - a - b - c]);
                    if !verify::rate_bound_holds(&class.size()) {
                        return Ok((false, format!("bound fails for counts {:?}", class.counts())));
                    }
                    classes += 1;
                }
            }
        }
    }
    Ok((true, format!("{classes} classes")))
}

fn chi_square_encoder_output(o: &SelftestOptions) -> Result<(bool, String)> {
    let codec = BlockCodec::new(
        SymbolAlphabet::sorted(0..3),
        3,
        EnumeratorKind::Iid,
        CodecMode::Randomized,
    )?;
    let class = codec.class_of(&[1, 0, 2])?;
    let members = class.members()?;
    let mut secret = FairBitSource::from_seed(0x5eed);
    let mut rand = FairBitSource::from_seed(0xfeed);
    let samples = if o.quick { 1200 } else { 6000 };
    let mut out = Vec::with_capacity(samples);
    for i in 0..samples {
        let u = &members[i % members.len()];
        let enc = codec.encode_word(u, &mut secret, &mut rand)?;
        out.push(if o.inject_bias { members[0].clone() } else { enc.word });
    }
    let (stat, p) = verify::chi_square_uniformity(&out, &class)?;
    Ok((p > 1e-3, format!("statistic {stat:.3}, p = {p:.4}")))
}

/// Summary line for the `SizeExpansion` of a class, used by reports.
pub fn describe_expansion(size: &BigUint) -> String {
    let e = SizeExpansion::new(size.clone());
    format!("size={} m={} alpha={}", size, e.m(), bit_string(&e.alpha()))
}
