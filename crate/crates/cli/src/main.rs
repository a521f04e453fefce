use std::fmt::Display;
use std::fs;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_traits::ToPrimitive;
use typestego::secret_stream::{extract_message, frame};
use typestego::selftest::{run_selftest, SelftestOptions};
use typestego::stego_core::Scheme;
use typestego::verify::{empirical_entropy, empirical_k_order_entropy, empirical_min_entropy, expected_rate};
use typestego::{BlockCodec, CodecMode, EnumeratorKind, Error, FairBitSource, SymbolAlphabet};

/// Mixed into the seed for the padding stream so it differs from the
/// delta stream.
const PADDING_SEED_MIX: u64 = 0x9e37_79b9_7f4a_7c15;

#[derive(Debug, Parser)]
#[command(
    name = "typestego",
    version,
    about = "Distribution-preserving steganography by type-class enumeration"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Hide a message in a cover.
    Embed {
        /// Cover input, `-` for stdin.
        #[arg(long)]
        cover: PathBuf,
        /// Message bytes, `-` for stdin.
        #[arg(long)]
        secret: PathBuf,
        /// Stego output, `-` for stdout.
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        protocol: Protocol,
        /// Seed for the delta and padding streams. Affects only which
        /// stego cover is produced, never decodability.
        #[arg(long, env = "TYPESTEGO_SEED")]
        seed: Option<u64>,
        /// Write the stego cover even if the message did not fit.
        #[arg(long)]
        allow_shortfall: bool,
    },
    /// Recover a message from a stego cover.
    Extract {
        /// Stego input, `-` for stdin.
        #[arg(long)]
        stego: PathBuf,
        /// Message output, `-` for stdout.
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        protocol: Protocol,
    },
    /// Entropy estimates and expected embedding rate of a cover.
    Analyze {
        #[arg(long)]
        cover: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Bytes)]
        format: Format,
        #[arg(long)]
        alphabet_file: Option<PathBuf>,
        /// Context length for the conditional entropy and the enumerator.
        #[arg(long, default_value_t = 0)]
        order_k: usize,
        #[arg(long, value_delimiter = ',', default_value = "16,64,256")]
        block_sizes: Vec<usize>,
        #[arg(long, value_enum, default_value_t = Mode::Randomized)]
        mode: Mode,
        /// Also write the per-n rates as TSV.
        #[arg(long)]
        table: Option<PathBuf>,
    },
    /// Run the built-in exhaustive checks.
    Selftest {
        #[arg(long)]
        quick: bool,
        #[arg(long, hide = true)]
        inject_bias: bool,
    },
}

/// Parameters both sides must agree on.
#[derive(Debug, Clone, Args)]
struct Protocol {
    #[arg(long, default_value_t = 64)]
    block_n: usize,
    #[arg(long, default_value_t = 0)]
    order_k: usize,
    #[arg(long, value_enum, default_value_t = Mode::Randomized)]
    mode: Mode,
    #[arg(long, value_enum, default_value_t = Format::Bytes)]
    format: Format,
    /// Explicit symbol order: raw bytes in bytes format, one token per line
    /// in tokens format.
    #[arg(long)]
    alphabet_file: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Mode {
    Randomized,
    Deterministic,
    Pairwise,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Bytes,
    Tokens,
}

#[derive(Debug, thiserror::Error)]
enum Failure {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Protocol(#[from] Error),
    #[error("{path}: {source}")]
    Io { path: String, source: io::Error },
    #[error("{0}")]
    Selftest(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Self::Usage(_) => 2,
            Self::Protocol(_) | Self::Io { .. } => 3,
            Self::Selftest(_) => 4,
        }
    }
}

type CliResult<T> = std::result::Result<T, Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("typestego: {e}");
            ExitCode::from(e.code())
        }
    }
}

fn run(command: Command) -> CliResult<()> {
    match command {
        Command::Embed {
            cover,
            secret,
            out,
            protocol,
            seed,
            allow_shortfall,
        } => {
            let message = read_input(&secret)?;
            let cover_raw = read_input(&cover)?;
            let opts = EmbedOptions {
                message: &message,
                seed,
                allow_shortfall,
            };
            let stego = match protocol.format {
                Format::Bytes => {
                    let alphabet = byte_alphabet(&protocol)?;
                    embed(&protocol, alphabet, &cover_raw, &opts)?
                }
                Format::Tokens => {
                    let tokens = split_tokens(&cover_raw)?;
                    let alphabet = token_alphabet(&protocol, &tokens)?;
                    join_tokens(&embed(&protocol, alphabet, &tokens, &opts)?)
                }
            };
            write_output(&out, &stego)
        }
        Command::Extract { stego, out, protocol } => {
            let raw = read_input(&stego)?;
            let message = match protocol.format {
                Format::Bytes => {
                    let scheme = scheme(&protocol, byte_alphabet(&protocol)?)?;
                    extract_message(&scheme, &raw)?
                }
                Format::Tokens => {
                    let tokens = split_tokens(&raw)?;
                    let scheme = scheme(&protocol, token_alphabet(&protocol, &tokens)?)?;
                    extract_message(&scheme, &tokens)?
                }
            };
            write_output(&out, &message)
        }
        Command::Analyze {
            cover,
            format,
            alphabet_file,
            order_k,
            block_sizes,
            mode,
            table,
        } => {
            let protocol = Protocol {
                block_n: 0,
                order_k,
                mode,
                format,
                alphabet_file,
            };
            let raw = read_input(&cover)?;
            let report = match format {
                Format::Bytes => analyze(&protocol, byte_alphabet(&protocol)?, &raw, &block_sizes)?,
                Format::Tokens => {
                    let tokens = split_tokens(&raw)?;
                    let alphabet = token_alphabet(&protocol, &tokens)?;
                    analyze(&protocol, alphabet, &tokens, &block_sizes)?
                }
            };
            if let Some(path) = table {
                let mut tsv = String::from("n\tblocks\texpected_rate\n");
                for row in &report {
                    if let Some(rate) = row.rate {
                        tsv.push_str(&format!("{}\t{}\t{rate:.6}\n", row.n, row.blocks));
                    }
                }
                write_output(&path, tsv.as_bytes())?;
            }
            Ok(())
        }
        Command::Selftest { quick, inject_bias } => {
            let results = run_selftest(&SelftestOptions { quick, inject_bias });
            let mut failed = Vec::new();
            for r in &results {
                let status = if r.passed { "PASS" } else { "FAIL" };
                println!(
                    "{status} {:<28} {:>9.3} ms  {}",
                    r.name,
                    r.elapsed.as_secs_f64() * 1e3,
                    r.detail
                );
                if !r.passed {
                    failed.push(r.name);
                }
            }
            if failed.is_empty() {
                Ok(())
            } else {
                Err(Failure::Selftest(format!("failed checks: {}", failed.join(", "))))
            }
        }
    }
}

fn read_input(path: &Path) -> CliResult<Vec<u8>> {
    let io_err = |source| Failure::Io {
        path: path.display().to_string(),
        source,
    };
    if path == Path::new("-") {
        let mut buf = Vec::new();
        io::stdin().read_to_end(&mut buf).map_err(io_err)?;
        Ok(buf)
    } else {
        fs::read(path).map_err(io_err)
    }
}

fn write_output(path: &Path, data: &[u8]) -> CliResult<()> {
    let io_err = |source| Failure::Io {
        path: path.display().to_string(),
        source,
    };
    if path == Path::new("-") {
        let mut out = io::stdout().lock();
        out.write_all(data).and_then(|()| out.flush()).map_err(io_err)
    } else {
        fs::write(path, data).map_err(io_err)
    }
}

fn split_tokens(raw: &[u8]) -> CliResult<Vec<String>> {
    let text = std::str::from_utf8(raw).map_err(|e| Failure::Usage(format!("token input is not UTF-8: {e}")))?;
    Ok(text.lines().map(str::to_owned).collect())
}

fn join_tokens(tokens: &[String]) -> Vec<u8> {
    let mut out = String::new();
    for t in tokens {
        out.push_str(t);
        out.push('\n');
    }
    out.into_bytes()
}

fn byte_alphabet(protocol: &Protocol) -> CliResult<SymbolAlphabet<u8>> {
    match &protocol.alphabet_file {
        Some(path) => Ok(SymbolAlphabet::new(read_input(path)?)?),
        None => Ok(SymbolAlphabet::bytes()),
    }
}

/// Explicit file order, else the sorted distinct tokens of the input. The
/// codecs preserve the multiset of every block, so the discovered alphabet
/// of a stego stream equals that of its cover.
fn token_alphabet(protocol: &Protocol, tokens: &[String]) -> CliResult<SymbolAlphabet<String>> {
    match &protocol.alphabet_file {
        Some(path) => Ok(SymbolAlphabet::new(split_tokens(&read_input(path)?)?)?),
        None => Ok(SymbolAlphabet::sorted(tokens.iter().cloned())),
    }
}

fn scheme<S: Ord + Clone>(protocol: &Protocol, alphabet: SymbolAlphabet<S>) -> CliResult<Scheme<S>> {
    let mode = match protocol.mode {
        Mode::Randomized => CodecMode::Randomized,
        Mode::Deterministic => CodecMode::Deterministic,
        Mode::Pairwise => {
            if protocol.order_k != 0 {
                return Err(Failure::Usage("pairwise mode takes no --order-k".into()));
            }
            return Ok(Scheme::Pairwise(alphabet));
        }
    };
    let codec = BlockCodec::new(
        alphabet,
        protocol.block_n,
        EnumeratorKind::markov(protocol.order_k),
        mode,
    )
    .map_err(|e| match e {
        Error::BlockTooShort { .. } | Error::InvalidCodec(_) => Failure::Usage(e.to_string()),
        other => other.into(),
    })?;
    Ok(Scheme::Block(codec))
}

struct EmbedOptions<'a> {
    message: &'a [u8],
    seed: Option<u64>,
    allow_shortfall: bool,
}

fn embed<S>(protocol: &Protocol, alphabet: SymbolAlphabet<S>, cover: &[S], opts: &EmbedOptions) -> CliResult<Vec<S>>
where
    S: Ord + Clone + Send + Sync,
{
    let alphabet_len = alphabet.len();
    let scheme = scheme(protocol, alphabet)?;
    let (mut delta, padding) = match opts.seed {
        Some(s) => (
            FairBitSource::from_seed(s),
            FairBitSource::from_seed(s ^ PADDING_SEED_MIX),
        ),
        None => (FairBitSource::from_entropy(), FairBitSource::from_entropy()),
    };
    let mut secret = frame(opts.message, padding)?;
    let encoding = scheme.encode_stream(cover, &mut secret, &mut delta)?;
    let (framed_bits, shortfall) = (secret.framed_len(), secret.shortfall());
    if shortfall > 0 && !opts.allow_shortfall {
        return Err(Error::Shortfall { missing: shortfall }.into());
    }
    let summary: [(&str, &dyn Display); 11] = [
        ("mode", &mode_name(protocol.mode)),
        (
            "block_n",
            &if protocol.mode == Mode::Pairwise {
                2
            } else {
                protocol.block_n
            },
        ),
        ("order_k", &protocol.order_k),
        ("format", &format_name(protocol.format)),
        ("alphabet_size", &alphabet_len),
        ("cover_symbols", &cover.len()),
        ("blocks", &encoding.blocks),
        ("payload_bits", &(opts.message.len() * 8)),
        ("framed_bits", &framed_bits),
        ("bits_embedded", &encoding.bits_consumed),
        (
            "rate",
            &format!("{:.6}", encoding.bits_consumed as f64 / cover.len().max(1) as f64),
        ),
    ];
    for (k, v) in summary {
        eprintln!("{k}={v}");
    }
    if shortfall > 0 {
        eprintln!("shortfall={shortfall}");
    }
    Ok(encoding.stego)
}

fn mode_name(mode: Mode) -> &'static str {
    match mode {
        Mode::Randomized => "randomized",
        Mode::Deterministic => "deterministic",
        Mode::Pairwise => "pairwise",
    }
}

fn format_name(format: Format) -> &'static str {
    match format {
        Format::Bytes => "bytes",
        Format::Tokens => "tokens",
    }
}

struct RateRow {
    n: usize,
    blocks: usize,
    rate: Option<f64>,
}

fn analyze<S>(
    protocol: &Protocol,
    alphabet: SymbolAlphabet<S>,
    cover: &[S],
    block_sizes: &[usize],
) -> CliResult<Vec<RateRow>>
where
    S: Ord + Clone + Send + Sync + SymbolLabel,
{
    let word = alphabet.to_word(cover)?;
    let mut counts = vec![0u64; alphabet.len()];
    for &s in &word {
        counts[s] += 1;
    }
    println!("symbols={}", word.len());
    println!("alphabet_size={}", alphabet.len());
    println!("h={:.6}", empirical_entropy::<f64>(&counts));
    println!("h_min={:.6}", empirical_min_entropy::<f64>(&counts));
    let k = protocol.order_k.max(1);
    println!("h_{k}={:.6}", empirical_k_order_entropy::<f64>(&word, k));
    let profile: Vec<String> = counts
        .iter()
        .enumerate()
        .filter(|(_, &c)| c > 0)
        .map(|(i, c)| format!("{}:{c}", alphabet.symbol(i).label()))
        .collect();
    println!("frequencies={{{}}}", profile.join(", "));

    let mode = match protocol.mode {
        Mode::Deterministic => CodecMode::Deterministic,
        _ => CodecMode::Randomized,
    };
    let mut rows = Vec::new();
    for &n in block_sizes {
        let kind = EnumeratorKind::markov(protocol.order_k);
        let codec = match BlockCodec::new(alphabet.clone(), n, kind, mode) {
            Ok(c) => c,
            Err(e) => {
                println!("rate[n={n}]=skipped ({e})");
                rows.push(RateRow {
                    n,
                    blocks: 0,
                    rate: None,
                });
                continue;
            }
        };
        let blocks = word.len() / n;
        let mut total = 0.0;
        let mut refused = None;
        for block in word.chunks_exact(n) {
            match codec.class_of(block) {
                Ok(class) => total += expected_rate(&class, &codec).to_f64().unwrap_or(f64::NAN),
                Err(e) => {
                    refused = Some(e);
                    break;
                }
            }
        }
        let rate = match refused {
            Some(e) => {
                println!("rate[n={n}]=refused ({e})");
                None
            }
            None if blocks == 0 => {
                println!("rate[n={n}]=skipped (cover shorter than one block)");
                None
            }
            None => {
                let r = total / blocks as f64;
                println!("rate[n={n}]={r:.6} blocks={blocks}");
                Some(r)
            }
        };
        rows.push(RateRow { n, blocks, rate });
    }
    Ok(rows)
}

/// Printable form of a symbol in reports.
trait SymbolLabel {
    fn label(&self) -> String;
}

impl SymbolLabel for u8 {
    fn label(&self) -> String {
        if self.is_ascii_graphic() {
            (*self as char).to_string()
        } else {
            format!("0x{self:02x}")
        }
    }
}

impl SymbolLabel for String {
    fn label(&self) -> String {
        self.clone()
    }
}
