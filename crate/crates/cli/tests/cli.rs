use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn typestego(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_typestego"))
        .args(args)
        .env_remove("TYPESTEGO_SEED")
        .output()
        .expect("binary runs")
}

fn path(dir: &TempDir, name: &str) -> String {
    dir.path().join(name).display().to_string()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn summary_value(out: &Output, key: &str) -> String {
    let prefix = format!("{key}=");
    stderr(out)
        .lines()
        .find_map(|l| l.strip_prefix(&prefix).map(str::to_owned))
        .unwrap_or_else(|| panic!("no {key} in summary:\n{}", stderr(out)))
}

/// Bernoulli(0.3) bytes over {'0','1'}, from a fixed LCG.
fn bernoulli_cover(len: usize) -> Vec<u8> {
    let mut x: u64 = 0x2545_f491_4f6c_dd1d;
    (0..len)
        .map(|_| {
            x = x
                .wrapping_mul(6_364_136_223_846_793_005)
                .wrapping_add(1_442_695_040_888_963_407);
            let u = (x >> 11) as f64 / (1u64 << 53) as f64;
            if u < 0.3 {
                b'1'
            } else {
                b'0'
            }
        })
        .collect()
}

fn write(p: &str, data: &[u8]) {
    fs::write(Path::new(p), data).unwrap();
}

#[test]
fn round_trip_bytes_all_modes() {
    let dir = TempDir::new().unwrap();
    let (cover, secret, stego, back) = (path(&dir, "c"), path(&dir, "s"), path(&dir, "x"), path(&dir, "b"));
    write(&cover, &bernoulli_cover(20_000));
    write(&secret, b"meet me by the old oak");
    for mode in ["randomized", "deterministic", "pairwise"] {
        for k in ["0", "1"] {
            if mode == "pairwise" && k == "1" {
                continue;
            }
            let common = ["--block-n", "32", "--order-k", k, "--mode", mode];
            let e = typestego(
                &[
                    &[
                        "embed", "--cover", &cover, "--secret", &secret, "--out", &stego, "--seed", "5",
                    ][..],
                    &common,
                ]
                .concat(),
            );
            assert!(e.status.success(), "{mode} k={k}: {}", stderr(&e));
            assert_eq!(summary_value(&e, "mode"), mode);
            assert_eq!(summary_value(&e, "payload_bits"), "176");
            let x = typestego(&[&["extract", "--stego", &stego, "--out", &back][..], &common].concat());
            assert!(x.status.success(), "{mode} k={k}: {}", stderr(&x));
            assert_eq!(fs::read(&back).unwrap(), b"meet me by the old oak");
            // symbol counts are preserved
            let mut a = fs::read(&cover).unwrap();
            let mut b = fs::read(&stego).unwrap();
            a.sort_unstable();
            b.sort_unstable();
            assert_eq!(a, b);
        }
    }
}

#[test]
fn worked_example_block_in_token_mode() {
    let dir = TempDir::new().unwrap();
    let (cover, empty) = (path(&dir, "c"), path(&dir, "e"));
    write(&cover, b"b\na\nc\n");
    write(&empty, b"");
    // The framed secret starts with zero bits, so d = 1 yields "cab" and
    // d = 2 yields "abc".
    let mut seen_cab = false;
    for seed in 0..16 {
        let out = typestego(&[
            "embed",
            "--cover",
            &cover,
            "--secret",
            &empty,
            "--out",
            "-",
            "--format",
            "tokens",
            "--block-n",
            "3",
            "--seed",
            &seed.to_string(),
            "--allow-shortfall",
        ]);
        assert!(out.status.success(), "{}", stderr(&out));
        let block = stdout(&out);
        assert!(block == "c\na\nb\n" || block == "a\nb\nc\n", "{block:?}");
        seen_cab |= block == "c\na\nb\n";
    }
    assert!(seen_cab);
}

#[test]
fn seed_flag_overrides_environment() {
    let dir = TempDir::new().unwrap();
    let (cover, secret) = (path(&dir, "c"), path(&dir, "s"));
    write(&cover, &bernoulli_cover(4096));
    write(&secret, b"x");
    let run = |env: Option<&str>, flag: Option<&str>| {
        let mut cmd = Command::new(env!("CARGO_BIN_EXE_typestego"));
        cmd.args([
            "embed",
            "--cover",
            &cover,
            "--secret",
            &secret,
            "--out",
            "-",
            "--block-n",
            "64",
        ]);
        cmd.env_remove("TYPESTEGO_SEED");
        if let Some(s) = env {
            cmd.env("TYPESTEGO_SEED", s);
        }
        if let Some(s) = flag {
            cmd.args(["--seed", s]);
        }
        let out = cmd.output().unwrap();
        assert!(out.status.success());
        out.stdout
    };
    assert_eq!(run(Some("9"), None), run(None, Some("9")));
    assert_eq!(run(Some("1"), Some("9")), run(None, Some("9")));
    assert_ne!(run(None, Some("1")), run(None, Some("9")));
}

#[test]
fn empty_secret_reports_zero_payload() {
    let dir = TempDir::new().unwrap();
    let (cover, empty) = (path(&dir, "c"), path(&dir, "e"));
    write(&cover, &bernoulli_cover(1024));
    write(&empty, b"");
    let out = typestego(&[
        "embed",
        "--cover",
        &cover,
        "--secret",
        &empty,
        "--out",
        "-",
        "--block-n",
        "64",
        "--seed",
        "1",
    ]);
    assert!(out.status.success());
    assert_eq!(summary_value(&out, "payload_bits"), "0");
    assert_eq!(summary_value(&out, "framed_bits"), "32");
    assert_eq!(out.stdout.len(), 1024);
}

#[test]
fn exit_codes() {
    let dir = TempDir::new().unwrap();
    let (cover, secret, stego) = (path(&dir, "c"), path(&dir, "s"), path(&dir, "x"));
    write(&cover, b"0101100110");
    write(&secret, b"far too long for ten symbols");

    let short = typestego(&[
        "embed",
        "--cover",
        &cover,
        "--secret",
        &secret,
        "--out",
        &stego,
        "--block-n",
        "5",
    ]);
    assert_eq!(short.status.code(), Some(3));
    assert!(stderr(&short).contains("short"), "{}", stderr(&short));

    assert_eq!(typestego(&["embed", "--cover", &cover]).status.code(), Some(2));
    assert_eq!(typestego(&["frobnicate"]).status.code(), Some(2));
    let bad_n = typestego(&[
        "embed",
        "--cover",
        &cover,
        "--secret",
        &secret,
        "--out",
        &stego,
        "--block-n",
        "1",
    ]);
    assert_eq!(bad_n.status.code(), Some(2));
    let bad_k = typestego(&[
        "embed",
        "--cover",
        &cover,
        "--secret",
        &secret,
        "--out",
        &stego,
        "--block-n",
        "4",
        "--order-k",
        "2",
    ]);
    assert_eq!(bad_k.status.code(), Some(2));

    // garbled stego: prefix declares more bits than are present
    write(&stego, b"1111111111");
    let x = typestego(&[
        "extract",
        "--stego",
        &stego,
        "--out",
        "-",
        "--block-n",
        "5",
        "--mode",
        "deterministic",
    ]);
    assert_eq!(x.status.code(), Some(3));

    assert_eq!(typestego(&["selftest", "--quick"]).status.code(), Some(0));
    let biased = typestego(&["selftest", "--quick", "--inject-bias"]);
    assert_eq!(biased.status.code(), Some(4));
    assert!(stderr(&biased).contains("iid_security_randomized"));
}

#[test]
fn markov_scale_refusal_is_a_resource_error() {
    let dir = TempDir::new().unwrap();
    let (cover, secret) = (path(&dir, "c"), path(&dir, "s"));
    let bytes: Vec<u8> = (0..8192u32)
        .map(|i| (i.wrapping_mul(2_654_435_761) >> 7) as u8)
        .collect();
    write(&cover, &bytes);
    write(&secret, b"hi");
    let out = typestego(&[
        "embed",
        "--cover",
        &cover,
        "--secret",
        &secret,
        "--out",
        "-",
        "--block-n",
        "4096",
        "--order-k",
        "1",
    ]);
    assert_eq!(out.status.code(), Some(3), "{}", stderr(&out));
}

#[test]
fn analyze_reports_profile_and_entropies() {
    let dir = TempDir::new().unwrap();
    let (cover, table) = (path(&dir, "c"), path(&dir, "t"));
    let tokens: String = "aababaaaabbaaaaabb".chars().map(|c| format!("{c}\n")).collect();
    write(&cover, tokens.as_bytes());
    let out = typestego(&["analyze", "--cover", &cover, "--format", "tokens", "--table", &table]);
    assert!(out.status.success());
    assert!(stdout(&out).contains("frequencies={a:12, b:6}"), "{}", stdout(&out));

    write(&cover, &[b'z'; 500]);
    let out = typestego(&["analyze", "--cover", &cover, "--block-sizes", "16,64"]);
    let text = stdout(&out);
    for line in [
        "h=0.000000",
        "h_min=0.000000",
        "h_1=0.000000",
        "rate[n=16]=0.000000",
        "rate[n=64]=0.000000",
    ] {
        assert!(text.contains(line), "{line} missing:\n{text}");
    }
}

#[test]
fn analyze_bernoulli_entropy() {
    let dir = TempDir::new().unwrap();
    let cover = path(&dir, "c");
    write(&cover, &bernoulli_cover(1_000_000));
    let out = typestego(&["analyze", "--cover", &cover, "--block-sizes", "64"]);
    assert!(out.status.success());
    let h: f64 = stdout(&out)
        .lines()
        .find_map(|l| l.strip_prefix("h="))
        .unwrap()
        .parse()
        .unwrap();
    assert!((h - 0.8813).abs() < 0.01, "h = {h}");
}

#[test]
fn million_symbol_round_trip() {
    let dir = TempDir::new().unwrap();
    let (cover, secret, stego, back) = (path(&dir, "c"), path(&dir, "s"), path(&dir, "x"), path(&dir, "b"));
    write(&cover, &bernoulli_cover(1_000_000));
    let msg: Vec<u8> = (0..10_240u32).map(|i| (i * 7 + 3) as u8).collect();
    write(&secret, &msg);
    let e = typestego(&[
        "embed",
        "--cover",
        &cover,
        "--secret",
        &secret,
        "--out",
        &stego,
        "--block-n",
        "64",
        "--seed",
        "3",
    ]);
    assert!(e.status.success(), "{}", stderr(&e));
    let x = typestego(&["extract", "--stego", &stego, "--out", &back, "--block-n", "64"]);
    assert!(x.status.success(), "{}", stderr(&x));
    assert_eq!(fs::read(&back).unwrap(), msg);
}
