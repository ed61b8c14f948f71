//! Black-box tests for the `sisim` binary: every subcommand is driven
//! through a real process on a desk-sized configuration.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use si_core::harness::{ExperimentSpec, Scheme, CSV_HEADER};
use si_core::LdpcCode;

fn sisim(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sisim"))
        .args(args)
        .current_dir(cwd)
        .output()
        .expect("spawning sisim")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

/// A configuration small enough that every subcommand finishes in well
/// under a second: two codes of length 8, a 1x1 sweep grid, two trials.
fn tiny_config() -> String {
    ExperimentSpec {
        master_seed: 5,
        shift_blocks: 2,
        rows_per_block: 2,
        cols_per_block: 2,
        codewords: 2,
        max_shift: 1,
        schemes: vec![Scheme::Si, Scheme::Naive, Scheme::Marker { period: 2 }],
        p_ids: vec![0.0],
        p_e: vec![0.0],
        min_trials: 2,
        max_trials: 2,
        min_bit_errors: 0,
        ell_max: 30,
        detect_iters: 2,
        record_timing: false,
    }
    .to_toml_string()
    .expect("serializing the test config")
}

#[test]
fn sweep_writes_outputs_and_reruns_identically() {
    let dir = tempfile::tempdir().expect("tempdir");
    fs::write(dir.path().join("cfg.toml"), tiny_config()).expect("write config");

    let out = sisim(
        &["sweep", "--config", "cfg.toml", "--out", "first"],
        dir.path(),
    );
    assert!(
        out.status.success(),
        "sweep failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );

    let csv = fs::read_to_string(dir.path().join("first/results.csv")).expect("results.csv");
    assert_eq!(csv.lines().next(), Some(CSV_HEADER));
    assert_eq!(
        csv.lines().count(),
        4,
        "one header plus one row per scheme: {csv}"
    );

    let svg = fs::read_to_string(dir.path().join("first/plot.svg")).expect("plot.svg");
    assert!(svg.contains("<svg"), "plot.svg should be an SVG document");

    let manifest = fs::read_to_string(dir.path().join("first/run-manifest.txt")).expect("manifest");
    assert!(manifest.contains("master_seed: 5"));
    assert!(manifest.contains("[config]") && manifest.contains("[results]"));

    // The printed table mirrors the CSV rows.
    let text = stdout(&out);
    for scheme in ["si", "naive", "marker2"] {
        assert!(
            text.contains(scheme),
            "stdout should mention {scheme}: {text}"
        );
    }

    let rerun = sisim(
        &["sweep", "--config", "cfg.toml", "--out", "second"],
        dir.path(),
    );
    assert!(rerun.status.success());
    let csv2 = fs::read_to_string(dir.path().join("second/results.csv")).expect("rerun csv");
    assert_eq!(
        csv2, csv,
        "a rerun with the same config must reproduce the CSV byte for byte"
    );
}

#[test]
fn oracle_check_reports_all_pass() {
    let dir = tempfile::tempdir().expect("tempdir");
    let out = sisim(&["oracle-check", "--instances", "24"], dir.path());
    assert!(
        out.status.success(),
        "oracle-check failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = stdout(&out);
    for check in [
        "PASS detector vs path enumeration",
        "PASS decoder vs dense reference",
        "PASS bit LLR vs four-term enumeration",
        "PASS noiseless detection is exact",
        "all oracle checks passed",
    ] {
        assert!(text.contains(check), "missing '{check}' in: {text}");
    }
}

#[test]
fn rate_prints_the_exact_fraction() {
    let dir = tempfile::tempdir().expect("tempdir");
    fs::write(dir.path().join("cfg.toml"), tiny_config()).expect("write config");
    let out = sisim(&["rate", "--config", "cfg.toml"], dir.path());
    assert!(
        out.status.success(),
        "rate failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = stdout(&out);
    assert!(
        text.contains("code 1: n=8 rate=1/2"),
        "unexpected rate output: {text}"
    );
    // Each base carries one bit per component code: 2 codewords * 8 data
    // bits * 2 codes over 3 rounds of 8 bases = 2/3 bit per base.
    assert!(
        text.contains("transmission rate: 2/3"),
        "unexpected rate output: {text}"
    );
}

#[test]
fn exported_codes_parse_back_from_alist() {
    let dir = tempfile::tempdir().expect("tempdir");
    fs::write(dir.path().join("cfg.toml"), tiny_config()).expect("write config");
    let out = sisim(
        &["export-code", "--config", "cfg.toml", "--out", "codes"],
        dir.path(),
    );
    assert!(
        out.status.success(),
        "export failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    for name in ["code1.alist", "code2.alist"] {
        let text = fs::read_to_string(dir.path().join("codes").join(name)).expect(name);
        let code = LdpcCode::from_alist(&text).expect("parsing exported alist");
        assert_eq!(code.n_bits(), 8);
        assert_eq!(code.n_checks(), 4);
    }
}

#[test]
fn bad_configs_are_rejected() {
    let dir = tempfile::tempdir().expect("tempdir");

    fs::write(dir.path().join("broken.toml"), "this is not a config").expect("write");
    let out = sisim(
        &["sweep", "--config", "broken.toml", "--out", "x"],
        dir.path(),
    );
    assert!(!out.status.success(), "malformed TOML must be rejected");

    // A shift larger than the block count leaves whole rounds unusable and
    // must fail validation before any work starts.
    let bad = tiny_config().replace("max_shift = 1", "max_shift = 7");
    fs::write(dir.path().join("bad.toml"), bad).expect("write");
    let out = sisim(&["sweep", "--config", "bad.toml", "--out", "x"], dir.path());
    assert!(!out.status.success(), "invalid geometry must be rejected");
    assert!(
        !dir.path().join("x/results.csv").exists(),
        "no outputs on failure"
    );
}
