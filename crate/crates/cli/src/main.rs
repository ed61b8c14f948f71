//! `sisim`: Monte-Carlo sweeps, oracle audits, and code export for the
//! shift-interleave coding stack.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use rand::Rng;

use si_core::base::{Base, BaseDist, CodeSide, UNIFORM_DIST};
use si_core::channel::{transmit_ids, ChannelParams};
use si_core::fb_detector::{compute_dmax, forward_backward, DriftLattice};
use si_core::harness::{csv_string, run_experiment, transmission_rate, ExperimentSpec, ResultRow};
use si_core::ldpc::{LdpcCode, SpDecoderState};
use si_core::oracle;
use si_core::plot::render_svg;
use si_core::rng::{derive_chain, labels, stream};
use si_core::si_decoder::{compute_input_llr, Partner};

#[derive(Parser)]
#[command(
    name = "sisim",
    version,
    about = "Shift-interleave DNA-storage coding simulator"
)]
struct Cli {
    /// Override the master seed from the config.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    workers: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a BER/FER sweep and write results.csv, plot.svg and
    /// run-manifest.txt.
    Sweep {
        /// TOML experiment config; omitted fields take desk-scale defaults.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Output directory.
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Cross-check the fast detector, decoder and LLR paths against their
    /// brute-force reference implementations.
    OracleCheck {
        /// Number of random detector instances.
        #[arg(long, default_value_t = 60)]
        instances: usize,
    },
    /// Print the component code rates and the exact transmission rate.
    Rate {
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Write both component codes as alist files.
    ExportCode {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
}

fn main() -> Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    if let Some(workers) = cli.workers {
        rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build_global()
            .context("worker pool already initialized")?;
    }
    match cli.command {
        Command::Sweep { config, out } => sweep(load_spec(config.as_deref(), cli.seed)?, &out),
        Command::OracleCheck { instances } => oracle_check(instances, cli.seed.unwrap_or(99)),
        Command::Rate { config } => rate(&load_spec(config.as_deref(), cli.seed)?),
        Command::ExportCode { config, out } => {
            export_code(&load_spec(config.as_deref(), cli.seed)?, &out)
        }
    }
}

fn load_spec(config: Option<&Path>, seed: Option<u64>) -> Result<ExperimentSpec> {
    let mut spec = match config {
        Some(path) => {
            let text = fs::read_to_string(path)
                .with_context(|| format!("reading config {}", path.display()))?;
            ExperimentSpec::from_toml_str(&text)?
        }
        None => ExperimentSpec::default(),
    };
    if let Some(seed) = seed {
        spec.master_seed = seed;
    }
    spec.validate()?;
    Ok(spec)
}

fn build_codes(spec: &ExperimentSpec) -> Result<[LdpcCode; 2]> {
    let n = spec.n_bits();
    log::info!("constructing two rate-1/2 codes of length {n}");
    Ok([
        LdpcCode::regular_3_6_retrying(n, derive_chain(spec.master_seed, &[labels::CODE, 1]), 64)?,
        LdpcCode::regular_3_6_retrying(n, derive_chain(spec.master_seed, &[labels::CODE, 2]), 64)?,
    ])
}

fn sweep(spec: ExperimentSpec, out: &Path) -> Result<()> {
    fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    log::info!(
        "sweep: {} scheme(s), {} x {} grid, {}..{} trials per point",
        spec.schemes.len(),
        spec.p_ids.len(),
        spec.p_e.len(),
        spec.min_trials,
        spec.max_trials
    );
    let rows = run_experiment(&spec)?;

    let csv_path = out.join("results.csv");
    fs::write(&csv_path, csv_string(&rows))?;
    let svg_path = out.join("plot.svg");
    fs::write(&svg_path, render_svg(&rows, "BER over the IDS grid"))?;
    let manifest_path = out.join("run-manifest.txt");
    fs::write(&manifest_path, manifest(&spec, &rows)?)?;

    for row in &rows {
        println!(
            "{:>10}  p_ids={:<7} p_e={:<5} trials={:<4} ber={:.3e} fer={:.3e} iters/round={:.2}",
            row.scheme, row.p_ids, row.p_e, row.trials, row.ber, row.fer, row.avg_round_iterations
        );
    }
    println!(
        "wrote {}, {}, {}",
        csv_path.display(),
        svg_path.display(),
        manifest_path.display()
    );
    Ok(())
}

fn manifest(spec: &ExperimentSpec, rows: &[ResultRow]) -> Result<String> {
    use std::fmt::Write as _;
    let mut text = String::new();
    writeln!(text, "sisim {} run manifest", env!("CARGO_PKG_VERSION"))?;
    writeln!(text, "master_seed: {}", spec.master_seed)?;
    writeln!(text, "grid points: {}", rows.len())?;
    writeln!(text, "\n[config]")?;
    text.push_str(&spec.to_toml_string()?);
    writeln!(text, "\n[results]")?;
    text.push_str(&csv_string(rows));
    Ok(text)
}

fn rate(spec: &ExperimentSpec) -> Result<()> {
    let [c1, c2] = build_codes(spec)?;
    let r_tx = transmission_rate(spec.codewords, spec.max_shift, c1.rate(), c2.rate());
    println!("code 1: n={} rate={}", c1.n_bits(), c1.rate());
    println!("code 2: n={} rate={}", c2.n_bits(), c2.rate());
    println!(
        "transmission rate: {} = {:.6} ({} codewords, {} shift overhead columns)",
        r_tx,
        *r_tx.numer() as f64 / *r_tx.denom() as f64,
        spec.codewords,
        spec.max_shift
    );
    Ok(())
}

fn export_code(spec: &ExperimentSpec, out: &Path) -> Result<()> {
    fs::create_dir_all(out)?;
    let codes = build_codes(spec)?;
    for (i, code) in codes.iter().enumerate() {
        let path = out.join(format!("code{}.alist", i + 1));
        fs::write(&path, code.to_alist())?;
        println!(
            "wrote {} (n={}, checks={})",
            path.display(),
            code.n_bits(),
            code.n_checks()
        );
    }
    Ok(())
}

/// Re-run the reference cross-checks that also gate the test suite, at a
/// scale suitable for an interactive audit.
fn oracle_check(instances: usize, seed: u64) -> Result<()> {
    let mut failures = 0usize;

    // Detector versus event-path enumeration.
    let mut rng = stream(seed);
    let mut worst = 0.0f64;
    for trial in 0..instances {
        let n = 3 + trial % 4;
        let d_max = 1 + trial % 2;
        let p_ids = if trial % 2 == 0 { 0.05 } else { 0.2 };
        let params = ChannelParams::from_ids_split(p_ids, 0.0)?;
        let lattice = DriftLattice::new(d_max, params);
        let priors: Vec<BaseDist> = (0..n)
            .map(|_| {
                let mut t = [0.0; 4];
                for x in &mut t {
                    *x = rng.gen_range(0.05..1.0);
                }
                let s: f64 = t.iter().sum();
                for x in &mut t {
                    *x /= s;
                }
                t
            })
            .collect();
        let column: Vec<Base> = (0..n)
            .map(|_| Base::from_index(rng.gen_range(0..4)))
            .collect();
        let mut received = transmit_ids(&column, &params, &mut rng);
        received.truncate(n + d_max);
        let fast = forward_backward(&received, &priors, &lattice);
        let slow = oracle::fb_reference(&received, &priors, d_max, &params);
        for (a, b) in fast.iter().zip(&slow) {
            for v in 0..4 {
                worst = worst.max((a[v] - b[v]).abs());
            }
        }
    }
    report("detector vs path enumeration", worst, 1e-9, &mut failures);

    // Decoder versus dense flooding reference.
    let mut worst = 0.0f64;
    for trial in 0..5 {
        let code = LdpcCode::regular_3_6_retrying(12, seed + trial, 32)?;
        let h = oracle::dense_parity(&code);
        let priors: Vec<f64> = (0..12).map(|_| rng.gen_range(-8.0..8.0)).collect();
        let mut state = SpDecoderState::new(&code);
        for it in 1..=5 {
            code.sp_iterate(&mut state, &priors)?;
            let reference = oracle::sp_reference(&h, &priors, it);
            let (b2c, c2b) = state.messages();
            for c in 0..code.n_checks() {
                for (slot, &b) in code.check_neighbors(c).iter().enumerate() {
                    let e = code.edge_id(c, slot);
                    worst = worst.max((b2c[e] - reference.bit_to_check[c][b as usize]).abs());
                    worst = worst.max((c2b[e] - reference.check_to_bit[c][b as usize]).abs());
                }
            }
            for (a, b) in state.posteriors().iter().zip(&reference.posteriors) {
                worst = worst.max((a - b).abs());
            }
        }
    }
    report("decoder vs dense reference", worst, 1e-12, &mut failures);

    // Bit LLR assembly versus four-term enumeration.
    let mut worst = 0.0f64;
    for _ in 0..200 {
        let mut gamma = [0.0; 4];
        for x in &mut gamma {
            *x = rng.gen_range(0.0..1.0);
        }
        let side = CodeSide::from_index(rng.gen_range(0..2));
        let (fast, slow) = if rng.gen_bool(0.5) {
            let q = rng.gen_range(-10.0..10.0);
            (
                compute_input_llr(&gamma, side, Partner::Cbn { q })?,
                oracle::input_llr_reference(&gamma, side, Some(q), None),
            )
        } else {
            let s = rng.gen_range(0..2u8);
            (
                compute_input_llr(&gamma, side, Partner::Kbn { value: s })?,
                oracle::input_llr_reference(&gamma, side, None, Some(s)),
            )
        };
        worst = worst.max((fast - slow).abs());
    }
    report(
        "bit LLR vs four-term enumeration",
        worst,
        1e-9,
        &mut failures,
    );

    // Uninformative-prior sanity: uniform priors, no noise, exact recovery.
    let params = ChannelParams::new(0.0, 0.0, 0.0, 0.0)?;
    let lattice = DriftLattice::new(compute_dmax(8, 0.0, 0.0), params);
    let column: Vec<Base> = (0..8).map(|i| Base::from_index(i % 4)).collect();
    let gammas = forward_backward(&column, &vec![UNIFORM_DIST; 8], &lattice);
    let exact = gammas.iter().zip(&column).all(|(g, b)| g[b.index()] == 1.0);
    println!(
        "{} noiseless detection is exact",
        if exact { "PASS" } else { "FAIL" }
    );
    failures += usize::from(!exact);

    if failures > 0 {
        bail!("{failures} oracle check(s) failed");
    }
    println!("all oracle checks passed");
    Ok(())
}

fn report(name: &str, worst: f64, tol: f64, failures: &mut usize) {
    let ok = worst <= tol;
    println!(
        "{} {name}: worst |delta| = {worst:.3e} (tolerance {tol:.0e})",
        if ok { "PASS" } else { "FAIL" }
    );
    *failures += usize::from(!ok);
}
