//! Monte-Carlo BER/FER sweeps over a channel grid.
//!
//! Every random quantity is derived from the master seed through labeled
//! streams: grid points key off the exact bit patterns of their channel
//! probabilities, trials key off the grid seed and their index.  A trial's
//! randomness never depends on how many workers ran it or in which order,
//! so sweep results are reproducible byte for byte (wall-clock columns are
//! zeroed unless timing is requested).

use std::fmt::Write as _;
use std::path::Path;
use std::time::Instant;

use num_rational::Ratio;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::baselines::{
    encode_marker, naive_config, BaselineError, IterativeDecoder, MarkerLayout,
};
use crate::channel::{ChannelError, ChannelParams, ChannelRng};
use crate::ldpc::{LdpcCode, LdpcError};
use crate::rng::{derive, derive_chain, labels, stream};
use crate::si_decoder::{ber_evaluate, DecodeOutput, SiDecoder, SiDecoderError};
use crate::si_encoder::{encode_all, pack_codewords, SiConfig, SiError};
use rand::Rng;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("invalid experiment: {0}")]
    InvalidSpec(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("config parse error: {0}")]
    Toml(#[from] toml::de::Error),
    #[error("config serialize error: {0}")]
    TomlSer(#[from] toml::ser::Error),
    #[error(transparent)]
    Channel(#[from] ChannelError),
    #[error(transparent)]
    Ldpc(#[from] LdpcError),
    #[error(transparent)]
    Layout(#[from] SiError),
    #[error(transparent)]
    Decode(#[from] SiDecoderError),
    #[error(transparent)]
    Baseline(#[from] BaselineError),
}

/// Which transmission scheme a sweep row measures.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    /// Shifted layout with round-sequential decoding.
    Si,
    /// Same codes and mapping, no shifts, per-pair iterative decoding.
    Naive,
    /// Unshifted layout with marker symbols every `period` payload symbols.
    Marker { period: usize },
}

impl Scheme {
    pub fn label(&self) -> String {
        match self {
            Scheme::Si => "si".into(),
            Scheme::Naive => "naive".into(),
            Scheme::Marker { period } => format!("marker{period}"),
        }
    }
}

/// Full description of a sweep; deserializable from TOML with every field
/// optional (missing fields take the desk-scale defaults).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentSpec {
    pub master_seed: u64,
    /// Shift blocks (m).
    pub shift_blocks: usize,
    /// Rows per block (s).
    pub rows_per_block: usize,
    /// Columns per block (d).
    pub cols_per_block: usize,
    /// Codewords per component code (L).
    pub codewords: usize,
    /// Largest shift (T_max); the staircase design requires m - 1.
    pub max_shift: usize,
    pub schemes: Vec<Scheme>,
    pub p_ids: Vec<f64>,
    pub p_e: Vec<f64>,
    pub min_trials: usize,
    pub max_trials: usize,
    /// Keep adding trial batches until this many bit errors accumulate (or
    /// max_trials is reached).
    pub min_bit_errors: u64,
    pub ell_max: usize,
    /// Detection passes granted to the iterative baseline decoders.
    pub detect_iters: usize,
    /// Record wall-clock time in result rows; off by default so identical
    /// sweeps produce identical bytes.
    pub record_timing: bool,
}

impl Default for ExperimentSpec {
    fn default() -> Self {
        ExperimentSpec {
            master_seed: 7,
            shift_blocks: 10,
            rows_per_block: 10,
            cols_per_block: 100,
            codewords: 20,
            max_shift: 9,
            schemes: vec![Scheme::Si],
            p_ids: vec![0.02],
            p_e: vec![0.0],
            min_trials: 8,
            max_trials: 64,
            min_bit_errors: 100,
            ell_max: 100,
            detect_iters: 10,
            record_timing: false,
        }
    }
}

impl ExperimentSpec {
    pub fn from_toml_str(text: &str) -> Result<Self, HarnessError> {
        let spec: ExperimentSpec = toml::from_str(text)?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn to_toml_string(&self) -> Result<String, HarnessError> {
        Ok(toml::to_string_pretty(self)?)
    }

    pub fn n_bits(&self) -> usize {
        self.shift_blocks * self.rows_per_block * self.cols_per_block
    }

    pub fn rows(&self) -> usize {
        self.shift_blocks * self.rows_per_block
    }

    fn padding_seed(&self) -> u64 {
        derive(self.master_seed, labels::PADDING)
    }

    pub fn si_config(&self) -> SiConfig {
        SiConfig::staircase(
            self.shift_blocks,
            self.rows_per_block,
            self.cols_per_block,
            self.codewords,
            self.padding_seed(),
        )
    }

    pub fn naive_layout(&self) -> SiConfig {
        naive_config(
            self.rows(),
            self.cols_per_block,
            self.codewords,
            self.padding_seed(),
        )
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        let bad = |msg: String| Err(HarnessError::InvalidSpec(msg));
        if self.shift_blocks == 0
            || self.rows_per_block == 0
            || self.cols_per_block == 0
            || self.codewords == 0
        {
            return bad("all dimensions must be positive".into());
        }
        if self.schemes.is_empty() {
            return bad("at least one scheme is required".into());
        }
        if self.schemes.contains(&Scheme::Si) && self.max_shift != self.shift_blocks - 1 {
            return bad(format!(
                "the staircase design requires max_shift = shift_blocks - 1, got {} vs {}",
                self.max_shift, self.shift_blocks
            ));
        }
        for scheme in &self.schemes {
            if let Scheme::Marker { period } = scheme {
                if *period == 0 {
                    return bad("marker period must be at least 1".into());
                }
            }
        }
        if self.p_ids.is_empty() || self.p_e.is_empty() {
            return bad("the channel grid must not be empty".into());
        }
        for &p in self.p_ids.iter().chain(&self.p_e) {
            if !(0.0..=1.0).contains(&p) || !p.is_finite() {
                return bad(format!("channel probability {p} out of range"));
            }
        }
        if self.min_trials > self.max_trials || self.max_trials == 0 {
            return bad(format!(
                "need 1 <= min_trials <= max_trials, got {} / {}",
                self.min_trials, self.max_trials
            ));
        }
        if self.ell_max == 0 {
            return bad("ell_max must be at least 1".into());
        }
        Ok(())
    }
}

/// Information bits per transmitted base: both code rates, diluted by the
/// shift overhead columns.
pub fn transmission_rate(
    codewords: usize,
    max_shift: usize,
    r1: Ratio<u64>,
    r2: Ratio<u64>,
) -> Ratio<u64> {
    (r1 + r2) * Ratio::new(codewords as u64, (codewords + max_shift) as u64)
}

/// One aggregated grid point of a sweep.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ResultRow {
    pub scheme: String,
    pub p_ids: f64,
    pub p_e: f64,
    pub trials: u64,
    pub total_bits: u64,
    pub bit_errors: u64,
    pub ber: f64,
    pub frame_errors: u64,
    pub fer: f64,
    pub avg_round_iterations: f64,
    pub wall_time_s: f64,
    pub seed: u64,
}

#[derive(Default)]
struct Aggregate {
    trials: u64,
    bits: u64,
    bit_errors: u64,
    frames: u64,
    frame_errors: u64,
    iterations: u64,
    rounds: u64,
}

struct TrialOutcome {
    bits: u64,
    bit_errors: u64,
    frames: u64,
    frame_errors: u64,
    iterations: u64,
    rounds: u64,
}

/// Run the whole sweep; rows appear in scheme-major, then p_ids, then p_e
/// order.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<Vec<ResultRow>, HarnessError> {
    spec.validate()?;
    let n = spec.n_bits();
    let c1 =
        LdpcCode::regular_3_6_retrying(n, derive_chain(spec.master_seed, &[labels::CODE, 1]), 64)?;
    let c2 =
        LdpcCode::regular_3_6_retrying(n, derive_chain(spec.master_seed, &[labels::CODE, 2]), 64)?;
    let codes = [&c1, &c2];
    let mut rows = Vec::new();
    for scheme in &spec.schemes {
        for &p_ids in &spec.p_ids {
            for &p_e in &spec.p_e {
                rows.push(run_grid_point(spec, codes, *scheme, p_ids, p_e)?);
            }
        }
    }
    Ok(rows)
}

fn run_grid_point(
    spec: &ExperimentSpec,
    codes: [&LdpcCode; 2],
    scheme: Scheme,
    p_ids: f64,
    p_e: f64,
) -> Result<ResultRow, HarnessError> {
    let params = ChannelParams::from_ids_split(p_ids, p_e)?;
    let grid_seed = derive_chain(
        spec.master_seed,
        &[labels::GRID, p_ids.to_bits(), p_e.to_bits()],
    );
    let start = Instant::now();
    let mut agg = Aggregate::default();
    let mut next_trial = 0usize;
    loop {
        let done = agg.trials as usize >= spec.max_trials
            || (agg.trials as usize >= spec.min_trials && agg.bit_errors >= spec.min_bit_errors);
        if done {
            break;
        }
        let batch = (spec.max_trials - agg.trials as usize).min(8);
        let outcomes: Vec<TrialOutcome> = (next_trial..next_trial + batch)
            .into_par_iter()
            .map(|idx| {
                let trial_seed = derive_chain(grid_seed, &[labels::TRIAL, idx as u64]);
                run_trial(spec, codes, scheme, params, trial_seed)
            })
            .collect::<Result<_, _>>()?;
        for o in outcomes {
            agg.trials += 1;
            agg.bits += o.bits;
            agg.bit_errors += o.bit_errors;
            agg.frames += o.frames;
            agg.frame_errors += o.frame_errors;
            agg.iterations += o.iterations;
            agg.rounds += o.rounds;
        }
        next_trial += batch;
    }
    Ok(ResultRow {
        scheme: scheme.label(),
        p_ids,
        p_e,
        trials: agg.trials,
        total_bits: agg.bits,
        bit_errors: agg.bit_errors,
        ber: agg.bit_errors as f64 / agg.bits as f64,
        frame_errors: agg.frame_errors,
        fer: agg.frame_errors as f64 / agg.frames as f64,
        avg_round_iterations: agg.iterations as f64 / agg.rounds as f64,
        wall_time_s: if spec.record_timing {
            start.elapsed().as_secs_f64()
        } else {
            0.0
        },
        seed: grid_seed,
    })
}

fn random_codewords(code: &LdpcCode, count: usize, rng: &mut impl Rng) -> Vec<Vec<u8>> {
    (0..count)
        .map(|_| {
            let data: Vec<u8> = (0..code.data_len())
                .map(|_| rng.gen_range(0..2u8))
                .collect();
            code.encode(&data).expect("data length matches the code")
        })
        .collect()
}

fn run_trial(
    spec: &ExperimentSpec,
    codes: [&LdpcCode; 2],
    scheme: Scheme,
    params: ChannelParams,
    trial_seed: u64,
) -> Result<TrialOutcome, HarnessError> {
    let mut data_rng = stream(derive(trial_seed, labels::DATA));
    let cfg = match scheme {
        Scheme::Si => spec.si_config(),
        Scheme::Naive | Scheme::Marker { .. } => spec.naive_layout(),
    };
    let cw1 = random_codewords(codes[0], cfg.codewords, &mut data_rng);
    let cw2 = random_codewords(codes[1], cfg.codewords, &mut data_rng);
    let (x, meta) = encode_all(&cw1, &cw2, &cfg)?;
    let channel_rng = ChannelRng::new(trial_seed);

    let out: DecodeOutput = match scheme {
        Scheme::Si => {
            let pool = crate::channel::transmit_pool(&x, &params, &channel_rng);
            SiDecoder::new(codes, &meta, params, spec.ell_max)?.decode_all(&pool)?
        }
        Scheme::Naive => {
            let pool = crate::channel::transmit_pool(&x, &params, &channel_rng);
            IterativeDecoder::new(codes, &meta, params, None, spec.ell_max, spec.detect_iters)?
                .decode_all(&pool)?
        }
        Scheme::Marker { period } => {
            let layout = MarkerLayout::new(period, derive(spec.master_seed, labels::MARKER))
                .map_err(HarnessError::Baseline)?;
            let expanded = encode_marker(&x, &layout);
            let pool = crate::channel::transmit_pool(&expanded, &params, &channel_rng);
            IterativeDecoder::new(
                codes,
                &meta,
                params,
                Some(&layout),
                spec.ell_max,
                spec.detect_iters,
            )?
            .decode_all(&pool)?
        }
    };

    let mut bit_errors = 0u64;
    let mut frame_errors = 0u64;
    for (u, side) in [&cw1, &cw2].into_iter().enumerate() {
        let truth = pack_codewords(side, &cfg)?;
        let (be, fe) = ber_evaluate(&out.estimates[u], &truth, cfg.cols_per_block);
        bit_errors += be;
        frame_errors += fe;
    }
    Ok(TrialOutcome {
        bits: 2 * (cfg.codewords as u64) * (cfg.n_bits() as u64),
        bit_errors,
        frames: 2 * cfg.codewords as u64,
        frame_errors,
        iterations: out.total_iterations() as u64,
        rounds: out.rounds.len() as u64,
    })
}

pub const CSV_HEADER: &str = "scheme,p_ids,p_e,trials,total_bits,bit_errors,ber,frame_errors,fer,avg_round_iterations,wall_time_s,seed";

/// Render rows as CSV; floating columns use fixed formatting so equal runs
/// produce equal bytes.
pub fn csv_string(rows: &[ResultRow]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{:.6e},{},{:.6e},{:.4},{:.3},{}",
            r.scheme,
            r.p_ids,
            r.p_e,
            r.trials,
            r.total_bits,
            r.bit_errors,
            r.ber,
            r.frame_errors,
            r.fer,
            r.avg_round_iterations,
            r.wall_time_s,
            r.seed
        )
        .expect("writing to a String cannot fail");
    }
    out
}

pub fn write_csv(rows: &[ResultRow], path: &Path) -> Result<(), HarnessError> {
    Ok(std::fs::write(path, csv_string(rows))?)
}
