//! Sequential estimation of the codeword matrices.
//!
//! Round `t` first re-detects every column that carries bits of the `t`-th
//! codewords (block columns `t .. t+T_max`), then runs the two component
//! decoders in tandem: each inner iteration recomputes the a-priori LLRs of
//! decoder `u` from the likelihood tuples and the partner decoder's freshest
//! extrinsics, performs one flooding iteration, and publishes the new
//! extrinsics before the partner moves.  Once both syndromes pass (or the
//! iteration cap is hit) the base priors of all touched columns are refreshed
//! from the final extrinsics, which is what lets later rounds see earlier
//! codewords as quasi-known synchronization symbols.

use std::time::Instant;

use serde::Serialize;
use thiserror::Error;

use crate::base::{normalize, Base, BaseDist, CodeSide};
use crate::channel::{ChannelParams, ReceivedPool};
use crate::fb_detector::{detect_column_set, DriftLattice};
use crate::ldpc::{LdpcCode, LdpcError, SpDecoderState};
use crate::matrix::BitMatrix;
use crate::si_encoder::{pack_codewords, EncodeMetadata, SiError};
use crate::{clamp_llr, LLR_CLAMP};

#[derive(Debug, Error)]
pub enum SiDecoderError {
    #[error("likelihood tuple is all zero")]
    DegenerateGamma,
    #[error("likelihood tuple is all zero at pre-interleave position ({row}, {col})")]
    DetectorFault { row: usize, col: usize },
    #[error("component code {side:?} has length {code}, the layout expects {layout}")]
    CodeLengthMismatch {
        side: CodeSide,
        code: usize,
        layout: usize,
    },
    #[error("received pool has {got} columns of source length {got_len}, the layout expects {expected} of {expected_len}")]
    PoolShape {
        expected: usize,
        got: usize,
        expected_len: usize,
        got_len: usize,
    },
    #[error(transparent)]
    Config(#[from] SiError),
    #[error(transparent)]
    Ldpc(#[from] LdpcError),
}

/// One endpoint of a mapping node: either a codeword bit (which round, which
/// bit index) or a shared padding bit with its value.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BitRef {
    Code { round: u32, bit: u32 },
    Known { value: u8 },
}

/// For every pre-interleave position, the two bits its base covers.
pub struct MappingNodeIndex {
    refs: Vec<[BitRef; 2]>,
    rows: usize,
    cols: usize,
}

impl MappingNodeIndex {
    pub fn build(meta: &EncodeMetadata) -> Self {
        let cfg = &meta.config;
        let (rows, cols) = (cfg.rows(), cfg.total_cols());
        let (s, d) = (cfg.rows_per_block, cfg.cols_per_block);
        let mut refs = Vec::with_capacity(rows * cols);
        for k in 0..rows {
            let i = cfg.block_of_row(k);
            for z in 0..cols {
                let block_col = z / d;
                let make = |side: CodeSide| {
                    let u = side.index();
                    if cfg.is_padding(side, i, block_col) {
                        BitRef::Known {
                            value: meta.padding_bits[u].get(k, z),
                        }
                    } else {
                        BitRef::Code {
                            round: (block_col - cfg.shifts[u][i]) as u32,
                            bit: (i * s * d + (k % s) * d + (z % d)) as u32,
                        }
                    }
                };
                refs.push([make(CodeSide::First), make(CodeSide::Second)]);
            }
        }
        MappingNodeIndex { refs, rows, cols }
    }

    #[inline]
    pub fn at(&self, k: usize, z: usize) -> &[BitRef; 2] {
        &self.refs[k * self.cols + z]
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }
}

/// All beliefs threaded through the rounds: base priors and likelihoods in
/// pre-interleave coordinates, plus per-round extrinsics, hard decisions,
/// and success flags for both component codes.
pub struct BeliefState {
    pub rows: usize,
    pub cols: usize,
    /// π(k,z,·), row-major over (k, z).
    pub pi: Vec<BaseDist>,
    /// γ(k,z,·), row-major over (k, z).
    pub gamma: Vec<BaseDist>,
    /// Extrinsic LLRs per side and round; zero until the round has run.
    pub q: [Vec<Vec<f64>>; 2],
    pub hard: [Vec<Vec<u8>>; 2],
    pub decoded: [Vec<bool>; 2],
}

impl BeliefState {
    pub fn initialize(meta: &EncodeMetadata, index: &MappingNodeIndex) -> Self {
        let cfg = &meta.config;
        let (rows, cols) = (cfg.rows(), cfg.total_cols());
        let n = cfg.n_bits();
        let uniform = [0.25f64; 4];
        let mut pi = vec![uniform; rows * cols];
        for k in 0..rows {
            for z in 0..cols {
                let refs = index.at(k, z);
                // Known endpoints constrain the base; distribute the prior
                // uniformly over the remaining candidates.
                let mut tup = [0.0f64; 4];
                for (v, slot) in tup.iter_mut().enumerate() {
                    let base = Base::from_index(v);
                    let consistent = CodeSide::BOTH.iter().all(|&side| match refs[side.index()] {
                        BitRef::Known { value } => base.bit(side) as u8 == value,
                        BitRef::Code { .. } => true,
                    });
                    *slot = consistent as u8 as f64;
                }
                normalize(&mut tup);
                pi[k * cols + z] = tup;
            }
        }
        BeliefState {
            rows,
            cols,
            pi,
            gamma: vec![uniform; rows * cols],
            q: [
                vec![vec![0.0; n]; cfg.codewords],
                vec![vec![0.0; n]; cfg.codewords],
            ],
            hard: [
                vec![vec![0u8; n]; cfg.codewords],
                vec![vec![0u8; n]; cfg.codewords],
            ],
            decoded: [vec![false; cfg.codewords], vec![false; cfg.codewords]],
        }
    }
}

/// What the partner endpoint of a mapping node contributes to a bit's
/// a-priori LLR.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Partner {
    /// Codeword bit with its current extrinsic LLR (zero when its round has
    /// not run yet).
    Cbn { q: f64 },
    /// Padding bit with its known value.
    Kbn { value: u8 },
}

/// Soft bit weight: probability that a bit with extrinsic LLR `q` equals
/// `b`.
#[inline]
fn f_weight(b: bool, q: f64) -> f64 {
    let x = if b { -q } else { q };
    1.0 / (1.0 + (-x).exp())
}

/// Rebuild the base priors of the given (block row, block column) pairs
/// from both sides' current extrinsics.  A known endpoint restricts the
/// support, a codeword endpoint weighs it softly; fully-known positions
/// stay point masses.
pub(crate) fn refresh_priors(
    state: &mut BeliefState,
    index: &MappingNodeIndex,
    cfg: &crate::si_encoder::SiConfig,
    blocks: &[(usize, usize)],
) {
    let (s, d) = (cfg.rows_per_block, cfg.cols_per_block);
    let cols = cfg.total_cols();
    for &(i, block_col) in blocks {
        for r in 0..s {
            let k = i * s + r;
            for c in 0..d {
                let z = block_col * d + c;
                let refs = index.at(k, z);
                if matches!(refs, [BitRef::Known { .. }, BitRef::Known { .. }]) {
                    continue;
                }
                let mut tup = [0.0f64; 4];
                for (v, slot) in tup.iter_mut().enumerate() {
                    let base = Base::from_index(v);
                    let mut w = 1.0;
                    for &side in &CodeSide::BOTH {
                        match refs[side.index()] {
                            BitRef::Code { round, bit } => {
                                w *= f_weight(
                                    base.bit(side),
                                    state.q[side.index()][round as usize][bit as usize],
                                );
                            }
                            BitRef::Known { value } => {
                                if base.bit(side) as u8 != value {
                                    w = 0.0;
                                }
                            }
                        }
                    }
                    *slot = w;
                }
                normalize(&mut tup);
                state.pi[k * cols + z] = tup;
            }
        }
    }
}

/// A-priori LLR of the side-`side` bit under likelihood tuple `gamma`, with
/// the partner bit marginalized (CBN) or substituted (KBN).
///
/// Zero-mass conventions: an empty numerator or denominator saturates at
/// ∓clamp; both empty (the known bit contradicts every base with mass) means
/// no information, LLR 0.  A fully zero tuple is a detector fault.
pub fn compute_input_llr(
    gamma: &BaseDist,
    side: CodeSide,
    partner: Partner,
) -> Result<f64, SiDecoderError> {
    if gamma.iter().all(|&g| g == 0.0) {
        return Err(SiDecoderError::DegenerateGamma);
    }
    let other = side.other();
    let mut num = 0.0;
    let mut den = 0.0;
    for (v, &g) in gamma.iter().enumerate() {
        let base = Base::from_index(v);
        let w = match partner {
            Partner::Cbn { q } => f_weight(base.bit(other), q),
            Partner::Kbn { value } => (base.bit(other) as u8 == value) as u8 as f64,
        };
        if base.bit(side) {
            den += g * w;
        } else {
            num += g * w;
        }
    }
    Ok(if num == 0.0 && den == 0.0 {
        0.0
    } else if den == 0.0 {
        LLR_CLAMP
    } else if num == 0.0 {
        -LLR_CLAMP
    } else {
        clamp_llr((num / den).ln())
    })
}

/// Per-round outcome record.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RoundDiagnostics {
    pub round: usize,
    pub iterations: usize,
    pub syndrome_ok: [bool; 2],
    /// Forward-backward executions in this round (erased columns excluded).
    pub detect_invocations: usize,
    /// Columns covered by this round's detection stage.
    pub detect_columns: usize,
    pub detect_seconds: f64,
    pub decode_seconds: f64,
}

pub struct DecodeOutput {
    /// Hard-decision codeword matrices, one per component code.
    pub estimates: [BitMatrix; 2],
    pub rounds: Vec<RoundDiagnostics>,
}

impl DecodeOutput {
    pub fn all_rounds_converged(&self) -> bool {
        self.rounds.iter().all(|r| r.syndrome_ok == [true, true])
    }

    pub fn total_iterations(&self) -> usize {
        self.rounds.iter().map(|r| r.iterations).sum()
    }
}

/// Decoder for one layout/code pairing; immutable and shareable across
/// concurrent trials (each `decode_all` call owns its own state).
pub struct SiDecoder<'a> {
    codes: [&'a LdpcCode; 2],
    meta: &'a EncodeMetadata,
    index: MappingNodeIndex,
    lattice: DriftLattice,
    ell_max: usize,
    forward: Vec<usize>,
    /// Block rows where both sides carry the same shift (their bits share a
    /// round, so their mutual LLRs refresh every iteration).
    equal_shift_blocks: Vec<usize>,
}

impl<'a> SiDecoder<'a> {
    pub fn new(
        codes: [&'a LdpcCode; 2],
        meta: &'a EncodeMetadata,
        params: ChannelParams,
        ell_max: usize,
    ) -> Result<Self, SiDecoderError> {
        let cfg = &meta.config;
        cfg.validate()?;
        for (u, code) in codes.iter().enumerate() {
            if code.n_bits() != cfg.n_bits() {
                return Err(SiDecoderError::CodeLengthMismatch {
                    side: CodeSide::from_index(u),
                    code: code.n_bits(),
                    layout: cfg.n_bits(),
                });
            }
        }
        let perm = cfg.permutation();
        let forward = (0..cfg.rows()).map(|r| perm.forward(r)).collect();
        let equal_shift_blocks = (0..cfg.shift_blocks)
            .filter(|&i| cfg.shifts[0][i] == cfg.shifts[1][i])
            .collect();
        Ok(SiDecoder {
            codes,
            meta,
            index: MappingNodeIndex::build(meta),
            lattice: DriftLattice::for_source(cfg.rows(), params),
            ell_max: ell_max.max(1),
            forward,
            equal_shift_blocks,
        })
    }

    pub fn lattice(&self) -> &DriftLattice {
        &self.lattice
    }

    pub fn mapping_index(&self) -> &MappingNodeIndex {
        &self.index
    }

    /// Run all estimation rounds and return hard decisions regardless of
    /// per-round convergence.
    pub fn decode_all(&self, pool: &ReceivedPool) -> Result<DecodeOutput, SiDecoderError> {
        let cfg = &self.meta.config;
        if pool.n_columns() != cfg.total_cols() || pool.source_length != cfg.rows() {
            return Err(SiDecoderError::PoolShape {
                expected: cfg.total_cols(),
                got: pool.n_columns(),
                expected_len: cfg.rows(),
                got_len: pool.source_length,
            });
        }
        let mut state = BeliefState::initialize(self.meta, &self.index);
        let mut rounds = Vec::with_capacity(cfg.codewords);
        for t in 0..cfg.codewords {
            rounds.push(self.decode_round(t, pool, &mut state)?);
        }
        let estimates = [
            pack_codewords(&state.hard[0], cfg).expect("hard decisions match the layout"),
            pack_codewords(&state.hard[1], cfg).expect("hard decisions match the layout"),
        ];
        Ok(DecodeOutput { estimates, rounds })
    }

    fn decode_round(
        &self,
        t: usize,
        pool: &ReceivedPool,
        state: &mut BeliefState,
    ) -> Result<RoundDiagnostics, SiDecoderError> {
        let cfg = &self.meta.config;
        let d = cfg.cols_per_block;
        let (rows, cols) = (cfg.rows(), cfg.total_cols());

        // Detection over every column carrying round-t bits, with the
        // current priors gathered into transmission order.
        let detect_start = Instant::now();
        let columns: Vec<usize> = (t * d..(t + cfg.max_shift + 1) * d).collect();
        let gammas = {
            let pi = &state.pi;
            let forward = &self.forward;
            let priors_for = |j: usize| {
                (0..rows)
                    .map(|r| pi[forward[r] * cols + j])
                    .collect::<Vec<_>>()
            };
            detect_column_set(pool, &columns, priors_for, &self.lattice)
        };
        let mut detect_invocations = 0;
        for (slice, &j) in gammas.iter().zip(&columns) {
            if pool.columns[j].is_some() {
                detect_invocations += 1;
            }
            for (r, tup) in slice.iter().enumerate() {
                state.gamma[self.forward[r] * cols + j] = *tup;
            }
        }
        let detect_seconds = detect_start.elapsed().as_secs_f64();

        // Tandem decoding: at least one iteration, so an accidental valid
        // word in the untouched initial state can never bypass decoding.
        let decode_start = Instant::now();
        let n = cfg.n_bits();
        let mut sp = [
            SpDecoderState::new(self.codes[0]),
            SpDecoderState::new(self.codes[1]),
        ];
        let mut priors = [vec![0.0f64; n], vec![0.0f64; n]];
        let mut iterations = 0usize;
        let mut ok = [false, false];
        loop {
            for u in 0..2 {
                if iterations == 0 {
                    self.fill_input_llrs(u, t, state, &mut priors[u], None)?;
                } else if !self.equal_shift_blocks.is_empty() {
                    // Only same-round partner information changes within the
                    // round; everything else stays as computed up front.
                    self.fill_input_llrs(
                        u,
                        t,
                        state,
                        &mut priors[u],
                        Some(&self.equal_shift_blocks),
                    )?;
                }
                self.codes[u].sp_iterate(&mut sp[u], &priors[u])?;
                let extrinsics = sp[u].extrinsic_llrs(&priors[u])?;
                let q = &mut state.q[u][t];
                for (b, e) in extrinsics.into_iter().enumerate() {
                    q[b] = clamp_llr(e);
                }
            }
            iterations += 1;
            for u in 0..2 {
                ok[u] = self.codes[u].syndrome_check(sp[u].hard_decision())?;
            }
            if (ok[0] && ok[1]) || iterations >= self.ell_max {
                break;
            }
        }
        for u in 0..2 {
            state.hard[u][t].copy_from_slice(sp[u].hard_decision());
            state.decoded[u][t] = ok[u];
        }
        let decode_seconds = decode_start.elapsed().as_secs_f64();

        // Refresh priors of every block this round wrote, from both sides'
        // final extrinsics.
        let mut touched: Vec<(usize, usize)> = Vec::with_capacity(2 * cfg.shift_blocks);
        for u in 0..2 {
            for i in 0..cfg.shift_blocks {
                touched.push((i, t + cfg.shifts[u][i]));
            }
        }
        touched.sort_unstable();
        touched.dedup();
        refresh_priors(state, &self.index, cfg, &touched);

        Ok(RoundDiagnostics {
            round: t,
            iterations,
            syndrome_ok: ok,
            detect_invocations,
            detect_columns: columns.len(),
            detect_seconds,
            decode_seconds,
        })
    }

    /// Assemble the a-priori LLR vector of decoder `u` for round `t`.  With
    /// `only_blocks` given, restrict to those block rows (used to refresh
    /// same-round coupling after the first iteration).
    fn fill_input_llrs(
        &self,
        u: usize,
        t: usize,
        state: &BeliefState,
        out: &mut [f64],
        only_blocks: Option<&[usize]>,
    ) -> Result<(), SiDecoderError> {
        let cfg = &self.meta.config;
        let (s, d) = (cfg.rows_per_block, cfg.cols_per_block);
        let cols = cfg.total_cols();
        let side = CodeSide::from_index(u);
        let blocks: Vec<usize> = match only_blocks {
            Some(list) => list.to_vec(),
            None => (0..cfg.shift_blocks).collect(),
        };
        for &i in &blocks {
            let block_col = t + cfg.shifts[u][i];
            for r in 0..s {
                let k = i * s + r;
                for c in 0..d {
                    let z = block_col * d + c;
                    let refs = self.index.at(k, z);
                    let BitRef::Code { round, bit } = refs[u] else {
                        unreachable!("round-{t} blocks of side {u} hold codeword bits");
                    };
                    debug_assert_eq!(round as usize, t);
                    let partner = match refs[1 - u] {
                        BitRef::Known { value } => Partner::Kbn { value },
                        BitRef::Code { round: t2, bit: b2 } => Partner::Cbn {
                            q: state.q[1 - u][t2 as usize][b2 as usize],
                        },
                    };
                    out[bit as usize] =
                        compute_input_llr(&state.gamma[k * cols + z], side, partner).map_err(
                            |e| match e {
                                SiDecoderError::DegenerateGamma => {
                                    SiDecoderError::DetectorFault { row: k, col: z }
                                }
                                other => other,
                            },
                        )?;
                }
            }
        }
        Ok(())
    }
}

/// Bit and frame error counts of an estimate against the truth, one frame
/// per codeword (block column of width `cols_per_frame`).
pub fn ber_evaluate(estimate: &BitMatrix, truth: &BitMatrix, cols_per_frame: usize) -> (u64, u64) {
    assert_eq!(
        (estimate.rows(), estimate.cols()),
        (truth.rows(), truth.cols())
    );
    assert_eq!(estimate.cols() % cols_per_frame, 0);
    let mut bit_errors = 0u64;
    let mut frame_errors = 0u64;
    for frame in 0..estimate.cols() / cols_per_frame {
        let mut diff = 0u64;
        for c in frame * cols_per_frame..(frame + 1) * cols_per_frame {
            for r in 0..estimate.rows() {
                diff += (estimate.get(r, c) != truth.get(r, c)) as u64;
            }
        }
        bit_errors += diff;
        frame_errors += (diff > 0) as u64;
    }
    (bit_errors, frame_errors)
}
