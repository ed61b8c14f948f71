//! Reference schemes the shifted layout is measured against: the same
//! code pair and base mapping without shifts (every codeword pair decoded
//! in isolation), optionally with known marker symbols spliced into every
//! strand to give the detector synchronization anchors.

use num_rational::Ratio;
use thiserror::Error;

use crate::base::{point_mass, Base, BaseDist};
use crate::channel::{ChannelParams, ReceivedPool};
use crate::fb_detector::{detect_column_set, DriftLattice};
use crate::ldpc::{LdpcCode, SpDecoderState};
use crate::matrix::QuatMatrix;
use crate::rng::{derive, labels, stream};
use crate::si_decoder::{
    compute_input_llr, refresh_priors, BeliefState, BitRef, DecodeOutput, MappingNodeIndex,
    Partner, RoundDiagnostics, SiDecoderError,
};
use crate::si_encoder::{pack_codewords, EncodeMetadata, InterleaveVariant, SiConfig, SiError};
use rand::Rng;

#[derive(Debug, Error)]
pub enum BaselineError {
    #[error("marker period must be at least 1")]
    BadPeriod,
    #[error("iterative decoding needs an unshifted single-block layout")]
    ShiftedLayout,
    #[error(transparent)]
    Decode(#[from] SiDecoderError),
    #[error(transparent)]
    Config(#[from] SiError),
}

/// Unshifted single-block layout over the same bit budget: `rows` fused
/// rows, one codeword pair per block column.
pub fn naive_config(
    rows: usize,
    cols_per_block: usize,
    codewords: usize,
    padding_seed: u64,
) -> SiConfig {
    SiConfig {
        shift_blocks: 1,
        rows_per_block: rows,
        cols_per_block,
        codewords,
        max_shift: 0,
        shifts: [vec![0], vec![0]],
        padding_seed,
        interleave: InterleaveVariant::BlockCycling,
    }
}

/// Placement of known synchronization symbols: after every `period` payload
/// symbols, two seeded marker bases are spliced into each strand.  The
/// marker values are shared with the receiver.
#[derive(Clone, Debug)]
pub struct MarkerLayout {
    pub period: usize,
    pub seed: u64,
}

impl MarkerLayout {
    pub fn new(period: usize, seed: u64) -> Result<Self, BaselineError> {
        if period == 0 {
            return Err(BaselineError::BadPeriod);
        }
        Ok(MarkerLayout { period, seed })
    }

    pub fn n_markers(&self, payload: usize) -> usize {
        payload / self.period * 2
    }

    pub fn expanded_len(&self, payload: usize) -> usize {
        payload + self.n_markers(payload)
    }

    /// The shared marker symbol sequence, reproducible from the seed.
    pub fn marker_values(&self, payload: usize) -> Vec<Base> {
        let mut rng = stream(derive(self.seed, labels::MARKER));
        (0..self.n_markers(payload))
            .map(|_| Base::from_index(rng.gen_range(0..4)))
            .collect()
    }

    /// Expanded-position map: payload row index or the marker base sitting
    /// at that position.
    pub fn slots(&self, payload: usize) -> Vec<MarkerSlot> {
        let values = self.marker_values(payload);
        let mut slots = Vec::with_capacity(self.expanded_len(payload));
        let mut next_marker = 0;
        for r in 0..payload {
            slots.push(MarkerSlot::Payload(r));
            if (r + 1) % self.period == 0 {
                slots.push(MarkerSlot::Marker(values[next_marker]));
                slots.push(MarkerSlot::Marker(values[next_marker + 1]));
                next_marker += 2;
            }
        }
        slots
    }

    pub fn insert(&self, column: &[Base]) -> Vec<Base> {
        self.slots(column.len())
            .into_iter()
            .map(|slot| match slot {
                MarkerSlot::Payload(r) => column[r],
                MarkerSlot::Marker(b) => b,
            })
            .collect()
    }

    pub fn strip(&self, expanded: &[Base], payload: usize) -> Vec<Base> {
        self.slots(payload)
            .iter()
            .zip(expanded)
            .filter_map(|(slot, &b)| matches!(slot, MarkerSlot::Payload(_)).then_some(b))
            .collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MarkerSlot {
    Payload(usize),
    Marker(Base),
}

/// Overall rate of a marker-protected stream: the code rate diluted by two
/// marker symbols per period.
pub fn marker_rate(code_rate: Ratio<u64>, period: usize) -> Ratio<u64> {
    code_rate * Ratio::new(period as u64, period as u64 + 2)
}

/// Splice the marker rows into every column of an encoded matrix.
pub fn encode_marker(x: &QuatMatrix, layout: &MarkerLayout) -> QuatMatrix {
    let slots = layout.slots(x.rows());
    let mut out = QuatMatrix::filled(slots.len(), x.cols(), Base::A);
    for c in 0..x.cols() {
        for (e, slot) in slots.iter().enumerate() {
            out.set(
                e,
                c,
                match *slot {
                    MarkerSlot::Payload(r) => x.get(r, c),
                    MarkerSlot::Marker(b) => b,
                },
            );
        }
    }
    out
}

/// Joint detection/decoding of an unshifted layout, one codeword pair at a
/// time: the first `detect_iters` decoder iterations re-run detection with
/// the freshest bit beliefs, the remainder run the decoders alone.
pub struct IterativeDecoder<'a> {
    codes: [&'a LdpcCode; 2],
    meta: &'a EncodeMetadata,
    index: MappingNodeIndex,
    lattice: DriftLattice,
    slots: Vec<MarkerSlot>,
    ell_max: usize,
    detect_iters: usize,
}

impl<'a> IterativeDecoder<'a> {
    pub fn new(
        codes: [&'a LdpcCode; 2],
        meta: &'a EncodeMetadata,
        params: ChannelParams,
        markers: Option<&MarkerLayout>,
        ell_max: usize,
        detect_iters: usize,
    ) -> Result<Self, BaselineError> {
        let cfg = &meta.config;
        cfg.validate()?;
        if cfg.shift_blocks != 1 || cfg.max_shift != 0 {
            return Err(BaselineError::ShiftedLayout);
        }
        for (u, code) in codes.iter().enumerate() {
            if code.n_bits() != cfg.n_bits() {
                return Err(BaselineError::Decode(SiDecoderError::CodeLengthMismatch {
                    side: crate::base::CodeSide::from_index(u),
                    code: code.n_bits(),
                    layout: cfg.n_bits(),
                }));
            }
        }
        let slots = match markers {
            Some(layout) => layout.slots(cfg.rows()),
            None => (0..cfg.rows()).map(MarkerSlot::Payload).collect(),
        };
        Ok(IterativeDecoder {
            codes,
            meta,
            index: MappingNodeIndex::build(meta),
            lattice: DriftLattice::for_source(slots.len(), params),
            slots,
            ell_max: ell_max.max(1),
            detect_iters,
        })
    }

    pub fn lattice(&self) -> &DriftLattice {
        &self.lattice
    }

    pub fn decode_all(&self, pool: &ReceivedPool) -> Result<DecodeOutput, BaselineError> {
        let cfg = &self.meta.config;
        if pool.n_columns() != cfg.total_cols() || pool.source_length != self.slots.len() {
            return Err(BaselineError::Decode(SiDecoderError::PoolShape {
                expected: cfg.total_cols(),
                got: pool.n_columns(),
                expected_len: self.slots.len(),
                got_len: pool.source_length,
            }));
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
        let n = cfg.n_bits();
        let columns: Vec<usize> = (t * d..(t + 1) * d).collect();

        let mut sp = [
            SpDecoderState::new(self.codes[0]),
            SpDecoderState::new(self.codes[1]),
        ];
        let mut priors = [vec![0.0f64; n], vec![0.0f64; n]];
        let mut iterations = 0usize;
        let mut ok = [false, false];
        let mut detect_invocations = 0usize;
        let mut detect_columns = 0usize;
        let mut detect_seconds = 0.0f64;
        let decode_start = std::time::Instant::now();
        loop {
            if iterations < self.detect_iters {
                let detect_start = std::time::Instant::now();
                let gammas = {
                    let pi = &state.pi;
                    let priors_for = |j: usize| {
                        self.slots
                            .iter()
                            .map(|slot| match *slot {
                                MarkerSlot::Payload(r) => pi[r * cols + j],
                                MarkerSlot::Marker(b) => point_mass(b),
                            })
                            .collect::<Vec<BaseDist>>()
                    };
                    detect_column_set(pool, &columns, priors_for, &self.lattice)
                };
                for (slice, &j) in gammas.iter().zip(&columns) {
                    if pool.columns[j].is_some() {
                        detect_invocations += 1;
                    }
                    for (slot, tup) in self.slots.iter().zip(slice) {
                        if let MarkerSlot::Payload(r) = *slot {
                            state.gamma[r * cols + j] = *tup;
                        }
                    }
                }
                detect_columns += columns.len();
                detect_seconds += detect_start.elapsed().as_secs_f64();
            }

            for u in 0..2 {
                for k in 0..rows {
                    for &z in &columns {
                        let refs = self.index.at(k, z);
                        let BitRef::Code { round, bit } = refs[u] else {
                            unreachable!("unshifted layouts carry no padding");
                        };
                        debug_assert_eq!(round as usize, t);
                        let partner = match refs[1 - u] {
                            BitRef::Known { value } => Partner::Kbn { value },
                            BitRef::Code { round: t2, bit: b2 } => Partner::Cbn {
                                q: state.q[1 - u][t2 as usize][b2 as usize],
                            },
                        };
                        priors[u][bit as usize] = compute_input_llr(
                            &state.gamma[k * cols + z],
                            crate::base::CodeSide::from_index(u),
                            partner,
                        )
                        .map_err(|e| match e {
                            SiDecoderError::DegenerateGamma => {
                                SiDecoderError::DetectorFault { row: k, col: z }
                            }
                            other => other,
                        })?;
                    }
                }
                self.codes[u].sp_iterate(&mut sp[u], &priors[u])?;
                let extrinsics = sp[u].extrinsic_llrs(&priors[u])?;
                let q = &mut state.q[u][t];
                for (b, e) in extrinsics.into_iter().enumerate() {
                    q[b] = crate::clamp_llr(e);
                }
            }
            iterations += 1;
            for u in 0..2 {
                ok[u] = self.codes[u].syndrome_check(sp[u].hard_decision())?;
            }
            // Fold the new extrinsics back into the base priors so the next
            // detection pass (if any) sees them.
            refresh_priors(state, &self.index, cfg, &[(0, t)]);
            if (ok[0] && ok[1]) || iterations >= self.ell_max {
                break;
            }
        }
        for u in 0..2 {
            state.hard[u][t].copy_from_slice(sp[u].hard_decision());
            state.decoded[u][t] = ok[u];
        }
        Ok(RoundDiagnostics {
            round: t,
            iterations,
            syndrome_ok: ok,
            detect_invocations,
            detect_columns,
            detect_seconds,
            decode_seconds: decode_start.elapsed().as_secs_f64() - detect_seconds,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{transmit_pool, ChannelRng};
    use crate::si_decoder::{ber_evaluate, SiDecoder};
    use crate::si_encoder::encode_all;

    fn codes_for(n: usize) -> [LdpcCode; 2] {
        [
            LdpcCode::regular_3_6_retrying(n, 301, 32).unwrap(),
            LdpcCode::regular_3_6_retrying(n, 302, 32).unwrap(),
        ]
    }

    fn random_codewords(cfg: &SiConfig, codes: &[LdpcCode; 2], seed: u64) -> [Vec<Vec<u8>>; 2] {
        let mut rng = stream(seed);
        let mut side = |code: &LdpcCode| {
            (0..cfg.codewords)
                .map(|_| {
                    let data: Vec<u8> = (0..code.data_len())
                        .map(|_| rng.gen_range(0..2u8))
                        .collect();
                    code.encode(&data).unwrap()
                })
                .collect::<Vec<_>>()
        };
        [side(&codes[0]), side(&codes[1])]
    }

    #[test]
    fn naive_layout_shape() {
        let cfg = naive_config(8, 2, 3, 7);
        cfg.validate().unwrap();
        assert_eq!(cfg.n_bits(), 16);
        assert_eq!(cfg.rows(), 8);
        assert_eq!(cfg.total_cols(), 6);
        let perm = cfg.permutation();
        assert!((0..8).all(|r| perm.forward(r) == r));
        // No padding anywhere.
        for side in crate::base::CodeSide::BOTH {
            for j in 0..3 {
                assert!(!cfg.is_padding(side, 0, j));
            }
        }
    }

    #[test]
    fn marker_layout_inserts_and_strips() {
        let layout = MarkerLayout::new(3, 11).unwrap();
        assert_eq!(layout.expanded_len(9), 15);
        assert_eq!(layout.expanded_len(10), 16);
        let column: Vec<Base> = (0..10).map(|i| Base::from_index(i % 4)).collect();
        let expanded = layout.insert(&column);
        assert_eq!(expanded.len(), 16);
        assert_eq!(layout.strip(&expanded, 10), column);
        // Marker values are deterministic and shared across columns.
        assert_eq!(layout.insert(&column), expanded);
        let values = layout.marker_values(10);
        assert_eq!(&expanded[3..5], &values[0..2]);
        assert_eq!(&expanded[8..10], &values[2..4]);
    }

    #[test]
    fn marker_rate_figures() {
        let half = Ratio::new(1u64, 2);
        assert_eq!(marker_rate(half, 8), Ratio::new(2, 5));
        assert_eq!(marker_rate(half, 23), Ratio::new(23, 50));
    }

    #[test]
    fn bad_period_rejected() {
        assert!(matches!(
            MarkerLayout::new(0, 1),
            Err(BaselineError::BadPeriod)
        ));
    }

    #[test]
    fn shifted_layouts_are_rejected() {
        let cfg = SiConfig::staircase(2, 2, 2, 2, 3);
        let cw = [
            vec![vec![0u8; cfg.n_bits()]; 2],
            vec![vec![0u8; cfg.n_bits()]; 2],
        ];
        let (_, meta) = encode_all(&cw[0], &cw[1], &cfg).unwrap();
        let codes = codes_for(cfg.n_bits());
        let params = ChannelParams::new(0.0, 0.0, 0.0, 0.0).unwrap();
        assert!(matches!(
            IterativeDecoder::new([&codes[0], &codes[1]], &meta, params, None, 10, 1),
            Err(BaselineError::ShiftedLayout)
        ));
    }

    #[test]
    fn noiseless_naive_roundtrip() {
        let cfg = naive_config(8, 2, 3, 5);
        let codes = codes_for(cfg.n_bits());
        let cw = random_codewords(&cfg, &codes, 41);
        let (x, meta) = encode_all(&cw[0], &cw[1], &cfg).unwrap();
        let params = ChannelParams::new(0.0, 0.0, 0.0, 0.0).unwrap();
        let pool = transmit_pool(&x, &params, &ChannelRng::new(4));
        let dec =
            IterativeDecoder::new([&codes[0], &codes[1]], &meta, params, None, 100, 10).unwrap();
        let out = dec.decode_all(&pool).unwrap();
        assert!(out.all_rounds_converged());
        for (u, side) in cw.iter().enumerate() {
            let truth = pack_codewords(side, &cfg).unwrap();
            assert_eq!(
                ber_evaluate(&out.estimates[u], &truth, cfg.cols_per_block),
                (0, 0)
            );
        }
    }

    #[test]
    fn noiseless_marker_roundtrip() {
        let cfg = naive_config(9, 2, 2, 5);
        let codes = codes_for(cfg.n_bits());
        let cw = random_codewords(&cfg, &codes, 42);
        let (x, meta) = encode_all(&cw[0], &cw[1], &cfg).unwrap();
        let layout = MarkerLayout::new(3, 99).unwrap();
        let expanded = encode_marker(&x, &layout);
        assert_eq!(expanded.rows(), layout.expanded_len(9));
        let params = ChannelParams::new(0.0, 0.0, 0.0, 0.0).unwrap();
        let pool = transmit_pool(&expanded, &params, &ChannelRng::new(5));
        let dec = IterativeDecoder::new(
            [&codes[0], &codes[1]],
            &meta,
            params,
            Some(&layout),
            100,
            10,
        )
        .unwrap();
        let out = dec.decode_all(&pool).unwrap();
        assert!(out.all_rounds_converged());
        for (u, side) in cw.iter().enumerate() {
            let truth = pack_codewords(side, &cfg).unwrap();
            assert_eq!(
                ber_evaluate(&out.estimates[u], &truth, cfg.cols_per_block),
                (0, 0)
            );
        }
    }

    #[test]
    fn single_detection_matches_round_sequential_decoding() {
        // With no shifts the round-sequential decoder and the iterative
        // decoder restricted to one detection pass perform the same
        // computation; their outputs must agree bit for bit.
        let cfg = naive_config(12, 2, 3, 13);
        let codes = codes_for(cfg.n_bits());
        let cw = random_codewords(&cfg, &codes, 43);
        let (x, meta) = encode_all(&cw[0], &cw[1], &cfg).unwrap();
        let params = ChannelParams::from_ids_split(0.02, 0.05).unwrap();
        let pool = transmit_pool(&x, &params, &ChannelRng::new(6));

        let seq = SiDecoder::new([&codes[0], &codes[1]], &meta, params, 100).unwrap();
        let seq_out = seq.decode_all(&pool).unwrap();
        let it =
            IterativeDecoder::new([&codes[0], &codes[1]], &meta, params, None, 100, 1).unwrap();
        let it_out = it.decode_all(&pool).unwrap();

        assert_eq!(seq_out.estimates, it_out.estimates);
        let project = |out: &DecodeOutput| {
            out.rounds
                .iter()
                .map(|r| (r.round, r.iterations, r.syndrome_ok, r.detect_invocations))
                .collect::<Vec<_>>()
        };
        assert_eq!(project(&seq_out), project(&it_out));
    }
}
