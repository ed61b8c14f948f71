//! Three-stage construction of the transmitted base matrix.
//!
//! `L` codewords per component code are packed into a binary matrix of
//! `m × L` blocks (each `s × d`).  Each block row is then shifted right by a
//! per-row amount, vacated blocks are filled with seeded pseudo-random
//! padding bits, the two shifted matrices are merged into bases two bits at
//! a time, and finally the rows are permuted so that consecutive output rows
//! cycle through the shift blocks.  The padding symbols end up dispersed at
//! known positions of every DNA sequence, where they act as synchronization
//! markers for the receiver.

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::base::{Base, CodeSide};
use crate::matrix::{BitMatrix, QuatMatrix};
use crate::rng::{self, labels};

#[derive(Debug, Error, PartialEq)]
pub enum SiError {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("codeword shape mismatch: {0}")]
    CodewordShape(String),
    #[error("matrix dimension mismatch: {0}")]
    DimensionMismatch(String),
}

/// Which row permutation connects the pre-interleave matrix to the
/// transmitted one.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InterleaveVariant {
    /// Consecutive transmitted rows cycle through the `m` shift blocks, so
    /// every window of `m` rows in a column holds exactly one symbol from
    /// each block.  This is the layout the marker structure relies on.
    #[default]
    BlockCycling,
    /// The transpose schedule (cycle through the `s` in-block offsets
    /// instead).  Exactly the inverse permutation of `BlockCycling`; kept
    /// selectable for comparison.
    RowCycling,
}

/// Row bijection between the pre-interleave matrix and the transmitted one:
/// transmitted row `r` carries pre-interleave row `forward(r)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RowPermutation {
    forward: Vec<u32>,
    inverse: Vec<u32>,
}

impl RowPermutation {
    pub fn new(m: usize, s: usize, variant: InterleaveVariant) -> Self {
        let rows = m * s;
        let forward: Vec<u32> = (0..rows)
            .map(|r| match variant {
                InterleaveVariant::BlockCycling => {
                    let (i, k) = (r / m, r % m);
                    (k * s + i) as u32
                }
                InterleaveVariant::RowCycling => {
                    let (i, k) = (r / s, r % s);
                    (k * m + i) as u32
                }
            })
            .collect();
        let mut inverse = vec![0u32; rows];
        for (r, &src) in forward.iter().enumerate() {
            inverse[src as usize] = r as u32;
        }
        RowPermutation { forward, inverse }
    }

    /// Pre-interleave row shown at transmitted row `r`.
    #[inline]
    pub fn forward(&self, r: usize) -> usize {
        self.forward[r] as usize
    }

    /// Transmitted row where pre-interleave row `k` lands.
    #[inline]
    pub fn inverse(&self, k: usize) -> usize {
        self.inverse[k] as usize
    }

    pub fn len(&self) -> usize {
        self.forward.len()
    }

    pub fn is_empty(&self) -> bool {
        self.forward.is_empty()
    }
}

/// All parameters of the coding scheme's layout.
///
/// The binary code length is `n_bits = m·s·d` with `m = shift_blocks`,
/// `s = rows_per_block`, `d = cols_per_block`; `codewords` is the number of
/// codewords per component code (`L`), and the matrix gains `max_shift`
/// extra block columns (`L′ = L + T_max`).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SiConfig {
    pub shift_blocks: usize,
    pub rows_per_block: usize,
    pub cols_per_block: usize,
    pub codewords: usize,
    pub max_shift: usize,
    /// Per-block-row shift amounts (`T_1`, `T_2`), each of length `m` with
    /// entries in `[0, max_shift]`.
    pub shifts: [Vec<usize>; 2],
    pub padding_seed: u64,
    #[serde(default)]
    pub interleave: InterleaveVariant,
}

impl SiConfig {
    /// The staircase layout: `T_1 = T_2 = (0, 1, …, m−1)`, so `max_shift =
    /// m − 1` and every shift amount occurs exactly once.  Sharing the shift
    /// vector pairs both bits of every base with the same codeword round,
    /// which makes whole padding symbols known to the receiver and keeps the
    /// two decoders exchanging fresh extrinsics within a round.
    pub fn staircase(m: usize, s: usize, d: usize, codewords: usize, padding_seed: u64) -> Self {
        let shifts: Vec<usize> = (0..m).collect();
        SiConfig {
            shift_blocks: m,
            rows_per_block: s,
            cols_per_block: d,
            codewords,
            max_shift: m.saturating_sub(1),
            shifts: [shifts.clone(), shifts],
            padding_seed,
            interleave: InterleaveVariant::default(),
        }
    }

    pub fn n_bits(&self) -> usize {
        self.shift_blocks * self.rows_per_block * self.cols_per_block
    }

    /// Number of matrix rows (= DNA sequence length `n`).
    pub fn rows(&self) -> usize {
        self.shift_blocks * self.rows_per_block
    }

    /// Columns occupied by codeword bits before shifting (`L·d`).
    pub fn loaded_cols(&self) -> usize {
        self.codewords * self.cols_per_block
    }

    /// Block columns after shifting (`L′ = L + max_shift`).
    pub fn expanded_rounds(&self) -> usize {
        self.codewords + self.max_shift
    }

    /// Total transmitted columns (`L′·d`).
    pub fn total_cols(&self) -> usize {
        self.expanded_rounds() * self.cols_per_block
    }

    pub fn block_of_row(&self, k: usize) -> usize {
        k / self.rows_per_block
    }

    /// Is block `(block_row, block_col)` of side `u` padding rather than
    /// codeword payload?
    pub fn is_padding(&self, side: CodeSide, block_row: usize, block_col: usize) -> bool {
        let t = self.shifts[side.index()][block_row];
        block_col < t || block_col >= self.codewords + t
    }

    pub fn permutation(&self) -> RowPermutation {
        RowPermutation::new(self.shift_blocks, self.rows_per_block, self.interleave)
    }

    pub fn validate(&self) -> Result<(), SiError> {
        let bad = |msg: String| Err(SiError::InvalidConfig(msg));
        if self.shift_blocks == 0
            || self.rows_per_block == 0
            || self.cols_per_block == 0
            || self.codewords == 0
        {
            return bad("all of m, s, d, L must be positive".into());
        }
        for (u, t) in self.shifts.iter().enumerate() {
            if t.len() != self.shift_blocks {
                return bad(format!(
                    "shift vector {} has length {}, expected {}",
                    u + 1,
                    t.len(),
                    self.shift_blocks
                ));
            }
            if let Some(&over) = t.iter().find(|&&v| v > self.max_shift) {
                return bad(format!(
                    "shift value {over} exceeds max_shift {}",
                    self.max_shift
                ));
            }
            // Every shift amount in [0, max_shift] must occur, so that each
            // estimation round has at least one block of each age on both
            // sides.
            for v in 0..=self.max_shift {
                if !t.contains(&v) {
                    return bad(format!("shift vector {} never uses shift {v}", u + 1));
                }
            }
        }
        Ok(())
    }
}

/// One shifted component matrix: the bits plus the mask of padded positions.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IntermediateMatrix {
    pub bits: BitMatrix,
    /// 1 where the position holds a padding bit instead of a codeword bit.
    pub padding_mask: BitMatrix,
}

/// Receiver-side knowledge produced by `encode_all`: where the padding sits,
/// what it contains, and how rows were permuted.  Contains no codeword bits.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EncodeMetadata {
    pub config: SiConfig,
    pub padding_masks: [BitMatrix; 2],
    /// Padding bit values; zero at non-padding positions.
    pub padding_bits: [BitMatrix; 2],
    pub permutation: RowPermutation,
}

/// Lay out `L` codewords as an `ms × Ld` binary matrix: codeword `j` fills
/// block column `j`, row-major inside each `s × d` block, blocks stacked
/// over `i = 0..m`.
pub fn pack_codewords(codewords: &[Vec<u8>], cfg: &SiConfig) -> Result<BitMatrix, SiError> {
    cfg.validate()?;
    if codewords.len() != cfg.codewords {
        return Err(SiError::CodewordShape(format!(
            "expected {} codewords, got {}",
            cfg.codewords,
            codewords.len()
        )));
    }
    let (s, d) = (cfg.rows_per_block, cfg.cols_per_block);
    let n = cfg.n_bits();
    let mut out = BitMatrix::zeros(cfg.rows(), cfg.loaded_cols());
    for (j, cw) in codewords.iter().enumerate() {
        if cw.len() != n {
            return Err(SiError::CodewordShape(format!(
                "codeword {} has length {}, expected {n}",
                j,
                cw.len()
            )));
        }
        for (b, &bit) in cw.iter().enumerate() {
            let i = b / (s * d);
            let r = (b / d) % s;
            let c = b % d;
            out.set(i * s + r, j * d + c, bit);
        }
    }
    Ok(out)
}

/// Inverse of `pack_codewords`.
pub fn unpack_codewords(packed: &BitMatrix, cfg: &SiConfig) -> Result<Vec<Vec<u8>>, SiError> {
    if packed.rows() != cfg.rows() || packed.cols() != cfg.loaded_cols() {
        return Err(SiError::DimensionMismatch(format!(
            "packed matrix is {}x{}, expected {}x{}",
            packed.rows(),
            packed.cols(),
            cfg.rows(),
            cfg.loaded_cols()
        )));
    }
    let (s, d) = (cfg.rows_per_block, cfg.cols_per_block);
    let n = cfg.n_bits();
    let out = (0..cfg.codewords)
        .map(|j| {
            (0..n)
                .map(|b| {
                    let i = b / (s * d);
                    let r = (b / d) % s;
                    let c = b % d;
                    packed.get(i * s + r, j * d + c)
                })
                .collect()
        })
        .collect();
    Ok(out)
}

fn padding_stream(
    seed: u64,
    side: CodeSide,
    block_row: usize,
    block_col: usize,
) -> rand_chacha::ChaCha8Rng {
    rng::stream(rng::derive_chain(
        seed,
        &[
            labels::PADDING,
            side.index() as u64,
            block_row as u64,
            block_col as u64,
        ],
    ))
}

/// Move block row `i` right by its shift amount and fill the vacated blocks
/// with seeded equiprobable padding bits.  The padding stream is keyed per
/// (side, block row, block column), so transmitter and receiver regenerate
/// identical bits without exchanging them.
pub fn shift(packed: &BitMatrix, side: CodeSide, cfg: &SiConfig) -> IntermediateMatrix {
    debug_assert_eq!(packed.rows(), cfg.rows());
    debug_assert_eq!(packed.cols(), cfg.loaded_cols());
    let (m, s, d) = (cfg.shift_blocks, cfg.rows_per_block, cfg.cols_per_block);
    let expanded = cfg.expanded_rounds();
    let mut bits = BitMatrix::zeros(cfg.rows(), cfg.total_cols());
    let mut mask = BitMatrix::zeros(cfg.rows(), cfg.total_cols());
    for i in 0..m {
        let t = cfg.shifts[side.index()][i];
        for r in 0..s {
            let row = i * s + r;
            for z in 0..cfg.loaded_cols() {
                bits.set(row, z + t * d, packed.get(row, z));
            }
        }
        for block_col in (0..t).chain(cfg.codewords + t..expanded) {
            let mut stream = padding_stream(cfg.padding_seed, side, i, block_col);
            for r in 0..s {
                let row = i * s + r;
                for c in 0..d {
                    let col = block_col * d + c;
                    bits.set(row, col, stream.gen::<bool>() as u8);
                    mask.set(row, col, 1);
                }
            }
        }
    }
    IntermediateMatrix {
        bits,
        padding_mask: mask,
    }
}

/// Recover the packed codeword matrix from a (decoded) shifted matrix.
pub fn unshift(bits: &BitMatrix, side: CodeSide, cfg: &SiConfig) -> BitMatrix {
    debug_assert_eq!(bits.rows(), cfg.rows());
    debug_assert_eq!(bits.cols(), cfg.total_cols());
    let (m, s, d) = (cfg.shift_blocks, cfg.rows_per_block, cfg.cols_per_block);
    let mut out = BitMatrix::zeros(cfg.rows(), cfg.loaded_cols());
    for i in 0..m {
        let t = cfg.shifts[side.index()][i];
        for r in 0..s {
            let row = i * s + r;
            for z in 0..cfg.loaded_cols() {
                out.set(row, z, bits.get(row, z + t * d));
            }
        }
    }
    out
}

/// Merge the two shifted binary matrices into bases: position `(k,z)` maps
/// bit pair `(m1, m2)` through A=00, C=01, T=10, G=11 (first code = high
/// bit).
pub fn map_bases(m1: &BitMatrix, m2: &BitMatrix) -> QuatMatrix {
    assert_eq!((m1.rows(), m1.cols()), (m2.rows(), m2.cols()));
    let mut out = QuatMatrix::filled(m1.rows(), m1.cols(), Base::A);
    for z in 0..m1.cols() {
        for k in 0..m1.rows() {
            out.set(k, z, Base::from_bits(m1.get(k, z) != 0, m2.get(k, z) != 0));
        }
    }
    out
}

/// Apply the row permutation: transmitted row `r` = pre-interleave row
/// `forward(r)`.
pub fn interleave(xbar: &QuatMatrix, perm: &RowPermutation) -> QuatMatrix {
    assert_eq!(xbar.rows(), perm.len());
    let mut out = QuatMatrix::filled(xbar.rows(), xbar.cols(), Base::A);
    for z in 0..xbar.cols() {
        for r in 0..xbar.rows() {
            out.set(r, z, xbar.get(perm.forward(r), z));
        }
    }
    out
}

/// Inverse of `interleave`.
pub fn deinterleave(x: &QuatMatrix, perm: &RowPermutation) -> QuatMatrix {
    assert_eq!(x.rows(), perm.len());
    let mut out = QuatMatrix::filled(x.rows(), x.cols(), Base::A);
    for z in 0..x.cols() {
        for k in 0..x.rows() {
            out.set(k, z, x.get(perm.inverse(k), z));
        }
    }
    out
}

/// Run the full pipeline on both codeword lists and return the transmitted
/// matrix together with everything the receiver needs to locate and value
/// the known bits.
pub fn encode_all(
    codewords_1: &[Vec<u8>],
    codewords_2: &[Vec<u8>],
    cfg: &SiConfig,
) -> Result<(QuatMatrix, EncodeMetadata), SiError> {
    cfg.validate()?;
    let packed_1 = pack_codewords(codewords_1, cfg)?;
    let packed_2 = pack_codewords(codewords_2, cfg)?;
    let inter_1 = shift(&packed_1, CodeSide::First, cfg);
    let inter_2 = shift(&packed_2, CodeSide::Second, cfg);
    let xbar = map_bases(&inter_1.bits, &inter_2.bits);
    let perm = cfg.permutation();
    let x = interleave(&xbar, &perm);

    // Metadata keeps only the padding values; codeword bits are zeroed out.
    let padding_only = |inter: &IntermediateMatrix| {
        let mut bits = BitMatrix::zeros(inter.bits.rows(), inter.bits.cols());
        for r in 0..inter.bits.rows() {
            for c in 0..inter.bits.cols() {
                if inter.padding_mask.get(r, c) == 1 {
                    bits.set(r, c, inter.bits.get(r, c));
                }
            }
        }
        bits
    };
    let metadata = EncodeMetadata {
        config: cfg.clone(),
        padding_bits: [padding_only(&inter_1), padding_only(&inter_2)],
        padding_masks: [inter_1.padding_mask, inter_2.padding_mask],
        permutation: perm,
    };
    Ok((x, metadata))
}

/// One FASTA record per transmitted column.
pub fn write_fasta(x: &QuatMatrix) -> String {
    let mut out = String::new();
    for j in 0..x.cols() {
        out.push_str(&format!(">col{j}\n"));
        out.extend(x.column(j).iter().map(|b| b.to_char()));
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    fn random_codewords(cfg: &SiConfig, seed: u64) -> Vec<Vec<u8>> {
        let mut rng = rng::stream(seed);
        (0..cfg.codewords)
            .map(|_| (0..cfg.n_bits()).map(|_| rng.gen_range(0..2u8)).collect())
            .collect()
    }

    #[test]
    fn degenerate_pack_is_a_row() {
        let cfg = SiConfig::staircase(1, 1, 1, 2, 0);
        let packed = pack_codewords(&[vec![0], vec![1]], &cfg).unwrap();
        assert_eq!((packed.rows(), packed.cols()), (1, 2));
        assert_eq!(packed.get(0, 0), 0);
        assert_eq!(packed.get(0, 1), 1);
    }

    #[test]
    fn pack_unpack_roundtrip() {
        let cfg = SiConfig::staircase(3, 2, 4, 3, 0);
        let cws = random_codewords(&cfg, 11);
        let packed = pack_codewords(&cws, &cfg).unwrap();
        assert_eq!(unpack_codewords(&packed, &cfg).unwrap(), cws);
    }

    #[test]
    fn packed_block_is_a_codeword_slice() {
        let cfg = SiConfig::staircase(3, 2, 4, 2, 0);
        let cws = random_codewords(&cfg, 12);
        let packed = pack_codewords(&cws, &cfg).unwrap();
        let (s, d) = (cfg.rows_per_block, cfg.cols_per_block);
        // Block (i, j) in row-major order equals bits i·s·d .. (i+1)·s·d of
        // codeword j.
        for i in 0..cfg.shift_blocks {
            for (j, cw) in cws.iter().enumerate() {
                for r in 0..s {
                    for c in 0..d {
                        assert_eq!(packed.get(i * s + r, j * d + c), cw[i * s * d + r * d + c]);
                    }
                }
            }
        }
    }

    #[test]
    fn wrong_codeword_count_is_rejected() {
        let cfg = SiConfig::staircase(1, 1, 1, 2, 0);
        assert!(matches!(
            pack_codewords(&[vec![0]], &cfg),
            Err(SiError::CodewordShape(_))
        ));
    }

    #[test]
    fn staircase_occupancy() {
        // Shifts (0,1,2,3) with three codewords: block row i holds payload
        // in block columns i..i+3 and padding elsewhere.
        let cfg = SiConfig::staircase(4, 2, 3, 3, 7);
        for i in 0..4 {
            for j in 0..cfg.expanded_rounds() {
                let pad = cfg.is_padding(CodeSide::First, i, j);
                assert_eq!(pad, !(i..i + 3).contains(&j), "block ({i},{j})");
            }
        }
        let packed = pack_codewords(&random_codewords(&cfg, 13), &cfg).unwrap();
        let inter = shift(&packed, CodeSide::First, &cfg);
        for i in 0..4 {
            for j in 0..cfg.expanded_rounds() {
                for r in 0..cfg.rows_per_block {
                    for c in 0..cfg.cols_per_block {
                        let got = inter.padding_mask.get(i * 2 + r, j * 3 + c);
                        assert_eq!(got == 1, cfg.is_padding(CodeSide::First, i, j));
                    }
                }
            }
        }
    }

    #[test]
    fn zero_shift_is_identity() {
        let cfg = SiConfig {
            shift_blocks: 2,
            rows_per_block: 3,
            cols_per_block: 2,
            codewords: 2,
            max_shift: 0,
            shifts: [vec![0, 0], vec![0, 0]],
            padding_seed: 0,
            interleave: InterleaveVariant::BlockCycling,
        };
        cfg.validate().unwrap();
        assert_eq!(cfg.total_cols(), cfg.loaded_cols());
        let packed = pack_codewords(&random_codewords(&cfg, 14), &cfg).unwrap();
        let inter = shift(&packed, CodeSide::Second, &cfg);
        assert_eq!(inter.bits, packed);
        assert_eq!(inter.padding_mask.count_ones(), 0);
    }

    #[test]
    fn padding_is_seed_deterministic() {
        let cfg = SiConfig::staircase(4, 2, 3, 3, 21);
        let packed = pack_codewords(&random_codewords(&cfg, 15), &cfg).unwrap();
        let a = shift(&packed, CodeSide::First, &cfg);
        let b = shift(&packed, CodeSide::First, &cfg);
        assert_eq!(a, b);
        let other_seed = SiConfig {
            padding_seed: 22,
            ..cfg.clone()
        };
        let c = shift(&packed, CodeSide::First, &other_seed);
        assert_eq!(a.padding_mask, c.padding_mask);
        assert_ne!(a.bits, c.bits);
    }

    #[test]
    fn mapping_all_zeros_gives_all_a() {
        let z = BitMatrix::zeros(3, 4);
        let x = map_bases(&z, &z);
        for c in 0..4 {
            assert!(x.column(c).iter().all(|&b| b == Base::A));
        }
    }

    #[test]
    fn block_cycling_row_order() {
        let perm = RowPermutation::new(4, 2, InterleaveVariant::BlockCycling);
        let order: Vec<usize> = (0..8).map(|r| perm.forward(r)).collect();
        assert_eq!(order, vec![0, 2, 4, 6, 1, 3, 5, 7]);
    }

    #[test]
    fn row_cycling_is_the_inverse_schedule() {
        let a = RowPermutation::new(4, 2, InterleaveVariant::BlockCycling);
        let b = RowPermutation::new(4, 2, InterleaveVariant::RowCycling);
        let order: Vec<usize> = (0..8).map(|r| b.forward(r)).collect();
        assert_eq!(order, vec![0, 4, 1, 5, 2, 6, 3, 7]);
        for r in 0..8 {
            assert_eq!(a.forward(b.forward(r)), r);
            assert_eq!(b.forward(a.forward(r)), r);
        }
    }

    #[test]
    fn trivial_permutations_are_identity() {
        for (m, s) in [(1, 5), (5, 1)] {
            let perm = RowPermutation::new(m, s, InterleaveVariant::BlockCycling);
            for r in 0..m * s {
                assert_eq!(perm.forward(r), r);
            }
        }
    }

    #[test]
    fn interleave_roundtrip() {
        let mut x = QuatMatrix::filled(12, 5, Base::A);
        for z in 0..5 {
            for k in 0..12 {
                x.set(k, z, Base::from_index((k * 3 + z) % 4));
            }
        }
        let perm = RowPermutation::new(4, 3, InterleaveVariant::BlockCycling);
        assert_eq!(deinterleave(&interleave(&x, &perm), &perm), x);
    }

    #[test]
    fn every_row_window_sees_every_shift_block() {
        let cfg = SiConfig::staircase(4, 3, 1, 2, 0);
        let perm = cfg.permutation();
        for chunk in 0..cfg.rows_per_block {
            let mut blocks: Vec<usize> = (0..cfg.shift_blocks)
                .map(|k| cfg.block_of_row(perm.forward(chunk * cfg.shift_blocks + k)))
                .collect();
            blocks.sort_unstable();
            assert_eq!(blocks, (0..cfg.shift_blocks).collect::<Vec<_>>());
        }
    }

    #[test]
    fn encode_decode_roundtrip() {
        let cfg = SiConfig::staircase(4, 2, 3, 3, 33);
        let cw1 = random_codewords(&cfg, 16);
        let cw2 = random_codewords(&cfg, 17);
        let (x, meta) = encode_all(&cw1, &cw2, &cfg).unwrap();
        assert_eq!((x.rows(), x.cols()), (cfg.rows(), cfg.total_cols()));

        let xbar = deinterleave(&x, &meta.permutation);
        for (side, want) in [(CodeSide::First, &cw1), (CodeSide::Second, &cw2)] {
            let mut bits = BitMatrix::zeros(cfg.rows(), cfg.total_cols());
            for z in 0..cfg.total_cols() {
                for k in 0..cfg.rows() {
                    bits.set(k, z, xbar.get(k, z).bit(side) as u8);
                }
            }
            let packed = unshift(&bits, side, &cfg);
            assert_eq!(&unpack_codewords(&packed, &cfg).unwrap(), want);
        }
    }

    #[test]
    fn metadata_padding_agrees_with_transmitted_bases() {
        let cfg = SiConfig::staircase(3, 2, 2, 2, 5);
        let (x, meta) = encode_all(
            &random_codewords(&cfg, 18),
            &random_codewords(&cfg, 19),
            &cfg,
        )
        .unwrap();
        let xbar = deinterleave(&x, &meta.permutation);
        let mut saw_padding = false;
        for z in 0..cfg.total_cols() {
            for k in 0..cfg.rows() {
                for (u, side) in CodeSide::BOTH.iter().enumerate() {
                    if meta.padding_masks[u].get(k, z) == 1 {
                        saw_padding = true;
                        assert_eq!(
                            xbar.get(k, z).bit(*side) as u8,
                            meta.padding_bits[u].get(k, z)
                        );
                    } else {
                        assert_eq!(meta.padding_bits[u].get(k, z), 0);
                    }
                }
            }
        }
        assert!(saw_padding);
    }

    #[test]
    fn degenerate_config_is_plain_base_mapping() {
        let cfg = SiConfig::staircase(1, 2, 2, 1, 0);
        assert_eq!(cfg.max_shift, 0);
        let cw1 = vec![vec![0, 1, 0, 1]];
        let cw2 = vec![vec![0, 0, 1, 1]];
        let (x, _) = encode_all(&cw1, &cw2, &cfg).unwrap();
        // Row-major bit pairs: (0,0) (1,0) / (0,1) (1,1).
        assert_eq!(x.get(0, 0), Base::A);
        assert_eq!(x.get(0, 1), Base::T);
        assert_eq!(x.get(1, 0), Base::C);
        assert_eq!(x.get(1, 1), Base::G);
    }

    #[test]
    fn invalid_configs_are_rejected() {
        let mut cfg = SiConfig::staircase(4, 2, 3, 3, 0);
        cfg.shifts[0] = vec![0, 1, 2];
        assert!(cfg.validate().is_err());

        let mut cfg = SiConfig::staircase(4, 2, 3, 3, 0);
        cfg.shifts[1] = vec![0, 1, 2, 4];
        assert!(cfg.validate().is_err());

        // A missing shift class (no block with shift 2) breaks the round
        // schedule even though all values are in range.
        let mut cfg = SiConfig::staircase(4, 2, 3, 3, 0);
        cfg.shifts[0] = vec![0, 1, 1, 3];
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn fasta_export_shape() {
        let mut x = QuatMatrix::filled(3, 2, Base::A);
        x.set(1, 0, Base::C);
        x.set(2, 1, Base::G);
        assert_eq!(write_fasta(&x), ">col0\nACA\n>col1\nAAG\n");
    }

    #[test]
    fn metadata_serde_roundtrip() {
        let cfg = SiConfig::staircase(2, 2, 2, 2, 9);
        let (_, meta) = encode_all(
            &random_codewords(&cfg, 20),
            &random_codewords(&cfg, 21),
            &cfg,
        )
        .unwrap();
        let json = serde_json::to_string(&meta).unwrap();
        assert_eq!(serde_json::from_str::<EncodeMetadata>(&json).unwrap(), meta);
    }
}
