//! Binary LDPC codes: progressive edge-growth construction, systematic
//! encoding, syndrome checks and single-iteration flooding sum-product
//! decoding driven by external a-priori LLRs.
//!
//! The decoder here is deliberately iteration-at-a-time: the tandem decoder
//! interleaves detector updates between iterations, so the usual
//! run-to-convergence loop lives with the caller.

mod alist;
mod encoder;
mod peg;
mod sp;

pub use sp::SpDecoderState;

use num_rational::Ratio;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rng;

#[derive(Debug, Error)]
pub enum LdpcError {
    #[error("invalid code parameters: {0}")]
    InvalidParameters(String),
    #[error("edge placement failed at bit {bit} (graph too constrained); retry with another seed")]
    ConstructionFailed { bit: usize },
    #[error("parity-check matrix is rank deficient: rank {rank} < {n_checks} checks")]
    RankDeficient { rank: usize, n_checks: usize },
    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("decoder state has not completed any iteration")]
    NoIterations,
    #[error("malformed alist: {0}")]
    Alist(String),
}

/// Degree structure requested from the construction.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum CodeVariant {
    /// (3,6)-regular: every bit in 3 checks, every check over 6 bits.
    Regular36,
    /// Bit-degree profile given as (degree, fraction-of-bits) pairs; check
    /// degrees come out concentrated around the implied average.
    Irregular(Vec<(usize, f64)>),
}

/// A binary LDPC code with a precomputed systematic encoder.
///
/// The parity-check matrix is stored as the two adjacency views of the
/// Tanner graph.  Edges are identified check-major: edge ids of check `c`
/// are consecutive, one per neighbor slot.
#[derive(Clone, Debug)]
pub struct LdpcCode {
    n_bits: usize,
    n_checks: usize,
    check_adjacency: Vec<Vec<u32>>,
    bit_adjacency: Vec<Vec<u32>>,
    edge_offsets: Vec<u32>,
    /// Per bit, the edge ids of its incident checks in ascending check order.
    bit_edges: Vec<Vec<u32>>,
    encoder: encoder::SystematicEncoder,
    rate: Ratio<u64>,
}

impl LdpcCode {
    /// Build a code by progressive edge growth.
    ///
    /// `rate` is the design rate; the requested degree structure must be
    /// consistent with it.  The returned code's `rate()` is derived from the
    /// actual rank, which for a successful construction equals the design
    /// rate.  Fails if an edge cannot be placed without creating a parallel
    /// edge (tiny sizes) or if the parity-check matrix comes out rank
    /// deficient; both are worth a retry with a fresh seed.
    pub fn construct(
        n_bits: usize,
        rate: Ratio<u64>,
        variant: &CodeVariant,
        seed: u64,
    ) -> Result<Self, LdpcError> {
        if n_bits == 0 || !n_bits.is_multiple_of(2) {
            return Err(LdpcError::InvalidParameters(format!(
                "n_bits must be positive and even, got {n_bits}"
            )));
        }
        if rate <= Ratio::new(0, 1) || rate >= Ratio::new(1, 1) {
            return Err(LdpcError::InvalidParameters(format!(
                "rate must be in (0,1), got {rate}"
            )));
        }
        let checks_ratio = (Ratio::from_integer(1u64) - rate) * Ratio::from_integer(n_bits as u64);
        if !checks_ratio.is_integer() {
            return Err(LdpcError::InvalidParameters(format!(
                "n_bits * (1 - rate) must be an integer, got {checks_ratio}"
            )));
        }
        let n_checks = *checks_ratio.numer() as usize / *checks_ratio.denom() as usize;
        if n_checks == 0 {
            return Err(LdpcError::InvalidParameters("no checks requested".into()));
        }

        let bit_degrees = degree_sequence(n_bits, n_checks, variant)?;
        let strict_cap = matches!(variant, CodeVariant::Regular36);
        let bit_adjacency = peg::build(n_bits, n_checks, &bit_degrees, strict_cap, seed)?;
        Self::from_bit_adjacency(n_bits, n_checks, bit_adjacency)
    }

    /// Convenience constructor for the default (3,6)-regular, rate-1/2 code.
    pub fn regular_3_6(n_bits: usize, seed: u64) -> Result<Self, LdpcError> {
        Self::construct(n_bits, Ratio::new(1, 2), &CodeVariant::Regular36, seed)
    }

    /// Like [`LdpcCode::regular_3_6`] but retries a few derived seeds when a
    /// construction comes out rank deficient or stuck.
    pub fn regular_3_6_retrying(
        n_bits: usize,
        seed: u64,
        attempts: usize,
    ) -> Result<Self, LdpcError> {
        let mut last = None;
        for attempt in 0..attempts.max(1) {
            match Self::regular_3_6(n_bits, rng::derive(seed, attempt as u64)) {
                Ok(code) => return Ok(code),
                Err(
                    e @ (LdpcError::ConstructionFailed { .. } | LdpcError::RankDeficient { .. }),
                ) => {
                    last = Some(e);
                }
                Err(e) => return Err(e),
            }
        }
        Err(last.expect("at least one attempt"))
    }

    /// Assemble a code from a check-to-bit adjacency list (used by the
    /// construction and the alist importer).
    fn from_check_adjacency(
        n_bits: usize,
        check_adjacency: Vec<Vec<u32>>,
    ) -> Result<Self, LdpcError> {
        let n_checks = check_adjacency.len();
        let mut bit_adjacency = vec![Vec::new(); n_bits];
        for (c, bits) in check_adjacency.iter().enumerate() {
            for &b in bits {
                if b as usize >= n_bits {
                    return Err(LdpcError::InvalidParameters(format!(
                        "check {c} references bit {b} out of range"
                    )));
                }
                bit_adjacency[b as usize].push(c as u32);
            }
        }
        Self::assemble(n_bits, n_checks, check_adjacency, bit_adjacency)
    }

    fn from_bit_adjacency(
        n_bits: usize,
        n_checks: usize,
        bit_adjacency: Vec<Vec<u32>>,
    ) -> Result<Self, LdpcError> {
        let mut check_adjacency = vec![Vec::new(); n_checks];
        for (b, checks) in bit_adjacency.iter().enumerate() {
            for &c in checks {
                check_adjacency[c as usize].push(b as u32);
            }
        }
        Self::assemble(n_bits, n_checks, check_adjacency, bit_adjacency)
    }

    fn assemble(
        n_bits: usize,
        n_checks: usize,
        mut check_adjacency: Vec<Vec<u32>>,
        mut bit_adjacency: Vec<Vec<u32>>,
    ) -> Result<Self, LdpcError> {
        for bits in check_adjacency.iter_mut() {
            bits.sort_unstable();
            if bits.windows(2).any(|w| w[0] == w[1]) {
                return Err(LdpcError::InvalidParameters(
                    "parallel edge in graph".into(),
                ));
            }
        }
        for checks in bit_adjacency.iter_mut() {
            checks.sort_unstable();
        }

        let mut edge_offsets = Vec::with_capacity(n_checks + 1);
        let mut off = 0u32;
        for bits in &check_adjacency {
            edge_offsets.push(off);
            off += bits.len() as u32;
        }
        edge_offsets.push(off);

        // Edge id of (check, bit): offset of the check plus the bit's slot.
        let mut bit_edges = vec![Vec::new(); n_bits];
        for (b, checks) in bit_adjacency.iter().enumerate() {
            for &c in checks {
                let slot = check_adjacency[c as usize]
                    .binary_search(&(b as u32))
                    .expect("edge present in both views");
                bit_edges[b].push(edge_offsets[c as usize] + slot as u32);
            }
        }

        let encoder = encoder::precompute(n_bits, &check_adjacency)?;
        let rate = Ratio::new((n_bits - encoder.rank) as u64, n_bits as u64);
        Ok(LdpcCode {
            n_bits,
            n_checks,
            check_adjacency,
            bit_adjacency,
            edge_offsets,
            bit_edges,
            encoder,
            rate,
        })
    }

    pub fn n_bits(&self) -> usize {
        self.n_bits
    }

    pub fn n_checks(&self) -> usize {
        self.n_checks
    }

    pub fn n_edges(&self) -> usize {
        *self.edge_offsets.last().unwrap() as usize
    }

    /// Number of information bits per codeword.
    pub fn data_len(&self) -> usize {
        self.encoder.data_positions.len()
    }

    /// Actual code rate, (n_bits - rank) / n_bits.
    pub fn rate(&self) -> Ratio<u64> {
        self.rate
    }

    pub fn check_neighbors(&self, check: usize) -> &[u32] {
        &self.check_adjacency[check]
    }

    pub fn bit_neighbors(&self, bit: usize) -> &[u32] {
        &self.bit_adjacency[bit]
    }

    /// Edge id for the given check and neighbor slot.
    pub fn edge_id(&self, check: usize, slot: usize) -> usize {
        self.edge_offsets[check] as usize + slot
    }

    /// Positions holding the information bits of a systematic codeword.
    pub fn data_positions(&self) -> &[u32] {
        &self.encoder.data_positions
    }

    /// Systematically encode `data` (length `data_len()`) into a codeword.
    pub fn encode(&self, data: &[u8]) -> Result<Vec<u8>, LdpcError> {
        if data.len() != self.data_len() {
            return Err(LdpcError::LengthMismatch {
                expected: self.data_len(),
                got: data.len(),
            });
        }
        Ok(self.encoder.encode(self.n_bits, data))
    }

    /// Recover the information bits from a codeword's systematic positions.
    pub fn extract_data(&self, codeword: &[u8]) -> Result<Vec<u8>, LdpcError> {
        if codeword.len() != self.n_bits {
            return Err(LdpcError::LengthMismatch {
                expected: self.n_bits,
                got: codeword.len(),
            });
        }
        Ok(self
            .encoder
            .data_positions
            .iter()
            .map(|&p| codeword[p as usize])
            .collect())
    }

    /// True when every check sums to zero over `word`.
    pub fn syndrome_check(&self, word: &[u8]) -> Result<bool, LdpcError> {
        if word.len() != self.n_bits {
            return Err(LdpcError::LengthMismatch {
                expected: self.n_bits,
                got: word.len(),
            });
        }
        Ok(self.check_adjacency.iter().all(|bits| {
            bits.iter()
                .fold(0u8, |acc, &b| acc ^ (word[b as usize] & 1))
                == 0
        }))
    }

    /// Serialize the parity-check matrix in the standard alist text format.
    pub fn to_alist(&self) -> String {
        alist::write(self)
    }

    /// Parse an alist file into a code (recomputing the encoder).
    pub fn from_alist(text: &str) -> Result<Self, LdpcError> {
        let (n_bits, check_adjacency) = alist::parse(text)?;
        Self::from_check_adjacency(n_bits, check_adjacency)
    }
}

fn degree_sequence(
    n_bits: usize,
    n_checks: usize,
    variant: &CodeVariant,
) -> Result<Vec<usize>, LdpcError> {
    match variant {
        CodeVariant::Regular36 => {
            if n_bits * 3 != n_checks * 6 {
                return Err(LdpcError::InvalidParameters(format!(
                    "(3,6)-regular needs n_checks = n_bits/2, got {n_checks} checks for {n_bits} bits"
                )));
            }
            Ok(vec![3; n_bits])
        }
        CodeVariant::Irregular(profile) => {
            if profile.is_empty() {
                return Err(LdpcError::InvalidParameters("empty degree profile".into()));
            }
            let total: f64 = profile.iter().map(|&(_, f)| f).sum();
            if (total - 1.0).abs() > 1e-9 {
                return Err(LdpcError::InvalidParameters(format!(
                    "degree profile fractions sum to {total}, expected 1"
                )));
            }
            let mut degrees = Vec::with_capacity(n_bits);
            for &(degree, fraction) in profile {
                if degree == 0 {
                    return Err(LdpcError::InvalidParameters("degree 0 in profile".into()));
                }
                let count = fraction * n_bits as f64;
                if (count - count.round()).abs() > 1e-9 {
                    return Err(LdpcError::InvalidParameters(format!(
                        "fraction {fraction} of {n_bits} bits is not an integer"
                    )));
                }
                degrees.extend(std::iter::repeat_n(degree, count.round() as usize));
            }
            if degrees.len() != n_bits {
                return Err(LdpcError::InvalidParameters(
                    "degree profile does not cover all bits".into(),
                ));
            }
            degrees.sort_unstable();
            Ok(degrees)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    fn four_cycle_free(code: &LdpcCode) -> bool {
        // Two checks sharing two bits form a 4-cycle.
        for c1 in 0..code.n_checks() {
            for c2 in (c1 + 1)..code.n_checks() {
                let shared = code
                    .check_neighbors(c1)
                    .iter()
                    .filter(|b| code.check_neighbors(c2).binary_search(b).is_ok())
                    .count();
                if shared >= 2 {
                    return false;
                }
            }
        }
        true
    }

    #[test]
    fn tiny_regular_code_has_exact_degrees_and_no_parallel_edges() {
        let code = LdpcCode::regular_3_6(8, 1).unwrap();
        assert_eq!(code.n_checks(), 4);
        for b in 0..8 {
            assert_eq!(code.bit_neighbors(b).len(), 3);
            // Sorted and duplicate-free adjacency means no parallel edges.
            assert!(code.bit_neighbors(b).windows(2).all(|w| w[0] < w[1]));
        }
        for c in 0..4 {
            assert_eq!(code.check_neighbors(c).len(), 6);
        }
        // At this size two bits always share two checks, so 4-cycles are
        // unavoidable; the construction must still return cleanly.
        assert!(!four_cycle_free(&code));
    }

    #[test]
    fn moderate_regular_code_reaches_girth_six() {
        let code = LdpcCode::regular_3_6(100, 3).unwrap();
        assert!(four_cycle_free(&code));
        assert_eq!(code.rate(), Ratio::new(1, 2));
    }

    #[test]
    fn construction_is_deterministic_per_seed() {
        let a = LdpcCode::regular_3_6(64, 11).unwrap();
        let b = LdpcCode::regular_3_6(64, 11).unwrap();
        let c = LdpcCode::regular_3_6(64, 12).unwrap();
        assert_eq!(a.check_adjacency, b.check_adjacency);
        assert_ne!(a.check_adjacency, c.check_adjacency);
    }

    #[test]
    fn infeasible_sizes_are_rejected() {
        assert!(matches!(
            LdpcCode::regular_3_6(7, 1),
            Err(LdpcError::InvalidParameters(_))
        ));
        // 2 checks cannot host 3 distinct edges per bit.
        assert!(matches!(
            LdpcCode::construct(4, Ratio::new(1, 2), &CodeVariant::Regular36, 1),
            Err(LdpcError::InvalidParameters(_))
        ));
        assert!(matches!(
            LdpcCode::construct(10, Ratio::new(1, 3), &CodeVariant::Regular36, 1),
            Err(LdpcError::InvalidParameters(_))
        ));
    }

    #[test]
    fn irregular_profile_is_honored() {
        // Note: a profile with only even bit degrees can never reach full
        // row rank (every column has even parity, so the rows sum to zero).
        let profile = CodeVariant::Irregular(vec![(2, 0.5), (3, 0.5)]);
        let code = LdpcCode::construct(32, Ratio::new(1, 2), &profile, 5).unwrap();
        let mut twos = 0;
        let mut threes = 0;
        for b in 0..32 {
            match code.bit_neighbors(b).len() {
                2 => twos += 1,
                3 => threes += 1,
                d => panic!("unexpected bit degree {d}"),
            }
        }
        assert_eq!((twos, threes), (16, 16));
    }

    #[test]
    fn encode_produces_valid_codewords_with_recoverable_data() {
        let code = LdpcCode::regular_3_6(120, 2).unwrap();
        let mut rng = crate::rng::stream(77);
        for _ in 0..20 {
            let data: Vec<u8> = (0..code.data_len())
                .map(|_| rng.gen_range(0..2u8))
                .collect();
            let cw = code.encode(&data).unwrap();
            assert!(code.syndrome_check(&cw).unwrap());
            assert_eq!(code.extract_data(&cw).unwrap(), data);
        }
        // The all-zero word is always a codeword.
        assert!(code.syndrome_check(&[0; 120]).unwrap());
    }

    #[test]
    fn syndrome_rejects_corrupted_words_and_bad_lengths() {
        let code = LdpcCode::regular_3_6(64, 9).unwrap();
        let cw = code.encode(&vec![0; code.data_len()]).unwrap();
        let mut bad = cw.clone();
        bad[5] ^= 1;
        assert!(!code.syndrome_check(&bad).unwrap());
        assert!(matches!(
            code.syndrome_check(&bad[..10]),
            Err(LdpcError::LengthMismatch { .. })
        ));
        assert!(matches!(
            code.encode(&[0u8; 3]),
            Err(LdpcError::LengthMismatch { .. })
        ));
    }
}
