//! Flooding sum-product decoding, one iteration per call.
//!
//! Messages use the LLR convention ln(p0/p1): positive means bit 0.
//! Every message is clamped to +/-LLR_CLAMP before it feeds the tanh rule.
//! Exclusion sums and products are evaluated term by term in ascending
//! neighbor order; reference implementations that do the same reproduce
//! these messages to the last few ulps.

use super::{LdpcCode, LdpcError};
use crate::clamp_llr;

/// Message state of one decoder instance.  Fresh state is all-zero
/// messages; the same state may be carried across calls while the a-priori
/// vector changes between them.
#[derive(Clone, Debug)]
pub struct SpDecoderState {
    bit_to_check: Vec<f64>,
    check_to_bit: Vec<f64>,
    posteriors: Vec<f64>,
    hard: Vec<u8>,
    iterations: usize,
}

impl SpDecoderState {
    pub fn new(code: &LdpcCode) -> Self {
        SpDecoderState {
            bit_to_check: vec![0.0; code.n_edges()],
            check_to_bit: vec![0.0; code.n_edges()],
            posteriors: vec![0.0; code.n_bits()],
            hard: vec![0u8; code.n_bits()],
            iterations: 0,
        }
    }

    pub fn iterations(&self) -> usize {
        self.iterations
    }

    pub fn posteriors(&self) -> &[f64] {
        &self.posteriors
    }

    /// Hard decision per bit; an exactly zero posterior decides 0.
    pub fn hard_decision(&self) -> &[u8] {
        &self.hard
    }

    /// Edge-indexed messages (bit-to-check, check-to-bit); see
    /// [`LdpcCode::edge_id`] for the indexing.
    pub fn messages(&self) -> (&[f64], &[f64]) {
        (&self.bit_to_check, &self.check_to_bit)
    }

    /// Per-bit extrinsic information: posterior minus a-priori.
    pub fn extrinsic_llrs(&self, a_priori: &[f64]) -> Result<Vec<f64>, LdpcError> {
        if self.iterations == 0 {
            return Err(LdpcError::NoIterations);
        }
        if a_priori.len() != self.posteriors.len() {
            return Err(LdpcError::LengthMismatch {
                expected: self.posteriors.len(),
                got: a_priori.len(),
            });
        }
        Ok(self
            .posteriors
            .iter()
            .zip(a_priori)
            .map(|(p, a)| p - a)
            .collect())
    }
}

impl LdpcCode {
    /// Run one flooding iteration: bit updates, then check updates, then
    /// posteriors and hard decisions.
    pub fn sp_iterate(
        &self,
        state: &mut SpDecoderState,
        a_priori: &[f64],
    ) -> Result<(), LdpcError> {
        if a_priori.len() != self.n_bits() {
            return Err(LdpcError::LengthMismatch {
                expected: self.n_bits(),
                got: a_priori.len(),
            });
        }
        debug_assert_eq!(state.bit_to_check.len(), self.n_edges());

        for (b, &prior) in a_priori.iter().enumerate() {
            let edges = &self.bit_edges[b];
            for (slot, &e) in edges.iter().enumerate() {
                let mut sum = prior;
                for (other, &e2) in edges.iter().enumerate() {
                    if other != slot {
                        sum += state.check_to_bit[e2 as usize];
                    }
                }
                state.bit_to_check[e as usize] = clamp_llr(sum);
            }
        }

        for c in 0..self.n_checks() {
            let first = self.edge_id(c, 0);
            let degree = self.check_neighbors(c).len();
            for slot in 0..degree {
                let mut prod = 1.0f64;
                for other in 0..degree {
                    if other != slot {
                        prod *= (state.bit_to_check[first + other] / 2.0).tanh();
                    }
                }
                state.check_to_bit[first + slot] = clamp_llr(2.0 * prod.atanh());
            }
        }

        for (b, &prior) in a_priori.iter().enumerate() {
            let mut post = prior;
            for &e in &self.bit_edges[b] {
                post += state.check_to_bit[e as usize];
            }
            state.posteriors[b] = post;
            state.hard[b] = (post < 0.0) as u8;
        }
        state.iterations += 1;
        Ok(())
    }
}
