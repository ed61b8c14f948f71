//! Systematic encoder precomputation.
//!
//! Gauss-Jordan elimination over GF(2) picks one pivot column per check row.
//! Pivot columns become the parity positions; the rest carry data verbatim.
//! Each reduced row then reads "parity bit = XOR of these data bits", stored
//! packed so a codeword costs one AND+popcount pass per parity bit.

use super::LdpcError;

#[derive(Clone, Debug)]
pub(super) struct SystematicEncoder {
    pub data_positions: Vec<u32>,
    pub parity_positions: Vec<u32>,
    /// Row j: mask over data positions feeding parity_positions[j].
    eqs: Vec<Vec<u64>>,
    data_words: usize,
    pub rank: usize,
}

pub(super) fn precompute(
    n_bits: usize,
    check_adjacency: &[Vec<u32>],
) -> Result<SystematicEncoder, LdpcError> {
    let n_checks = check_adjacency.len();
    let words = n_bits.div_ceil(64);
    let mut rows: Vec<Vec<u64>> = vec![vec![0u64; words]; n_checks];
    for (c, bits) in check_adjacency.iter().enumerate() {
        for &b in bits {
            rows[c][b as usize / 64] |= 1u64 << (b as usize % 64);
        }
    }

    let mut rank = 0usize;
    let mut pivot_cols = Vec::new();
    for col in 0..n_bits {
        let (w, mask) = (col / 64, 1u64 << (col % 64));
        let Some(pivot) = (rank..n_checks).find(|&r| rows[r][w] & mask != 0) else {
            continue;
        };
        rows.swap(rank, pivot);
        let pivot_row = std::mem::take(&mut rows[rank]);
        for (r, row) in rows.iter_mut().enumerate() {
            if r != rank && row[w] & mask != 0 {
                for (dst, src) in row.iter_mut().zip(&pivot_row) {
                    *dst ^= src;
                }
            }
        }
        rows[rank] = pivot_row;
        pivot_cols.push(col as u32);
        rank += 1;
        if rank == n_checks {
            break;
        }
    }
    if rank < n_checks {
        return Err(LdpcError::RankDeficient { rank, n_checks });
    }

    let pivot_set: std::collections::HashSet<u32> = pivot_cols.iter().copied().collect();
    let data_positions: Vec<u32> = (0..n_bits as u32)
        .filter(|p| !pivot_set.contains(p))
        .collect();
    let data_words = data_positions.len().div_ceil(64).max(1);

    // Re-index each reduced row onto the data positions.
    let mut eqs = vec![vec![0u64; data_words]; rank];
    for (j, row) in rows.iter().take(rank).enumerate() {
        for (i, &p) in data_positions.iter().enumerate() {
            if row[p as usize / 64] & (1u64 << (p as usize % 64)) != 0 {
                eqs[j][i / 64] |= 1u64 << (i % 64);
            }
        }
    }

    Ok(SystematicEncoder {
        data_positions,
        parity_positions: pivot_cols,
        eqs,
        data_words,
        rank,
    })
}

impl SystematicEncoder {
    pub(super) fn encode(&self, n_bits: usize, data: &[u8]) -> Vec<u8> {
        let mut packed = vec![0u64; self.data_words];
        for (i, &bit) in data.iter().enumerate() {
            packed[i / 64] |= ((bit & 1) as u64) << (i % 64);
        }
        let mut codeword = vec![0u8; n_bits];
        for (i, &p) in self.data_positions.iter().enumerate() {
            codeword[p as usize] = data[i] & 1;
        }
        for (j, eq) in self.eqs.iter().enumerate() {
            let mut acc = 0u64;
            for (e, d) in eq.iter().zip(&packed) {
                acc ^= e & d;
            }
            codeword[self.parity_positions[j] as usize] = (acc.count_ones() & 1) as u8;
        }
        codeword
    }
}
