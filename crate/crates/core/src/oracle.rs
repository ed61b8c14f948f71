//! Slow reference implementations used to cross-check the fast paths.
//!
//! Everything here recomputes its answer from first principles — dense
//! matrices, explicit path enumeration, explicit four-term sums — and shares
//! no code with the implementations under test beyond public data types.
//! The test suites compare the two sides on small instances; the CLI exposes
//! the same checks through `oracle-check` so a release build can be audited
//! on demand.

// Reference code is written in plain indexed style on purpose: the loops
// mirror the summations they implement, term by term.
#![allow(clippy::needless_range_loop)]

use crate::base::{Base, BaseDist, CodeSide, UNIFORM_DIST};
use crate::channel::ChannelParams;
use crate::ldpc::LdpcCode;
use crate::matrix::BitMatrix;
use crate::LLR_CLAMP;

/// Message state of the dense sum-product reference after a fixed number of
/// flooding iterations.  Message matrices are indexed `[check][bit]` and
/// only positions with an edge are meaningful.
pub struct SpReference {
    pub bit_to_check: Vec<Vec<f64>>,
    pub check_to_bit: Vec<Vec<f64>>,
    pub posteriors: Vec<f64>,
    pub hard: Vec<u8>,
}

/// Dense parity-check matrix of a code, for the reference decoder.
pub fn dense_parity(code: &LdpcCode) -> BitMatrix {
    let mut h = BitMatrix::zeros(code.n_checks(), code.n_bits());
    for c in 0..code.n_checks() {
        for &b in code.check_neighbors(c) {
            h.set(c, b as usize, 1);
        }
    }
    h
}

/// Flooding sum-product on a dense parity-check matrix: bit updates, then
/// check updates, then posteriors, with every message clamped to
/// `±LLR_CLAMP` and exclusion terms folded in ascending index order.
pub fn sp_reference(h: &BitMatrix, a_priori: &[f64], iterations: usize) -> SpReference {
    let (m, n) = (h.rows(), h.cols());
    assert_eq!(n, a_priori.len());
    let clamp = |x: f64| x.clamp(-LLR_CLAMP, LLR_CLAMP);
    let mut b2c = vec![vec![0.0f64; n]; m];
    let mut c2b = vec![vec![0.0f64; n]; m];
    for _ in 0..iterations {
        let mut next = vec![vec![0.0f64; n]; m];
        for b in 0..n {
            for c in 0..m {
                if h.get(c, b) == 0 {
                    continue;
                }
                let mut sum = a_priori[b];
                for (c2, row) in c2b.iter().enumerate() {
                    if c2 != c && h.get(c2, b) == 1 {
                        sum += row[b];
                    }
                }
                next[c][b] = clamp(sum);
            }
        }
        b2c = next;
        let mut next = vec![vec![0.0f64; n]; m];
        for c in 0..m {
            for b in 0..n {
                if h.get(c, b) == 0 {
                    continue;
                }
                let mut prod = 1.0f64;
                for b2 in 0..n {
                    if b2 != b && h.get(c, b2) == 1 {
                        prod *= (b2c[c][b2] / 2.0).tanh();
                    }
                }
                next[c][b] = clamp(2.0 * prod.atanh());
            }
        }
        c2b = next;
    }
    let posteriors: Vec<f64> = (0..n)
        .map(|b| {
            let mut post = a_priori[b];
            for (c, row) in c2b.iter().enumerate() {
                if h.get(c, b) == 1 {
                    post += row[b];
                }
            }
            post
        })
        .collect();
    let hard = posteriors.iter().map(|&p| (p < 0.0) as u8).collect();
    SpReference {
        bit_to_check: b2c,
        check_to_bit: c2b,
        posteriors,
        hard,
    }
}

fn emission(params: &ChannelParams, v: usize, seen: Base) -> f64 {
    if v == seen.index() {
        1.0 - params.substitution
    } else {
        params.substitution / 3.0
    }
}

#[allow(clippy::too_many_arguments)]
fn walk_events(
    k_target: usize,
    pos: usize,
    drift: i64,
    w: [f64; 4],
    received: &[Base],
    priors: &[BaseDist],
    params: &ChannelParams,
    d_max: i64,
    acc: &mut [f64; 4],
) {
    let n = priors.len();
    let n_out = received.len() as i64;
    if pos == n {
        if pos as i64 + drift == n_out {
            for (a, x) in acc.iter_mut().zip(&w) {
                *a += x;
            }
        }
        return;
    }
    let o = pos as i64 + drift;
    let p_i = params.insertion;
    let p_d = params.deletion;
    let del_ok = drift > -d_max;
    let ins_ok = drift < d_max;
    // Disallowed moves at the drift boundary fold into plain transmission.
    let p_trans = 1.0 - p_i - p_d + if del_ok { 0.0 } else { p_d } + if ins_ok { 0.0 } else { p_i };

    if del_ok && p_d > 0.0 {
        let mut w2 = w;
        for x in &mut w2 {
            *x *= p_d;
        }
        walk_events(
            k_target,
            pos + 1,
            drift - 1,
            w2,
            received,
            priors,
            params,
            d_max,
            acc,
        );
    }
    if p_trans > 0.0 && o < n_out {
        let y = received[o as usize];
        let mut w2 = w;
        if pos == k_target {
            for (v, x) in w2.iter_mut().enumerate() {
                *x *= p_trans * emission(params, v, y);
            }
        } else {
            let marginal: f64 = (0..4)
                .map(|v| priors[pos][v] * emission(params, v, y))
                .sum();
            for x in &mut w2 {
                *x *= p_trans * marginal;
            }
        }
        walk_events(
            k_target,
            pos + 1,
            drift,
            w2,
            received,
            priors,
            params,
            d_max,
            acc,
        );
    }
    if ins_ok && p_i > 0.0 && o + 1 < n_out {
        // Both copies of an insertion descend from the same input base.
        let y1 = received[o as usize];
        let y2 = received[o as usize + 1];
        let mut w2 = w;
        if pos == k_target {
            for (v, x) in w2.iter_mut().enumerate() {
                *x *= p_i * emission(params, v, y1) * emission(params, v, y2);
            }
        } else {
            let marginal: f64 = (0..4)
                .map(|v| priors[pos][v] * emission(params, v, y1) * emission(params, v, y2))
                .sum();
            for x in &mut w2 {
                *x *= p_i * marginal;
            }
        }
        walk_events(
            k_target,
            pos + 1,
            drift + 1,
            w2,
            received,
            priors,
            params,
            d_max,
            acc,
        );
    }
}

/// Symbol-wise posteriors by brute-force enumeration of every event
/// sequence (deletion / transmission / insertion per position) whose drift
/// stays within `±d_max`.  The prior of the queried position is excluded,
/// the priors of all other positions are marginalized.  Exponential in the
/// column length; intended for lengths up to roughly a dozen.
pub fn fb_reference(
    received: &[Base],
    priors: &[BaseDist],
    d_max: usize,
    params: &ChannelParams,
) -> Vec<BaseDist> {
    let n = priors.len();
    if received.len() + d_max < n {
        return vec![UNIFORM_DIST; n];
    }
    let received = &received[..received.len().min(n + d_max)];
    let mut out = Vec::with_capacity(n);
    for k in 0..n {
        let mut acc = [0.0f64; 4];
        walk_events(
            k,
            0,
            0,
            [1.0; 4],
            received,
            priors,
            params,
            d_max as i64,
            &mut acc,
        );
        let sum: f64 = acc.iter().sum();
        if sum > 0.0 && sum.is_finite() {
            for x in &mut acc {
                *x /= sum;
            }
        } else {
            acc = UNIFORM_DIST;
        }
        out.push(acc);
    }
    out
}

/// A-priori bit LLR by explicit four-term enumeration: weight every base by
/// the likelihood tuple and the partner-bit factor, then take the log-ratio
/// of the side-`side` bit being 0 versus 1.  Exactly one of
/// `partner_extrinsic` / `known_bit` must be given.
pub fn input_llr_reference(
    gamma: &BaseDist,
    side: CodeSide,
    partner_extrinsic: Option<f64>,
    known_bit: Option<u8>,
) -> f64 {
    let other = side.other();
    let mut num = 0.0;
    let mut den = 0.0;
    for (v, &g) in gamma.iter().enumerate() {
        let base = Base::from_index(v);
        let w = match (partner_extrinsic, known_bit) {
            (Some(q), None) => {
                // Logistic weight written as a symmetric two-term softmax.
                let e0 = (q / 2.0).exp();
                let e1 = (-q / 2.0).exp();
                if base.bit(other) {
                    e1 / (e0 + e1)
                } else {
                    e0 / (e0 + e1)
                }
            }
            (None, Some(s)) => (base.bit(other) as u8 == s) as u8 as f64,
            _ => panic!("exactly one partner kind must be given"),
        };
        if base.bit(side) {
            den += g * w;
        } else {
            num += g * w;
        }
    }
    if num == 0.0 && den == 0.0 {
        0.0
    } else if den == 0.0 {
        LLR_CLAMP
    } else if num == 0.0 {
        -LLR_CLAMP
    } else {
        (num / den).ln().clamp(-LLR_CLAMP, LLR_CLAMP)
    }
}
