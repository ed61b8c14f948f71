//! Insertion/deletion detection on a drift lattice.
//!
//! A received column is modeled as the output of a hidden Markov process
//! whose state is the drift δ = (symbols emitted) − (symbols consumed),
//! a random walk with reflecting boundaries on [−D_max, +D_max].  Per input
//! symbol: deletion (δ−1, no emission), insertion (δ+1, two emissions from
//! the same input base, each independently substituted), or transmission
//! (δ unchanged, one emission).  At a boundary the disallowed move's mass is
//! folded into the transmission branch.
//!
//! `forward_backward` returns, per input position, the likelihood tuple
//! γ(k,·) ∝ p(received | x(k)=v), marginalized over drift paths with the
//! supplied priors at every *other* position — position k's own prior is
//! excluded, so the result is extrinsic and can be recombined with decoder
//! messages without double counting.

use rayon::prelude::*;

use crate::base::{normalize, BaseDist, UNIFORM_DIST};
use crate::channel::{ChannelParams, ReceivedPool};
use crate::Base;

/// Maximum drift honored by the lattice for a length-`n` column:
/// `⌈|n(p_i−p_d)| + 5·√(n(p_i+p_d−(p_i−p_d)²))⌉`, at least 1 whenever
/// insertions or deletions are possible at all.
pub fn compute_dmax(n: usize, p_i: f64, p_d: f64) -> usize {
    if p_i + p_d <= 0.0 {
        return 0;
    }
    let nf = n as f64;
    let diff = p_i - p_d;
    let value = (nf * diff).abs() + 5.0 * (nf * (p_i + p_d - diff * diff)).sqrt();
    (value.ceil() as usize).max(1)
}

/// Immutable description of the drift walk: state bounds plus the channel
/// probabilities driving transitions and emissions.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DriftLattice {
    pub d_max: usize,
    pub params: ChannelParams,
}

impl DriftLattice {
    pub fn new(d_max: usize, params: ChannelParams) -> Self {
        DriftLattice { d_max, params }
    }

    /// Lattice sized for columns of length `n`.
    pub fn for_source(n: usize, params: ChannelParams) -> Self {
        DriftLattice::new(compute_dmax(n, params.insertion, params.deletion), params)
    }

    /// Number of drift states `D = 2·D_max + 1`.
    pub fn states(&self) -> usize {
        2 * self.d_max + 1
    }

    // Transition weights at state index j (δ = j − d_max), boundary mass
    // folded into the transmission branch.
    #[inline]
    fn p_del(&self, j: usize) -> f64 {
        if j == 0 {
            0.0
        } else {
            self.params.deletion
        }
    }

    #[inline]
    fn p_ins(&self, j: usize) -> f64 {
        if j == self.states() - 1 {
            0.0
        } else {
            self.params.insertion
        }
    }

    #[inline]
    fn p_trans(&self, j: usize) -> f64 {
        let mut p = 1.0 - self.params.insertion - self.params.deletion;
        if j == 0 {
            p += self.params.deletion;
        }
        if j == self.states() - 1 {
            p += self.params.insertion;
        }
        p
    }
}

#[inline]
fn emission(params: &ChannelParams, v: usize, seen: Base) -> f64 {
    if v == seen.index() {
        1.0 - params.substitution
    } else {
        params.substitution / 3.0
    }
}

/// Prior-weighted emission probability of one observed symbol.
#[inline]
fn marginal_single(params: &ChannelParams, prior: &BaseDist, seen: Base) -> f64 {
    (0..4).map(|v| prior[v] * emission(params, v, seen)).sum()
}

/// Prior-weighted joint emission of an inserted pair (both copies stem from
/// the same input base).
#[inline]
fn marginal_pair(params: &ChannelParams, prior: &BaseDist, a: Base, b: Base) -> f64 {
    (0..4)
        .map(|v| prior[v] * emission(params, v, a) * emission(params, v, b))
        .sum()
}

/// Extrinsic per-position base likelihoods for one received column.
///
/// `priors` must hold one distribution per *transmitted* position, in
/// transmission order.  Returns one normalized tuple per position.  Columns
/// whose length falls outside the drift cap are truncated (too long) or
/// yield uniform output (too short), both with a logged warning; a lattice
/// with no surviving path likewise falls back to uniform.
pub fn forward_backward(
    received: &[Base],
    priors: &[BaseDist],
    lattice: &DriftLattice,
) -> Vec<BaseDist> {
    let n = priors.len();
    if n == 0 {
        return Vec::new();
    }
    let d_max = lattice.d_max;
    let d = lattice.states();
    let params = &lattice.params;

    let mut received = received;
    if received.len() > n + d_max {
        log::warn!(
            "received column of length {} exceeds drift cap {} + {}; truncating",
            received.len(),
            n,
            d_max
        );
        received = &received[..n + d_max];
    }
    let n_out = received.len();
    if n_out + d_max < n {
        log::warn!(
            "received column of length {n_out} below drift floor {n} - {d_max}; treating as uninformative"
        );
        return vec![UNIFORM_DIST; n];
    }

    // alpha[k][j]: scaled p(first k+δ outputs, drift δ before input k).
    let mut alpha = vec![0.0f64; (n + 1) * d];
    alpha[d_max] = 1.0;
    for k in 0..n {
        let prior = &priors[k];
        let (head, tail) = alpha.split_at_mut((k + 1) * d);
        let cur = &head[k * d..];
        let next = &mut tail[..d];
        for j in 0..d {
            let a = cur[j];
            if a == 0.0 {
                continue;
            }
            let o = (k + j) as i64 - d_max as i64; // next output index at this state
            if j > 0 {
                next[j - 1] += a * lattice.p_del(j);
            }
            if o >= 0 && (o as usize) < n_out {
                let o = o as usize;
                next[j] += a * lattice.p_trans(j) * marginal_single(params, prior, received[o]);
                if j + 1 < d && o + 1 < n_out {
                    next[j + 1] += a
                        * lattice.p_ins(j)
                        * marginal_pair(params, prior, received[o], received[o + 1]);
                }
            }
        }
        let sum: f64 = next.iter().sum();
        if sum <= 0.0 || !sum.is_finite() {
            log::warn!("drift lattice ran out of probability mass at position {k}; treating column as uninformative");
            return vec![UNIFORM_DIST; n];
        }
        next.iter_mut().for_each(|x| *x /= sum);
    }

    // beta[k][j]: scaled p(remaining outputs | drift δ before input k),
    // anchored at the end drift n_out − n.
    let mut beta = vec![0.0f64; (n + 1) * d];
    let end_idx = (n_out + d_max) as i64 - n as i64;
    debug_assert!((0..d as i64).contains(&end_idx));
    beta[n * d + end_idx as usize] = 1.0;
    for k in (0..n).rev() {
        let prior = &priors[k];
        let (head, tail) = beta.split_at_mut((k + 1) * d);
        let cur = &mut head[k * d..];
        let next = &tail[..d];
        let mut sum = 0.0;
        for j in 0..d {
            let o = (k + j) as i64 - d_max as i64;
            let mut b = 0.0;
            if j > 0 {
                b += lattice.p_del(j) * next[j - 1];
            }
            if o >= 0 && (o as usize) < n_out {
                let o = o as usize;
                b += lattice.p_trans(j) * marginal_single(params, prior, received[o]) * next[j];
                if j + 1 < d && o + 1 < n_out {
                    b += lattice.p_ins(j)
                        * marginal_pair(params, prior, received[o], received[o + 1])
                        * next[j + 1];
                }
            }
            cur[j] = b;
            sum += b;
        }
        if sum <= 0.0 || !sum.is_finite() {
            log::warn!("drift lattice ran out of probability mass at position {k} (backward); treating column as uninformative");
            return vec![UNIFORM_DIST; n];
        }
        cur[..d].iter_mut().for_each(|x| *x /= sum);
    }

    // Bridge: γ(k,v) sums α · (event weight · emissions for base v) · β over
    // drift states; the deletion branch emits nothing, so it contributes
    // equally to every base.
    let mut out = vec![UNIFORM_DIST; n];
    for k in 0..n {
        let mut tup = [0.0f64; 4];
        for j in 0..d {
            let a = alpha[k * d + j];
            if a == 0.0 {
                continue;
            }
            let next = &beta[(k + 1) * d..(k + 2) * d];
            let o = (k + j) as i64 - d_max as i64;
            let del_term = if j > 0 {
                lattice.p_del(j) * next[j - 1]
            } else {
                0.0
            };
            let mut trans_w = 0.0;
            let mut ins_w = 0.0;
            let mut first = Base::A;
            let mut second = Base::A;
            if o >= 0 && (o as usize) < n_out {
                first = received[o as usize];
                trans_w = lattice.p_trans(j) * next[j];
                if j + 1 < d && (o as usize) + 1 < n_out {
                    second = received[o as usize + 1];
                    ins_w = lattice.p_ins(j) * next[j + 1];
                }
            }
            for (v, slot) in tup.iter_mut().enumerate() {
                let e1 = emission(params, v, first);
                *slot += a * (del_term + trans_w * e1 + ins_w * e1 * emission(params, v, second));
            }
        }
        normalize(&mut tup);
        out[k] = tup;
    }
    out
}

/// Run detection over the listed pool columns (uniform output for erased
/// ones).  `priors_for(j)` must return the prior tuple per transmitted
/// position of column `j`, in transmission order; results come back in the
/// order of `columns`.
pub fn detect_column_set<F>(
    pool: &ReceivedPool,
    columns: &[usize],
    priors_for: F,
    lattice: &DriftLattice,
) -> Vec<Vec<BaseDist>>
where
    F: Fn(usize) -> Vec<BaseDist> + Sync,
{
    columns
        .par_iter()
        .map(|&j| match &pool.columns[j] {
            None => vec![UNIFORM_DIST; pool.source_length],
            Some(seq) => forward_backward(seq, &priors_for(j), lattice),
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::base::point_mass;
    use crate::channel::{transmit_ids, ChannelRng};
    use crate::matrix::QuatMatrix;
    use rand::Rng;

    fn column(seed: u64, n: usize) -> Vec<Base> {
        let mut rng = crate::rng::stream(seed);
        (0..n)
            .map(|_| Base::from_index(rng.gen_range(0..4)))
            .collect()
    }

    #[test]
    fn dmax_formula() {
        assert_eq!(compute_dmax(100, 0.0, 0.0), 0);
        // p_ids = 0.05 split: p_i = 0.0085, p_d = 0.020.
        assert_eq!(compute_dmax(100, 0.0085, 0.020), 10);
        assert_eq!(compute_dmax(10, 0.001, 0.001), 1);
        for n in [10, 20, 40, 80] {
            assert!(compute_dmax(2 * n, 0.01, 0.03) >= compute_dmax(n, 0.01, 0.03));
        }
    }

    #[test]
    fn noiseless_concentrates_on_the_transmitted_base() {
        let params = ChannelParams::new(0.0, 0.0, 0.0, 0.0).unwrap();
        let lattice = DriftLattice::for_source(30, params);
        assert_eq!(lattice.states(), 1);
        let col = column(1, 30);
        let gamma = forward_backward(&col, &vec![UNIFORM_DIST; 30], &lattice);
        for (k, tup) in gamma.iter().enumerate() {
            assert_eq!(tup[col[k].index()], 1.0, "position {k}");
        }
    }

    #[test]
    fn substitution_only_matches_symbol_posterior() {
        // With no insertions or deletions the lattice is a single path and
        // γ(k,·) must equal the per-symbol emission likelihoods.
        let params = ChannelParams::new(0.0, 0.0, 0.3, 0.0).unwrap();
        let lattice = DriftLattice::for_source(12, params);
        let col = column(2, 12);
        let gamma = forward_backward(&col, &vec![UNIFORM_DIST; 12], &lattice);
        for (k, tup) in gamma.iter().enumerate() {
            for (v, &got) in tup.iter().enumerate() {
                let want = if v == col[k].index() { 0.7 } else { 0.1 };
                assert!((got - want).abs() < 1e-12, "position {k} base {v}");
            }
        }
    }

    #[test]
    fn too_short_column_is_uninformative() {
        let params = ChannelParams::from_ids_split(0.05, 0.0).unwrap();
        let lattice = DriftLattice::new(2, params);
        let gamma = forward_backward(&column(3, 4), &vec![UNIFORM_DIST; 20], &lattice);
        assert_eq!(gamma, vec![UNIFORM_DIST; 20]);
    }

    #[test]
    fn overlong_column_is_truncated_not_fatal() {
        let params = ChannelParams::from_ids_split(0.1, 0.0).unwrap();
        let lattice = DriftLattice::new(2, params);
        let gamma = forward_backward(&column(4, 40), &vec![UNIFORM_DIST; 10], &lattice);
        assert_eq!(gamma.len(), 10);
        for tup in &gamma {
            assert!((tup.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn conflicting_point_priors_fall_back_to_uniform() {
        // p_s = 0 with a prior contradicting the observation leaves no
        // surviving lattice path.
        let params = ChannelParams::new(0.0, 0.0, 0.0, 0.0).unwrap();
        let lattice = DriftLattice::for_source(3, params);
        let priors = vec![point_mass(Base::A); 3];
        let gamma = forward_backward(&[Base::C, Base::C, Base::C], &priors, &lattice);
        assert_eq!(gamma, vec![UNIFORM_DIST; 3]);
    }

    #[test]
    fn detection_results_are_order_independent() {
        let params = ChannelParams::from_ids_split(0.08, 0.0).unwrap();
        let n = 40;
        let mut x = QuatMatrix::filled(n, 6, Base::A);
        for j in 0..6 {
            for (k, &b) in column(10 + j as u64, n).iter().enumerate() {
                x.set(k, j, b);
            }
        }
        let pool = crate::channel::transmit_pool(&x, &params, &ChannelRng::new(77));
        let lattice = DriftLattice::for_source(n, params);
        let priors = |_: usize| vec![UNIFORM_DIST; n];
        let fwd = detect_column_set(&pool, &[0, 1, 2, 3, 4, 5], priors, &lattice);
        let rev = detect_column_set(&pool, &[5, 4, 3, 2, 1, 0], priors, &lattice);
        for j in 0..6 {
            assert_eq!(fwd[j], rev[5 - j]);
        }
        assert!(detect_column_set(&pool, &[], priors, &lattice).is_empty());
    }

    #[test]
    fn erased_columns_detect_as_uniform() {
        let params = ChannelParams::new(0.0, 0.0, 0.0, 1.0).unwrap();
        let x = QuatMatrix::filled(8, 3, Base::T);
        let pool = crate::channel::transmit_pool(&x, &params, &ChannelRng::new(5));
        let lattice = DriftLattice::for_source(8, params);
        let gammas = detect_column_set(&pool, &[0, 1, 2], |_| vec![UNIFORM_DIST; 8], &lattice);
        for g in gammas {
            assert_eq!(g, vec![UNIFORM_DIST; 8]);
        }
    }

    #[test]
    fn sharper_priors_sharpen_the_likelihoods() {
        // With correct point-mass priors everywhere else, the true base's
        // posterior share at a position should usually not drop compared to
        // uniform priors, and must improve clearly on average.  Pointwise
        // monotonicity is not guaranteed near ambiguous indel alignments, so
        // the per-position rate gets headroom.
        let n = 50;
        let params = ChannelParams::from_ids_split(0.1, 0.0).unwrap();
        let lattice = DriftLattice::for_source(n, params);
        let mut better = 0usize;
        let mut total = 0usize;
        let mut uniform_mass = 0.0f64;
        let mut sharp_mass = 0.0f64;
        for trial in 0..20u64 {
            let col = column(100 + trial, n);
            let mut rng = crate::rng::stream(200 + trial);
            let received = transmit_ids(&col, &params, &mut rng);
            if received.len() + lattice.d_max < n {
                continue;
            }
            let uniform = forward_backward(&received, &vec![UNIFORM_DIST; n], &lattice);
            for k in 0..n {
                let mut priors: Vec<BaseDist> = col.iter().map(|&b| point_mass(b)).collect();
                priors[k] = UNIFORM_DIST;
                let sharp = forward_backward(&received, &priors, &lattice);
                if sharp[k][col[k].index()] >= uniform[k][col[k].index()] - 1e-12 {
                    better += 1;
                }
                uniform_mass += uniform[k][col[k].index()];
                sharp_mass += sharp[k][col[k].index()];
                total += 1;
            }
        }
        assert!(total > 500);
        assert!(
            better as f64 >= 0.85 * total as f64,
            "sharpening helped at only {better}/{total} positions"
        );
        assert!(
            sharp_mass > uniform_mass + 0.02 * total as f64,
            "mean true-base mass: sharp {} vs uniform {}",
            sharp_mass / total as f64,
            uniform_mass / total as f64
        );
    }
}
