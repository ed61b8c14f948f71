//! The insertion/deletion/substitution channel with sequence dropout.
//!
//! Each stored sequence (one matrix column) is corrupted symbol by symbol:
//! with probability `insertion` the symbol is transmitted twice, with
//! probability `deletion` it is not transmitted, otherwise it is transmitted
//! once; every transmitted copy is independently substituted with
//! probability `substitution` (uniformly by one of the other three bases).
//! After the IDS pass the whole column is erased with probability `erasure`.
//!
//! Randomness is keyed per column: IDS events and the erasure decision come
//! from separate derived streams, so toggling the erasure rate, dropping a
//! column, or reordering work never changes what the other columns see.

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::base::Base;
use crate::matrix::QuatMatrix;
use crate::rng::{self, labels};

/// Fractions of the total IDS rate assigned to insertion, deletion and
/// substitution by `ChannelParams::from_ids_split`.
pub const IDS_SPLIT: [f64; 3] = [0.17, 0.40, 0.43];

#[derive(Debug, Error, PartialEq)]
pub enum ChannelError {
    #[error("channel probability out of range: {0}")]
    OutOfRange(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChannelParams {
    pub insertion: f64,
    pub deletion: f64,
    pub substitution: f64,
    pub erasure: f64,
}

impl ChannelParams {
    pub fn new(
        insertion: f64,
        deletion: f64,
        substitution: f64,
        erasure: f64,
    ) -> Result<Self, ChannelError> {
        let p = ChannelParams {
            insertion,
            deletion,
            substitution,
            erasure,
        };
        p.validate()?;
        Ok(p)
    }

    /// Split a total IDS rate into the fixed (0.17, 0.40, 0.43) proportions.
    pub fn from_ids_split(p_ids: f64, p_e: f64) -> Result<Self, ChannelError> {
        Self::new(
            IDS_SPLIT[0] * p_ids,
            IDS_SPLIT[1] * p_ids,
            IDS_SPLIT[2] * p_ids,
            p_e,
        )
    }

    pub fn validate(&self) -> Result<(), ChannelError> {
        for (name, v) in [
            ("insertion", self.insertion),
            ("deletion", self.deletion),
            ("substitution", self.substitution),
            ("erasure", self.erasure),
        ] {
            if !(0.0..=1.0).contains(&v) || !v.is_finite() {
                return Err(ChannelError::OutOfRange(format!("{name} = {v}")));
            }
        }
        if self.insertion + self.deletion > 1.0 {
            return Err(ChannelError::OutOfRange(format!(
                "insertion + deletion = {}",
                self.insertion + self.deletion
            )));
        }
        Ok(())
    }

    /// Probability of observing `seen` given `sent` on one transmitted copy.
    #[inline]
    pub fn emission(&self, sent: Base, seen: Base) -> f64 {
        if sent == seen {
            1.0 - self.substitution
        } else {
            self.substitution / 3.0
        }
    }

    /// Expected received length per transmitted symbol.
    pub fn expected_length_factor(&self) -> f64 {
        1.0 + self.insertion - self.deletion
    }
}

/// What happened to one input symbol.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum IdsEvent {
    Transmitted {
        substituted: bool,
    },
    Deleted,
    Inserted {
        first_substituted: bool,
        second_substituted: bool,
    },
}

/// Running event counts over traced transmissions, for validating the
/// channel against its nominal rates.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct EventTally {
    pub inputs: u64,
    pub inserted: u64,
    pub deleted: u64,
    pub transmitted: u64,
    pub substituted_copies: u64,
    pub emitted_copies: u64,
}

impl EventTally {
    pub fn add(&mut self, events: &[IdsEvent]) {
        for e in events {
            self.inputs += 1;
            match *e {
                IdsEvent::Transmitted { substituted } => {
                    self.transmitted += 1;
                    self.emitted_copies += 1;
                    self.substituted_copies += substituted as u64;
                }
                IdsEvent::Deleted => self.deleted += 1,
                IdsEvent::Inserted {
                    first_substituted,
                    second_substituted,
                } => {
                    self.inserted += 1;
                    self.emitted_copies += 2;
                    self.substituted_copies += first_substituted as u64 + second_substituted as u64;
                }
            }
        }
    }

    pub fn insertion_rate(&self) -> f64 {
        self.inserted as f64 / self.inputs as f64
    }

    pub fn deletion_rate(&self) -> f64 {
        self.deleted as f64 / self.inputs as f64
    }

    pub fn transmission_rate(&self) -> f64 {
        self.transmitted as f64 / self.inputs as f64
    }

    /// Substitution frequency among emitted copies (each copy is an
    /// independent substitution opportunity).
    pub fn substitution_rate(&self) -> f64 {
        self.substituted_copies as f64 / self.emitted_copies as f64
    }

    /// Observed output symbols per input symbol.
    pub fn length_factor(&self) -> f64 {
        self.emitted_copies as f64 / self.inputs as f64
    }
}

fn substitute(b: Base, rng: &mut impl Rng) -> Base {
    // Uniform over the three other bases.
    let step = rng.gen_range(1..4usize);
    Base::from_index((b.index() + step) % 4)
}

/// Corrupt one column and report the per-symbol event trace.
pub fn transmit_ids_traced(
    column: &[Base],
    params: &ChannelParams,
    rng: &mut impl Rng,
) -> (Vec<Base>, Vec<IdsEvent>) {
    let mut out = Vec::with_capacity(column.len() + column.len() / 4 + 4);
    let mut events = Vec::with_capacity(column.len());
    for &sym in column {
        let roll: f64 = rng.gen();
        if roll < params.insertion {
            let s1 = rng.gen_bool(params.substitution);
            let s2 = rng.gen_bool(params.substitution);
            out.push(if s1 { substitute(sym, rng) } else { sym });
            out.push(if s2 { substitute(sym, rng) } else { sym });
            events.push(IdsEvent::Inserted {
                first_substituted: s1,
                second_substituted: s2,
            });
        } else if roll < params.insertion + params.deletion {
            events.push(IdsEvent::Deleted);
        } else {
            let s = rng.gen_bool(params.substitution);
            out.push(if s { substitute(sym, rng) } else { sym });
            events.push(IdsEvent::Transmitted { substituted: s });
        }
    }
    (out, events)
}

/// Corrupt one column with IDS errors.
pub fn transmit_ids(column: &[Base], params: &ChannelParams, rng: &mut impl Rng) -> Vec<Base> {
    transmit_ids_traced(column, params, rng).0
}

/// Per-run channel randomness, split into one independent stream per column
/// and purpose.
#[derive(Clone, Copy, Debug)]
pub struct ChannelRng {
    seed: u64,
}

impl ChannelRng {
    pub fn new(seed: u64) -> Self {
        ChannelRng { seed }
    }

    pub fn ids_stream(&self, column: usize) -> rand_chacha::ChaCha8Rng {
        rng::stream(rng::derive_chain(
            self.seed,
            &[labels::CHANNEL_IDS, column as u64],
        ))
    }

    pub fn erasure_stream(&self, column: usize) -> rand_chacha::ChaCha8Rng {
        rng::stream(rng::derive_chain(
            self.seed,
            &[labels::CHANNEL_ERASE, column as u64],
        ))
    }
}

/// The set of reads for one stored matrix: per column either the corrupted
/// sequence or an erasure.
#[derive(Clone, Debug, PartialEq)]
pub struct ReceivedPool {
    /// Length of every transmitted column.
    pub source_length: usize,
    pub columns: Vec<Option<Vec<Base>>>,
}

impl ReceivedPool {
    pub fn n_columns(&self) -> usize {
        self.columns.len()
    }

    pub fn erased_count(&self) -> usize {
        self.columns.iter().filter(|c| c.is_none()).count()
    }

    /// One line per column: the base string, or `?` for an erased column.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for col in &self.columns {
            match col {
                None => out.push('?'),
                Some(seq) => out.extend(seq.iter().map(|b| b.to_char())),
            }
            out.push('\n');
        }
        out
    }
}

/// Pass every column of `matrix` through the IDS channel, then erase whole
/// columns.  IDS randomness is drawn (and therefore fixed) even for columns
/// that end up erased.
pub fn transmit_pool(
    matrix: &QuatMatrix,
    params: &ChannelParams,
    rng: &ChannelRng,
) -> ReceivedPool {
    let columns = (0..matrix.cols())
        .map(|j| {
            let mut ids_rng = rng.ids_stream(j);
            let seq = transmit_ids(matrix.column(j), params, &mut ids_rng);
            let erased = rng.erasure_stream(j).gen_bool(params.erasure);
            if erased {
                None
            } else {
                Some(seq)
            }
        })
        .collect();
    ReceivedPool {
        source_length: matrix.rows(),
        columns,
    }
}

/// Mean and population variance of the received lengths over non-erased
/// columns (streaming one-pass update), plus the erasure tally.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LengthStats {
    pub mean: Option<f64>,
    pub variance: Option<f64>,
    pub erased: usize,
    pub observed: usize,
}

pub fn length_stats(pool: &ReceivedPool) -> LengthStats {
    let mut count = 0usize;
    let mut mean = 0.0f64;
    let mut m2 = 0.0f64;
    let mut erased = 0usize;
    for col in &pool.columns {
        match col {
            None => erased += 1,
            Some(seq) => {
                count += 1;
                let x = seq.len() as f64;
                let delta = x - mean;
                mean += delta / count as f64;
                m2 += delta * (x - mean);
            }
        }
    }
    LengthStats {
        mean: (count > 0).then_some(mean),
        variance: (count > 0).then_some(m2 / count as f64),
        erased,
        observed: count,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::base::Base;

    fn column(n: usize) -> Vec<Base> {
        (0..n).map(|i| Base::from_index(i % 4)).collect()
    }

    #[test]
    fn split_uses_fixed_proportions() {
        let p = ChannelParams::from_ids_split(0.1, 0.2).unwrap();
        assert!((p.insertion - 0.017).abs() < 1e-15);
        assert!((p.deletion - 0.040).abs() < 1e-15);
        assert!((p.substitution - 0.043).abs() < 1e-15);
        assert_eq!(p.erasure, 0.2);
    }

    #[test]
    fn invalid_probabilities_are_rejected() {
        assert!(ChannelParams::new(0.6, 0.6, 0.0, 0.0).is_err());
        assert!(ChannelParams::new(-0.1, 0.0, 0.0, 0.0).is_err());
        assert!(ChannelParams::new(0.0, 0.0, 1.5, 0.0).is_err());
    }

    #[test]
    fn noiseless_channel_is_identity() {
        let p = ChannelParams::new(0.0, 0.0, 0.0, 0.0).unwrap();
        let col = column(40);
        let mut rng = crate::rng::stream(1);
        assert_eq!(transmit_ids(&col, &p, &mut rng), col);
    }

    #[test]
    fn pure_deletion_empties_the_column() {
        let p = ChannelParams::new(0.0, 1.0, 0.0, 0.0).unwrap();
        let mut rng = crate::rng::stream(2);
        assert!(transmit_ids(&column(10), &p, &mut rng).is_empty());
    }

    #[test]
    fn pure_insertion_doubles_the_column() {
        let p = ChannelParams::new(1.0, 0.0, 0.0, 0.0).unwrap();
        let mut rng = crate::rng::stream(3);
        let out = transmit_ids(&column(10), &p, &mut rng);
        assert_eq!(out.len(), 20);
        for (i, &b) in column(10).iter().enumerate() {
            assert_eq!(out[2 * i], b);
            assert_eq!(out[2 * i + 1], b);
        }
    }

    #[test]
    fn output_length_is_bounded_by_twice_input() {
        let p = ChannelParams::from_ids_split(0.8, 0.0).unwrap();
        for seed in 0..50 {
            let mut rng = crate::rng::stream(seed);
            let out = transmit_ids(&column(25), &p, &mut rng);
            assert!(out.len() <= 50);
        }
    }

    #[test]
    fn substitutions_never_reproduce_the_original() {
        let p = ChannelParams::new(0.0, 0.0, 1.0, 0.0).unwrap();
        let col = column(200);
        let mut rng = crate::rng::stream(4);
        let out = transmit_ids(&col, &p, &mut rng);
        assert_eq!(out.len(), 200);
        for (a, b) in col.iter().zip(&out) {
            assert_ne!(a, b);
        }
    }

    #[test]
    fn pool_is_reproducible_and_erasure_independent_of_ids() {
        let mut m = QuatMatrix::filled(30, 12, Base::A);
        for j in 0..12 {
            for r in 0..30 {
                m.set(r, j, Base::from_index((r * 7 + j) % 4));
            }
        }
        let rng = ChannelRng::new(99);
        let noisy = ChannelParams::from_ids_split(0.2, 0.5).unwrap();
        let a = transmit_pool(&m, &noisy, &rng);
        let b = transmit_pool(&m, &noisy, &rng);
        assert_eq!(a, b);
        assert!(a.erased_count() > 0);

        // Turning erasures off must not disturb the surviving columns.
        let no_erase = ChannelParams {
            erasure: 0.0,
            ..noisy
        };
        let c = transmit_pool(&m, &no_erase, &rng);
        assert_eq!(c.erased_count(), 0);
        for (j, col) in a.columns.iter().enumerate() {
            if let Some(seq) = col {
                assert_eq!(seq, c.columns[j].as_ref().unwrap());
            }
        }
    }

    #[test]
    fn erasure_one_erases_everything() {
        let m = QuatMatrix::filled(5, 4, Base::C);
        let p = ChannelParams::new(0.0, 0.0, 0.0, 1.0).unwrap();
        let pool = transmit_pool(&m, &p, &ChannelRng::new(5));
        assert_eq!(pool.erased_count(), 4);
        let stats = length_stats(&pool);
        assert_eq!(stats.mean, None);
        assert_eq!(stats.variance, None);
        assert_eq!(stats.erased, 4);
    }

    #[test]
    fn noiseless_stats_have_zero_variance() {
        let m = QuatMatrix::filled(17, 6, Base::G);
        let p = ChannelParams::new(0.0, 0.0, 0.0, 0.0).unwrap();
        let pool = transmit_pool(&m, &p, &ChannelRng::new(6));
        let stats = length_stats(&pool);
        assert_eq!(stats.mean, Some(17.0));
        assert_eq!(stats.variance, Some(0.0));
        assert_eq!(stats.observed, 6);
    }

    #[test]
    fn dump_marks_erasures() {
        let pool = ReceivedPool {
            source_length: 3,
            columns: vec![
                Some(vec![Base::A, Base::C, Base::G]),
                None,
                Some(vec![Base::T]),
            ],
        };
        assert_eq!(pool.dump(), "ACG\n?\nT\n");
    }
}
