//! Shift-interleave (SI) coding for DNA storage channels.
//!
//! DNA storage channels corrupt each stored sequence with insertions,
//! deletions and substitutions (IDS errors), and whole sequences can fail to
//! be read back at all (sequence dropout).  The SI scheme protects against
//! both with a pair of binary LDPC codes whose codewords are shifted against
//! each other block-row by block-row, mapped two-bits-per-base onto DNA
//! sequences, and interleaved so that every sequence carries evenly spaced
//! symbols that are either known padding or belong to an already-decoded
//! codeword.  Those symbols double as synchronization markers for an
//! insertion/deletion detector, so the code rate is not spent on dedicated
//! marker symbols.
//!
//! The crate is organised along the processing pipeline:
//!
//! * [`ldpc`]: binary LDPC codes (progressive edge-growth construction,
//!   systematic encoding, flooding sum-product decoding, alist files).
//! * [`si_encoder`]: codeword packing, block-row shifting, bit-pair/base
//!   mapping and row interleaving.
//! * [`channel`]: the IDS + dropout channel simulator.
//! * [`fb_detector`]: forward-backward symbol detection on a drift lattice.
//! * [`si_decoder`]: the round-by-round tandem decoder that couples the two
//!   component codes through the detector output.
//! * [`baselines`]: naive separation and marker-code reference schemes.
//! * [`harness`]: Monte-Carlo experiment driver (sweeps, CSV, SVG plots).
//! * [`oracle`]: independent reference implementations used to validate the
//!   fast paths above; kept deliberately naive.

pub mod base;
pub mod baselines;
pub mod channel;
pub mod fb_detector;
pub mod harness;
pub mod ldpc;
pub mod matrix;
pub mod oracle;
pub mod plot;
pub mod rng;
pub mod si_decoder;
pub mod si_encoder;

pub use base::{Base, BaseDist, CodeSide};
pub use channel::{ChannelParams, ChannelRng, ReceivedPool};
pub use fb_detector::DriftLattice;
pub use harness::{ExperimentSpec, ResultRow, Scheme};
pub use ldpc::{CodeVariant, LdpcCode};
pub use matrix::{BitMatrix, QuatMatrix};
pub use si_decoder::{BeliefState, SiDecoder};
pub use si_encoder::SiConfig;

/// Saturation bound applied to every log-likelihood ratio exchanged between
/// the detector and the decoders.
pub const LLR_CLAMP: f64 = 30.0;

/// Clamp an LLR to [-LLR_CLAMP, +LLR_CLAMP].  Infinities fold onto the
/// bounds, which is relied on when likelihood ratios divide by zero.
#[inline]
pub fn clamp_llr(x: f64) -> f64 {
    x.clamp(-LLR_CLAMP, LLR_CLAMP)
}
