//! Streaming transmission over discrete memoryless channels.
//!
//! The crate is organised in layers:
//!
//! - [`channel`]: DMCs, information density, mutual information, information
//!   variances, capacity, dispersion, output symmetry and divergences.
//! - [`exponents`]: sphere-packing and Haroutunian exponents, the auxiliary
//!   channel that attains the latter, and the second-order ratio probe.
//! - [`typicality`]: conditional typical sets, their probability bound, the
//!   likelihood-ratio floor on typical outputs, and the Pinsker check.
//! - [`codec`]: a keyed random streaming code with a sequential threshold
//!   decoder, a channel simulator and Monte Carlo error estimation.
//! - [`oracle`]: exact error probabilities on tiny instances by enumeration,
//!   including MAP decoding with genie-supplied past messages.
//! - [`experiments`]: rate/stream-length schedules, sweeps and the
//!   moderate-deviations constant estimates.
//!
//! Logarithms are base 2 throughout: rates are in bits, variances in bits²
//! and exponents in bits.

pub mod channel;
pub mod codec;
pub mod error;
pub mod experiments;
pub mod exponents;
pub mod oracle;
pub mod rng;
pub mod stats;
pub mod typicality;

pub use error::{Error, Result};
