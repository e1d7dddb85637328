//! Polar-coded probabilistic shaping.
//!
//! Shaped multilevel polar codes over the real AWGN channel:
//!
//! * [`polar`]: the bit-level polar transform and a successive-cancellation
//!   list engine driven by per-index bit policies and one or two soft sources.
//! * [`modulation`]: PAM/ASK constellations with set-partitioning labels,
//!   Maxwell-Boltzmann inputs, AWGN and level-wise prior/posterior LLRs.
//! * [`crc`]: the outer cyclic redundancy check.
//! * [`codec`]: shaped encoding (SC and SCL) and the three list decoders:
//!   standard, dynamic-frozen-bit and re-encoding-validated.
//! * [`construction`]: Monte-Carlo entropy estimation and set selection.
//! * [`sim`]: seeded frame-error-rate sweeps and re-encoding statistics.

pub mod codec;
pub mod construction;
pub mod crc;
mod error;
pub mod modulation;
mod par;
pub mod polar;
pub mod seed;
pub mod sim;

pub use error::{Error, Result};
