//! Sparse regression codes over the complex AWGN channel.
//!
//! Encoding, AMP decoding with state-evolution prediction, power allocation,
//! Gaussian / DFT / circulant / spatially coupled design operators,
//! CRC-aided list decoding and a seeded Monte-Carlo harness.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod amp;
pub mod channel;
pub mod error;
pub mod operators;
pub mod outer;
pub mod params;
pub mod power;
pub mod sc;
pub mod se;
pub mod seed;
pub mod sequences;
pub mod sim;

pub use error::{Error, Result};
