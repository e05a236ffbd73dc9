//! Comb-shaping polar codes.
//!
//! Polar codes whose information indices are confined to a comb-shaping index
//! set (CIS) produce locally-periodic codewords. After BPSK modulation the
//! transmitted signal then has a periodic grid of spectral nulls, so periodic
//! interference can be removed with a comb filter without damaging the
//! signal.
//!
//! The crate is organised bottom-up:
//!
//! * [`polar`]: generator-matrix algebra and the fast encoder.
//! * [`cis`]: comb-shaping index sets and the order-preserving map `g_{N,r}`.
//! * [`construction`]: sub-channel reliability estimation and index selection.
//! * [`decoder`]: SC / SCL decoding and the CIS-constrained (CCD) wrapper.
//! * [`modem`], [`channel`], [`spectral`]: the baseband link and its analysis.
//! * [`sim`]: experiment configuration, FER sweeps and report generation.
//! * [`verify`]: brute-force small-instance oracles used by the self-test.

pub mod bits;
pub mod channel;
pub mod cis;
pub mod construction;
pub mod decoder;
mod error;
mod fft;
pub mod modem;
pub mod perm;
pub mod polar;
pub mod seed;
pub mod sim;
pub mod spectral;
pub mod verify;

pub use bits::BitWord;
pub use cis::{CisSpec, CodeConfig};
pub use error::{Error, Result};
pub use perm::Permutation;
