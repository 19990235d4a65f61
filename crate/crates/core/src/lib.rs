//! Energy-efficient multiple access for mmWave cellular-connected UAVs.
//!
//! A down-tilted base station with a vertical ULA of 3GPP elements serves
//! several UAVs at once. The crate evaluates and maximizes the weighted sum
//! energy efficiency of rate-splitting (RSMA), power-domain NOMA and plain
//! spatial multiplexing (SDMA), and drives the Monte-Carlo sweeps that
//! compare them.

pub mod antenna;
pub mod channel;
pub mod error;
pub mod experiments;
pub mod geometry;
pub mod ma;
pub mod optimizer;

pub use error::{Error, Result};
pub use ma::{LinkBudget, PrecoderSolution, RateReport, Scheme};
