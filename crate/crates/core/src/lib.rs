//! Stochastic gate-level simulator of a dynamic hybrid ring-oscillator TRNG
//! together with the statistical machinery used to evaluate its output.
//!
//! * [`noise`]: delay jitter, metastability and PVT models.
//! * [`circuit`]: event-driven netlist simulation and bit generation.
//! * [`analytic`]: closed-form oracles (XOR piling-up, coverage, phase noise, bias).
//! * [`stats`]: AIS-31 T0–T5, a NIST SP 800-22 subset, SP 800-90B estimators, ACF.
//! * [`cli`]: the `dhtrng` command-line front end.

pub mod analytic;
pub mod bits;
pub mod circuit;
pub mod cli;
pub mod noise;
pub mod special;
pub mod stats;

pub use bits::{BitFormat, BitStream};
pub use circuit::{generate, generate_fast, CircuitConfig};
