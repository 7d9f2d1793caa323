//! Event-driven simulation of the generator netlist: free-running edge
//! rings, hybrid entropy units nested in coupled XOR rings, the output
//! feedback register and the multistage sampling array.

mod config;
pub mod engine;
mod fast;
mod netlist;
mod unit;

use thiserror::Error;

use crate::bits::BitStream;
use crate::noise::NoiseError;

pub use config::CircuitConfig;
pub use fast::generate_fast;
pub use netlist::{build_circuit, Circuit, NetlistSummary, SamplerState};
pub use unit::EntropyUnitProbe;

pub(crate) const FS_PER_S: f64 = 1e15;

/// Simulation time in femtoseconds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct SimTime(pub u64);

impl SimTime {
    pub fn from_seconds(s: f64) -> Self {
        SimTime((s * FS_PER_S).round() as u64)
    }

    pub fn as_seconds(self) -> f64 {
        self.0 as f64 / FS_PER_S
    }
}

#[derive(Debug, Error)]
pub enum CircuitError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error(transparent)]
    Noise(#[from] NoiseError),
    #[error("clock edge {requested} fs does not follow previous edge {previous} fs")]
    EdgeOrder { previous: u64, requested: u64 },
    #[error("simulation fault: {0}")]
    Fault(String),
    #[error("at least one bit must be requested")]
    ZeroBits,
}

impl CircuitError {
    /// True for faults raised while simulating, as opposed to bad input.
    pub fn is_fault(&self) -> bool {
        matches!(self, CircuitError::Fault(_))
    }
}

/// Runs the event-driven simulation for `warmup_edges + n_bits` clock edges
/// and returns the last `n_bits` outputs.
pub fn generate(config: &CircuitConfig, n_bits: usize) -> Result<BitStream, CircuitError> {
    if n_bits == 0 {
        return Err(CircuitError::ZeroBits);
    }
    let mut circuit = build_circuit(config)?;
    for _ in 0..config.warmup_edges {
        circuit.next_edge()?;
    }
    let mut out = BitStream::with_capacity(n_bits);
    for _ in 0..n_bits {
        out.push(circuit.next_edge()?.output_bit);
    }
    Ok(out)
}
