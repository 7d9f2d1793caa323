use serde::{Deserialize, Serialize};

use crate::noise::{NoiseParams, PvtCondition};

use super::CircuitError;

/// Topology and noise parameterization of one simulated generator.
///
/// With `coupling_enabled` the entropy units of every set are nested inside
/// its central XOR rings and the sampled signals are the edge-ring and
/// central-ring outputs. Without coupling there are no central rings: edge
/// rings are sampled directly and each entropy unit contributes two sampled
/// nodes (its free-running ring and its MUX ring).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CircuitConfig {
    pub coupling_sets: usize,
    pub edge_rings_per_set: usize,
    pub central_rings_per_set: usize,
    pub central_ring_xor_stages: usize,
    pub entropy_units_per_set: usize,
    pub ro1_stages: usize,
    pub edge_ring_stages: usize,
    pub sample_clock_hz: f64,
    pub noise: NoiseParams,
    pub pvt: PvtCondition,
    /// Seed of the dynamic noise (jitter, metastability).
    pub seed: u64,
    /// Seed of the static per-gate delay mismatch: one value per "die".
    pub process_seed: u64,
    pub feedback_enabled: bool,
    pub coupling_enabled: bool,
    /// Clock edges simulated and discarded before the first emitted bit.
    pub warmup_edges: usize,
}

impl Default for CircuitConfig {
    fn default() -> Self {
        Self {
            coupling_sets: 2,
            edge_rings_per_set: 4,
            central_rings_per_set: 2,
            central_ring_xor_stages: 2,
            entropy_units_per_set: 2,
            ro1_stages: 3,
            edge_ring_stages: 3,
            sample_clock_hz: 6.2e8,
            noise: NoiseParams::default(),
            pvt: PvtCondition::nominal(),
            seed: 1,
            process_seed: 0x5eed,
            feedback_enabled: true,
            coupling_enabled: true,
            warmup_edges: 64,
        }
    }
}

impl CircuitConfig {
    /// `units` hybrid entropy units XORed together with no coupling or
    /// feedback.
    pub fn hybrid_unit_array(units: usize) -> Self {
        Self {
            coupling_sets: 1,
            edge_rings_per_set: 0,
            central_rings_per_set: 0,
            entropy_units_per_set: units,
            coupling_enabled: false,
            feedback_enabled: false,
            ..Self::default()
        }
    }

    /// `rings` free-running ring oscillators of `stages` stages XORed
    /// together.
    pub fn plain_ring_array(rings: usize, stages: usize) -> Self {
        Self {
            coupling_sets: 1,
            edge_rings_per_set: rings,
            edge_ring_stages: stages,
            central_rings_per_set: 0,
            entropy_units_per_set: 0,
            coupling_enabled: false,
            feedback_enabled: false,
            ..Self::default()
        }
    }

    /// Signals sampled by the flip-flop array.
    pub fn sampled_rings(&self) -> usize {
        let per_set = if self.coupling_enabled {
            self.edge_rings_per_set + self.central_rings_per_set
        } else {
            self.edge_rings_per_set + 2 * self.entropy_units_per_set
        };
        self.coupling_sets * per_set
    }

    /// Clock period in femtoseconds.
    pub fn clock_period_fs(&self) -> u64 {
        (super::FS_PER_S / self.sample_clock_hz).round() as u64
    }

    pub fn validate(&self) -> Result<(), CircuitError> {
        let cfg = |msg: String| Err(CircuitError::Config(msg));
        self.noise.validate()?;
        self.pvt.validate()?;
        if self.coupling_sets == 0 {
            return cfg("coupling_sets must be at least 1".into());
        }
        if self.ro1_stages == 0 || self.edge_ring_stages == 0 {
            return cfg("ring stage counts must be at least 1".into());
        }
        if !(self.sample_clock_hz.is_finite() && self.sample_clock_hz > 0.0) {
            return cfg(format!(
                "sample_clock_hz must be positive, got {}",
                self.sample_clock_hz
            ));
        }
        if self.coupling_enabled {
            if self.central_rings_per_set == 0 {
                return cfg("coupling requires at least one central ring per set".into());
            }
            if self.central_ring_xor_stages == 0 {
                return cfg("central rings need at least one XOR stage".into());
            }
            if self.edge_rings_per_set == 0 {
                return cfg("coupling requires at least one edge ring per set".into());
            }
        } else if self.feedback_enabled {
            return cfg("feedback is injected into central rings and needs coupling enabled".into());
        }
        if self.sampled_rings() == 0 {
            return cfg("topology has no sampled signals".into());
        }
        let period = self.clock_period_fs();
        let window = (self.noise.meta_window() * super::FS_PER_S).ceil() as u64;
        if period == 0 || 2 * window >= period {
            return cfg(format!(
                "clock period {period} fs too short for a {window} fs metastability window"
            ));
        }
        Ok(())
    }
}
