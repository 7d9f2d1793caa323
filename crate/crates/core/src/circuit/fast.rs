//! Behavioral fast path for arrays of free-running rings.
//!
//! Each ring's output edges are generated directly as an accumulated
//! Gaussian phase walk (every half period is the sum of one delay draw per
//! stage), then sampled with the same flip-flop model as the gate-level
//! engine. Statistically equivalent to the event-driven path for plain
//! rings, not bit-identical.

use crate::bits::BitStream;
use crate::noise::{self, NoiseParams, NoiseRng};

use super::engine::History;
use super::netlist::mismatch_factor;
use super::{CircuitConfig, CircuitError, FS_PER_S};

const SAMPLER_STREAMS: u64 = 1 << 32;

struct PhaseWalkRing {
    stage_means: Vec<f64>,
    sigma: f64,
    level: bool,
    next: u64,
    history: History,
    rng: NoiseRng,
}

impl PhaseWalkRing {
    fn half_period(&mut self) -> u64 {
        self.stage_means
            .iter()
            .map(|&m| (noise::sample_delay(m, self.sigma, &mut self.rng).round() as u64).max(1))
            .sum()
    }

    fn run_until(&mut self, t: u64) {
        while self.next <= t {
            self.level = !self.level;
            self.history.push(self.next, self.level);
            let hp = self.half_period();
            self.next += hp;
        }
    }
}

/// Generates `n_bits` from a plain-ring configuration without the event
/// queue.
pub fn generate_fast(config: &CircuitConfig, n_bits: usize) -> Result<BitStream, CircuitError> {
    if config.coupling_enabled || config.feedback_enabled {
        return Err(CircuitError::Config(
            "fast path supports plain rings only: disable coupling and feedback".into(),
        ));
    }
    if config.entropy_units_per_set > 0 {
        return Err(CircuitError::Config(
            "fast path supports plain rings only: entropy units need the event-driven engine".into(),
        ));
    }
    if n_bits == 0 {
        return Err(CircuitError::ZeroBits);
    }
    config.validate()?;
    let params: NoiseParams = noise::apply_pvt(config.noise, config.pvt);
    let window = (params.meta_window() * FS_PER_S).ceil() as u64;
    let stages = config.edge_ring_stages;
    let ring_count = config.coupling_sets * config.edge_rings_per_set;
    // Gate indices follow the netlist builder so mismatch draws agree.
    let mut rings: Vec<PhaseWalkRing> = (0..ring_count)
        .map(|r| {
            let stage_means = (0..stages)
                .map(|s| {
                    let index = (r * stages + s) as u64;
                    params.delay_mean * mismatch_factor(params.mismatch_sigma, config.process_seed, index) * FS_PER_S
                })
                .collect();
            let mut ring = PhaseWalkRing {
                stage_means,
                sigma: params.jitter_sigma * FS_PER_S,
                level: false,
                next: 0,
                history: History::default(),
                rng: noise::substream(config.seed, r as u64),
            };
            ring.next = ring.half_period();
            ring
        })
        .collect();
    let mut samplers: Vec<NoiseRng> = (0..ring_count)
        .map(|k| noise::substream(config.seed, SAMPLER_STREAMS + k as u64))
        .collect();
    let period = config.clock_period_fs();
    let mut out = BitStream::with_capacity(n_bits);
    for k in 0..(config.warmup_edges + n_bits) {
        let edge = (k as u64 + 1) * period;
        let mut bit = false;
        for (ring, rng) in rings.iter_mut().zip(samplers.iter_mut()) {
            ring.run_until(edge + window);
            bit ^= ring.history.capture(ring.level, edge, window, &params, rng);
        }
        if k >= config.warmup_edges {
            out.push(bit);
        }
    }
    Ok(out)
}
