//! Netlist construction and the clocked sampling array.

use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use crate::noise::{self, NoiseParams, NoiseRng};

use super::engine::{Engine, GateId, GateKind};
use super::{CircuitConfig, CircuitError, SimTime, FS_PER_S};

// Substream layout under the noise seed: gate i uses stream i, sampler k uses
// SAMPLER_STREAMS + k.
const SAMPLER_STREAMS: u64 = 1 << 32;
const FEEDBACK_STREAM: u64 = 2 << 32;

/// Structural counts of a built netlist.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct NetlistSummary {
    pub sampled_rings: usize,
    /// Samplers, the output register and (when present) the feedback register.
    pub dffs: usize,
    pub muxes: usize,
    /// Inverter, buffer and XOR gates.
    pub luts: usize,
    pub feedback_arcs: usize,
}

/// Flip-flop state after one committed clock edge.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SamplerState {
    pub sampled_bits: Vec<bool>,
    /// Level the feedback register drives into the central rings this cycle.
    pub feedback_bit: bool,
    pub output_bit: bool,
}

/// Gate ids of one hybrid entropy unit.
#[derive(Debug, Clone, Copy)]
pub(crate) struct UnitNodes {
    /// Output of the free-running ring.
    pub r1: GateId,
    /// Output of the MUX ring.
    pub r2: GateId,
}

struct Sampler {
    net: GateId,
    rng: NoiseRng,
}

/// Builds gates with per-gate static mismatch and noise substreams.
pub(crate) struct GateFactory<'a> {
    pub engine: &'a mut Engine,
    params: NoiseParams,
    seed: u64,
    process_seed: u64,
}

impl<'a> GateFactory<'a> {
    pub fn new(engine: &'a mut Engine, params: NoiseParams, seed: u64, process_seed: u64) -> Self {
        Self {
            engine,
            params,
            seed,
            process_seed,
        }
    }

    pub fn gate(&mut self, kind: GateKind) -> GateId {
        let index = self.engine.gate_count() as u64;
        let mismatch = mismatch_factor(self.params.mismatch_sigma, self.process_seed, index);
        let mean = self.params.delay_mean * mismatch * FS_PER_S;
        let sigma = self.params.jitter_sigma * FS_PER_S;
        self.engine
            .add_gate(kind, mean, sigma, noise::substream(self.seed, index))
    }

    /// Ring of one inverter followed by `stages - 1` buffers; returns the
    /// output of the last stage.
    pub fn ring(&mut self, stages: usize) -> GateId {
        let first = self.gate(GateKind::Inv);
        let mut prev = first;
        for _ in 1..stages {
            let g = self.gate(GateKind::Buf);
            self.engine.connect(g, &[prev]);
            prev = g;
        }
        self.engine.connect(first, &[prev]);
        prev
    }

    /// Free-running ring RO1 whose output selects between the inverter loop
    /// (low) and the hold loop (high) of the MUX ring RO2.
    pub fn entropy_unit(&mut self, ro1_stages: usize) -> UnitNodes {
        let r1 = self.ring(ro1_stages);
        let mux = self.gate(GateKind::Mux);
        let inv = self.gate(GateKind::Inv);
        self.engine.connect(inv, &[mux]);
        self.engine.connect(mux, &[r1, inv, mux]);
        UnitNodes { r1, r2: mux }
    }
}

/// Static delay multiplier of gate `index`: `1 + sigma * N(0, 1)`, kept
/// within [0.5, 1.5].
pub(crate) fn mismatch_factor(sigma: f64, process_seed: u64, index: u64) -> f64 {
    if sigma == 0.0 {
        return 1.0;
    }
    let z: f64 = StandardNormal.sample(&mut noise::substream(process_seed, index));
    (1.0 + sigma * z).clamp(0.5, 1.5)
}

/// One simulated generator instance.
pub struct Circuit {
    config: CircuitConfig,
    params: NoiseParams,
    engine: Engine,
    samplers: Vec<Sampler>,
    feedback: Option<(GateId, NoiseRng)>,
    pending_feedback: Option<bool>,
    summary: NetlistSummary,
    last_edge: Option<u64>,
    period: u64,
    sample_ops: u64,
    edges: u64,
}

impl std::fmt::Debug for Circuit {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Circuit")
            .field("summary", &self.summary)
            .field("edges", &self.edges)
            .finish()
    }
}

/// Builds and initializes the netlist described by `config`.
pub fn build_circuit(config: &CircuitConfig) -> Result<Circuit, CircuitError> {
    config.validate()?;
    let params = noise::apply_pvt(config.noise, config.pvt);
    let window = (params.meta_window() * FS_PER_S).ceil() as u64;
    let mut engine = Engine::new(window, params.hold_bias);
    let mut sampled = Vec::new();
    let mut feedback_source = None;
    {
        let mut fab = GateFactory::new(&mut engine, params, config.seed, config.process_seed);
        if config.feedback_enabled {
            feedback_source = Some(fab.gate(GateKind::Source));
        }
        for _ in 0..config.coupling_sets {
            let edges: Vec<GateId> = (0..config.edge_rings_per_set)
                .map(|_| fab.ring(config.edge_ring_stages))
                .collect();
            let units: Vec<UnitNodes> = (0..config.entropy_units_per_set)
                .map(|_| fab.entropy_unit(config.ro1_stages))
                .collect();
            if config.coupling_enabled {
                let central = build_central_rings(&mut fab, config, &edges, &units, feedback_source);
                sampled.extend(&edges);
                sampled.extend(central);
            } else {
                sampled.extend(&edges);
                for u in &units {
                    sampled.push(u.r1);
                    sampled.push(u.r2);
                }
            }
        }
    }
    let feedback = feedback_source.map(|g| (g, noise::substream(config.seed, FEEDBACK_STREAM)));
    let muxes = (0..engine.gate_count() as GateId)
        .filter(|&g| engine.kind(g) == GateKind::Mux)
        .count();
    let luts = (0..engine.gate_count() as GateId)
        .filter(|&g| matches!(engine.kind(g), GateKind::Inv | GateKind::Buf | GateKind::Xor))
        .count();
    let feedback_arcs = feedback_source.map_or(0, |src| {
        (0..engine.gate_count() as GateId)
            .filter(|&g| engine.inputs(g).contains(&src))
            .count()
    });
    engine.finalize();
    let summary = NetlistSummary {
        sampled_rings: sampled.len(),
        dffs: sampled.len() + 1 + usize::from(feedback.is_some()),
        muxes,
        luts,
        feedback_arcs,
    };
    debug_assert_eq!(summary.sampled_rings, config.sampled_rings());
    let samplers = sampled
        .into_iter()
        .enumerate()
        .map(|(k, net)| Sampler {
            net,
            rng: noise::substream(config.seed, SAMPLER_STREAMS + k as u64),
        })
        .collect();
    Ok(Circuit {
        config: config.clone(),
        params,
        engine,
        samplers,
        feedback,
        pending_feedback: None,
        summary,
        last_edge: None,
        period: config.clock_period_fs(),
        sample_ops: 0,
        edges: 0,
    })
}

/// Central XOR rings of one coupling set. Stage `j` of ring `c` XORs the
/// previous stage with edge ring `(c * stages + j) mod edges`. Unit `u`
/// drives its MUX-ring node into the first stage of ring `u mod C` and its
/// free-running node into the last stage of ring `(u + 1) mod C`, so the two
/// units of a pair sit in opposite orientation. The feedback register feeds
/// the first stage of every ring.
fn build_central_rings(
    fab: &mut GateFactory<'_>,
    config: &CircuitConfig,
    edges: &[GateId],
    units: &[UnitNodes],
    feedback: Option<GateId>,
) -> Vec<GateId> {
    let rings = config.central_rings_per_set;
    let stages = config.central_ring_xor_stages;
    let mut outputs = Vec::with_capacity(rings);
    for c in 0..rings {
        let gates: Vec<GateId> = (0..stages).map(|_| fab.gate(GateKind::Xor)).collect();
        for j in 0..stages {
            let mut inputs = vec![gates[(j + stages - 1) % stages]];
            inputs.push(edges[(c * stages + j) % edges.len()]);
            for (u, unit) in units.iter().enumerate() {
                if j == 0 && u % rings == c {
                    inputs.push(unit.r2);
                }
                if j == stages - 1 && (u + 1) % rings == c {
                    inputs.push(unit.r1);
                }
            }
            if j == 0 {
                if let Some(fb) = feedback {
                    inputs.push(fb);
                }
            }
            fab.engine.connect(gates[j], &inputs);
        }
        outputs.push(gates[stages - 1]);
    }
    outputs
}

impl Circuit {
    pub fn config(&self) -> &CircuitConfig {
        &self.config
    }

    /// Noise parameters after PVT scaling.
    pub fn effective_noise(&self) -> &NoiseParams {
        &self.params
    }

    pub fn summary(&self) -> &NetlistSummary {
        &self.summary
    }

    /// Nets sampled by the flip-flop array, in sampler order.
    pub fn sampled_nets(&self) -> Vec<u32> {
        self.samplers.iter().map(|s| s.net).collect()
    }

    pub fn engine(&self) -> &Engine {
        &self.engine
    }

    pub fn clock_period(&self) -> SimTime {
        SimTime(self.period)
    }

    /// Total flip-flop sample operations so far.
    pub fn sample_operations(&self) -> u64 {
        self.sample_ops
    }

    pub fn edges_committed(&self) -> u64 {
        self.edges
    }

    /// Simulates up to the clock edge at `edge` and commits the sampling
    /// array. Edges must be strictly increasing.
    pub fn advance_to_clock_edge(&mut self, edge: SimTime) -> Result<SamplerState, CircuitError> {
        if let Some(prev) = self.last_edge {
            if edge.0 <= prev {
                return Err(CircuitError::EdgeOrder {
                    previous: prev,
                    requested: edge.0,
                });
            }
        }
        if edge.0 < self.engine.now().0 {
            return Err(CircuitError::EdgeOrder {
                previous: self.engine.now().0,
                requested: edge.0,
            });
        }
        // The feedback register captured last cycle's output at this edge.
        let mut feedback_bit = false;
        if let Some((src, rng)) = &mut self.feedback {
            let src = *src;
            if let Some(bit) = self.pending_feedback {
                let clk2q = noise::sample_delay(
                    self.params.delay_mean * FS_PER_S,
                    self.params.jitter_sigma * FS_PER_S,
                    rng,
                )
                .round()
                .max(1.0) as u64;
                self.engine.drive_source(src, bit, SimTime(edge.0 + clk2q));
                feedback_bit = bit;
            } else {
                feedback_bit = self.engine.level(src);
            }
        }
        let window = self.engine.meta_window();
        self.engine.run_until(SimTime(edge.0 + window));
        if self.engine.queue_is_empty() {
            return Err(CircuitError::Fault(format!(
                "event queue starved at {} fs: every ring has stopped",
                edge.0
            )));
        }
        let mut sampled_bits = Vec::with_capacity(self.samplers.len());
        for s in &mut self.samplers {
            let level = self.engine.level(s.net);
            let bit = self
                .engine
                .history(s.net)
                .capture(level, edge.0, window, &self.params, &mut s.rng);
            sampled_bits.push(bit);
        }
        self.sample_ops += sampled_bits.len() as u64;
        let output_bit = sampled_bits.iter().fold(false, |a, &b| a ^ b);
        if self.feedback.is_some() {
            self.pending_feedback = Some(output_bit);
        }
        self.last_edge = Some(edge.0);
        self.edges += 1;
        Ok(SamplerState {
            sampled_bits,
            feedback_bit,
            output_bit,
        })
    }

    /// Advances one clock period past the previous edge.
    pub fn next_edge(&mut self) -> Result<SamplerState, CircuitError> {
        let next = self.last_edge.unwrap_or(0) + self.period;
        self.advance_to_clock_edge(SimTime(next))
    }
}
