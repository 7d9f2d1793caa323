//! Stand-alone harness around one hybrid entropy unit, for observing the
//! MUX ring under a forced or free-running select.

use crate::noise::{self, NoiseParams};

use super::engine::{Engine, GateId, GateKind};
use super::netlist::GateFactory;
use super::{SimTime, FS_PER_S};

#[derive(Debug)]
pub struct EntropyUnitProbe {
    engine: Engine,
    select: Option<GateId>,
    r1: GateId,
    r2: GateId,
}

impl EntropyUnitProbe {
    /// RO2 with its select line driven externally (initially low).
    pub fn with_forced_select(params: NoiseParams, seed: u64) -> Self {
        let mut engine = Engine::new(window_fs(&params), params.hold_bias);
        let (sel, mux) = {
            let mut fab = GateFactory::new(&mut engine, params, seed, 0);
            let sel = fab.gate(GateKind::Source);
            let mux = fab.gate(GateKind::Mux);
            let inv = fab.gate(GateKind::Inv);
            fab.engine.connect(inv, &[mux]);
            fab.engine.connect(mux, &[sel, inv, mux]);
            (sel, mux)
        };
        engine.finalize();
        Self {
            engine,
            select: Some(sel),
            r1: sel,
            r2: mux,
        }
    }

    /// Complete unit: RO1 with `ro1_stages` stages selecting RO2.
    pub fn free_running(params: NoiseParams, ro1_stages: usize, seed: u64) -> Self {
        let mut engine = Engine::new(window_fs(&params), params.hold_bias);
        let nodes = GateFactory::new(&mut engine, params, seed, 0).entropy_unit(ro1_stages);
        engine.finalize();
        Self {
            engine,
            select: None,
            r1: nodes.r1,
            r2: nodes.r2,
        }
    }

    /// Drives the select (R1) line; only valid for a forced-select probe.
    pub fn force_select(&mut self, level: bool, at: SimTime) {
        let sel = self.select.expect("probe has a free-running RO1");
        self.engine.drive_source(sel, level, at);
    }

    /// Processes all unit events up to `now`.
    pub fn step_until(&mut self, now: SimTime) {
        self.engine.run_until(now);
    }

    pub fn r1_level(&self) -> bool {
        self.engine.level(self.r1)
    }

    pub fn r2_level(&self) -> bool {
        self.engine.level(self.r2)
    }

    pub fn r1_transitions(&self) -> u64 {
        self.engine.toggles(self.r1)
    }

    pub fn r2_transitions(&self) -> u64 {
        self.engine.toggles(self.r2)
    }

    pub fn r2_last_transition(&self) -> Option<SimTime> {
        self.engine.history(self.r2).last_time().map(SimTime)
    }
}

fn window_fs(params: &NoiseParams) -> u64 {
    (noise::META_WINDOW_SIGMAS * params.meta_sigma * FS_PER_S).ceil() as u64
}
