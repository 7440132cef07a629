//! Simulation driver.
//!
//! Mobility, radio and measurements do not depend on the handover variant,
//! so one seed runs a single world and steps every variant's UE controllers
//! against the same measurements ("lanes"). Each variant therefore sees
//! exactly the same trajectories, shadowing and fading as every other
//! variant on that seed, and as it would if run alone.

use std::fmt;
use std::path::PathBuf;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::Result;
use crate::exec::Execution;
use crate::handover::{ControllerConfig, Mode, PreambleRegistry, UeController};
use crate::ids::{Step, UeId};
use crate::kpi::KpiCounters;
use crate::log::Recorder;
use crate::measurements::MeasurementState;
use crate::rach::{AccessThreshold, RachProcedure};
use crate::radio::UeRadio;
use crate::scenario::{build_scenario_seeded, rng_stream, streams, ScenarioConfig};
use crate::trace::LinkTraceWriter;
use crate::view::SimView;

/// One point of the comparison grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Variant {
    pub mode: Mode,
    pub procedure: RachProcedure,
    pub xi: AccessThreshold,
    pub n_b: usize,
}

impl Variant {
    /// The variant a scenario file describes on its own.
    pub fn from_scenario(cfg: &ScenarioConfig) -> Self {
        Self {
            mode: cfg.handover.mode,
            procedure: cfg.rach.procedure,
            xi: cfg.rach.xi_access,
            n_b: cfg.handover.n_b,
        }
    }

    pub fn controller_config(&self, cfg: &ScenarioConfig) -> ControllerConfig {
        let mut handover = cfg.handover;
        handover.mode = self.mode;
        handover.n_b = self.n_b;
        let mut rach = cfg.rach;
        rach.procedure = self.procedure;
        rach.xi_access = self.xi;
        ControllerConfig {
            dt_ms: cfg.simulation.dt_ms,
            handover,
            rach,
            rlf: cfg.rlf,
        }
    }

    /// File-name friendly label.
    pub fn label(&self) -> String {
        format!("{}_{}_xi{}_nb{}", self.mode, self.procedure, self.xi, self.n_b)
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} xi={} N_B={}", self.mode, self.procedure, self.xi, self.n_b)
    }
}

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub exec: Execution,
    /// Keep per-event logs (handover events, RACH attempts, failures).
    pub detailed: bool,
    /// Write link and measurement traces into this directory.
    pub link_trace_dir: Option<PathBuf>,
}

/// Result of one variant on one seed.
#[derive(Debug, Clone)]
pub struct LaneOutcome {
    pub variant: Variant,
    pub recorder: Recorder,
}

impl LaneOutcome {
    pub fn counters(&self) -> &KpiCounters {
        &self.recorder.counters
    }
}

#[derive(Debug, Clone)]
pub struct SeedRun {
    pub seed: u64,
    /// SHA-256 over every UE position at every step.
    pub trajectory_hash: String,
    pub lanes: Vec<LaneOutcome>,
}

struct UeSlot {
    radio: UeRadio,
    meas: MeasurementState,
}

struct Lane {
    variant: Variant,
    controllers: Vec<UeController>,
    registry: PreambleRegistry,
    recorder: Recorder,
}

impl Lane {
    fn step(&mut self, n: Step, slots: &[UeSlot]) {
        for (ctrl, slot) in self.controllers.iter_mut().zip(slots) {
            let view = SimView {
                meas: &slot.meas,
                links: &slot.radio.links,
            };
            ctrl.step(n, &view, &mut self.registry, &mut self.recorder);
        }
    }
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

/// Run every variant on one seed in lockstep.
pub fn run_seed(cfg: &ScenarioConfig, variants: &[Variant], seed: u64, opts: &RunOptions) -> Result<SeedRun> {
    let mut world = build_scenario_seeded(cfg, seed)?;
    let ctrl_cfgs: Vec<ControllerConfig> = variants.iter().map(|v| v.controller_config(cfg)).collect();
    for c in &ctrl_cfgs {
        c.validate()?;
    }
    let n_ues = world.num_ues();
    let n_cells = world.num_cells();
    let n_beams = world.radio.num_beams();

    let mut slots: Vec<UeSlot> = (0..n_ues as u32)
        .map(|u| UeSlot {
            radio: UeRadio::new(
                &world.radio,
                rng_stream(seed, streams::for_ue(streams::SHADOWING, u)),
                rng_stream(seed, streams::for_ue(streams::FADING, u)),
            ),
            meas: MeasurementState::new(cfg.measurement, n_cells, n_beams),
        })
        .collect();

    let sim = &cfg.simulation;
    let counters = KpiCounters::new(n_ues as u64, sim.counted_minutes());
    let mut lanes: Vec<Lane> = variants
        .iter()
        .zip(&ctrl_cfgs)
        .map(|(v, c)| Lane {
            variant: *v,
            controllers: (0..n_ues as u32)
                .map(|u| {
                    // shared across variants so that collisions are paired too
                    let rng = rng_stream(seed, streams::for_ue(streams::COLLISION, u));
                    UeController::new(UeId(u), *c, n_cells, rng)
                })
                .collect(),
            registry: PreambleRegistry::new(n_cells, n_beams, c.handover.preamble_pool),
            recorder: Recorder::new(opts.detailed, sim.warmup_steps(), counters),
        })
        .collect();

    let mut tracer = match &opts.link_trace_dir {
        Some(dir) => Some(LinkTraceWriter::create(dir, seed)?),
        None => None,
    };

    let mut hasher = Sha256::new();
    let mut moved = vec![0.0; n_ues];
    for n in 0..sim.steps() {
        if n > 0 {
            moved = world.step_positions(n);
        }
        for u in &world.ues {
            hasher.update(u.position.x.to_le_bytes());
            hasher.update(u.position.y.to_le_bytes());
        }
        let model = &world.radio;
        let ues = &world.ues;
        let moved_ref = &moved;
        opts.exec.for_each_mut(&mut slots, |i, slot| {
            if n > 0 {
                model.advance(&mut slot.radio, moved_ref[i]);
            }
            model.evaluate(&mut slot.radio, ues[i].position);
            slot.meas.push(n, slot.radio.links.rsrp_all());
        });
        if let Some(t) = tracer.as_mut() {
            for (u, slot) in slots.iter().enumerate() {
                t.write_ue(n, u, &slot.radio.links, &slot.meas)?;
            }
        }
        let slots_ref = &slots;
        opts.exec.for_each_mut(&mut lanes, |_, lane| lane.step(n, slots_ref));
    }
    if let Some(t) = tracer {
        t.finish()?;
    }

    Ok(SeedRun {
        seed,
        trajectory_hash: hex(&hasher.finalize()),
        lanes: lanes
            .into_iter()
            .map(|l| LaneOutcome {
                variant: l.variant,
                recorder: l.recorder,
            })
            .collect(),
    })
}

/// Run every variant on every seed. Seeds are independent and may run in
/// parallel; results come back in seed order.
pub fn run_seeds(cfg: &ScenarioConfig, variants: &[Variant], seeds: &[u64], opts: &RunOptions) -> Result<Vec<SeedRun>> {
    opts.exec
        .map(seeds, |&s| run_seed(cfg, variants, s, opts))
        .into_iter()
        .collect()
}
