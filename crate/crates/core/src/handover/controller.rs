//! Per-UE handover, random access and failure state machine.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::{
    deliver_handover_command, entering_condition, exec_event, prepare_target, reported_beams, send_measurement_report,
    HandoverConfig, HoState, Mode, PreambleRegistry, PreparedTarget, TttTracker,
};
use crate::error::{Error, Result};
use crate::failure::{reestablishment_cell, FailureCause, RlfConfig, RlfEvent, RlfMonitor};
use crate::ids::{steps_for_ms, CellId, Step, UeId};
use crate::log::{EventKind, FailureRecord, HandoverRecord, RachRecord, Recorder};
use crate::rach::{rach_attempt, select_access_beam, select_preamble, PreambleKind, RachConfig, RachProcess, T304Status};
use crate::view::LinkView;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ControllerConfig {
    pub dt_ms: u32,
    pub handover: HandoverConfig,
    pub rach: RachConfig,
    pub rlf: RlfConfig,
}

impl ControllerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.dt_ms == 0 {
            return Err(Error::config("time step must be positive"));
        }
        self.handover.validate(self.dt_ms)?;
        self.rach.validate(self.dt_ms)?;
        self.rlf.validate()
    }
}

#[derive(Debug, Clone)]
struct PendingPrep {
    target: CellId,
    report_step: Step,
    ready_step: Step,
    reported: Vec<(usize, f64)>,
}

#[derive(Debug, Clone)]
struct HeldCommand {
    target: PreparedTarget,
    report_step: Step,
    exec: TttTracker,
}

#[derive(Debug, Clone)]
enum Phase {
    /// Not yet attached; the first step connects to the strongest cell.
    Idle,
    Attached { serving: CellId },
    Executing {
        source: CellId,
        rach: RachProcess,
        report_step: Step,
    },
    Reestablishing {
        until: Step,
        record: Option<usize>,
    },
}

#[derive(Debug, Clone)]
pub struct UeController {
    ue: UeId,
    cfg: ControllerConfig,
    phase: Phase,
    rlf: RlfMonitor,
    /// A3 (BHO) or Add (CHO) trackers, one per cell.
    triggers: Vec<TttTracker>,
    pending: Vec<PendingPrep>,
    held: Vec<HeldCommand>,
    prep_steps: u64,
    reestablish_steps: u64,
    collision_rng: ChaCha8Rng,
}

impl UeController {
    pub fn new(ue: UeId, cfg: ControllerConfig, num_cells: usize, collision_rng: ChaCha8Rng) -> Self {
        let trigger_ms = match cfg.handover.mode {
            Mode::Bho => cfg.handover.ttt_a3_ms,
            Mode::Cho => cfg.handover.ttt_add_ms,
        };
        Self {
            ue,
            phase: Phase::Idle,
            rlf: RlfMonitor::new(&cfg.rlf, cfg.dt_ms),
            triggers: vec![TttTracker::new(trigger_ms, cfg.dt_ms); num_cells],
            pending: Vec::new(),
            held: Vec::new(),
            prep_steps: steps_for_ms(cfg.handover.prep_ms, cfg.dt_ms),
            reestablish_steps: steps_for_ms(cfg.rlf.reestablish_delay_ms, cfg.dt_ms),
            collision_rng,
            cfg,
        }
    }

    pub fn ue(&self) -> UeId {
        self.ue
    }

    pub fn config(&self) -> &ControllerConfig {
        &self.cfg
    }

    pub fn state(&self) -> HoState {
        match self.phase {
            Phase::Idle | Phase::Attached { .. } => {
                if !self.held.is_empty() {
                    HoState::Prepared
                } else if !self.pending.is_empty() {
                    HoState::Preparing
                } else {
                    HoState::Connected
                }
            }
            Phase::Executing { .. } => HoState::Executing,
            Phase::Reestablishing { .. } => HoState::Reestablishing,
        }
    }

    /// Serving cell while attached.
    pub fn serving(&self) -> Option<CellId> {
        match self.phase {
            Phase::Attached { serving } => Some(serving),
            _ => None,
        }
    }

    /// Cells currently holding a CHO command for this UE.
    pub fn prepared_cells(&self) -> Vec<CellId> {
        self.held.iter().map(|h| h.target.cell).collect()
    }

    pub fn rlf_running(&self) -> bool {
        self.rlf.is_running()
    }

    /// Advance the UE by one time step against the current measurements.
    pub fn step(&mut self, n: Step, view: &dyn LinkView, registry: &mut PreambleRegistry, rec: &mut Recorder) {
        match self.phase {
            Phase::Idle => {
                self.phase = Phase::Attached {
                    serving: view.strongest_cell(),
                };
            }
            Phase::Reestablishing { until, record } => {
                if n >= until {
                    let cell = reestablishment_cell(view);
                    rec.reestablished(record, n, cell);
                    self.attach(cell);
                }
            }
            Phase::Executing { .. } => self.step_rach(n, view, registry, rec),
            Phase::Attached { serving } => self.step_attached(n, serving, view, registry, rec),
        }
    }

    fn attach(&mut self, cell: CellId) {
        self.phase = Phase::Attached { serving: cell };
        self.rlf.reset();
        self.triggers.iter_mut().for_each(TttTracker::reset);
        self.pending.clear();
        self.held.clear();
    }

    fn release_all(&mut self, registry: &mut PreambleRegistry) {
        for p in &self.pending {
            registry.release(p.target, self.ue);
        }
        for h in &self.held {
            registry.release(h.target.cell, self.ue);
        }
        if let Phase::Executing { rach, .. } = &self.phase {
            registry.release(rach.target_cell(), self.ue);
        }
    }

    fn fail(&mut self, n: Step, cause: FailureCause, old_serving: CellId, registry: &mut PreambleRegistry, rec: &mut Recorder) {
        let record = rec.failure(FailureRecord {
            step: n,
            ue: self.ue,
            cause,
            old_serving,
            state: self.state(),
            reestablished: None,
        });
        self.release_all(registry);
        self.pending.clear();
        self.held.clear();
        self.rlf.reset();
        self.triggers.iter_mut().for_each(TttTracker::reset);
        self.phase = Phase::Reestablishing {
            until: n + self.reestablish_steps,
            record,
        };
    }

    fn step_attached(
        &mut self,
        n: Step,
        serving: CellId,
        view: &dyn LinkView,
        registry: &mut PreambleRegistry,
        rec: &mut Recorder,
    ) {
        if self.rlf.rlf_step(&self.cfg.rlf, view.link_sinr(serving), n) == RlfEvent::Rlf {
            self.fail(n, FailureCause::Rlf, serving, registry, rec);
            return;
        }

        if self.complete_preparations(n, serving, view, registry, rec) {
            return;
        }
        if self.cfg.handover.mode == Mode::Cho && !self.held.is_empty() && self.check_execute(n, serving, view, registry, rec)
        {
            return;
        }
        self.evaluate_triggers(n, serving, view, rec);
        // without preparation latency the target answers within the same step
        if self.prep_steps == 0 {
            self.complete_preparations(n, serving, view, registry, rec);
        }
    }

    /// Handles preparations whose latency has elapsed; returns true if a
    /// baseline handover started executing.
    fn complete_preparations(
        &mut self,
        n: Step,
        serving: CellId,
        view: &dyn LinkView,
        registry: &mut PreambleRegistry,
        rec: &mut Recorder,
    ) -> bool {
        let gamma_out = self.cfg.rlf.gamma_out_db;
        let mut i = 0;
        while i < self.pending.len() {
            if self.pending[i].ready_step > n {
                i += 1;
                continue;
            }
            let p = self.pending.remove(i);
            let target = match prepare_target(p.target, self.ue, &p.reported, self.cfg.handover.n_b, registry, n) {
                Ok(t) => t,
                Err(_) => PreparedTarget::new(p.target, Vec::new(), n),
            };
            rec.event(n, self.ue, EventKind::PrepDone, serving, p.target);
            if !deliver_handover_command(view.link_sinr(serving), gamma_out) {
                rec.event(n, self.ue, EventKind::CmdLost, serving, p.target);
                registry.release(p.target, self.ue);
                self.triggers[p.target.idx()].reset();
                continue;
            }
            rec.event(n, self.ue, EventKind::CmdDelivered, serving, p.target);
            match self.cfg.handover.mode {
                Mode::Bho => {
                    self.start_execution(n, serving, target, p.report_step, view, registry, rec);
                    return true;
                }
                Mode::Cho => self.held.push(HeldCommand {
                    target,
                    report_step: p.report_step,
                    exec: TttTracker::new(self.cfg.handover.ttt_exec_ms, self.cfg.dt_ms),
                }),
            }
        }
        false
    }

    /// Evaluates the Execute condition of every held command; returns true
    /// if execution started.
    fn check_execute(
        &mut self,
        n: Step,
        serving: CellId,
        view: &dyn LinkView,
        registry: &mut PreambleRegistry,
        rec: &mut Recorder,
    ) -> bool {
        let cells = self.prepared_cells();
        let serving_l3 = view.l3_cell(serving);
        let offset = self.cfg.handover.exec_offset_db;
        let mut chosen: Option<usize> = None;
        for (i, h) in self.held.iter_mut().enumerate() {
            let cell = h.target.cell;
            let neighbor = view.l3_cell(cell);
            let fired = exec_event(&cells, cell, serving_l3, neighbor, offset, &mut h.exec, n)
                .expect("held command targets a prepared cell");
            if fired {
                chosen = match chosen {
                    Some(c) if view.l3_cell(cells[c]) >= neighbor => Some(c),
                    _ => Some(i),
                };
            }
        }
        let Some(i) = chosen else { return false };
        let h = self.held.remove(i);
        rec.event(n, self.ue, EventKind::Exec, serving, h.target.cell);
        self.start_execution(n, serving, h.target, h.report_step, view, registry, rec);
        true
    }

    fn evaluate_triggers(&mut self, n: Step, serving: CellId, view: &dyn LinkView, rec: &mut Recorder) {
        let hc = &self.cfg.handover;
        let l3 = view.l3_cells();
        let serving_l3 = l3[serving.idx()];
        let (offset, busy_limit, kind) = match hc.mode {
            Mode::Bho => (hc.a3_offset_db, 1, EventKind::A3),
            Mode::Cho => (hc.add_offset_db, hc.max_prepared, EventKind::Add),
        };
        let busy = self.pending.len() + self.held.len();
        if busy >= busy_limit {
            self.triggers.iter_mut().for_each(TttTracker::reset);
            return;
        }

        let mut fired: Vec<CellId> = Vec::new();
        for (c, tracker) in self.triggers.iter_mut().enumerate() {
            let cell = CellId(c as u16);
            let in_flight =
                self.pending.iter().any(|p| p.target == cell) || self.held.iter().any(|h| h.target.cell == cell);
            if cell == serving || in_flight {
                tracker.reset();
                continue;
            }
            if tracker.update(n, entering_condition(serving_l3, l3[c], offset)) {
                fired.push(cell);
            }
        }
        if fired.is_empty() {
            return;
        }
        // strongest first, lowest id on ties
        fired.sort_by(|a, b| l3[b.idx()].total_cmp(&l3[a.idx()]).then(a.cmp(b)));
        fired.truncate(busy_limit - busy);

        let delivered = send_measurement_report(view.link_sinr(serving), self.cfg.rlf.gamma_out_db);
        for &target in &fired {
            rec.event(n, self.ue, kind, serving, target);
            if delivered {
                self.pending.push(PendingPrep {
                    target,
                    report_step: n,
                    ready_step: n + self.prep_steps,
                    reported: reported_beams(view.l3_beams(target), hc.report_min_dbm),
                });
            } else {
                rec.event(n, self.ue, EventKind::ReportLost, serving, target);
            }
        }
        if delivered && hc.mode == Mode::Bho {
            self.triggers.iter_mut().for_each(TttTracker::reset);
        }
    }

    #[allow(clippy::too_many_arguments)]
    fn start_execution(
        &mut self,
        n: Step,
        source: CellId,
        target: PreparedTarget,
        report_step: Step,
        view: &dyn LinkView,
        registry: &mut PreambleRegistry,
        rec: &mut Recorder,
    ) {
        // other held commands stay reserved until the access concludes
        self.rlf.reset();
        self.phase = Phase::Executing {
            source,
            rach: RachProcess::start(target, n, &self.cfg.rach, self.cfg.dt_ms),
            report_step,
        };
        self.step_rach(n, view, registry, rec);
    }

    fn step_rach(&mut self, n: Step, view: &dyn LinkView, registry: &mut PreambleRegistry, rec: &mut Recorder) {
        let Phase::Executing {
            source,
            ref mut rach,
            report_step,
        } = self.phase
        else {
            unreachable!("step_rach outside execution")
        };
        if rach.t304_monitor(n) == T304Status::Expired {
            self.fail(n, FailureCause::Hof, source, registry, rec);
            return;
        }
        if !rach.attempt_due(n) {
            return;
        }
        rach.attempts += 1;
        let cell = rach.target_cell();
        let prepared = rach.target.beam_ids();
        let sel = select_access_beam(view.l1_beams(cell), &prepared, self.cfg.rach.xi_access);
        let kind = select_preamble(&sel, self.cfg.rach.procedure);
        // one draw per attempt keeps random streams aligned across variants
        let u: f64 = self.collision_rng.random();
        let collided = kind == PreambleKind::Cbra && u < self.cfg.rach.cbra_collision_prob;
        let success = rach_attempt(view.sinr(cell, sel.beam), self.cfg.rlf.gamma_out_db, kind, collided);
        rec.rach_attempt(RachRecord {
            step: n,
            ue: self.ue,
            target: cell,
            beam: sel.beam,
            kind,
            success,
            elapsed_steps: rach.elapsed(n),
            beam_prepared: sel.prepared,
        });
        if !success {
            return;
        }
        let execution_step = rach.start;
        let prepared_step = rach.target.ready_step;
        rec.handover(HandoverRecord {
            ue: self.ue,
            source,
            target: cell,
            report_step,
            prepared_step,
            execution_step,
            completed_step: n,
            kind,
        });
        self.release_all(registry);
        self.attach(cell);
    }
}
