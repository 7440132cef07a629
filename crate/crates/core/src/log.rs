//! Per-run records: handover events, RACH attempts, failures and the KPI counters.

use serde::Serialize;

use crate::failure::FailureCause;
use crate::handover::HoState;
use crate::ids::{CellId, Step, UeId};
use crate::kpi::KpiCounters;
use crate::rach::PreambleKind;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum EventKind {
    A3,
    Add,
    Exec,
    ReportLost,
    PrepDone,
    CmdDelivered,
    CmdLost,
    HoSuccess,
}

impl EventKind {
    pub fn as_str(self) -> &'static str {
        match self {
            EventKind::A3 => "A3",
            EventKind::Add => "ADD",
            EventKind::Exec => "EXEC",
            EventKind::ReportLost => "REPORT_LOST",
            EventKind::PrepDone => "PREP_DONE",
            EventKind::CmdDelivered => "CMD_DELIVERED",
            EventKind::CmdLost => "CMD_LOST",
            EventKind::HoSuccess => "HO_SUCCESS",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HoEvent {
    pub step: Step,
    pub ue: UeId,
    pub kind: EventKind,
    pub serving: CellId,
    pub target: CellId,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RachRecord {
    pub step: Step,
    pub ue: UeId,
    pub target: CellId,
    pub beam: usize,
    pub kind: PreambleKind,
    pub success: bool,
    pub elapsed_steps: u64,
    /// Whether the accessed beam was in the prepared set at attempt time.
    pub beam_prepared: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FailureRecord {
    pub step: Step,
    pub ue: UeId,
    pub cause: FailureCause,
    pub old_serving: CellId,
    /// Handover state the UE was in when the failure was declared.
    pub state: HoState,
    pub reestablished: Option<(Step, CellId)>,
}

/// One completed handover.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HandoverRecord {
    pub ue: UeId,
    pub source: CellId,
    pub target: CellId,
    /// Measurement report instant (m0).
    pub report_step: Step,
    /// Handover command delivered (preparation complete).
    pub prepared_step: Step,
    /// Random access started (m1).
    pub execution_step: Step,
    pub completed_step: Step,
    pub kind: PreambleKind,
}

impl HandoverRecord {
    /// Time the UE held the command before executing (zero for baseline handover).
    pub fn waiting_steps(&self) -> u64 {
        self.execution_step - self.prepared_step
    }
}

/// Collects everything a run produces. Detailed logs are optional; the KPI
/// counters are always kept and skip events before the warm-up boundary.
#[derive(Debug, Clone)]
pub struct Recorder {
    pub detailed: bool,
    pub warmup_steps: Step,
    pub counters: KpiCounters,
    /// Successful handovers after warm-up.
    pub handovers_counted: u64,
    pub events: Vec<HoEvent>,
    pub rach: Vec<RachRecord>,
    pub failures: Vec<FailureRecord>,
    pub handovers: Vec<HandoverRecord>,
}

impl Recorder {
    pub fn new(detailed: bool, warmup_steps: Step, counters: KpiCounters) -> Self {
        Self {
            detailed,
            warmup_steps,
            counters,
            handovers_counted: 0,
            events: Vec::new(),
            rach: Vec::new(),
            failures: Vec::new(),
            handovers: Vec::new(),
        }
    }

    fn counted(&self, step: Step) -> bool {
        step >= self.warmup_steps
    }

    pub fn event(&mut self, step: Step, ue: UeId, kind: EventKind, serving: CellId, target: CellId) {
        if self.detailed {
            self.events.push(HoEvent {
                step,
                ue,
                kind,
                serving,
                target,
            });
        }
    }

    pub fn rach_attempt(&mut self, rec: RachRecord) {
        if self.detailed {
            self.rach.push(rec);
        }
    }

    pub fn handover(&mut self, rec: HandoverRecord) {
        if self.counted(rec.completed_step) {
            self.handovers_counted += 1;
            match rec.kind {
                PreambleKind::Cfra => self.counters.n_cfra += 1,
                PreambleKind::Cbra => self.counters.n_cbra += 1,
            }
        }
        self.event(rec.completed_step, rec.ue, EventKind::HoSuccess, rec.source, rec.target);
        if self.detailed {
            self.handovers.push(rec);
        }
    }

    /// Declares a failure; returns the index of its record when logs are kept.
    pub fn failure(&mut self, rec: FailureRecord) -> Option<usize> {
        if self.counted(rec.step) {
            match rec.cause {
                FailureCause::Rlf => self.counters.n_rlf += 1,
                FailureCause::Hof => self.counters.n_hof += 1,
            }
        }
        self.detailed.then(|| {
            self.failures.push(rec);
            self.failures.len() - 1
        })
    }

    pub fn reestablished(&mut self, record: Option<usize>, step: Step, cell: CellId) {
        if let Some(i) = record {
            self.failures[i].reestablished = Some((step, cell));
        }
    }
}
