//! Baseline (BHO) and conditional (CHO) handover.
//!
//! BHO: an A3 trigger sends a measurement report, the target is prepared
//! after `prep_ms`, and the UE detaches and starts random access as soon as
//! the command arrives. CHO: an Add trigger (usually with a negative offset)
//! prepares the target early; the UE stays on the serving cell and starts
//! random access only once the Execute condition has held for its TTT.
//! Reports and commands are delivered only if the serving-link SINR is above
//! the out-of-sync threshold at that instant.

mod controller;
mod prep;
mod ttt;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ids::{CellId, Step};

pub use controller::{ControllerConfig, UeController};
pub use prep::{prepare_target, select_prepared_beams, PreambleRegistry, PreparedTarget};
pub use ttt::TttTracker;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Mode {
    Bho,
    Cho,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Bho => "BHO",
            Mode::Cho => "CHO",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "BHO" => Ok(Mode::Bho),
            "CHO" => Ok(Mode::Cho),
            other => Err(Error::config(format!("unknown handover mode '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HandoverConfig {
    pub mode: Mode,
    pub a3_offset_db: f64,
    pub add_offset_db: f64,
    pub exec_offset_db: f64,
    pub ttt_a3_ms: u32,
    pub ttt_add_ms: u32,
    pub ttt_exec_ms: u32,
    /// Preparation latency between report and command (T_p).
    pub prep_ms: u32,
    /// Prepared beams per target (N_B).
    pub n_b: usize,
    /// Maximum cells prepared or preparing at once (CHO).
    pub max_prepared: usize,
    /// Dedicated preambles available per beam of each cell.
    pub preamble_pool: usize,
    /// Beams with L3 RSRP above this are included in measurement reports.
    pub report_min_dbm: f64,
}

impl Default for HandoverConfig {
    fn default() -> Self {
        Self {
            mode: Mode::Bho,
            a3_offset_db: 3.0,
            add_offset_db: -3.0,
            exec_offset_db: 3.0,
            ttt_a3_ms: 160,
            ttt_add_ms: 160,
            ttt_exec_ms: 80,
            prep_ms: 20,
            n_b: 4,
            max_prepared: 3,
            preamble_pool: 64,
            report_min_dbm: -110.0,
        }
    }
}

impl HandoverConfig {
    pub fn validate(&self, dt_ms: u32) -> Result<()> {
        if self.mode == Mode::Cho && self.add_offset_db >= self.exec_offset_db {
            return Err(Error::config("handover.add_offset_db must be below handover.exec_offset_db"));
        }
        if !self.prep_ms.is_multiple_of(dt_ms) {
            return Err(Error::config("handover.prep_ms must be a multiple of the time step"));
        }
        if self.n_b == 0 || self.max_prepared == 0 {
            return Err(Error::config("handover.n_b and handover.max_prepared must be >= 1"));
        }
        Ok(())
    }
}

/// Handover phase of a UE as seen from outside the state machine. The
/// measurement report and, for BHO, the command reception are instantaneous
/// transitions, so they have no state of their own.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum HoState {
    Connected,
    /// Report delivered; target preparation under way.
    Preparing,
    /// CHO command held; waiting for the Execute condition.
    Prepared,
    /// Random access toward the target in progress.
    Executing,
    Reestablishing,
}

/// `serving + offset < neighbor`, the shared shape of A3, Add and Execute.
#[inline]
pub fn entering_condition(serving_l3: f64, neighbor_l3: f64, offset_db: f64) -> bool {
    serving_l3 + offset_db < neighbor_l3
}

pub fn a3_event(serving_l3: f64, neighbor_l3: f64, offset_db: f64, tracker: &mut TttTracker, n: Step) -> bool {
    tracker.update(n, entering_condition(serving_l3, neighbor_l3, offset_db))
}

pub fn add_event(serving_l3: f64, neighbor_l3: f64, offset_db: f64, tracker: &mut TttTracker, n: Step) -> bool {
    tracker.update(n, entering_condition(serving_l3, neighbor_l3, offset_db))
}

/// Execute condition toward `cell`, which must be among the prepared cells.
pub fn exec_event(
    prepared: &[CellId],
    cell: CellId,
    serving_l3: f64,
    neighbor_l3: f64,
    offset_db: f64,
    tracker: &mut TttTracker,
    n: Step,
) -> Result<bool> {
    if !prepared.contains(&cell) {
        return Err(Error::ExecOnUnpreparedCell(cell));
    }
    Ok(tracker.update(n, entering_condition(serving_l3, neighbor_l3, offset_db)))
}

/// Uplink report delivery on the serving link.
#[inline]
pub fn send_measurement_report(serving_sinr_db: f64, gamma_out_db: f64) -> bool {
    serving_sinr_db > gamma_out_db
}

/// Downlink command delivery on the serving link.
#[inline]
pub fn deliver_handover_command(serving_sinr_db: f64, gamma_out_db: f64) -> bool {
    serving_sinr_db > gamma_out_db
}

/// Beams of a cell included in a measurement report: those above
/// `min_dbm`, or the single strongest beam if none is.
pub fn reported_beams(l3_beams: &[f64], min_dbm: f64) -> Vec<(usize, f64)> {
    let above: Vec<(usize, f64)> = l3_beams
        .iter()
        .enumerate()
        .filter(|&(_, &p)| p > min_dbm)
        .map(|(b, &p)| (b, p))
        .collect();
    if above.is_empty() && !l3_beams.is_empty() {
        let b = crate::view::argmax(l3_beams);
        return vec![(b, l3_beams[b])];
    }
    above
}
