//! CSV writers for event logs and link/measurement traces.

use std::fs::File;
use std::path::Path;

use csv::Writer;

use crate::error::Result;
use crate::ids::{CellId, Step};
use crate::log::{FailureRecord, HandoverRecord, HoEvent, RachRecord};
use crate::measurements::MeasurementState;
use crate::radio::UeLinks;

pub fn write_events(path: &Path, events: &[HoEvent]) -> Result<()> {
    let mut w = Writer::from_path(path)?;
    w.write_record(["step", "ue", "event", "serving", "target"])?;
    for e in events {
        w.write_record([
            e.step.to_string(),
            e.ue.to_string(),
            e.kind.as_str().to_string(),
            e.serving.to_string(),
            e.target.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_rach(path: &Path, attempts: &[RachRecord]) -> Result<()> {
    let mut w = Writer::from_path(path)?;
    w.write_record(["step", "ue", "target", "beam", "kind", "outcome", "elapsed_steps", "beam_prepared"])?;
    for a in attempts {
        w.write_record([
            a.step.to_string(),
            a.ue.to_string(),
            a.target.to_string(),
            a.beam.to_string(),
            a.kind.as_str().to_string(),
            if a.success { "success" } else { "fail" }.to_string(),
            a.elapsed_steps.to_string(),
            a.beam_prepared.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_failures(path: &Path, failures: &[FailureRecord]) -> Result<()> {
    let mut w = Writer::from_path(path)?;
    w.write_record(["step", "ue", "cause", "old_serving", "state", "reestablished_step", "reestablished_cell"])?;
    for f in failures {
        let (rs, rc) = match f.reestablished {
            Some((s, c)) => (s.to_string(), c.to_string()),
            None => (String::new(), String::new()),
        };
        w.write_record([
            f.step.to_string(),
            f.ue.to_string(),
            f.cause.to_string(),
            f.old_serving.to_string(),
            format!("{:?}", f.state),
            rs,
            rc,
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_handovers(path: &Path, handovers: &[HandoverRecord]) -> Result<()> {
    let mut w = Writer::from_path(path)?;
    w.write_record([
        "ue",
        "source",
        "target",
        "report_step",
        "prepared_step",
        "execution_step",
        "completed_step",
        "waiting_steps",
        "kind",
    ])?;
    for h in handovers {
        w.write_record([
            h.ue.to_string(),
            h.source.to_string(),
            h.target.to_string(),
            h.report_step.to_string(),
            h.prepared_step.to_string(),
            h.execution_step.to_string(),
            h.completed_step.to_string(),
            h.waiting_steps().to_string(),
            h.kind.as_str().to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Per-step link trace (every UE, cell and beam) and the measurement trace
/// written at each filter update.
pub struct LinkTraceWriter {
    links: Writer<File>,
    meas: Writer<File>,
}

impl LinkTraceWriter {
    pub fn create(dir: &Path, seed: u64) -> Result<Self> {
        std::fs::create_dir_all(dir)?;
        let mut links = Writer::from_path(dir.join(format!("links_seed{seed}.csv")))?;
        links.write_record(["step", "ue", "cell", "beam", "rsrp_dbm", "sinr_db"])?;
        let mut meas = Writer::from_path(dir.join(format!("measurements_seed{seed}.csv")))?;
        meas.write_record(["step", "m", "ue", "cell", "beam", "l1_dbm", "l3_dbm"])?;
        Ok(Self { links, meas })
    }

    pub fn write_ue(&mut self, n: Step, ue: usize, links: &UeLinks, meas: &MeasurementState) -> Result<()> {
        let omega = meas.config().omega;
        let updated = meas.last_update() == Some(n);
        for c in 0..meas.num_cells() {
            let cell = CellId(c as u16);
            let l1 = meas.l1_beams(cell);
            let l3 = meas.l3_beams(cell);
            for b in 0..meas.num_beams() {
                self.links.write_record([
                    n.to_string(),
                    ue.to_string(),
                    c.to_string(),
                    b.to_string(),
                    format!("{:.4}", links.rsrp(cell, b)),
                    format!("{:.4}", links.sinr(cell, b)),
                ])?;
                if updated {
                    self.meas.write_record([
                        n.to_string(),
                        (n / omega).to_string(),
                        ue.to_string(),
                        c.to_string(),
                        b.to_string(),
                        format!("{:.4}", l1[b]),
                        format!("{:.4}", l3[b]),
                    ])?;
                }
            }
        }
        Ok(())
    }

    pub fn finish(mut self) -> Result<()> {
        self.links.flush()?;
        self.meas.flush()?;
        Ok(())
    }
}
