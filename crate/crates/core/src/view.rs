//! What a UE's handover logic can observe at one time step.

use crate::ids::CellId;
use crate::measurements::MeasurementState;
use crate::radio::UeLinks;

/// Read-only measurement and link-quality view of one UE.
///
/// The simulator backs it with the measurement filters and radio links;
/// tests back it with scripted values.
pub trait LinkView {
    fn num_cells(&self) -> usize;
    fn l1_beams(&self, cell: CellId) -> &[f64];
    fn l3_beams(&self, cell: CellId) -> &[f64];
    fn l3_cells(&self) -> &[f64];
    fn sinr(&self, cell: CellId, beam: usize) -> f64;

    fn l3_cell(&self, cell: CellId) -> f64 {
        self.l3_cells()[cell.idx()]
    }

    /// Strongest L1 beam of `cell`, lowest index on ties.
    fn serving_beam(&self, cell: CellId) -> usize {
        argmax(self.l1_beams(cell))
    }

    /// SINR of the UE's link to `cell` on its strongest L1 beam.
    fn link_sinr(&self, cell: CellId) -> f64 {
        self.sinr(cell, self.serving_beam(cell))
    }

    /// Cell with the highest L3 quality, lowest id on ties.
    fn strongest_cell(&self) -> CellId {
        CellId(argmax(self.l3_cells()) as u16)
    }
}

/// Index of the largest value; the first one wins ties.
pub fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = i;
        }
    }
    best
}

/// The simulator's view: filter outputs plus current-step SINR.
pub struct SimView<'a> {
    pub meas: &'a MeasurementState,
    pub links: &'a UeLinks,
}

impl LinkView for SimView<'_> {
    fn num_cells(&self) -> usize {
        self.meas.num_cells()
    }

    fn l1_beams(&self, cell: CellId) -> &[f64] {
        self.meas.l1_beams(cell)
    }

    fn l3_beams(&self, cell: CellId) -> &[f64] {
        self.meas.l3_beams(cell)
    }

    fn l3_cells(&self) -> &[f64] {
        self.meas.l3_cells()
    }

    fn sinr(&self, cell: CellId, beam: usize) -> f64 {
        self.links.sinr(cell, beam)
    }
}
