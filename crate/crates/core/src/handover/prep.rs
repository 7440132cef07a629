//! Target-cell preparation: prepared beam set and dedicated preambles.

use crate::error::{Error, Result};
use crate::ids::{CellId, Step, UeId};
use crate::measurements::rank_beams;

/// A target cell prepared for one UE: the beams holding a dedicated preamble.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PreparedTarget {
    pub cell: CellId,
    /// `(beam, preamble)` pairs in descending reported-power order.
    pub beams: Vec<(usize, u16)>,
    /// Step at which the preparation completed.
    pub ready_step: Step,
}

impl PreparedTarget {
    pub fn new(cell: CellId, beams: Vec<(usize, u16)>, ready_step: Step) -> Self {
        Self {
            cell,
            beams,
            ready_step,
        }
    }

    pub fn beam_ids(&self) -> Vec<usize> {
        self.beams.iter().map(|&(b, _)| b).collect()
    }

    pub fn contains(&self, beam: usize) -> bool {
        self.beams.iter().any(|&(b, _)| b == beam)
    }
}

/// Dedicated preamble pools. Random-access occasions are tied to beams, so
/// each (cell, beam) has its own pool and a preamble is held by at most one
/// UE per beam at a time.
#[derive(Debug, Clone)]
pub struct PreambleRegistry {
    beams: usize,
    pools: Vec<Vec<Option<UeId>>>,
}

impl PreambleRegistry {
    pub fn new(cells: usize, beams: usize, pool_size: usize) -> Self {
        Self {
            beams,
            pools: vec![vec![None; pool_size]; cells * beams],
        }
    }

    fn pool_mut(&mut self, cell: CellId, beam: usize) -> &mut Vec<Option<UeId>> {
        &mut self.pools[cell.idx() * self.beams + beam]
    }

    pub fn reserve(&mut self, cell: CellId, ue: UeId, beam: usize) -> Option<u16> {
        let pool = self.pool_mut(cell, beam);
        let free = pool.iter().position(Option::is_none)?;
        pool[free] = Some(ue);
        Some(free as u16)
    }

    /// Release every preamble `ue` holds in `cell`.
    pub fn release(&mut self, cell: CellId, ue: UeId) {
        for b in 0..self.beams {
            for slot in self.pool_mut(cell, b) {
                if *slot == Some(ue) {
                    *slot = None;
                }
            }
        }
    }

    pub fn in_use(&self, cell: CellId) -> usize {
        self.pools[cell.idx() * self.beams..(cell.idx() + 1) * self.beams]
            .iter()
            .flatten()
            .filter(|s| s.is_some())
            .count()
    }

    pub fn holder(&self, cell: CellId, beam: usize, preamble: u16) -> Option<UeId> {
        self.pools[cell.idx() * self.beams + beam]
            .get(preamble as usize)
            .copied()
            .flatten()
    }
}

/// The `n_b` strongest reported beams, lowest index first on ties.
pub fn select_prepared_beams(reported: &[(usize, f64)], n_b: usize) -> Vec<usize> {
    let max_beam = reported.iter().map(|&(b, _)| b).max().map_or(0, |b| b + 1);
    let mut values = vec![f64::NEG_INFINITY; max_beam];
    for &(b, p) in reported {
        values[b] = p;
    }
    let mut beams: Vec<usize> = reported.iter().map(|&(b, _)| b).collect();
    rank_beams(&values, &mut beams);
    beams.truncate(n_b);
    beams
}

/// Reserve dedicated preambles for the strongest reported beams of `cell`.
/// Beams whose pool has no preamble left stay unprepared; if none could be
/// reserved the error is returned and the caller proceeds without dedicated
/// preambles.
pub fn prepare_target(
    cell: CellId,
    ue: UeId,
    reported: &[(usize, f64)],
    n_b: usize,
    registry: &mut PreambleRegistry,
    ready_step: Step,
) -> Result<PreparedTarget> {
    let wanted = select_prepared_beams(reported, n_b);
    let beams: Vec<(usize, u16)> = wanted
        .iter()
        .filter_map(|&b| registry.reserve(cell, ue, b).map(|p| (b, p)))
        .collect();
    if beams.is_empty() && !wanted.is_empty() {
        return Err(Error::PreamblePoolExhausted(cell));
    }
    Ok(PreparedTarget::new(cell, beams, ready_step))
}
