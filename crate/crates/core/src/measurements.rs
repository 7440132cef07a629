//! UE measurement pipeline: L1 moving average per beam, beam consolidation
//! into an L1 cell quality, and separate L3 IIR filters for cells and beams.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ids::{CellId, Step};
use crate::radio::{dbm_to_mw, mw_to_dbm};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AveragingDomain {
    Db,
    Linear,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MeasurementConfig {
    /// Raw samples averaged by the L1 filter (N_L1).
    pub n_l1: usize,
    /// L1 measurement period in time steps (omega).
    pub omega: u64,
    /// Beam consolidation threshold (P_thr), dBm.
    pub p_thr_dbm: f64,
    /// Maximum number of beams averaged into the cell quality (N_str).
    pub n_str: usize,
    /// L3 cell filter coefficient (k).
    pub k_cell: f64,
    /// L3 beam filter coefficient (k').
    pub k_beam: f64,
    pub l1_domain: AveragingDomain,
}

impl Default for MeasurementConfig {
    fn default() -> Self {
        Self {
            n_l1: 4,
            omega: 2,
            p_thr_dbm: -110.0,
            n_str: 4,
            k_cell: 4.0,
            k_beam: 4.0,
            l1_domain: AveragingDomain::Db,
        }
    }
}

impl MeasurementConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_l1 == 0 || self.omega == 0 || self.n_str == 0 {
            return Err(Error::config("measurement: n_l1, omega and n_str must be >= 1"));
        }
        if !(self.k_cell >= 0.0 && self.k_beam >= 0.0) {
            return Err(Error::config("measurement: filter coefficients must be >= 0"));
        }
        Ok(())
    }
}

fn mean_in(values: impl Iterator<Item = f64>, domain: AveragingDomain) -> f64 {
    let mut sum = 0.0;
    let mut n = 0usize;
    match domain {
        AveragingDomain::Db => {
            for v in values {
                sum += v;
                n += 1;
            }
            sum / n as f64
        }
        AveragingDomain::Linear => {
            for v in values {
                sum += dbm_to_mw(v);
                n += 1;
            }
            mw_to_dbm(sum / n as f64)
        }
    }
}

/// Mean of the most recent `n_l1` samples (oldest first in `samples`).
/// Fewer samples are averaged as they are during warm-up.
pub fn l1_beam_filter(samples: &[f64], cfg: &MeasurementConfig) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::EmptyBuffer);
    }
    let start = samples.len().saturating_sub(cfg.n_l1);
    Ok(mean_in(samples[start..].iter().copied(), cfg.l1_domain))
}

/// Beams whose L1 measurement is strictly above `p_thr`.
pub fn strongest_beam_set(l1_beams: &[f64], p_thr: f64) -> Vec<usize> {
    l1_beams
        .iter()
        .enumerate()
        .filter(|&(_, &p)| p > p_thr)
        .map(|(b, _)| b)
        .collect()
}

/// Beam indices sorted by descending power; equal powers keep the lower index first.
pub(crate) fn rank_beams(values: &[f64], beams: &mut [usize]) {
    beams.sort_by(|&a, &b| values[b].total_cmp(&values[a]).then(a.cmp(&b)));
}

/// L1 cell quality from per-beam L1 values: mean of the `n_str` strongest
/// beams above `p_thr`, or the strongest beam when none is above it.
pub fn l1_cell_quality(l1_beams: &[f64], cfg: &MeasurementConfig) -> f64 {
    let mut above = strongest_beam_set(l1_beams, cfg.p_thr_dbm);
    if above.is_empty() {
        return l1_beams.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    }
    rank_beams(l1_beams, &mut above);
    above.truncate(cfg.n_str);
    mean_in(above.iter().map(|&b| l1_beams[b]), cfg.l1_domain)
}

/// IIR forgetting factor `(1/2)^(k/4)`.
pub fn forgetting_factor(k: f64) -> f64 {
    0.5f64.powf(k / 4.0)
}

/// One L3 filter update; the first input seeds the filter.
pub fn l3_update(prev: Option<f64>, input: f64, alpha: f64) -> f64 {
    match prev {
        None => input,
        Some(p) => alpha * input + (1.0 - alpha) * p,
    }
}

/// Filter state of one UE over all cells and beams.
#[derive(Debug, Clone)]
pub struct MeasurementState {
    cfg: MeasurementConfig,
    alpha_cell: f64,
    alpha_beam: f64,
    cells: usize,
    beams: usize,
    /// `n_l1` rows of `cells * beams` raw samples.
    ring: Vec<f64>,
    head: usize,
    filled: usize,
    l1_beam: Vec<f64>,
    l1_cell: Vec<f64>,
    l3_cell: Vec<f64>,
    l3_beam: Vec<f64>,
    last_update: Option<Step>,
    scratch: Vec<f64>,
    scratch_idx: Vec<usize>,
}

impl MeasurementState {
    pub fn new(cfg: MeasurementConfig, cells: usize, beams: usize) -> Self {
        let links = cells * beams;
        Self {
            cfg,
            alpha_cell: forgetting_factor(cfg.k_cell),
            alpha_beam: forgetting_factor(cfg.k_beam),
            cells,
            beams,
            ring: vec![0.0; cfg.n_l1 * links],
            head: 0,
            filled: 0,
            l1_beam: vec![f64::NEG_INFINITY; links],
            l1_cell: vec![f64::NEG_INFINITY; cells],
            l3_cell: vec![f64::NEG_INFINITY; cells],
            l3_beam: vec![f64::NEG_INFINITY; links],
            last_update: None,
            scratch: Vec::with_capacity(cfg.n_l1),
            scratch_idx: Vec::with_capacity(beams),
        }
    }

    pub fn config(&self) -> &MeasurementConfig {
        &self.cfg
    }

    pub fn num_cells(&self) -> usize {
        self.cells
    }

    pub fn num_beams(&self) -> usize {
        self.beams
    }

    pub fn last_update(&self) -> Option<Step> {
        self.last_update
    }

    /// Feed the raw RSRP of every link at step `n` (cell-major). Filter outputs
    /// are refreshed when `n` is a multiple of omega; returns whether they were.
    pub fn push(&mut self, n: Step, rsrp: &[f64]) -> bool {
        let links = self.cells * self.beams;
        debug_assert_eq!(rsrp.len(), links);
        self.ring[self.head * links..(self.head + 1) * links].copy_from_slice(rsrp);
        self.head = (self.head + 1) % self.cfg.n_l1;
        self.filled = (self.filled + 1).min(self.cfg.n_l1);
        if !n.is_multiple_of(self.cfg.omega) {
            return false;
        }
        self.refresh(n);
        true
    }

    fn refresh(&mut self, n: Step) {
        let links = self.cells * self.beams;
        let n_l1 = self.cfg.n_l1;
        let first = self.last_update.is_none();
        for link in 0..links {
            self.scratch.clear();
            for age in (0..self.filled).rev() {
                let row = (self.head + n_l1 - 1 - age) % n_l1;
                self.scratch.push(self.ring[row * links + link]);
            }
            let l1 = mean_in(self.scratch.iter().copied(), self.cfg.l1_domain);
            self.l1_beam[link] = l1;
            let prev = (!first).then_some(self.l3_beam[link]);
            self.l3_beam[link] = l3_update(prev, l1, self.alpha_beam);
        }
        for c in 0..self.cells {
            let beams = &self.l1_beam[c * self.beams..(c + 1) * self.beams];
            let q = cell_quality_with(beams, &self.cfg, &mut self.scratch_idx);
            self.l1_cell[c] = q;
            let prev = (!first).then_some(self.l3_cell[c]);
            self.l3_cell[c] = l3_update(prev, q, self.alpha_cell);
        }
        self.last_update = Some(n);
    }

    pub fn l1_beams(&self, cell: CellId) -> &[f64] {
        &self.l1_beam[cell.idx() * self.beams..(cell.idx() + 1) * self.beams]
    }

    pub fn l3_beams(&self, cell: CellId) -> &[f64] {
        &self.l3_beam[cell.idx() * self.beams..(cell.idx() + 1) * self.beams]
    }

    pub fn l1_cells(&self) -> &[f64] {
        &self.l1_cell
    }

    pub fn l3_cells(&self) -> &[f64] {
        &self.l3_cell
    }

    /// Number of raw samples currently buffered for each link.
    pub fn buffered(&self) -> usize {
        self.filled
    }
}

/// Allocation-free variant of [`l1_cell_quality`].
fn cell_quality_with(l1: &[f64], cfg: &MeasurementConfig, idx: &mut Vec<usize>) -> f64 {
    idx.clear();
    idx.extend((0..l1.len()).filter(|&b| l1[b] > cfg.p_thr_dbm));
    if idx.is_empty() {
        return l1.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    }
    rank_beams(l1, idx);
    idx.truncate(cfg.n_str);
    mean_in(idx.iter().map(|&b| l1[b]), cfg.l1_domain)
}
