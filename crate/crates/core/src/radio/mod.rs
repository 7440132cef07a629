//! Per-(UE, cell, beam) received power and SINR.
//!
//! RSRP is the dB sum of transmit power, pathloss, beamforming gain,
//! spatially correlated shadowing and temporally correlated fast fading.
//! SINR treats every other cell as an interferer that contributes the mean
//! linear power of its `scheduled_beams` strongest beams toward the UE;
//! intra-cell interference is ignored.

pub mod antenna;
pub mod fading;
pub mod pathloss;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{wrap_deg, Point, Rect};
use crate::ids::CellId;

pub use antenna::{beamforming_gain, default_beams, element_gain, BeamConfig};
use fading::{distance_correlation, time_correlation, Ar1Bank};
pub use fading::{FadingConfig, ShadowingConfig};
pub use pathloss::{Geometry, PathlossModel};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LinkModelConfig {
    pub carrier_ghz: f64,
    /// Downlink transmit power per PRB.
    pub tx_power_dbm: f64,
    /// Thermal noise per PRB.
    pub noise_dbm: f64,
    pub penetration_loss_db: f64,
    pub pathloss: PathlossModel,
    pub shadowing: ShadowingConfig,
    pub fading: FadingConfig,
    /// Number of simultaneously scheduled beams per interfering cell (K).
    pub scheduled_beams: usize,
    pub beams: Vec<BeamConfig>,
}

impl Default for LinkModelConfig {
    fn default() -> Self {
        Self {
            carrier_ghz: 28.0,
            tx_power_dbm: 12.0,
            noise_dbm: -97.0,
            penetration_loss_db: 0.0,
            pathloss: PathlossModel::default(),
            shadowing: ShadowingConfig::default(),
            fading: FadingConfig::default(),
            scheduled_beams: 4,
            beams: default_beams(),
        }
    }
}

impl LinkModelConfig {
    pub fn validate(&self) -> Result<()> {
        if self.scheduled_beams == 0 {
            return Err(Error::config("radio.scheduled_beams must be at least 1"));
        }
        if self.noise_dbm >= self.tx_power_dbm {
            return Err(Error::config("radio.noise_dbm must be below radio.tx_power_dbm"));
        }
        if self.beams.is_empty() {
            return Err(Error::config("radio.beams is empty"));
        }
        if self.carrier_ghz <= 0.0 {
            return Err(Error::config("radio.carrier_ghz must be positive"));
        }
        if self.shadowing.enabled && self.shadowing.decorrelation_m <= 0.0 {
            return Err(Error::config("radio.shadowing.decorrelation_m must be positive"));
        }
        if self.fading.enabled && self.fading.coherence_ms <= 0.0 {
            return Err(Error::config("radio.fading.coherence_ms must be positive"));
        }
        if self.beams.iter().any(|b| b.rows == 0 || b.cols == 0) {
            return Err(Error::config("beam panels need at least one row and column"));
        }
        Ok(())
    }

    /// Turns off shadowing and fast fading, leaving pathloss and antenna gain.
    pub fn deterministic(mut self) -> Self {
        self.shadowing.enabled = false;
        self.fading.enabled = false;
        self
    }
}

/// One received-power sample with its dB breakdown.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkSample {
    pub rsrp_dbm: f64,
    pub sinr_db: f64,
    /// Includes penetration loss.
    pub pathloss_db: f64,
    pub gain_dbi: f64,
    pub shadowing_db: f64,
    pub fading_db: f64,
}

impl LinkSample {
    /// RSRP recomputed from its components.
    pub fn recompose(&self, tx_power_dbm: f64) -> f64 {
        tx_power_dbm - self.pathloss_db + self.gain_dbi + self.shadowing_db + self.fading_db
    }
}

#[inline]
pub fn dbm_to_mw(dbm: f64) -> f64 {
    10f64.powf(dbm / 10.0)
}

#[inline]
pub fn mw_to_dbm(mw: f64) -> f64 {
    10.0 * mw.log10()
}

/// Mean linear power of the `k` strongest beams of one cell.
pub fn cell_interference_mw(beams_mw: &[f64], k: usize) -> f64 {
    let k = k.min(beams_mw.len());
    if k == 0 {
        return 0.0;
    }
    let mut top = [0.0f64; 64];
    let mut len = 0usize;
    for &p in beams_mw {
        // insertion into a descending top-k buffer
        if len < k {
            top[len] = p;
            len += 1;
        } else if p > top[k - 1] {
            top[k - 1] = p;
        } else {
            continue;
        }
        let mut i = len - 1;
        while i > 0 && top[i] > top[i - 1] {
            top.swap(i, i - 1);
            i -= 1;
        }
    }
    top[..k].iter().sum::<f64>() / k as f64
}

/// SINR in dB of a signal over thermal noise plus interferer powers, all given in dBm.
pub fn sinr_db(signal_dbm: f64, noise_dbm: f64, interferers_dbm: &[f64]) -> f64 {
    let denom = dbm_to_mw(noise_dbm) + interferers_dbm.iter().map(|&p| dbm_to_mw(p)).sum::<f64>();
    mw_to_dbm(dbm_to_mw(signal_dbm) / denom)
}

/// A cell: one sector of a site.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cell {
    pub id: CellId,
    pub site: usize,
    pub position: Point,
    pub height_m: f64,
    pub boresight_deg: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Site {
    pub position: Point,
    pub height_m: f64,
    pub cells: std::ops::Range<usize>,
}

/// Geometry between one site and one UE.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SiteLink {
    pub geometry: Geometry,
    /// Global azimuth from the site toward the UE, degrees CCW from +x.
    pub azimuth_deg: f64,
    /// Elevation of the UE seen from the site, degrees (negative below horizon).
    pub elevation_deg: f64,
}

/// Link results for one UE at the current step.
#[derive(Debug, Clone)]
pub struct UeLinks {
    beams_per_cell: usize,
    rsrp_dbm: Vec<f64>,
    rsrp_mw: Vec<f64>,
    /// Noise plus interference seen on each cell's links.
    denom_mw: Vec<f64>,
}

impl UeLinks {
    pub fn new(cells: usize, beams: usize) -> Self {
        Self {
            beams_per_cell: beams,
            rsrp_dbm: vec![f64::NEG_INFINITY; cells * beams],
            rsrp_mw: vec![0.0; cells * beams],
            denom_mw: vec![f64::INFINITY; cells],
        }
    }

    #[inline]
    pub fn rsrp(&self, cell: CellId, beam: usize) -> f64 {
        self.rsrp_dbm[cell.idx() * self.beams_per_cell + beam]
    }

    pub fn rsrp_all(&self) -> &[f64] {
        &self.rsrp_dbm
    }

    #[inline]
    pub fn sinr(&self, cell: CellId, beam: usize) -> f64 {
        let i = cell.idx() * self.beams_per_cell + beam;
        mw_to_dbm(self.rsrp_mw[i] / self.denom_mw[cell.idx()])
    }

    pub fn num_cells(&self) -> usize {
        self.denom_mw.len()
    }

    /// Recompute SINR denominators from the stored RSRP values.
    fn refresh_interference(&mut self, noise_mw: f64, k: usize) {
        let b = self.beams_per_cell;
        let n_cells = self.denom_mw.len();
        for (mw, dbm) in self.rsrp_mw.iter_mut().zip(&self.rsrp_dbm) {
            *mw = dbm_to_mw(*dbm);
        }
        let interference: Vec<f64> = (0..n_cells)
            .map(|c| cell_interference_mw(&self.rsrp_mw[c * b..(c + 1) * b], k))
            .collect();
        for c in 0..n_cells {
            let others: f64 = interference
                .iter()
                .enumerate()
                .filter(|&(o, _)| o != c)
                .map(|(_, &p)| p)
                .sum();
            self.denom_mw[c] = noise_mw + others;
        }
    }
}

/// Per-UE radio state: the shadowing and fading processes and their RNG streams.
#[derive(Debug, Clone)]
pub struct UeRadio {
    shadowing: Ar1Bank,
    fading: Ar1Bank,
    shadowing_rng: ChaCha8Rng,
    fading_rng: ChaCha8Rng,
    pub links: UeLinks,
}

impl UeRadio {
    pub fn new(model: &RadioModel, shadowing_rng: ChaCha8Rng, fading_rng: ChaCha8Rng) -> Self {
        let mut shadowing_rng = shadowing_rng;
        let mut fading_rng = fading_rng;
        let n_links = model.cells.len() * model.cfg.beams.len();
        let shadowing = if model.cfg.shadowing.enabled {
            Ar1Bank::new(model.sites.len(), &mut shadowing_rng)
        } else {
            Ar1Bank::zeros(model.sites.len())
        };
        let fading = if model.cfg.fading.enabled {
            Ar1Bank::new(n_links, &mut fading_rng)
        } else {
            Ar1Bank::zeros(n_links)
        };
        Self {
            shadowing,
            fading,
            shadowing_rng,
            fading_rng,
            links: UeLinks::new(model.cells.len(), model.cfg.beams.len()),
        }
    }

    /// Convenience constructor for tests: streams seeded directly.
    pub fn seeded(model: &RadioModel, seed: u64) -> Self {
        let mut a = ChaCha8Rng::seed_from_u64(seed);
        a.set_stream(1);
        let mut b = ChaCha8Rng::seed_from_u64(seed);
        b.set_stream(2);
        Self::new(model, a, b)
    }
}

/// Static network description used to evaluate links.
#[derive(Debug, Clone)]
pub struct RadioModel {
    pub cfg: LinkModelConfig,
    pub cells: Vec<Cell>,
    pub sites: Vec<Site>,
    pub buildings: Vec<Rect>,
    pub rx_height_m: f64,
    pub dt_ms: f64,
}

impl RadioModel {
    pub fn num_beams(&self) -> usize {
        self.cfg.beams.len()
    }

    /// LOS holds if the ground projection of the site-UE segment crosses no building.
    pub fn line_of_sight(&self, site: &Site, pos: Point) -> bool {
        !self
            .buildings
            .iter()
            .any(|b| b.blocks_segment(site.position, pos))
    }

    pub fn site_link(&self, site: &Site, pos: Point) -> SiteLink {
        let d2d = site.position.dist(pos);
        let dh = self.rx_height_m - site.height_m;
        let d3d = d2d.hypot(dh);
        SiteLink {
            geometry: Geometry {
                d2d,
                d3d,
                h_bs: site.height_m,
                h_ut: self.rx_height_m,
                los: self.line_of_sight(site, pos),
            },
            azimuth_deg: site.position.heading_to(pos).to_degrees(),
            elevation_deg: dh.atan2(d2d).to_degrees(),
        }
    }

    /// Angular offsets of the UE from the steering direction of `beam` of `cell`.
    pub fn beam_offsets(&self, cell: &Cell, beam: &BeamConfig, link: &SiteLink) -> (f64, f64) {
        let horizontal = wrap_deg(link.azimuth_deg - cell.boresight_deg);
        (
            wrap_deg(horizontal - beam.steer_deg),
            link.elevation_deg - beam.elevation_deg(),
        )
    }

    fn shadowing_db(&self, radio: &UeRadio, site: usize, los: bool) -> f64 {
        let s = &self.cfg.shadowing;
        if !s.enabled {
            return 0.0;
        }
        let sigma = if los { s.sigma_los_db } else { s.sigma_nlos_db };
        sigma * radio.shadowing.get(site)
    }

    fn fading_db(&self, radio: &UeRadio, link: usize) -> f64 {
        if !self.cfg.fading.enabled {
            return 0.0;
        }
        self.cfg.fading.sigma_db * radio.fading.get(link)
    }

    /// Advance the shadowing (by distance moved) and fading (by one step)
    /// processes. Not called at step 0.
    pub fn advance(&self, radio: &mut UeRadio, moved_m: f64) {
        if self.cfg.shadowing.enabled {
            let rho = distance_correlation(moved_m, self.cfg.shadowing.decorrelation_m);
            radio.shadowing.advance(rho, &mut radio.shadowing_rng);
        }
        if self.cfg.fading.enabled {
            let rho = time_correlation(self.dt_ms, self.cfg.fading.coherence_ms);
            radio.fading.advance(rho, &mut radio.fading_rng);
        }
    }

    /// Recompute every link of the UE at position `pos` from the current
    /// process states.
    pub fn evaluate(&self, radio: &mut UeRadio, pos: Point) {
        let nb = self.num_beams();
        for (s_idx, site) in self.sites.iter().enumerate() {
            let link = self.site_link(site, pos);
            let pl = self.cfg.pathloss.loss_db(&link.geometry, self.cfg.carrier_ghz)
                + self.cfg.penetration_loss_db;
            let sh = self.shadowing_db(radio, s_idx, link.geometry.los);
            let base = self.cfg.tx_power_dbm - pl + sh;
            for cell in &self.cells[site.cells.clone()] {
                for (b, beam) in self.cfg.beams.iter().enumerate() {
                    let (az, el) = self.beam_offsets(cell, beam, &link);
                    let i = cell.id.idx() * nb + b;
                    radio.links.rsrp_dbm[i] = base + beamforming_gain(beam, az, el) + self.fading_db(radio, i);
                }
            }
        }
        radio
            .links
            .refresh_interference(dbm_to_mw(self.cfg.noise_dbm), self.cfg.scheduled_beams);
    }

    /// Full breakdown of one link at the UE's current state. `evaluate` must
    /// have run for this UE at the current step so the SINR is current.
    pub fn sample(&self, radio: &UeRadio, pos: Point, cell: CellId, beam: usize) -> LinkSample {
        let c = &self.cells[cell.idx()];
        let site = &self.sites[c.site];
        let link = self.site_link(site, pos);
        let pathloss_db = self.cfg.pathloss.loss_db(&link.geometry, self.cfg.carrier_ghz)
            + self.cfg.penetration_loss_db;
        let b = &self.cfg.beams[beam];
        let (az, el) = self.beam_offsets(c, b, &link);
        let gain_dbi = beamforming_gain(b, az, el);
        let shadowing_db = self.shadowing_db(radio, c.site, link.geometry.los);
        let fading_db = self.fading_db(radio, cell.idx() * self.num_beams() + beam);
        LinkSample {
            rsrp_dbm: radio.links.rsrp(cell, beam),
            sinr_db: radio.links.sinr(cell, beam),
            pathloss_db,
            gain_dbi,
            shadowing_db,
            fading_db,
        }
    }
}
