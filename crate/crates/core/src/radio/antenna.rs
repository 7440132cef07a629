//! Transmit antenna model: the single-element pattern of 3GPP TR 38.901
//! Table 7.3-1 and a closed-form uniform planar array factor.
//!
//! Both patterns are evaluated at the angular offset from the beam's steering
//! direction, so every beam of a panel peaks at the same gain. Scan loss is
//! not modeled.

use serde::{Deserialize, Serialize};

/// Peak gain of one radiating element.
pub const ELEMENT_MAX_GAIN_DBI: f64 = 8.0;
const ELEMENT_HPBW_DEG: f64 = 65.0;
const ELEMENT_SLA_DB: f64 = 30.0;
const ELEMENT_A_MAX_DB: f64 = 30.0;

/// Floor applied to the normalized array factor so nulls stay finite.
const ARRAY_FACTOR_FLOOR: f64 = 1e-6;

/// One transmit beam of a cell.
///
/// Angles follow the panel table in the scenario file: `zenith_deg` is the
/// steering angle measured from the panel's vertical axis (90 is the horizon,
/// 97 is a 7 degree downtilt) and `steer_deg` is the horizontal steering
/// relative to the sector boresight.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BeamConfig {
    /// 1-based beam index within the cell.
    pub index: u8,
    pub zenith_deg: f64,
    pub steer_deg: f64,
    pub rows: u32,
    pub cols: u32,
    /// Vertical element spacing in wavelengths.
    pub v_spacing: f64,
    /// Horizontal element spacing in wavelengths.
    pub h_spacing: f64,
}

impl BeamConfig {
    /// Elevation of the steering direction above the horizon, degrees.
    pub fn elevation_deg(&self) -> f64 {
        90.0 - self.zenith_deg
    }

    pub fn elements(&self) -> u32 {
        self.rows * self.cols
    }
}

/// The twelve-beam grid: eight narrow far-field beams on a 16x8 panel and
/// four wide near-field beams on an 8x4 panel.
pub fn default_beams() -> Vec<BeamConfig> {
    let far = (1..=8u8).map(|b| BeamConfig {
        index: b,
        zenith_deg: 90.0,
        steer_deg: -52.5 + 15.0 * f64::from(b - 1),
        rows: 16,
        cols: 8,
        v_spacing: 0.7,
        h_spacing: 0.5,
    });
    let near = (9..=12u8).map(|b| BeamConfig {
        index: b,
        zenith_deg: 97.0,
        steer_deg: -45.0 + 30.0 * f64::from(b - 8),
        rows: 8,
        cols: 4,
        v_spacing: 0.7,
        h_spacing: 0.5,
    });
    far.chain(near).collect()
}

/// Single-element gain in dBi at the given azimuth and elevation offsets
/// (degrees, each in [-180, 180]).
pub fn element_gain(az_offset_deg: f64, el_offset_deg: f64) -> f64 {
    let a_h = -(12.0 * (az_offset_deg / ELEMENT_HPBW_DEG).powi(2)).min(ELEMENT_A_MAX_DB);
    let a_v = -(12.0 * (el_offset_deg / ELEMENT_HPBW_DEG).powi(2)).min(ELEMENT_SLA_DB);
    ELEMENT_MAX_GAIN_DBI - (-(a_h + a_v)).min(ELEMENT_A_MAX_DB)
}

/// |sin(n x) / (n sin x)|^2, the normalized power pattern of an n-element
/// uniform linear array.
#[inline]
fn ula_power(n: u32, x: f64) -> f64 {
    let s = x.sin();
    if s.abs() < 1e-12 {
        return 1.0;
    }
    let r = (f64::from(n) * x).sin() / (f64::from(n) * s);
    r * r
}

/// Array gain in dB of the planar panel relative to one element. Equals
/// `10 log10(rows * cols)` at zero offset.
pub fn array_gain_db(beam: &BeamConfig, az_offset_deg: f64, el_offset_deg: f64) -> f64 {
    let az = az_offset_deg.to_radians();
    let el = el_offset_deg.to_radians();
    let u = az.sin() * el.cos();
    let v = el.sin();
    let pi = std::f64::consts::PI;
    let horizontal = ula_power(beam.cols, pi * beam.h_spacing * u);
    let vertical = ula_power(beam.rows, pi * beam.v_spacing * v);
    let af = (horizontal * vertical).max(ARRAY_FACTOR_FLOOR);
    10.0 * (f64::from(beam.elements()) * af).log10()
}

/// Total transmit gain (element pattern plus array factor) of `beam` toward a
/// direction offset from its steering direction.
pub fn beamforming_gain(beam: &BeamConfig, az_offset_deg: f64, el_offset_deg: f64) -> f64 {
    element_gain(az_offset_deg, el_offset_deg) + array_gain_db(beam, az_offset_deg, el_offset_deg)
}
