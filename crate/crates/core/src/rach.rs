//! Random access toward a handover target: access-beam selection, preamble
//! selection for the standard and the proposed flow, attempts and T304.
//!
//! Beam selection is identical for both flows. They differ only when the
//! strongest-beam fallback picks a beam that happens to be prepared: the
//! standard flow then uses a contention-based preamble, the proposed flow
//! still uses the dedicated one.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::handover::PreparedTarget;
use crate::ids::{steps_for_ms, CellId, Step};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum RachProcedure {
    ThreeGpp,
    Proposed,
}

impl RachProcedure {
    pub fn as_str(self) -> &'static str {
        match self {
            RachProcedure::ThreeGpp => "THREE_GPP",
            RachProcedure::Proposed => "PROPOSED",
        }
    }
}

impl fmt::Display for RachProcedure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for RachProcedure {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().replace('-', "_").as_str() {
            "THREE_GPP" | "3GPP" => Ok(RachProcedure::ThreeGpp),
            "PROPOSED" => Ok(RachProcedure::Proposed),
            other => Err(Error::config(format!("unknown RACH procedure '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum PreambleKind {
    Cfra,
    Cbra,
}

impl PreambleKind {
    pub fn as_str(self) -> &'static str {
        match self {
            PreambleKind::Cfra => "CFRA",
            PreambleKind::Cbra => "CBRA",
        }
    }
}

/// Access threshold on prepared-beam L1 RSRP, dBm. Infinite values are
/// allowed and written as `-inf` / `+inf`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct AccessThreshold(pub f64);

impl AccessThreshold {
    pub const NEG_INF: AccessThreshold = AccessThreshold(f64::NEG_INFINITY);
    pub const POS_INF: AccessThreshold = AccessThreshold(f64::INFINITY);

    pub fn dbm(self) -> f64 {
        self.0
    }
}

impl fmt::Display for AccessThreshold {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0 == f64::INFINITY {
            f.write_str("+inf")
        } else if self.0 == f64::NEG_INFINITY {
            f.write_str("-inf")
        } else {
            write!(f, "{}", self.0)
        }
    }
}

impl FromStr for AccessThreshold {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "-inf" | "-infinity" => Ok(Self::NEG_INF),
            "+inf" | "inf" | "+infinity" | "infinity" => Ok(Self::POS_INF),
            t => t
                .parse::<f64>()
                .ok()
                .filter(|v| !v.is_nan())
                .map(AccessThreshold)
                .ok_or_else(|| Error::config(format!("invalid access threshold '{s}'"))),
        }
    }
}

impl Serialize for AccessThreshold {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        if self.0.is_finite() {
            s.serialize_f64(self.0)
        } else {
            s.serialize_str(&self.to_string())
        }
    }
}

impl<'de> Deserialize<'de> for AccessThreshold {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(v) if !v.is_nan() => Ok(AccessThreshold(v)),
            Raw::Num(_) => Err(serde::de::Error::custom("access threshold is NaN")),
            Raw::Text(t) => t.parse().map_err(serde::de::Error::custom),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RachConfig {
    pub xi_access: AccessThreshold,
    pub procedure: RachProcedure,
    pub t304_ms: u32,
    pub retry_ms: u32,
    /// Probability that a contention-based attempt collides. Off by default.
    pub cbra_collision_prob: f64,
}

impl Default for RachConfig {
    fn default() -> Self {
        Self {
            xi_access: AccessThreshold::NEG_INF,
            procedure: RachProcedure::ThreeGpp,
            t304_ms: 500,
            retry_ms: 10,
            cbra_collision_prob: 0.0,
        }
    }
}

impl RachConfig {
    pub fn validate(&self, dt_ms: u32) -> Result<()> {
        if self.t304_ms == 0 {
            return Err(Error::config("rach.t304_ms must be positive"));
        }
        if self.retry_ms < dt_ms {
            return Err(Error::config("rach.retry_ms must be at least one time step"));
        }
        if !(0.0..=1.0).contains(&self.cbra_collision_prob) {
            return Err(Error::config("rach.cbra_collision_prob must be in [0, 1]"));
        }
        Ok(())
    }
}

/// Outcome of access-beam selection.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AccessBeam {
    pub beam: usize,
    /// The beam holds a dedicated preamble in the prepared set.
    pub prepared: bool,
    /// Selected among prepared beams above the threshold (as opposed to the
    /// strongest-beam fallback).
    pub above_threshold: bool,
}

/// Pick the access beam from the target's L1 beam measurements: the strongest
/// prepared beam if any prepared beam exceeds `xi`, otherwise the strongest
/// beam overall. Ties go to the lowest beam index.
pub fn select_access_beam(l1_beams: &[f64], prepared: &[usize], xi: AccessThreshold) -> AccessBeam {
    let mut best_prepared: Option<usize> = None;
    for &b in prepared {
        if l1_beams[b] > xi.0 {
            best_prepared = match best_prepared {
                Some(cur) if l1_beams[cur] > l1_beams[b] || (l1_beams[cur] == l1_beams[b] && cur < b) => Some(cur),
                _ => Some(b),
            };
        }
    }
    if let Some(beam) = best_prepared {
        return AccessBeam {
            beam,
            prepared: true,
            above_threshold: true,
        };
    }
    let beam = crate::view::argmax(l1_beams);
    AccessBeam {
        beam,
        prepared: prepared.contains(&beam),
        above_threshold: false,
    }
}

pub fn select_preamble(selection: &AccessBeam, procedure: RachProcedure) -> PreambleKind {
    let cfra = match procedure {
        RachProcedure::ThreeGpp => selection.above_threshold,
        RachProcedure::Proposed => selection.prepared,
    };
    if cfra {
        PreambleKind::Cfra
    } else {
        PreambleKind::Cbra
    }
}

/// One preamble transmission: succeeds when the accessed beam's SINR is above
/// `gamma_out` and a contention-based attempt did not collide.
pub fn rach_attempt(target_sinr_db: f64, gamma_out_db: f64, kind: PreambleKind, collided: bool) -> bool {
    target_sinr_db > gamma_out_db && !(kind == PreambleKind::Cbra && collided)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum T304Status {
    Running,
    Expired,
}

/// Random access in progress toward one prepared target.
#[derive(Debug, Clone)]
pub struct RachProcess {
    pub target: PreparedTarget,
    pub start: Step,
    pub attempts: u32,
    t304_steps: u64,
    retry_steps: u64,
}

impl RachProcess {
    pub fn start(target: PreparedTarget, n: Step, cfg: &RachConfig, dt_ms: u32) -> Self {
        Self {
            target,
            start: n,
            attempts: 0,
            t304_steps: steps_for_ms(cfg.t304_ms, dt_ms),
            retry_steps: steps_for_ms(cfg.retry_ms, dt_ms).max(1),
        }
    }

    pub fn target_cell(&self) -> CellId {
        self.target.cell
    }

    pub fn elapsed(&self, n: Step) -> u64 {
        n - self.start
    }

    /// T304 runs from the first preamble; it expires once its full duration
    /// has elapsed without a successful attempt.
    pub fn t304_monitor(&self, n: Step) -> T304Status {
        if self.elapsed(n) >= self.t304_steps {
            T304Status::Expired
        } else {
            T304Status::Running
        }
    }

    pub fn attempt_due(&self, n: Step) -> bool {
        self.elapsed(n).is_multiple_of(self.retry_steps)
    }

    /// Upper bound on attempts before T304 expires.
    pub fn max_attempts(&self) -> u64 {
        self.t304_steps.div_ceil(self.retry_steps)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn strongest_prepared_above_threshold() {
        let l1 = [-85.0, -80.0, -70.0];
        let s = select_access_beam(&l1, &[0, 1], AccessThreshold(-90.0));
        assert_eq!(s, AccessBeam { beam: 1, prepared: true, above_threshold: true });
        assert_eq!(select_preamble(&s, RachProcedure::ThreeGpp), PreambleKind::Cfra);
        assert_eq!(select_preamble(&s, RachProcedure::Proposed), PreambleKind::Cfra);
    }

    #[test]
    fn neg_inf_always_selects_prepared() {
        let l1 = [-150.0, -60.0];
        let s = select_access_beam(&l1, &[0], AccessThreshold::NEG_INF);
        assert_eq!(s.beam, 0);
        assert!(s.prepared && s.above_threshold);
    }

    #[test]
    fn fallback_to_unprepared_strongest() {
        let l1 = [-95.0, -96.0, -99.0, -99.0, -99.0, -70.0];
        let s = select_access_beam(&l1, &[0, 1], AccessThreshold(-90.0));
        assert_eq!(s, AccessBeam { beam: 5, prepared: false, above_threshold: false });
        assert_eq!(select_preamble(&s, RachProcedure::ThreeGpp), PreambleKind::Cbra);
        assert_eq!(select_preamble(&s, RachProcedure::Proposed), PreambleKind::Cbra);
    }

    #[test]
    fn fallback_onto_prepared_beam_differs_by_procedure() {
        let l1 = [-95.0, -99.0];
        let s = select_access_beam(&l1, &[0], AccessThreshold(-90.0));
        assert_eq!(s, AccessBeam { beam: 0, prepared: true, above_threshold: false });
        assert_eq!(select_preamble(&s, RachProcedure::ThreeGpp), PreambleKind::Cbra);
        assert_eq!(select_preamble(&s, RachProcedure::Proposed), PreambleKind::Cfra);
    }

    #[test]
    fn pos_inf_is_always_cbra_under_standard_flow() {
        let l1 = [-40.0, -50.0];
        let s = select_access_beam(&l1, &[0, 1], AccessThreshold::POS_INF);
        assert!(!s.above_threshold);
        assert_eq!(select_preamble(&s, RachProcedure::ThreeGpp), PreambleKind::Cbra);
    }

    #[test]
    fn ties_break_to_lowest_index() {
        let l1 = [-80.0, -70.0, -70.0];
        assert_eq!(select_access_beam(&l1, &[2, 1], AccessThreshold(-90.0)).beam, 1);
        assert_eq!(select_access_beam(&l1, &[], AccessThreshold(-90.0)).beam, 1);
    }

    #[test]
    fn attempt_thresholds() {
        assert!(rach_attempt(-5.0, -8.0, PreambleKind::Cfra, false));
        assert!(!rach_attempt(-9.0, -8.0, PreambleKind::Cfra, false));
        assert!(!rach_attempt(10.0, -8.0, PreambleKind::Cbra, true));
        assert!(rach_attempt(10.0, -8.0, PreambleKind::Cfra, true));
    }

    #[test]
    fn t304_timing() {
        let target = PreparedTarget::new(CellId(1), vec![], 0);
        let p = RachProcess::start(target, 100, &RachConfig::default(), 10);
        assert_eq!(p.max_attempts(), 50);
        assert_eq!(p.t304_monitor(149), T304Status::Running);
        assert_eq!(p.t304_monitor(150), T304Status::Expired);
        let due = (100..150).filter(|&n| p.attempt_due(n)).count();
        assert_eq!(due, 50);
    }

    #[test]
    fn threshold_parsing() {
        assert_eq!("-inf".parse::<AccessThreshold>().unwrap(), AccessThreshold::NEG_INF);
        assert_eq!("+inf".parse::<AccessThreshold>().unwrap(), AccessThreshold::POS_INF);
        assert_eq!("-97.5".parse::<AccessThreshold>().unwrap(), AccessThreshold(-97.5));
        assert!("nan".parse::<AccessThreshold>().is_err());
        assert_eq!(AccessThreshold::POS_INF.to_string(), "+inf");
        assert_eq!(AccessThreshold(-110.0).to_string(), "-110");
    }

    proptest! {
        #[test]
        fn proposed_dominates_standard(
            l1 in proptest::collection::vec(-130.0f64..-50.0, 12),
            mask in 0u16..4096,
            xi in prop_oneof![Just(f64::NEG_INFINITY), Just(f64::INFINITY), -130.0f64..-50.0],
        ) {
            let prepared: Vec<usize> = (0..12).filter(|b| mask & (1 << b) != 0).collect();
            let s = select_access_beam(&l1, &prepared, AccessThreshold(xi));
            let std_kind = select_preamble(&s, RachProcedure::ThreeGpp);
            let prop_kind = select_preamble(&s, RachProcedure::Proposed);
            if std_kind == PreambleKind::Cfra {
                prop_assert_eq!(prop_kind, PreambleKind::Cfra);
            }
            if prop_kind == PreambleKind::Cfra {
                prop_assert!(prepared.contains(&s.beam));
            }
        }
    }
}
