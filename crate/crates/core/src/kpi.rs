//! Run-level KPIs: CBRA ratio and failure rates per UE and minute.

use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct KpiCounters {
    pub n_cbra: u64,
    pub n_cfra: u64,
    pub n_hof: u64,
    pub n_rlf: u64,
    pub ue_count: u64,
    /// Observed (post warm-up) duration in minutes.
    pub duration_min: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FailureRates {
    pub hof_per_ue_min: f64,
    pub rlf_per_ue_min: f64,
    pub total_per_ue_min: f64,
}

impl KpiCounters {
    pub fn new(ue_count: u64, duration_min: f64) -> Self {
        Self {
            ue_count,
            duration_min,
            ..Default::default()
        }
    }

    pub fn accesses(&self) -> u64 {
        self.n_cbra + self.n_cfra
    }

    /// Percentage of successful random accesses that used a contention-based preamble.
    pub fn r_cbra(&self) -> Result<f64> {
        let total = self.accesses();
        if total == 0 {
            return Err(Error::NoAccessEvents);
        }
        Ok(100.0 * self.n_cbra as f64 / total as f64)
    }

    pub fn ue_minutes(&self) -> f64 {
        self.ue_count as f64 * self.duration_min
    }

    pub fn normalized_failures(&self) -> FailureRates {
        let exposure = self.ue_minutes();
        let hof = self.n_hof as f64 / exposure;
        let rlf = self.n_rlf as f64 / exposure;
        FailureRates {
            hof_per_ue_min: hof,
            rlf_per_ue_min: rlf,
            total_per_ue_min: hof + rlf,
        }
    }

    /// Combine counters from shards of a run (e.g. disjoint UE subsets).
    /// Counts and UE-minutes add up.
    pub fn merge(&self, other: &KpiCounters) -> KpiCounters {
        let ue_count = self.ue_count + other.ue_count;
        let exposure = self.ue_minutes() + other.ue_minutes();
        KpiCounters {
            n_cbra: self.n_cbra + other.n_cbra,
            n_cfra: self.n_cfra + other.n_cfra,
            n_hof: self.n_hof + other.n_hof,
            n_rlf: self.n_rlf + other.n_rlf,
            ue_count,
            duration_min: if ue_count == 0 { 0.0 } else { exposure / ue_count as f64 },
        }
    }
}
