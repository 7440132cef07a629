//! Radio link failure detection on the serving link and re-establishment.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ids::{steps_for_ms, CellId, Step};
use crate::view::LinkView;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RlfConfig {
    /// Out-of-sync SINR threshold, dB.
    pub gamma_out_db: f64,
    /// Recovery SINR threshold, dB; must exceed `gamma_out_db`.
    pub gamma_in_db: f64,
    pub t310_ms: u32,
    pub reestablish_delay_ms: u32,
}

impl Default for RlfConfig {
    fn default() -> Self {
        Self {
            gamma_out_db: -8.0,
            gamma_in_db: -6.0,
            t310_ms: 600,
            reestablish_delay_ms: 100,
        }
    }
}

impl RlfConfig {
    pub fn validate(&self) -> Result<()> {
        if self.gamma_in_db <= self.gamma_out_db {
            return Err(Error::config("rlf.gamma_in_db must be above rlf.gamma_out_db"));
        }
        if self.t310_ms == 0 {
            return Err(Error::config("rlf.t310_ms must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum FailureCause {
    Rlf,
    Hof,
}

impl fmt::Display for FailureCause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FailureCause::Rlf => "RLF",
            FailureCause::Hof => "HOF",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RlfEvent {
    None,
    Started,
    Recovered,
    Rlf,
}

/// T310 with out-of-sync / in-sync hysteresis.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RlfMonitor {
    running_since: Option<Step>,
    t310_steps: u64,
}

impl RlfMonitor {
    pub fn new(cfg: &RlfConfig, dt_ms: u32) -> Self {
        Self {
            running_since: None,
            t310_steps: steps_for_ms(cfg.t310_ms, dt_ms),
        }
    }

    pub fn is_running(&self) -> bool {
        self.running_since.is_some()
    }

    pub fn reset(&mut self) {
        self.running_since = None;
    }

    /// Feed the serving-link SINR at step `n`.
    pub fn rlf_step(&mut self, cfg: &RlfConfig, sinr_db: f64, n: Step) -> RlfEvent {
        match self.running_since {
            None if sinr_db < cfg.gamma_out_db => {
                self.running_since = Some(n);
                RlfEvent::Started
            }
            None => RlfEvent::None,
            Some(_) if sinr_db > cfg.gamma_in_db => {
                self.running_since = None;
                RlfEvent::Recovered
            }
            Some(start) if n - start >= self.t310_steps => {
                self.running_since = None;
                RlfEvent::Rlf
            }
            Some(_) => RlfEvent::None,
        }
    }
}

/// Cell chosen for connection re-establishment: the strongest L3 cell quality.
pub fn reestablishment_cell(view: &dyn LinkView) -> CellId {
    view.strongest_cell()
}
