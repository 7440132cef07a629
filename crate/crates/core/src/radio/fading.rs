//! Correlated Gaussian processes for shadowing and fast fading (both in dB).

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ShadowingConfig {
    pub enabled: bool,
    pub sigma_los_db: f64,
    pub sigma_nlos_db: f64,
    pub decorrelation_m: f64,
}

impl Default for ShadowingConfig {
    fn default() -> Self {
        Self {
            enabled: true,
            sigma_los_db: 4.0,
            sigma_nlos_db: 7.82,
            decorrelation_m: 10.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FadingConfig {
    pub enabled: bool,
    pub sigma_db: f64,
    pub coherence_ms: f64,
}

impl Default for FadingConfig {
    fn default() -> Self {
        Self {
            enabled: true,
            sigma_db: 4.0,
            coherence_ms: 150.0,
        }
    }
}

/// Advance a unit-variance AR(1) state with correlation `rho` to the next sample.
#[inline]
pub fn ar1_next(state: f64, rho: f64, innovation: f64) -> f64 {
    rho * state + (1.0 - rho * rho).sqrt() * innovation
}

/// A bank of independent unit-variance AR(1) processes sharing one correlation.
#[derive(Debug, Clone)]
pub struct Ar1Bank {
    state: Vec<f64>,
}

impl Ar1Bank {
    /// Draws the initial states from the stationary distribution.
    pub fn new<R: Rng>(len: usize, rng: &mut R) -> Self {
        Self {
            state: (0..len).map(|_| rng.sample(StandardNormal)).collect(),
        }
    }

    pub fn zeros(len: usize) -> Self {
        Self {
            state: vec![0.0; len],
        }
    }

    /// Advance every process once. Always consumes exactly `len` normal draws,
    /// so the stream position does not depend on `rho`.
    pub fn advance<R: Rng>(&mut self, rho: f64, rng: &mut R) {
        for s in &mut self.state {
            let z: f64 = rng.sample(StandardNormal);
            *s = ar1_next(*s, rho, z);
        }
    }

    #[inline]
    pub fn get(&self, i: usize) -> f64 {
        self.state[i]
    }

    pub fn len(&self) -> usize {
        self.state.len()
    }

    pub fn is_empty(&self) -> bool {
        self.state.is_empty()
    }
}

/// Correlation between two shadowing samples `moved_m` meters apart.
pub fn distance_correlation(moved_m: f64, decorrelation_m: f64) -> f64 {
    (-moved_m / decorrelation_m).exp()
}

/// Correlation between two fading samples `dt_ms` apart.
pub fn time_correlation(dt_ms: f64, coherence_ms: f64) -> f64 {
    (-dt_ms / coherence_ms).exp()
}
