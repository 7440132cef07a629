use crate::ids::{steps_for_ms, Step};

/// Time-to-trigger: fires once a condition has held at every step for the
/// configured duration. Any false evaluation resets it, and so does firing.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TttTracker {
    entered: Option<Step>,
    required_steps: u64,
}

impl TttTracker {
    pub fn new(duration_ms: u32, dt_ms: u32) -> Self {
        Self {
            entered: None,
            required_steps: steps_for_ms(duration_ms, dt_ms),
        }
    }

    pub fn required_steps(&self) -> u64 {
        self.required_steps
    }

    pub fn entered(&self) -> Option<Step> {
        self.entered
    }

    pub fn reset(&mut self) {
        self.entered = None;
    }

    /// Evaluate the condition at step `n`; returns true when it fires.
    pub fn update(&mut self, n: Step, condition: bool) -> bool {
        if !condition {
            self.entered = None;
            return false;
        }
        let since = *self.entered.get_or_insert(n);
        if n - since >= self.required_steps {
            self.entered = None;
            true
        } else {
            false
        }
    }
}
