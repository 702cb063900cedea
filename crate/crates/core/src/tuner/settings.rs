use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::signal::TimeGrid;

/// Canceller settings: reference-arm power ratio, reference-arm delay and an
/// optional RF phase shift applied to the received signal at the remote unit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SicSettings {
    pub alpha: f64,
    /// Seconds.
    pub tau2: f64,
    /// Radians; `None` leaves the received signal untouched.
    pub rf_phase_comp: Option<f64>,
}

impl SicSettings {
    pub fn new(alpha: f64, tau2: f64) -> Self {
        Self {
            alpha,
            tau2,
            rf_phase_comp: None,
        }
    }

    /// Reference arm dark: the BPD sees only the uplink signal.
    pub fn disabled() -> Self {
        Self::new(0.0, 0.0)
    }

    pub fn with_phase_comp(mut self, phase: f64) -> Self {
        self.rf_phase_comp = Some(phase);
        self
    }

    pub fn validate(&self, grid: &TimeGrid) -> Result<()> {
        if self.alpha > 1.0 {
            return Err(Error::GainNotAllowed(self.alpha));
        }
        if !(self.alpha >= 0.0) {
            return Err(Error::validation("alpha", "must lie in [0, 1]"));
        }
        let max = grid.duration() / 4.0;
        if !(self.tau2 >= 0.0 && self.tau2 < max) {
            return Err(Error::DelayRange {
                delay: self.tau2,
                max,
            });
        }
        if let Some(p) = self.rf_phase_comp {
            if !p.is_finite() {
                return Err(Error::validation("rf_phase_comp", "must be finite"));
            }
        }
        Ok(())
    }
}
