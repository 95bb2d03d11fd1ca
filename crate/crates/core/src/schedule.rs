//! Temperature schedules for the annealed chain.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Floor applied to adaptively chosen temperatures so every emitted value
/// stays strictly positive even from a zero-slack state.
pub const ADAPTIVE_TEMP_FLOOR: f64 = 1e-15;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TemperatureSchedule {
    /// `T(n) = t0 * (1 / l^4)^(n / l) / grid` at sweep `n` (0-based), where
    /// `l` is the sweep budget and `grid` the discretization size.
    Geometric { t0: f64, l: u32, grid: u32 },
    /// Every sweep re-targets `eta` times the current critical temperature,
    /// clamped to be nonincreasing. `last` carries the clamp state.
    Adaptive {
        eta: f64,
        #[serde(default)]
        last: Option<f64>,
    },
    Constant { t: f64 },
    /// Epoch-level decay used by the NMF trainer: `current` is multiplied by
    /// `factor` once per epoch.
    EpochDecay { t0: f64, factor: f64, current: f64 },
}

impl TemperatureSchedule {
    pub fn geometric(t0: f64, l: u32, grid: u32) -> Result<Self> {
        if t0 <= 0.0 || l == 0 || grid == 0 {
            return Err(Error::InvalidParameter(format!(
                "geometric schedule needs t0 > 0, l >= 1, grid >= 1 (got {t0}, {l}, {grid})"
            )));
        }
        Ok(TemperatureSchedule::Geometric { t0, l, grid })
    }

    pub fn adaptive(eta: f64) -> Result<Self> {
        if !(0.1..=0.9).contains(&eta) {
            return Err(Error::InvalidParameter(format!("eta {eta} outside [0.1, 0.9]")));
        }
        Ok(TemperatureSchedule::Adaptive { eta, last: None })
    }

    pub fn constant(t: f64) -> Result<Self> {
        if t <= 0.0 || !t.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "constant temperature {t} must be positive"
            )));
        }
        Ok(TemperatureSchedule::Constant { t })
    }

    /// Closed-form geometric temperature at sweep `n`.
    pub fn geometric_temperature(t0: f64, l: u32, grid: u32, sweep: u64) -> f64 {
        let l = l as f64;
        t0 * (1.0 / l.powi(4)).powf(sweep as f64 / l) / grid as f64
    }
}
