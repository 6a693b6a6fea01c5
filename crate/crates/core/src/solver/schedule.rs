use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Step size dt(t) = clamp(ratio·t, dt_min, dt_max), further capped by the positivity
/// bound of the scheme when `monotone` is set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeSchedule {
    pub dt_min: f64,
    #[serde(default)]
    pub ratio: f64,
    #[serde(default)]
    pub dt_max: Option<f64>,
    #[serde(default = "yes")]
    pub monotone: bool,
}

fn yes() -> bool {
    true
}

impl TimeSchedule {
    pub fn fixed(dt: f64) -> Self {
        Self {
            dt_min: dt,
            ratio: 0.0,
            dt_max: None,
            monotone: true,
        }
    }

    pub fn geometric(dt_min: f64, ratio: f64) -> Self {
        Self {
            dt_min,
            ratio,
            dt_max: None,
            monotone: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = !(self.dt_min > 0.0)
            || !(self.ratio >= 0.0)
            || self.dt_max.is_some_and(|m| !(m >= self.dt_min));
        if bad {
            return Err(Error::Config(format!("invalid time schedule {self:?}")));
        }
        Ok(())
    }

    pub fn dt_max(&self) -> f64 {
        match (self.ratio > 0.0, self.dt_max) {
            (_, Some(m)) => m,
            (false, None) => self.dt_min,
            (true, None) => f64::INFINITY,
        }
    }

    /// Step at time t, before the positivity cap.
    pub fn dt(&self, t: f64) -> f64 {
        (self.ratio * t).clamp(self.dt_min, self.dt_max().max(self.dt_min))
    }

    pub(crate) fn capped(&self, t: f64, positivity: f64) -> f64 {
        let dt = self.dt(t);
        if self.monotone {
            dt.min(positivity)
        } else {
            dt
        }
    }
}

impl Default for TimeSchedule {
    fn default() -> Self {
        Self::geometric(1e-6, 0.02)
    }
}
