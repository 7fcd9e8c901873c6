//! Per-user parameters and the downlink power budget.

use crate::error::{Error, Result};

/// One end-user as seen by the base station.
///
/// Channel gain and noise power are folded into `quality` (gain over noise);
/// they are never stored separately.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UserProfile {
    pub id: usize,
    /// Valuation of one bit, in price units.
    pub valuation: f64,
    /// Channel quality h/N.
    pub quality: f64,
    /// Demanded throughput in bits/s (unit bandwidth).
    pub demand: f64,
}

fn positive(id: usize, field: &'static str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidUser { id, field, value })
    }
}

impl UserProfile {
    pub fn new(id: usize, valuation: f64, quality: f64, demand: f64) -> Result<Self> {
        let user = Self {
            id,
            valuation,
            quality,
            demand,
        };
        user.validate()?;
        Ok(user)
    }

    pub fn validate(&self) -> Result<()> {
        positive(self.id, "valuation", self.valuation)?;
        positive(self.id, "quality", self.quality)?;
        positive(self.id, "demand", self.demand)
    }
}

/// Total downlink power. All power quantities are expressed in the same unit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Budget(f64);

impl Budget {
    pub fn new(phi: f64) -> Result<Self> {
        if phi.is_finite() && phi > 0.0 {
            Ok(Self(phi))
        } else {
            Err(Error::InvalidBudget(phi))
        }
    }

    pub fn phi(self) -> f64 {
        self.0
    }
}

impl Default for Budget {
    fn default() -> Self {
        Self(1.0)
    }
}
