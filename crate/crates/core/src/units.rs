//! Unit conventions.
//!
//! Internally `c = ħ = h_s = 1`: lengths are measured in slab thicknesses,
//! frequencies in `c/h_s`, velocities in `c`. A dimensionless force per unit
//! area `F̂` corresponds to `F/A₀ = F̂ · ħc / h_s⁴` in SI.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Reduced Planck constant, J·s (CODATA 2018, exact).
pub const HBAR: f64 = 1.054_571_817e-34;
/// Speed of light in vacuum, m/s (exact).
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Human-readable statement of the force normalization, echoed in output headers.
pub const FORCE_CONVENTION: &str = "F_hat = (F/A0) * h_s^4 / (hbar*c)";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Units {
    /// The unit of length `h_s`, in meters.
    pub h_s_meters: f64,
}

impl Units {
    pub fn new(h_s_meters: f64) -> Result<Self> {
        if !(h_s_meters.is_finite() && h_s_meters > 0.0) {
            return Err(Error::InvalidInput(format!(
                "h_s_meters must be positive, got {h_s_meters}"
            )));
        }
        Ok(Self { h_s_meters })
    }

    /// `ħc / h_s⁴` in N/m²: the SI value of a unit dimensionless force per area.
    pub fn force_scale(&self) -> f64 {
        HBAR * SPEED_OF_LIGHT / self.h_s_meters.powi(4)
    }

    /// Converts a dimensionless force per area to N/m².
    pub fn force_to_si(&self, f_hat: f64) -> f64 {
        f_hat * self.force_scale()
    }

    /// Converts a force per area in N/m² to the dimensionless convention.
    pub fn force_from_si(&self, f_si: f64) -> f64 {
        f_si / self.force_scale()
    }

    /// Converts a frequency in `c/h_s` to rad/s.
    pub fn frequency_to_si(&self, omega: f64) -> f64 {
        omega * SPEED_OF_LIGHT / self.h_s_meters
    }
}

impl Default for Units {
    fn default() -> Self {
        Self { h_s_meters: 1e-6 }
    }
}
