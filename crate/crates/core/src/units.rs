//! Conversion between laboratory units and the internal angular units.
//!
//! Laboratory frequencies are ordinary frequencies (`omega / 2 pi`) in GHz or MHz.
//! Internally every frequency is angular and divided by the resonator's angular
//! frequency, so `omega_r = 1`. Since both sides carry the same `2 pi`, an
//! ordinary frequency `f` maps to `f / f_r`.

use std::f64::consts::PI;

use crate::error::{Error, Result};

pub const NANO: f64 = 1e-9;
pub const FEMTO: f64 = 1e-15;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Units {
    f_r_ghz: f64,
}

impl Units {
    pub fn new(f_r_ghz: f64) -> Result<Self> {
        if !(f_r_ghz > 0.0 && f_r_ghz.is_finite()) {
            return Err(Error::Domain(format!("resonator frequency must be positive, got {f_r_ghz}")));
        }
        Ok(Self { f_r_ghz })
    }

    pub fn resonator_ghz(&self) -> f64 {
        self.f_r_ghz
    }

    pub fn from_ghz(&self, f_ghz: f64) -> f64 {
        f_ghz / self.f_r_ghz
    }

    pub fn to_ghz(&self, omega: f64) -> f64 {
        omega * self.f_r_ghz
    }

    pub fn from_mhz(&self, f_mhz: f64) -> f64 {
        f_mhz * 1e-3 / self.f_r_ghz
    }

    pub fn to_mhz(&self, omega: f64) -> f64 {
        omega * self.f_r_ghz * 1e3
    }

    /// Resonator angular frequency in rad/s.
    pub fn omega_r_si(&self) -> f64 {
        2.0 * PI * self.f_r_ghz * 1e9
    }

    /// An SI angular frequency (rad/s) in internal units.
    pub fn from_rad_per_s(&self, omega: f64) -> f64 {
        omega / self.omega_r_si()
    }

    pub fn to_rad_per_s(&self, omega: f64) -> f64 {
        omega * self.omega_r_si()
    }
}
