//! Waveguide coupling spectrum, loss rate, circuit-element mapping and mode
//! discretization.
//!
//! The squared coupling density is `xi0^2 w / (1 + (w/wc)^2)` and the bare
//! resonator loss rate is `kappa = 2 pi xi0^2 w_r / (1 + (w_r/wc)^2)`, both in
//! angular units. Circuit elements are in SI units.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::rabi::Coupling;
use crate::units::Units;

/// Continuum spectrum parameters, internal units.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpectrumParams {
    pub xi0: f64,
    /// May be infinite (no cutoff).
    pub omega_cutoff: f64,
    pub rw_coupling: Coupling,
}

impl SpectrumParams {
    pub fn new(xi0: f64, omega_cutoff: f64, rw_coupling: Coupling) -> Result<Self> {
        if !(xi0 >= 0.0 && xi0.is_finite()) {
            return Err(Error::Domain(format!("xi0 must be non-negative, got {xi0}")));
        }
        if !(omega_cutoff > 0.0) {
            return Err(Error::Domain(format!("cutoff must be positive, got {omega_cutoff}")));
        }
        Ok(Self {
            xi0,
            omega_cutoff,
            rw_coupling,
        })
    }

    /// Squared coupling density `xi0^2 w / (1 + (w/wc)^2)`.
    pub fn density(&self, omega: f64) -> f64 {
        self.xi0 * self.xi0 * omega / (1.0 + (omega / self.omega_cutoff).powi(2))
    }

    pub fn kappa(&self, omega_r: f64) -> f64 {
        kappa(self.xi0, self.omega_cutoff, omega_r)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Mode {
    pub omega: f64,
    pub xi: f64,
    /// Fock truncation used when the mode enters a diagonalization.
    pub dim: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EnvSpectrum {
    pub params: SpectrumParams,
    pub modes: Vec<Mode>,
}

impl EnvSpectrum {
    /// Continuum-only spectrum (no discrete modes).
    pub fn continuum(params: SpectrumParams) -> Self {
        Self {
            params,
            modes: Vec::new(),
        }
    }

    pub fn xi0(&self) -> f64 {
        self.params.xi0
    }

    pub fn omega_cutoff(&self) -> f64 {
        self.params.omega_cutoff
    }

    pub fn rw_coupling(&self) -> Coupling {
        self.params.rw_coupling
    }
}

/// Bare resonator loss rate (angular).
pub fn kappa(xi0: f64, omega_cutoff: f64, omega_r: f64) -> f64 {
    2.0 * PI * xi0 * xi0 * omega_r / (1.0 + (omega_r / omega_cutoff).powi(2))
}

/// Inverse of [`kappa`] in `xi0`.
pub fn xi0_from_kappa(kappa: f64, omega_cutoff: f64, omega_r: f64) -> Result<f64> {
    if !(kappa >= 0.0 && kappa.is_finite()) {
        return Err(Error::Domain(format!("kappa must be non-negative, got {kappa}")));
    }
    Ok((kappa * (1.0 + (omega_r / omega_cutoff).powi(2)) / (2.0 * PI * omega_r)).sqrt())
}

/// The element coupling resonator and waveguide, SI units.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum CouplingElement {
    /// Coupling inductance in henry.
    Inductor(f64),
    /// Coupling capacitance in farad.
    Capacitor(f64),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CircuitParams {
    /// Resonator characteristic impedance (ohm).
    pub z_r: f64,
    /// Waveguide characteristic impedance (ohm).
    pub z_t: f64,
    /// Resonator capacitance (farad); derived from `z_r` and `omega_r` when absent.
    pub c_r: Option<f64>,
    pub element: CouplingElement,
}

impl CircuitParams {
    pub fn rw_coupling(&self) -> Coupling {
        match self.element {
            CouplingElement::Inductor(_) => Coupling::Inductive,
            CouplingElement::Capacitor(_) => Coupling::Capacitive,
        }
    }

    fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::Domain(format!("{name} must be positive, got {v}")))
            }
        };
        positive("Z_R", self.z_r)?;
        positive("Z_T", self.z_t)?;
        if let Some(c) = self.c_r {
            positive("C_R", c)?;
        }
        match self.element {
            CouplingElement::Inductor(l) => positive("L_c", l),
            CouplingElement::Capacitor(c) => positive("C_c", c),
        }
    }

    pub fn resonator_capacitance(&self, units: &Units) -> f64 {
        self.c_r.unwrap_or_else(|| 1.0 / (self.z_r * units.omega_r_si()))
    }
}

/// Series combination `C_c C_R / (C_c + C_R)`.
fn series(c_c: f64, c_r: f64) -> f64 {
    c_c * c_r / (c_c + c_r)
}

/// Spectrum parameters (`xi0`, `omega_cutoff`) of a circuit.
pub fn circuit_to_spectrum(circ: &CircuitParams, units: &Units) -> Result<SpectrumParams> {
    circ.validate()?;
    let (xi0, cutoff_si) = match circ.element {
        CouplingElement::Inductor(l_c) => ((circ.z_r / (2.0 * PI * circ.z_t)).sqrt(), circ.z_t / l_c),
        CouplingElement::Capacitor(c_c) => {
            let c_r = circ.resonator_capacitance(units);
            let c_p = series(c_c, c_r);
            (
                (circ.z_t * c_p * c_p / (2.0 * PI * circ.z_r * c_r * c_r)).sqrt(),
                1.0 / (circ.z_t * c_p),
            )
        }
    };
    SpectrumParams::new(xi0, units.from_rad_per_s(cutoff_si), circ.rw_coupling())
}

/// The coupling element that gives loss rate `kappa` (internal units) for the
/// given impedances and resonator capacitance (`1/(Z_R omega_r)` when `None`).
/// Both mappings are monotone, so the solution is unique when it exists.
pub fn element_for_kappa(
    kappa_int: f64,
    z_r: f64,
    z_t: f64,
    c_r: Option<f64>,
    coupling: Coupling,
    units: &Units,
) -> Result<CircuitParams> {
    if !(kappa_int > 0.0 && kappa_int.is_finite()) {
        return Err(Error::Domain(format!("kappa must be positive to fix a coupling element, got {kappa_int}")));
    }
    let omega_r = units.omega_r_si();
    let element = match coupling {
        Coupling::Inductive => {
            // (w_r / wc)^2 = 2 pi xi0^2 / kappa - 1 with xi0^2 = Z_R / (2 pi Z_T)
            let ratio2 = z_r / z_t / kappa_int - 1.0;
            if ratio2 <= 0.0 {
                return Err(Error::Domain(format!(
                    "kappa exceeds the inductive maximum {} (internal units)",
                    z_r / z_t
                )));
            }
            let cutoff = omega_r / ratio2.sqrt();
            CouplingElement::Inductor(z_t / cutoff)
        }
        Coupling::Capacitive => {
            // with v = Z_T C' w_r:  kappa = K v^2 / (1 + v^2),  K = 1 / (Z_R Z_T C_R^2 w_r^2)
            let c_r = c_r.unwrap_or(1.0 / (z_r * omega_r));
            let k_max = 1.0 / (z_r * z_t * (c_r * omega_r).powi(2));
            let q = kappa_int / k_max;
            if q >= 1.0 {
                return Err(Error::Domain(format!(
                    "kappa exceeds the capacitive maximum {k_max} (internal units)"
                )));
            }
            let c_series = (q / (1.0 - q)).sqrt() / (z_t * omega_r);
            if c_series >= c_r {
                return Err(Error::Domain("kappa not reachable with a finite coupling capacitance".into()));
            }
            CouplingElement::Capacitor(c_series * c_r / (c_r - c_series))
        }
    };
    Ok(CircuitParams { z_r, z_t, c_r, element })
}

/// Discrete modes with `xi_k^2 = density(w_k) * spacing`.
pub fn discretize_modes(params: SpectrumParams, freqs: &[f64], spacing: f64, dims: &[usize]) -> Result<EnvSpectrum> {
    if dims.len() != freqs.len() {
        return Err(Error::Domain(format!(
            "{} mode frequencies but {} mode dimensions",
            freqs.len(),
            dims.len()
        )));
    }
    if !(spacing > 0.0 && spacing.is_finite()) {
        return Err(Error::Domain(format!("mode spacing must be positive, got {spacing}")));
    }
    for (k, &w) in freqs.iter().enumerate() {
        if !(w > 0.0 && w.is_finite()) {
            return Err(Error::Domain(format!("mode frequency must be positive, got {w}")));
        }
        if k > 0 && w <= freqs[k - 1] {
            return Err(Error::Domain("mode frequencies must be strictly increasing".into()));
        }
    }
    let modes = freqs
        .iter()
        .zip(dims)
        .map(|(&omega, &dim)| Mode {
            omega,
            xi: (params.density(omega) * spacing).sqrt(),
            dim,
        })
        .collect();
    Ok(EnvSpectrum { params, modes })
}

/// Spacing of an evenly spaced grid (the first gap), or the single frequency
/// itself when there is only one mode.
pub fn default_spacing(freqs: &[f64]) -> Option<f64> {
    match freqs {
        [] => None,
        [w] => Some(*w),
        [a, b, ..] => Some(b - a),
    }
}

/// Spin-boson spectral density `16 pi Re[alpha]^2 xi0^2 w / (1 + (w/wc)^2)`.
pub fn spin_boson_j(alpha: Complex64, xi0: f64, omega_cutoff: f64, omega: f64) -> f64 {
    16.0 * PI * alpha.re * alpha.re * xi0 * xi0 * omega / (1.0 + (omega / omega_cutoff).powi(2))
}
