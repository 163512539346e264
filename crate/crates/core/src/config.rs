//! Run configuration: a TOML document in laboratory units.
//!
//! ```toml
//! backend = "both"            # cvs | diag | both
//!
//! [model]
//! omega_r_ghz = 6.0
//! delta_ghz = 1.2
//! g_ghz = 6.0
//! qr_coupling = "inductive"
//!
//! [environment]
//! rw_coupling = "inductive"
//! kappa_mhz = 10.0            # with omega_cutoff_ghz, or with Z_R_ohm + Z_T_ohm
//! Z_R_ohm = 30.0
//! Z_T_ohm = 50.0
//!
//! [sweep]
//! variable = "kappa"          # kappa (MHz) | g (GHz)
//! start = 1.0
//! stop = 100.0
//! points = 50
//! log = true
//! ```
//!
//! The environment takes exactly one of three forms: `kappa_mhz` +
//! `omega_cutoff_ghz`; `kappa_mhz` + `Z_R_ohm` + `Z_T_ohm` (the coupling element
//! is solved for); or `Z_R_ohm` + `Z_T_ohm` + `L_c_nH` (inductive) / `C_c_fF`
//! (capacitive).

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::cvs::FMode;
use crate::diag::TruncationSpec;
use crate::environment::{
    circuit_to_spectrum, default_spacing, discretize_modes, element_for_kappa, xi0_from_kappa, CircuitParams,
    CouplingElement, EnvSpectrum, SpectrumParams,
};
use crate::error::{Error, Result};
use crate::rabi::{Coupling, ModelParams};
use crate::units::{Units, FEMTO, NANO};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Backend {
    Cvs,
    Diag,
    #[default]
    Both,
}

impl Backend {
    pub fn as_str(self) -> &'static str {
        match self {
            Backend::Cvs => "cvs",
            Backend::Diag => "diag",
            Backend::Both => "both",
        }
    }

    /// The concrete backends to run, in output order.
    pub fn expand(self) -> &'static [Backend] {
        match self {
            Backend::Cvs => &[Backend::Cvs],
            Backend::Diag => &[Backend::Diag],
            Backend::Both => &[Backend::Cvs, Backend::Diag],
        }
    }
}

impl fmt::Display for Backend {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Backend {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "cvs" => Ok(Backend::Cvs),
            "diag" => Ok(Backend::Diag),
            "both" => Ok(Backend::Both),
            other => Err(Error::Domain(format!("unknown backend `{other}` (expected cvs, diag or both)"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    pub omega_r_ghz: f64,
    pub delta_ghz: f64,
    /// May be omitted when the sweep runs over g.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub g_ghz: Option<f64>,
    pub qr_coupling: Coupling,
    /// Resonator truncation for CVS states; defaults to one sized for `|alpha|`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub resonator_dim: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnvironmentSection {
    pub rw_coupling: Coupling,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kappa_mhz: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega_cutoff_ghz: Option<f64>,
    #[serde(rename = "Z_R_ohm", default, skip_serializing_if = "Option::is_none")]
    pub z_r_ohm: Option<f64>,
    #[serde(rename = "Z_T_ohm", default, skip_serializing_if = "Option::is_none")]
    pub z_t_ohm: Option<f64>,
    #[serde(rename = "L_c_nH", default, skip_serializing_if = "Option::is_none")]
    pub l_c_nh: Option<f64>,
    #[serde(rename = "C_c_fF", default, skip_serializing_if = "Option::is_none")]
    pub c_c_ff: Option<f64>,
    /// Resonator capacitance; `1/(Z_R omega_r)` when absent.
    #[serde(rename = "C_R_fF", default, skip_serializing_if = "Option::is_none")]
    pub c_r_ff: Option<f64>,
    #[serde(default = "default_f_mode")]
    pub f_mode: FMode,
}

fn default_f_mode() -> FMode {
    FMode::ContinuumQuadrature
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TruncationSection {
    #[serde(default = "default_resonator_dim")]
    pub resonator_dim: usize,
    #[serde(default = "default_mode_freqs")]
    pub mode_freqs_ghz: Vec<f64>,
    #[serde(default = "default_mode_dims")]
    pub mode_dims: Vec<usize>,
    /// Frequency width each mode represents; the first grid gap when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mode_spacing_ghz: Option<f64>,
}

fn default_resonator_dim() -> usize {
    14
}

fn default_mode_freqs() -> Vec<f64> {
    vec![5.0, 10.0, 15.0, 20.0]
}

fn default_mode_dims() -> Vec<usize> {
    vec![3; 4]
}

impl Default for TruncationSection {
    fn default() -> Self {
        Self {
            resonator_dim: default_resonator_dim(),
            mode_freqs_ghz: default_mode_freqs(),
            mode_dims: default_mode_dims(),
            mode_spacing_ghz: None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepVariable {
    /// Loss rate in MHz.
    Kappa,
    /// Qubit-resonator coupling in GHz.
    G,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub variable: SweepVariable,
    pub start: f64,
    pub stop: f64,
    pub points: usize,
    #[serde(default)]
    pub log: bool,
}

impl SweepSection {
    pub fn values(&self) -> Vec<f64> {
        if self.points == 1 {
            return vec![self.start];
        }
        let last = (self.points - 1) as f64;
        (0..self.points)
            .map(|k| {
                let t = k as f64 / last;
                if self.log {
                    (self.start.ln() + t * (self.stop.ln() - self.start.ln())).exp()
                } else {
                    self.start + t * (self.stop - self.start)
                }
            })
            .collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Observable {
    #[serde(rename = "n_virtual")]
    NVirtual,
    #[serde(rename = "purity")]
    Purity,
    #[serde(rename = "coherence_C")]
    CoherenceC,
    #[serde(rename = "energy")]
    Energy,
    #[serde(rename = "mp")]
    Mp,
    #[serde(rename = "fractions")]
    Fractions,
}

impl Observable {
    pub const ALL: [Observable; 6] = [
        Observable::NVirtual,
        Observable::Purity,
        Observable::CoherenceC,
        Observable::Energy,
        Observable::Mp,
        Observable::Fractions,
    ];
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    #[serde(default = "all_observables")]
    pub observables: Vec<Observable>,
    /// Fill `wall_time_ms`; off by default so reruns are byte-identical.
    #[serde(default)]
    pub record_timing: bool,
}

fn all_observables() -> Vec<Observable> {
    Observable::ALL.to_vec()
}

impl Default for OutputSection {
    fn default() -> Self {
        Self {
            observables: all_observables(),
            record_timing: false,
        }
    }
}

impl OutputSection {
    pub fn wants(&self, o: Observable) -> bool {
        self.observables.contains(&o)
    }
}

/// Post-measurement Wigner function of the qubit-conditioned resonator state.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WignerSection {
    #[serde(default = "half_pi")]
    pub theta: f64,
    #[serde(default)]
    pub phi: f64,
    /// +1 selects the odd cat (negative at the origin) for the ground state.
    #[serde(default = "plus_one")]
    pub outcome: i8,
    #[serde(default = "default_wigner_points")]
    pub points: usize,
    /// Half width of the square grid; `|alpha| + 3` when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub half_width: Option<f64>,
}

fn half_pi() -> f64 {
    std::f64::consts::FRAC_PI_2
}

fn plus_one() -> i8 {
    1
}

fn default_wigner_points() -> usize {
    201
}

impl Default for WignerSection {
    fn default() -> Self {
        Self {
            theta: half_pi(),
            phi: 0.0,
            outcome: plus_one(),
            points: default_wigner_points(),
            half_width: None,
        }
    }
}

/// Range of coupling elements (nH or fF, by `rw_coupling`) for the circuit table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CircuitSection {
    pub start: f64,
    pub stop: f64,
    pub points: usize,
    #[serde(default)]
    pub log: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub backend: Backend,
    pub model: ModelSection,
    pub environment: EnvironmentSection,
    #[serde(default)]
    pub truncation: TruncationSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSection>,
    #[serde(default)]
    pub output: OutputSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wigner: Option<WignerSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub circuit: Option<CircuitSection>,
}

/// How the environment is specified.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum EnvForm {
    KappaCutoff,
    KappaImpedance,
    Circuit,
}

/// One sweep point in laboratory units.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Point {
    pub g_ghz: f64,
    /// `None` for circuit-element environments, where kappa is derived.
    pub kappa_mhz: Option<f64>,
}

/// Parses and validates a configuration document.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let cfg: RunConfig = toml::from_str(text).map_err(|e| {
        let line = e.span().map(|s| line_of_offset(text, s.start));
        Error::config(line, e.message().to_string())
    })?;
    cfg.validate_with(Some(text))?;
    Ok(cfg)
}

pub fn serialize_config(cfg: &RunConfig) -> Result<String> {
    toml::to_string(cfg).map_err(|e| Error::config(None, format!("cannot serialize configuration: {e}")))
}

fn line_of_offset(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}

/// Line of `key = ...` inside `[section]`, for error messages.
fn key_line(text: Option<&str>, section: &str, key: &str) -> Option<usize> {
    let text = text?;
    let mut current = String::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
            current = name.trim().to_string();
            continue;
        }
        if current == section {
            if let Some((k, _)) = line.split_once('=') {
                if k.trim() == key {
                    return Some(i + 1);
                }
            }
        }
    }
    None
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        self.validate_with(None)
    }

    fn validate_with(&self, text: Option<&str>) -> Result<()> {
        let err = |section: &str, key: &str, msg: String| Error::config(key_line(text, section, key), msg);
        let positive = |section: &str, key: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(err(section, key, format!("{key} must be positive and finite, got {v}")))
            }
        };

        let m = &self.model;
        positive("model", "omega_r_ghz", m.omega_r_ghz)?;
        if m.delta_ghz == 0.0 {
            return Err(err("model", "delta_ghz", "delta_ghz must be positive (the qubit splitting is Delta > 0)".into()));
        }
        positive("model", "delta_ghz", m.delta_ghz)?;
        let sweeps = |v: SweepVariable| self.sweep.as_ref().is_some_and(|s| s.variable == v);
        match m.g_ghz {
            Some(g) => positive("model", "g_ghz", g)?,
            None if !sweeps(SweepVariable::G) => {
                return Err(Error::config(None, "missing key g_ghz in [model] (required unless the sweep runs over g)"))
            }
            None => {}
        }
        if let Some(d) = m.resonator_dim {
            if d < 2 {
                return Err(err("model", "resonator_dim", format!("resonator_dim must be at least 2, got {d}")));
            }
        }

        let e = &self.environment;
        for (key, v) in [
            ("kappa_mhz", e.kappa_mhz),
            ("Z_R_ohm", e.z_r_ohm),
            ("Z_T_ohm", e.z_t_ohm),
            ("L_c_nH", e.l_c_nh),
            ("C_c_fF", e.c_c_ff),
            ("C_R_fF", e.c_r_ff),
        ] {
            if let Some(v) = v {
                positive("environment", key, v)?;
            }
        }
        if let Some(wc) = e.omega_cutoff_ghz {
            if !(wc > 0.0) {
                return Err(err("environment", "omega_cutoff_ghz", format!("omega_cutoff_ghz must be positive, got {wc}")));
            }
        }
        self.env_form_with(text)?;

        let t = &self.truncation;
        if t.resonator_dim < 2 {
            return Err(err("truncation", "resonator_dim", format!("resonator_dim must be at least 2, got {}", t.resonator_dim)));
        }
        if t.mode_freqs_ghz.is_empty() {
            return Err(err("truncation", "mode_freqs_ghz", "mode_freqs_ghz needs at least one mode".into()));
        }
        if t.mode_freqs_ghz.len() != t.mode_dims.len() {
            return Err(err(
                "truncation",
                "mode_dims",
                format!("{} mode frequencies but {} mode_dims", t.mode_freqs_ghz.len(), t.mode_dims.len()),
            ));
        }
        for (k, &f) in t.mode_freqs_ghz.iter().enumerate() {
            positive("truncation", "mode_freqs_ghz", f)?;
            if k > 0 && f <= t.mode_freqs_ghz[k - 1] {
                return Err(err("truncation", "mode_freqs_ghz", "mode_freqs_ghz must be strictly increasing".into()));
            }
        }
        if let Some(&d) = t.mode_dims.iter().find(|&&d| d < 2) {
            return Err(err("truncation", "mode_dims", format!("every mode needs at least 2 levels, got {d}")));
        }
        if let Some(s) = t.mode_spacing_ghz {
            positive("truncation", "mode_spacing_ghz", s)?;
        }

        if let Some(s) = &self.sweep {
            positive("sweep", "start", s.start)?;
            positive("sweep", "stop", s.stop)?;
            if s.stop < s.start {
                return Err(err("sweep", "stop", format!("sweep stop {} is below start {}", s.stop, s.start)));
            }
            if s.points == 0 {
                return Err(err("sweep", "points", "sweep needs at least one point".into()));
            }
            if s.variable == SweepVariable::Kappa && self.env_form()? == EnvForm::Circuit {
                return Err(err(
                    "sweep",
                    "variable",
                    "a kappa sweep needs a kappa-based environment, not fixed circuit elements".into(),
                ));
            }
        }

        if let Some(w) = &self.wigner {
            if !(0.0..=std::f64::consts::PI).contains(&w.theta) {
                return Err(err("wigner", "theta", format!("theta must lie in [0, pi], got {}", w.theta)));
            }
            if !(0.0..2.0 * std::f64::consts::PI).contains(&w.phi) {
                return Err(err("wigner", "phi", format!("phi must lie in [0, 2 pi), got {}", w.phi)));
            }
            if w.outcome != 1 && w.outcome != -1 {
                return Err(err("wigner", "outcome", format!("outcome must be +1 or -1, got {}", w.outcome)));
            }
            if w.points < 2 {
                return Err(err("wigner", "points", "Wigner grid needs at least 2 points per axis".into()));
            }
            if let Some(h) = w.half_width {
                positive("wigner", "half_width", h)?;
            }
        }

        if let Some(c) = &self.circuit {
            positive("circuit", "start", c.start)?;
            positive("circuit", "stop", c.stop)?;
            if c.stop < c.start {
                return Err(err("circuit", "stop", format!("circuit stop {} is below start {}", c.stop, c.start)));
            }
            if c.points == 0 {
                return Err(err("circuit", "points", "circuit table needs at least one point".into()));
            }
            if e.z_r_ohm.is_none() || e.z_t_ohm.is_none() {
                return Err(Error::config(None, "the circuit table needs Z_R_ohm and Z_T_ohm in [environment]"));
            }
        }
        Ok(())
    }

    pub fn env_form(&self) -> Result<EnvForm> {
        self.env_form_with(None)
    }

    fn env_form_with(&self, text: Option<&str>) -> Result<EnvForm> {
        let e = &self.environment;
        let err = |key: &str, msg: String| Error::config(key_line(text, "environment", key), msg);
        let kappa_given = e.kappa_mhz.is_some() || self.sweep.as_ref().is_some_and(|s| s.variable == SweepVariable::Kappa);
        let impedances = e.z_r_ohm.is_some() || e.z_t_ohm.is_some();
        let need_impedances = || {
            if e.z_r_ohm.is_none() {
                Err(Error::config(None, "missing key Z_R_ohm in [environment]"))
            } else if e.z_t_ohm.is_none() {
                Err(Error::config(None, "missing key Z_T_ohm in [environment]"))
            } else {
                Ok(())
            }
        };
        if e.l_c_nh.is_some() && e.c_c_ff.is_some() {
            return Err(err("C_c_fF", "conflicting environment: both L_c_nH and C_c_fF given".into()));
        }
        if let Some((key, expected)) = match (e.l_c_nh, e.c_c_ff) {
            (Some(_), None) => Some(("L_c_nH", Coupling::Inductive)),
            (None, Some(_)) => Some(("C_c_fF", Coupling::Capacitive)),
            _ => None,
        } {
            if e.kappa_mhz.is_some() {
                return Err(err(
                    "kappa_mhz",
                    format!("conflicting environment parameterizations: kappa_mhz and {key} both given"),
                ));
            }
            if e.omega_cutoff_ghz.is_some() {
                return Err(err(
                    "omega_cutoff_ghz",
                    format!("conflicting environment parameterizations: omega_cutoff_ghz and {key} both given"),
                ));
            }
            if e.rw_coupling != expected {
                return Err(err(key, format!("{key} implies {expected} coupling but rw_coupling is {}", e.rw_coupling)));
            }
            need_impedances()?;
            return Ok(EnvForm::Circuit);
        }
        if e.omega_cutoff_ghz.is_some() {
            if impedances {
                let key = if e.z_r_ohm.is_some() { "Z_R_ohm" } else { "Z_T_ohm" };
                return Err(err(
                    key,
                    format!("conflicting environment parameterizations: omega_cutoff_ghz and {key} both given"),
                ));
            }
            if e.c_r_ff.is_some() {
                return Err(err("C_R_fF", "C_R_fF only applies to circuit-based environments".into()));
            }
            if !kappa_given {
                return Err(Error::config(None, "missing key kappa_mhz in [environment]"));
            }
            return Ok(EnvForm::KappaCutoff);
        }
        if impedances {
            need_impedances()?;
            if !kappa_given {
                return Err(Error::config(
                    None,
                    "missing key in [environment]: impedances need kappa_mhz, L_c_nH or C_c_fF",
                ));
            }
            return Ok(EnvForm::KappaImpedance);
        }
        Err(Error::config(
            None,
            "missing environment: give kappa_mhz with omega_cutoff_ghz, kappa_mhz with Z_R_ohm and Z_T_ohm, \
             or Z_R_ohm, Z_T_ohm and L_c_nH / C_c_fF",
        ))
    }

    pub fn units(&self) -> Result<Units> {
        Units::new(self.model.omega_r_ghz)
    }

    /// The base point, without any sweep.
    pub fn base_point(&self) -> Point {
        Point {
            g_ghz: self.model.g_ghz.unwrap_or(f64::NAN),
            kappa_mhz: self.environment.kappa_mhz,
        }
    }

    /// Sweep points in order; the base point alone without a sweep.
    pub fn points(&self) -> Vec<Point> {
        let base = self.base_point();
        match &self.sweep {
            None => vec![base],
            Some(s) => s
                .values()
                .into_iter()
                .map(|v| match s.variable {
                    SweepVariable::G => Point { g_ghz: v, ..base },
                    SweepVariable::Kappa => Point {
                        kappa_mhz: Some(v),
                        ..base
                    },
                })
                .collect(),
        }
    }

    /// Qubit-resonator parameters at `point`; the resonator truncation is the
    /// diagonalization one.
    pub fn model_params(&self, point: &Point) -> Result<ModelParams> {
        let u = self.units()?;
        ModelParams::new(
            1.0,
            u.from_ghz(self.model.delta_ghz),
            u.from_ghz(point.g_ghz),
            self.model.qr_coupling,
            self.truncation.resonator_dim,
        )
    }

    pub fn circuit_at(&self, point: &Point) -> Result<Option<CircuitParams>> {
        let u = self.units()?;
        let e = &self.environment;
        let c_r = e.c_r_ff.map(|c| c * FEMTO);
        Ok(match self.env_form()? {
            EnvForm::KappaCutoff => None,
            EnvForm::KappaImpedance => {
                let kappa = point.kappa_mhz.ok_or_else(|| Error::config(None, "missing key kappa_mhz"))?;
                let circ = element_for_kappa(
                    u.from_mhz(kappa),
                    e.z_r_ohm.unwrap_or_default(),
                    e.z_t_ohm.unwrap_or_default(),
                    c_r,
                    e.rw_coupling,
                    &u,
                )?;
                Some(circ)
            }
            EnvForm::Circuit => Some(CircuitParams {
                z_r: e.z_r_ohm.unwrap_or_default(),
                z_t: e.z_t_ohm.unwrap_or_default(),
                c_r,
                element: match (e.l_c_nh, e.c_c_ff) {
                    (Some(l), _) => CouplingElement::Inductor(l * NANO),
                    (_, Some(c)) => CouplingElement::Capacitor(c * FEMTO),
                    _ => unreachable!("circuit form has an element"),
                },
            }),
        })
    }

    /// Continuum spectrum parameters at `point`.
    pub fn spectrum_at(&self, point: &Point) -> Result<SpectrumParams> {
        let u = self.units()?;
        match self.circuit_at(point)? {
            Some(circ) => circuit_to_spectrum(&circ, &u),
            None => {
                let kappa = point.kappa_mhz.ok_or_else(|| Error::config(None, "missing key kappa_mhz"))?;
                let wc = u.from_ghz(self.environment.omega_cutoff_ghz.unwrap_or(f64::INFINITY));
                let xi0 = xi0_from_kappa(u.from_mhz(kappa), wc, 1.0)?;
                SpectrumParams::new(xi0, wc, self.environment.rw_coupling)
            }
        }
    }

    /// Loss rate at the resonator frequency in MHz.
    pub fn kappa_mhz_at(&self, point: &Point) -> Result<f64> {
        match point.kappa_mhz {
            Some(k) => Ok(k),
            None => Ok(self.units()?.to_mhz(self.spectrum_at(point)?.kappa(1.0))),
        }
    }

    pub fn trunc(&self) -> Result<TruncationSpec> {
        TruncationSpec::new(self.truncation.resonator_dim, self.truncation.mode_dims.clone())
    }

    /// Discretized environment on the truncation's mode grid.
    pub fn modes_at(&self, point: &Point) -> Result<EnvSpectrum> {
        let u = self.units()?;
        let t = &self.truncation;
        let freqs: Vec<f64> = t.mode_freqs_ghz.iter().map(|&f| u.from_ghz(f)).collect();
        let spacing = match t.mode_spacing_ghz {
            Some(s) => u.from_ghz(s),
            None => default_spacing(&freqs).ok_or_else(|| Error::config(None, "mode grid is empty"))?,
        };
        discretize_modes(self.spectrum_at(point)?, &freqs, spacing, &t.mode_dims)
    }
}
