//! Executes configured points and sweeps and writes their CSV output.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::Write;
use std::time::Instant;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::config::{serialize_config, Backend, Observable, Point, RunConfig, SweepSection, SweepVariable};
use crate::cvs::{build_zts, closed_model_alpha, solve, CvsProblem, CvsSolution, FMode};
use crate::diag::{analyze, assemble_total, excited_fractions, ground_state, write_dump, GroundReport, DEFAULT_LABELS};
use crate::environment::{circuit_to_spectrum, CircuitParams, CouplingElement, EnvSpectrum};
use crate::error::{Error, Result};
use crate::hilbert::{recommended_dim, DensityMatrix};
use crate::metrology::{optimize_axis, qubit_measure, wigner, MeasurementAxis, WignerGrid};
use crate::rabi::{Branch, Coupling, ModelParams};
use crate::units::{FEMTO, NANO};

/// CSV column names, in output order.
pub const COLUMNS: [&str; 18] = [
    "g_ghz",
    "kappa_mhz",
    "backend",
    "n_virtual",
    "purity",
    "coherence_C",
    "energy",
    "mp",
    "theta_opt",
    "phi_opt",
    "fraction_0plus",
    "fraction_1minus",
    "fraction_1plus",
    "solver_iterations",
    "wall_time_ms",
    "fraction_0minus",
    "flags",
    "error",
];

/// One backend's result at one sweep point. Energies are in GHz (`E/h`).
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ResultRow {
    pub g_ghz: f64,
    pub kappa_mhz: Option<f64>,
    pub backend: String,
    pub n_virtual: Option<f64>,
    pub purity: Option<f64>,
    pub coherence_c: Option<f64>,
    pub energy: Option<f64>,
    pub mp: Option<f64>,
    pub theta_opt: Option<f64>,
    pub phi_opt: Option<f64>,
    pub fraction_0plus: Option<f64>,
    pub fraction_1minus: Option<f64>,
    pub fraction_1plus: Option<f64>,
    pub solver_iterations: Option<usize>,
    pub wall_time_ms: Option<f64>,
    pub fraction_0minus: Option<f64>,
    /// `;`-separated: `localized`, `near_degenerate`, `axis_degenerate`.
    pub flags: Vec<&'static str>,
    pub error: Option<String>,
}

impl ResultRow {
    pub fn failed(&self) -> bool {
        self.error.is_some()
    }

    fn record(&self) -> Vec<String> {
        let f = |v: Option<f64>| v.map(|x| format!("{x:.16e}")).unwrap_or_default();
        vec![
            format!("{:.16e}", self.g_ghz),
            f(self.kappa_mhz),
            self.backend.clone(),
            f(self.n_virtual),
            f(self.purity),
            f(self.coherence_c),
            f(self.energy),
            f(self.mp),
            f(self.theta_opt),
            f(self.phi_opt),
            f(self.fraction_0plus),
            f(self.fraction_1minus),
            f(self.fraction_1plus),
            self.solver_iterations.map(|n| n.to_string()).unwrap_or_default(),
            f(self.wall_time_ms),
            f(self.fraction_0minus),
            self.flags.join(";"),
            self.error.clone().unwrap_or_default(),
        ]
    }
}

/// Environment handed to the CVS solver: the continuum, or the mode grid for
/// discrete sums.
fn cvs_problem(cfg: &RunConfig, point: &Point) -> Result<CvsProblem> {
    let model = cfg.model_params(point)?;
    let env = match cfg.environment.f_mode {
        FMode::DiscreteSum => cfg.modes_at(point)?,
        _ => EnvSpectrum::continuum(cfg.spectrum_at(point)?),
    };
    CvsProblem::new(model, env, cfg.environment.f_mode)
}

/// CVS solution and its qubit-resonator state.
pub fn cvs_state(cfg: &RunConfig, point: &Point) -> Result<(CvsSolution, DensityMatrix)> {
    let sol = solve(&cvs_problem(cfg, point)?)?;
    let dim = cfg
        .model
        .resonator_dim
        .unwrap_or_else(|| recommended_dim(sol.alpha_bar.norm()));
    let rho = build_zts(sol.alpha_bar, sol.coherence_c, dim)?;
    Ok((sol, rho))
}

/// Displacement of the displaced-Fock basis used for diagonalization fractions:
/// the closed-model root along the qubit-resonator quadrature.
pub fn reference_alpha(model: &ModelParams) -> Complex64 {
    let a = closed_model_alpha(model);
    match model.qr_coupling {
        Coupling::Inductive => Complex64::new(a, 0.0),
        Coupling::Capacitive => Complex64::new(0.0, a),
    }
}

pub fn diag_report(cfg: &RunConfig, point: &Point) -> Result<GroundReport> {
    let model = cfg.model_params(point)?;
    let env = cfg.modes_at(point)?;
    analyze(&model, &env, &cfg.trunc()?, reference_alpha(&model))
}

/// Writes the total Hamiltonian and its ground vector at the base point in the
/// binary dump layout of [`crate::diag::write_dump`].
pub fn dump_base_point<W: Write>(out: &mut W, cfg: &RunConfig) -> Result<()> {
    let point = cfg.base_point();
    let model = cfg.model_params(&point)?;
    let env = cfg.modes_at(&point)?;
    let h = assemble_total(&model, &env, &cfg.trunc()?)?;
    let ground = ground_state(&h)?;
    write_dump(out, &h, &ground.state, model.qr_coupling, cfg.environment.rw_coupling)
}

fn fill_metrology(row: &mut ResultRow, cfg: &RunConfig, rho_qr: &DensityMatrix) -> Result<()> {
    if !cfg.output.wants(Observable::Mp) {
        return Ok(());
    }
    let report = optimize_axis(rho_qr)?;
    row.mp = Some(report.mp);
    row.theta_opt = Some(report.axis.theta);
    row.phi_opt = Some(report.axis.phi);
    if report.degenerate {
        row.flags.push("axis_degenerate");
    }
    Ok(())
}

fn fill_fractions(row: &mut ResultRow, fractions: &BTreeMap<(usize, Branch), f64>) {
    row.fraction_0minus = fractions.get(&(0, Branch::Minus)).copied();
    row.fraction_0plus = fractions.get(&(0, Branch::Plus)).copied();
    row.fraction_1minus = fractions.get(&(1, Branch::Minus)).copied();
    row.fraction_1plus = fractions.get(&(1, Branch::Plus)).copied();
}

fn cvs_row(cfg: &RunConfig, point: &Point, row: &mut ResultRow) -> Result<()> {
    let (sol, rho) = cvs_state(cfg, point)?;
    let u = cfg.units()?;
    let out = &cfg.output;
    row.solver_iterations = Some(sol.iterations);
    if sol.localized {
        row.flags.push("localized");
    }
    if out.wants(Observable::NVirtual) {
        row.n_virtual = Some(sol.n_virtual());
    }
    if out.wants(Observable::Purity) {
        row.purity = Some(sol.purity());
    }
    if out.wants(Observable::CoherenceC) {
        row.coherence_c = Some(sol.coherence_c);
    }
    if out.wants(Observable::Energy) {
        row.energy = Some(u.to_ghz(sol.energy));
    }
    if out.wants(Observable::Fractions) {
        let f = excited_fractions(&rho, sol.alpha_bar, &DEFAULT_LABELS)?;
        fill_fractions(row, &f);
    }
    fill_metrology(row, cfg, &rho)
}

fn diag_row(cfg: &RunConfig, point: &Point, row: &mut ResultRow) -> Result<()> {
    let report = diag_report(cfg, point)?;
    let u = cfg.units()?;
    let out = &cfg.output;
    if report.ground.near_degenerate {
        row.flags.push("near_degenerate");
    }
    if out.wants(Observable::NVirtual) {
        row.n_virtual = Some(report.n_virtual()?);
    }
    if out.wants(Observable::Purity) {
        row.purity = Some(report.purity());
    }
    if out.wants(Observable::Energy) {
        row.energy = Some(u.to_ghz(report.energy));
    }
    if out.wants(Observable::Fractions) {
        fill_fractions(row, &report.fractions);
    }
    fill_metrology(row, cfg, &report.rho_qr)
}

/// Runs one backend at one point. Failures end up in the row's `error` field.
pub fn run_point(cfg: &RunConfig, point: &Point, backend: Backend) -> ResultRow {
    let start = Instant::now();
    let mut row = ResultRow {
        g_ghz: point.g_ghz,
        kappa_mhz: cfg.kappa_mhz_at(point).ok(),
        backend: backend.as_str().to_string(),
        ..ResultRow::default()
    };
    let result = match backend {
        Backend::Cvs => cvs_row(cfg, point, &mut row),
        Backend::Diag => diag_row(cfg, point, &mut row),
        Backend::Both => Err(Error::Domain("run_point needs a single backend".into())),
    };
    if let Err(e) = result {
        // partial results of a failed row are not trustworthy
        row = ResultRow {
            g_ghz: row.g_ghz,
            kappa_mhz: row.kappa_mhz,
            backend: row.backend,
            error: Some(e.to_string()),
            ..ResultRow::default()
        };
    }
    if cfg.output.record_timing {
        row.wall_time_ms = Some(start.elapsed().as_secs_f64() * 1e3);
    }
    row
}

/// All points of the sweep (or the single base point) for every configured
/// backend, ordered by sweep index and then backend.
pub fn run_sweep(cfg: &RunConfig, jobs: Option<usize>) -> Result<Vec<ResultRow>> {
    let tasks: Vec<(Point, Backend)> = cfg
        .points()
        .into_iter()
        .flat_map(|p| cfg.backend.expand().iter().map(move |&b| (p, b)))
        .collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.unwrap_or(0))
        .build()
        .map_err(|e| Error::Domain(format!("cannot start worker pool: {e}")))?;
    Ok(pool.install(|| tasks.par_iter().map(|(p, b)| run_point(cfg, p, *b)).collect()))
}

/// Writes the resolved configuration as `#` comments, then the header and rows.
pub fn write_csv<W: Write>(mut out: W, cfg: &RunConfig, rows: &[ResultRow]) -> Result<()> {
    let mut header = String::new();
    for line in serialize_config(cfg)?.lines() {
        let _ = writeln!(header, "# {line}");
    }
    out.write_all(header.as_bytes())?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(COLUMNS)?;
    for row in rows {
        w.write_record(row.record())?;
    }
    w.flush()?;
    Ok(())
}

/// Wigner function of the resonator state conditioned on the configured qubit
/// outcome, at the configuration's base point.
pub fn wigner_field(cfg: &RunConfig, backend: Backend) -> Result<(WignerGrid, Vec<f64>)> {
    let settings = cfg.wigner.clone().unwrap_or_default();
    let point = cfg.base_point();
    let (rho_qr, alpha) = match backend {
        Backend::Cvs => {
            let (sol, rho) = cvs_state(cfg, &point)?;
            (rho, sol.alpha_bar)
        }
        Backend::Diag => {
            let model = cfg.model_params(&point)?;
            (diag_report(cfg, &point)?.rho_qr, reference_alpha(&model))
        }
        Backend::Both => return Err(Error::Domain("the Wigner function needs a single backend".into())),
    };
    let axis = MeasurementAxis::new(settings.theta, settings.phi)?;
    let post = qubit_measure(&rho_qr, axis)?
        .into_iter()
        .find(|o| o.outcome == settings.outcome)
        .ok_or_else(|| Error::Domain(format!("no outcome {}", settings.outcome)))?;
    if post.negligible {
        return Err(Error::Domain(format!(
            "outcome {} has probability {:.3e}; no conditional state",
            settings.outcome, post.probability
        )));
    }
    let grid = match settings.half_width {
        Some(h) => WignerGrid::square(h, settings.points)?,
        None => WignerGrid::square(alpha.norm() + 3.0, settings.points)?,
    };
    let values = wigner(&post.state, &grid)?;
    Ok((grid, values))
}

/// One line of the coupling-element table.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CircuitRow {
    /// nH for inductive coupling, fF for capacitive.
    pub element: f64,
    pub kappa_mhz: f64,
    pub omega_cutoff_ghz: f64,
    pub xi0: f64,
}

/// Loss rate and cutoff across the configured range of coupling elements.
pub fn circuit_table(cfg: &RunConfig) -> Result<Vec<CircuitRow>> {
    let range = cfg
        .circuit
        .as_ref()
        .ok_or_else(|| Error::config(None, "missing [circuit] section"))?;
    let e = &cfg.environment;
    let (z_r, z_t) = match (e.z_r_ohm, e.z_t_ohm) {
        (Some(r), Some(t)) => (r, t),
        _ => return Err(Error::config(None, "the circuit table needs Z_R_ohm and Z_T_ohm")),
    };
    let u = cfg.units()?;
    let sweep = SweepSection {
        variable: SweepVariable::Kappa,
        start: range.start,
        stop: range.stop,
        points: range.points,
        log: range.log,
    };
    sweep
        .values()
        .into_iter()
        .map(|v| {
            let element = match e.rw_coupling {
                Coupling::Inductive => CouplingElement::Inductor(v * NANO),
                Coupling::Capacitive => CouplingElement::Capacitor(v * FEMTO),
            };
            let circ = CircuitParams {
                z_r,
                z_t,
                c_r: e.c_r_ff.map(|c| c * FEMTO),
                element,
            };
            let spec = circuit_to_spectrum(&circ, &u)?;
            Ok(CircuitRow {
                element: v,
                kappa_mhz: u.to_mhz(spec.kappa(1.0)),
                omega_cutoff_ghz: u.to_ghz(spec.omega_cutoff),
                xi0: spec.xi0,
            })
        })
        .collect()
}

pub fn write_circuit_csv<W: Write>(out: W, coupling: Coupling, rows: &[CircuitRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let element = match coupling {
        Coupling::Inductive => "L_c_nH",
        Coupling::Capacitive => "C_c_fF",
    };
    w.write_record([element, "kappa_mhz", "omega_cutoff_ghz", "xi0"])?;
    for r in rows {
        w.write_record([
            format!("{:.16e}", r.element),
            format!("{:.16e}", r.kappa_mhz),
            format!("{:.16e}", r.omega_cutoff_ghz),
            format!("{:.16e}", r.xi0),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Whether every row is free of errors.
pub fn all_succeeded(rows: &[ResultRow]) -> bool {
    rows.iter().all(|r| !r.failed())
}
