//! Quadrature Fisher information, metrological power, qubit-conditioned
//! resonator states and Wigner functions.
//!
//! The Fisher matrix is normalized so that the vacuum (and every coherent
//! state) has `F = 1`; for pure states `F_kl = 2 <{dR_k, dR_l}>`, twice the
//! symmetrized covariance of the quadratures `R_1 = (a + a^dagger)/sqrt 2`,
//! `R_2 = (a - a^dagger)/(sqrt 2 i)`. The metrological power is
//! `max((lambda_max(F) - 1)/2, 0)`.

use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::io::Write;

use argmin::core::{CostFunction, Executor};
use argmin::solver::neldermead::NelderMead;
use nalgebra::{DMatrix, Matrix2};
use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::hilbert::{annihilation_matrix, DensityMatrix, SpaceLabel, QUBIT, RESONATOR};

/// Eigenvalue pairs with `lambda_i + lambda_j` at or below this are dropped
/// from the Fisher sum.
pub const PAIR_FLOOR: f64 = 1e-12;
/// Outcomes less likely than this do not contribute to averaged quantities.
pub const NEGLIGIBLE_PROBABILITY: f64 = 1e-14;
pub const GRID_POINTS: usize = 32;
const REFINE_TOL: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QfiMatrix {
    pub entries: Matrix2<f64>,
}

impl QfiMatrix {
    pub fn lambda_max(&self) -> f64 {
        let m = &self.entries;
        let mean = 0.5 * (m[(0, 0)] + m[(1, 1)]);
        let half_diff = 0.5 * (m[(0, 0)] - m[(1, 1)]);
        mean + (half_diff * half_diff + m[(0, 1)] * m[(1, 0)]).max(0.0).sqrt()
    }
}

fn resonator_dim(rho: &DensityMatrix) -> Result<usize> {
    match rho.space().subsystems() {
        [only] => Ok(only.dim),
        _ => Err(Error::Label("Fisher information needs a single-mode state".into())),
    }
}

/// `R_1` and `R_2` on a `dim`-level truncation.
fn quadratures(dim: usize) -> (DMatrix<Complex64>, DMatrix<Complex64>) {
    let a = annihilation_matrix(dim);
    let ad = a.adjoint();
    let r1 = (&a + &ad) * Complex64::new(FRAC_1_SQRT_2, 0.0);
    let r2 = (&a - &ad) * Complex64::new(0.0, -FRAC_1_SQRT_2);
    (r1, r2)
}

pub fn qfi_matrix(rho: &DensityMatrix) -> Result<QfiMatrix> {
    let dim = resonator_dim(rho)?;
    let eig = rho.eigen()?;
    let v = &eig.vectors;
    let (r1, r2) = quadratures(dim);
    let t1 = v.adjoint() * r1 * v;
    let t2 = v.adjoint() * r2 * v;
    let lam = &eig.values;
    let mut f = Matrix2::zeros();
    for i in 0..dim {
        for j in 0..dim {
            let sum = lam[i] + lam[j];
            if sum <= PAIR_FLOOR {
                continue;
            }
            let w = (lam[i] - lam[j]).powi(2) / sum;
            if w == 0.0 {
                continue;
            }
            let (x, y) = (t1[(i, j)], t2[(i, j)]);
            // <i|R_k|j><j|R_l|i> = t_k[i,j] conj(t_l[i,j])
            f[(0, 0)] += w * x.norm_sqr();
            f[(1, 1)] += w * y.norm_sqr();
            f[(0, 1)] += w * (x * y.conj()).re;
        }
    }
    f[(1, 0)] = f[(0, 1)];
    Ok(QfiMatrix { entries: f })
}

pub fn metrological_power(rho: &DensityMatrix) -> Result<f64> {
    Ok(((qfi_matrix(rho)?.lambda_max() - 1.0) / 2.0).max(0.0))
}

/// Qubit measurement axis `n = (sin t cos p, sin t sin p, cos t)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MeasurementAxis {
    pub theta: f64,
    pub phi: f64,
}

impl MeasurementAxis {
    pub const X: MeasurementAxis = MeasurementAxis { theta: PI / 2.0, phi: 0.0 };
    pub const Y: MeasurementAxis = MeasurementAxis {
        theta: PI / 2.0,
        phi: PI / 2.0,
    };
    pub const Z: MeasurementAxis = MeasurementAxis { theta: 0.0, phi: 0.0 };

    pub fn new(theta: f64, phi: f64) -> Result<Self> {
        if !(0.0..=PI).contains(&theta) || !(0.0..2.0 * PI).contains(&phi) {
            return Err(Error::Domain(format!(
                "measurement axis needs theta in [0, pi] and phi in [0, 2 pi), got ({theta}, {phi})"
            )));
        }
        Ok(Self { theta, phi })
    }

    /// Axis from arbitrary angles, folded into the stated ranges.
    pub fn from_angles(theta: f64, phi: f64) -> Self {
        let n = [theta.sin() * phi.cos(), theta.sin() * phi.sin(), theta.cos()];
        Self::from_vector(n)
    }

    fn from_vector(n: [f64; 3]) -> Self {
        let norm = (n[0] * n[0] + n[1] * n[1] + n[2] * n[2]).sqrt();
        let theta = (n[2] / norm).clamp(-1.0, 1.0).acos();
        let phi = if n[0] == 0.0 && n[1] == 0.0 {
            0.0
        } else {
            n[1].atan2(n[0]).rem_euclid(2.0 * PI)
        };
        // rem_euclid can round up to exactly 2 pi
        let phi = if phi >= 2.0 * PI { 0.0 } else { phi };
        Self { theta, phi }
    }

    pub fn vector(&self) -> [f64; 3] {
        [
            self.theta.sin() * self.phi.cos(),
            self.theta.sin() * self.phi.sin(),
            self.theta.cos(),
        ]
    }

    /// `n` and `-n` describe the same measurement with relabelled outcomes.
    /// The representative has `phi` in `[0, pi)`, or `theta = 0` on the z axis.
    pub fn canonical(&self) -> Self {
        let n = self.vector();
        let sin_t = (n[0] * n[0] + n[1] * n[1]).sqrt();
        if sin_t < 1e-12 {
            return Self { theta: 0.0, phi: 0.0 };
        }
        let a = Self::from_vector(n);
        if a.phi >= PI - 1e-12 {
            Self::from_vector([-n[0], -n[1], -n[2]])
        } else {
            a
        }
    }

    /// `(1 + s n.sigma)/2` for outcome `s = +-1`.
    pub fn projector(&self, outcome: i8) -> [[Complex64; 2]; 2] {
        let [x, y, z] = self.vector();
        let s = f64::from(outcome.signum());
        let h = 0.5 * s;
        [
            [Complex64::new(0.5 + h * z, 0.0), Complex64::new(h * x, -h * y)],
            [Complex64::new(h * x, h * y), Complex64::new(0.5 - h * z, 0.0)],
        ]
    }
}

#[derive(Clone, Debug)]
pub struct PostState {
    pub outcome: i8,
    pub probability: f64,
    /// Conditional resonator state; the vacuum placeholder when `negligible`.
    pub state: DensityMatrix,
    pub negligible: bool,
}

/// Projects the qubit of a qubit-resonator state on `axis` and returns the
/// renormalized resonator states for outcomes `+1` and `-1`.
pub fn qubit_measure(rho_qr: &DensityMatrix, axis: MeasurementAxis) -> Result<Vec<PostState>> {
    let subs = rho_qr.space().subsystems();
    if subs.len() != 2 || subs[0].name != QUBIT || subs[0].dim != 2 || subs[1].name != RESONATOR {
        return Err(Error::Label("qubit measurement needs a (qubit, resonator) state".into()));
    }
    let d = subs[1].dim;
    let m = rho_qr.matrix();
    let res_space = SpaceLabel::single(RESONATOR, d)?;
    let mut out = Vec::with_capacity(2);
    for outcome in [1i8, -1] {
        let p = axis.projector(outcome);
        // tr_q[(P x 1) rho] = sum_ab P_ba rho_ab
        let mut block = DMatrix::<Complex64>::zeros(d, d);
        for a in 0..2 {
            for b in 0..2 {
                let coeff = p[b][a];
                if coeff != Complex64::new(0.0, 0.0) {
                    block += m.view((a * d, b * d), (d, d)) * coeff;
                }
            }
        }
        let probability = block.trace().re.max(0.0);
        let negligible = probability < NEGLIGIBLE_PROBABILITY;
        let state = if negligible {
            let mut vac = DMatrix::zeros(d, d);
            vac[(0, 0)] = Complex64::new(1.0, 0.0);
            DensityMatrix::new(res_space.clone(), vac)?
        } else {
            DensityMatrix::from_unnormalized(res_space.clone(), block)?
        };
        out.push(PostState {
            outcome,
            probability,
            state,
            negligible,
        });
    }
    let total: f64 = out.iter().map(|o| o.probability).sum();
    for o in &mut out {
        o.probability /= total;
    }
    Ok(out)
}

/// Probability and metrological power of each outcome.
pub fn outcome_mp(rho_qr: &DensityMatrix, axis: MeasurementAxis) -> Result<Vec<(f64, f64)>> {
    qubit_measure(rho_qr, axis)?
        .into_iter()
        .map(|o| {
            let mp = if o.negligible { 0.0 } else { metrological_power(&o.state)? };
            Ok((o.probability, mp))
        })
        .collect()
}

pub fn average_mp(rho_qr: &DensityMatrix, axis: MeasurementAxis) -> Result<f64> {
    Ok(outcome_mp(rho_qr, axis)?.iter().map(|(p, m)| p * m).sum())
}

#[derive(Clone, Debug)]
pub struct MetrologyReport {
    pub mp: f64,
    pub axis: MeasurementAxis,
    /// `(probability, mp)` for outcomes `+1` and `-1` at `axis`.
    pub per_outcome: Vec<(f64, f64)>,
    /// Best value on the coarse grid, before refinement.
    pub grid_mp: f64,
    /// The averaged power is flat over the grid; `axis` is then arbitrary.
    pub degenerate: bool,
}

struct NegativeAverageMp<'a> {
    rho: &'a DensityMatrix,
}

impl CostFunction for NegativeAverageMp<'_> {
    type Param = Vec<f64>;
    type Output = f64;

    fn cost(&self, p: &Self::Param) -> std::result::Result<f64, argmin::core::Error> {
        let axis = MeasurementAxis::from_angles(p[0], p[1]);
        average_mp(self.rho, axis).map(|v| -v).map_err(|e| argmin::core::Error::msg(e.to_string()))
    }
}

/// Maximizes the averaged metrological power over qubit measurement axes:
/// a 32 x 32 grid over `theta, phi in [0, pi)`, then Nelder-Mead from the best
/// grid point. `theta = pi` is left out as it is the same measurement as `theta = 0`.
pub fn optimize_axis(rho_qr: &DensityMatrix) -> Result<MetrologyReport> {
    let n = GRID_POINTS;
    let dtheta = PI / n as f64;
    let dphi = PI / n as f64;
    let values = (0..n * n)
        .into_par_iter()
        .map(|k| {
            let axis = MeasurementAxis {
                theta: (k / n) as f64 * dtheta,
                phi: (k % n) as f64 * dphi,
            };
            average_mp(rho_qr, axis)
        })
        .collect::<Result<Vec<f64>>>()?;

    // first strict maximum in (theta, phi) order breaks ties toward the smallest angles
    let mut best = 0;
    for (k, &v) in values.iter().enumerate() {
        if v > values[best] {
            best = k;
        }
    }
    let grid_mp = values[best];
    let lowest = values.iter().copied().fold(f64::INFINITY, f64::min);
    let degenerate = grid_mp - lowest < 1e-10;
    let start = MeasurementAxis {
        theta: (best / n) as f64 * dtheta,
        phi: (best % n) as f64 * dphi,
    };
    if degenerate {
        return Ok(MetrologyReport {
            mp: grid_mp,
            axis: start.canonical(),
            per_outcome: outcome_mp(rho_qr, start)?,
            grid_mp,
            degenerate,
        });
    }

    let (t0, p0) = (start.theta, start.phi);
    let simplex = vec![vec![t0, p0], vec![t0 + dtheta, p0], vec![t0, p0 + dphi]];
    let solver = NelderMead::new(simplex)
        .with_sd_tolerance(0.1 * REFINE_TOL)
        .map_err(|e| Error::Domain(e.to_string()))?;
    let result = Executor::new(NegativeAverageMp { rho: rho_qr }, solver)
        .configure(|s| s.max_iters(400))
        .run()
        .map_err(|e| Error::Domain(format!("axis refinement failed: {e}")))?;
    let state = result.state();
    let (axis, mp) = match &state.best_param {
        Some(p) if -state.best_cost > grid_mp => (MeasurementAxis::from_angles(p[0], p[1]), -state.best_cost),
        _ => (start, grid_mp),
    };
    Ok(MetrologyReport {
        mp,
        axis: axis.canonical(),
        per_outcome: outcome_mp(rho_qr, axis)?,
        grid_mp,
        degenerate,
    })
}

/// Rectangular phase-space grid, `beta = x + i p`.
#[derive(Clone, Debug, PartialEq)]
pub struct WignerGrid {
    pub x: Vec<f64>,
    pub p: Vec<f64>,
}

impl WignerGrid {
    pub fn square(half_width: f64, points: usize) -> Result<Self> {
        if !(half_width > 0.0 && half_width.is_finite()) || points < 2 {
            return Err(Error::Domain(format!(
                "Wigner grid needs a positive half width and at least two points, got {half_width}, {points}"
            )));
        }
        let axis: Vec<f64> = (0..points)
            .map(|k| -half_width + 2.0 * half_width * k as f64 / (points - 1) as f64)
            .collect();
        Ok(Self {
            x: axis.clone(),
            p: axis,
        })
    }

    /// `+-(|alpha| + 3)` at 201 x 201.
    pub fn default_for(alpha_abs: f64) -> Self {
        Self::square(alpha_abs + 3.0, 201).expect("positive half width")
    }

    /// Points in row-major order, `x` outer and `p` inner.
    pub fn points(&self) -> Vec<(f64, f64)> {
        self.x.iter().flat_map(|&x| self.p.iter().map(move |&p| (x, p))).collect()
    }
}

/// Matrix elements `<n|D(gamma)|m>` for `n, m < dim`, exact in the infinite space.
fn displacement_elements(gamma: Complex64, dim: usize) -> DMatrix<Complex64> {
    let mut d = DMatrix::zeros(dim, dim);
    // column 0 is the coherent state |gamma>
    let mut amp = Complex64::new((-0.5 * gamma.norm_sqr()).exp(), 0.0);
    for n in 0..dim {
        d[(n, 0)] = amp;
        amp *= gamma / ((n + 1) as f64).sqrt();
    }
    // D a^dagger = (a^dagger - gamma*) D
    let gc = gamma.conj();
    for m in 0..dim - 1 {
        let s = ((m + 1) as f64).sqrt();
        for n in 0..dim {
            let up = if n > 0 { d[(n - 1, m)] * (n as f64).sqrt() } else { Complex64::new(0.0, 0.0) };
            d[(n, m + 1)] = (up - gc * d[(n, m)]) / s;
        }
    }
    d
}

/// `W(beta) = (2/pi) tr[rho D(beta) Pi D(-beta)] = (2/pi) tr[rho D(2 beta) Pi]`.
pub fn wigner_at(rho: &DensityMatrix, x: f64, p: f64) -> Result<f64> {
    let dim = resonator_dim(rho)?;
    Ok(wigner_point(rho.matrix(), dim, x, p))
}

fn wigner_point(m: &DMatrix<Complex64>, dim: usize, x: f64, p: f64) -> f64 {
    let d = displacement_elements(Complex64::new(2.0 * x, 2.0 * p), dim);
    let mut acc = Complex64::new(0.0, 0.0);
    for mcol in 0..dim {
        let sign = if mcol % 2 == 0 { 1.0 } else { -1.0 };
        for n in 0..dim {
            acc += m[(mcol, n)] * d[(n, mcol)] * sign;
        }
    }
    2.0 / PI * acc.re
}

/// Wigner function on every grid point, in [`WignerGrid::points`] order.
pub fn wigner(rho: &DensityMatrix, grid: &WignerGrid) -> Result<Vec<f64>> {
    let dim = resonator_dim(rho)?;
    let m = rho.matrix();
    Ok(grid
        .points()
        .par_iter()
        .map(|&(x, p)| wigner_point(m, dim, x, p))
        .collect())
}

/// CSV with columns `x,p,W`.
pub fn write_wigner_csv<W: Write>(out: W, grid: &WignerGrid, values: &[f64]) -> Result<()> {
    let points = grid.points();
    if points.len() != values.len() {
        return Err(Error::Domain(format!(
            "{} Wigner values for {} grid points",
            values.len(),
            points.len()
        )));
    }
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["x", "p", "W"])?;
    for (&(x, p), v) in points.iter().zip(values) {
        w.write_record([format!("{x:.16e}"), format!("{p:.16e}"), format!("{v:.16e}")])?;
    }
    w.flush()?;
    Ok(())
}
