//! Coherent variational state (CVS).
//!
//! The ansatz is `(|up>|-a>prod|-b_k> - |down>|a>prod|b_k>) / sqrt 2`. Eliminating
//! the mode amplitudes `b_k` leaves two real unknowns: the resonator displacement
//! `a` along the coupled quadrature and `S = sum |b_k|^2`. The bath enters only
//! through
//!
//! ```text
//! f1(x) = sum_k xi_k^2 / (x + w_k)
//! f2(x) = sum_k xi_k^2 / (x + w_k)^2 = -f1'(x)
//! f3(x) = sum_k xi_k^2 / (x + w_k)^3 = -f2'(x) / 2
//! ```
//!
//! evaluated at the dressed qubit splitting `x = D exp(-2(a^2 + S))`, either as
//! sums over discrete modes or as integrals over the continuum density.
//!
//! When the qubit-resonator and resonator-waveguide couplings act through the same
//! quadrature, the stationary equations are
//!
//! ```text
//! w_r a + x a - g - 4 a f1(x) = 0
//! 4 a^2 f2(x) - S = 0
//! ```
//!
//! When they act through different quadratures the bath decouples (`S = 0`) and
//! `a` solves the closed-model equation `(w_r + D exp(-2a^2)) a = g`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::environment::EnvSpectrum;
use crate::error::{Error, Result};
use crate::hilbert::DensityMatrix;
use crate::quad;
use crate::rabi::{approx_eigenstate, Branch, Coupling, ModelParams};

/// How the bath sums `f1`, `f2`, `f3` are evaluated.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FMode {
    DiscreteSum,
    ContinuumClosedForm,
    ContinuumQuadrature,
}

impl FMode {
    pub fn as_str(self) -> &'static str {
        match self {
            FMode::DiscreteSum => "discrete_sum",
            FMode::ContinuumClosedForm => "continuum_closed_form",
            FMode::ContinuumQuadrature => "continuum_quadrature",
        }
    }
}

pub const TOLERANCE: f64 = 1e-12;
pub const MAX_ITER: usize = 200;
const QUAD_TOL: f64 = 1e-13;
/// Beyond this `S` the dressed splitting is below `1e-170 D` and Newton is
/// abandoned in favour of the bracketing solver.
const S_CAP: f64 = 200.0;

#[derive(Clone, Debug, PartialEq)]
pub struct CvsProblem {
    pub model: ModelParams,
    pub env: EnvSpectrum,
    pub f_mode: FMode,
}

impl CvsProblem {
    pub fn new(model: ModelParams, env: EnvSpectrum, f_mode: FMode) -> Result<Self> {
        model.validate()?;
        if f_mode != FMode::DiscreteSum && !env.omega_cutoff().is_finite() && env.xi0() > 0.0 {
            return Err(Error::Domain(
                "continuum bath sums diverge without a finite cutoff".into(),
            ));
        }
        Ok(Self { model, env, f_mode })
    }

    /// True when both couplings act through the same resonator quadrature, so
    /// the bath dresses the ground state.
    pub fn bath_active(&self) -> bool {
        self.model.qr_coupling == self.env.rw_coupling()
    }

    pub fn f1(&self, x: f64) -> f64 {
        self.response(x, 1)
    }

    pub fn f2(&self, x: f64) -> f64 {
        self.response(x, 2)
    }

    pub fn f3(&self, x: f64) -> f64 {
        self.response(x, 3)
    }

    fn response(&self, x: f64, order: i32) -> f64 {
        assert!(x >= 0.0, "bath sums need x >= 0, got {x}");
        match self.f_mode {
            FMode::DiscreteSum => self
                .env
                .modes
                .iter()
                .map(|m| m.xi * m.xi / (x + m.omega).powi(order))
                .sum(),
            FMode::ContinuumClosedForm => closed_form(x, self.env.xi0(), self.env.omega_cutoff(), order),
            FMode::ContinuumQuadrature => {
                let xi2 = self.env.xi0().powi(2);
                if xi2 == 0.0 {
                    return 0.0;
                }
                if x == 0.0 && order > 1 {
                    return f64::INFINITY;
                }
                let c = self.env.omega_cutoff();
                quad::half_line(
                    |w| xi2 * w / ((1.0 + (w / c).powi(2)) * (x + w).powi(order)),
                    &[x, c],
                    QUAD_TOL,
                )
            }
        }
    }
}

/// Continuum bath sums in closed form for the density `xi0^2 w / (1 + (w/c)^2)`.
fn closed_form(x: f64, xi0: f64, c: f64, order: i32) -> f64 {
    let xi2 = xi0 * xi0;
    if xi2 == 0.0 {
        return 0.0;
    }
    if x == 0.0 {
        return match order {
            1 => PI * xi2 * c / 2.0,
            _ => f64::INFINITY,
        };
    }
    let c2 = c * c;
    let d = x * x + c2;
    let l = (x / c).ln();
    match order {
        1 => xi2 * c2 / d * (x * l + PI * c / 2.0),
        2 => xi2 * c2 * (-1.0 / d + (x * x - c2) / (d * d) * l + PI * c * x / (d * d)),
        3 => {
            let d2 = d * d;
            let d3 = d2 * d;
            let g = 2.0 * x / d2
                + (2.0 * x / d2 - 4.0 * x * (x * x - c2) / d3) * l
                + (x * x - c2) / (x * d2)
                + PI * c / d2
                - 4.0 * PI * c * x * x / d3;
            -0.5 * xi2 * c2 * g
        }
        _ => unreachable!("bath sums are defined for orders 1 to 3"),
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CvsSolution {
    /// Physical resonator displacement: real for inductive qubit coupling,
    /// imaginary for capacitive.
    pub alpha_bar: Complex64,
    pub s_bar: f64,
    pub coherence_c: f64,
    pub energy: f64,
    pub iterations: usize,
    pub residual: f64,
    /// The continuum bath has localized the qubit: `S` has no finite stationary
    /// value and the coherence vanishes.
    pub localized: bool,
}

impl CvsSolution {
    pub fn n_virtual(&self) -> f64 {
        self.alpha_bar.norm_sqr()
    }

    pub fn purity(&self) -> f64 {
        0.5 * (1.0 + self.coherence_c * self.coherence_c)
    }
}

/// Displacement component along the quadrature a coupling acts through.
fn component(alpha: Complex64, coupling: Coupling) -> f64 {
    match coupling {
        Coupling::Inductive => alpha.re,
        Coupling::Capacitive => alpha.im,
    }
}

/// Maps a real displacement along the coupled quadrature back to the complex plane.
fn physical(a: f64, coupling: Coupling) -> Complex64 {
    match coupling {
        Coupling::Inductive => Complex64::new(a, 0.0),
        Coupling::Capacitive => Complex64::new(0.0, a),
    }
}

fn dressed_splitting(delta: f64, a2: f64, s: f64) -> f64 {
    if s.is_infinite() {
        0.0
    } else {
        delta * (-2.0 * (a2 + s)).exp()
    }
}

/// Variational energy of the CVS with displacement `alpha` and mode amplitudes
/// `b_k = -xi_k (alpha +/- alpha^*) / (w_k + x)`, `x = D exp(-2(|alpha|^2 + S))`.
///
/// At a stationary point `S` equals `sum |b_k|^2`; elsewhere `S` just labels the
/// family of mode amplitudes and the value is still a variational energy.
pub fn cvs_energy(alpha: Complex64, s: f64, problem: &CvsProblem) -> f64 {
    let p = &problem.model;
    let q = component(alpha, p.qr_coupling);
    let r = component(alpha, problem.env.rw_coupling());
    let n = alpha.norm_sqr();
    let x = dressed_splitting(p.delta, n, s);
    let mut e = p.omega_r * n - 2.0 * p.g * q;
    if r == 0.0 {
        return e - 0.5 * p.delta * (-2.0 * n).exp();
    }
    let f1 = problem.f1(x);
    let (xf2, f2) = if x == 0.0 { (0.0, problem.f2(0.0)) } else { let f2 = problem.f2(x); (x * f2, f2) };
    e -= 4.0 * r * r * (f1 + xf2);
    e - 0.5 * p.delta * (-2.0 * n - 8.0 * r * r * f2).exp()
}

/// Gradient `(dE/da, dE/dS)` of [`cvs_energy`] along the coupled quadrature.
pub fn cvs_gradient(a: f64, s: f64, problem: &CvsProblem) -> (f64, f64) {
    let p = &problem.model;
    let a2 = a * a;
    if !problem.bath_active() {
        let da = 2.0 * p.omega_r * a - 2.0 * p.g + 2.0 * a * p.delta * (-2.0 * a2).exp();
        return (da, 0.0);
    }
    let x = dressed_splitting(p.delta, a2, s);
    let (f1, f2, f3) = (problem.f1(x), problem.f2(x), problem.f3(x));
    let tunnel = p.delta * (-2.0 * a2 * (1.0 + 4.0 * f2)).exp();
    let de_dx = 8.0 * a2 * f3 * (x - tunnel);
    let partial_a = 2.0 * p.omega_r * a - 2.0 * p.g - 8.0 * a * (f1 + x * f2) + 2.0 * a * (1.0 + 4.0 * f2) * tunnel;
    (partial_a + de_dx * (-4.0 * a * x), de_dx * (-2.0 * x))
}

/// Residuals of the two stationary equations.
fn residual(problem: &CvsProblem, a: f64, s: f64) -> [f64; 2] {
    let p = &problem.model;
    let x = dressed_splitting(p.delta, a * a, s);
    [
        p.omega_r * a + x * a - p.g - 4.0 * a * problem.f1(x),
        4.0 * a * a * problem.f2(x) - s,
    ]
}

fn jacobian(problem: &CvsProblem, a: f64, s: f64) -> [[f64; 2]; 2] {
    let p = &problem.model;
    let a2 = a * a;
    let x = dressed_splitting(p.delta, a2, s);
    let (f1, f2, f3) = (problem.f1(x), problem.f2(x), problem.f3(x));
    [
        [
            p.omega_r + x - 4.0 * a2 * x - 4.0 * f1 - 16.0 * a2 * x * f2,
            -2.0 * a * x - 8.0 * a * x * f2,
        ],
        [8.0 * a * f2 + 32.0 * a2 * a * x * f3, 16.0 * a2 * x * f3 - 1.0],
    ]
}

fn max_abs(r: [f64; 2]) -> f64 {
    r[0].abs().max(r[1].abs())
}

/// Root of `(w_r + D exp(-2a^2)) a = g` on `[0, g/w_r]`, the displacement of the
/// closed qubit-resonator model.
pub fn closed_model_alpha(p: &ModelParams) -> f64 {
    if p.g == 0.0 {
        return 0.0;
    }
    let phi = |a: f64| (p.omega_r + p.delta * (-2.0 * a * a).exp()) * a - p.g;
    let dphi = |a: f64| p.omega_r + p.delta * (-2.0 * a * a).exp() * (1.0 - 4.0 * a * a);
    let (mut lo, mut hi) = (0.0, p.g / p.omega_r);
    let mut a = p.g / (p.omega_r + p.delta);
    for _ in 0..200 {
        let v = phi(a);
        if v == 0.0 {
            return a;
        }
        if v < 0.0 {
            lo = a;
        } else {
            hi = a;
        }
        let d = dphi(a);
        let newton = a - v / d;
        a = if d > 0.0 && newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        if hi - lo <= 4.0 * f64::EPSILON * hi || (v / d).abs() <= 1e-17 * a.max(1e-300) {
            break;
        }
    }
    a
}

/// Dispatches on the relative coupling type and maps the result back to the
/// physical quadratures.
pub fn solve(problem: &CvsProblem) -> Result<CvsSolution> {
    let (a, mut sol) = if problem.bath_active() {
        solve_active(problem)?
    } else {
        solve_decoupled(problem)
    };
    sol.alpha_bar = physical(a, problem.model.qr_coupling);
    Ok(sol)
}

/// Solves with a waveguide that couples inductively to the resonator.
pub fn solve_inductive(problem: &CvsProblem) -> Result<CvsSolution> {
    if problem.env.rw_coupling() != Coupling::Inductive {
        return Err(Error::Domain("solve_inductive needs an inductive resonator-waveguide coupling".into()));
    }
    solve(problem)
}

/// Solves with a waveguide that couples capacitively to the resonator.
pub fn solve_capacitive(problem: &CvsProblem) -> Result<CvsSolution> {
    if problem.env.rw_coupling() != Coupling::Capacitive {
        return Err(Error::Domain("solve_capacitive needs a capacitive resonator-waveguide coupling".into()));
    }
    solve(problem)
}

fn solve_decoupled(problem: &CvsProblem) -> (f64, CvsSolution) {
    let p = &problem.model;
    let a = closed_model_alpha(p);
    let resid = ((p.omega_r + p.delta * (-2.0 * a * a).exp()) * a - p.g).abs();
    let energy = p.omega_r * a * a - 2.0 * p.g * a - 0.5 * p.delta * (-2.0 * a * a).exp();
    (
        a,
        CvsSolution {
            alpha_bar: Complex64::new(a, 0.0),
            s_bar: 0.0,
            coherence_c: 1.0,
            energy,
            iterations: 0,
            residual: resid,
            localized: false,
        },
    )
}

fn finish(problem: &CvsProblem, a: f64, s: f64, iterations: usize, residual: f64, localized: bool) -> (f64, CvsSolution) {
    let energy = cvs_energy(physical(a, problem.model.qr_coupling), s, problem);
    let coherence_c = if localized { 0.0 } else { (-2.0 * s).exp() };
    (
        a,
        CvsSolution {
            alpha_bar: Complex64::new(a, 0.0),
            s_bar: s,
            coherence_c,
            energy,
            iterations,
            residual,
            localized,
        },
    )
}

fn solve_active(problem: &CvsProblem) -> Result<(f64, CvsSolution)> {
    let p = &problem.model;
    if p.g == 0.0 {
        return Ok(finish(problem, 0.0, 0.0, 0, 0.0, false));
    }
    let renorm = p.omega_r - 4.0 * problem.f1(0.0);
    if renorm <= 0.0 {
        return Err(Error::Domain(format!(
            "bath pulls the resonator frequency to {renorm}; no bounded variational minimum"
        )));
    }
    if p.delta == 0.0 {
        // x = 0 identically: both equations are explicit.
        let a = p.g / renorm;
        let s = 4.0 * a * a * problem.f2(0.0);
        let localized = s.is_infinite();
        return Ok(finish(problem, a, s, 0, 0.0, localized));
    }

    // In the continuum the bath can localize the qubit (x -> 0, S -> infinity).
    // That branch has a = g / renorm and is self-consistent when the S equation
    // has no finite root there. It competes with the finite-S branch on energy.
    let localized = if problem.f_mode != FMode::DiscreteSum {
        let a = p.g / renorm;
        stationary_s(problem, a).is_infinite().then(|| finish(problem, a, f64::INFINITY, 0, 0.0, true))
    } else {
        None
    };
    let finite = newton(problem, p.g / (p.omega_r + p.delta), 0.0, MAX_ITER)
        .map(|(a, s, it, r)| finish(problem, a, s, it, r, false))
        .or_else(|e| {
            if localized.is_some() {
                return Err(e);
            }
            let (a, s) = bracket_solve(problem, renorm);
            if s.is_infinite() {
                return Err(e);
            }
            newton(problem, a, s, 50)
                .map(|(a, s, it, r)| finish(problem, a, s, MAX_ITER + it, r, false))
                .map_err(|_| e)
        });
    match (finite, localized) {
        (Ok(f), Some(l)) => Ok(if l.1.energy < f.1.energy { l } else { f }),
        (Ok(f), None) => Ok(f),
        (Err(_), Some(l)) => Ok(l),
        (Err(e), None) => Err(e),
    }
}

/// Damped Newton iteration on the stationary equations.
fn newton(problem: &CvsProblem, a0: f64, s0: f64, max_iter: usize) -> Result<(f64, f64, usize, f64)> {
    let (mut a, mut s) = (a0, s0);
    let mut r = residual(problem, a, s);
    let mut norm = max_abs(r);
    let mut checkpoint = norm;
    for it in 0..max_iter {
        if norm < TOLERANCE {
            return Ok((a, s, it, norm));
        }
        // Quadratic convergence makes 20 iterations without a tenfold gain a failure.
        if it > 0 && it % 20 == 0 {
            if norm > 0.1 * checkpoint {
                break;
            }
            checkpoint = norm;
        }
        let j = jacobian(problem, a, s);
        let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
        if det == 0.0 || !det.is_finite() {
            break;
        }
        let da = -(j[1][1] * r[0] - j[0][1] * r[1]) / det;
        let ds = -(-j[1][0] * r[0] + j[0][0] * r[1]) / det;
        let mut lambda = 1.0;
        let mut accepted = false;
        while lambda > 1e-12 {
            let a_new = a + lambda * da;
            let s_new = (s + lambda * ds).max(0.0);
            if a_new >= 0.0 && s_new <= S_CAP {
                let r_new = residual(problem, a_new, s_new);
                let n_new = max_abs(r_new);
                if n_new.is_finite() && n_new < norm {
                    a = a_new;
                    s = s_new;
                    r = r_new;
                    norm = n_new;
                    accepted = true;
                    break;
                }
            }
            lambda *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    if norm < TOLERANCE {
        return Ok((a, s, max_iter, norm));
    }
    Err(Error::NotConverged {
        iterations: max_iter,
        alpha: a,
        s,
        residual: norm,
    })
}

/// Bisection in `a` with the `S` equation solved exactly at each trial `a`.
///
/// Slower than Newton but immune to poor starting points, and it identifies the
/// localized phase (no finite root of the `S` equation).
fn bracket_solve(problem: &CvsProblem, renorm: f64) -> (f64, f64) {
    let p = &problem.model;
    let outer = |a: f64| {
        let s = stationary_s(problem, a);
        let x = dressed_splitting(p.delta, a * a, s);
        (p.omega_r * a + x * a - p.g - 4.0 * a * problem.f1(x), s)
    };
    let (mut lo, mut hi) = (0.0, p.g / renorm);
    let mut s_hi = outer(hi).1;
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let (v, s) = outer(mid);
        if v < 0.0 {
            lo = mid;
        } else {
            hi = mid;
            s_hi = s;
        }
    }
    (hi, s_hi)
}

/// First downward crossing of `h(S) = 4 a^2 f2(x(S)) - S`, which is the first
/// local minimum of the energy along `S` at fixed `a`. Infinite when `h` stays
/// positive.
fn stationary_s(problem: &CvsProblem, a: f64) -> f64 {
    let h = |s: f64| {
        let x = dressed_splitting(problem.model.delta, a * a, s);
        4.0 * a * a * problem.f2(x) - s
    };
    if h(0.0) <= 0.0 {
        return 0.0;
    }
    let (mut lo, mut hi) = (0.0, 0.5);
    while h(hi) > 0.0 {
        lo = hi;
        hi *= 2.0;
        if hi > S_CAP {
            return f64::INFINITY;
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if h(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Waveguide-mode amplitudes `b_k = -xi_k (alpha +/- alpha^*) / (w_k + x)` for
/// the discrete modes of the problem, `+` for inductive and `-` for capacitive
/// resonator-waveguide coupling.
pub fn beta_k(alpha: Complex64, s: f64, problem: &CvsProblem) -> Vec<Complex64> {
    let x = dressed_splitting(problem.model.delta, alpha.norm_sqr(), s);
    let quad = match problem.env.rw_coupling() {
        Coupling::Inductive => alpha + alpha.conj(),
        Coupling::Capacitive => alpha - alpha.conj(),
    };
    problem
        .env
        .modes
        .iter()
        .map(|m| -quad * m.xi / (m.omega + x))
        .collect()
}

/// Reduced qubit-resonator state
/// `(1+C)/2 |phi_0^-><phi_0^-| + (1-C)/2 |phi_0^+><phi_0^+|`.
pub fn build_zts(alpha_bar: Complex64, coherence_c: f64, resonator_dim: usize) -> Result<DensityMatrix> {
    if !(0.0..=1.0).contains(&coherence_c) {
        return Err(Error::Domain(format!("coherence must lie in [0, 1], got {coherence_c}")));
    }
    let minus = DensityMatrix::pure(&approx_eigenstate(0, Branch::Minus, alpha_bar, resonator_dim)?);
    let plus = DensityMatrix::pure(&approx_eigenstate(0, Branch::Plus, alpha_bar, resonator_dim)?);
    DensityMatrix::mixture(&[
        (0.5 * (1.0 + coherence_c), &minus),
        (0.5 * (1.0 - coherence_c), &plus),
    ])
}
