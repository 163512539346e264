//! Quantum Rabi model `H = w_r a^dagger a + (D/2) sigma_x + g sigma_z X` on
//! qubit (x) resonator, its displaced-Fock approximate eigenstates for deep
//! strong coupling, and transition amplitudes between them.

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hilbert::{
    self, accumulate_product, annihilation_matrix, displacement_matrix, pauli, Operator, Pauli,
    SpaceLabel, StateVector, QUBIT, RESONATOR,
};

/// Which resonator quadrature a coupling acts through.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Coupling {
    /// `X_I = a + a^dagger`
    Inductive,
    /// `X_C = (a - a^dagger) / i`
    Capacitive,
}

impl Coupling {
    pub fn as_str(self) -> &'static str {
        match self {
            Coupling::Inductive => "inductive",
            Coupling::Capacitive => "capacitive",
        }
    }

    pub fn other(self) -> Coupling {
        match self {
            Coupling::Inductive => Coupling::Capacitive,
            Coupling::Capacitive => Coupling::Inductive,
        }
    }

    /// The coupling quadrature as a matrix on a `dim`-level resonator.
    pub fn quadrature(self, dim: usize) -> DMatrix<Complex64> {
        let a = annihilation_matrix(dim);
        let ad = a.adjoint();
        match self {
            Coupling::Inductive => &a + &ad,
            Coupling::Capacitive => (&ad - &a) * Complex64::new(0.0, 1.0),
        }
    }
}

impl fmt::Display for Coupling {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Coupling {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "inductive" => Ok(Coupling::Inductive),
            "capacitive" => Ok(Coupling::Capacitive),
            other => Err(Error::Domain(format!(
                "unknown coupling `{other}` (expected inductive or capacitive)"
            ))),
        }
    }
}

/// Qubit-resonator parameters in internal angular units.
///
/// `delta = 0` is accepted here so the degenerate limits can be studied; the
/// configuration layer rejects it for runs.
#[derive(Clone, Debug, PartialEq)]
pub struct ModelParams {
    pub omega_r: f64,
    pub delta: f64,
    pub g: f64,
    pub qr_coupling: Coupling,
    pub resonator_dim: usize,
}

impl ModelParams {
    pub fn new(omega_r: f64, delta: f64, g: f64, qr_coupling: Coupling, resonator_dim: usize) -> Result<Self> {
        let p = Self {
            omega_r,
            delta,
            g,
            qr_coupling,
            resonator_dim,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.omega_r > 0.0 && self.omega_r.is_finite()) {
            return Err(Error::Domain(format!("omega_r must be positive, got {}", self.omega_r)));
        }
        if !(self.delta >= 0.0 && self.delta.is_finite()) {
            return Err(Error::Domain(format!("delta must be non-negative, got {}", self.delta)));
        }
        if !(self.g >= 0.0 && self.g.is_finite()) {
            return Err(Error::Domain(format!("g must be non-negative, got {}", self.g)));
        }
        if self.resonator_dim < 2 {
            return Err(Error::InvalidDimension {
                dim: self.resonator_dim,
                reason: "resonator needs at least two levels",
            });
        }
        Ok(())
    }

    /// The displacement `g / omega_r` of the decoupled-qubit limit.
    pub fn alpha0(&self) -> f64 {
        self.g / self.omega_r
    }

    pub fn qr_space(&self) -> SpaceLabel {
        qr_space(self.resonator_dim)
    }
}

pub fn qr_space(resonator_dim: usize) -> SpaceLabel {
    SpaceLabel::new([(QUBIT, 2), (RESONATOR, resonator_dim)]).expect("valid labels")
}

/// Adds the Rabi Hamiltonian terms to a matrix on any space containing the
/// qubit and resonator subsystems.
pub(crate) fn add_rabi_terms(target: &mut DMatrix<Complex64>, space: &SpaceLabel, p: &ModelParams) -> Result<()> {
    let d = p.resonator_dim;
    let num = hilbert::number_op(d)?.into_matrix();
    let sx = pauli(Pauli::X).into_matrix();
    let sz = pauli(Pauli::Z).into_matrix();
    let x = p.qr_coupling.quadrature(d);
    let re = |v: f64| Complex64::new(v, 0.0);
    accumulate_product(target, space, &[(RESONATOR, &num)], re(p.omega_r))?;
    if p.delta != 0.0 {
        accumulate_product(target, space, &[(QUBIT, &sx)], re(0.5 * p.delta))?;
    }
    if p.g != 0.0 {
        accumulate_product(target, space, &[(QUBIT, &sz), (RESONATOR, &x)], re(p.g))?;
    }
    Ok(())
}

/// Rabi Hamiltonian on qubit (x) resonator.
pub fn build_rabi(params: &ModelParams) -> Result<Operator> {
    params.validate()?;
    let space = params.qr_space();
    let n = space.dim();
    let mut m = DMatrix::zeros(n, n);
    add_rabi_terms(&mut m, &space, params)?;
    Operator::hermitian(space, m)
}

/// Laguerre polynomial `L_n(x)` by forward recurrence.
pub fn laguerre(n: usize, x: f64) -> Result<f64> {
    const MAX_ORDER: usize = 50;
    if n > MAX_ORDER {
        return Err(Error::OutOfRange {
            what: "Laguerre order",
            value: n,
            max: MAX_ORDER,
        });
    }
    let (mut prev, mut cur) = (1.0, 1.0 - x);
    if n == 0 {
        return Ok(prev);
    }
    for k in 1..n {
        let kf = k as f64;
        let next = ((2.0 * kf + 1.0 - x) * cur - kf * prev) / (kf + 1.0);
        prev = cur;
        cur = next;
    }
    Ok(cur)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Branch {
    Minus,
    Plus,
}

impl Branch {
    fn sign(self) -> f64 {
        match self {
            Branch::Plus => 1.0,
            Branch::Minus => -1.0,
        }
    }

    pub fn symbol(self) -> char {
        match self {
            Branch::Plus => '+',
            Branch::Minus => '-',
        }
    }
}

/// `(|up> (x) D(-alpha)|n> +/- |down> (x) D(alpha)|n>) / sqrt 2`.
pub fn approx_eigenstate(n: usize, branch: Branch, alpha: Complex64, resonator_dim: usize) -> Result<StateVector> {
    if n >= resonator_dim {
        return Err(Error::OutOfRange {
            what: "Fock index",
            value: n,
            max: resonator_dim.saturating_sub(1),
        });
    }
    let d_plus = displacement_matrix(alpha, resonator_dim)?;
    // D(-alpha) = D(alpha)^dagger
    let d_minus = d_plus.adjoint();
    let up = d_minus.column(n).into_owned();
    let down = d_plus.column(n).into_owned();
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut amps = nalgebra::DVector::zeros(2 * resonator_dim);
    for k in 0..resonator_dim {
        amps[k] = up[k] * s;
        amps[resonator_dim + k] = down[k] * (s * branch.sign());
    }
    StateVector::normalized(qr_space(resonator_dim), amps)
}

/// First-order energy `n w_r - g^2/w_r +/- (D/2) e^{-2 a^2} L_n(4 a^2)` with `a = g/w_r`.
pub fn approx_eigenenergy(n: usize, branch: Branch, params: &ModelParams) -> Result<f64> {
    let a2 = params.alpha0().powi(2);
    let l = laguerre(n, 4.0 * a2)?;
    Ok(n as f64 * params.omega_r - params.g * params.g / params.omega_r
        + branch.sign() * 0.5 * params.delta * (-2.0 * a2).exp() * l)
}

/// `<bra| X |ket>`.
pub fn transition_amplitude(bra: &StateVector, x: &Operator, ket: &StateVector) -> Result<Complex64> {
    x.matrix_element(bra, ket)
}

/// A coupling quadrature lifted to qubit (x) resonator.
pub fn quadrature_qr(coupling: Coupling, resonator_dim: usize) -> Result<Operator> {
    let op = Operator::hermitian(SpaceLabel::single(RESONATOR, resonator_dim)?, coupling.quadrature(resonator_dim))?;
    op.embed(&qr_space(resonator_dim))
}

/// Parity `sigma_x (x) exp(i pi a^dagger a)` on qubit (x) resonator.
pub fn parity_qr(resonator_dim: usize) -> Result<Operator> {
    hilbert::tensor_ops(&[&pauli(Pauli::X), &hilbert::parity_op(resonator_dim)?])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::hermitian_eig;
    use approx::assert_relative_eq;

    fn params(g: f64, delta: f64, coupling: Coupling, dim: usize) -> ModelParams {
        ModelParams::new(1.0, delta, g, coupling, dim).unwrap()
    }

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn decoupled_spectrum() {
        let h = build_rabi(&params(0.0, 0.2, Coupling::Inductive, 10)).unwrap();
        let eig = hermitian_eig(&h).unwrap();
        let mut expect: Vec<f64> = (0..10).flat_map(|n| [n as f64 - 0.1, n as f64 + 0.1]).collect();
        expect.sort_by(f64::total_cmp);
        for (a, b) in eig.values.iter().zip(&expect) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn displaced_oscillator_ground() {
        let h = build_rabi(&params(1.0, 0.0, Coupling::Inductive, 30)).unwrap();
        let eig = hermitian_eig(&h).unwrap();
        assert_relative_eq!(eig.values[0], -1.0, epsilon = 1e-8);
    }

    #[test]
    fn coupling_types_isospectral() {
        for g in [0.3, 1.0, 1.7] {
            let hi = hermitian_eig(&build_rabi(&params(g, 0.2, Coupling::Inductive, 20)).unwrap()).unwrap();
            let hc = hermitian_eig(&build_rabi(&params(g, 0.2, Coupling::Capacitive, 20)).unwrap()).unwrap();
            for (a, b) in hi.values.iter().zip(&hc.values) {
                assert!((a - b).abs() < 1e-8, "g={g}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn parity_commutes() {
        for coupling in [Coupling::Inductive, Coupling::Capacitive] {
            let h = build_rabi(&params(1.3, 0.2, coupling, 16)).unwrap();
            let p = parity_qr(16).unwrap();
            let comm = h.times(&p).unwrap().minus(&p.times(&h).unwrap()).unwrap();
            assert!(comm.matrix().norm() < 1e-10);
        }
    }

    #[test]
    fn laguerre_values() {
        assert_eq!(laguerre(0, 3.7).unwrap(), 1.0);
        assert_relative_eq!(laguerre(1, 2.0).unwrap(), -1.0);
        assert_relative_eq!(laguerre(2, 2.0).unwrap(), -1.0);
        // L_3(x) = 1 - 3x + 3x^2/2 - x^3/6
        let x = 0.7;
        assert_relative_eq!(
            laguerre(3, x).unwrap(),
            1.0 - 3.0 * x + 1.5 * x * x - x * x * x / 6.0,
            epsilon = 1e-14
        );
        assert!(matches!(laguerre(51, 1.0), Err(Error::OutOfRange { .. })));
    }

    #[test]
    fn eigenstate_at_zero_displacement() {
        let s = approx_eigenstate(0, Branch::Minus, c(0.0), 5).unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert_relative_eq!(s.amplitudes()[0].re, h, epsilon = 1e-15);
        assert_relative_eq!(s.amplitudes()[5].re, -h, epsilon = 1e-15);
        let others: f64 = s.amplitudes().iter().map(|z| z.norm()).sum::<f64>() - 2.0 * h;
        assert!(others.abs() < 1e-14);
    }

    #[test]
    fn eigenstate_photon_number_and_orthogonality() {
        let alpha = c(1.0);
        let minus = approx_eigenstate(0, Branch::Minus, alpha, 30).unwrap();
        let plus = approx_eigenstate(0, Branch::Plus, alpha, 30).unwrap();
        let n = hilbert::number_op(30).unwrap().embed(&qr_space(30)).unwrap();
        assert_relative_eq!(n.expectation(&minus).unwrap().re, 1.0, epsilon = 1e-8);
        assert!(plus.inner(&minus).unwrap().norm() < 1e-14);
    }

    #[test]
    fn eigenstate_overlaps_exact_ground() {
        let p = params(1.0, 0.2, Coupling::Inductive, 30);
        let eig = hermitian_eig(&build_rabi(&p).unwrap()).unwrap();
        let ground = eig.vectors.column(0);
        let approx = approx_eigenstate(0, Branch::Minus, c(1.0), 30).unwrap();
        let ov = approx.amplitudes().dotc(&ground).norm_sqr();
        assert!(ov > 0.99, "overlap {ov}");
    }

    #[test]
    fn approximate_energies() {
        let p = params(1.0, 0.2, Coupling::Inductive, 30);
        let e0m = approx_eigenenergy(0, Branch::Minus, &p).unwrap();
        assert_relative_eq!(e0m, -1.0 - 0.1 * (-2.0f64).exp(), epsilon = 1e-15);
        let e0p = approx_eigenenergy(0, Branch::Plus, &p).unwrap();
        assert_relative_eq!(e0p - e0m, 0.2 * (-2.0f64).exp(), epsilon = 1e-15);
        let gap1 = approx_eigenenergy(1, Branch::Plus, &p).unwrap() - approx_eigenenergy(1, Branch::Minus, &p).unwrap();
        assert_relative_eq!(gap1, 0.2 * (-2.0f64).exp() * (1.0 - 4.0), epsilon = 1e-15);
    }

    #[test]
    fn approximate_energy_tracks_exact_ground() {
        // small qubit splitting keeps the neglected second-order shift well inside the bound
        for g in [1.0, 1.2] {
            let p = params(g, 0.05, Coupling::Inductive, 40);
            let exact = hermitian_eig(&build_rabi(&p).unwrap()).unwrap().values[0];
            let approx = approx_eigenenergy(0, Branch::Minus, &p).unwrap();
            let bound = 0.05 * (-2.0 * g * g).exp() * 0.1;
            assert!((exact - approx).abs() < bound, "g={g}: {exact} vs {approx}");
        }
    }

    #[test]
    fn transition_table() {
        let dim = 30;
        let xi = quadrature_qr(Coupling::Inductive, dim).unwrap();
        let xc = quadrature_qr(Coupling::Capacitive, dim).unwrap();

        let rspace = SpaceLabel::single(RESONATOR, dim).unwrap();
        let f0 = StateVector::basis(rspace.clone(), 0).unwrap();
        let f1 = StateVector::basis(rspace.clone(), 1).unwrap();
        for coupling in [Coupling::Inductive, Coupling::Capacitive] {
            let x = Operator::hermitian(rspace.clone(), coupling.quadrature(dim)).unwrap();
            assert_relative_eq!(transition_amplitude(&f1, &x, &f0).unwrap().norm_sqr(), 1.0, epsilon = 1e-12);
        }

        let alpha = c(1.0);
        let m0 = approx_eigenstate(0, Branch::Minus, alpha, dim).unwrap();
        let p0 = approx_eigenstate(0, Branch::Plus, alpha, dim).unwrap();
        let m1 = approx_eigenstate(1, Branch::Minus, alpha, dim).unwrap();
        assert_relative_eq!(transition_amplitude(&p0, &xi, &m0).unwrap().norm_sqr(), 4.0, epsilon = 1e-6);
        assert!(transition_amplitude(&p0, &xc, &m0).unwrap().norm_sqr() < 1e-10);
        assert_relative_eq!(transition_amplitude(&m1, &xc, &m0).unwrap().norm_sqr(), 1.0, epsilon = 1e-6);
    }

    #[test]
    fn params_validation() {
        assert!(ModelParams::new(0.0, 0.2, 1.0, Coupling::Inductive, 10).is_err());
        assert!(ModelParams::new(1.0, -0.1, 1.0, Coupling::Inductive, 10).is_err());
        assert!(ModelParams::new(1.0, 0.2, -1.0, Coupling::Inductive, 10).is_err());
        assert!(ModelParams::new(1.0, 0.2, 1.0, Coupling::Inductive, 1).is_err());
        assert_eq!("capacitive".parse::<Coupling>().unwrap(), Coupling::Capacitive);
    }
}
