//! Exact diagonalization of the truncated qubit-resonator-waveguide Hamiltonian
//!
//! ```text
//! H = w_r a^dagger a + (D/2) sigma_x + g sigma_z X_qr + sum_k w_k b_k^dagger b_k
//!     + sum_k xi_k Q (x) Q_k
//! ```
//!
//! where `Q, Q_k` are the resonator and mode quadratures of the resonator-waveguide
//! coupling: `a + a^dagger` for inductive, `(a - a^dagger)/i` for capacitive. The
//! capacitive term equals `-xi_k (a - a^dagger)(b_k - b_k^dagger)`.

use std::collections::BTreeMap;
use std::io::{Read, Write};

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::environment::EnvSpectrum;
use crate::error::{Error, Result};
use crate::hilbert::{
    self, accumulate_product, mode_name, partial_trace_pure, DensityMatrix, Operator, SpaceLabel, StateVector, QUBIT,
    RESONATOR,
};
use crate::linalg;
use crate::rabi::{add_rabi_terms, approx_eigenstate, Branch, Coupling, ModelParams};

/// Largest total dimension [`assemble_total`] accepts.
pub const SIZE_LIMIT: usize = 20_000;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TruncationSpec {
    pub resonator_dim: usize,
    pub mode_dims: Vec<usize>,
}

impl TruncationSpec {
    pub fn new(resonator_dim: usize, mode_dims: Vec<usize>) -> Result<Self> {
        let t = Self {
            resonator_dim,
            mode_dims,
        };
        t.validate()?;
        Ok(t)
    }

    /// Standard truncation: 14 resonator levels, 3 levels in each of 4 modes.
    pub fn standard() -> Self {
        Self {
            resonator_dim: 14,
            mode_dims: vec![3; 4],
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.resonator_dim < 2 {
            return Err(Error::InvalidDimension {
                dim: self.resonator_dim,
                reason: "resonator needs at least two levels",
            });
        }
        if let Some(&d) = self.mode_dims.iter().find(|&&d| d < 2) {
            return Err(Error::InvalidDimension {
                dim: d,
                reason: "each waveguide mode needs at least two levels",
            });
        }
        Ok(())
    }

    pub fn space(&self) -> Result<SpaceLabel> {
        let mut parts = vec![(QUBIT.to_string(), 2), (RESONATOR.to_string(), self.resonator_dim)];
        parts.extend(self.mode_dims.iter().enumerate().map(|(k, &d)| (mode_name(k), d)));
        SpaceLabel::new(parts)
    }

    pub fn total_dim(&self) -> usize {
        2 * self.resonator_dim * self.mode_dims.iter().product::<usize>()
    }
}

/// Total Hamiltonian on `qubit (x) resonator (x) mode_1 (x) ... (x) mode_M`.
pub fn assemble_total(model: &ModelParams, env: &EnvSpectrum, trunc: &TruncationSpec) -> Result<Operator> {
    model.validate()?;
    trunc.validate()?;
    if env.modes.is_empty() {
        return Err(Error::Domain("diagonalization needs at least one waveguide mode".into()));
    }
    if env.modes.len() != trunc.mode_dims.len() {
        return Err(Error::Domain(format!(
            "{} waveguide modes but {} mode truncations",
            env.modes.len(),
            trunc.mode_dims.len()
        )));
    }
    let n = trunc.total_dim();
    if n > SIZE_LIMIT {
        return Err(Error::TooLarge { dim: n, limit: SIZE_LIMIT });
    }
    let space = trunc.space()?;
    let model = ModelParams {
        resonator_dim: trunc.resonator_dim,
        ..model.clone()
    };
    let mut h = DMatrix::zeros(n, n);
    add_rabi_terms(&mut h, &space, &model)?;

    let q_res = env.rw_coupling().quadrature(trunc.resonator_dim);
    for (k, (mode, &dim)) in env.modes.iter().zip(&trunc.mode_dims).enumerate() {
        let name = mode_name(k);
        let num = hilbert::number_op(dim)?.into_matrix();
        accumulate_product(&mut h, &space, &[(name.as_str(), &num)], Complex64::new(mode.omega, 0.0))?;
        if mode.xi != 0.0 {
            let q_mode = env.rw_coupling().quadrature(dim);
            accumulate_product(
                &mut h,
                &space,
                &[(RESONATOR, &q_res), (name.as_str(), &q_mode)],
                Complex64::new(mode.xi, 0.0),
            )?;
        }
    }
    Operator::hermitian(space, h)
}

#[derive(Clone, Debug)]
pub struct Ground {
    pub energy: f64,
    pub state: StateVector,
    /// Distance to the first excited level.
    pub gap: f64,
    /// Gap below `1e-10` of the spectral range: the returned vector is one
    /// arbitrary member of a (near) degenerate pair.
    pub near_degenerate: bool,
}

/// Lowest eigenpair of a hermitian operator.
pub fn ground_state(h: &Operator) -> Result<Ground> {
    let n = h.space().dim();
    let count = n.min(2);
    let eig = linalg::lowest_eigenpairs(h, count)?;
    let energy = eig.values[0];
    let gap = if count > 1 { eig.values[1] - eig.values[0] } else { f64::INFINITY };
    let range = 2.0 * linalg::spectral_bound(h.matrix());
    let state = StateVector::normalized(h.space().clone(), eig.vectors.column(0).into_owned())?;
    Ok(Ground {
        energy,
        state,
        gap,
        near_degenerate: gap < 1e-10 * range,
    })
}

/// Reduced qubit-resonator state of a state on the full space.
pub fn reduce_to_qr(ground: &StateVector) -> Result<DensityMatrix> {
    partial_trace_pure(ground, &[QUBIT, RESONATOR])
}

/// Populations `<phi_n^s| rho |phi_n^s>` of displaced-Fock eigenstates.
pub fn excited_fractions(
    rho_qr: &DensityMatrix,
    alpha: Complex64,
    labels: &[(usize, Branch)],
) -> Result<BTreeMap<(usize, Branch), f64>> {
    let dim = rho_qr
        .space()
        .subsystems()
        .iter()
        .find(|s| s.name == RESONATOR)
        .map(|s| s.dim)
        .ok_or_else(|| Error::Label("reduced state has no resonator".into()))?;
    let mut out = BTreeMap::new();
    for &(n, branch) in labels {
        let phi = approx_eigenstate(n, branch, alpha, dim)?;
        out.insert((n, branch), rho_qr.overlap(&phi)?);
    }
    Ok(out)
}

/// Labels reported by default: `(0,-)`, `(0,+)`, `(1,-)`, `(1,+)`.
pub const DEFAULT_LABELS: [(usize, Branch); 4] = [
    (0, Branch::Minus),
    (0, Branch::Plus),
    (1, Branch::Minus),
    (1, Branch::Plus),
];

#[derive(Clone, Debug)]
pub struct GroundReport {
    pub energy: f64,
    pub ground: Ground,
    pub rho_qr: DensityMatrix,
    pub fractions: BTreeMap<(usize, Branch), f64>,
}

impl GroundReport {
    pub fn n_virtual(&self) -> Result<f64> {
        let dim = self.rho_qr.dim() / 2;
        let num = hilbert::number_op(dim)?.embed(self.rho_qr.space())?;
        Ok(self.rho_qr.expectation(&num)?.re)
    }

    pub fn purity(&self) -> f64 {
        self.rho_qr.purity()
    }
}

/// Assembles, diagonalizes, reduces and projects onto displaced-Fock states at `alpha`.
pub fn analyze(model: &ModelParams, env: &EnvSpectrum, trunc: &TruncationSpec, alpha: Complex64) -> Result<GroundReport> {
    let h = assemble_total(model, env, trunc)?;
    let ground = ground_state(&h)?;
    drop(h);
    let rho_qr = reduce_to_qr(&ground.state)?;
    let fractions = excited_fractions(&rho_qr, alpha, &DEFAULT_LABELS)?;
    Ok(GroundReport {
        energy: ground.energy,
        ground,
        rho_qr,
        fractions,
    })
}

/// Total parity `sigma_x (x) exp(i pi a^dagger a) (x) prod_k exp(i pi b_k^dagger b_k)`
/// evaluated in a state on the full space.
pub fn total_parity(state: &StateVector) -> f64 {
    let space = state.space();
    let strides = space.strides();
    let dims = space.dims();
    let amps = state.amplitudes();
    let n = amps.len();
    let qubit_stride = strides[0];
    let mut acc = Complex64::new(0.0, 0.0);
    for i in 0..n {
        // sigma_x flips the qubit digit; parities multiply by (-1)^(photons)
        let qubit = i / qubit_stride;
        let j = if qubit == 0 { i + qubit_stride } else { i - qubit_stride };
        let photons: usize = (1..dims.len()).map(|s| (i / strides[s]) % dims[s]).sum();
        let sign = if photons.is_multiple_of(2) { 1.0 } else { -1.0 };
        acc += amps[i].conj() * amps[j] * sign;
    }
    acc.re
}

const DUMP_MAGIC: &[u8; 8] = b"DSCDUMP1";

/// Writes `(H, ground)` in a little-endian binary layout:
///
/// ```text
/// 8 bytes   magic "DSCDUMP1"
/// u32       number of subsystems M
/// M x u64   subsystem dimensions in tensor order
/// u8        qubit-resonator coupling (0 inductive, 1 capacitive)
/// u8        resonator-waveguide coupling (0 inductive, 1 capacitive)
/// N*N x 2 f64   H row-major, each entry as (re, im)
/// N x 2 f64     ground vector, each entry as (re, im)
/// ```
pub fn write_dump<W: Write>(out: &mut W, h: &Operator, ground: &StateVector, qr: Coupling, rw: Coupling) -> Result<()> {
    let dims = h.space().dims();
    out.write_all(DUMP_MAGIC)?;
    out.write_all(&(dims.len() as u32).to_le_bytes())?;
    for d in &dims {
        out.write_all(&(*d as u64).to_le_bytes())?;
    }
    out.write_all(&[coupling_code(qr), coupling_code(rw)])?;
    let m = h.matrix();
    let n = m.nrows();
    let mut buf = Vec::with_capacity(16 * n);
    for i in 0..n {
        buf.clear();
        for j in 0..n {
            buf.extend_from_slice(&m[(i, j)].re.to_le_bytes());
            buf.extend_from_slice(&m[(i, j)].im.to_le_bytes());
        }
        out.write_all(&buf)?;
    }
    for z in ground.amplitudes().iter() {
        out.write_all(&z.re.to_le_bytes())?;
        out.write_all(&z.im.to_le_bytes())?;
    }
    Ok(())
}

pub struct Dump {
    pub dims: Vec<usize>,
    pub qr: Coupling,
    pub rw: Coupling,
    pub hamiltonian: DMatrix<Complex64>,
    pub ground: Vec<Complex64>,
}

pub fn read_dump<R: Read>(input: &mut R) -> Result<Dump> {
    let bad = |m: &str| Error::Domain(format!("malformed dump: {m}"));
    let mut magic = [0u8; 8];
    input.read_exact(&mut magic)?;
    if &magic != DUMP_MAGIC {
        return Err(bad("magic"));
    }
    let mut u32b = [0u8; 4];
    input.read_exact(&mut u32b)?;
    let count = u32::from_le_bytes(u32b) as usize;
    let mut dims = Vec::with_capacity(count);
    let mut u64b = [0u8; 8];
    for _ in 0..count {
        input.read_exact(&mut u64b)?;
        dims.push(u64::from_le_bytes(u64b) as usize);
    }
    let mut codes = [0u8; 2];
    input.read_exact(&mut codes)?;
    let decode = |c: u8| match c {
        0 => Ok(Coupling::Inductive),
        1 => Ok(Coupling::Capacitive),
        _ => Err(bad("coupling code")),
    };
    let n: usize = dims.iter().product();
    let mut read_c = || -> Result<Complex64> {
        let mut re = [0u8; 8];
        let mut im = [0u8; 8];
        input.read_exact(&mut re)?;
        input.read_exact(&mut im)?;
        Ok(Complex64::new(f64::from_le_bytes(re), f64::from_le_bytes(im)))
    };
    let mut entries = Vec::with_capacity(n * n);
    for _ in 0..n * n {
        entries.push(read_c()?);
    }
    let hamiltonian = DMatrix::from_row_slice(n, n, &entries);
    let ground = (0..n).map(|_| read_c()).collect::<Result<Vec<_>>>()?;
    Ok(Dump {
        dims,
        qr: decode(codes[0])?,
        rw: decode(codes[1])?,
        hamiltonian,
        ground,
    })
}

fn coupling_code(c: Coupling) -> u8 {
    match c {
        Coupling::Inductive => 0,
        Coupling::Capacitive => 1,
    }
}
