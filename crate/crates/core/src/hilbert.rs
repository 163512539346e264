//! Truncated Fock-space linear algebra.
//!
//! Every operator, state and density matrix carries a [`SpaceLabel`]: an ordered
//! list of named subsystems. Basis indices are row-major over that list, so the
//! first subsystem is the most significant digit (the convention of the
//! Kronecker product). Throughout the crate the order is fixed as
//! `(qubit, resonator, mode_1, ..., mode_M)`.
//!
//! Qubit convention: `|up> = (1, 0)` and `|down> = (0, 1)` are the `sigma_z`
//! eigenstates with eigenvalues `+1` and `-1`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg;

pub const QUBIT: &str = "qubit";
pub const RESONATOR: &str = "resonator";

/// Name of the `k`-th waveguide mode (zero-based index, one-based name).
pub fn mode_name(k: usize) -> String {
    format!("mode_{}", k + 1)
}

/// Maximum elementwise `|A - A^dagger|` accepted for a hermitian flag.
pub const HERMITIAN_TOL: f64 = 1e-12;
/// Allowed deviation of a state norm from one.
pub const NORM_TOL: f64 = 1e-12;
/// Allowed deviation of a density-matrix trace from one.
pub const TRACE_TOL: f64 = 1e-10;

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };
const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Subsystem {
    pub name: String,
    pub dim: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SpaceLabel {
    subsystems: Vec<Subsystem>,
}

impl SpaceLabel {
    pub fn new<S: Into<String>>(parts: impl IntoIterator<Item = (S, usize)>) -> Result<Self> {
        let mut subsystems: Vec<Subsystem> = Vec::new();
        for (name, dim) in parts {
            let name = name.into();
            if dim == 0 {
                return Err(Error::InvalidDimension {
                    dim,
                    reason: "subsystem dimension must be positive",
                });
            }
            if subsystems.iter().any(|s| s.name == name) {
                return Err(Error::Label(format!("duplicate subsystem name `{name}`")));
            }
            subsystems.push(Subsystem { name, dim });
        }
        Ok(Self { subsystems })
    }

    pub fn single(name: &str, dim: usize) -> Result<Self> {
        Self::new([(name, dim)])
    }

    /// The empty product space (dimension one), the result of tracing out everything.
    pub fn trivial() -> Self {
        Self {
            subsystems: Vec::new(),
        }
    }

    pub fn subsystems(&self) -> &[Subsystem] {
        &self.subsystems
    }

    pub fn dims(&self) -> Vec<usize> {
        self.subsystems.iter().map(|s| s.dim).collect()
    }

    pub fn dim(&self) -> usize {
        self.subsystems.iter().map(|s| s.dim).product()
    }

    pub fn position(&self, name: &str) -> Option<usize> {
        self.subsystems.iter().position(|s| s.name == name)
    }

    /// Row-major stride of each subsystem.
    pub fn strides(&self) -> Vec<usize> {
        let mut strides = vec![1; self.subsystems.len()];
        for k in (0..self.subsystems.len().saturating_sub(1)).rev() {
            strides[k] = strides[k + 1] * self.subsystems[k + 1].dim;
        }
        strides
    }

    pub fn concat(&self, other: &SpaceLabel) -> Result<SpaceLabel> {
        Self::new(
            self.subsystems
                .iter()
                .chain(other.subsystems.iter())
                .map(|s| (s.name.clone(), s.dim)),
        )
    }

    /// Same dimensions under new names.
    pub fn renamed(&self, names: &[&str]) -> Result<SpaceLabel> {
        if names.len() != self.subsystems.len() {
            return Err(Error::Label(format!(
                "expected {} names, got {}",
                self.subsystems.len(),
                names.len()
            )));
        }
        Self::new(names.iter().zip(&self.subsystems).map(|(n, s)| (n.to_string(), s.dim)))
    }

    /// Sub-space made of the named subsystems, in this space's order.
    fn select(&self, keep: &[&str]) -> Result<(SpaceLabel, Vec<bool>)> {
        for name in keep {
            if self.position(name).is_none() {
                return Err(Error::Label(format!("unknown subsystem `{name}`")));
            }
        }
        let mask: Vec<bool> = self
            .subsystems
            .iter()
            .map(|s| keep.contains(&s.name.as_str()))
            .collect();
        let kept = Self::new(
            self.subsystems
                .iter()
                .zip(&mask)
                .filter(|(_, &k)| k)
                .map(|(s, _)| (s.name.clone(), s.dim)),
        )?;
        Ok((kept, mask))
    }

    /// Full-space index offsets contributed by the masked subsystems, enumerated
    /// in row-major order over those subsystems.
    fn offsets(&self, mask: &[bool]) -> Vec<usize> {
        let strides = self.strides();
        let mut offsets = vec![0usize];
        for (k, s) in self.subsystems.iter().enumerate() {
            if !mask[k] {
                continue;
            }
            let mut next = Vec::with_capacity(offsets.len() * s.dim);
            for &base in &offsets {
                for d in 0..s.dim {
                    next.push(base + d * strides[k]);
                }
            }
            offsets = next;
        }
        offsets
    }
}

fn max_hermitian_defect(m: &DMatrix<Complex64>) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0f64;
    for j in 0..n {
        for i in 0..=j {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

#[derive(Clone, Debug)]
pub struct Operator {
    space: SpaceLabel,
    matrix: DMatrix<Complex64>,
    hermitian: bool,
}

impl Operator {
    pub fn new(space: SpaceLabel, matrix: DMatrix<Complex64>) -> Result<Self> {
        let n = space.dim();
        if matrix.nrows() != n || matrix.ncols() != n {
            return Err(Error::InvalidDimension {
                dim: matrix.nrows(),
                reason: "matrix shape does not match the space label",
            });
        }
        Ok(Self {
            space,
            matrix,
            hermitian: false,
        })
    }

    /// Builds an operator and sets the hermitian flag, checking it to [`HERMITIAN_TOL`].
    pub fn hermitian(space: SpaceLabel, matrix: DMatrix<Complex64>) -> Result<Self> {
        Self::new(space, matrix)?.into_hermitian()
    }

    pub fn identity(space: SpaceLabel) -> Self {
        let n = space.dim();
        Self {
            space,
            matrix: DMatrix::identity(n, n),
            hermitian: true,
        }
    }

    pub fn into_hermitian(mut self) -> Result<Self> {
        let defect = max_hermitian_defect(&self.matrix);
        if defect >= HERMITIAN_TOL {
            return Err(Error::NotHermitian { defect });
        }
        self.hermitian = true;
        Ok(self)
    }

    pub fn space(&self) -> &SpaceLabel {
        &self.space
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    pub fn into_matrix(self) -> DMatrix<Complex64> {
        self.matrix
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermitian
    }

    pub fn hermiticity_defect(&self) -> f64 {
        max_hermitian_defect(&self.matrix)
    }

    pub fn adjoint(&self) -> Operator {
        Operator {
            space: self.space.clone(),
            matrix: self.matrix.adjoint(),
            hermitian: self.hermitian,
        }
    }

    pub fn relabeled(self, names: &[&str]) -> Result<Self> {
        Ok(Self {
            space: self.space.renamed(names)?,
            ..self
        })
    }

    fn check_same_space(&self, other: &SpaceLabel) -> Result<()> {
        if &self.space != other {
            return Err(Error::Label(format!(
                "space mismatch: {:?} vs {:?}",
                self.space.subsystems, other.subsystems
            )));
        }
        Ok(())
    }

    pub fn plus(&self, other: &Operator) -> Result<Operator> {
        self.check_same_space(&other.space)?;
        Ok(Operator {
            space: self.space.clone(),
            matrix: &self.matrix + &other.matrix,
            hermitian: self.hermitian && other.hermitian,
        })
    }

    pub fn minus(&self, other: &Operator) -> Result<Operator> {
        self.check_same_space(&other.space)?;
        Ok(Operator {
            space: self.space.clone(),
            matrix: &self.matrix - &other.matrix,
            hermitian: self.hermitian && other.hermitian,
        })
    }

    /// Operator product `self * other`. The hermitian flag is dropped.
    pub fn times(&self, other: &Operator) -> Result<Operator> {
        self.check_same_space(&other.space)?;
        Ok(Operator {
            space: self.space.clone(),
            matrix: &self.matrix * &other.matrix,
            hermitian: false,
        })
    }

    pub fn scaled(&self, factor: Complex64) -> Operator {
        Operator {
            space: self.space.clone(),
            matrix: &self.matrix * factor,
            hermitian: self.hermitian && factor.im == 0.0,
        }
    }

    pub fn scaled_re(&self, factor: f64) -> Operator {
        self.scaled(Complex64::new(factor, 0.0))
    }

    /// `A |psi>` as a raw (unnormalized) vector.
    pub fn apply(&self, state: &StateVector) -> Result<DVector<Complex64>> {
        self.check_same_space(&state.space)?;
        Ok(&self.matrix * &state.amplitudes)
    }

    /// `<bra| A |ket>`.
    pub fn matrix_element(&self, bra: &StateVector, ket: &StateVector) -> Result<Complex64> {
        self.check_same_space(&bra.space)?;
        let applied = self.apply(ket)?;
        Ok(bra.amplitudes.dotc(&applied))
    }

    pub fn expectation(&self, state: &StateVector) -> Result<Complex64> {
        self.matrix_element(state, state)
    }

    /// Lifts a single-subsystem (or sub-space) operator to `space` by padding
    /// with identities on the other subsystems.
    pub fn embed(&self, space: &SpaceLabel) -> Result<Operator> {
        let mut target = DMatrix::zeros(space.dim(), space.dim());
        let names: Vec<&str> = self.space.subsystems.iter().map(|s| s.name.as_str()).collect();
        if names.len() == 1 {
            accumulate_product(&mut target, space, &[(names[0], &self.matrix)], ONE)?;
        } else {
            // General sub-space: the embedded subsystems must be contiguous and in order.
            let first = space
                .position(names[0])
                .ok_or_else(|| Error::Label(format!("unknown subsystem `{}`", names[0])))?;
            for (k, n) in names.iter().enumerate() {
                let s = space.subsystems.get(first + k);
                if s.map(|s| s.name.as_str()) != Some(n) {
                    return Err(Error::Label(
                        "multi-subsystem embedding requires a contiguous block".into(),
                    ));
                }
            }
            let before = SpaceLabel::new(space.subsystems[..first].iter().map(|s| (s.name.clone(), s.dim)))?;
            let after = SpaceLabel::new(
                space.subsystems[first + names.len()..]
                    .iter()
                    .map(|s| (s.name.clone(), s.dim)),
            )?;
            let left = DMatrix::<Complex64>::identity(before.dim(), before.dim());
            let right = DMatrix::<Complex64>::identity(after.dim(), after.dim());
            target = left.kronecker(&self.matrix).kronecker(&right);
        }
        Ok(Operator {
            space: space.clone(),
            matrix: target,
            hermitian: self.hermitian,
        })
    }
}

/// Adds `coeff * (factor_1 (x) factor_2 (x) ...)` to `target`, with the identity
/// on every subsystem of `space` not named among the factors.
///
/// Works entry by entry over the nonzeros of the factors, so sparse factors
/// (ladder operators, Paulis) stay cheap even on large product spaces.
pub fn accumulate_product(
    target: &mut DMatrix<Complex64>,
    space: &SpaceLabel,
    factors: &[(&str, &DMatrix<Complex64>)],
    coeff: Complex64,
) -> Result<()> {
    let n = space.dim();
    if target.nrows() != n || target.ncols() != n {
        return Err(Error::InvalidDimension {
            dim: target.nrows(),
            reason: "target matrix does not match the space label",
        });
    }
    let strides = space.strides();
    // For each factor and each local row: (column shift in the full index, value).
    let mut local: Vec<(usize, usize, Vec<Vec<(isize, Complex64)>>)> = Vec::new();
    for (name, m) in factors {
        let pos = space
            .position(name)
            .ok_or_else(|| Error::Label(format!("unknown subsystem `{name}`")))?;
        let d = space.subsystems[pos].dim;
        if m.nrows() != d || m.ncols() != d {
            return Err(Error::InvalidDimension {
                dim: m.nrows(),
                reason: "factor dimension does not match its subsystem",
            });
        }
        if local.iter().any(|(p, _, _)| *p == pos) {
            return Err(Error::Label(format!("subsystem `{name}` appears twice")));
        }
        let rows = (0..d)
            .map(|r| {
                (0..d)
                    .filter(|&c| m[(r, c)] != ZERO)
                    .map(|c| ((c as isize - r as isize) * strides[pos] as isize, m[(r, c)]))
                    .collect()
            })
            .collect();
        local.push((pos, d, rows));
    }

    let mut terms: Vec<(isize, Complex64)> = Vec::new();
    let mut next: Vec<(isize, Complex64)> = Vec::new();
    for i in 0..n {
        terms.clear();
        terms.push((0, coeff));
        for (pos, d, rows) in &local {
            let r = (i / strides[*pos]) % d;
            next.clear();
            for &(shift, v) in &terms {
                for &(s, w) in &rows[r] {
                    next.push((shift + s, v * w));
                }
            }
            std::mem::swap(&mut terms, &mut next);
            if terms.is_empty() {
                break;
            }
        }
        for &(shift, v) in &terms {
            let j = (i as isize + shift) as usize;
            target[(i, j)] += v;
        }
    }
    Ok(())
}

#[derive(Clone, Debug)]
pub struct StateVector {
    space: SpaceLabel,
    amplitudes: DVector<Complex64>,
}

impl StateVector {
    /// Wraps already-normalized amplitudes, checking the norm to [`NORM_TOL`].
    pub fn new(space: SpaceLabel, amplitudes: DVector<Complex64>) -> Result<Self> {
        if amplitudes.len() != space.dim() {
            return Err(Error::InvalidDimension {
                dim: amplitudes.len(),
                reason: "amplitude count does not match the space label",
            });
        }
        let norm = amplitudes.norm();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::Domain(format!("state norm {norm} differs from 1")));
        }
        Ok(Self { space, amplitudes })
    }

    /// Normalizes the amplitudes first.
    pub fn normalized(space: SpaceLabel, amplitudes: DVector<Complex64>) -> Result<Self> {
        let norm = amplitudes.norm();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::Domain("cannot normalize a zero vector".into()));
        }
        Self::new(space, amplitudes / Complex64::new(norm, 0.0))
    }

    /// Fock basis state `|n>` of a single subsystem.
    pub fn basis(space: SpaceLabel, index: usize) -> Result<Self> {
        let n = space.dim();
        if index >= n {
            return Err(Error::OutOfRange {
                what: "basis index",
                value: index,
                max: n.saturating_sub(1),
            });
        }
        let mut v = DVector::zeros(n);
        v[index] = ONE;
        Self::new(space, v)
    }

    pub fn space(&self) -> &SpaceLabel {
        &self.space
    }

    pub fn amplitudes(&self) -> &DVector<Complex64> {
        &self.amplitudes
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &StateVector) -> Result<Complex64> {
        if self.space != other.space {
            return Err(Error::Label("inner product between different spaces".into()));
        }
        Ok(self.amplitudes.dotc(&other.amplitudes))
    }

    pub fn relabeled(self, names: &[&str]) -> Result<Self> {
        Ok(Self {
            space: self.space.renamed(names)?,
            ..self
        })
    }
}

#[derive(Clone, Debug)]
pub struct DensityMatrix {
    space: SpaceLabel,
    matrix: DMatrix<Complex64>,
}

impl DensityMatrix {
    /// Checks shape, hermiticity and unit trace. Positivity is checked separately
    /// by [`DensityMatrix::min_eigenvalue`] since it costs a diagonalization.
    pub fn new(space: SpaceLabel, matrix: DMatrix<Complex64>) -> Result<Self> {
        let n = space.dim();
        if matrix.nrows() != n || matrix.ncols() != n {
            return Err(Error::InvalidDimension {
                dim: matrix.nrows(),
                reason: "matrix shape does not match the space label",
            });
        }
        let defect = max_hermitian_defect(&matrix);
        if defect >= HERMITIAN_TOL {
            return Err(Error::NotHermitian { defect });
        }
        let tr = matrix.trace();
        if (tr.re - 1.0).abs() > TRACE_TOL || tr.im.abs() > TRACE_TOL {
            return Err(Error::Domain(format!("density matrix trace {tr} differs from 1")));
        }
        Ok(Self { space, matrix })
    }

    /// Hermitian part of `matrix`, rescaled to unit trace.
    pub(crate) fn from_unnormalized(space: SpaceLabel, matrix: DMatrix<Complex64>) -> Result<Self> {
        let sym = (&matrix + matrix.adjoint()) * Complex64::new(0.5, 0.0);
        let tr = sym.trace().re;
        if tr <= 0.0 || !tr.is_finite() {
            return Err(Error::Domain(format!("cannot normalize a matrix with trace {tr}")));
        }
        Self::new(space, sym / Complex64::new(tr, 0.0))
    }

    pub fn pure(state: &StateVector) -> Self {
        let v = &state.amplitudes;
        Self {
            space: state.space.clone(),
            matrix: v * v.adjoint(),
        }
    }

    /// `sum_i p_i rho_i` over density matrices on the same space.
    pub fn mixture(parts: &[(f64, &DensityMatrix)]) -> Result<Self> {
        let first = parts
            .first()
            .ok_or_else(|| Error::Domain("empty mixture".into()))?
            .1;
        let mut m = DMatrix::zeros(first.dim(), first.dim());
        for (p, rho) in parts {
            if rho.space != first.space {
                return Err(Error::Label("mixture of states on different spaces".into()));
            }
            if *p < 0.0 {
                return Err(Error::Domain(format!("negative mixture weight {p}")));
            }
            m += &rho.matrix * Complex64::new(*p, 0.0);
        }
        Self::new(first.space.clone(), m)
    }

    pub fn space(&self) -> &SpaceLabel {
        &self.space
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn trace(&self) -> Complex64 {
        self.matrix.trace()
    }

    /// `tr[rho^2]`.
    pub fn purity(&self) -> f64 {
        // tr[rho rho] = sum_ij |rho_ij|^2 for hermitian rho
        self.matrix.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn expectation(&self, op: &Operator) -> Result<Complex64> {
        op.check_same_space(&self.space)?;
        Ok((&self.matrix * op.matrix()).trace())
    }

    /// `<psi| rho |psi>`.
    pub fn overlap(&self, state: &StateVector) -> Result<f64> {
        if state.space != self.space {
            return Err(Error::Label("overlap between different spaces".into()));
        }
        let v = &state.amplitudes;
        Ok(v.dotc(&(&self.matrix * v)).re)
    }

    pub fn min_eigenvalue(&self) -> Result<f64> {
        let eig = linalg::eigh_matrix(&self.matrix)?;
        Ok(eig.values.first().copied().unwrap_or(0.0))
    }

    pub fn eigen(&self) -> Result<linalg::Eigen> {
        linalg::eigh_matrix(&self.matrix)
    }

    /// Conjugation `U rho U^dagger` by an operator on the same space.
    pub fn conjugated(&self, unitary: &Operator) -> Result<Self> {
        unitary.check_same_space(&self.space)?;
        let m = unitary.matrix() * &self.matrix * unitary.matrix().adjoint();
        Self::from_unnormalized(self.space.clone(), m)
    }
}

/// The three Pauli operators on a subsystem named [`QUBIT`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Pauli {
    X,
    Y,
    Z,
}

pub fn pauli(kind: Pauli) -> Operator {
    let i = Complex64::new(0.0, 1.0);
    let m = match kind {
        Pauli::X => DMatrix::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO]),
        Pauli::Y => DMatrix::from_row_slice(2, 2, &[ZERO, -i, i, ZERO]),
        Pauli::Z => DMatrix::from_row_slice(2, 2, &[ONE, ZERO, ZERO, -ONE]),
    };
    Operator {
        space: SpaceLabel::single(QUBIT, 2).expect("valid label"),
        matrix: m,
        hermitian: true,
    }
}

/// Annihilation matrix `a|n> = sqrt(n)|n-1>` on an `dim`-level truncation.
pub(crate) fn annihilation_matrix(dim: usize) -> DMatrix<Complex64> {
    let mut a = DMatrix::zeros(dim, dim);
    for n in 1..dim {
        a[(n - 1, n)] = Complex64::new((n as f64).sqrt(), 0.0);
    }
    a
}

/// Ladder operators `(a, a^dagger)` on a subsystem named [`RESONATOR`].
pub fn ladder_ops(dim: usize) -> Result<(Operator, Operator)> {
    ladder_ops_named(RESONATOR, dim)
}

pub fn ladder_ops_named(name: &str, dim: usize) -> Result<(Operator, Operator)> {
    if dim < 2 {
        return Err(Error::InvalidDimension {
            dim,
            reason: "ladder operators need at least two levels",
        });
    }
    let space = SpaceLabel::single(name, dim)?;
    let a = annihilation_matrix(dim);
    let ad = a.adjoint();
    Ok((
        Operator {
            space: space.clone(),
            matrix: a,
            hermitian: false,
        },
        Operator {
            space,
            matrix: ad,
            hermitian: false,
        },
    ))
}

/// Number operator `a^dagger a` on [`RESONATOR`].
pub fn number_op(dim: usize) -> Result<Operator> {
    if dim < 1 {
        return Err(Error::InvalidDimension {
            dim,
            reason: "number operator needs a positive dimension",
        });
    }
    let space = SpaceLabel::single(RESONATOR, dim)?;
    let m = DMatrix::from_diagonal(&DVector::from_fn(dim, |n, _| Complex64::new(n as f64, 0.0)));
    Ok(Operator {
        space,
        matrix: m,
        hermitian: true,
    })
}

/// Photon parity `exp(i pi a^dagger a)` on [`RESONATOR`].
pub fn parity_op(dim: usize) -> Result<Operator> {
    let space = SpaceLabel::single(RESONATOR, dim)?;
    let m = DMatrix::from_diagonal(&DVector::from_fn(dim, |n, _| {
        Complex64::new(if n % 2 == 0 { 1.0 } else { -1.0 }, 0.0)
    }));
    Ok(Operator {
        space,
        matrix: m,
        hermitian: true,
    })
}

/// Displacement matrix `exp(alpha a^dagger - alpha^* a)` on the truncated space.
///
/// The generator `G` is anti-hermitian, so `K = iG` is hermitian with
/// `K = V diag(l) V^dagger`, and `exp(G) = V diag(exp(-i l)) V^dagger` is unitary up
/// to eigensolver round-off.
pub(crate) fn displacement_matrix(alpha: Complex64, dim: usize) -> Result<DMatrix<Complex64>> {
    if dim < 1 {
        return Err(Error::InvalidDimension {
            dim,
            reason: "displacement needs a positive dimension",
        });
    }
    if alpha == ZERO || dim == 1 {
        return Ok(DMatrix::identity(dim, dim));
    }
    let a = annihilation_matrix(dim);
    let generator = a.adjoint() * alpha - &a * alpha.conj();
    let mut k = generator * Complex64::new(0.0, 1.0);
    // Remove round-off asymmetry before handing the lower triangle to LAPACK.
    k = (&k + k.adjoint()) * Complex64::new(0.5, 0.0);
    let eig = linalg::eigh_matrix(&k)?;
    let phases = DVector::from_iterator(
        dim,
        eig.values.iter().map(|&l| Complex64::new(0.0, -l).exp()),
    );
    let v = &eig.vectors;
    Ok(v * DMatrix::from_diagonal(&phases) * v.adjoint())
}

/// Displacement operator on [`RESONATOR`]. Accuracy is the caller's concern:
/// see [`recommended_dim`].
pub fn displacement_op(alpha: Complex64, dim: usize) -> Result<Operator> {
    let space = SpaceLabel::single(RESONATOR, dim)?;
    Ok(Operator {
        space,
        matrix: displacement_matrix(alpha, dim)?,
        hermitian: false,
    })
}

/// Coherent state `|alpha>` on [`RESONATOR`], built from the Fock amplitudes
/// `exp(-|alpha|^2/2) alpha^n / sqrt(n!)` and renormalized on the truncation.
pub fn coherent_state(alpha: Complex64, dim: usize) -> Result<StateVector> {
    if dim < 1 {
        return Err(Error::InvalidDimension {
            dim,
            reason: "coherent state needs a positive dimension",
        });
    }
    let mut amps = DVector::zeros(dim);
    let mut c = Complex64::new((-0.5 * alpha.norm_sqr()).exp(), 0.0);
    for n in 0..dim {
        if n > 0 {
            c = c * alpha / (n as f64).sqrt();
        }
        amps[n] = c;
    }
    StateVector::normalized(SpaceLabel::single(RESONATOR, dim)?, amps)
}

/// Resonator truncation needed for a coherent-state fidelity above `1 - 1e-8`:
/// `|alpha|^2 + 6 |alpha| + 10`, rounded up.
pub fn recommended_dim(alpha_abs: f64) -> usize {
    let n = alpha_abs * alpha_abs;
    (n + 6.0 * n.sqrt() + 10.0).ceil() as usize
}

pub fn tensor_ops(ops: &[&Operator]) -> Result<Operator> {
    let (first, rest) = ops
        .split_first()
        .ok_or_else(|| Error::Label("tensor product of nothing".into()))?;
    let mut out = (*first).clone();
    for op in rest {
        out = Operator {
            space: out.space.concat(&op.space)?,
            matrix: out.matrix.kronecker(&op.matrix),
            hermitian: out.hermitian && op.hermitian,
        };
    }
    Ok(out)
}

pub fn tensor_states(states: &[&StateVector]) -> Result<StateVector> {
    let (first, rest) = states
        .split_first()
        .ok_or_else(|| Error::Label("tensor product of nothing".into()))?;
    let mut out = (*first).clone();
    for s in rest {
        out = StateVector {
            space: out.space.concat(&s.space)?,
            amplitudes: out.amplitudes.kronecker(&s.amplitudes),
        };
    }
    Ok(out)
}

pub fn tensor_densities(parts: &[&DensityMatrix]) -> Result<DensityMatrix> {
    let (first, rest) = parts
        .split_first()
        .ok_or_else(|| Error::Label("tensor product of nothing".into()))?;
    let mut out = (*first).clone();
    for r in rest {
        out = DensityMatrix {
            space: out.space.concat(&r.space)?,
            matrix: out.matrix.kronecker(&r.matrix),
        };
    }
    Ok(out)
}

/// Reduced density matrix on the subsystems named in `keep`.
pub fn partial_trace(rho: &DensityMatrix, keep: &[&str]) -> Result<DensityMatrix> {
    let (kept, mask) = rho.space.select(keep)?;
    let traced_mask: Vec<bool> = mask.iter().map(|k| !k).collect();
    let keep_off = rho.space.offsets(&mask);
    let trace_off = rho.space.offsets(&traced_mask);
    let m = &rho.matrix;
    let out = DMatrix::from_fn(keep_off.len(), keep_off.len(), |r, c| {
        trace_off
            .iter()
            .map(|&t| m[(keep_off[r] + t, keep_off[c] + t)])
            .sum()
    });
    Ok(DensityMatrix {
        space: kept,
        matrix: out,
    })
}

/// Reduced density matrix of a pure state, without forming `|psi><psi|` on the
/// full space.
pub fn partial_trace_pure(state: &StateVector, keep: &[&str]) -> Result<DensityMatrix> {
    let (kept, mask) = state.space.select(keep)?;
    let traced_mask: Vec<bool> = mask.iter().map(|k| !k).collect();
    let keep_off = state.space.offsets(&mask);
    let trace_off = state.space.offsets(&traced_mask);
    let psi = &state.amplitudes;
    // Reshape into (kept x traced) and form M M^dagger.
    let block = DMatrix::from_fn(keep_off.len(), trace_off.len(), |r, t| psi[keep_off[r] + trace_off[t]]);
    let out = &block * block.adjoint();
    Ok(DensityMatrix {
        space: kept,
        matrix: out,
    })
}
