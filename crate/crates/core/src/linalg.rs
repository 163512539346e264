//! Dense hermitian eigensolver backed by LAPACK's MRRR drivers (`?syevr`/`?heevr`).
//!
//! Real-valued input (every imaginary part exactly zero) is routed through the
//! real symmetric driver, which is roughly four times cheaper. Eigenvalues come
//! back in ascending order and eigenvectors as orthonormal columns.

extern crate openblas_src;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::hilbert::Operator;

/// Eigenvalues (ascending) and the matching eigenvectors stored as columns.
#[derive(Clone, Debug)]
pub struct Eigen {
    pub values: Vec<f64>,
    pub vectors: DMatrix<Complex64>,
}

#[derive(Clone, Copy)]
enum Selection {
    All,
    /// 1-based inclusive index range, as LAPACK expects.
    Indices(usize, usize),
}

/// Full spectral decomposition of a hermitian operator.
pub fn hermitian_eig(op: &Operator) -> Result<Eigen> {
    require_hermitian(op)?;
    eig_matrix(op.matrix(), Selection::All)
}

/// The `count` lowest eigenpairs of a hermitian operator.
pub fn lowest_eigenpairs(op: &Operator, count: usize) -> Result<Eigen> {
    require_hermitian(op)?;
    let n = op.matrix().nrows();
    if count == 0 || count > n {
        return Err(Error::OutOfRange {
            what: "eigenpair count",
            value: count,
            max: n,
        });
    }
    eig_matrix(op.matrix(), Selection::Indices(1, count))
}

/// Spectral decomposition of a raw hermitian matrix. Only the lower triangle is read.
pub(crate) fn eigh_matrix(m: &DMatrix<Complex64>) -> Result<Eigen> {
    eig_matrix(m, Selection::All)
}

fn require_hermitian(op: &Operator) -> Result<()> {
    if op.is_hermitian() {
        Ok(())
    } else {
        Err(Error::NotHermitian {
            defect: op.hermiticity_defect(),
        })
    }
}

fn eig_matrix(m: &DMatrix<Complex64>, sel: Selection) -> Result<Eigen> {
    let n = m.nrows();
    assert_eq!(n, m.ncols(), "eigensolver needs a square matrix");
    if n == 0 {
        return Ok(Eigen {
            values: Vec::new(),
            vectors: DMatrix::zeros(0, 0),
        });
    }
    let real = m.iter().all(|z| z.im == 0.0);
    let complex = |m: &DMatrix<Complex64>| match sel {
        Selection::All => complex_heevr(m),
        Selection::Indices(lo, hi) => complex_heevx(m, lo, hi),
    };
    if real {
        let eig = match sel {
            Selection::All => real_syevr(m)?,
            Selection::Indices(lo, hi) => real_syevx(m, lo, hi)?,
        };
        // Some OpenBLAS kernels (seen with 0.3.20 on AVX-512 hosts detected as
        // Cooperlake) return wrong real eigenvectors. Checked results fall back
        // to the complex routines, which are unaffected there.
        if residual_ok(m, &eig) {
            return Ok(eig);
        }
    }
    let eig = complex(m)?;
    if residual_ok(m, &eig) {
        Ok(eig)
    } else {
        Err(Error::InaccurateEigenpairs)
    }
}

/// Spot check of up to four eigenpairs: unit norm and `|A v - l v| <= 1e-8 |A|`.
fn residual_ok(m: &DMatrix<Complex64>, eig: &Eigen) -> bool {
    let found = eig.values.len();
    if found == 0 {
        return false;
    }
    let scale = spectral_bound(m).max(1.0);
    let picks = [0, found / 3, (2 * found) / 3, found - 1];
    picks.iter().all(|&k| {
        let v = eig.vectors.column(k);
        let r = m * v - v * Complex64::new(eig.values[k], 0.0);
        (v.norm() - 1.0).abs() < 1e-8 && r.camax() <= 1e-8 * scale
    })
}

fn real_syevr(m: &DMatrix<Complex64>) -> Result<Eigen> {
    let n = m.nrows();
    let ni = n as i32;
    // nalgebra storage is column-major, matching LAPACK.
    let mut a: Vec<f64> = m.iter().map(|z| z.re).collect();
    let mut found = 0i32;
    let mut w = vec![0.0; n];
    let mut z = vec![0.0; n * n];
    let mut isuppz = vec![0i32; 2 * n];
    let mut info = 0i32;

    let mut work_q = [0.0f64];
    let mut iwork_q = [0i32];
    unsafe {
        lapack::dsyevr(
            b'V', b'A', b'L', ni, &mut a, ni, 0.0, 0.0, 1, ni, 0.0, &mut found, &mut w,
            &mut z, ni, &mut isuppz, &mut work_q, -1, &mut iwork_q, -1, &mut info,
        );
    }
    if info != 0 {
        return Err(Error::Eigensolver(info));
    }
    let lwork = work_q[0] as i32;
    let liwork = iwork_q[0];
    let mut work = vec![0.0; lwork as usize];
    let mut iwork = vec![0i32; liwork as usize];
    unsafe {
        lapack::dsyevr(
            b'V', b'A', b'L', ni, &mut a, ni, 0.0, 0.0, 1, ni, 0.0, &mut found, &mut w,
            &mut z, ni, &mut isuppz, &mut work, lwork, &mut iwork, liwork, &mut info,
        );
    }
    if info != 0 {
        return Err(Error::Eigensolver(info));
    }
    Ok(real_result(n, found as usize, w, &z))
}

fn real_syevx(m: &DMatrix<Complex64>, lo: usize, hi: usize) -> Result<Eigen> {
    let n = m.nrows();
    let ni = n as i32;
    let cols = hi - lo + 1;
    let mut a: Vec<f64> = m.iter().map(|z| z.re).collect();
    let mut found = 0i32;
    let mut w = vec![0.0; n];
    let mut z = vec![0.0; n * cols];
    let mut iwork = vec![0i32; 5 * n];
    let mut ifail = vec![0i32; n];
    let mut info = 0i32;
    let abstol = 2.0 * f64::MIN_POSITIVE;

    let mut work_q = [0.0f64];
    unsafe {
        lapack::dsyevx(
            b'V', b'I', b'L', ni, &mut a, ni, 0.0, 0.0, lo as i32, hi as i32, abstol, &mut found,
            &mut w, &mut z, ni, &mut work_q, -1, &mut iwork, &mut ifail, &mut info,
        );
    }
    if info != 0 {
        return Err(Error::Eigensolver(info));
    }
    let lwork = (work_q[0] as i32).max(8 * ni);
    let mut work = vec![0.0; lwork as usize];
    unsafe {
        lapack::dsyevx(
            b'V', b'I', b'L', ni, &mut a, ni, 0.0, 0.0, lo as i32, hi as i32, abstol, &mut found,
            &mut w, &mut z, ni, &mut work, lwork, &mut iwork, &mut ifail, &mut info,
        );
    }
    if info != 0 {
        return Err(Error::Eigensolver(info));
    }
    Ok(real_result(n, found as usize, w, &z))
}

fn real_result(n: usize, found: usize, mut w: Vec<f64>, z: &[f64]) -> Eigen {
    w.truncate(found);
    let vectors = DMatrix::from_iterator(n, found, z[..n * found].iter().map(|&x| Complex64::new(x, 0.0)));
    Eigen { values: w, vectors }
}

fn complex_heevr(m: &DMatrix<Complex64>) -> Result<Eigen> {
    let n = m.nrows();
    let ni = n as i32;
    let mut a: Vec<Complex64> = m.iter().copied().collect();
    let mut found = 0i32;
    let mut w = vec![0.0; n];
    let mut z = vec![Complex64::new(0.0, 0.0); n * n];
    let mut isuppz = vec![0i32; 2 * n];
    let mut info = 0i32;

    let mut work_q = [Complex64::new(0.0, 0.0)];
    let mut rwork_q = [0.0f64];
    let mut iwork_q = [0i32];
    unsafe {
        lapack::zheevr(
            b'V', b'A', b'L', ni, &mut a, ni, 0.0, 0.0, 1, ni, 0.0, &mut found, &mut w,
            &mut z, ni, &mut isuppz, &mut work_q, -1, &mut rwork_q, -1, &mut iwork_q, -1,
            &mut info,
        );
    }
    if info != 0 {
        return Err(Error::Eigensolver(info));
    }
    let lwork = work_q[0].re as i32;
    let lrwork = rwork_q[0] as i32;
    let liwork = iwork_q[0];
    let mut work = vec![Complex64::new(0.0, 0.0); lwork as usize];
    let mut rwork = vec![0.0; lrwork as usize];
    let mut iwork = vec![0i32; liwork as usize];
    unsafe {
        lapack::zheevr(
            b'V', b'A', b'L', ni, &mut a, ni, 0.0, 0.0, 1, ni, 0.0, &mut found, &mut w,
            &mut z, ni, &mut isuppz, &mut work, lwork, &mut rwork, lrwork, &mut iwork, liwork,
            &mut info,
        );
    }
    if info != 0 {
        return Err(Error::Eigensolver(info));
    }
    Ok(complex_result(n, found as usize, w, &z))
}

fn complex_heevx(m: &DMatrix<Complex64>, lo: usize, hi: usize) -> Result<Eigen> {
    let n = m.nrows();
    let ni = n as i32;
    let cols = hi - lo + 1;
    let mut a: Vec<Complex64> = m.iter().copied().collect();
    let mut found = 0i32;
    let mut w = vec![0.0; n];
    let mut z = vec![Complex64::new(0.0, 0.0); n * cols];
    let mut rwork = vec![0.0; 7 * n];
    let mut iwork = vec![0i32; 5 * n];
    let mut ifail = vec![0i32; n];
    let mut info = 0i32;
    let abstol = 2.0 * f64::MIN_POSITIVE;

    let mut work_q = [Complex64::new(0.0, 0.0)];
    unsafe {
        lapack::zheevx(
            b'V', b'I', b'L', ni, &mut a, ni, 0.0, 0.0, lo as i32, hi as i32, abstol, &mut found,
            &mut w, &mut z, ni, &mut work_q, -1, &mut rwork, &mut iwork, &mut ifail, &mut info,
        );
    }
    if info != 0 {
        return Err(Error::Eigensolver(info));
    }
    let lwork = (work_q[0].re as i32).max(2 * ni);
    let mut work = vec![Complex64::new(0.0, 0.0); lwork as usize];
    unsafe {
        lapack::zheevx(
            b'V', b'I', b'L', ni, &mut a, ni, 0.0, 0.0, lo as i32, hi as i32, abstol, &mut found,
            &mut w, &mut z, ni, &mut work, lwork, &mut rwork, &mut iwork, &mut ifail, &mut info,
        );
    }
    if info != 0 {
        return Err(Error::Eigensolver(info));
    }
    Ok(complex_result(n, found as usize, w, &z))
}

fn complex_result(n: usize, found: usize, mut w: Vec<f64>, z: &[Complex64]) -> Eigen {
    w.truncate(found);
    let vectors = DMatrix::from_column_slice(n, found, &z[..n * found]);
    Eigen { values: w, vectors }
}

/// Upper bound on the spectral radius (maximum absolute row sum).
pub(crate) fn spectral_bound(m: &DMatrix<Complex64>) -> f64 {
    m.row_iter()
        .map(|row| row.iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}
